/** Hand-rolled SVG charts (log-log and linear line plots). */

export interface Series {
  x: number[];
  y: number[];
  label: string;
  color: string;
}

export interface ChartOpts {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  logLog?: boolean;
  width?: number;
  height?: number;
}

const MARGIN = { left: 70, right: 20, top: 40, bottom: 50 };
const COLORS = ["#4361ee", "#e63946", "#2d6a4f", "#f77f00", "#7209b7", "#118ab2"];

export function seriesColor(i: number): string {
  return COLORS[i % COLORS.length];
}

function niceTicksLinear(lo: number, hi: number, n = 6): number[] {
  if (hi === lo) {
    return [lo];
  }
  const step = Math.pow(10, Math.floor(Math.log10((hi - lo) / n)));
  const mult = [1, 2, 5, 10].find((m) => (hi - lo) / (step * m) <= n) ?? 10;
  const s = step * mult;
  const start = Math.ceil(lo / s) * s;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * Math.abs(hi); v += s) {
    ticks.push(v);
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); Math.pow(10, e) <= hi * (1 + 1e-9); e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return String(Number(v.toPrecision(4)));
  }
  return v.toExponential(1);
}

/** Build a standalone SVG document for the chart. */
export function buildChart(opts: ChartOpts): string {
  const W = opts.width ?? 640;
  const H = opts.height ?? 480;
  const iw = W - MARGIN.left - MARGIN.right;
  const ih = H - MARGIN.top - MARGIN.bottom;
  const log = opts.logLog ?? false;

  const xs = opts.series.flatMap((s) => s.x);
  const ys = opts.series.flatMap((s) => s.y);
  const t = (v: number) => (log ? Math.log10(v) : v);
  let x0 = Math.min(...xs.map(t));
  let x1 = Math.max(...xs.map(t));
  let y0 = Math.min(...ys.map(t));
  let y1 = Math.max(...ys.map(t));
  const padX = (x1 - x0 || 1) * 0.05;
  const padY = (y1 - y0 || 1) * 0.08;
  x0 -= padX; x1 += padX; y0 -= padY; y1 += padY;

  const px = (v: number) => MARGIN.left + ((t(v) - x0) / (x1 - x0)) * iw;
  const py = (v: number) => MARGIN.top + ih - ((t(v) - y0) / (y1 - y0)) * ih;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
    `<text x="${W / 2}" y="22" text-anchor="middle" font-size="15" font-family="sans-serif">${escapeXml(opts.title)}</text>`
  );

  const xticks = log
    ? decadeTicks(Math.pow(10, x0 + padX), Math.pow(10, x1 - padX))
    : niceTicksLinear(x0 + padX, x1 - padX);
  const yticks = log
    ? decadeTicks(Math.pow(10, y0 + padY), Math.pow(10, y1 - padY))
    : niceTicksLinear(y0 + padY, y1 - padY);
  for (const v of xticks) {
    const x = px(v);
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + ih}" stroke="#ddd"/>`,
      `<text x="${x}" y="${MARGIN.top + ih + 18}" text-anchor="middle" font-size="11" font-family="sans-serif">${fmt(v)}</text>`
    );
  }
  for (const v of yticks) {
    const y = py(v);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + iw}" y2="${y}" stroke="#ddd"/>`,
      `<text x="${MARGIN.left - 6}" y="${y + 4}" text-anchor="end" font-size="11" font-family="sans-serif">${fmt(v)}</text>`
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${iw}" height="${ih}" fill="none" stroke="#333"/>`,
    `<text x="${MARGIN.left + iw / 2}" y="${H - 12}" text-anchor="middle" font-size="13" font-family="sans-serif">${escapeXml(opts.xLabel)}</text>`,
    `<text x="18" y="${MARGIN.top + ih / 2}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 18 ${MARGIN.top + ih / 2})">${escapeXml(opts.yLabel)}</text>`
  );

  opts.series.forEach((s) => {
    const pts = s.x.map((xv, i) => `${px(xv).toFixed(2)},${py(s.y[i]).toFixed(2)}`);
    parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="1.8"/>`
    );
    s.x.forEach((xv, i) => {
      parts.push(
        `<circle cx="${px(xv).toFixed(2)}" cy="${py(s.y[i]).toFixed(2)}" r="3" fill="${s.color}"/>`
      );
    });
  });

  // legend
  opts.series.forEach((s, i) => {
    const ly = MARGIN.top + 14 + 16 * i;
    const lx = MARGIN.left + 12;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${s.color}" stroke-width="2"/>`,
      `<text x="${lx + 28}" y="${ly}" font-size="12" font-family="sans-serif">${escapeXml(s.label)}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
