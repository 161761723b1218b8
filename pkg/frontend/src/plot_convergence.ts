/**
 * Log-log convergence figure from solver convergence tables.
 *
 * Usage:
 *   npx tsx src/plot_convergence.ts out.svg table1.csv [table2.csv ...]
 *
 * Each CSV must follow the solver's convergence schema (columns
 * `parameter` and one or more `err_*` error norms, parameter strictly
 * decreasing). Fitted least-squares slopes go into the legend and are
 * printed to stdout as `slope <file> <column> pairwise=<s> fitted=<s>`
 * so scripted checks can diff them against the table's own slope
 * columns.
 */

import { readFile, writeFile } from "fs/promises";
import path from "path";

import { numericColumn, parseCsv, Row, SchemaError } from "./csv.js";
import { fittedSlope, pairwiseSlopes } from "./slopes.js";
import { buildChart, Series, seriesColor } from "./svg.js";

const ERROR_COLUMNS = ["err_m", "err_h1", "err_energy"];

export interface ConvergencePlotResult {
  svg: string;
  /** printed lines, one per (file, error column) */
  lines: string[];
}

export async function plotConvergence(
  csvPaths: string[],
  outPath: string
): Promise<ConvergencePlotResult> {
  const series: Series[] = [];
  const lines: string[] = [];
  let idx = 0;
  for (const csvPath of csvPaths) {
    const rows = parseCsv(await readFile(csvPath, "utf-8"));
    const base = path.basename(csvPath).replace(/\.csv$/, "");
    const param = numericColumn(rows, "parameter");
    for (const col of ERROR_COLUMNS) {
      if (!(col in rows[0])) continue;
      const err = numericColumn(rows, col);
      const s = { param, err };
      const pw = pairwiseSlopes(s);
      const fit = fittedSlope(s);
      const finalPw = pw[pw.length - 1];
      lines.push(
        `slope ${base} ${col} pairwise=${finalPw.toFixed(4)} fitted=${fit.toFixed(4)}`
      );
      series.push({
        x: param,
        y: err,
        label: `${base} ${col} (slope ${fit.toFixed(2)})`,
        color: seriesColor(idx),
      });
      idx += 1;
    }
  }
  if (series.length === 0) {
    throw new SchemaError("no error columns found in the given CSVs");
  }
  const svg = buildChart({
    title: "Convergence",
    xLabel: "refinement parameter",
    yLabel: "error norm",
    logLog: true,
    series,
  });
  await writeFile(outPath, svg);
  return { svg, lines };
}

/** Reference slopes as reported in the table's own slope columns. */
export function tableSlopes(rows: Row[], errCol: string): number[] {
  const slopeCol = errCol.replace("err", "slope");
  return numericColumn(rows, slopeCol);
}

async function main(): Promise<void> {
  const [out, ...csvs] = process.argv.slice(2);
  if (!out || csvs.length === 0) {
    console.error(
      "usage: plot_convergence.ts <out.svg> <table.csv> [more.csv ...]"
    );
    process.exit(2);
  }
  try {
    const res = await plotConvergence(csvs, out);
    res.lines.forEach((l) => console.log(l));
    console.log(`wrote ${out}`);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      process.exit(3);
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url.endsWith(path.basename(process.argv[1]))) {
  main();
}
