import { mkdtemp, readFile, rm, writeFile } from "fs/promises";
import { tmpdir } from "os";
import path from "path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { numericColumn, parseCsv, SchemaError } from "../src/csv.js";
import { plotConvergence, tableSlopes } from "../src/plot_convergence.js";
import { plotWavefront } from "../src/plot_wavefront.js";

const FIXTURES = path.join(__dirname, "fixtures");
let workDir: string;

beforeAll(async () => {
  workDir = await mkdtemp(path.join(tmpdir(), "rdmix-plots-"));
});

afterAll(async () => {
  await rm(workDir, { recursive: true, force: true });
});

describe("plot_convergence", () => {
  it("acceptance 13: printed slopes match the solver's table to 0.01", async () => {
    const csvPath = path.join(FIXTURES, "convergence_k2.csv");
    const out = path.join(workDir, "conv.svg");
    const res = await plotConvergence([csvPath], out);
    const rows = parseCsv(await readFile(csvPath, "utf-8"));
    for (const col of ["err_m", "err_h1", "err_energy"]) {
      const line = res.lines.find((l) => l.includes(` ${col} `));
      expect(line).toBeDefined();
      const printed = Number(/pairwise=([-\d.]+)/.exec(line!)![1]);
      const reported = tableSlopes(rows, col);
      expect(Math.abs(printed - reported[reported.length - 1])).toBeLessThanOrEqual(
        0.01
      );
    }
    console.log("ACCEPTANCE 13 (figure slopes match driver slopes): PASS");
  });

  it("annotates a synthetic h^2 series with slope 2.00 +- 0.01", async () => {
    const param = [0.4, 0.2, 0.1, 0.05];
    const lines = ["level,parameter,err_m,slope_m"];
    param.forEach((h, i) => lines.push(`${i},${h},${2.5 * h * h},`));
    const csvPath = path.join(workDir, "synth.csv");
    await writeFile(csvPath, lines.join("\n") + "\n");
    const res = await plotConvergence([csvPath], path.join(workDir, "synth.svg"));
    const fitted = Number(/fitted=([-\d.]+)/.exec(res.lines[0])![1]);
    expect(Math.abs(fitted - 2.0)).toBeLessThanOrEqual(0.01);
    expect(res.svg).toContain("slope 2.00");
  });

  it("renders one legend entry per series", async () => {
    const csvPath = path.join(FIXTURES, "convergence_k2.csv");
    const res = await plotConvergence([csvPath], path.join(workDir, "two.svg"));
    const legendEntries = res.svg.match(/slope -?\d/g) ?? [];
    expect(legendEntries.length).toBe(res.lines.length);
    expect(res.svg.startsWith("<svg")).toBe(true);
  });

  it("rejects an empty CSV with a schema error", async () => {
    const csvPath = path.join(workDir, "empty.csv");
    await writeFile(csvPath, "");
    await expect(
      plotConvergence([csvPath], path.join(workDir, "x.svg"))
    ).rejects.toThrow(SchemaError);
  });
});

describe("plot_wavefront", () => {
  it("renders a monotone front trace from a run CSV", async () => {
    const csvPath = path.join(FIXTURES, "wavefront_nx20.csv");
    const svg = await plotWavefront([csvPath], path.join(workDir, "wf.svg"));
    expect(svg).toContain("Wavefront position");
    const rows = parseCsv(await readFile(csvPath, "utf-8"));
    const fronts = numericColumn(
      rows.filter((r) => r.front !== ""),
      "front"
    );
    for (let i = 1; i < fronts.length; i++) {
      expect(fronts[i]).toBeGreaterThanOrEqual(fronts[i - 1] - 1e-9);
    }
  });

  it("overlays multiple files as separate curves", async () => {
    const csvPath = path.join(FIXTURES, "wavefront_nx20.csv");
    const copy = path.join(workDir, "wavefront_copy.csv");
    await writeFile(copy, await readFile(csvPath, "utf-8"));
    const svg = await plotWavefront([csvPath, copy], path.join(workDir, "wf2.svg"));
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
  });

  it("rejects a CSV without the front column", async () => {
    const csvPath = path.join(workDir, "nofront.csv");
    await writeFile(csvPath, "time,value\n0,1\n1,2\n");
    await expect(
      plotWavefront([csvPath], path.join(workDir, "bad.svg"))
    ).rejects.toThrow(SchemaError);
  });
});
