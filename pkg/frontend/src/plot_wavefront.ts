/**
 * Wavefront position-vs-time figure from solver run CSVs.
 *
 * Usage:
 *   npx tsx src/plot_wavefront.ts out.svg run1.csv [run2.csv ...]
 *
 * Each CSV must carry `time` and `front` columns (rows without a front
 * record are skipped). Multiple files overlay as separate curves, e.g.
 * one per mesh level.
 */

import { readFile, writeFile } from "fs/promises";
import path from "path";

import { numericColumn, parseCsv, SchemaError } from "./csv.js";
import { buildChart, Series, seriesColor } from "./svg.js";

export async function plotWavefront(
  csvPaths: string[],
  outPath: string
): Promise<string> {
  const series: Series[] = [];
  for (const [i, csvPath] of csvPaths.entries()) {
    const rows = parseCsv(await readFile(csvPath, "utf-8"));
    if (!("front" in rows[0])) {
      throw new SchemaError(`missing column 'front' in ${csvPath}`);
    }
    const withFront = rows.filter((r) => r.front !== "");
    const time = numericColumn(withFront, "time");
    const front = numericColumn(withFront, "front");
    if (time.length < 2) {
      throw new SchemaError(`fewer than two front records in ${csvPath}`);
    }
    series.push({
      x: time,
      y: front,
      label: path.basename(csvPath).replace(/\.csv$/, ""),
      color: seriesColor(i),
    });
  }
  const svg = buildChart({
    title: "Wavefront position",
    xLabel: "time",
    yLabel: "front position",
    series,
  });
  await writeFile(outPath, svg);
  return svg;
}

async function main(): Promise<void> {
  const [out, ...csvs] = process.argv.slice(2);
  if (!out || csvs.length === 0) {
    console.error("usage: plot_wavefront.ts <out.svg> <run.csv> [more.csv ...]");
    process.exit(2);
  }
  try {
    await plotWavefront(csvs, out);
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
