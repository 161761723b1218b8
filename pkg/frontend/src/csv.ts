/** Minimal RFC-4180 CSV reader for the solver's output files. */

export type Row = Record<string, string>;

export class SchemaError extends Error {}

/** Parse CSV text into header-keyed string records. */
export function parseCsv(text: string): Row[] {
  const rows = splitRecords(text);
  if (rows.length === 0) {
    throw new SchemaError("empty CSV");
  }
  const header = rows[0];
  return rows.slice(1).map((cells) => {
    const row: Row = {};
    header.forEach((name, i) => {
      row[name] = cells[i] ?? "";
    });
    return row;
  });
}

function splitRecords(text: string): string[][] {
  const out: string[][] = [];
  let cell = "";
  let record: string[] = [];
  let quoted = false;
  let i = 0;
  const push = () => {
    record.push(cell);
    cell = "";
  };
  const endRecord = () => {
    push();
    if (record.length > 1 || record[0] !== "") {
      out.push(record);
    }
    record = [];
  };
  while (i < text.length) {
    const c = text[i];
    if (quoted) {
      if (c === '"') {
        if (text[i + 1] === '"') {
          cell += '"';
          i += 1;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c === '"') {
      quoted = true;
    } else if (c === ",") {
      push();
    } else if (c === "\n") {
      endRecord();
    } else if (c !== "\r") {
      cell += c;
    }
    i += 1;
  }
  if (cell !== "" || record.length > 0) {
    endRecord();
  }
  return out;
}

/** Extract a numeric column; blanks are dropped together with their rows. */
export function numericColumn(rows: Row[], name: string): number[] {
  if (rows.length === 0 || !(name in rows[0])) {
    throw new SchemaError(`missing column '${name}'`);
  }
  const vals: number[] = [];
  for (const row of rows) {
    const raw = row[name];
    if (raw === "" || raw === undefined) continue;
    const v = Number(raw);
    if (!Number.isFinite(v)) {
      throw new SchemaError(`non-numeric value '${raw}' in column '${name}'`);
    }
    vals.push(v);
  }
  return vals;
}
