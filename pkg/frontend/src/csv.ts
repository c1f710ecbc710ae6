import { readFileSync } from "fs";

// Reader for the solver's CSV reports. The writer emits plain
// comma-separated cells (floats as %.17g, ints bare, booleans as
// true/false, short tags like "p0") and never quotes, so a split-based
// parser is the whole format.

export type Cell = number | boolean | string;
export type Row = Record<string, Cell>;

export interface Table {
  columns: string[];
  rows: Row[];
}

const INT_RE = /^[+-]?\d+$/;
const FLOAT_RE = /^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/;

function parseCell(text: string): Cell {
  if (text === "true") return true;
  if (text === "false") return false;
  if (text === "nan" || text === "-nan") return NaN;
  if (text === "inf") return Infinity;
  if (text === "-inf") return -Infinity;
  if (INT_RE.test(text) || FLOAT_RE.test(text)) return Number(text);
  return text;
}

export function parseTable(text: string, label: string): Table {
  if (text === "") throw new Error(`${label}: empty file, no header`);
  if (text.includes('"')) {
    throw new Error(`${label}: quoted cells are not part of the report format`);
  }
  const lines = text.split("\n");
  if (lines[lines.length - 1] === "") lines.pop();
  const columns = lines[0].split(",");
  if (new Set(columns).size !== columns.length) {
    throw new Error(`${label}: duplicate column names [${columns.join(", ")}]`);
  }
  const rows: Row[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `${label}: row ${i} width ${cells.length} != header width ${columns.length}`);
    }
    const row: Row = {};
    for (let j = 0; j < columns.length; j++) row[columns[j]] = parseCell(cells[j]);
    rows.push(row);
  }
  return { columns, rows };
}

export function readTable(path: string): Table {
  return parseTable(readFileSync(path, "utf8"), path);
}

export function numericColumn(table: Table, name: string, label: string): number[] {
  if (!table.columns.includes(name)) {
    throw new Error(
      `${label} has no column "${name}" (columns: ${table.columns.join(", ")})`);
  }
  return table.rows.map((row, i) => {
    const v = row[name];
    if (typeof v !== "number") {
      throw new Error(`${label} column "${name}" row ${i}: "${v}" is not numeric`);
    }
    return v;
  });
}
