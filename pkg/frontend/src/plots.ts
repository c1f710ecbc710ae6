import { existsSync, readdirSync, readFileSync } from "fs";
import { join, basename } from "path";
import { numericColumn, readTable, Table } from "./csv";
import { axisCoord, FieldDump, readFieldDump } from "./fnls1";
import {
  buildBarChart, buildHeatmap, buildLineChart, esc, num, BarGroup, Series,
} from "./chart";

// Figures over the solver's run directories. Everything here reads
// persisted files only; nothing imports or invokes the solver.

const BLUE = "#2563b0";
const ORANGE = "#e07b39";
const GRAY = "#888888";

function peakInfo(xs: number[], ys: number[]): string {
  let k = 0;
  for (let i = 1; i < ys.length; i++) {
    if (Math.abs(ys[i]) > Math.abs(ys[k])) k = i;
  }
  return `peak ${num(ys[k])} at x = ${num(xs[k])}`;
}

function fieldLineChart(xs: number[], ys: number[], subtitle: string): string {
  return buildLineChart({
    title: "field profile",
    subtitle,
    xLabel: "x",
    yLabel: "u(x)",
    series: [{ label: "", x: xs, y: ys, color: BLUE }],
  });
}

function fieldFromDump(dump: FieldDump, label: string): string {
  const meta = `N=${dump.n} M=${dump.m} L=${num(dump.l)} s=${num(dump.s)}`;
  if (dump.n === 1) {
    const xs = Array.from(dump.values, (_, i) => axisCoord(dump, i));
    const ys = Array.from(dump.values);
    return fieldLineChart(xs, ys, `${meta}, ${peakInfo(xs, ys)}`);
  }
  if (dump.n === 2) {
    return buildHeatmap(dump, {
      title: "field heatmap",
      subtitle: meta,
      xLabel: "x0",
      yLabel: "x1",
    });
  }
  throw new Error(`${label}: only 1d and 2d field dumps render`);
}

function fieldFromCsv(path: string): string {
  const table = readTable(path);
  const values = numericColumn(table, "value", path);
  const x0 = numericColumn(table, "x0", path);
  if (table.columns.includes("x1")) {
    const m = Math.round(Math.sqrt(values.length));
    if (m * m !== values.length) {
      throw new Error(`${path}: 2d export has ${values.length} rows, not a square mesh`);
    }
    const l = -Math.min(...x0);
    return buildHeatmap({ m, l, values }, {
      title: "field heatmap",
      subtitle: `${m} x ${m} mesh on [-${num(l)}, ${num(l)})^2`,
      xLabel: "x0",
      yLabel: "x1",
    });
  }
  const l = -Math.min(...x0);
  return fieldLineChart(x0, values,
    `${values.length} mesh points on [-${num(l)}, ${num(l)}), ${peakInfo(x0, values)}`);
}

export function plotField(path: string): string {
  if (path.endsWith(".fnls1")) return fieldFromDump(readFieldDump(path), path);
  if (path.endsWith(".csv")) return fieldFromCsv(path);
  throw new Error(`${path}: field dumps are .fnls1 files or exported .csv tables`);
}

export interface DecayFit {
  slope: number;
  intercept: number;
  r_squared: number;
  reference_slope: number;
  r_min: number;
  r_max: number;
}

export function plotDecay(reportPath: string, fit?: DecayFit): string {
  const table = readTable(reportPath);
  const radius = numericColumn(table, "radius", reportPath);
  const shellMax = numericColumn(table, "shell_max", reportPath);
  const lx: number[] = [];
  const ly: number[] = [];
  for (let i = 0; i < radius.length; i++) {
    if (radius[i] > 0 && shellMax[i] > 0) {
      lx.push(Math.log10(radius[i]));
      ly.push(Math.log10(shellMax[i]));
    }
  }
  if (lx.length < 2) {
    throw new Error(`${reportPath}: needs at least 2 positive shell maxima`);
  }
  const lo = Math.min(...lx);
  const hi = Math.max(...lx);
  const series: Series[] = [
    { label: "shell max", x: lx, y: ly, color: BLUE, markers: true },
  ];
  let subtitle: string;
  if (fit) {
    // the fit is least squares in natural log, so the slope carries over
    // to log10 axes and the intercept divides by ln 10
    const c10 = fit.intercept / Math.LN10;
    const yAt = (v: number) => fit.slope * v + c10;
    series.push({
      label: `fit slope ${num(fit.slope)}`,
      x: [lo, hi],
      y: [yAt(lo), yAt(hi)],
      color: ORANGE,
    });
    const mid = (lo + hi) / 2;
    series.push({
      label: `reference slope ${num(fit.reference_slope)}`,
      x: [lo, hi],
      y: [yAt(mid) + fit.reference_slope * (lo - mid),
          yAt(mid) + fit.reference_slope * (hi - mid)],
      color: GRAY,
      dash: "6 4",
    });
    subtitle = `fit slope ${num(fit.slope)} (r² = ${num(fit.r_squared)}) over r in [${num(fit.r_min)}, ${num(fit.r_max)}], reference -(N+2s) = ${num(fit.reference_slope)}`;
  } else {
    // no persisted fit: annotate with a least-squares slope of the points
    const n = lx.length;
    const mx = lx.reduce((a, b) => a + b, 0) / n;
    const my = ly.reduce((a, b) => a + b, 0) / n;
    let sxy = 0;
    let sxx = 0;
    for (let i = 0; i < n; i++) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    subtitle = `least-squares slope ${num(sxy / sxx)} over ${n} shells`;
  }
  return buildLineChart({
    title: "shell-max decay",
    subtitle,
    xLabel: "log10 radius",
    yLabel: "log10 shell max",
    series,
  });
}

export function plotConcentration(reportPath: string): string {
  const table = readTable(reportPath);
  const eps = numericColumn(table, "eps", reportPath);
  const dist = numericColumn(table, "dist_K", reportPath);
  const last = eps.length - 1;
  let subtitle = `eps ${num(eps[last])}: dist ${num(dist[last])}`;
  if (table.columns.includes("penalty")) {
    const q = numericColumn(table, "penalty", reportPath);
    subtitle += `, penalty ${num(q[last])}`;
  }
  return buildLineChart({
    title: "concentration toward the well set",
    subtitle,
    xLabel: "eps",
    yLabel: "dist(x_eps, K)",
    series: [{ label: "", x: eps, y: dist, color: BLUE, markers: true }],
  });
}

export interface SandwichSummary {
  energy: number;
  delta_hat: number;
  eps: number;
  upper_ok: boolean;
  boundary_ok: boolean;
  max_deviation: number;
  separation?: number;
  separation_ok?: boolean;
}

export function plotSandwich(reportPath: string, summary?: SandwichSummary): string {
  const table = readTable(reportPath);
  const t = numericColumn(table, "t", reportPath);
  const upper = numericColumn(table, "upper_margin", reportPath);
  const pCols = table.columns.filter((c) => /^p_\d+$/.test(c));
  const boundary = table.columns.includes("boundary_margin")
    ? numericColumn(table, "boundary_margin", reportPath)
    : t.map(() => NaN);
  const groups: BarGroup[] = t.map((tv, i) => {
    const p = pCols.map((c) => num(table.rows[i][c] as number)).join(", ");
    return {
      label: `t=${num(tv)} p=${pCols.length > 1 ? `(${p})` : p}`,
      bars: [
        { key: "upper margin", value: upper[i], color: BLUE },
        { key: "boundary margin", value: boundary[i], color: ORANGE },
      ],
    };
  });
  let subtitle: string | undefined;
  if (summary) {
    subtitle = `E = ${num(summary.energy)}, delta_hat = ${num(summary.delta_hat)}, eps = ${num(summary.eps)}, max deviation ${num(summary.max_deviation)}`;
    if (summary.separation !== undefined) {
      subtitle += `, separation ${num(summary.separation)}`;
    }
  }
  return buildBarChart({
    title: "sandwich margins",
    subtitle,
    yLabel: "margin",
    groups,
  });
}

function readJson<T>(path: string): T {
  return JSON.parse(readFileSync(path, "utf8")) as T;
}

// smallest-eps continuation dump, or the plain field dump for single runs
export function resolveFieldDump(runDir: string): string | null {
  const plain = join(runDir, "field.fnls1");
  if (existsSync(plain)) return plain;
  let best: { eps: number; name: string } | null = null;
  for (const name of readdirSync(runDir)) {
    const m = /^field_eps(.+)\.fnls1$/.exec(name);
    if (!m) continue;
    const e = Number(m[1]);
    if (Number.isFinite(e) && (best === null || e < best.eps)) {
      best = { eps: e, name };
    }
  }
  return best ? join(runDir, best.name) : null;
}

export type FigureKind = "field" | "decay" | "concentration" | "sandwich";

export function renderFigure(kind: FigureKind, runDir: string): string {
  if (!existsSync(runDir)) throw new Error(`run directory not found: ${runDir}`);
  if (kind === "field") {
    const dump = resolveFieldDump(runDir);
    if (!dump) {
      throw new Error(`${runDir} has no field.fnls1 or field_eps*.fnls1 dump`);
    }
    return plotField(dump);
  }
  if (kind === "decay") {
    const csv = join(runDir, "decay.csv");
    if (!existsSync(csv)) {
      throw new Error(
        `${runDir} has no decay.csv; run with fit_r_min/fit_r_max configured`);
    }
    const meta = join(runDir, "decay.json");
    return plotDecay(csv, existsSync(meta) ? readJson<DecayFit>(meta) : undefined);
  }
  if (kind === "concentration") {
    const csv = join(runDir, "concentration.csv");
    if (!existsSync(csv)) throw new Error(`${runDir} has no concentration.csv`);
    return plotConcentration(csv);
  }
  const csv = join(runDir, "sandwich.csv");
  if (!existsSync(csv)) throw new Error(`${runDir} has no sandwich.csv`);
  const meta = join(runDir, "sandwich.json");
  return plotSandwich(csv, existsSync(meta) ? readJson<SandwichSummary>(meta) : undefined);
}

// minimal INI reader for run configs (configparser output: sections,
// key = value lines)
export function parseIni(text: string): Record<string, Record<string, string>> {
  const out: Record<string, Record<string, string>> = {};
  let section = "";
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (line === "" || line.startsWith("#") || line.startsWith(";")) continue;
    const sec = /^\[(.+)\]$/.exec(line);
    if (sec) {
      section = sec[1];
      out[section] = out[section] ?? {};
      continue;
    }
    const eq = line.indexOf("=");
    if (eq > 0 && section !== "") {
      out[section][line.slice(0, eq).trim()] = line.slice(eq + 1).trim();
    }
  }
  return out;
}

export function makeReport(runDir: string): string {
  if (!existsSync(runDir)) throw new Error(`run directory not found: ${runDir}`);
  const sections: { heading: string; svg: string }[] = [];
  const dump = resolveFieldDump(runDir);
  if (dump) sections.push({ heading: `field (${basename(dump)})`, svg: plotField(dump) });
  if (existsSync(join(runDir, "decay.csv"))) {
    sections.push({ heading: "decay", svg: renderFigure("decay", runDir) });
  }
  if (existsSync(join(runDir, "concentration.csv"))) {
    sections.push({ heading: "concentration", svg: renderFigure("concentration", runDir) });
  }
  if (existsSync(join(runDir, "sandwich.csv"))) {
    sections.push({ heading: "sandwich", svg: renderFigure("sandwich", runDir) });
  }
  if (sections.length === 0) {
    throw new Error(
      `no plottable outputs in ${runDir} (looked for field dumps, decay.csv, concentration.csv, sandwich.csv)`);
  }

  const meta: [string, string][] = [];
  const cfgPath = join(runDir, "config.ini");
  let runId = basename(runDir);
  if (existsSync(cfgPath)) {
    const cfg = parseIni(readFileSync(cfgPath, "utf8"));
    for (const [k, v] of Object.entries(cfg["run"] ?? {})) {
      if (k === "id") runId = v;
      meta.push([`run ${k}`, v]);
    }
  }
  const resPath = join(runDir, "result.json");
  if (existsSync(resPath)) {
    const res = readJson<Record<string, unknown>>(resPath);
    for (const k of ["converged", "iterations", "residual"]) {
      if (k in res) meta.push([k, String(res[k])]);
    }
  }
  const enPath = join(runDir, "energy.json");
  if (existsSync(enPath)) {
    const en = readJson<Record<string, number>>(enPath);
    if ("total" in en) meta.push(["energy total", num(en.total, 7)]);
  }
  const verPath = join(runDir, "versions.json");
  if (existsSync(verPath)) {
    const ver = readJson<Record<string, unknown>>(verPath);
    for (const [k, v] of Object.entries(ver)) meta.push([k, String(v)]);
  }

  let html = "<!doctype html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  html += `<title>run report: ${esc(runId)}</title>\n`;
  html += "<style>\n";
  html += "body { font: 14px/1.5 sans-serif; color: #1a1a1a; background: #ffffff; max-width: 960px; margin: 2rem auto; padding: 0 1rem; }\n";
  html += "h1 { font-size: 22px; } h2 { font-size: 16px; margin-top: 2rem; }\n";
  html += "table { border-collapse: collapse; } td { border: 1px solid #cccccc; padding: 3px 10px; }\n";
  html += "svg { max-width: 100%; height: auto; }\n";
  html += "</style>\n</head>\n<body>\n";
  html += `<h1>run report: ${esc(runId)}</h1>\n`;
  if (meta.length > 0) {
    html += "<table>\n";
    for (const [k, v] of meta) {
      html += `<tr><td>${esc(k)}</td><td>${esc(v)}</td></tr>\n`;
    }
    html += "</table>\n";
  }
  for (const sec of sections) {
    html += `<h2>${esc(sec.heading)}</h2>\n${sec.svg}`;
  }
  html += "</body>\n</html>\n";
  return html;
}
