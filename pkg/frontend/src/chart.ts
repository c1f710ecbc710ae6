// Hand-rolled SVG charts. Everything is string concatenation with fixed
// layout constants so the same inputs always yield the same bytes.

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  width?: number;
  dash?: string;
  markers?: boolean;
  line?: boolean;
}

export interface HLine {
  y: number;
  color: string;
  dash?: string;
  label?: string;
}

export interface ChartOpts {
  title: string;
  subtitle?: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  hlines?: HLine[];
  width?: number;
  height?: number;
}

export interface BarGroup {
  label: string;
  bars: { key: string; value: number; color: string }[];
}

export interface BarChartOpts {
  title: string;
  subtitle?: string;
  yLabel: string;
  groups: BarGroup[];
  width?: number;
  height?: number;
}

export interface HeatmapOpts {
  title: string;
  subtitle?: string;
  xLabel: string;
  yLabel: string;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// short deterministic number for subtitles and legends
export function num(v: number, digits = 4): string {
  if (!Number.isFinite(v)) return String(v);
  return String(parseFloat(v.toPrecision(digits)));
}

export interface Ticks {
  ticks: number[];
  lo: number;
  hi: number;
  step: number;
}

export function niceTicks(lo: number, hi: number, count = 6): Ticks {
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    throw new Error(`cannot build an axis over [${lo}, ${hi}]`);
  }
  if (lo > hi) [lo, hi] = [hi, lo];
  if (lo === hi) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.5 : 1.0;
    lo -= pad;
    hi += pad;
  }
  const raw = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = mag * (norm < 1.5 ? 1 : norm < 3 ? 2 : norm < 7 ? 5 : 10);
  const lo2 = Math.floor(lo / step) * step;
  const hi2 = Math.ceil(hi / step) * step;
  const n = Math.round((hi2 - lo2) / step);
  const ticks: number[] = [];
  for (let i = 0; i <= n; i++) ticks.push(lo2 + i * step);
  return { ticks, lo: lo2, hi: hi2, step };
}

export function tickLabel(v: number, step: number): string {
  const d = Math.max(0, Math.min(10, -Math.floor(Math.log10(step))));
  const t = v.toFixed(d);
  return t === "-" + (0).toFixed(d) ? (0).toFixed(d) : t;
}

const FONT = "sans-serif";
const M_TOP = 64;
const M_RIGHT = 24;
const M_BOTTOM = 58;
const M_LEFT = 76;

function header(w: number, h: number, title: string, subtitle?: string): string {
  let s = `<svg xmlns="http://www.w3.org/2000/svg" width="${w}" height="${h}" viewBox="0 0 ${w} ${h}">\n`;
  s += `<rect x="0" y="0" width="${w}" height="${h}" fill="#ffffff"/>\n`;
  s += `<text x="16" y="26" font-family="${FONT}" font-size="17" font-weight="bold" fill="#1a1a1a">${esc(title)}</text>\n`;
  if (subtitle) {
    s += `<text x="16" y="46" font-family="${FONT}" font-size="12" fill="#555555">${esc(subtitle)}</text>\n`;
  }
  return s;
}

function frame(x: number, y: number, w: number, h: number): string {
  return `<rect x="${x}" y="${y}" width="${w}" height="${h}" fill="none" stroke="#333333" stroke-width="1"/>\n`;
}

function axisLabels(w: number, h: number, xLabel: string, yLabel: string): string {
  const cx = M_LEFT + (w - M_LEFT - M_RIGHT) / 2;
  const cy = M_TOP + (h - M_TOP - M_BOTTOM) / 2;
  let s = `<text x="${cx.toFixed(1)}" y="${h - 14}" font-family="${FONT}" font-size="12" fill="#333333" text-anchor="middle">${esc(xLabel)}</text>\n`;
  s += `<text x="18" y="${cy.toFixed(1)}" font-family="${FONT}" font-size="12" fill="#333333" text-anchor="middle" transform="rotate(-90 18 ${cy.toFixed(1)})">${esc(yLabel)}</text>\n`;
  return s;
}

export function buildLineChart(opts: ChartOpts): string {
  const w = opts.width ?? 760;
  const h = opts.height ?? 460;
  const pw = w - M_LEFT - M_RIGHT;
  const ph = h - M_TOP - M_BOTTOM;

  const xs: number[] = [];
  const ys: number[] = [];
  for (const se of opts.series) {
    for (let i = 0; i < se.x.length; i++) {
      if (Number.isFinite(se.x[i]) && Number.isFinite(se.y[i])) {
        xs.push(se.x[i]);
        ys.push(se.y[i]);
      }
    }
  }
  for (const hl of opts.hlines ?? []) ys.push(hl.y);
  if (xs.length === 0) throw new Error(`${opts.title}: no finite data points`);

  const tx = niceTicks(Math.min(...xs), Math.max(...xs));
  const ty = niceTicks(Math.min(...ys), Math.max(...ys));
  const sx = (v: number) => M_LEFT + ((v - tx.lo) / (tx.hi - tx.lo)) * pw;
  const sy = (v: number) => M_TOP + ph - ((v - ty.lo) / (ty.hi - ty.lo)) * ph;

  let s = header(w, h, opts.title, opts.subtitle);
  for (const t of ty.ticks) {
    const y = sy(t).toFixed(1);
    s += `<line x1="${M_LEFT}" y1="${y}" x2="${M_LEFT + pw}" y2="${y}" stroke="#e5e5e5" stroke-width="1"/>\n`;
  }
  for (const t of tx.ticks) {
    const x = sx(t).toFixed(1);
    s += `<line x1="${x}" y1="${M_TOP}" x2="${x}" y2="${M_TOP + ph}" stroke="#f0f0f0" stroke-width="1"/>\n`;
  }
  for (const hl of opts.hlines ?? []) {
    const y = sy(hl.y).toFixed(1);
    const dash = hl.dash ?? "6 4";
    s += `<line x1="${M_LEFT}" y1="${y}" x2="${M_LEFT + pw}" y2="${y}" stroke="${hl.color}" stroke-width="1.5" stroke-dasharray="${dash}"/>\n`;
    if (hl.label) {
      s += `<text x="${M_LEFT + pw - 4}" y="${(sy(hl.y) - 5).toFixed(1)}" font-family="${FONT}" font-size="10" fill="${hl.color}" text-anchor="end">${esc(hl.label)}</text>\n`;
    }
  }
  for (const se of opts.series) {
    const lw = se.width ?? 2;
    const dash = se.dash ? ` stroke-dasharray="${se.dash}"` : "";
    if (se.line !== false) {
      // NaN cells break the polyline into segments
      let pts: string[] = [];
      const flush = () => {
        if (pts.length > 1) {
          s += `<polyline points="${pts.join(" ")}" fill="none" stroke="${se.color}" stroke-width="${lw}"${dash}/>\n`;
        }
        pts = [];
      };
      for (let i = 0; i < se.x.length; i++) {
        if (Number.isFinite(se.x[i]) && Number.isFinite(se.y[i])) {
          pts.push(`${sx(se.x[i]).toFixed(1)},${sy(se.y[i]).toFixed(1)}`);
        } else {
          flush();
        }
      }
      flush();
    }
    if (se.markers) {
      for (let i = 0; i < se.x.length; i++) {
        if (Number.isFinite(se.x[i]) && Number.isFinite(se.y[i])) {
          s += `<circle cx="${sx(se.x[i]).toFixed(1)}" cy="${sy(se.y[i]).toFixed(1)}" r="3" fill="${se.color}"/>\n`;
        }
      }
    }
  }
  s += frame(M_LEFT, M_TOP, pw, ph);
  for (const t of tx.ticks) {
    const x = sx(t).toFixed(1);
    s += `<line x1="${x}" y1="${M_TOP + ph}" x2="${x}" y2="${M_TOP + ph + 5}" stroke="#333333" stroke-width="1"/>\n`;
    s += `<text x="${x}" y="${M_TOP + ph + 18}" font-family="${FONT}" font-size="11" fill="#333333" text-anchor="middle">${tickLabel(t, tx.step)}</text>\n`;
  }
  for (const t of ty.ticks) {
    const y = sy(t);
    s += `<line x1="${M_LEFT - 5}" y1="${y.toFixed(1)}" x2="${M_LEFT}" y2="${y.toFixed(1)}" stroke="#333333" stroke-width="1"/>\n`;
    s += `<text x="${M_LEFT - 8}" y="${(y + 4).toFixed(1)}" font-family="${FONT}" font-size="11" fill="#333333" text-anchor="end">${tickLabel(t, ty.step)}</text>\n`;
  }
  s += axisLabels(w, h, opts.xLabel, opts.yLabel);

  const entries = opts.series.filter((se) => se.label !== "");
  if (entries.length > 0) {
    const lw = Math.max(...entries.map((se) => se.label.length)) * 6.5 + 40;
    const lh = entries.length * 16 + 10;
    const lx = M_LEFT + pw - lw - 8;
    const ly = M_TOP + 8;
    s += `<rect x="${lx.toFixed(1)}" y="${ly}" width="${lw.toFixed(1)}" height="${lh}" fill="#ffffff" fill-opacity="0.85" stroke="#cccccc" stroke-width="1"/>\n`;
    entries.forEach((se, i) => {
      const ey = ly + 13 + i * 16;
      const dash = se.dash ? ` stroke-dasharray="${se.dash}"` : "";
      s += `<line x1="${(lx + 8).toFixed(1)}" y1="${ey - 4}" x2="${(lx + 26).toFixed(1)}" y2="${ey - 4}" stroke="${se.color}" stroke-width="${se.width ?? 2}"${dash}/>\n`;
      s += `<text x="${(lx + 32).toFixed(1)}" y="${ey}" font-family="${FONT}" font-size="11" fill="#333333">${esc(se.label)}</text>\n`;
    });
  }
  s += "</svg>\n";
  return s;
}

export function buildBarChart(opts: BarChartOpts): string {
  const w = opts.width ?? 760;
  const h = opts.height ?? 460;
  const pw = w - M_LEFT - M_RIGHT;
  const ph = h - M_TOP - M_BOTTOM;
  if (opts.groups.length === 0) throw new Error(`${opts.title}: no bar groups`);

  const vals = opts.groups.flatMap((g) => g.bars.map((b) => b.value))
    .filter(Number.isFinite);
  if (vals.length === 0) throw new Error(`${opts.title}: no finite bar values`);
  const ty = niceTicks(Math.min(0, ...vals), Math.max(0, ...vals));
  const sy = (v: number) => M_TOP + ph - ((v - ty.lo) / (ty.hi - ty.lo)) * ph;

  // legend keys in first-appearance order, colors from the bars
  const keys: string[] = [];
  const colors: Record<string, string> = {};
  for (const g of opts.groups) {
    for (const b of g.bars) {
      if (!(b.key in colors)) {
        keys.push(b.key);
        colors[b.key] = b.color;
      }
    }
  }

  let s = header(w, h, opts.title, opts.subtitle);
  for (const t of ty.ticks) {
    const y = sy(t).toFixed(1);
    s += `<line x1="${M_LEFT}" y1="${y}" x2="${M_LEFT + pw}" y2="${y}" stroke="#e5e5e5" stroke-width="1"/>\n`;
  }
  const slot = pw / opts.groups.length;
  const bw = (slot * 0.72) / keys.length;
  opts.groups.forEach((g, gi) => {
    const x0 = M_LEFT + gi * slot + slot * 0.14;
    for (const b of g.bars) {
      if (!Number.isFinite(b.value)) continue;
      const ki = keys.indexOf(b.key);
      const x = x0 + ki * bw;
      const yv = sy(b.value);
      const y0 = sy(0);
      const top = Math.min(yv, y0);
      const bh = Math.abs(yv - y0);
      s += `<rect x="${x.toFixed(1)}" y="${top.toFixed(1)}" width="${bw.toFixed(1)}" height="${bh.toFixed(1)}" fill="${b.color}"/>\n`;
    }
    const lx = M_LEFT + gi * slot + slot / 2;
    const ly = M_TOP + ph + 16;
    s += `<text x="${lx.toFixed(1)}" y="${ly}" font-family="${FONT}" font-size="10" fill="#333333" text-anchor="end" transform="rotate(-28 ${lx.toFixed(1)} ${ly})">${esc(g.label)}</text>\n`;
  });
  const zy = sy(0).toFixed(1);
  s += `<line x1="${M_LEFT}" y1="${zy}" x2="${M_LEFT + pw}" y2="${zy}" stroke="#333333" stroke-width="1"/>\n`;
  s += frame(M_LEFT, M_TOP, pw, ph);
  for (const t of ty.ticks) {
    const y = sy(t);
    s += `<line x1="${M_LEFT - 5}" y1="${y.toFixed(1)}" x2="${M_LEFT}" y2="${y.toFixed(1)}" stroke="#333333" stroke-width="1"/>\n`;
    s += `<text x="${M_LEFT - 8}" y="${(y + 4).toFixed(1)}" font-family="${FONT}" font-size="11" fill="#333333" text-anchor="end">${tickLabel(t, ty.step)}</text>\n`;
  }
  const cy = M_TOP + ph / 2;
  s += `<text x="18" y="${cy.toFixed(1)}" font-family="${FONT}" font-size="12" fill="#333333" text-anchor="middle" transform="rotate(-90 18 ${cy.toFixed(1)})">${esc(opts.yLabel)}</text>\n`;

  const lw = Math.max(...keys.map((k) => k.length)) * 6.5 + 40;
  const lh = keys.length * 16 + 10;
  const lx = M_LEFT + pw - lw - 8;
  const ly = M_TOP + 8;
  s += `<rect x="${lx.toFixed(1)}" y="${ly}" width="${lw.toFixed(1)}" height="${lh}" fill="#ffffff" fill-opacity="0.85" stroke="#cccccc" stroke-width="1"/>\n`;
  keys.forEach((k, i) => {
    const ey = ly + 13 + i * 16;
    s += `<rect x="${(lx + 8).toFixed(1)}" y="${ey - 9}" width="10" height="10" fill="${colors[k]}"/>\n`;
    s += `<text x="${(lx + 24).toFixed(1)}" y="${ey}" font-family="${FONT}" font-size="11" fill="#333333">${esc(k)}</text>\n`;
  });
  s += "</svg>\n";
  return s;
}

// five-stop ramp, dark to bright
const RAMP = [
  [0x44, 0x01, 0x54],
  [0x3b, 0x52, 0x8b],
  [0x21, 0x91, 0x8c],
  [0x5e, 0xc9, 0x62],
  [0xfd, 0xe7, 0x25],
];

export function rampColor(t: number): string {
  const c = Math.min(1, Math.max(0, t)) * (RAMP.length - 1);
  const i = Math.min(RAMP.length - 2, Math.floor(c));
  const f = c - i;
  const hex = (a: number, b: number) =>
    Math.round(a + (b - a) * f).toString(16).padStart(2, "0");
  return `#${hex(RAMP[i][0], RAMP[i + 1][0])}${hex(RAMP[i][1], RAMP[i + 1][1])}${hex(RAMP[i][2], RAMP[i + 1][2])}`;
}

export function buildHeatmap(
  grid: { m: number; l: number; values: ArrayLike<number> },
  opts: HeatmapOpts,
): string {
  const m = grid.m;
  const l = grid.l;
  const pw = 440;
  const ph = 440;
  const barW = 14;
  const w = M_LEFT + pw + 18 + barW + 58;
  const h = M_TOP + ph + M_BOTTOM;

  let vmin = Infinity;
  let vmax = -Infinity;
  for (let i = 0; i < m * m; i++) {
    const v = grid.values[i];
    if (v < vmin) vmin = v;
    if (v > vmax) vmax = v;
  }
  if (!Number.isFinite(vmin) || !Number.isFinite(vmax)) {
    throw new Error(`${opts.title}: field has non-finite values`);
  }
  const span = vmax - vmin;
  const norm = (v: number) => (span > 0 ? (v - vmin) / span : 0.5);

  // axis maps [-l, l] to the plot box; cell (i0, i1) covers a half-open
  // square starting at the mesh point, C row-major with i0 on x
  const sx = (v: number) => M_LEFT + ((v + l) / (2 * l)) * pw;
  const sy = (v: number) => M_TOP + ph - ((v + l) / (2 * l)) * ph;
  const cell = pw / m;

  let s = header(w, h, opts.title, opts.subtitle);
  for (let i0 = 0; i0 < m; i0++) {
    const x = sx(-l + (2 * l * i0) / m);
    for (let i1 = 0; i1 < m; i1++) {
      const yTop = sy(-l + (2 * l * (i1 + 1)) / m);
      const v = grid.values[i0 * m + i1];
      s += `<rect x="${x.toFixed(2)}" y="${yTop.toFixed(2)}" width="${(cell + 0.5).toFixed(2)}" height="${(cell + 0.5).toFixed(2)}" fill="${rampColor(norm(v))}"/>\n`;
    }
  }
  s += frame(M_LEFT, M_TOP, pw, ph);
  const ticks = [-l, -l / 2, 0, l / 2, l];
  for (const t of ticks) {
    const x = sx(t).toFixed(1);
    s += `<line x1="${x}" y1="${M_TOP + ph}" x2="${x}" y2="${M_TOP + ph + 5}" stroke="#333333" stroke-width="1"/>\n`;
    s += `<text x="${x}" y="${M_TOP + ph + 18}" font-family="${FONT}" font-size="11" fill="#333333" text-anchor="middle">${num(t)}</text>\n`;
    const y = sy(t);
    s += `<line x1="${M_LEFT - 5}" y1="${y.toFixed(1)}" x2="${M_LEFT}" y2="${y.toFixed(1)}" stroke="#333333" stroke-width="1"/>\n`;
    s += `<text x="${M_LEFT - 8}" y="${(y + 4).toFixed(1)}" font-family="${FONT}" font-size="11" fill="#333333" text-anchor="end">${num(t)}</text>\n`;
  }
  const cx = M_LEFT + pw / 2;
  const cy = M_TOP + ph / 2;
  s += `<text x="${cx}" y="${h - 14}" font-family="${FONT}" font-size="12" fill="#333333" text-anchor="middle">${esc(opts.xLabel)}</text>\n`;
  s += `<text x="18" y="${cy}" font-family="${FONT}" font-size="12" fill="#333333" text-anchor="middle" transform="rotate(-90 18 ${cy})">${esc(opts.yLabel)}</text>\n`;

  const bx = M_LEFT + pw + 18;
  const strips = 32;
  for (let i = 0; i < strips; i++) {
    const t = 1 - i / (strips - 1);
    const y = M_TOP + (ph * i) / strips;
    s += `<rect x="${bx}" y="${y.toFixed(2)}" width="${barW}" height="${(ph / strips + 0.5).toFixed(2)}" fill="${rampColor(t)}"/>\n`;
  }
  s += `<rect x="${bx}" y="${M_TOP}" width="${barW}" height="${ph}" fill="none" stroke="#333333" stroke-width="1"/>\n`;
  const labels: [number, number][] = [[vmax, M_TOP + 4], [(vmin + vmax) / 2, M_TOP + ph / 2 + 4], [vmin, M_TOP + ph + 4]];
  for (const [v, y] of labels) {
    s += `<text x="${bx + barW + 6}" y="${y.toFixed(1)}" font-family="${FONT}" font-size="10" fill="#333333">${num(v)}</text>\n`;
  }
  s += "</svg>\n";
  return s;
}
