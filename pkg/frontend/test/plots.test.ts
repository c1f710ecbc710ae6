import { describe, expect, it } from "vitest";
import { createHash } from "crypto";
import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import {
  makeReport, plotDecay, plotField, renderFigure, resolveFieldDump,
} from "../src/plots";

const RUNS = join(process.cwd(), "fixtures", "runs");
const GS1D = join(RUNS, "gs1d");
const GS2D = join(RUNS, "gs2d");
const SEMI = join(RUNS, "semi1d");

const sha = (s: string) => createHash("sha256").update(s).digest("hex");

// frozen digests pin the rendered bytes for the shipped fixtures
const FROZEN: [string, () => string, string][] = [
  ["field gs1d", () => renderFigure("field", GS1D),
   "3b592b37a492d7ca672b56ccda5d821442608bf3591ccefee6614dbbd13168ee"],
  ["field gs2d", () => renderFigure("field", GS2D),
   "f3ce6eae7c9cc98e6bbc449d9fc69f56d53ebf3058f684f372c96cb87a81e4ac"],
  ["field export csv", () => plotField(join(RUNS, "gs1d_export", "field.csv")),
   "edabf22052735efbe908a0e28a1e4237891d8019faec00e978e7d60e07987d3b"],
  ["decay gs1d", () => renderFigure("decay", GS1D),
   "469357a2f63718fa880678364f2e77c82231e565294de0528aeda889bcf3a41c"],
  ["concentration semi1d", () => renderFigure("concentration", SEMI),
   "4fe87e419cd86c6436b4b94551f720c99031494a89de966acc3d3c2d6cc04a52"],
  ["sandwich semi1d", () => renderFigure("sandwich", SEMI),
   "664add37bd99bd25fe99e01e05a402c5e42d25767857e2df9d328df26915bb2d"],
  ["report gs1d", () => makeReport(GS1D),
   "c4539b153112966fe8887c101410a3a8e440f5af3c169109ee3cc6f3297ad879"],
  ["report semi1d", () => makeReport(SEMI),
   "95a24ed1eecc1bf0e0e1c0694dd3c68280c4437b018a46a60245be3325ff03a9"],
];

describe("deterministic rendering", () => {
  for (const [name, render, digest] of FROZEN) {
    it(`${name} is byte-stable`, () => {
      const a = render();
      const b = render();
      expect(a.length).toBeGreaterThan(0);
      expect(b).toBe(a);
      expect(sha(a)).toBe(digest);
    });
  }

  it("pins the decay axis range", () => {
    const svg = renderFigure("decay", GS1D);
    for (const label of ["0.75", "1.05"]) {
      expect(svg).toContain(`text-anchor="middle">${label}</text>`);
    }
  });

  it("pads the axis when every distance is zero", () => {
    const svg = renderFigure("concentration", SEMI);
    expect(svg).toContain('text-anchor="end">-1.0</text>');
    expect(svg).toContain('text-anchor="end">1.0</text>');
  });
});

describe("field dispatch", () => {
  it("renders 1d dumps as a line", () => {
    const svg = renderFigure("field", GS1D);
    expect(svg).toContain("field profile");
    expect(svg).toContain("<polyline");
  });

  it("renders 2d dumps as a heatmap", () => {
    const svg = renderFigure("field", GS2D);
    expect(svg).toContain("field heatmap");
    expect(svg).not.toContain("<polyline");
    expect(svg.split("<rect").length - 1).toBe(1 + 1024 + 1 + 32 + 1);
  });

  it("renders 1d export tables as a line", () => {
    const svg = plotField(join(RUNS, "gs1d_export", "field.csv"));
    expect(svg).toContain("field profile");
    expect(svg).toContain("256 mesh points on [-20, 20)");
  });

  it("renders 2d export tables as a heatmap", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const lines = ["x0,x1,value"];
    for (let i0 = 0; i0 < 4; i0++) {
      for (let i1 = 0; i1 < 4; i1++) {
        lines.push(`${-2 + i0},${-2 + i1},${i0 * 4 + i1}`);
      }
    }
    const path = join(dir, "field.csv");
    writeFileSync(path, lines.join("\n") + "\n");
    const svg = plotField(path);
    expect(svg).toContain("field heatmap");
    expect(svg).toContain("4 x 4 mesh on [-2, 2)^2");
  });

  it("rejects a non-square 2d export", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const path = join(dir, "field.csv");
    writeFileSync(path, "x0,x1,value\n0,0,1\n0,1,2\n1,0,3\n");
    expect(() => plotField(path)).toThrow(/3 rows, not a square mesh/);
  });

  it("rejects unknown dump kinds", () => {
    expect(() => plotField("field.txt")).toThrow(/\.fnls1 files or exported \.csv/);
  });

  it("picks the smallest-eps continuation dump", () => {
    expect(resolveFieldDump(SEMI)).toBe(join(SEMI, "field_eps0.2.fnls1"));
    expect(resolveFieldDump(GS1D)).toBe(join(GS1D, "field.fnls1"));
  });
});

describe("missing inputs", () => {
  it("names a missing column", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const rows = readFileSync(join(GS1D, "decay.csv"), "utf8")
      .replace("radius,shell_max", "radius,peak");
    const path = join(dir, "decay.csv");
    writeFileSync(path, rows);
    expect(() => plotDecay(path)).toThrow(/has no column "shell_max"/);
  });

  it("names missing report files", () => {
    expect(() => renderFigure("decay", SEMI)).toThrow(/has no decay\.csv/);
    expect(() => renderFigure("concentration", GS1D))
      .toThrow(/has no concentration\.csv/);
    expect(() => renderFigure("sandwich", GS1D)).toThrow(/has no sandwich\.csv/);
    expect(() => renderFigure("field", mkdtempSync(join(tmpdir(), "plots-"))))
      .toThrow(/no field\.fnls1 or field_eps/);
  });

  it("rejects a missing run directory", () => {
    expect(() => renderFigure("field", join(RUNS, "nope")))
      .toThrow(/run directory not found/);
  });

  it("refuses to report an empty directory", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    expect(() => makeReport(dir)).toThrow(/no plottable outputs/);
  });
});

describe("report collation", () => {
  it("collates the single-run sections", () => {
    const html = makeReport(GS1D);
    expect(html).toContain("<h2>field (field.fnls1)</h2>");
    expect(html).toContain("<h2>decay</h2>");
    expect(html).toContain("<td>run id</td><td>gs1d-demo</td>");
    expect(html).toContain("<td>converged</td><td>true</td>");
    expect(html.split("<svg").length - 1).toBe(2);
  });

  it("collates the continuation-run sections", () => {
    const html = makeReport(SEMI);
    expect(html).toContain("<h2>field (field_eps0.2.fnls1)</h2>");
    expect(html).toContain("<h2>concentration</h2>");
    expect(html).toContain("<h2>sandwich</h2>");
    expect(html.split("<svg").length - 1).toBe(3);
  });
});
