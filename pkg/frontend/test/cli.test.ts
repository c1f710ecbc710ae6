import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { mkdtempSync, readFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { run } from "../src/cli";
import { makeReport, renderFigure } from "../src/plots";

const RUNS = join(process.cwd(), "fixtures", "runs");
const GS1D = join(RUNS, "gs1d");

describe("plot command", () => {
  beforeEach(() => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    vi.spyOn(console, "error").mockImplementation(() => {});
  });
  afterEach(() => {
    vi.restoreAllMocks();
  });

  it("writes the figure it names", () => {
    const out = join(mkdtempSync(join(tmpdir(), "plots-")), "decay.svg");
    expect(run(["--run", GS1D, "--fig", "decay", "--out", out])).toBe(0);
    expect(readFileSync(out, "utf8")).toBe(renderFigure("decay", GS1D));
  });

  it("writes the collated report", () => {
    const out = join(mkdtempSync(join(tmpdir(), "plots-")), "report.html");
    expect(run(["--run", GS1D, "--fig", "report", "--out", out])).toBe(0);
    expect(readFileSync(out, "utf8")).toBe(makeReport(GS1D));
  });

  it("exits 2 on usage errors", () => {
    expect(run([])).toBe(2);
    expect(run(["--run", GS1D, "--fig", "decay"])).toBe(2);
    expect(run(["--run", GS1D, "--fig", "pie", "--out", "x.svg"])).toBe(2);
    expect(run(["--frobnicate"])).toBe(2);
  });

  it("exits 1 when the run directory has nothing to plot", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const out = join(dir, "x.svg");
    expect(run(["--run", dir, "--fig", "field", "--out", out])).toBe(1);
    expect(run(["--run", join(RUNS, "nope"), "--fig", "field", "--out", out])).toBe(1);
  });
});
