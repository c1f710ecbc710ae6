import { writeFileSync } from "fs";
import { parseArgs } from "util";
import { makeReport, renderFigure, FigureKind } from "./plots";

const FIGS = ["field", "decay", "concentration", "sandwich", "report"] as const;

const USAGE =
  "usage: plot --run DIR --fig field|decay|concentration|sandwich|report --out PATH";

export function run(argv: string[]): number {
  let args: { run?: string; fig?: string; out?: string };
  try {
    args = parseArgs({
      args: argv,
      options: {
        run: { type: "string" },
        fig: { type: "string" },
        out: { type: "string" },
      },
      allowPositionals: false,
    }).values;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 2;
  }
  if (!args.run || !args.fig || !args.out) {
    console.error(USAGE);
    return 2;
  }
  if (!(FIGS as readonly string[]).includes(args.fig)) {
    console.error(`unknown figure "${args.fig}" (choose from ${FIGS.join(", ")})`);
    return 2;
  }
  try {
    const art = args.fig === "report"
      ? makeReport(args.run)
      : renderFigure(args.fig as FigureKind, args.run);
    writeFileSync(args.out, art);
    console.log(`wrote ${args.fig} -> ${args.out}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}
