/** Command line: render one figure from a CSV log plus (usually) a report.
 *
 * Usage:
 *   node dist/src/cli.js <kind> --csv <path> [--report <path>] --out <path.svg> [--title <text>]
 *
 * Kinds: energy-budget, decay-fit, pullback-ladder, dimension-slope, holder-slope.
 */

import { writeFileSync } from "node:fs";
import { render, FigureSpec } from "./figures.js";

function parseArgs(argv: string[]): FigureSpec & { out: string } {
  const kind = argv[0];
  const kinds = ["energy-budget", "decay-fit", "pullback-ladder", "dimension-slope", "holder-slope"];
  if (!kinds.includes(kind)) {
    throw new Error(`first argument must be a figure kind (${kinds.join(", ")})`);
  }
  const opts = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed option near '${argv[i]}'`);
    }
    opts.set(argv[i].slice(2), argv[i + 1]);
  }
  const csvPath = opts.get("csv");
  const out = opts.get("out");
  if (!csvPath || !out) {
    throw new Error("--csv and --out are required");
  }
  return {
    kind: kind as FigureSpec["kind"],
    csvPath,
    reportPath: opts.get("report"),
    title: opts.get("title"),
    out,
  };
}

try {
  const spec = parseArgs(process.argv.slice(2));
  writeFileSync(spec.out, render(spec), "utf8");
  console.log(`wrote ${spec.out}`);
} catch (err) {
  console.error(`error: ${err instanceof Error ? err.message : err}`);
  process.exit(1);
}
