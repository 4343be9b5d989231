/** Every figure kind renders from the shipped example outputs; overlays carry
 * the report constants verbatim. */

import assert from "node:assert/strict";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import { parseCsv, column, SchemaError } from "../src/csv.js";
import { parseReport, requireFit } from "../src/report.js";
import { render } from "../src/figures.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, "..", "..", "fixtures");

const CASES = [
  {
    kind: "energy-budget" as const,
    csv: join(FIXTURES, "simulate", "trajectory.csv"),
    report: undefined,
  },
  {
    kind: "decay-fit" as const,
    csv: join(FIXTURES, "dissipative", "energy_0.csv"),
    report: join(FIXTURES, "dissipative", "dissipative_check_report.txt"),
  },
  {
    kind: "pullback-ladder" as const,
    csv: join(FIXTURES, "pullback", "pullback.csv"),
    report: join(FIXTURES, "pullback", "pullback_attraction_report.txt"),
  },
  {
    kind: "dimension-slope" as const,
    csv: join(FIXTURES, "dimension", "cover.csv"),
    report: join(FIXTURES, "dimension", "dimension_report.txt"),
  },
  {
    kind: "holder-slope" as const,
    csv: join(FIXTURES, "holder", "shift_sweep.csv"),
    report: join(FIXTURES, "holder", "holder_H1prime_report.txt"),
  },
];

test("every figure kind renders from the shipped example outputs", () => {
  const out = mkdtempSync(join(tmpdir(), "modelh-figs-"));
  for (const spec of CASES) {
    const svg = render({ kind: spec.kind, csvPath: spec.csv, reportPath: spec.report });
    assert.ok(svg.startsWith("<svg"), `${spec.kind} did not produce SVG`);
    assert.ok(svg.includes("</svg>"), `${spec.kind} SVG not closed`);
    const path = join(out, `${spec.kind}.svg`);
    writeFileSync(path, svg);
    assert.ok(readFileSync(path, "utf8").length > 500);
  }
});

test("energy budget of the unforced fixture is monotone nonincreasing", () => {
  const table = parseCsv(
    readFileSync(join(FIXTURES, "simulate", "trajectory.csv"), "utf8"),
  );
  const totals = column(table, "E_total");
  for (let i = 1; i < totals.length; i++) {
    assert.ok(totals[i] <= totals[i - 1] + 1e-10,
      `E_total increased at row ${i}`);
  }
  const svg = render({
    kind: "energy-budget",
    csvPath: join(FIXTURES, "simulate", "trajectory.csv"),
  });
  assert.ok(svg.includes("total"));
});

test("pullback overlay uses the reported attraction constants verbatim", () => {
  const report = parseReport(
    readFileSync(join(FIXTURES, "pullback", "pullback_attraction_report.txt"), "utf8"),
  );
  const fit = requireFit(report, "attraction");
  const svg = render({
    kind: "pullback-ladder",
    csvPath: join(FIXTURES, "pullback", "pullback.csv"),
    reportPath: join(FIXTURES, "pullback", "pullback_attraction_report.txt"),
  });
  const alphaLabel = Number((-fit.value).toPrecision(4)).toString();
  assert.ok(svg.includes(`alpha = ${alphaLabel}`), "alpha label missing or re-fitted");
  const r2Label = Number(fit.r2.toPrecision(4)).toString();
  assert.ok(svg.includes(`R2 = ${r2Label}`), "R2 label missing");
});

test("dimension overlay carries the reported slope, not a re-fit", () => {
  const reportText = readFileSync(
    join(FIXTURES, "dimension", "dimension_report.txt"), "utf8");
  const report = parseReport(reportText);
  const svg = render({
    kind: "dimension-slope",
    csvPath: join(FIXTURES, "dimension", "cover.csv"),
    reportPath: join(FIXTURES, "dimension", "dimension_report.txt"),
  });
  const dim = report.constants.get("dimension")!;
  assert.ok(svg.includes(`dimension = ${Number(dim.toPrecision(4))}`));
});

test("identical inputs render byte-identical SVG", () => {
  const spec = CASES[2];
  const a = render({ kind: spec.kind, csvPath: spec.csv, reportPath: spec.report });
  const b = render({ kind: spec.kind, csvPath: spec.csv, reportPath: spec.report });
  assert.equal(a, b);
});

test("missing column produces an error naming the column", () => {
  const table = parseCsv("t,foo\n0,1\n1,2\n");
  assert.throws(() => column(table, "E_total"), (err: unknown) => {
    assert.ok(err instanceof SchemaError);
    assert.ok(String(err).includes("E_total"));
    return true;
  });
});

test("report parser round-trips fits and verdicts", () => {
  const report = parseReport(readFileSync(
    join(FIXTURES, "dissipative", "dissipative_check_report.txt"), "utf8"));
  assert.equal(report.kind, "dissipative_check");
  assert.ok(report.fits.has("kappa_0"));
  assert.ok(report.constants.has("B_hat_0"));
  assert.ok([...report.verdicts.values()].every((v) => v === true));
});
