/** Figure kinds over the documented CSV and report formats.
 *
 * Every overlay uses constants read from the report verbatim; the numerical
 * truth lives in the primary pipeline and is never recomputed here.
 */

import { column, readCsv, Table } from "./csv.js";
import { Report, readReport, requireConstant, requireFit } from "./report.js";
import { renderFigure, Series } from "./svg.js";

export interface FigureSpec {
  kind: "energy-budget" | "decay-fit" | "pullback-ladder" | "dimension-slope" | "holder-slope";
  csvPath: string;
  reportPath?: string;
  title?: string;
}

const PALETTE = ["#1f5fa8", "#c44e52", "#2e8b57", "#8a5ea8", "#b8860b"];

function overlayCurve(xs: number[], fn: (x: number) => number, name: string): Series {
  const dense: number[] = [];
  const lo = Math.min(...xs);
  const hi = Math.max(...xs);
  for (let i = 0; i <= 80; i++) dense.push(lo + ((hi - lo) * i) / 80);
  return {
    name,
    x: dense,
    y: dense.map(fn),
    color: "#c44e52",
    dashed: true,
  };
}

function geomOverlay(xs: number[], fn: (x: number) => number, name: string): Series {
  const lo = Math.min(...xs.filter((v) => v > 0));
  const hi = Math.max(...xs);
  const dense: number[] = [];
  for (let i = 0; i <= 80; i++) dense.push(lo * Math.pow(hi / lo, i / 80));
  return { name, x: dense, y: dense.map(fn), color: "#c44e52", dashed: true };
}

export function energyBudget(table: Table, title: string): string {
  const t = column(table, "t");
  const names: [string, string][] = [
    ["E_kin", "kinetic"],
    ["E_int", "interface"],
    ["E_pot", "bulk"],
    ["E_total", "total"],
  ];
  const series: Series[] = names.map(([col, label], i) => ({
    name: label,
    x: t,
    y: column(table, col),
    color: PALETTE[i],
  }));
  return renderFigure(title, { label: "t", scale: "linear" },
    { label: "energy", scale: "linear" }, series);
}

export function decayFit(table: Table, report: Report, title: string): string {
  // excess of the Lyapunov functional over its floor, with the reported
  // exponential envelope (prefactor^2 e^{2 value t}) on semilog axes
  const t = column(table, "t");
  const lyap = column(table, "lyapunov");
  const floor = requireConstant(report, "B_hat_0");
  const fit = requireFit(report, "kappa_0");
  const excess = lyap.map((v) => v - floor);
  const series: Series[] = [
    { name: "measured excess", x: t, y: excess, color: PALETTE[0], marker: false },
    overlayCurve(t, (x) => fit.prefactor ** 2 * Math.exp(2 * fit.value * x),
      `rate = ${fitLabel(-2 * fit.value)}`),
  ];
  return renderFigure(title, { label: "t", scale: "linear" },
    { label: "energy excess", scale: "log" }, series,
    [`kappa = ${fitLabel(-fit.value)}`, `R2 = ${fitLabel(fit.r2)}`]);
}

export function pullbackLadder(table: Table, report: Report, title: string): string {
  const tau = column(table, "tau");
  const d = column(table, "distance");
  const fit = requireFit(report, "attraction");
  const series: Series[] = [
    { name: "D(tau)", x: tau, y: d, color: PALETTE[0], marker: true },
    overlayCurve(tau, (x) => fit.prefactor * Math.exp(fit.value * x),
      `alpha = ${fitLabel(-fit.value)}`),
  ];
  return renderFigure(title, { label: "pullback span tau", scale: "linear" },
    { label: "distance to deepest image", scale: "log" }, series,
    [`R2 = ${fitLabel(fit.r2)}`]);
}

export function dimensionSlope(table: Table, report: Report, title: string): string {
  const eps = column(table, "epsilon");
  const counts = column(table, "count");
  const dim = requireConstant(report, "dimension");
  const invEps = eps.map((e) => 1 / e);
  const anchor = counts[0] * Math.pow(invEps[0], -dim);
  const series: Series[] = [
    { name: "cover counts", x: invEps, y: counts, color: PALETTE[0], marker: true },
    geomOverlay(invEps, (x) => anchor * Math.pow(x, dim),
      `slope ${fitLabel(dim)}`),
  ];
  return renderFigure(title, { label: "1/epsilon", scale: "log" },
    { label: "N(epsilon)", scale: "log" }, series,
    [`dimension = ${fitLabel(dim)}`,
     `box cross-check = ${fitLabel(requireConstant(report, "box_dimension"))}`]);
}

export function holderSlope(table: Table, report: Report, title: string): string {
  const s = column(table, "shift");
  const dev = column(table, "deviation");
  const fit = requireFit(report, "shift_exponent");
  const series: Series[] = [
    { name: "deviation", x: s, y: dev, color: PALETTE[0], marker: true },
    geomOverlay(s, (x) => fit.prefactor * Math.pow(x, fit.value),
      `gamma = ${fitLabel(fit.value)}`),
  ];
  return renderFigure(title, { label: "time shift s", scale: "log" },
    { label: "V-norm deviation", scale: "log" }, series,
    [`target exponent = ${fitLabel(requireConstant(report, "target_exponent"))}`]);
}

function fitLabel(v: number): string {
  return Number(v.toPrecision(4)).toString();
}

export function render(spec: FigureSpec): string {
  const table = readCsv(spec.csvPath);
  const title = spec.title ?? spec.kind;
  if (spec.kind === "energy-budget") {
    return energyBudget(table, title);
  }
  if (!spec.reportPath) {
    throw new Error(`figure kind ${spec.kind} needs a report for its overlay`);
  }
  const report = readReport(spec.reportPath);
  switch (spec.kind) {
    case "decay-fit":
      return decayFit(table, report, title);
    case "pullback-ladder":
      return pullbackLadder(table, report, title);
    case "dimension-slope":
      return dimensionSlope(table, report, title);
    case "holder-slope":
      return holderSlope(table, report, title);
    default:
      throw new Error(`unknown figure kind ${(spec as FigureSpec).kind}`);
  }
}
