/** Parser for the structured text reports emitted by the experiment records.
 *
 * Sections: [record], [constants], [fits.<name>], [verdicts], [series],
 * [notes].  Fitted constants are consumed verbatim; this tool never re-fits.
 */

import { readFileSync } from "node:fs";

export interface Fit {
  value: number;
  prefactor: number;
  r2: number;
  residual: number;
  windowLo: number;
  windowHi: number;
  sampleCount: number;
}

export interface Report {
  kind: string;
  digest: string;
  constants: Map<string, number>;
  fits: Map<string, Fit>;
  verdicts: Map<string, boolean>;
  series: Map<string, string>;
  notes: string[];
}

export class ReportError extends Error {}

export function parseReport(text: string): Report {
  const report: Report = {
    kind: "",
    digest: "",
    constants: new Map(),
    fits: new Map(),
    verdicts: new Map(),
    series: new Map(),
    notes: [],
  };
  let section = "";
  const fitBuffers = new Map<string, Map<string, string>>();
  for (const raw of text.split(/\r?\n/)) {
    const line = raw.trim();
    if (line.length === 0) continue;
    const heading = line.match(/^\[(.+)\]$/);
    if (heading) {
      section = heading[1];
      if (section.startsWith("fits.")) {
        fitBuffers.set(section.slice(5), new Map());
      }
      continue;
    }
    if (section === "notes") {
      report.notes.push(line.replace(/^- /, ""));
      continue;
    }
    const eq = line.indexOf("=");
    if (eq < 0) {
      throw new ReportError(`cannot parse line '${line}' in section [${section}]`);
    }
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    if (section === "record") {
      if (key === "kind") report.kind = value;
      if (key === "digest") report.digest = value;
    } else if (section === "constants") {
      report.constants.set(key, Number(value));
    } else if (section === "verdicts") {
      report.verdicts.set(key, value === "pass");
    } else if (section === "series") {
      report.series.set(key, value);
    } else if (section.startsWith("fits.")) {
      fitBuffers.get(section.slice(5))!.set(key, value);
    }
  }
  for (const [name, buf] of fitBuffers) {
    report.fits.set(name, {
      value: Number(buf.get("value")),
      prefactor: Number(buf.get("prefactor")),
      r2: Number(buf.get("r2")),
      residual: Number(buf.get("residual")),
      windowLo: Number(buf.get("window_lo")),
      windowHi: Number(buf.get("window_hi")),
      sampleCount: Number(buf.get("sample_count")),
    });
  }
  return report;
}

export function readReport(path: string): Report {
  return parseReport(readFileSync(path, "utf8"));
}

export function requireFit(report: Report, name: string): Fit {
  const fit = report.fits.get(name);
  if (!fit) {
    throw new ReportError(
      `report has no fit '${name}' (have: ${[...report.fits.keys()].join(", ") || "none"})`,
    );
  }
  return fit;
}

export function requireConstant(report: Report, name: string): number {
  const value = report.constants.get(name);
  if (value === undefined) {
    throw new ReportError(
      `report has no constant '${name}' (have: ${[...report.constants.keys()].join(", ")})`,
    );
  }
  return value;
}
