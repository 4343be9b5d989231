/** Minimal deterministic SVG plotting: linear and log axes, polylines,
 * markers, labels.  Output is plain text, so identical inputs produce
 * byte-identical figures. */

export type Scale = "linear" | "log";

export interface AxisSpec {
  label: string;
  scale: Scale;
}

export interface Series {
  name: string;
  x: number[];
  y: number[];
  color: string;
  marker?: boolean;
  dashed?: boolean;
}

const WIDTH = 640;
const HEIGHT = 440;
const MARGIN = { left: 70, right: 20, top: 40, bottom: 55 };

function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  return v.toPrecision(6).replace(/\.?0+$/, "").replace(/\.?0+e/, "e");
}

function tickLabel(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a >= 1e4 || a < 1e-3)) return v.toExponential(1);
  return String(Number(v.toPrecision(4)));
}

class Mapper {
  constructor(
    private lo: number,
    private hi: number,
    private outLo: number,
    private outHi: number,
    private scale: Scale,
  ) {}

  map(v: number): number {
    let t: number;
    if (this.scale === "log") {
      t = (Math.log(v) - Math.log(this.lo)) / (Math.log(this.hi) - Math.log(this.lo));
    } else {
      t = (v - this.lo) / (this.hi - this.lo);
    }
    return this.outLo + t * (this.outHi - this.outLo);
  }

  ticks(count = 5): number[] {
    if (this.scale === "log") {
      const lo = Math.ceil(Math.log10(this.lo));
      const hi = Math.floor(Math.log10(this.hi));
      const out: number[] = [];
      for (let d = lo; d <= hi; d++) out.push(Math.pow(10, d));
      if (out.length >= 2) return out;
      return [this.lo, Math.sqrt(this.lo * this.hi), this.hi];
    }
    const out: number[] = [];
    for (let i = 0; i <= count; i++) out.push(this.lo + ((this.hi - this.lo) * i) / count);
    return out;
  }
}

function extent(values: number[], scale: Scale): [number, number] {
  const usable = values.filter((v) => Number.isFinite(v) && (scale !== "log" || v > 0));
  if (usable.length === 0) return scale === "log" ? [1e-3, 1] : [0, 1];
  let lo = Math.min(...usable);
  let hi = Math.max(...usable);
  if (lo === hi) {
    lo = scale === "log" ? lo / 2 : lo - 1;
    hi = scale === "log" ? hi * 2 : hi + 1;
  }
  if (scale === "linear") {
    const pad = 0.05 * (hi - lo);
    return [lo - pad, hi + pad];
  }
  return [lo / 1.3, hi * 1.3];
}

export function renderFigure(
  title: string,
  xAxis: AxisSpec,
  yAxis: AxisSpec,
  series: Series[],
  annotations: string[] = [],
): string {
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  const [xLo, xHi] = extent(xs, xAxis.scale);
  const [yLo, yHi] = extent(ys, yAxis.scale);
  const mx = new Mapper(xLo, xHi, MARGIN.left, WIDTH - MARGIN.right, xAxis.scale);
  const my = new Mapper(yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top, yAxis.scale);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">${title}</text>`,
  );
  // frame
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(
    `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#333"/>`,
  );
  for (const t of mx.ticks()) {
    const px = fmt(mx.map(t));
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="#333"/>`);
    parts.push(
      `<text x="${px}" y="${y0 + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  for (const t of my.ticks()) {
    const py = fmt(my.map(t));
    parts.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#333"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">${xAxis.label}</text>`,
  );
  parts.push(
    `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${(y0 + y1) / 2})">${yAxis.label}</text>`,
  );

  let legendY = y1 + 14;
  for (const s of series) {
    const pts = s.x
      .map((xv, i) => [xv, s.y[i]])
      .filter(([xv, yv]) =>
        Number.isFinite(xv) && Number.isFinite(yv) &&
        (xAxis.scale !== "log" || xv > 0) && (yAxis.scale !== "log" || yv > 0),
      );
    if (pts.length === 0) continue;
    const path = pts
      .map(([xv, yv]) => `${fmt(mx.map(xv))},${fmt(my.map(yv))}`)
      .join(" ");
    const dash = s.dashed ? ` stroke-dasharray="6,4"` : "";
    parts.push(
      `<polyline points="${path}" fill="none" stroke="${s.color}" stroke-width="1.5"${dash}/>`,
    );
    if (s.marker) {
      for (const [xv, yv] of pts) {
        parts.push(
          `<circle cx="${fmt(mx.map(xv))}" cy="${fmt(my.map(yv))}" r="3" fill="${s.color}"/>`,
        );
      }
    }
    parts.push(
      `<line x1="${x1 - 150}" y1="${legendY}" x2="${x1 - 125}" y2="${legendY}" stroke="${s.color}" stroke-width="1.5"${dash}/>`,
    );
    parts.push(
      `<text x="${x1 - 120}" y="${legendY + 4}" font-family="sans-serif" font-size="11">${s.name}</text>`,
    );
    legendY += 16;
  }
  let annY = legendY + 6;
  for (const note of annotations) {
    parts.push(
      `<text x="${x1 - 150}" y="${annY}" font-family="sans-serif" font-size="11" fill="#555">${note}</text>`,
    );
    annY += 14;
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
