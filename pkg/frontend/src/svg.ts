/** Minimal deterministic SVG helpers: linear scales, polyline paths,
 *  axis ticks. No DOM, no randomness, no timestamps. */

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const k = d1 === d0 ? 0 : (r1 - r0) / (d1 - d0);
  const f = ((v: number) => r0 + (v - d0) * k) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Evenly spaced round-ish tick values covering the domain. */
export function ticks(domain: [number, number], count: number): number[] {
  const [lo, hi] = domain;
  if (!(hi > lo) || count < 2) return [lo];
  const rawStep = (hi - lo) / (count - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => s >= rawStep) ?? candidates[candidates.length - 1];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-9 * step; v += step) {
    out.push(Math.abs(v) < 1e-12 ? 0 : v);
  }
  return out;
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : String(Number(v.toFixed(6)));
}

/** Coordinates rounded to 0.01 px keeps files small and output stable. */
function px(v: number): string {
  return (Math.round(v * 100) / 100).toFixed(2);
}

/** Polyline path string through (x(t[i]), y(v[i])), skipping non-finite points. */
export function linePath(
  t: number[], v: number[], x: Scale, y: Scale, stride = 1,
): string {
  const parts: string[] = [];
  let pen = false;
  const last = t.length - 1;
  for (let i = 0; i <= last; i += stride) {
    const k = Math.min(i, last);
    const vy = v[k];
    if (!Number.isFinite(vy)) {
      pen = false;
      continue;
    }
    parts.push(`${pen ? "L" : "M"}${px(x(t[k]))},${px(y(vy))}`);
    pen = true;
  }
  // always land on the final sample so strides do not clip the curve
  if (stride > 1 && Number.isFinite(v[last])) {
    parts.push(`${pen ? "L" : "M"}${px(x(t[last]))},${px(y(v[last]))}`);
  }
  return parts.join("");
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface AxisSpec {
  x: Scale;
  y: Scale;
  xLabel: string;
  yLabel: string;
}

/** Axis lines, ticks and labels for one panel, in panel-local coordinates. */
export function axes(spec: AxisSpec): string {
  const { x, y, xLabel, yLabel } = spec;
  const [x0, x1] = x.range;
  const [y0, y1] = y.range; // y0 is the bottom (larger pixel value)
  const out: string[] = [];
  out.push(`<line x1="${px(x0)}" y1="${px(y0)}" x2="${px(x1)}" y2="${px(y0)}" stroke="#000" stroke-width="1"/>`);
  out.push(`<line x1="${px(x0)}" y1="${px(y0)}" x2="${px(x0)}" y2="${px(y1)}" stroke="#000" stroke-width="1"/>`);
  for (const v of ticks(x.domain, 6)) {
    const tx = x(v);
    out.push(`<line x1="${px(tx)}" y1="${px(y0)}" x2="${px(tx)}" y2="${px(y0 + 4)}" stroke="#000" stroke-width="1"/>`);
    out.push(`<text x="${px(tx)}" y="${px(y0 + 16)}" font-size="10" text-anchor="middle">${fmt(v)}</text>`);
  }
  for (const v of ticks(y.domain, 6)) {
    const ty = y(v);
    out.push(`<line x1="${px(x0 - 4)}" y1="${px(ty)}" x2="${px(x0)}" y2="${px(ty)}" stroke="#000" stroke-width="1"/>`);
    out.push(`<text x="${px(x0 - 6)}" y="${px(ty + 3)}" font-size="10" text-anchor="end">${fmt(v)}</text>`);
  }
  const xm = (x0 + x1) / 2;
  const ym = (y0 + y1) / 2;
  out.push(`<text x="${px(xm)}" y="${px(y0 + 30)}" font-size="11" text-anchor="middle">${esc(xLabel)}</text>`);
  out.push(`<text x="${px(x0 - 34)}" y="${px(ym)}" font-size="11" text-anchor="middle" transform="rotate(-90 ${px(x0 - 34)} ${px(ym)})">${esc(yLabel)}</text>`);
  return out.join("\n");
}
