import { RunBundle } from "./bundle.js";
import { envelopeSq } from "./envelope.js";
import { axes, esc, linearScale, linePath } from "./svg.js";

const PANEL_W = 420;
const PANEL_H = 300;
const MARGIN = { top: 28, right: 14, bottom: 44, left: 52 };
const MAX_POINTS = 1200;

function renderPanel(b: RunBundle, ox: number, oy: number): string {
  const x = linearScale(
    [b.t[0], b.t[b.t.length - 1]],
    [ox + MARGIN.left, ox + PANEL_W - MARGIN.right]);
  const y = linearScale(
    [0, 1.05],
    [oy + PANEL_H - MARGIN.bottom, oy + MARGIN.top]);
  const stride = Math.max(1, Math.ceil(b.t.length / MAX_POINTS));
  const out: string[] = [];

  out.push(`<g class="panel">`);
  out.push(axes({ x, y, xLabel: "t", yLabel: "P_e" }));

  // thin translucent single trajectories behind everything else
  for (let i = 0; i < b.trajectories.length; i++) {
    const hue = Math.round((i * 137.508) % 360);
    out.push(`<path class="traj" d="${linePath(b.t, b.trajectories[i], x, y, stride)}" fill="none" stroke="hsl(${hue},60%,45%)" stroke-width="0.6" stroke-opacity="0.25"/>`);
  }
  // driving pulse |xi(t)|^2, recomputed from the run's own config echo
  const env = b.t.map((t) => envelopeSq(t, b.omega, b.t0));
  out.push(`<path class="envelope" d="${linePath(b.t, env, x, y, stride)}" fill="none" stroke="#000" stroke-width="1.2" stroke-dasharray="5,3"/>`);
  if (b.mean) {
    out.push(`<path class="mean" d="${linePath(b.t, b.mean, x, y, stride)}" fill="none" stroke="#1f77b4" stroke-width="2"/>`);
  }
  out.push(`<path class="master" d="${linePath(b.t, b.master, x, y, stride)}" fill="none" stroke="#d62728" stroke-width="2"/>`);
  out.push(`<text x="${ox + PANEL_W / 2}" y="${oy + 16}" font-size="12" font-weight="bold" text-anchor="middle">${esc(b.title)}</text>`);
  out.push(`</g>`);
  return out.join("\n");
}

/** Lay the panels out on a fixed grid (one column for a single panel,
 *  two columns otherwise) and return the complete SVG document. */
export function renderFigure(bundles: RunBundle[]): string {
  if (bundles.length === 0) {
    throw new Error("no bundles to plot");
  }
  const cols = bundles.length > 1 ? 2 : 1;
  const rows = Math.ceil(bundles.length / cols);
  const width = cols * PANEL_W;
  const height = rows * PANEL_H;
  const body = bundles
    .map((b, i) => renderPanel(b, (i % cols) * PANEL_W, Math.floor(i / cols) * PANEL_H))
    .join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
    `<rect width="${width}" height="${height}" fill="#fff"/>`,
    body,
    `</svg>`,
    ``,
  ].join("\n");
}
