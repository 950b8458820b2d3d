/** Client-side saliency overlay rendering.
 *
 * Mirrors the server-side convention: deltas are normalized by max |delta|,
 * bilinearly upsampled with each grid cell anchored at its occlusion
 * window's center (flat extension beyond the outermost centers), and tinted
 * red where blanking LOWERED interest (important area) and blue where it
 * raised it. Alpha is |normalized delta| * opacity. Rendering depends only
 * on the delta ratios, so scaling all deltas by a positive constant changes
 * nothing.
 */

import type { SaliencyMapJson } from "./types.js";

/** Bilinear upsampling of the grid to image resolution (size x size). */
export function upsampleBilinear(
  grid: number[][],
  size: number,
  windowPx: number,
  stridePx: number,
): Float64Array {
  const rows = grid.length;
  const cols = grid[0]?.length ?? 0;
  const out = new Float64Array(size * size);
  if (rows === 0 || cols === 0) return out;
  const offset = (windowPx - 1) / 2;

  const clamp = (v: number, hi: number) => Math.min(Math.max(v, 0), hi);
  for (let py = 0; py < size; py++) {
    const gy = clamp((py - offset) / stridePx, rows - 1);
    const y0 = Math.floor(gy);
    const y1 = Math.min(y0 + 1, rows - 1);
    const fy = gy - y0;
    for (let px = 0; px < size; px++) {
      const gx = clamp((px - offset) / stridePx, cols - 1);
      const x0 = Math.floor(gx);
      const x1 = Math.min(x0 + 1, cols - 1);
      const fx = gx - x0;
      const top = grid[y0][x0] * (1 - fx) + grid[y0][x1] * fx;
      const bottom = grid[y1][x0] * (1 - fx) + grid[y1][x1] * fx;
      out[py * size + px] = top * (1 - fy) + bottom * fy;
    }
  }
  return out;
}

/** RGBA pixel buffer (size*size*4) of the tint layer for compositing over
 * the image. opacity in [0, 1] scales the whole layer. */
export function renderOverlayRGBA(
  map: SaliencyMapJson,
  opacity: number = 1.0,
): Uint8ClampedArray {
  const size = map.config.image_size_px;
  const out = new Uint8ClampedArray(size * size * 4);
  let maxAbs = 0;
  for (const row of map.deltas) {
    for (const v of row) maxAbs = Math.max(maxAbs, Math.abs(v));
  }
  if (maxAbs === 0 || !Number.isFinite(maxAbs)) return out;

  const normalized = map.deltas.map((row) => row.map((v) => v / maxAbs));
  const up = upsampleBilinear(
    normalized,
    size,
    map.config.window_px,
    map.config.stride_px,
  );
  const alphaScale = Math.min(Math.max(opacity, 0), 1) * 255;
  for (let i = 0; i < up.length; i++) {
    const v = up[i];
    const base = i * 4;
    if (v < 0) {
      out[base] = 255; // red: blanking this area lost interest
    } else if (v > 0) {
      out[base + 2] = 255; // blue: interest rose when blanked
    }
    out[base + 3] = Math.round(Math.abs(v) * alphaScale);
  }
  return out;
}
