/**
 * Relative-coordinate to pixel mapping for bounding boxes drawn over the
 * photo.  Pure affine scaling plus rounding — the rendered rectangle
 * must stay within 1 px of the exact image of the relative coordinates.
 */

export interface PixelRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface Viewport {
  width: number;
  height: number;
}

/** [x_min, y_min, x_max, y_max] in [0, 1] -> integer pixel rect. */
export function relativeToPixels(
  box: [number, number, number, number],
  viewport: Viewport,
): PixelRect {
  const [x0, y0, x1, y1] = box;
  const left = Math.round(x0 * viewport.width);
  const top = Math.round(y0 * viewport.height);
  const right = Math.round(x1 * viewport.width);
  const bottom = Math.round(y1 * viewport.height);
  return { x: left, y: top, width: right - left, height: bottom - top };
}

/** Inverse mapping, for hit-testing taps back onto relative coordinates. */
export function pixelsToRelative(
  x: number,
  y: number,
  viewport: Viewport,
): [number, number] {
  return [x / viewport.width, y / viewport.height];
}

/** True when the point (px, py) falls inside the rendered rect. */
export function rectContains(rect: PixelRect, px: number, py: number): boolean {
  return px >= rect.x && px <= rect.x + rect.width && py >= rect.y && py <= rect.y + rect.height;
}
