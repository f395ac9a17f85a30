/** Fixed multi-hue ramp for the per-metric color encoding.
 *
 * Hue sweeps blue -> cyan -> green -> yellow -> red over the observed
 * min-max of the colored metric. No legend is drawn: the chart whose
 * rainbow toggle is active shows the value-to-hue mapping positionally.
 */

export const SELECT_COLOR = "#ff8c00"; // selected dot (orange)
export const BASE_COLOR = "#4878b8";   // unselected, no color encoding
export const LEFT_COLOR = "#3b6fd4";   // left split samples (blue)
export const RIGHT_COLOR = "#d44a3b";  // right split samples (red)
export const DIM_OPACITY = "0.15";

export function rampColor(t: number): string {
  const c = Math.min(Math.max(t, 0), 1);
  const hue = 240 * (1 - c); // 240 = blue, 0 = red
  return `hsl(${hue.toFixed(2)}, 85%, 50%)`;
}

/** Color for one metric value against the metric's observed range. */
export function metricColor(value: number, min: number, max: number): string {
  if (max === min) return rampColor(0.5);
  return rampColor((value - min) / (max - min));
}
