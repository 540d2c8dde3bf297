/** Sequential, colorblind-safe ramp (viridis stops) for relevance in [0, 1]. */

export const GRAY = '#c8c8ce';

const STOPS: Array<[number, number, number]> = [
  [68, 1, 84],
  [59, 82, 139],
  [33, 145, 140],
  [94, 201, 98],
  [253, 231, 37]
];

export function relevanceColor(value: number): string {
  const v = Math.min(1, Math.max(0, value));
  const scaled = v * (STOPS.length - 1);
  const lo = Math.floor(scaled);
  const hi = Math.min(lo + 1, STOPS.length - 1);
  const t = scaled - lo;
  const mix = STOPS[lo].map((c, i) => Math.round(c + t * (STOPS[hi][i] - c)));
  return `rgb(${mix[0]}, ${mix[1]}, ${mix[2]})`;
}
