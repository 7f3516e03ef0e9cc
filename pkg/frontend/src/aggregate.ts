import { TraceRow } from './csv.js';

export type MetricName = 'rel_dist' | 'potential_gap';

export interface BandPoint {
  iteration: number;
  median: number;
  q25: number;
  q75: number;
}

/** Linear-interpolation quantile on a pre-sorted array (numpy's default). */
export function quantileSorted(sorted: number[], q: number): number {
  const n = sorted.length;
  if (n === 0) return NaN;
  const pos = q * (n - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}

function metricValue(row: TraceRow, metric: MetricName): number {
  return metric === 'rel_dist' ? row.relDist : row.potentialGap;
}

// log axes reject non-positive values, so clamp from below
const LOG_FLOOR = 1e-16;

/**
 * Median and interquartile band of one metric across replications, keyed by
 * iteration. Returns null when the metric column carries no finite values
 * (e.g. the run had no oracle and wrote nan throughout).
 */
export function aggregateMetric(rows: TraceRow[], metric: MetricName): BandPoint[] | null {
  const byIteration = new Map<number, number[]>();
  let sawFinite = false;
  for (const row of rows) {
    const v = metricValue(row, metric);
    if (Number.isFinite(v)) sawFinite = true;
    let bucket = byIteration.get(row.iteration);
    if (!bucket) {
      bucket = [];
      byIteration.set(row.iteration, bucket);
    }
    bucket.push(v);
  }
  if (!sawFinite) return null;
  const iterations = [...byIteration.keys()].sort((a, b) => a - b);
  const out: BandPoint[] = [];
  for (const it of iterations) {
    const vals = byIteration.get(it)!.filter(Number.isFinite);
    if (vals.length === 0) continue;
    vals.sort((a, b) => a - b);
    out.push({
      iteration: it,
      median: Math.max(quantileSorted(vals, 0.5), LOG_FLOOR),
      q25: Math.max(quantileSorted(vals, 0.25), LOG_FLOOR),
      q75: Math.max(quantileSorted(vals, 0.75), LOG_FLOOR),
    });
  }
  return out;
}

/** Keep at most `maxPoints` points per curve by striding (horizons reach 1e5+). */
export function downsample(points: BandPoint[], maxPoints = 2000): BandPoint[] {
  if (points.length <= maxPoints) return points;
  const stride = Math.ceil(points.length / maxPoints);
  const out: BandPoint[] = [];
  for (let i = 0; i < points.length; i += stride) out.push(points[i]);
  const last = points[points.length - 1];
  if (out[out.length - 1] !== last) out.push(last);
  return out;
}
