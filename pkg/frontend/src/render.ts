import { mkdirSync, writeFileSync } from 'fs';
import { createRequire } from 'module';
import { join } from 'path';

// echarts publishes `export =` typings that a NodeNext ESM import rejects;
// loading the CommonJS build through createRequire keeps both tsc and node happy
const requireCjs = createRequire(import.meta.url);
const echarts: typeof import('echarts') = requireCjs('echarts');

import { readTraceCsv } from './csv.js';
import { aggregateMetric, BandPoint, downsample, MetricName } from './aggregate.js';

export interface CurveSource {
  path: string;
  label: string;
}

export interface PlotSpec {
  sources: CurveSource[];
  outDir: string;
  metrics?: MetricName[];
  logX?: boolean;
  logY?: boolean;
  width?: number;
  height?: number;
  maxPoints?: number;
}

export interface RenderResult {
  written: string[];
  skipped: MetricName[];
  warnings: string[];
}

const PALETTE = ['#5470c6', '#91cc75', '#fac858', '#ee6666', '#73c0de',
  '#3ba272', '#fc8452', '#9a60b4', '#ea7ccc'];

const METRIC_TITLES: Record<MetricName, string> = {
  rel_dist: 'Relative distance to the critical point',
  potential_gap: 'Potential gap',
};

function bandPolygonSeries(label: string, color: string, band: BandPoint[]) {
  return {
    type: 'custom' as const,
    name: `${label} (IQR)`,
    silent: true,
    renderItem: (params: any, api: any) => {
      if (params.dataIndex !== 0) return null;
      const points: number[][] = [];
      for (const p of band) points.push(api.coord([p.iteration, p.q75]));
      for (let i = band.length - 1; i >= 0; i--) {
        points.push(api.coord([band[i].iteration, band[i].q25]));
      }
      return {
        type: 'polygon',
        shape: { points },
        style: { fill: color, opacity: 0.22 },
      };
    },
    // one dummy item so renderItem runs exactly once
    data: [[band[0].iteration, band[0].median]],
    z: 1,
  };
}

export function buildFigureOption(metric: MetricName,
                                  curves: { label: string; band: BandPoint[] }[],
                                  logX: boolean, logY: boolean) {
  const series: any[] = [];
  curves.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    series.push(bandPolygonSeries(curve.label, color, curve.band));
    series.push({
      type: 'line',
      name: curve.label,
      showSymbol: false,
      lineStyle: { width: 1.6, color },
      itemStyle: { color },
      data: curve.band.map((p) => [p.iteration, p.median]),
      z: 2,
    });
  });
  return {
    animation: false,
    color: PALETTE,
    title: { text: METRIC_TITLES[metric], left: 'center' },
    legend: { data: curves.map((c) => c.label), bottom: 0 },
    grid: { left: 70, right: 25, top: 45, bottom: 60 },
    xAxis: {
      type: logX ? 'log' : 'value',
      name: 'iteration',
      nameLocation: 'middle',
      nameGap: 28,
    },
    yAxis: {
      type: logY ? 'log' : 'value',
      name: metric,
      nameLocation: 'middle',
      nameGap: 52,
    },
    series,
  };
}

function canonicalizeSvgClasses(svg: string): string {
  // zrender bakes a process-global instance counter into class names and
  // clip-path ids; map every such token to its first-appearance index so
  // identical inputs give identical bytes
  const seen = new Map<string, string>();
  return svg.replace(/zr\d+-(?:cls-)?c?\d+/g, (token) => {
    let canon = seen.get(token);
    if (canon === undefined) {
      canon = `zr-id${seen.size}`;
      seen.set(token, canon);
    }
    return canon;
  });
}

export function renderOptionToSvg(option: any, width: number, height: number): string {
  const chart = echarts.init(null as any, undefined, {
    renderer: 'svg',
    ssr: true,
    width,
    height,
  });
  chart.setOption(option);
  const svg = chart.renderToSVGString();
  chart.dispose();
  return canonicalizeSvgClasses(svg);
}

/** Read every source, aggregate, and write one SVG per requested metric. */
export function render(spec: PlotSpec): RenderResult {
  const metrics = spec.metrics ?? ['rel_dist', 'potential_gap'];
  const maxPoints = spec.maxPoints ?? 2000;
  const parsed = spec.sources.map((src) => ({
    label: src.label,
    rows: readTraceCsv(src.path),
  }));
  mkdirSync(spec.outDir, { recursive: true });
  const result: RenderResult = { written: [], skipped: [], warnings: [] };
  for (const metric of metrics) {
    const curves: { label: string; band: BandPoint[] }[] = [];
    let missing = false;
    for (const src of parsed) {
      const band = aggregateMetric(src.rows, metric);
      if (band === null) {
        result.warnings.push(
          `metric ${metric} has no finite values for "${src.label}"; figure skipped`);
        missing = true;
        break;
      }
      curves.push({ label: src.label, band: downsample(band, maxPoints) });
    }
    if (missing) {
      result.skipped.push(metric);
      continue;
    }
    const option = buildFigureOption(metric, curves, spec.logX ?? true,
                                     spec.logY ?? true);
    const svg = renderOptionToSvg(option, spec.width ?? 900, spec.height ?? 600);
    const path = join(spec.outDir, `${metric}.svg`);
    writeFileSync(path, svg);
    result.written.push(path);
  }
  return result;
}
