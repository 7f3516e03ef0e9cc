export { TRACE_HEADER, HeaderMismatchError, parseTraceContent, readTraceCsv } from './csv.js';
export type { TraceRow } from './csv.js';
export { aggregateMetric, downsample, quantileSorted } from './aggregate.js';
export type { BandPoint, MetricName } from './aggregate.js';
export { render, buildFigureOption, renderOptionToSvg } from './render.js';
export type { PlotSpec, CurveSource, RenderResult } from './render.js';
