#!/usr/bin/env node
import { HeaderMismatchError } from './csv.js';
import { CurveSource, PlotSpec, render } from './render.js';
import { MetricName } from './aggregate.js';

const USAGE =
  'usage: render --out-dir DIR --csv PATH=LABEL [--csv PATH=LABEL ...]\n' +
  '              [--metric rel_dist|potential_gap|both] [--linear-x]\n' +
  '              [--linear-y] [--width W] [--height H] [--max-points N]';

class UsageError extends Error {}

function usage(): never {
  throw new UsageError(USAGE);
}

export function parseArgs(argv: string[]): PlotSpec {
  const sources: CurveSource[] = [];
  let outDir: string | undefined;
  let metrics: MetricName[] = ['rel_dist', 'potential_gap'];
  const spec: Partial<PlotSpec> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) usage();
      return argv[i];
    };
    switch (arg) {
      case '--csv': {
        const value = next();
        const eq = value.indexOf('=');
        if (eq <= 0) usage();
        sources.push({ path: value.slice(0, eq), label: value.slice(eq + 1) });
        break;
      }
      case '--out-dir':
        outDir = next();
        break;
      case '--metric': {
        const m = next();
        if (m === 'both') metrics = ['rel_dist', 'potential_gap'];
        else if (m === 'rel_dist' || m === 'potential_gap') metrics = [m];
        else usage();
        break;
      }
      case '--linear-x':
        spec.logX = false;
        break;
      case '--linear-y':
        spec.logY = false;
        break;
      case '--width':
        spec.width = Number(next());
        break;
      case '--height':
        spec.height = Number(next());
        break;
      case '--max-points':
        spec.maxPoints = Number(next());
        break;
      default:
        usage();
    }
  }
  if (!outDir || sources.length === 0) usage();
  return { ...spec, sources, outDir, metrics };
}

export function main(argv: string[]): number {
  let spec: PlotSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
  try {
    const result = render(spec);
    for (const warning of result.warnings) console.warn(`warning: ${warning}`);
    for (const path of result.written) console.log(`wrote ${path}`);
    return 0;
  } catch (err) {
    if (err instanceof HeaderMismatchError) {
      console.error(`error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 1;
  }
}

import { pathToFileURL } from 'url';

if (process.argv[1] !== undefined &&
    import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
