import { readFileSync } from 'fs';

export const TRACE_HEADER =
  'run_id,iteration,rel_dist,potential_gap,ghat_norm,starved_players,wall_ms';

export interface TraceRow {
  runId: number;
  iteration: number;
  relDist: number;
  potentialGap: number;
  ghatNorm: number;
  starvedPlayers: number;
  wallMs: number;
}

export class HeaderMismatchError extends Error {
  constructor(public readonly file: string, found: string) {
    super(`unexpected trace header in ${file}: got "${found}", want "${TRACE_HEADER}"`);
    this.name = 'HeaderMismatchError';
  }
}

/** Parse trace CSV content; the file name is only used in error messages. */
export function parseTraceContent(content: string, file: string): TraceRow[] {
  const lines = content.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0 || lines[0] !== TRACE_HEADER) {
    throw new HeaderMismatchError(file, lines[0] ?? '<empty>');
  }
  const rows: TraceRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(',');
    if (parts.length !== 7) {
      throw new Error(`${file}:${i + 1}: expected 7 fields, got ${parts.length}`);
    }
    rows.push({
      runId: Number(parts[0]),
      iteration: Number(parts[1]),
      relDist: Number(parts[2]),
      potentialGap: Number(parts[3]),
      ghatNorm: Number(parts[4]),
      starvedPlayers: Number(parts[5]),
      wallMs: Number(parts[6]),
    });
  }
  return rows;
}

export function readTraceCsv(path: string): TraceRow[] {
  return parseTraceContent(readFileSync(path, 'utf8'), path);
}
