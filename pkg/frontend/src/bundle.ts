import * as fs from "node:fs";
import * as path from "node:path";

/** One simulation output bundle: the CSV plus its sibling summary.json. */
export interface RunBundle {
  csvPath: string;
  title: string;
  omega: number;
  t0: number;
  t: number[];
  master: number[];
  mean?: number[];
  stderr?: number[];
  trajectories: number[][];
}

const FIXED_COLS = ["t", "pe_mean", "pe_stderr", "pe_master"];

function parseHeader(cells: string[], csvPath: string) {
  if (cells.length === 2 && cells[0] === "t" && cells[1] === "pe_master") {
    return { master: 1, mean: -1, stderr: -1, firstTraj: -1 };
  }
  for (let i = 0; i < FIXED_COLS.length; i++) {
    if (cells[i] !== FIXED_COLS[i]) {
      throw new Error(`${csvPath}: unexpected header column ${i} (${cells[i] ?? "missing"})`);
    }
  }
  for (let i = FIXED_COLS.length; i < cells.length; i++) {
    if (cells[i] !== `pe_traj_${i - FIXED_COLS.length}`) {
      throw new Error(`${csvPath}: unexpected trajectory column name ${cells[i]}`);
    }
  }
  return { master: 3, mean: 1, stderr: 2, firstTraj: cells.length > 4 ? 4 : -1 };
}

/** Strict reader for the simulator's CSV contract. Throws with the filename
 *  on anything malformed: missing file, ragged rows, non-numeric cells. */
export function readCsv(csvPath: string): { header: string[]; rows: number[][] } {
  let text: string;
  try {
    text = fs.readFileSync(csvPath, "utf-8");
  } catch {
    throw new Error(`${csvPath}: cannot read file`);
  }
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length < 2) {
    throw new Error(`${csvPath}: no data rows`);
  }
  const header = lines[0].split(",").map((c) => c.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(
        `${csvPath}: row ${i} has ${cells.length} cells, header has ${header.length}`);
    }
    const row = new Array<number>(cells.length);
    for (let j = 0; j < cells.length; j++) {
      const v = Number(cells[j]);
      if (!Number.isFinite(v)) {
        throw new Error(`${csvPath}: row ${i} column ${j} is not a finite number`);
      }
      row[j] = v;
    }
    rows.push(row);
  }
  return { header, rows };
}

function column(rows: number[][], j: number): number[] {
  return rows.map((r) => r[j]);
}

/** Load a bundle: the CSV, and wave-packet parameters plus a panel title
 *  from the summary.json sitting next to it (the single source of truth
 *  for the envelope overlay). */
export function loadBundle(csvPath: string): RunBundle {
  const { header, rows } = readCsv(csvPath);
  const cols = parseHeader(header, csvPath);

  const summaryPath = path.join(path.dirname(csvPath), "summary.json");
  let summary: any;
  try {
    summary = JSON.parse(fs.readFileSync(summaryPath, "utf-8"));
  } catch {
    throw new Error(`${summaryPath}: cannot read run summary`);
  }
  const wp = summary?.config?.wavepacket;
  const bs = summary?.config?.beamsplitter;
  const scheme = summary?.config?.scheme;
  if (typeof wp?.omega !== "number" || typeof wp?.t0 !== "number") {
    throw new Error(`${summaryPath}: missing wavepacket parameters`);
  }

  const trajectories: number[][] = [];
  if (cols.firstTraj >= 0) {
    for (let j = cols.firstTraj; j < header.length; j++) {
      trajectories.push(column(rows, j));
    }
  }
  const r = typeof bs?.r === "number" ? bs.r : 0;
  const title = scheme
    ? `${scheme}, r = ${r.toFixed(2)}${trajectories.length ? `, ${trajectories.length} traj` : ""}`
    : path.basename(path.dirname(csvPath));

  return {
    csvPath,
    title,
    omega: wp.omega,
    t0: wp.t0,
    t: column(rows, 0),
    master: column(rows, cols.master),
    mean: cols.mean >= 0 ? column(rows, cols.mean) : undefined,
    stderr: cols.stderr >= 0 ? column(rows, cols.stderr) : undefined,
    trajectories,
  };
}
