import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { loadBundle, readCsv } from "../src/bundle.js";

let root: string;

const SUMMARY = JSON.stringify({
  config: {
    scheme: "hd-hd",
    wavepacket: { omega: 1.46, t0: 4.0 },
    beamsplitter: { r: 0.5, theta: 0.0 },
  },
});

function writeRun(name: string, csv: string, summary: string | null = SUMMARY): string {
  const dir = path.join(root, name);
  fs.mkdirSync(dir, { recursive: true });
  const csvPath = path.join(dir, "trajectories.csv");
  fs.writeFileSync(csvPath, csv);
  if (summary !== null) {
    fs.writeFileSync(path.join(dir, "summary.json"), summary);
  }
  return csvPath;
}

beforeAll(() => {
  root = fs.mkdtempSync(path.join(os.tmpdir(), "bundle-test-"));
});

afterAll(() => {
  fs.rmSync(root, { recursive: true, force: true });
});

describe("readCsv", () => {
  it("parses a well-formed file", () => {
    const p = writeRun("ok", "t, pe_master\n0, 0\n0.5, 0.25\n1, 0.5\n");
    const { header, rows } = readCsv(p);
    expect(header).toEqual(["t", "pe_master"]);
    expect(rows).toEqual([[0, 0], [0.5, 0.25], [1, 0.5]]);
  });

  it("names the file when it is missing", () => {
    const ghost = path.join(root, "nope", "trajectories.csv");
    expect(() => readCsv(ghost)).toThrowError(ghost);
  });

  it("names the file on a ragged row", () => {
    const p = writeRun("ragged", "t, pe_master\n0, 0\n0.5\n");
    expect(() => readCsv(p)).toThrowError(p);
    expect(() => readCsv(p)).toThrowError(/row 2/);
  });

  it("names the file on a non-numeric cell", () => {
    const p = writeRun("text", "t, pe_master\n0, zero\n");
    expect(() => readCsv(p)).toThrowError(p);
  });

  it("rejects a header-only file", () => {
    const p = writeRun("empty", "t, pe_master\n");
    expect(() => readCsv(p)).toThrowError(p);
  });
});

describe("loadBundle", () => {
  it("loads a full ensemble bundle", () => {
    const p = writeRun(
      "full",
      "t, pe_mean, pe_stderr, pe_master, pe_traj_0, pe_traj_1\n" +
      "0, 0.1, 0.01, 0.11, 0.0, 0.2\n" +
      "1, 0.3, 0.02, 0.29, 0.4, 0.2\n");
    const b = loadBundle(p);
    expect(b.t).toEqual([0, 1]);
    expect(b.mean).toEqual([0.1, 0.3]);
    expect(b.stderr).toEqual([0.01, 0.02]);
    expect(b.master).toEqual([0.11, 0.29]);
    expect(b.trajectories).toEqual([[0.0, 0.4], [0.2, 0.2]]);
    expect(b.omega).toBe(1.46);
    expect(b.t0).toBe(4.0);
    expect(b.title).toContain("hd-hd");
    expect(b.title).toContain("0.50");
  });

  it("loads a master-only bundle without mean or trajectories", () => {
    const p = writeRun("masteronly", "t, pe_master\n0, 0\n1, 0.5\n");
    const b = loadBundle(p);
    expect(b.mean).toBeUndefined();
    expect(b.stderr).toBeUndefined();
    expect(b.trajectories).toEqual([]);
    expect(b.master).toEqual([0, 0.5]);
  });

  it("accepts the summary columns without trajectory columns", () => {
    const p = writeRun("meanonly",
      "t, pe_mean, pe_stderr, pe_master\n0, 0.1, 0.01, 0.11\n");
    const b = loadBundle(p);
    expect(b.mean).toEqual([0.1]);
    expect(b.trajectories).toEqual([]);
  });

  it("rejects an unknown header", () => {
    const p = writeRun("badheader", "time, pe\n0, 0\n");
    expect(() => loadBundle(p)).toThrowError(p);
  });

  it("rejects a misnamed trajectory column", () => {
    const p = writeRun("badtraj",
      "t, pe_mean, pe_stderr, pe_master, pe_traj_7\n0, 0, 0, 0, 0\n");
    expect(() => loadBundle(p)).toThrowError(/pe_traj_7/);
  });

  it("names the summary file when it is missing", () => {
    const p = writeRun("nosummary", "t, pe_master\n0, 0\n1, 1\n", null);
    expect(() => loadBundle(p)).toThrowError(/summary\.json/);
  });

  it("rejects a summary without wave-packet parameters", () => {
    const p = writeRun("thinsummary", "t, pe_master\n0, 0\n1, 1\n",
      JSON.stringify({ config: { scheme: "hd-hd" } }));
    expect(() => loadBundle(p)).toThrowError(/wavepacket/);
  });
});
