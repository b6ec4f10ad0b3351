#!/usr/bin/env node
import * as fs from "node:fs";
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";
import { loadBundle, RunBundle } from "./bundle.js";
import { renderFigure } from "./figure.js";

export function run(argv: string[]): number {
  let positionals: string[];
  let out: string | undefined;
  try {
    const parsed = parseArgs({
      args: argv,
      options: { out: { type: "string", short: "o" } },
      allowPositionals: true,
    });
    positionals = parsed.positionals;
    out = parsed.values.out;
  } catch (e) {
    process.stderr.write(`error: ${(e as Error).message}\n`);
    return 2;
  }
  if (positionals.length === 0 || !out) {
    process.stderr.write(
      "usage: photonfilter-figures <curves.csv> [more.csv ...] --out <figure.svg>\n");
    return 2;
  }

  const bundles: RunBundle[] = [];
  for (const csvPath of positionals) {
    try {
      bundles.push(loadBundle(csvPath));
    } catch (e) {
      process.stderr.write(`error: ${(e as Error).message}\n`);
      return 1;
    }
  }

  const svg = renderFigure(bundles);
  try {
    fs.writeFileSync(out, svg, "utf-8");
  } catch {
    process.stderr.write(`error: ${out}: cannot write output\n`);
    return 1;
  }
  return 0;
}

function invokedDirectly(): boolean {
  if (process.argv[1] === undefined) return false;
  try {
    return import.meta.url === pathToFileURL(fs.realpathSync(process.argv[1])).href;
  } catch {
    return false;
  }
}
if (invokedDirectly()) {
  process.exit(run(process.argv.slice(2)));
}
