#!/usr/bin/env node
import { writeFileSync } from "node:fs";

import { FIGURE_IDS, renderFigure } from "./figures.js";

const USAGE = `usage: figures <figure-id> --run-dir <dir> --out <path>

figure ids: ${FIGURE_IDS.join(", ")}`;

export function main(argv: string[]): number {
  const positional: string[] = [];
  const opts: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--help" || a === "-h") {
      console.log(USAGE);
      return 0;
    }
    if (a.startsWith("--")) {
      const val = argv[++i];
      if (val === undefined) {
        console.error(`${a} requires a value`);
        return 2;
      }
      opts[a.slice(2)] = val;
    } else {
      positional.push(a);
    }
  }
  if (positional.length !== 1 || !opts["run-dir"] || !opts["out"]) {
    console.error(USAGE);
    return 2;
  }
  try {
    const svg = renderFigure(positional[0], opts["run-dir"]);
    writeFileSync(opts["out"], svg);
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
  return 0;
}

process.exit(main(process.argv.slice(2)));
