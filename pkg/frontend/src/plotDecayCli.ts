#!/usr/bin/env node
/** CLI: plot-decay --in <dir> --out <dir> */

import { plotDecayFromDirs } from "./plotDecay.js";
import { parseInOut } from "./cliArgs.js";

try {
  const { inDir, outDir } = parseInOut(process.argv.slice(2), "plot-decay");
  const res = plotDecayFromDirs(inDir, outDir);
  console.log(`wrote ${res.outPath}`);
  if (res.fitted) {
    console.log(`fitted slope ${(-res.fitted.exponent).toFixed(8)}`);
  }
} catch (err) {
  console.error(`plot-decay: ${(err as Error).message}`);
  process.exit(1);
}
