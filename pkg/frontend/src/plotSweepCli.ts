#!/usr/bin/env node
/** CLI: plot-sweep --in <dir> --out <dir> */

import { plotSweepFromDirs } from "./plotSweep.js";
import { parseInOut } from "./cliArgs.js";

try {
  const { inDir, outDir } = parseInOut(process.argv.slice(2), "plot-sweep");
  const res = plotSweepFromDirs(inDir, outDir);
  console.log(`wrote ${res.outPath}`);
  if (res.fittedL2Slope !== null) {
    console.log(`fitted L2^2 slope ${res.fittedL2Slope.toFixed(8)}`);
  }
} catch (err) {
  console.error(`plot-sweep: ${(err as Error).message}`);
  process.exit(1);
}
