/** Input locations for one plotting job and the parsed summary sidecar. */

import { existsSync, readFileSync } from "fs";
import { join } from "path";

export interface ReportBundle {
  csvPath: string;
  summaryPath: string | null; // optional for synthetic inputs
  outDir: string;
}

export interface Summary {
  config: Record<string, unknown>;
  config_hash: string;
  fits: Record<string, { exponent: number; constant?: number; window?: number[] }>;
  flags: Record<string, boolean>;
  notes: Record<string, unknown>;
}

export function bundleFromDir(inDir: string, outDir: string): ReportBundle {
  const csvPath = join(inDir, "diagnostics.csv");
  if (!existsSync(csvPath)) {
    throw new Error(`missing diagnostics.csv in ${inDir}`);
  }
  const summaryPath = join(inDir, "summary.json");
  return {
    csvPath,
    summaryPath: existsSync(summaryPath) ? summaryPath : null,
    outDir,
  };
}

export function readSummary(bundle: ReportBundle): Summary | null {
  if (bundle.summaryPath === null) return null;
  return JSON.parse(readFileSync(bundle.summaryPath, "utf-8")) as Summary;
}
