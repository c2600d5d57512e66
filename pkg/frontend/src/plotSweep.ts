/**
 * Vanishing-viscosity convergence figure: log-log plot of epsilon against the
 * sup-in-time difference norms, with reference lines of slope 1/2 (squared L2
 * bound) and 1/16 (sup-norm rate), plus slopes re-fitted from the plotted
 * points.
 */

import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";

import { bundleFromDir, readSummary, ReportBundle } from "./bundle.js";
import { logLogSlope } from "./fit.js";
import { buildLogLogChart, RefLine, Series } from "./svg.js";

export interface SweepRow {
  eps: number;
  sup_l2_sq: number;
  sup_linf: number;
}

export interface SweepPlotResult {
  outPath: string;
  fittedL2Slope: number | null;
  fittedLinfSlope: number | null;
  summaryL2Slope: number | null;
  svg: string;
}

export function plotSweep(bundle: ReportBundle): SweepPlotResult {
  const summary = readSummary(bundle);
  if (summary === null) {
    throw new Error("sweep plotting needs summary.json (the sweep table lives there)");
  }
  const table = summary.notes["sweep"] as SweepRow[] | undefined;
  if (!table || table.length === 0) {
    throw new Error("summary.json carries no sweep table");
  }

  const eps = table.map((r) => r.eps);
  const l2 = table.map((r) => r.sup_l2_sq);
  const linf = table.map((r) => r.sup_linf);

  const series: Series[] = [
    { x: eps, y: l2, color: "#4361ee", label: "sup_t |u_eps - u_0|^2_{L2}", markers: true },
    { x: eps, y: linf, color: "#9d4edd", label: "sup_t |u_eps - u_0|_{Linf}", markers: true },
  ];

  const refLines: RefLine[] = [
    {
      slope: 0.5,
      offsetThrough: { x: eps[0], y: l2[0] },
      color: "#2d6a4f",
      label: "reference slope 1/2",
      dash: "2,3",
    },
    {
      slope: 1.0 / 16.0,
      offsetThrough: { x: eps[0], y: linf[0] },
      color: "#bc6c25",
      label: "reference slope 1/16",
      dash: "2,3",
    },
  ];

  let fittedL2: number | null = null;
  let fittedLinf: number | null = null;
  const annotations: string[] = [];
  if (table.length >= 2) {
    fittedL2 = logLogSlope(eps, l2);
    fittedLinf = logLogSlope(eps, linf);
    annotations.push(`fitted L2^2 slope = ${fittedL2.toFixed(8)}`);
    annotations.push(`fitted Linf slope = ${fittedLinf.toFixed(8)}`);
  } else {
    annotations.push("single point: reference lines only, no fit");
  }

  const svg = buildLogLogChart({
    title: "Vanishing-viscosity convergence",
    xLabel: "epsilon",
    yLabel: "sup-in-time difference",
    series,
    refLines,
    annotations,
  });

  mkdirSync(bundle.outDir, { recursive: true });
  const outPath = join(bundle.outDir, `sweep_${summary.config_hash}.svg`);
  writeFileSync(outPath, svg);

  const summaryFit = summary.fits["l2_sq_slope"];
  return {
    outPath,
    fittedL2Slope: fittedL2,
    fittedLinfSlope: fittedLinf,
    summaryL2Slope: summaryFit ? summaryFit.exponent : null,
    svg,
  };
}

export function plotSweepFromDirs(inDir: string, outDir: string): SweepPlotResult {
  return plotSweep(bundleFromDir(inDir, outDir));
}
