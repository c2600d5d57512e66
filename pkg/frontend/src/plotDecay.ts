/**
 * Decay figure: log-log plot of (1+t) against the squared tangential norm,
 * with the slope fitted from the CSV data over the recorded window and the
 * configured reference slope -s.
 *
 * Nothing is recomputed from physics: the curve is the CSV column, the window
 * and reference exponent come from the summary sidecar (when present), and
 * the annotated slope is re-fitted from the plotted points with the same
 * least-squares convention the simulator used.
 */

import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";

import { bundleFromDir, readSummary, ReportBundle } from "./bundle.js";
import { readDiagnosticsCsv } from "./csv.js";
import { fitPowerLaw, PowerLawFit } from "./fit.js";
import { buildLogLogChart } from "./svg.js";

export interface DecayPlotResult {
  outPath: string;
  fitted: PowerLawFit | null;
  summaryExponent: number | null;
  svg: string;
}

export function plotDecay(bundle: ReportBundle): DecayPlotResult {
  const rows = readDiagnosticsCsv(bundle.csvPath);
  const summary = readSummary(bundle);

  const t = rows.map((r) => r.t);
  const energy = rows.map((r) => r.Hm_tan_u * r.Hm_tan_u);

  let window: [number, number] = [t[0], t[t.length - 1]];
  let refSlope: number | null = null;
  let summaryExponent: number | null = null;
  if (summary !== null) {
    const fit = summary.fits["tan2_u"];
    if (fit?.window) window = [fit.window[0], fit.window[1]];
    if (fit) summaryExponent = fit.exponent;
    const s = summary.config["s"];
    if (typeof s === "number") refSlope = -s;
  }

  let fitted: PowerLawFit | null = null;
  try {
    fitted = fitPowerLaw(t, energy, window);
  } catch {
    fitted = null; // too few samples: plot data only
  }

  const series = [{
    x: t.map((v) => 1 + v),
    y: energy,
    color: "#4361ee",
    label: "tangential energy |u|^2_{H^m_tan}",
    markers: false,
  }];
  const refLines = [];
  const annotations: string[] = [];
  const anchorIdx = Math.max(0, t.findIndex((v) => v >= window[0]));
  const anchor = { x: 1 + t[anchorIdx], y: energy[anchorIdx] };
  if (fitted !== null) {
    refLines.push({
      slope: -fitted.exponent,
      offsetThrough: anchor,
      color: "#e63946",
      label: `fitted slope ${(-fitted.exponent).toFixed(8)}`,
    });
    annotations.push(
      `fitted slope = ${(-fitted.exponent).toFixed(8)} on window [${window[0]}, ${window[1]}]`,
    );
  }
  if (refSlope !== null) {
    refLines.push({
      slope: refSlope,
      offsetThrough: { x: anchor.x, y: anchor.y * 0.5 },
      color: "#2d6a4f",
      label: `reference slope ${refSlope.toFixed(4)}`,
      dash: "2,3",
    });
  }

  const svg = buildLogLogChart({
    title: "Tangential energy decay",
    xLabel: "1 + t",
    yLabel: "squared H^m_tan norm",
    series,
    refLines,
    annotations,
  });

  const key = summary?.config_hash ?? "synthetic";
  mkdirSync(bundle.outDir, { recursive: true });
  const outPath = join(bundle.outDir, `decay_${key}.svg`);
  writeFileSync(outPath, svg);
  return { outPath, fitted, summaryExponent, svg };
}

export function plotDecayFromDirs(inDir: string, outDir: string): DecayPlotResult {
  return plotDecay(bundleFromDir(inDir, outDir));
}
