import { mkdirSync, mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { CSV_HEADERS, parseDiagnosticsCsv } from "../src/csv.js";
import { plotDecayFromDirs } from "../src/plotDecay.js";
import { plotSweepFromDirs } from "../src/plotSweep.js";

const FIXTURES = join(__dirname, "fixtures");

function syntheticDecayCsv(exponent = 0.95, constant = 3.0, n = 80): string {
  const lines = [CSV_HEADERS.join(",")];
  for (let i = 0; i < n; i++) {
    const t = i * 0.5;
    const energy = constant * Math.pow(1 + t, -exponent);
    const row = new Map<string, string>();
    for (const h of CSV_HEADERS) row.set(h, "0.0");
    row.set("t", String(t));
    row.set("eps", "0.01");
    row.set("variant", "ns_viscous");
    row.set("Hm_tan_u", String(Math.sqrt(energy)));
    lines.push(CSV_HEADERS.map((h) => row.get(h)!).join(","));
  }
  return lines.join("\n") + "\n";
}

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

describe("csv parsing", () => {
  it("round-trips a synthetic file", () => {
    const rows = parseDiagnosticsCsv(syntheticDecayCsv());
    expect(rows.length).toBe(80);
    expect(rows[0].variant).toBe("ns_viscous");
  });

  it("rejects an empty file", () => {
    expect(() => parseDiagnosticsCsv("")).toThrow(/empty CSV/);
  });

  it("rejects a header-only file", () => {
    expect(() => parseDiagnosticsCsv(CSV_HEADERS.join(",") + "\n")).toThrow(/no data rows/);
  });

  it("rejects schema mismatches", () => {
    expect(() => parseDiagnosticsCsv("a,b,c\n1,2,3\n")).toThrow(/schema mismatch/);
  });
});

describe("plot-decay", () => {
  it("annotates the exact synthetic slope to 1e-3", () => {
    const dir = tmp();
    writeFileSync(join(dir, "diagnostics.csv"), syntheticDecayCsv(0.95, 3.0));
    const res = plotDecayFromDirs(dir, join(dir, "figs"));
    expect(res.fitted).not.toBeNull();
    expect(Math.abs(res.fitted!.exponent - 0.95)).toBeLessThan(1e-3);
    expect(res.svg).toContain(`fitted slope ${(-res.fitted!.exponent).toFixed(8)}`);
    expect(readFileSync(res.outPath, "utf-8")).toBe(res.svg);
  });

  it("fails loudly on an empty CSV", () => {
    const dir = tmp();
    writeFileSync(join(dir, "diagnostics.csv"), "");
    expect(() => plotDecayFromDirs(dir, join(dir, "figs"))).toThrow(/empty CSV/);
  });

  it("is idempotent on identical inputs", () => {
    const dir = tmp();
    writeFileSync(join(dir, "diagnostics.csv"), syntheticDecayCsv());
    const a = plotDecayFromDirs(dir, join(dir, "figs"));
    const b = plotDecayFromDirs(dir, join(dir, "figs"));
    expect(a.svg).toBe(b.svg);
  });

  it("reproduces the real decay run's fitted slope to 1e-6", () => {
    const inDir = join(FIXTURES, "decay");
    const res = plotDecayFromDirs(inDir, tmp());
    expect(res.fitted).not.toBeNull();
    expect(res.summaryExponent).not.toBeNull();
    expect(Math.abs(res.fitted!.exponent - res.summaryExponent!)).toBeLessThan(1e-6);
    // the annotation in the figure carries the same number
    expect(res.svg).toContain((-res.fitted!.exponent).toFixed(8));
  });
});

describe("plot-sweep", () => {
  function syntheticSweepDir(points: number): string {
    const dir = tmp();
    const eps = [1e-2, 4e-3, 1e-3].slice(0, points);
    const table = eps.map((e) => ({
      eps: e,
      sup_l2_sq: 7.0 * Math.sqrt(e),
      sup_linf: 2.0 * Math.pow(e, 1.0 / 16.0),
    }));
    const summary = {
      config: { s: 0.95 },
      config_hash: "feedc0de",
      fits: {},
      flags: {},
      notes: { sweep: table },
    };
    // plotSweep reads the table from summary.json; the CSV must exist and parse
    writeFileSync(join(dir, "diagnostics.csv"), syntheticDecayCsv(0.5, 1.0, 10));
    writeFileSync(join(dir, "summary.json"), JSON.stringify(summary));
    return dir;
  }

  it("fits exactly 0.5 on synthetic sqrt(eps) points", () => {
    const dir = syntheticSweepDir(3);
    const res = plotSweepFromDirs(dir, join(dir, "figs"));
    expect(res.fittedL2Slope).not.toBeNull();
    expect(Math.abs(res.fittedL2Slope! - 0.5)).toBeLessThan(1e-12);
    expect(Math.abs(res.fittedLinfSlope! - 1.0 / 16.0)).toBeLessThan(1e-12);
  });

  it("draws reference lines only for a single point", () => {
    const dir = syntheticSweepDir(1);
    const res = plotSweepFromDirs(dir, join(dir, "figs"));
    expect(res.fittedL2Slope).toBeNull();
    expect(res.svg).toContain("single point");
    expect(res.svg).toContain("reference slope 1/2");
    expect(res.svg).toContain("reference slope 1/16");
  });

  it("matches the real sweep summary's slope to 1e-6", () => {
    const inDir = join(FIXTURES, "sweep");
    const res = plotSweepFromDirs(inDir, tmp());
    expect(res.fittedL2Slope).not.toBeNull();
    expect(res.summaryL2Slope).not.toBeNull();
    expect(Math.abs(res.fittedL2Slope! - res.summaryL2Slope!)).toBeLessThan(1e-6);
    expect(res.svg).toContain(res.fittedL2Slope!.toFixed(8));
  });
});
