/**
 * Reader for the simulator's diagnostics CSV.
 *
 * Schema (headers exactly, one row per sample):
 * t, eps, variant, L2_u, L2_B, Hm_tan_u, Hm_co_u, Hm1_co_w, E1, E2, G, X,
 * lam_s_u, lam_s_w, dissipation_h, dissipation_3
 */

import { readFileSync } from "fs";

export const CSV_HEADERS = [
  "t", "eps", "variant", "L2_u", "L2_B", "Hm_tan_u", "Hm_co_u", "Hm1_co_w",
  "E1", "E2", "G", "X", "lam_s_u", "lam_s_w", "dissipation_h", "dissipation_3",
] as const;

export interface DiagRow {
  t: number;
  eps: number;
  variant: string;
  L2_u: number;
  L2_B: number;
  Hm_tan_u: number;
  Hm_co_u: number;
  Hm1_co_w: number;
  E1: number;
  E2: number;
  G: number;
  X: number;
  lam_s_u: number;
  lam_s_w: number;
  dissipation_h: number;
  dissipation_3: number;
}

export function parseDiagnosticsCsv(text: string): DiagRow[] {
  const lines = text.trim().split("\n");
  if (lines.length === 0 || lines[0].trim() === "") {
    throw new Error("empty CSV: no header line");
  }
  const headers = lines[0].split(",");
  if (headers.length !== CSV_HEADERS.length ||
      headers.some((h, i) => h !== CSV_HEADERS[i])) {
    throw new Error(
      `CSV schema mismatch: expected [${CSV_HEADERS.join(",")}], got [${headers.join(",")}]`,
    );
  }
  const rows: DiagRow[] = [];
  for (const line of lines.slice(1)) {
    if (line.trim() === "") continue;
    const parts = line.split(",");
    if (parts.length !== CSV_HEADERS.length) {
      throw new Error(`CSV row has ${parts.length} fields, expected ${CSV_HEADERS.length}`);
    }
    const row: Record<string, number | string> = {};
    CSV_HEADERS.forEach((h, i) => {
      if (h === "variant") {
        row[h] = parts[i];
      } else {
        const v = parseFloat(parts[i]);
        if (!Number.isFinite(v)) {
          throw new Error(`non-numeric value '${parts[i]}' in column ${h}`);
        }
        row[h] = v;
      }
    });
    rows.push(row as unknown as DiagRow);
  }
  if (rows.length === 0) {
    throw new Error("empty CSV: header only, no data rows");
  }
  return rows;
}

export function readDiagnosticsCsv(path: string): DiagRow[] {
  return parseDiagnosticsCsv(readFileSync(path, "utf-8"));
}
