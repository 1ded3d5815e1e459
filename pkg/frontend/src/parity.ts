/**
 * Parity checking: replay CLI-generated fixture triples through the
 * bindings and report any divergence. The bindings add no logic, so a
 * mismatch is a binding bug by definition.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { runCliChecked } from "./cli.js";
import {
  InvalidSmilesError, canonicalSmilesBatch, tokenizeSmilesBatch,
} from "./index.js";

export interface FixtureTriple {
  function: string;
  input: unknown;
  expected: unknown;
}

export interface ParityMismatch {
  line: number;
  function: string;
  input: unknown;
  expected: unknown;
  actual: unknown;
}

export interface ParityReport {
  total: number;
  passed: number;
  failed: number;
  corrupt: number;
  mismatches: ParityMismatch[];
}

function deepEqual(a: unknown, b: unknown): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

/** Run every triple in a fixture file; batches per function for speed. */
export function parityCheck(fixturePath: string): ParityReport {
  const report: ParityReport = { total: 0, passed: 0, failed: 0, corrupt: 0, mismatches: [] };
  const entries: { line: number; triple: FixtureTriple }[] = [];
  const lines = readFileSync(fixturePath, "utf-8").split("\n");
  lines.forEach((raw, idx) => {
    if (raw.trim().length === 0) return;
    report.total += 1;
    try {
      const triple = JSON.parse(raw) as FixtureTriple;
      if (typeof triple.function !== "string" || !("input" in triple) || !("expected" in triple)) {
        throw new Error("missing fields");
      }
      entries.push({ line: idx + 1, triple });
    } catch {
      report.corrupt += 1;
      report.failed += 1;
      report.mismatches.push({
        line: idx + 1, function: "?", input: raw.slice(0, 60),
        expected: "valid JSON triple", actual: "corrupt line",
      });
    }
  });

  const byFunction = new Map<string, { line: number; triple: FixtureTriple }[]>();
  for (const entry of entries) {
    const bucket = byFunction.get(entry.triple.function) ?? [];
    bucket.push(entry);
    byFunction.set(entry.triple.function, bucket);
  }

  const record = (entry: { line: number; triple: FixtureTriple }, actual: unknown) => {
    if (deepEqual(actual, entry.triple.expected)) {
      report.passed += 1;
    } else {
      report.failed += 1;
      report.mismatches.push({
        line: entry.line,
        function: entry.triple.function,
        input: entry.triple.input,
        expected: entry.triple.expected,
        actual,
      });
    }
  };

  for (const [fn, bucket] of byFunction) {
    switch (fn) {
      case "canonical_smiles": {
        const outs = canonicalSmilesBatch(bucket.map((e) => String(e.triple.input)));
        bucket.forEach((entry, i) => {
          const out = outs[i];
          record(entry, out instanceof InvalidSmilesError ? `INVALID ${out.diagnostic}` : out);
        });
        break;
      }
      case "canonical_equal": {
        const pairs = bucket.map((e) => e.triple.input as [string, string]);
        const flat = canonicalSmilesBatch(pairs.flat());
        bucket.forEach((entry, i) => {
          const a = flat[2 * i];
          const b = flat[2 * i + 1];
          const equal = !(a instanceof InvalidSmilesError)
            && !(b instanceof InvalidSmilesError) && a === b;
          record(entry, equal);
        });
        break;
      }
      case "tokenize_smiles": {
        const outs = tokenizeSmilesBatch(bucket.map((e) => String(e.triple.input)), false);
        bucket.forEach((entry, i) => record(entry, outs[i]));
        break;
      }
      case "wrap_tokens": {
        const outs = tokenizeSmilesBatch(bucket.map((e) => String(e.triple.input)), true);
        bucket.forEach((entry, i) => record(entry, outs[i]));
        break;
      }
      default: {
        bucket.forEach((entry) => record(entry, `unknown function ${fn}`));
      }
    }
  }
  return report;
}

/** Ask the CLI to emit n fixture triples from a SMILES corpus file. */
export function generateFixtures(corpusPath: string, outPath: string, n = 500, seed = 0): number {
  const result = runCliChecked([
    "fixtures", "--corpus", corpusPath, "--n", String(n), "--seed", String(seed),
  ]);
  writeFileSync(outPath, result.stdout);
  return result.stdout.split("\n").filter((l) => l.trim().length > 0).length;
}
