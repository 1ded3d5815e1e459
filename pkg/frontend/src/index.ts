/**
 * Thin bindings over the chemtext CLI so JS/TS pipelines can call
 * canonicalization, tokenization, vocabulary extension, and scoring without
 * re-implementing anything. Behavior parity with the native library is
 * enforced by the fixture suite (see parity.ts); any difference is a bug
 * here by definition.
 */

import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ChemtextCliError, runCli, runCliChecked } from "./cli.js";

export { ChemtextCliError, runCli, runCliChecked } from "./cli.js";

export class InvalidSmilesError extends Error {
  constructor(public readonly smiles: string, public readonly diagnostic: string) {
    super(`invalid SMILES ${JSON.stringify(smiles)}: ${diagnostic}`);
    this.name = "InvalidSmilesError";
  }
}

/** Canonical forms for a batch; one process for any number of inputs. */
export function canonicalSmilesBatch(smiles: string[]): (string | InvalidSmilesError)[] {
  if (smiles.length === 0) return [];
  const result = runCliChecked(["canon"], smiles.join("\n") + "\n");
  const lines = result.stdout.split("\n");
  return smiles.map((input, i) => {
    const line = lines[i] ?? "";
    if (line.startsWith("INVALID\t")) {
      return new InvalidSmilesError(input, line.slice("INVALID\t".length));
    }
    return line;
  });
}

export function canonicalSmiles(smiles: string): string {
  const [out] = canonicalSmilesBatch([smiles]);
  if (out instanceof InvalidSmilesError) throw out;
  return out;
}

/** True iff both parse, validate, and share one canonical form. */
export function canonicalEqual(a: string, b: string): boolean {
  const [ca, cb] = canonicalSmilesBatch([a, b]);
  if (ca instanceof InvalidSmilesError || cb instanceof InvalidSmilesError) return false;
  return ca === cb;
}

export function tokenizeSmilesBatch(smiles: string[], wrapped = false): string[][] {
  if (smiles.length === 0) return [];
  const args = wrapped ? ["tokenize", "--wrap"] : ["tokenize"];
  const result = runCliChecked(args, smiles.join("\n") + "\n");
  const lines = result.stdout.split("\n");
  return smiles.map((_, i) => {
    const line = lines[i] ?? "";
    return line.length === 0 ? [] : line.split(" ");
  });
}

/** Lossless chemical tokens; set `wrapped` for the <sm_...> special forms. */
export function tokenizeSmiles(smiles: string, wrapped = false): string[] {
  return tokenizeSmilesBatch([smiles], wrapped)[0];
}

export interface VocabExtension {
  baseSize: number;
  addedTokens: string[];
  initSource: number[];
  tokens: string[];
}

/** Extend a base vocabulary from a SMILES corpus; plan as plain arrays. */
export function extendVocabulary(baseTokens: string[], corpus: string[]): VocabExtension {
  const dir = mkdtempSync(join(tmpdir(), "chemtext-vocab-"));
  try {
    const basePath = join(dir, "base.txt");
    const corpusPath = join(dir, "corpus.smi");
    const outVocab = join(dir, "vocab.txt");
    const outPlan = join(dir, "plan.txt");
    writeFileSync(basePath, baseTokens.join("\n") + "\n");
    writeFileSync(corpusPath, corpus.join("\n") + "\n");
    runCliChecked([
      "vocab-extend", "--base", basePath, "--corpus", corpusPath,
      "--out-vocab", outVocab, "--out-plan", outPlan,
    ]);
    const tokens = readFileSync(outVocab, "utf-8").split("\n").filter((l) => l.length > 0);
    const planLines = readFileSync(outPlan, "utf-8").split("\n").filter((l) => l.length > 0);
    const header = planLines.shift() ?? "";
    const baseSize = Number(header.replace("base_size=", ""));
    const addedTokens: string[] = [];
    const initSource: number[] = [];
    for (const line of planLines) {
      const [token, source] = line.split("\t");
      addedTokens.push(token);
      initSource.push(Number(source));
    }
    return { baseSize, addedTokens, initSource, tokens };
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export interface MetricReport {
  task: string;
  metric_name: string;
  value: number;
  support: number;
  rejected: number;
  config_digest: string;
}

export interface ScoreOptions {
  k?: number;
  match?: "exact" | "canonical";
  labels?: string[];
  positiveLabel?: string;
  markers?: [string, string];
}

/** Score predictions against gold records for one task. */
export function score(
  task: string,
  gold: Record<string, unknown>[],
  pred: string[],
  options: ScoreOptions = {},
): MetricReport[] {
  const dir = mkdtempSync(join(tmpdir(), "chemtext-score-"));
  try {
    const goldPath = join(dir, "gold.jsonl");
    const predPath = join(dir, "pred.txt");
    writeFileSync(goldPath, gold.map((r) => JSON.stringify(r)).join("\n") + "\n");
    writeFileSync(predPath, pred.join("\n") + "\n");
    const args = ["score", "--task", task, "--gold", goldPath, "--pred", predPath];
    if (options.k !== undefined) args.push("--k", String(options.k));
    if (options.match) args.push("--match", options.match);
    if (options.labels) args.push("--labels", options.labels.join(","));
    if (options.positiveLabel) args.push("--positive-label", options.positiveLabel);
    if (options.markers) args.push("--markers", options.markers[0], options.markers[1]);
    const result = runCliChecked(args);
    return result.stdout
      .split("\n")
      .filter((l) => l.length > 0)
      .map((l) => JSON.parse(l) as MetricReport);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export interface GenerationStats {
  n_generated: number;
  n_valid: number;
  n_unique: number;
  valid: number;
  unique_at_k: number | null;
  k: number;
  novelty: number | null;
  int_div: number | null;
  p: number;
  snn: number | null;
  frag: number | null;
  scaf: number | null;
  filters: number | null;
  fd_descriptor: number | null;
  fcd_substitute: boolean;
  [extra: string]: unknown;
}

export interface GenerationSuiteOptions {
  k?: number;
  p?: number;
}

/** The full generative-model metric suite over three SMILES sets. */
export function generationSuite(
  gen: string[],
  train: string[] | null,
  test: string[] | null,
  options: GenerationSuiteOptions = {},
): GenerationStats {
  const dir = mkdtempSync(join(tmpdir(), "chemtext-gen-"));
  try {
    const genPath = join(dir, "gen.smi");
    writeFileSync(genPath, gen.join("\n") + "\n");
    const args = ["gen-metrics", "--gen", genPath];
    if (train && train.length > 0) {
      const trainPath = join(dir, "train.smi");
      writeFileSync(trainPath, train.join("\n") + "\n");
      args.push("--train", trainPath);
    }
    if (test && test.length > 0) {
      const testPath = join(dir, "test.smi");
      writeFileSync(testPath, test.join("\n") + "\n");
      args.push("--test", testPath);
    }
    if (options.k !== undefined) args.push("--k", String(options.k));
    if (options.p !== undefined) args.push("--p", String(options.p));
    const result = runCliChecked(args);
    return JSON.parse(result.stdout) as GenerationStats;
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export { parityCheck, generateFixtures } from "./parity.js";
export type { ParityReport, ParityMismatch } from "./parity.js";
