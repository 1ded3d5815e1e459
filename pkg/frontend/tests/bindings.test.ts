import { describe, expect, test } from "vitest";

import {
  InvalidSmilesError, canonicalEqual, canonicalSmiles, canonicalSmilesBatch,
  extendVocabulary, generationSuite, score, tokenizeSmiles,
} from "../src/index.js";

describe("canonicalization bindings", () => {
  test("spellings collapse to one canonical form", () => {
    expect(canonicalSmiles("OCC")).toBe(canonicalSmiles("CCO"));
    expect(canonicalSmiles("C1=CC=CC=C1")).toBe(canonicalSmiles("c1ccccc1"));
  });

  test("invalid input throws with the diagnostic", () => {
    expect(() => canonicalSmiles("C1CC")).toThrowError(InvalidSmilesError);
    try {
      canonicalSmiles("C1CC");
    } catch (err) {
      expect((err as InvalidSmilesError).diagnostic).toContain("unclosed_ring@1");
    }
  });

  test("batch keeps line alignment with invalid entries", () => {
    const out = canonicalSmilesBatch(["CCO", "C1CC", "OCC"]);
    expect(out[0]).toBe(out[2]);
    expect(out[1]).toBeInstanceOf(InvalidSmilesError);
  });

  test("canonicalEqual handles fragments and invalid operands", () => {
    expect(canonicalEqual("CCO", "OCC")).toBe(true);
    expect(canonicalEqual("Cc1ccc(B(O)O)cc1.Nc1ccccc1I",
                          "Nc1ccccc1I.Cc1ccc(B(O)O)cc1")).toBe(true);
    expect(canonicalEqual("C1CC", "CCC")).toBe(false);
  });
});

describe("tokenizer bindings", () => {
  test("two-character elements split correctly", () => {
    expect(tokenizeSmiles("ClCCl")).toEqual(["Cl", "C", "Cl"]);
  });

  test("wrapped special-symbol forms", () => {
    expect(tokenizeSmiles("ClCCl", true)).toEqual(["<sm_Cl>", "<sm_C>", "<sm_Cl>"]);
    expect(tokenizeSmiles("[N+](=O)[O-]")).toEqual(["[N+]", "(", "=", "O", ")", "[O-]"]);
  });
});

describe("vocabulary extension binding", () => {
  test("plan re-uses the first base embeddings", () => {
    const base = ["<pad>", "<unk>", "</s>", "<sep>", "w0", "w1", "w2", "w3", "w4", "w5"];
    const ext = extendVocabulary(base, ["CCO", "CCN"]);
    expect(ext.baseSize).toBe(10);
    expect(ext.addedTokens[0]).toBe("<sm_C>");
    expect(ext.initSource).toEqual([0, 1, 2]);
    expect(ext.tokens.length).toBe(13);
  });
});

describe("scoring bindings", () => {
  test("classification reports", () => {
    const reports = score(
      "qa_yesno",
      [{ id: "1", label: "Yes" }, { id: "2", label: "No" }],
      ["Yes", "No"],
    );
    const byName = Object.fromEntries(reports.map((r) => [r.metric_name, r.value]));
    expect(byName.accuracy).toBe(1);
    expect(byName.balanced_accuracy).toBe(1);
  });

  test("reaction accuracy honors the match mode", () => {
    const gold = [{ id: "1", smiles: "CCO" }];
    expect(score("retrosynthesis", gold, ["OCC"], { match: "canonical" })[0].value).toBe(1);
    expect(score("retrosynthesis", gold, ["OCC"], { match: "exact" })[0].value).toBe(0);
  });

  test("generation suite identities", () => {
    const corpus = ["CCO", "c1ccccc1", "CC(=O)Nc1ccccc1", "CCN", "C1CCOC1"];
    const stats = generationSuite(corpus, corpus, corpus, { k: 5 });
    expect(stats.valid).toBe(1);
    expect(stats.snn).toBe(1);
    expect(stats.novelty).toBe(0);
    expect(stats.fcd_substitute).toBe(true);
    expect(stats.fd_descriptor ?? 1).toBeLessThanOrEqual(1e-6);
  });

  test("generation suite nulls distributional fields without test set", () => {
    const stats = generationSuite(["CCO", "CCN"], null, null);
    expect(stats.snn).toBeNull();
    expect(stats.frag).toBeNull();
  });
});
