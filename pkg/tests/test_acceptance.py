"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run with `pytest -s` to see them all).
"""

import json
import math
import random
import time
import tracemalloc

import pytest

from chemtext import (
    bleu2, build_index, canonical_equal, canonical_smiles, classification_scores,
    corpus_path, default_templates_path, entity_f1, generation_suite,
    morgan_fingerprint, normalize, parse_smiles, parse_valid, randomize_smiles,
    sample_mixture, tanimoto, tokenize_smiles, topk_reaction_accuracy, validate,
    word_f1, wrap_token,
    DatasetReader, MixtureComponent, MixtureSpec, TaskInstance, TaskKind,
)
from chemtext.prompts import decode_spans, encode_spans, format_instance, load_templates


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def corpus():
    with open(corpus_path(), encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    assert len(lines) == 1000
    return lines


@pytest.fixture(scope="module")
def corpus_mols(corpus):
    return [parse_smiles(s) for s in corpus]


def test_canonical_invariance_corpus(corpus_mols):
    """1,000 molecules x 10 renderings: one canonical string each, < 10 s."""
    start = time.perf_counter()
    failures = 0
    for mol in corpus_mols:
        expect = canonical_smiles(mol)
        for seed in range(10):
            rendering = randomize_smiles(mol, seed)
            if canonical_smiles(parse_smiles(rendering)) != expect:
                failures += 1
                break
    elapsed = time.perf_counter() - start
    report("canonical-invariance",
           failures == 0 and elapsed < 10.0,
           f"{failures} failures, {elapsed:.2f}s")


def test_canonical_idempotence_and_benzene(corpus_mols):
    ok_benzene = canonical_equal("c1ccccc1", "C1=CC=CC=C1")
    failures = 0
    for mol in corpus_mols:
        c1 = canonical_smiles(mol)
        c2 = canonical_smiles(parse_smiles(c1))
        if c1 != c2:
            failures += 1
    report("idempotence-and-kekulized-benzene",
           ok_benzene and failures == 0,
           f"benzene={ok_benzene}, idempotence failures={failures}")


# strings quoted in task prompts and worked examples across the corpora
REFERENCE_SMILES = [
    "CC(C)(C)NC(=O)CN1CCC(C(=O)Nc2cccc(-c3nc4ccccc4n3Cc3ccccc3)c2)CC1",
    "O=C(NC1CCN(Cc2ccccc2)CC1)c1c(Cl)cccc1[N+](=O)[O-]",
    "C1=CC(=CC=C1C[C@H](C(=O)[O-])N)O",
    "CO.C[Si](C)(C)C#Cc1ccc(C=O)cc1.ClCCl.O=C([O-])[O-].[K+].[K+]",
    "C#Cc1ccc(C=O)cc1",
    "COC(=O)c1c(F)cc(NC(=O)c2cc(C(C)C)c(C(C)C)s2)cc1F",
    "CC(C)c1c(C(C)C)sc(C(=O)Nc2cc(F)c(C(=O)O)c(F)c2)c1",
    "[Na+].[OH-]",
    "Cc1ccc(-c2ccccc2N)cc1",
    "Cc1ccc(B(O)O)cc1.Nc1ccccc1I",
    "CC1C2CCC(C2)C1CN(CCO)C(=O)c1ccc(Cl)cc1",
    "CC(=O)c1cc2c(cc1)Sc1ccccc1N2C[C@@H](C)N(C)C",
    "C(=C(Cl)Cl)(Cl)Cl",
    "CN(C)[C@H]1[C@@H]2C[C@H]3C(=C(O)c4c(O)cccc4[C@@]3(C)O)C(=O)[C@]2(O)C(=O)C(=C(/O)NCN5CCCC5)C1=O",
    "CCC1=[O+][Cu-3]2([O+]=C(CC)C1)[O+]=C(CC)CC(CC)=[O+]2",
    "S(=O)(=O)(CCCCC)C[C@@H](NC(=O)c1cccnc1)C(=O)N[C@H]([C@H](O)C[NH2+]Cc1cc(ccc1)CC)Cc1cc(F)cc(F)c1",
    "OCC2OC(Oc1ccccc1CO)C(O)C(O)C2O",
    "COc1cc(c(c(c1O)OC)Cl)C=O",
    "O=C1OC2C3CC1OC32",
    "COc1cc(OC)c(cc1NC(=O)CCC(=O)O)S(=O)(=O)NCc2ccccc2N3CCCCC3",
]


def test_tokenizer_losslessness(corpus):
    bad = 0
    for s in corpus + REFERENCE_SMILES:
        if "".join(t.surface for t in tokenize_smiles(s)) != s:
            bad += 1
    wrapped_ok = (wrap_token("C") == "<sm_C>"
                  and wrap_token("[O-]") == "<sm_[O-]>"
                  and wrap_token("%10") == "<sm_%10>")
    report("tokenizer-losslessness", bad == 0 and wrapped_ok,
           f"{bad} of {len(corpus) + len(REFERENCE_SMILES)} strings failed")


def test_prompt_fixtures():
    templates = load_templates(default_templates_path())

    def tmpl(tid):
        return next(t for t in templates if t.template_id == tid)

    checks = []
    ner_text = ("Identification of APC2 , a homologue of the adenomatous "
                "polyposis coli tumour suppressor.")
    start, end = ner_text.index("adenomatous"), ner_text.index(" suppressor")
    pair = format_instance(
        TaskInstance(TaskKind.NER, {"text": ner_text, "spans": [(start, end, "diso")]},
                     dataset="bc5-disease"),
        tmpl("ner-disease"))
    checks.append(pair.target == (
        "Identification of APC2 , a homologue of the diso* adenomatous "
        "polyposis coli tumour *diso suppressor."))

    pair = format_instance(
        TaskInstance(TaskKind.QA_MULTICHOICE, {
            "question": "Which of the following is antifibrinolytic drug",
            "choices": ["Tenecteplase", "Heparin", "Urokinase", "Tranexaemic acid"],
            "answer": "D"}),
        tmpl("qa-multichoice"))
    checks.append(pair.target == "The final answer is (D).")

    pair = format_instance(
        TaskInstance(TaskKind.PROP_CLASSIFICATION,
                     {"smiles": "CCO", "label": "1"}, dataset="bbbp"),
        tmpl("prop-bbbp"))
    checks.append(pair.target == "1")

    pair = format_instance(
        TaskInstance(TaskKind.PROP_REGRESSION,
                     {"smiles": "OCC2OC(Oc1ccccc1CO)C(O)C(O)C2O", "value": 1.083897},
                     dataset="esol"),
        tmpl("prop-logs"))
    checks.append(pair.target == "1.083897")

    pair = format_instance(
        TaskInstance(TaskKind.PROP_REGRESSION,
                     {"smiles": "COc1cc(c(c(c1O)OC)Cl)C=O", "value": -1.013714},
                     dataset="freesolv"),
        tmpl("prop-hfe"))
    checks.append(pair.target == "-1.013714")

    pair = format_instance(
        TaskInstance(TaskKind.QA_YESNO,
                     {"passage": "passage text", "question": "q?", "label": "Yes"}),
        tmpl("qa-yesno"))
    checks.append(pair.target == "Yes")

    # decode(encode) == spans over 1,000 randomized fixtures
    rng = random.Random(20240901)
    words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta"]
    roundtrip_failures = 0
    for _ in range(1000):
        n = rng.randrange(1, 14)
        tokens = [rng.choice(words) for _ in range(n)]
        text = " ".join(tokens)
        offsets = []
        pos = 0
        for t in tokens:
            offsets.append((pos, pos + len(t)))
            pos += len(t) + 1
        spans = []
        k = 0
        while k < n:
            if rng.random() < 0.35:
                j = min(n - 1, k + rng.randrange(0, 3))
                spans.append((offsets[k][0], offsets[j][1]))
                k = j + 1
            else:
                k += 1
        marked = encode_spans(text, spans, ("m*", "*m"))
        decoded, warnings = decode_spans(marked, text, ("m*", "*m"))
        if decoded != spans or warnings:
            roundtrip_failures += 1
    checks.append(roundtrip_failures == 0)
    report("prompt-fixtures", all(checks),
           f"fixture checks={checks[:6]}, span roundtrip failures={roundtrip_failures}")


def test_metric_oracle_equivalence(corpus):
    rng = random.Random(42)
    mismatches = 0
    for _ in range(50):
        size = rng.randrange(2, 21)
        gen = rng.sample(corpus, size)
        test = rng.sample(corpus, rng.randrange(2, 21))
        stats = generation_suite(gen, train=None, test=test, k=min(size, 5))
        fps = [morgan_fingerprint(parse_valid(s)) for s in gen]
        tfps = [morgan_fingerprint(parse_valid(s)) for s in test]
        n = len(fps)
        int_div_oracle = 1 - sum(tanimoto(fps[i], fps[j])
                                 for i in range(n) for j in range(n)) / (n * n)
        snn_oracle = sum(max(tanimoto(f, tf) for tf in tfps) for f in fps) / n
        if not math.isclose(stats.int_div, int_div_oracle, abs_tol=1e-12):
            mismatches += 1
        if not math.isclose(stats.snn, snn_oracle, abs_tol=1e-12):
            mismatches += 1

    # ten crafted confusion-matrix cases, expectations counted by hand
    crafted_ok = 0
    cases = [
        # (gold, pred, expected accuracy, expected balanced accuracy)
        (["1", "0"], ["1", "0"], 1.0, 1.0),
        (["1", "0", "1", "0"], ["1", "1", "0", "0"], 0.5, 0.5),
        (["0"] * 8 + ["1"] * 2, ["0"] * 10, 0.8, 0.5),
        (["1", "1", "1", "0"], ["1", "1", "0", "0"], 0.75, 5 / 6),
        (["0", "0", "1"], ["1", "1", "1"], 1 / 3, 0.5),
        (["1", "0", "1"], ["1", None, "1"], 2 / 3, 0.5),
        (["a", "b", "c"], ["a", "b", "c"], 1.0, 1.0),
        (["a", "a", "b", "c"], ["a", "b", "b", "c"], 0.75, 0.5 + 1 / 3),
        (["1"] * 5, ["1", "1", "1", "1", "0"], 0.8, 0.8),
        (["0", "1"], [None, None], 0.0, 0.0),
    ]
    for gold, pred, acc, ba in cases:
        labels = sorted({g for g in gold})
        reports = {r.metric_name: r.value
                   for r in classification_scores(gold, pred, labels)}
        if math.isclose(reports["accuracy"], acc, abs_tol=1e-12) and \
           math.isclose(reports["balanced_accuracy"], ba, abs_tol=1e-12):
            crafted_ok += 1

    # entity/word F1 hand counts
    f1_ok = math.isclose(
        entity_f1({"d": [(0, 5, "t"), (8, 12, "t")]}, {"d": [(0, 5, "t")]}).value,
        2 / 3, abs_tol=1e-12)
    f1_ok &= math.isclose(
        word_f1({"d": ["I", "I", "I", "I", "O", "O"]},
                {"d": ["I", "I", "I", "O", "I", "O"]}).value,
        0.75, abs_tol=1e-12)

    bleu = bleu2(["a b c d"], ["a b c"]).value
    bleu_ok = abs(bleu - math.exp(1 - 4 / 3)) < 1e-9

    report("metric-oracle-equivalence",
           mismatches == 0 and crafted_ok == 10 and f1_ok and bleu_ok,
           f"loop mismatches={mismatches}, crafted {crafted_ok}/10, "
           f"f1={f1_ok}, bleu delta={abs(bleu - math.exp(1 - 4/3)):.2e}")


def test_generation_degenerate_identities(corpus):
    stats = generation_suite(corpus, train=corpus, test=corpus, k=1000)
    ok = (stats.snn == 1.0 and stats.frag == 1.0 and stats.scaf == 1.0
          and stats.fd_descriptor is not None and stats.fd_descriptor <= 1e-6
          and stats.novelty == 0.0 and stats.unique_at_k == 1.0
          and stats.valid == 1.0)
    report("generation-degenerate-identities", ok,
           f"snn={stats.snn}, frag={stats.frag}, scaf={stats.scaf}, "
           f"fd={stats.fd_descriptor}, novelty={stats.novelty}, "
           f"unique@1000={stats.unique_at_k}, valid={stats.valid}")


def test_reaction_scoring_canonical_vs_exact(corpus):
    rng = random.Random(7)
    pool = [s for s in corpus if len(s) > 6]
    gold = []
    cands = []
    made = 0
    for smi in pool:
        mol = parse_smiles(smi)
        canon = canonical_smiles(mol)
        if made < 50:
            gold.append(canon)
            cands.append([canon])
            made += 1
        else:
            alt = None
            for seed in range(60):
                rendering = randomize_smiles(mol, seed)
                if rendering != canon:
                    alt = rendering
                    break
            if alt is None:
                continue
            gold.append(canon)
            cands.append([alt])
            made += 1
        if made == 100:
            break
    assert made == 100
    canonical_acc = topk_reaction_accuracy(gold, cands, k=1, match="canonical").value
    exact_acc = topk_reaction_accuracy(gold, cands, k=1, match="exact").value
    report("reaction-scoring-modes",
           canonical_acc == 1.0 and exact_acc == 0.5,
           f"canonical={canonical_acc}, exact={exact_acc}")


def test_dataset_io_scale(tmp_path):
    """1M records: random access == sequential oracle, bounded memory."""
    path = tmp_path / "big.txt"
    rng = random.Random(123)
    with open(path, "wb") as fh:
        for i in range(1_000_000):
            fh.write(b"rec-%d-%d\n" % (i, rng.randrange(1 << 30)))
    index = build_index(path)
    assert index.record_count == 1_000_000
    sample_rng = random.Random(999)
    wanted = [sample_rng.randrange(1_000_000) for _ in range(100_000)]
    wanted_set = set(wanted)
    oracle: dict[int, bytes] = {}
    with open(path, "rb") as fh:
        for i, line in enumerate(fh):
            if i in wanted_set:
                oracle[i] = line.rstrip(b"\n")
    tracemalloc.start()
    with DatasetReader(path) as reader:
        mismatches = sum(1 for i in wanted if reader.get_record(i) != oracle[i])
        _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    index_bytes = 8 * index.record_count
    limit = index_bytes + 64 * (1 << 20)
    report("dataset-io-scale",
           mismatches == 0 and peak < limit,
           f"mismatches={mismatches}, peak={peak/2**20:.1f}MiB, "
           f"limit={limit/2**20:.1f}MiB")


def test_mixture_determinism_and_fractions(tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    a.write_text("".join(f"a{i}\n" for i in range(100)))
    b.write_text("".join(f"b{i}\n" for i in range(100)))
    build_index(a)
    build_index(b)
    spec = MixtureSpec([
        MixtureComponent(str(a), TaskKind.QA_OPEN, 1.0),
        MixtureComponent(str(b), TaskKind.QA_OPEN, 3.0),
    ], seed=1234)
    with DatasetReader(a) as ra, DatasetReader(b) as rb:
        readers = [ra, rb]
        stream1 = b"".join(readers[ci].get_record(ri) + b"\n"
                           for ci, ri in sample_mixture(spec, 4000, [100, 100]))
        stream2 = b"".join(readers[ci].get_record(ri) + b"\n"
                           for ci, ri in sample_mixture(spec, 4000, [100, 100]))
    frac_b = sum(1 for line in stream1.splitlines() if line.startswith(b"b")) / 4000
    report("mixture-determinism",
           stream1 == stream2 and abs(frac_b - 0.75) <= 0.02,
           f"identical={stream1 == stream2}, frac_b={frac_b:.4f}")


def test_external_toolkit_cross_check(corpus):
    """Optional: agreement with an established toolkit, when installed."""
    rdkit = pytest.importorskip("rdkit")
    from rdkit import Chem, RDLogger

    RDLogger.DisableLog("rdApp.*")
    sample = corpus[:1000]
    ours_valid = [s for s in sample if parse_valid(s) is not None]
    theirs_valid = [s for s in sample if Chem.MolFromSmiles(s) is not None]
    valid_ok = len(ours_valid) == len(theirs_valid)
    ours_unique = len({canonical_smiles(parse_smiles(s)) for s in ours_valid})
    theirs_unique = len({Chem.MolToSmiles(Chem.MolFromSmiles(s)) for s in theirs_valid})
    report("external-cross-check",
           valid_ok and ours_unique == theirs_unique,
           f"valid {len(ours_valid)} vs {len(theirs_valid)}, "
           f"unique {ours_unique} vs {theirs_unique}")
