"""Scoring for every task family plus the generative-model suite.

Policy for unusable predictions: classification rejects count as a wrong
pseudo-label, regression/correlation rejects are imputed with the gold mean
(and counted), generation strings that fail to parse or validate count as
invalid. Reports carry the scored-item count, the reject count, and a
digest of the metric parameters so numbers are comparable run-to-run.

The neural-activation Frechet distance of the reference benchmark needs a
trained network; this suite reports a Frechet distance over the 12-component
descriptor vectors instead, flagged `fcd_substitute` so the two are never
confused.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .canonical import canonical_smiles
from .descriptors import (
    bulk_tanimoto, descriptor_vector, fragment_molecule, morgan_fingerprint,
    pack_fingerprints, scaffold_smiles,
)
from .kekulize import normalize, validate
from .molgraph import Molecule, SmilesError
from .patterns import FilterConfig, passes_filters
from .prompts import TaskKind
from .smiles_parser import parse_smiles


def config_digest(params: Mapping) -> str:
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass
class MetricReport:
    task: str
    metric_name: str
    value: float
    support: int
    rejected: int
    config_digest: str
    degenerate: bool = field(default=False, compare=False)

    def to_json(self) -> str:
        return json.dumps({
            "task": self.task,
            "metric_name": self.metric_name,
            "value": self.value,
            "support": self.support,
            "rejected": self.rejected,
            "config_digest": self.config_digest,
        })


def _task_name(task) -> str:
    return task.value if isinstance(task, TaskKind) else str(task)


# -- span / token F1 ----------------------------------------------------------


def entity_f1(gold: Mapping[str, Sequence], pred: Mapping[str, Sequence],
              task=TaskKind.NER) -> MetricReport:
    """Micro F1 over exact (start, end, type) span matches, docs aligned by id."""
    if set(gold) != set(pred):
        missing = set(gold) ^ set(pred)
        raise ValueError(f"gold/pred document ids differ (e.g. {sorted(missing)[:3]})")
    tp = fp = fn = 0
    for doc_id, gspans in gold.items():
        gset = Counter(tuple(s) for s in gspans)
        pset = Counter(tuple(s) for s in pred[doc_id])
        inter = gset & pset
        tp += sum(inter.values())
        fp += sum((pset - gset).values())
        fn += sum((gset - pset).values())
    f1 = _f1(tp, fp, fn)
    return MetricReport(_task_name(task), "entity_f1", f1, len(gold), 0,
                        config_digest({"metric": "entity_f1"}),
                        degenerate=(tp + fp + fn == 0))


def word_f1(gold: Mapping[str, Sequence[str]], pred: Mapping[str, Sequence[str]],
            negative_label: str = "O", task=TaskKind.PICO) -> MetricReport:
    """Micro F1 over positively-labeled tokens; doc token counts must align."""
    if set(gold) != set(pred):
        raise ValueError("gold/pred document ids differ")
    tp = fp = fn = 0
    for doc_id, glabels in gold.items():
        plabels = pred[doc_id]
        if len(glabels) != len(plabels):
            raise ValueError(f"doc {doc_id}: token counts differ "
                             f"({len(glabels)} vs {len(plabels)})")
        for g, p in zip(glabels, plabels):
            if p != negative_label and p == g:
                tp += 1
            elif p != negative_label and p != g:
                fp += 1
                if g != negative_label:
                    fn += 1
            elif p == negative_label and g != negative_label:
                fn += 1
    return MetricReport(_task_name(task), "word_f1", _f1(tp, fp, fn), len(gold), 0,
                        config_digest({"metric": "word_f1", "negative": negative_label}),
                        degenerate=(tp + fp + fn == 0))


def _f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


# -- classification -----------------------------------------------------------

REJECT = None  # prediction decoders hand back None for unparseable outputs


def classification_scores(gold: Sequence[str], pred: Sequence[str | None],
                          label_set: Sequence[str], positive_label: str | None = None,
                          task=TaskKind.PROP_CLASSIFICATION) -> list[MetricReport]:
    """Accuracy, balanced accuracy, and positive-class F1.

    Rejected (None) predictions count as a distinct wrong pseudo-label.
    """
    if len(gold) != len(pred):
        raise ValueError("gold/pred lengths differ")
    if not gold:
        raise ValueError("empty support")
    labels = list(label_set)
    if positive_label is None:
        positive_label = _default_positive(labels)
    rejected = sum(1 for p in pred if p is None)
    support = len(gold)
    matches = sum(1 for g, p in zip(gold, pred) if p == g)
    accuracy = matches / support

    recalls = []
    for cls in labels:
        cls_total = sum(1 for g in gold if g == cls)
        if cls_total == 0:
            continue
        cls_hit = sum(1 for g, p in zip(gold, pred) if g == cls and p == cls)
        recalls.append(cls_hit / cls_total)
    balanced = sum(recalls) / len(recalls) if recalls else 0.0

    tp = sum(1 for g, p in zip(gold, pred) if g == positive_label and p == positive_label)
    fp = sum(1 for g, p in zip(gold, pred) if g != positive_label and p == positive_label)
    fn = sum(1 for g, p in zip(gold, pred) if g == positive_label and p != positive_label)
    digest = config_digest({"metric": "classification", "labels": labels,
                            "positive": positive_label})
    name = _task_name(task)
    return [
        MetricReport(name, "accuracy", accuracy, support, rejected, digest),
        MetricReport(name, "balanced_accuracy", balanced, support, rejected, digest,
                     degenerate=not recalls),
        MetricReport(name, "f1_positive", _f1(tp, fp, fn), support, rejected, digest,
                     degenerate=(tp + fp + fn == 0)),
    ]


def _default_positive(labels: Sequence[str]) -> str:
    for cand in ("yes", "1", "true", "positive"):
        for lab in labels:
            if lab.lower() == cand:
                return lab
    return labels[-1]


# -- regression / correlation --------------------------------------------------


def _impute(gold: Sequence[float], pred: Sequence[float | None]) -> tuple[np.ndarray, np.ndarray, int]:
    g = np.asarray(gold, dtype=np.float64)
    mean = float(g.mean())
    p = np.array([mean if v is None else float(v) for v in pred], dtype=np.float64)
    return g, p, sum(1 for v in pred if v is None)


def pearson(gold: Sequence[float], pred: Sequence[float | None],
            task=TaskKind.SENTENCE_SIMILARITY) -> MetricReport:
    """Sample Pearson correlation; rejects imputed with the gold mean."""
    if len(gold) != len(pred) or len(gold) < 2:
        raise ValueError("need at least two aligned items")
    g, p, rejected = _impute(gold, pred)
    gd = g - g.mean()
    pd = p - p.mean()
    denom = math.sqrt(float(gd @ gd) * float(pd @ pd))
    degenerate = denom == 0.0
    value = 0.0 if degenerate else float(gd @ pd) / denom
    return MetricReport(_task_name(task), "pearson", value, len(gold), rejected,
                        config_digest({"metric": "pearson"}), degenerate=degenerate)


def regression_scores(gold: Sequence[float], pred: Sequence[float | None],
                      task=TaskKind.PROP_REGRESSION) -> list[MetricReport]:
    """R2 and RMSE; rejects imputed with the gold mean and counted."""
    if len(gold) != len(pred) or len(gold) < 2:
        raise ValueError("need at least two aligned items")
    g, p, rejected = _impute(gold, pred)
    resid = g - p
    ss_res = float(resid @ resid)
    centered = g - g.mean()
    ss_tot = float(centered @ centered)
    degenerate = ss_tot == 0.0
    r2 = 0.0 if degenerate else 1.0 - ss_res / ss_tot
    rmse = math.sqrt(ss_res / len(g))
    digest = config_digest({"metric": "regression"})
    name = _task_name(task)
    return [
        MetricReport(name, "r2", r2, len(gold), rejected, digest, degenerate=degenerate),
        MetricReport(name, "rmse", rmse, len(gold), rejected, digest),
    ]


# -- BLEU-2 ---------------------------------------------------------------------

_BLEU_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def bleu_tokenize(text: str) -> list[str]:
    """Lowercase, whitespace split, punctuation detached."""
    return _BLEU_TOKEN_RE.findall(text.lower())


def bleu2(refs: Sequence[str], hyps: Sequence[str], task=TaskKind.QA_OPEN) -> MetricReport:
    """Corpus BLEU with unigram+bigram precision at uniform 1/2 weights.

    Clipped n-gram counts pool across the corpus; the brevity penalty uses
    total lengths. Zero pooled matches give 0.
    """
    if len(refs) != len(hyps):
        raise ValueError("refs/hyps lengths differ")
    if not refs:
        raise ValueError("empty corpus")
    matched = [0, 0]
    totals = [0, 0]
    hyp_len = ref_len = 0
    for ref, hyp in zip(refs, hyps):
        rtok = bleu_tokenize(ref)
        htok = bleu_tokenize(hyp)
        hyp_len += len(htok)
        ref_len += len(rtok)
        for n in (1, 2):
            hcounts = Counter(_ngrams(htok, n))
            rcounts = Counter(_ngrams(rtok, n))
            totals[n - 1] += sum(hcounts.values())
            matched[n - 1] += sum(min(c, rcounts[g]) for g, c in hcounts.items())
    degenerate = False
    if matched[0] == 0 or matched[1] == 0 or totals[1] == 0:
        value = 0.0
        degenerate = totals[1] == 0
    else:
        log_p = 0.5 * math.log(matched[0] / totals[0]) + 0.5 * math.log(matched[1] / totals[1])
        bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / max(hyp_len, 1))
        value = bp * math.exp(log_p)
    return MetricReport(_task_name(task), "bleu2", value, len(refs), 0,
                        config_digest({"metric": "bleu2", "weights": [0.5, 0.5]}),
                        degenerate=degenerate)


def _ngrams(tokens: list[str], n: int) -> Iterable[tuple[str, ...]]:
    return (tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


# -- reaction accuracy ------------------------------------------------------------


def parse_valid(smiles: str) -> Molecule | None:
    """Parse + validate + normalize, or None."""
    try:
        mol = parse_smiles(smiles)
    except SmilesError:
        return None
    if validate(mol):
        return None
    return normalize(mol)


def _safe_canonical(smiles: str) -> str | None:
    mol = parse_valid(smiles)
    return canonical_smiles(mol) if mol is not None else None


def topk_reaction_accuracy(gold: Sequence[str], candidates: Sequence[Sequence[str]],
                           k: int = 1, match: str = "canonical",
                           task=TaskKind.RETROSYNTHESIS) -> MetricReport:
    """Fraction of items whose first k candidates contain the gold answer.

    `match="canonical"` compares canonical forms (fragment order free);
    `match="exact"` compares raw strings. Invalid candidates never match.
    """
    if match not in ("canonical", "exact"):
        raise ValueError("match must be 'canonical' or 'exact'")
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(gold) != len(candidates):
        raise ValueError("gold/candidates lengths differ")
    hits = 0
    rejected = 0
    for ref, cands in zip(gold, candidates):
        window = list(cands[:k])
        if not window:
            rejected += 1
            continue
        if match == "exact":
            hits += ref in window
            continue
        ref_canon = _safe_canonical(ref)
        if ref_canon is None:
            rejected += 1
            continue
        for cand in window:
            if _safe_canonical(cand) == ref_canon:
                hits += 1
                break
    value = hits / len(gold) if gold else 0.0
    return MetricReport(_task_name(task), f"accuracy@top{k}", value, len(gold), rejected,
                        config_digest({"metric": "topk_accuracy", "k": k, "match": match}))


# -- generative suite --------------------------------------------------------------


@dataclass
class GenerationSetStats:
    """All scores for one generated set, mirroring the benchmark columns."""

    n_generated: int
    n_valid: int
    n_unique: int
    valid: float
    unique_at_k: float | None
    k: int
    novelty: float | None
    int_div: float | None
    p: int
    snn: float | None
    frag: float | None
    scaf: float | None
    filters: float | None
    fd_descriptor: float | None
    fcd_substitute: bool = True
    fp_radius: int = 2
    fp_width: int = 2048
    filter_digest: str = ""
    degenerate: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {k: v for k, v in self.__dict__.items()}
        return json.dumps(payload)


def _cosine(a: Counter, b: Counter) -> float:
    if not a and not b:
        return 1.0
    if a == b:
        return 1.0  # exact identity, no float residue
    dot = sum(c * b[k] for k, c in a.items())
    na = math.sqrt(sum(c * c for c in a.values()))
    nb = math.sqrt(sum(c * c for c in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def _sqrtm_trace(sigma_g: np.ndarray, sigma_t: np.ndarray) -> float:
    """trace((sigma_g sigma_t)^(1/2)) via symmetric eigendecompositions."""
    eigvals_g, eigvecs_g = np.linalg.eigh(sigma_g)
    eigvals_g = np.clip(eigvals_g, 0.0, None)
    root_g = eigvecs_g @ np.diag(np.sqrt(eigvals_g)) @ eigvecs_g.T
    inner = root_g @ sigma_t @ root_g
    inner = (inner + inner.T) / 2.0
    eigvals = np.linalg.eigvalsh(inner)
    eigvals = np.clip(eigvals, 0.0, None)
    return float(np.sqrt(eigvals).sum())


def frechet_descriptor_distance(gen_desc: np.ndarray, test_desc: np.ndarray) -> float:
    """||mu_g - mu_t||^2 + tr(S_g + S_t - 2 (S_g S_t)^(1/2)), clamped at 0."""
    mu_g = gen_desc.mean(axis=0)
    mu_t = test_desc.mean(axis=0)
    sigma_g = np.cov(gen_desc, rowvar=False)
    sigma_t = np.cov(test_desc, rowvar=False)
    diff = mu_g - mu_t
    value = float(diff @ diff) + float(np.trace(sigma_g) + np.trace(sigma_t)) \
        - 2.0 * _sqrtm_trace(sigma_g, sigma_t)
    return max(value, 0.0)


def generation_suite(gen: Sequence[str], train: Iterable[str] | None,
                     test: Sequence[str] | None, k: int | None = None, p: int = 1,
                     filter_config: FilterConfig | None = None,
                     fp_radius: int = 2, fp_width: int = 2048) -> GenerationSetStats:
    """Validity, uniqueness, novelty, diversity, and distribution matching.

    `train` feeds novelty, `test` the distributional metrics (SNN, fragment
    and scaffold cosines, descriptor Frechet distance); either may be None,
    nulling the dependent fields.
    """
    if not gen:
        raise ValueError("empty generated set")
    if k is not None and k > len(gen):
        raise ValueError(f"k={k} exceeds generated count {len(gen)}")
    if k is None:
        k = min(10000, len(gen))
    degenerate: list[str] = []

    valid_mols: list[Molecule] = []
    valid_canon: list[str] = []
    for smi in gen:
        mol = parse_valid(smi)
        if mol is None:
            continue
        valid_mols.append(mol)
        valid_canon.append(canonical_smiles(mol))
    n_valid = len(valid_mols)
    n_generated = len(gen)
    valid_fraction = n_valid / n_generated

    first_k = valid_canon[:k]
    if len(first_k) < k:
        degenerate.append("unique_at_k")
    unique_at_k = (len(set(first_k)) / k) if k else None
    n_unique = len(set(valid_canon))

    novelty = None
    if train is not None:
        train_canon = set()
        for smi in train:
            c = _safe_canonical(smi)
            if c is not None:
                train_canon.add(c)
        gen_set = set(valid_canon)
        if gen_set:
            novelty = len(gen_set - train_canon) / len(gen_set)
        else:
            degenerate.append("novelty")

    int_div = None
    snn = None
    if valid_mols:
        fps = [morgan_fingerprint(m, fp_radius, fp_width) for m in valid_mols]
        packed = pack_fingerprints(fps)
        sims = bulk_tanimoto(packed, packed)
        int_div = 1.0 - float((sims ** p).mean()) ** (1.0 / p)
    else:
        degenerate.append("int_div")

    frag = scaf = fd = None
    if test is not None and len(test) > 0:
        test_mols = []
        for smi in test:
            mol = parse_valid(smi)
            if mol is not None:
                test_mols.append(mol)
        if not test_mols:
            degenerate += ["snn", "frag", "scaf", "fd_descriptor"]
        elif valid_mols:
            test_packed = pack_fingerprints(
                [morgan_fingerprint(m, fp_radius, fp_width) for m in test_mols])
            cross = bulk_tanimoto(packed, test_packed)
            snn = float(cross.max(axis=1).mean())
            gen_frags: Counter[str] = Counter()
            for m in valid_mols:
                gen_frags.update(fragment_molecule(m))
            test_frags: Counter[str] = Counter()
            for m in test_mols:
                test_frags.update(fragment_molecule(m))
            frag = _cosine(gen_frags, test_frags)
            gen_scafs = Counter(scaffold_smiles(m) for m in valid_mols)
            test_scafs = Counter(scaffold_smiles(m) for m in test_mols)
            scaf = _cosine(gen_scafs, test_scafs)
            if len(valid_mols) >= 2 and len(test_mols) >= 2:
                fd = frechet_descriptor_distance(
                    np.stack([descriptor_vector(m) for m in valid_mols]),
                    np.stack([descriptor_vector(m) for m in test_mols]))
            else:
                degenerate.append("fd_descriptor")

    filters = None
    cfg = filter_config or FilterConfig()
    if valid_mols:
        passed = sum(1 for m in valid_mols if passes_filters(m, cfg).ok)
        filters = passed / n_valid

    return GenerationSetStats(
        n_generated=n_generated,
        n_valid=n_valid,
        n_unique=n_unique,
        valid=valid_fraction,
        unique_at_k=unique_at_k,
        k=k,
        novelty=novelty,
        int_div=int_div,
        p=p,
        snn=snn,
        frag=frag,
        scaf=scaf,
        filters=filters,
        fd_descriptor=fd,
        fp_radius=fp_radius,
        fp_width=fp_width,
        filter_digest=cfg.blacklist_digest,
        degenerate=degenerate,
    )
