"""Command-line surface for batch pipelines.

Subcommands: canon, tokenize, format, score, gen-metrics, index, mix,
vocab-extend, fixtures. All commands are pipe-safe and deterministic given
flags and seed; stdout stays machine-parseable, stderr carries counters.
Exit codes: 0 success, 1 usage error, 2 input/parse failure, 3 digest or
index mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .canonical import canonical_smiles, randomize_smiles
from .dataio import (
    DatasetReader, DigestMismatch, IndexError_, MixtureSpec,
    build_index, parse_instance_record, sample_mixture,
)
from .kekulize import validate
from .metrics import (
    bleu2, classification_scores, config_digest, entity_f1, generation_suite,
    pearson, regression_scores, topk_reaction_accuracy, word_f1,
)
from .molgraph import SmilesError
from .patterns import FilterConfig, load_pattern_file
from .prompts import (
    PromptError, TaskKind, decode_spans, extract_smiles, format_instance,
    load_templates, parse_label, parse_numeric, select_template,
)
from .smiles_parser import parse_smiles
from .tokenizer import tokenize_smiles, Vocabulary, extend_vocabulary

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_DIGEST = 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exits 2; we use 1
        raise UsageError(message)


# -- subcommands ---------------------------------------------------------------


def cmd_canon(args) -> int:
    invalid = 0
    for line in sys.stdin:
        smi = line.rstrip("\n")
        try:
            mol = parse_smiles(smi)
            diags = validate(mol)
            if diags:
                print(f"INVALID\t{diags[0].short}")
                invalid += 1
                continue
            print(canonical_smiles(mol, ignore_stereo=args.ignore_stereo))
        except SmilesError as err:
            print(f"INVALID\t{err.diagnostic.short}")
            invalid += 1
    if invalid:
        print(f"{invalid} invalid line(s)", file=sys.stderr)
    return EXIT_OK


def cmd_tokenize(args) -> int:
    for line in sys.stdin:
        smi = line.rstrip("\n")
        try:
            tokens = tokenize_smiles(smi)
        except SmilesError as err:
            if args.lenient:
                print(f"ERROR\t{err.diagnostic.short}")
                continue
            print(str(err.diagnostic), file=sys.stderr)
            return EXIT_INPUT
        if args.wrap:
            print(" ".join(t.wrapped for t in tokens))
        else:
            print(" ".join(t.surface for t in tokens))
    return EXIT_OK


def cmd_format(args) -> int:
    templates = load_templates(args.templates)
    with open(args.data, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                inst = parse_instance_record(line)
                tmpl = select_template(templates, inst.task, inst.instance_id,
                                       args.seed, dataset=inst.dataset)
                pair = format_instance(inst, tmpl)
            except (ValueError, PromptError, KeyError) as err:
                raise InputError(f"{args.data}:{lineno}: {err}") from err
            print(json.dumps({
                "input": pair.input,
                "target": pair.target,
                "template_id": pair.template_id,
                "instance_id": pair.instance_id,
            }))
    return EXIT_OK


def _load_gold(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as err:
                raise InputError(f"{path}:{lineno}: bad JSON: {err}") from err
    return records


def _load_pred_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


CLASSIFICATION_TASKS = {
    TaskKind.ENTAILMENT, TaskKind.RELATION_EXTRACTION, TaskKind.DOC_CLASSIFICATION,
    TaskKind.QA_YESNO, TaskKind.QA_MULTICHOICE, TaskKind.PROP_CLASSIFICATION,
}
REACTION_TASKS = {
    TaskKind.FORWARD_REACTION, TaskKind.REAGENT_PREDICTION, TaskKind.RETROSYNTHESIS,
}
BLEU_TASKS = {TaskKind.QA_OPEN, TaskKind.MOL_TO_TEXT, TaskKind.TEXT_TO_MOL}


def cmd_score(args) -> int:
    task = TaskKind(args.task)
    gold = _load_gold(args.gold)
    preds = _load_pred_lines(args.pred)
    if len(gold) != len(preds):
        raise InputError(f"gold has {len(gold)} records, pred has {len(preds)} lines")
    reports = []
    if task in CLASSIFICATION_TASKS:
        gold_labels = [str(r["label"]) for r in gold]
        label_set = args.labels.split(",") if args.labels else sorted(set(gold_labels))
        decoded = [parse_label(p, task, label_set) for p in preds]
        reports = classification_scores(gold_labels, decoded, label_set,
                                        positive_label=args.positive_label, task=task)
    elif task in (TaskKind.PROP_REGRESSION, TaskKind.SENTENCE_SIMILARITY):
        gold_values = [float(r["value"]) for r in gold]
        decoded_nums = [parse_numeric(p) for p in preds]
        if task == TaskKind.SENTENCE_SIMILARITY:
            reports = [pearson(gold_values, decoded_nums, task=task)]
        else:
            reports = regression_scores(gold_values, decoded_nums, task=task)
    elif task in BLEU_TASKS:
        refs = [str(r.get("text", r.get("target", r.get("smiles", "")))) for r in gold]
        reports = [bleu2(refs, preds, task=task)]
    elif task in REACTION_TASKS:
        refs = [str(r["smiles"]) for r in gold]
        candidates = []
        for p in preds:
            cands = [extract_smiles(c) or c for c in p.split("\t") if c.strip()]
            candidates.append(cands)
        reports = [topk_reaction_accuracy(refs, candidates, k=args.k,
                                          match=args.match, task=task)]
    elif task == TaskKind.NER:
        if not args.markers:
            raise UsageError("--markers OPEN CLOSE is required for ner scoring")
        markers = (args.markers[0], args.markers[1])
        gold_spans = {}
        pred_spans = {}
        warn = 0
        for rec, pred in zip(gold, preds):
            doc_id = str(rec["id"])
            gold_spans[doc_id] = [tuple(s) for s in rec["spans"]]
            spans, w = decode_spans(pred, rec["text"], markers)
            warn += w
            entity = gold_spans[doc_id][0][2] if gold_spans[doc_id] else "entity"
            pred_spans[doc_id] = [(s, e, entity) for s, e in spans]
        if warn:
            print(f"{warn} span decode warning(s)", file=sys.stderr)
        reports = [entity_f1(gold_spans, pred_spans, task=task)]
    elif task == TaskKind.PICO:
        if not args.markers:
            raise UsageError("--markers OPEN CLOSE is required for pico scoring")
        markers = (args.markers[0], args.markers[1])
        gold_tokens = {}
        pred_tokens = {}
        for rec, pred in zip(gold, preds):
            doc_id = str(rec["id"])
            text = rec["text"]
            tokens = text.split()
            labels = ["O"] * len(tokens)
            offsets = _token_spans(text)
            for s, e, *label in rec["spans"]:
                tag = label[0] if label else "I"
                for k, (ts, te) in enumerate(offsets):
                    if ts >= s and te <= e:
                        labels[k] = tag
            gold_tokens[doc_id] = labels
            spans, _ = decode_spans(pred, text, markers)
            plabels = ["O"] * len(tokens)
            for s, e in spans:
                for k, (ts, te) in enumerate(offsets):
                    if ts >= s and te <= e:
                        plabels[k] = gold_tokens[doc_id][k] if gold_tokens[doc_id][k] != "O" else "I"
            pred_tokens[doc_id] = plabels
        reports = [word_f1(gold_tokens, pred_tokens, task=task)]
    else:
        raise UsageError(f"task {task.value} is scored by gen-metrics, not score")
    for rep in reports:
        print(rep.to_json())
    return EXIT_OK


def _token_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    pos = 0
    for tok in text.split():
        start = text.index(tok, pos)
        spans.append((start, start + len(tok)))
        pos = start + len(tok)
    return spans


def cmd_gen_metrics(args) -> int:
    gen = [l for l in _load_pred_lines(args.gen) if l.strip()]
    if not gen:
        raise InputError(f"{args.gen}: no generated molecules")
    train = None
    if args.train:
        train = [l for l in _load_pred_lines(args.train) if l.strip()]
    test = None
    if args.test:
        test = [l for l in _load_pred_lines(args.test) if l.strip()]
        if not test:
            raise InputError(f"{args.test}: empty test set with distributional "
                             "metrics requested")
    cfg = FilterConfig()
    if args.filters:
        patterns, digest = load_pattern_file(args.filters)
        cfg = FilterConfig(pattern_blacklist=patterns, blacklist_digest=digest)
    stats = generation_suite(gen, train, test, k=args.k, p=args.p, filter_config=cfg,
                             fp_radius=args.fp_radius, fp_width=args.fp_width)
    print(stats.to_json())
    return EXIT_OK


def cmd_index(args) -> int:
    for path in args.files:
        idx = build_index(path)
        print(f"{path}\t{idx.record_count} records", file=sys.stderr)
    return EXIT_OK


def cmd_mix(args) -> int:
    spec = MixtureSpec.load(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
    readers = [DatasetReader(c.path) for c in spec.components]
    try:
        out = sys.stdout.buffer
        for ci, ri in sample_mixture(spec, args.n, [len(r) for r in readers]):
            out.write(readers[ci].get_record(ri))
            out.write(b"\n")
        out.flush()
    finally:
        for r in readers:
            r.close()
    return EXIT_OK


def cmd_vocab_extend(args) -> int:
    base = Vocabulary.load(args.base)
    with open(args.corpus, encoding="utf-8") as fh:
        corpus = [line.strip() for line in fh if line.strip()]
    vocab, plan = extend_vocabulary(base, corpus)
    vocab.save(args.out_vocab)
    plan.save(args.out_plan)
    print(f"base {plan.base_size} + added {len(plan.added_tokens)} "
          f"-> {len(vocab)} tokens", file=sys.stderr)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    """Parity-fixture triples for foreign-language bindings."""
    corpus = [l for l in _load_pred_lines(args.corpus) if l.strip()]
    rng_seed = args.seed
    count = 0
    out = sys.stdout
    for i, smi in enumerate(corpus):
        try:
            mol = parse_smiles(smi)
            if validate(mol):
                continue
            canon = canonical_smiles(mol)
        except SmilesError:
            continue
        print(json.dumps({"function": "canonical_smiles", "input": smi,
                          "expected": canon}), file=out)
        rendering = randomize_smiles(mol, rng_seed + i)
        print(json.dumps({"function": "canonical_smiles", "input": rendering,
                          "expected": canon}), file=out)
        print(json.dumps({"function": "canonical_equal",
                          "input": [smi, rendering], "expected": True}), file=out)
        tokens = [t.surface for t in tokenize_smiles(smi)]
        print(json.dumps({"function": "tokenize_smiles", "input": smi,
                          "expected": tokens}), file=out)
        print(json.dumps({"function": "wrap_tokens", "input": smi,
                          "expected": [f"<sm_{t}>" for t in tokens]}), file=out)
        count += 5
        if count >= args.n:
            break
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="chemtext", description=__doc__)
    parser.add_argument("--version", action="store_true",
                        help="print version and metric config digests")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("canon", help="canonicalize SMILES from stdin")
    p.add_argument("--ignore-stereo", action="store_true")
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("tokenize", help="tokenize SMILES from stdin")
    p.add_argument("--wrap", action="store_true")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("format", help="render instances into text pairs")
    p.add_argument("--data", required=True)
    p.add_argument("--templates", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_format)

    p = sub.add_parser("score", help="score predictions against gold")
    p.add_argument("--task", required=True, choices=[t.value for t in TaskKind])
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--match", choices=["exact", "canonical"], default="canonical")
    p.add_argument("--labels", default="")
    p.add_argument("--positive-label", default=None)
    p.add_argument("--markers", nargs=2, default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("gen-metrics", help="generative-model metric suite")
    p.add_argument("--gen", required=True)
    p.add_argument("--train", default="")
    p.add_argument("--test", default="")
    p.add_argument("--filters", default="")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--fp-radius", type=int, default=2)
    p.add_argument("--fp-width", type=int, default=2048)
    p.set_defaults(func=cmd_gen_metrics)

    p = sub.add_parser("index", help="build sidecar indices")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("mix", help="stream a seeded mixture of records")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("vocab-extend", help="extend a vocabulary from a SMILES corpus")
    p.add_argument("--base", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-vocab", required=True)
    p.add_argument("--out-plan", required=True)
    p.set_defaults(func=cmd_vocab_extend)

    p = sub.add_parser("fixtures", help="emit parity-fixture triples for bindings")
    p.add_argument("--corpus", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixtures)

    return parser


def _print_version() -> None:
    digests = {
        "bleu2": config_digest({"metric": "bleu2", "weights": [0.5, 0.5]}),
        "classification": config_digest({"metric": "classification"}),
        "fingerprint": config_digest({"radius": 2, "width": 2048,
                                      "seed": "splitmix64/9E3779B97F4A7C15"}),
    }
    print(f"chemtext {__version__} " +
          " ".join(f"{k}={v}" for k, v in sorted(digests.items())))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.version:
            _print_version()
            return EXIT_OK
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (DigestMismatch,) as err:
        print(f"digest mismatch: {err}", file=sys.stderr)
        return EXIT_DIGEST
    except IndexError_ as err:
        print(f"index error: {err}", file=sys.stderr)
        return EXIT_DIGEST
    except BrokenPipeError:
        # downstream closed the pipe (e.g. | head); exit quietly
        try:
            sys.stdout.close()
        except OSError:
            pass
        return EXIT_OK
    except (InputError, OSError, json.JSONDecodeError, PromptError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except SmilesError as err:
        print(f"error: {err.diagnostic}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
