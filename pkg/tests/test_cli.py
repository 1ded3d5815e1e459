"""End-to-end CLI behavior through the console entry point."""

import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "chemtext.cli"]


def run(args, stdin="", check=False):
    proc = subprocess.run(CLI + args, input=stdin, capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"exit {proc.returncode}: {proc.stderr}")
    return proc


def test_canon_matches_across_spellings():
    out = run(["canon"], stdin="OCC\nCCO\n", check=True)
    lines = out.stdout.splitlines()
    assert lines[0] == lines[1]


def test_canon_invalid_line_format_and_exit():
    out = run(["canon"], stdin="C1CC\n")
    assert out.returncode == 0
    assert out.stdout.splitlines()[0] == "INVALID\tunclosed_ring@1"
    assert "1 invalid" in out.stderr


def test_canon_empty_input():
    out = run(["canon"], stdin="", check=True)
    assert out.stdout == ""


def test_canon_ignore_stereo():
    strict = run(["canon"], stdin="N[C@H](C)C(=O)O\nN[C@@H](C)C(=O)O\n", check=True)
    a, b = strict.stdout.splitlines()
    assert a != b
    lenient = run(["canon", "--ignore-stereo"],
                  stdin="N[C@H](C)C(=O)O\nN[C@@H](C)C(=O)O\n", check=True)
    a, b = lenient.stdout.splitlines()
    assert a == b


def test_tokenize_plain_and_wrapped():
    out = run(["tokenize"], stdin="ClCCl\n", check=True)
    assert out.stdout == "Cl C Cl\n"
    out = run(["tokenize", "--wrap"], stdin="ClCCl\n", check=True)
    assert out.stdout == "<sm_Cl> <sm_C> <sm_Cl>\n"


def test_tokenize_lex_error_exit2():
    out = run(["tokenize"], stdin="C@@@\n")
    assert out.returncode == 2
    assert "lex_error@1" in out.stderr


def test_tokenize_lenient():
    out = run(["tokenize", "--lenient"], stdin="C@@@\nCC\n")
    assert out.returncode == 0
    lines = out.stdout.splitlines()
    assert lines[0].startswith("ERROR\t")
    assert lines[1] == "C C"


def test_format_deterministic(tmp_path):
    data = tmp_path / "data.jsonl"
    recs = [
        {"task": "prop_classification", "id": "a", "dataset": "bbbp",
         "fields": {"smiles": "CCO", "label": "1"}},
        {"task": "qa_yesno", "id": "b",
         "fields": {"passage": "p", "question": "q", "label": "Yes"}},
    ]
    data.write_text("".join(json.dumps(r) + "\n" for r in recs))
    from importlib.resources import files
    templates = str(files("chemtext").joinpath("data/templates.txt"))
    one = run(["format", "--data", str(data), "--templates", templates, "--seed", "5"],
              check=True)
    two = run(["format", "--data", str(data), "--templates", templates, "--seed", "5"],
              check=True)
    assert one.stdout == two.stdout
    first = json.loads(one.stdout.splitlines()[0])
    assert first["target"] == "1"
    assert first["input"] == "Can CCO penetrate the BBB?"


def test_format_schema_violation_exit2(tmp_path):
    data = tmp_path / "bad.jsonl"
    data.write_text('{"task": "qa_yesno"}\n')
    from importlib.resources import files
    templates = str(files("chemtext").joinpath("data/templates.txt"))
    out = run(["format", "--data", str(data), "--templates", templates])
    assert out.returncode == 2
    assert ":1:" in out.stderr


def test_format_empty_file(tmp_path):
    data = tmp_path / "empty.jsonl"
    data.write_text("")
    from importlib.resources import files
    templates = str(files("chemtext").joinpath("data/templates.txt"))
    out = run(["format", "--data", str(data), "--templates", templates], check=True)
    assert out.stdout == ""


def test_score_classification_perfect(tmp_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"id": "1", "label": "Yes"}\n{"id": "2", "label": "No"}\n')
    pred = tmp_path / "pred.txt"
    pred.write_text("Yes\nNo\n")
    out = run(["score", "--task", "qa_yesno", "--gold", str(gold),
               "--pred", str(pred)], check=True)
    reports = [json.loads(l) for l in out.stdout.splitlines()]
    assert {r["metric_name"]: r["value"] for r in reports}["accuracy"] == 1.0


def test_score_regression_identity(tmp_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"id": "1", "value": 1.5}\n{"id": "2", "value": -2.0}\n')
    pred = tmp_path / "pred.txt"
    pred.write_text("1.500000\n-2.000000\n")
    out = run(["score", "--task", "prop_regression", "--gold", str(gold),
               "--pred", str(pred)], check=True)
    by_name = {r["metric_name"]: r["value"]
               for r in map(json.loads, out.stdout.splitlines())}
    assert by_name["r2"] == 1.0
    assert by_name["rmse"] == 0.0


def test_score_retro_canonical_vs_exact(tmp_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"id": "1", "smiles": "CCO"}\n')
    pred = tmp_path / "pred.txt"
    pred.write_text("OCC\n")
    canon = run(["score", "--task", "retrosynthesis", "--gold", str(gold),
                 "--pred", str(pred), "--match", "canonical"], check=True)
    assert json.loads(canon.stdout)["value"] == 1.0
    exact = run(["score", "--task", "retrosynthesis", "--gold", str(gold),
                 "--pred", str(pred), "--match", "exact"], check=True)
    assert json.loads(exact.stdout)["value"] == 0.0


def test_score_misaligned_exit2(tmp_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"id": "1", "label": "Yes"}\n')
    pred = tmp_path / "pred.txt"
    pred.write_text("Yes\nNo\n")
    out = run(["score", "--task", "qa_yesno", "--gold", str(gold), "--pred", str(pred)])
    assert out.returncode == 2


def test_score_ner_fixture(tmp_path):
    text = ("Identification of APC2 , a homologue of the adenomatous polyposis "
            "coli tumour suppressor.")
    start = text.index("adenomatous")
    end = text.index(" suppressor")
    gold = tmp_path / "gold.jsonl"
    gold.write_text(json.dumps({"id": "d0", "text": text,
                                "spans": [[start, end, "diso"]]}) + "\n")
    marked = text[:start] + "diso* " + text[start:end] + " *diso" + text[end:]
    pred = tmp_path / "pred.txt"
    pred.write_text(marked + "\n")
    out = run(["score", "--task", "ner", "--gold", str(gold), "--pred", str(pred),
               "--markers", "diso*", "*diso"], check=True)
    assert json.loads(out.stdout)["value"] == 1.0


def test_score_pico_word_f1(tmp_path):
    text = "Study protocol : Rehabilitation in Children with Cancer"
    start = text.index("Rehabilitation")
    end = start + len("Rehabilitation")
    gold = tmp_path / "gold.jsonl"
    gold.write_text(json.dumps({"id": "d0", "text": text,
                                "spans": [[start, end, "I"]]}) + "\n")
    marked = (text[:start] + "Intervention* " + text[start:end]
              + " *Intervention" + text[end:])
    pred = tmp_path / "pred.txt"
    pred.write_text(marked + "\n")
    out = run(["score", "--task", "pico", "--gold", str(gold), "--pred", str(pred),
               "--markers", "Intervention*", "*Intervention"], check=True)
    rep = json.loads(out.stdout)
    assert rep["metric_name"] == "word_f1"
    assert rep["value"] == 1.0


def test_score_bleu_task(tmp_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"id": "1", "text": "a b c d"}\n')
    pred = tmp_path / "pred.txt"
    pred.write_text("a b c\n")
    out = run(["score", "--task", "mol_to_text", "--gold", str(gold),
               "--pred", str(pred)], check=True)
    rep = json.loads(out.stdout)
    assert rep["metric_name"] == "bleu2"
    import math
    assert abs(rep["value"] - math.exp(1 - 4 / 3)) < 1e-9


def test_gen_metrics_identities(tmp_path):
    corpus = "\n".join(["CCO", "c1ccccc1", "CC(=O)Nc1ccccc1", "CCN", "C1CCOC1"]) + "\n"
    for name in ("gen.smi", "train.smi", "test.smi"):
        (tmp_path / name).write_text(corpus)
    out = run(["gen-metrics", "--gen", str(tmp_path / "gen.smi"),
               "--train", str(tmp_path / "train.smi"),
               "--test", str(tmp_path / "test.smi"), "--k", "5"], check=True)
    stats = json.loads(out.stdout)
    assert stats["snn"] == 1.0
    assert stats["fd_descriptor"] <= 1e-6
    assert stats["novelty"] == 0.0
    assert stats["fcd_substitute"] is True


def test_gen_metrics_half_invalid(tmp_path):
    (tmp_path / "gen.smi").write_text("C\nC1CC\n")
    out = run(["gen-metrics", "--gen", str(tmp_path / "gen.smi")], check=True)
    assert json.loads(out.stdout)["valid"] == 0.5


def test_gen_metrics_missing_test_nulls(tmp_path):
    (tmp_path / "gen.smi").write_text("CCO\nCCN\n")
    out = run(["gen-metrics", "--gen", str(tmp_path / "gen.smi")], check=True)
    stats = json.loads(out.stdout)
    assert stats["snn"] is None and stats["frag"] is None
    assert stats["fd_descriptor"] is None


def test_index_and_mix_roundtrip(tmp_path):
    data = tmp_path / "recs.jsonl"
    data.write_text("".join(f'{{"task": "qa_open", "id": "q{i}", '
                            f'"fields": {{"question": "x", "answer": "y"}}}}\n'
                            for i in range(10)))
    run(["index", str(data)], check=True)
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "components": [{"path": str(data), "task": "qa_open", "weight": 1.0}],
        "seed": 7,
    }))
    one = run(["mix", "--spec", str(spec), "--n", "20"], check=True)
    two = run(["mix", "--spec", str(spec), "--n", "20"], check=True)
    assert one.stdout == two.stdout
    assert len(one.stdout.splitlines()) == 20


def test_mix_stale_index_exit3(tmp_path):
    data = tmp_path / "recs.jsonl"
    data.write_text("a\nb\n")
    run(["index", str(data)], check=True)
    data.write_text("a\nX\n")
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "components": [{"path": str(data), "task": "qa_open", "weight": 1.0}],
        "seed": 0,
    }))
    out = run(["mix", "--spec", str(spec), "--n", "1"])
    assert out.returncode == 3


def test_vocab_extend_files(tmp_path):
    base = tmp_path / "base.txt"
    base.write_text("<pad>\n<unk>\n</s>\n<sep>\n")
    corpus = tmp_path / "c.smi"
    corpus.write_text("CCO\n")
    out_vocab = tmp_path / "v.txt"
    out_plan = tmp_path / "p.txt"
    run(["vocab-extend", "--base", str(base), "--corpus", str(corpus),
         "--out-vocab", str(out_vocab), "--out-plan", str(out_plan)], check=True)
    assert out_plan.read_text().splitlines()[0] == "base_size=4"
    assert "<sm_C>" in out_vocab.read_text()


def test_fixtures_command(tmp_path):
    corpus = tmp_path / "c.smi"
    corpus.write_text("CCO\nc1ccccc1\nCC(=O)N\n")
    out = run(["fixtures", "--corpus", str(corpus), "--n", "15"], check=True)
    lines = [json.loads(l) for l in out.stdout.splitlines()]
    assert len(lines) == 15
    assert {l["function"] for l in lines} == {
        "canonical_smiles", "canonical_equal", "tokenize_smiles", "wrap_tokens"}


def test_usage_error_exit1():
    out = run(["score", "--task", "nope", "--gold", "x", "--pred", "y"])
    assert out.returncode == 1


def test_version():
    out = run(["--version"], check=True)
    assert out.stdout.startswith("chemtext 0.1.0")
    assert "bleu2=" in out.stdout
