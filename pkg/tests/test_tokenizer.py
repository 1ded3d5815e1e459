"""Chemical tokenization, vocabularies, and mixed-segment encoding."""

import pytest
from hypothesis import given, settings, strategies as st

from chemtext import SmilesError, parse_smiles, randomize_smiles
from chemtext.tokenizer import (
    ByteFallbackTextTokenizer, ChemToken, Segment, Vocabulary,
    VocabExtensionPlan, build_test_vocabulary, detect_smiles_spans,
    detokenize_mixed, extend_vocabulary, tokenize_mixed, tokenize_smiles,
    unwrap_token, wrap_token,
)

REFERENCE_STRINGS = [
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


def surfaces(s):
    return [t.surface for t in tokenize_smiles(s)]


def test_two_char_precedence():
    assert surfaces("ClCCl") == ["Cl", "C", "Cl"]


def test_bracket_and_precedence_rules():
    assert surfaces("[N+](=O)[O-]") == ["[N+]", "(", "=", "O", ")", "[O-]"]


def test_empty_string():
    assert tokenize_smiles("") == []


def test_percent_closure_token():
    assert surfaces("C%12CC%12") == ["C", "%12", "C", "C", "%12"]


def test_losslessness_on_paper_strings():
    for s in REFERENCE_STRINGS:
        assert "".join(surfaces(s)) == s


def test_losslessness_on_renderings():
    for s in REFERENCE_STRINGS[:8]:
        mol = parse_smiles(s)
        for seed in range(5):
            r = randomize_smiles(mol, seed)
            assert "".join(surfaces(r)) == r


def test_lex_error_cases():
    with pytest.raises(SmilesError) as err:
        tokenize_smiles("C@@@")
    assert err.value.diagnostic.position == 1
    with pytest.raises(SmilesError):
        tokenize_smiles("[NH4")
    with pytest.raises(SmilesError):
        tokenize_smiles("C%1C")


def test_wrap_token_forms():
    assert wrap_token(ChemToken("C")) == "<sm_C>"
    assert wrap_token("[O-]") == "<sm_[O-]>"
    assert wrap_token("(") == "<sm_(>"
    assert unwrap_token("<sm_[O-]>") == "[O-]"
    assert unwrap_token("plain") is None


def test_vocabulary_bijection_and_io(tmp_path):
    vocab = build_test_vocabulary(words=["hello"])
    assert vocab.id("hello") is not None
    assert vocab.token(vocab.id("hello")) == "hello"
    path = tmp_path / "vocab.txt"
    vocab.save(str(path))
    again = Vocabulary.load(str(path))
    assert again.tokens == vocab.tokens
    with pytest.raises(ValueError):
        Vocabulary(["<pad>", "<pad>", "<unk>", "</s>", "<sep>"])


def test_extend_vocabulary_rule():
    base = Vocabulary(list("abcdef") + ["<pad>", "<unk>", "</s>", "<sep>"])
    assert len(base) == 10
    vocab, plan = extend_vocabulary(base, ["CCO", "CCN"])
    # frequency order: C(4) first, then N, O lexicographic at count 1
    assert plan.base_size == 10
    assert plan.added_tokens[0] == "<sm_C>"
    assert sorted(plan.added_tokens[1:]) == ["<sm_N>", "<sm_O>"]
    assert plan.init_source == [0, 1, 2]
    assert [vocab.id(t) for t in plan.added_tokens] == [10, 11, 12]
    assert len(vocab) == len(base) + len(plan.added_tokens)


def test_extend_vocabulary_empty_and_deterministic():
    base = build_test_vocabulary()
    _, plan = extend_vocabulary(base, [])
    assert plan.added_tokens == []
    v1, p1 = extend_vocabulary(base, ["c1ccccc1O", "CC(=O)N"])
    v2, p2 = extend_vocabulary(base, ["c1ccccc1O", "CC(=O)N"])
    assert p1.added_tokens == p2.added_tokens
    assert p1.init_source == p2.init_source
    assert v1.tokens == v2.tokens


def test_extension_plan_wraps_modulo_base(tmp_path):
    base = Vocabulary(["<pad>", "<unk>", "</s>", "<sep>", "x"])
    vocab, plan = extend_vocabulary(base, ["c1ccccc1OCN=[N+]=[N-]%10C%10"])
    assert len(plan.added_tokens) > len(base)
    assert plan.init_source[: len(base)] == list(range(len(base)))
    assert plan.init_source[len(base)] == 0  # wraps
    path = tmp_path / "plan.txt"
    plan.save(str(path))
    again = VocabExtensionPlan.load(str(path))
    assert again == plan


def test_detect_smiles_spans_examples():
    segs = detect_smiles_spans("describe a molecule C(=C(Cl)Cl)(Cl)Cl")
    assert segs[-1] == Segment("smiles", "C(=C(Cl)Cl)(Cl)Cl")
    assert segs[0].kind == "text"
    assert "".join(s.content for s in segs) == "describe a molecule C(=C(Cl)Cl)(Cl)Cl"


def test_detect_single_heavy_atom_guard():
    segs = detect_smiles_spans("I see")
    assert [s.kind for s in segs] == ["text"]
    assert detect_smiles_spans("") == []


def test_detect_never_splits_candidates():
    segs = detect_smiles_spans("reactants: CCO.CC(=O)O please")
    smiles = [s for s in segs if s.kind == "smiles"]
    assert len(smiles) == 1
    assert smiles[0].content == "CCO.CC(=O)O"


def test_tokenize_mixed_and_roundtrip():
    vocab = build_test_vocabulary(words=["describe", "a", "molecule"],
                                  chem_corpus=["C(=C(Cl)Cl)(Cl)Cl"])
    tok = ByteFallbackTextTokenizer(vocab)
    segs = detect_smiles_spans("describe a molecule C(=C(Cl)Cl)(Cl)Cl")
    result = tokenize_mixed(segs, vocab, tok)
    assert result.unknown_count == 0
    assert detokenize_mixed(result.ids, vocab, tok) == "describe a molecule C(=C(Cl)Cl)(Cl)Cl"


def test_tokenize_mixed_composition_order():
    # text ids first, then the id of <sm_C>, in segment order
    vocab = build_test_vocabulary(words=["describe", "a", "molecule"],
                                  chem_corpus=["C"])
    tok = ByteFallbackTextTokenizer(vocab)
    segs = [Segment("text", "describe a molecule "), Segment("smiles", "C")]
    result = tokenize_mixed(segs, vocab, tok)
    text_ids = tok.encode("describe a molecule ")
    assert result.ids == text_ids + [vocab.id("<sm_C>")]


def test_tokenize_mixed_unknown_policy():
    vocab = build_test_vocabulary()  # no chem tokens
    tok = ByteFallbackTextTokenizer(vocab)
    segs = [Segment("smiles", "CCO")]
    result = tokenize_mixed(segs, vocab, tok)
    assert result.unknown_count == 3
    assert result.ids == [vocab.unk_id] * 3
    with pytest.raises(KeyError):
        tokenize_mixed(segs, vocab, tok, on_unknown="error")


def test_smiles_segments_roundtrip_byte_exact():
    corpus = REFERENCE_STRINGS
    vocab = build_test_vocabulary(chem_corpus=corpus)
    tok = ByteFallbackTextTokenizer(vocab)
    for s in corpus:
        text = f"input: {s} ;"
        segs = detect_smiles_spans(text)
        assert any(seg.kind == "smiles" and seg.content == s for seg in segs)
        result = tokenize_mixed(segs, vocab, tok)
        assert result.unknown_count == 0
        assert detokenize_mixed(result.ids, vocab, tok) == text


@given(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FF), max_size=80))
@settings(max_examples=120, deadline=None)
def test_byte_fallback_text_roundtrip(text):
    vocab = build_test_vocabulary(words=["fixed", "words"])
    tok = ByteFallbackTextTokenizer(vocab)
    assert tok.decode(tok.encode(text)) == text


@given(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FF), max_size=60))
@settings(max_examples=120, deadline=None)
def test_detect_spans_reconstruction(text):
    segs = detect_smiles_spans(text)
    assert "".join(s.content for s in segs) == text
