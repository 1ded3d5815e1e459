"""Chemical tokenization, special-symbol wrapping, vocabulary extension."""

from chemtext import (
    build_test_vocabulary, detect_smiles_spans, extend_vocabulary,
    tokenize_smiles, wrap_token,
)
from chemtext.tokenizer import Vocabulary, DEFAULT_SPECIALS

# Lossless greedy tokenization: two-character elements take precedence,
# bracket expressions stay whole.
for s in ("ClCCl", "[N+](=O)[O-]", "c1ccccc1%10CC%10"):
    tokens = [t.surface for t in tokenize_smiles(s)]
    assert "".join(tokens) == s
    print(f"{s:>22} -> {tokens}")

# Each chemical token enters the model vocabulary as a special symbol.
print("wrapped:", [wrap_token(t) for t in tokenize_smiles("ClC[O-]")])

# Vocabulary extension appends wrapped tokens by corpus frequency and plans
# embedding initialization: added row k re-uses base embedding row k.
base = Vocabulary(list(DEFAULT_SPECIALS) + [f"word{i}" for i in range(6)])
corpus = ["CCO", "CCN", "c1ccccc1", "CC(=O)O"]
vocab, plan = extend_vocabulary(base, corpus)
print(f"base {plan.base_size} tokens + {len(plan.added_tokens)} chemical tokens")
for k, (tok, src) in enumerate(zip(plan.added_tokens, plan.init_source)):
    print(f"  id {plan.base_size + k}: {tok:>10} initialized from base row {src}")

# Free text is segmented so SMILES spans tokenize chemically and prose
# tokenizes with the (pluggable) text tokenizer.
segments = detect_smiles_spans("describe a molecule C(=C(Cl)Cl)(Cl)Cl")
for seg in segments:
    print(f"  [{seg.kind}] {seg.content!r}")
