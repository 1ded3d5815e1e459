"""Score a generated molecule set the way the benchmarks do."""

import random

from chemtext import corpus_path, generation_suite, parse_smiles, randomize_smiles

with open(corpus_path(), encoding="utf-8") as fh:
    corpus = [line.strip() for line in fh if line.strip()]

rng = random.Random(0)
train = corpus[:600]
test = corpus[600:800]

# Play the role of a generator: re-render some training molecules (not
# novel), take some test molecules (novel w.r.t. train), and emit a few
# syntactically broken strings.
generated = [randomize_smiles(parse_smiles(s), rng.randrange(10**6))
             for s in rng.sample(train, 120)]
generated += rng.sample(test, 60)
generated += ["C1CC", "not a molecule", "c1ccccc1("]

stats = generation_suite(generated, train=train, test=test, k=100)
print(f"generated {stats.n_generated}, valid {stats.n_valid} "
      f"({stats.valid:.1%}), distinct {stats.n_unique}")
print(f"unique@{stats.k}: {stats.unique_at_k:.3f}")
print(f"novelty:      {stats.novelty:.3f}")
print(f"int div (p={stats.p}): {stats.int_div:.3f}")
print(f"snn to test:  {stats.snn:.3f}")
print(f"fragment cos: {stats.frag:.4f}")
print(f"scaffold cos: {stats.scaf:.4f}")
print(f"filters pass: {stats.filters:.1%}")
print(f"descriptor-space frechet distance: {stats.fd_descriptor:.3f} "
      f"(fcd_substitute={stats.fcd_substitute})")
