"""Index newline corpora, sample a task mixture, stream token pairs."""

import json
import tempfile
from pathlib import Path

from chemtext import (
    ByteFallbackTextTokenizer, DatasetReader, MixtureComponent, MixtureSpec,
    StreamStats, build_index, build_test_vocabulary, component_probabilities,
    default_templates_path, load_templates, sample_mixture, stream_formatted,
)

workdir = Path(tempfile.mkdtemp())

qa = workdir / "qa.jsonl"
qa.write_text("".join(
    json.dumps({"task": "qa_open", "id": f"q{i}",
                "fields": {"question": f"question {i}", "answer": f"answer {i}"}}) + "\n"
    for i in range(50)))
mol = workdir / "mol.jsonl"
mol.write_text("".join(
    json.dumps({"task": "mol_to_text", "id": f"m{i}",
                "fields": {"smiles": smi, "description": "a small molecule"}}) + "\n"
    for i, smi in enumerate(["CCO", "c1ccccc1", "CC(=O)O"] * 10)))

# Sidecar indices give O(1) random access; the digest pins file identity.
for path in (qa, mol):
    idx = build_index(path)
    print(f"{path.name}: {idx.record_count} records, "
          f"sidecar {path.with_suffix(path.suffix + '.nidx').stat().st_size} bytes")

with DatasetReader(qa) as reader:
    print("random access, record 17:", reader.get_record(17).decode())

spec = MixtureSpec(
    components=[
        MixtureComponent(str(qa), "qa_open", weight=1.0),
        MixtureComponent(str(mol), "mol_to_text", weight=3.0),
    ],
    seed=7,
    temperature=1.0,
)
print("component probabilities:", component_probabilities(spec))
draws = list(sample_mixture(spec, 10, [50, 30]))
print("first draws (component, record):", draws[:5])

# End to end: sample -> format through templates -> tokenize, with a
# bounded prefetch queue keeping tokenization ahead of consumption.
templates = load_templates(default_templates_path())
vocab = build_test_vocabulary(chem_corpus=["CCO", "c1ccccc1", "CC(=O)O"])
tok = ByteFallbackTextTokenizer(vocab)
stats = StreamStats()
for input_ids, target_ids in stream_formatted(spec, templates, vocab, tok,
                                              n=5, stats=stats):
    print(f"  {len(input_ids):>3} input ids -> {len(target_ids)} target ids")
print(f"yielded {stats.yielded}, skipped {stats.skipped}")
