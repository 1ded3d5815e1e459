"""chemtext: the non-neural machinery of a text+chemistry model pipeline.

Library surface: SMILES parsing/validation/canonicalization, chemical
tokenization and vocabulary extension, prompt formatting and output
decoding, the full evaluation metric suite, and memory-mapped multi-task
dataset mixing. See the demos/ directory for narrative walkthroughs and
README.md for the CLI.
"""

from .molgraph import (
    AROMATIC, DOUBLE, SINGLE, TRIPLE,
    Atom, Bond, Molecule, ParseDiagnostic, SmilesError,
)
from .smiles_parser import parse_smiles
from .kekulize import kekulize, normalize, rearomatize, validate
from .canonical import (
    canonical_equal, canonical_ranks, canonical_smiles, randomize_smiles,
    write_smiles,
)
from .descriptors import (
    Fingerprint, descriptor_vector, fragment_molecule, morgan_fingerprint,
    murcko_scaffold, scaffold_smiles, tanimoto,
)
from .patterns import (
    FilterConfig, FilterResult, PatternGraph, load_pattern_file, match_count,
    parse_pattern, passes_filters,
)
from .tokenizer import (
    ChemToken, Segment, Vocabulary, VocabExtensionPlan,
    ByteFallbackTextTokenizer, build_test_vocabulary, detect_smiles_spans,
    detokenize_mixed, extend_vocabulary, tokenize_mixed, tokenize_smiles,
    unwrap_token, wrap_token,
)
from .prompts import (
    FormattedPair, PromptError, PromptTemplate, TaskInstance, TaskKind,
    decode_spans, encode_spans, extract_smiles, format_instance,
    load_templates, parse_label, parse_numeric, select_template,
)
from .metrics import (
    GenerationSetStats, MetricReport, bleu2, classification_scores,
    entity_f1, generation_suite, parse_valid, pearson, regression_scores,
    topk_reaction_accuracy, word_f1,
)
from .dataio import (
    DatasetIndex, DatasetReader, DigestMismatch, MixtureComponent,
    MixtureSpec, StreamStats, build_index, component_probabilities,
    parse_instance_record, sample_mixture, stream_formatted,
)

__version__ = "0.1.0"


def corpus_path() -> str:
    """Path of the bundled 1k-SMILES corpus."""
    from importlib.resources import files
    return str(files("chemtext").joinpath("data/corpus_1k.smi"))


def default_templates_path() -> str:
    """Path of the bundled prompt-template file."""
    from importlib.resources import files
    return str(files("chemtext").joinpath("data/templates.txt"))
