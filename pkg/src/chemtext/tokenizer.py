"""Chemical tokenization, special-symbol wrapping, and vocabularies.

SMILES strings are split losslessly into chemical tokens which are wrapped
as special symbols of the form `<sm_{token}>` before entering a sequence
model's vocabulary. Vocabulary extension appends the wrapped tokens seen in
a corpus and emits an embedding-initialization plan: added token k re-uses
the embedding of base-vocabulary row k (wrapping modulo the base size).
This toolkit never holds embedding matrices; the plan is data for a
downstream trainer.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from .molgraph import ParseDiagnostic, SmilesError
from .smiles_parser import parse_smiles

# Single characters legal outside bracket expressions.
SMILES_ALPHABET = frozenset("BCNOPSFIbcnops0123456789()=#-:./\\")
_TWO_CHAR = ("Cl", "Br")

WRAP_PREFIX = "<sm_"
WRAP_SUFFIX = ">"
_WRAPPED_RE = re.compile(r"^<sm_(.+)>$", re.DOTALL)


@dataclass(frozen=True)
class ChemToken:
    surface: str

    @property
    def wrapped(self) -> str:
        return f"{WRAP_PREFIX}{self.surface}{WRAP_SUFFIX}"


def tokenize_smiles(s: str) -> list[ChemToken]:
    """Greedy longest-match tokenization; lossless by construction.

    Precedence: bracket expressions, `%nn` closures, two-character element
    symbols, then single characters of the SMILES alphabet. Raises
    SmilesError (lex_error) on anything else.
    """
    tokens: list[ChemToken] = []
    i = 0
    n = len(s)
    while i < n:
        ch = s[i]
        if ch == "[":
            end = s.find("]", i + 1)
            if end == -1:
                raise SmilesError(ParseDiagnostic(
                    "lex_error", i, "unterminated bracket expression"))
            tokens.append(ChemToken(s[i : end + 1]))
            i = end + 1
        elif ch == "%":
            if i + 2 >= n or not (s[i + 1].isdigit() and s[i + 2].isdigit()):
                raise SmilesError(ParseDiagnostic(
                    "lex_error", i, "% ring closure needs two digits"))
            tokens.append(ChemToken(s[i : i + 3]))
            i += 3
        elif s[i : i + 2] in _TWO_CHAR:
            tokens.append(ChemToken(s[i : i + 2]))
            i += 2
        elif ch in SMILES_ALPHABET:
            tokens.append(ChemToken(ch))
            i += 1
        else:
            raise SmilesError(ParseDiagnostic(
                "lex_error", i, f"character {ch!r} outside the SMILES alphabet"))
    return tokens


def wrap_token(token: ChemToken | str) -> str:
    surface = token.surface if isinstance(token, ChemToken) else token
    return f"{WRAP_PREFIX}{surface}{WRAP_SUFFIX}"


def unwrap_token(wrapped: str) -> str | None:
    m = _WRAPPED_RE.match(wrapped)
    return m.group(1) if m else None


DEFAULT_SPECIALS = ("<pad>", "<unk>", "</s>", "<sep>")


class Vocabulary:
    """Bijective token<->id table with a set of special tokens.

    The file format is one token per line; the line number is the id.
    """

    def __init__(self, tokens: list[str], specials: Iterable[str] = DEFAULT_SPECIALS):
        self.tokens = list(tokens)
        self.token_to_id: dict[str, int] = {}
        for i, tok in enumerate(self.tokens):
            if tok in self.token_to_id:
                raise ValueError(f"duplicate token {tok!r} at ids {self.token_to_id[tok]} and {i}")
            self.token_to_id[tok] = i
        self.specials = tuple(specials)
        for sp in self.specials:
            if sp not in self.token_to_id:
                raise ValueError(f"special token {sp!r} missing from vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def id(self, token: str) -> int | None:
        return self.token_to_id.get(token)

    def token(self, idx: int) -> str:
        return self.tokens[idx]

    @property
    def unk_id(self) -> int:
        return self.token_to_id["<unk>"]

    @property
    def pad_id(self) -> int:
        return self.token_to_id["<pad>"]

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for tok in self.tokens:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path: str, specials: Iterable[str] = DEFAULT_SPECIALS) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh]
        while tokens and tokens[-1] == "":
            tokens.pop()
        return cls(tokens, specials)


@dataclass
class VocabExtensionPlan:
    """Which embeddings a trainer should copy into the added rows.

    Added ids run base_size..base_size+len(added_tokens)-1; the k-th added
    token re-uses the embedding at base row `init_source[k]` (= k modulo the
    base size).
    """

    base_size: int
    added_tokens: list[str] = field(default_factory=list)
    init_source: list[int] = field(default_factory=list)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"base_size={self.base_size}\n")
            for tok, src in zip(self.added_tokens, self.init_source):
                fh.write(f"{tok}\t{src}\n")

    @classmethod
    def load(cls, path: str) -> "VocabExtensionPlan":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            if not header.startswith("base_size="):
                raise ValueError(f"{path}: missing base_size header")
            base_size = int(header.split("=", 1)[1])
            added, sources = [], []
            for line in fh:
                if not line.strip():
                    continue
                tok, src = line.rstrip("\n").split("\t")
                added.append(tok)
                sources.append(int(src))
        return cls(base_size, added, sources)


def extend_vocabulary(base: Vocabulary,
                      corpus: Iterable[str]) -> tuple[Vocabulary, VocabExtensionPlan]:
    """Append the wrapped chemical tokens observed in `corpus` to `base`.

    New tokens are ordered by descending corpus frequency with lexicographic
    tie-breaks, making re-runs deterministic.
    """
    counts: Counter[str] = Counter()
    for smiles in corpus:
        for token in tokenize_smiles(smiles):
            counts[token.wrapped] += 1
    added = [tok for tok, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
             if tok not in base]
    base_size = len(base)
    plan = VocabExtensionPlan(
        base_size=base_size,
        added_tokens=added,
        init_source=[k % base_size for k in range(len(added))],
    )
    vocab = Vocabulary(base.tokens + added, base.specials)
    return vocab, plan


@dataclass(frozen=True)
class Segment:
    kind: str  # "text" | "smiles"
    content: str


def detect_smiles_spans(text: str) -> list[Segment]:
    """Split free text into text and SMILES segments.

    A maximal whitespace-delimited substring is a SMILES segment when it
    lexes, parses, and either has at least two heavy atoms or contains a
    bracket/ring/branch character. Candidates are never split internally.
    """
    if text == "":
        return []
    segments: list[Segment] = []
    buffer: list[str] = []

    def flush() -> None:
        if buffer:
            segments.append(Segment("text", "".join(buffer)))
            buffer.clear()

    for piece in re.split(r"(\s+)", text):
        if piece == "":
            continue
        if piece.isspace():
            buffer.append(piece)
            continue
        if _is_smiles_candidate(piece):
            flush()
            segments.append(Segment("smiles", piece))
        else:
            buffer.append(piece)
    flush()
    return segments


def _is_smiles_candidate(piece: str) -> bool:
    try:
        tokenize_smiles(piece)
        mol = parse_smiles(piece)
    except SmilesError:
        return False
    if mol.heavy_atom_count() >= 2:
        return True
    return any(c in "[]()%0123456789" for c in piece)


class TextTokenizer(Protocol):
    """The pluggable natural-language tokenizer interface."""

    def encode(self, text: str) -> list[int]: ...
    def decode(self, ids: list[int]) -> str: ...


_BYTE_TOKEN_RE = re.compile(r"^<0x([0-9A-F]{2})>$")


class ByteFallbackTextTokenizer:
    """Whitespace word tokenizer with UTF-8 byte fallback; a test double
    standing in for a real subword vocabulary.

    Words found in the vocabulary map to their ids; everything else,
    including whitespace runs, is emitted as `<0xNN>` byte tokens, so the
    encode/decode roundtrip is lossless for any text.
    """

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        missing = [f"<0x{b:02X}>" for b in range(256) if f"<0x{b:02X}>" not in vocab]
        if missing:
            raise ValueError(f"vocabulary lacks {len(missing)} byte tokens (e.g. {missing[0]})")

    def encode(self, text: str) -> list[int]:
        ids: list[int] = []
        for piece in re.split(r"(\s+)", text):
            if piece == "":
                continue
            wid = self.vocab.id(piece) if not piece.isspace() else None
            if wid is not None:
                ids.append(wid)
            else:
                for b in piece.encode("utf-8"):
                    ids.append(self.vocab.token_to_id[f"<0x{b:02X}>"])
        return ids

    def decode(self, ids: list[int]) -> str:
        out: list[str] = []
        pending: bytearray = bytearray()

        def flush_bytes() -> None:
            if pending:
                out.append(pending.decode("utf-8"))
                pending.clear()

        for idx in ids:
            tok = self.vocab.token(idx)
            m = _BYTE_TOKEN_RE.match(tok)
            if m:
                pending.append(int(m.group(1), 16))
            else:
                flush_bytes()
                out.append(tok)
        flush_bytes()
        return "".join(out)


def build_test_vocabulary(words: Iterable[str] = (),
                          chem_corpus: Iterable[str] = ()) -> Vocabulary:
    """Specials + byte tokens + words (+ chem tokens), for tests and demos."""
    tokens = list(DEFAULT_SPECIALS)
    tokens += [f"<0x{b:02X}>" for b in range(256)]
    for w in words:
        if w not in tokens:
            tokens.append(w)
    vocab = Vocabulary(tokens)
    if chem_corpus:
        vocab, _ = extend_vocabulary(vocab, chem_corpus)
    return vocab


@dataclass
class TokenizedResult:
    ids: list[int]
    unknown_count: int = 0


def tokenize_mixed(segments: list[Segment], vocab: Vocabulary,
                   text_tokenizer: TextTokenizer,
                   on_unknown: str = "substitute") -> TokenizedResult:
    """Tokenize mixed text/SMILES segments into one id sequence.

    Text segments delegate to the text tokenizer; SMILES segments go through
    chemical tokenization, wrapping, and vocabulary lookup. Unknown wrapped
    tokens map to the unknown id (counted) or raise, per `on_unknown`.
    """
    if on_unknown not in ("substitute", "error"):
        raise ValueError("on_unknown must be 'substitute' or 'error'")
    ids: list[int] = []
    unknown = 0
    for seg in segments:
        if seg.kind == "text":
            ids.extend(text_tokenizer.encode(seg.content))
            continue
        for token in tokenize_smiles(seg.content):
            tid = vocab.id(token.wrapped)
            if tid is None:
                if on_unknown == "error":
                    raise KeyError(f"chem token {token.wrapped!r} not in vocabulary")
                unknown += 1
                tid = vocab.unk_id
            ids.append(tid)
    return TokenizedResult(ids, unknown)


def detokenize_mixed(ids: list[int], vocab: Vocabulary,
                     text_tokenizer: TextTokenizer) -> str:
    """Invert tokenize_mixed: wrapped chem tokens unwrap byte-exactly, text
    runs round-trip through the text tokenizer."""
    out: list[str] = []
    text_run: list[int] = []

    def flush_text() -> None:
        if text_run:
            out.append(text_tokenizer.decode(list(text_run)))
            text_run.clear()

    for idx in ids:
        surface = unwrap_token(vocab.token(idx))
        if surface is not None:
            flush_text()
            out.append(surface)
        else:
            text_run.append(idx)
    flush_text()
    return "".join(out)
