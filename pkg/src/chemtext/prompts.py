"""Prompt rendering and model-output decoding for every task family.

Dataset instances render into (input, target) text pairs through templates;
model outputs decode back into labels, numbers, spans, or SMILES. Rendering
is deterministic given (template, instance); when a task has several
templates, selection is a seeded hash so corpora reproduce byte-for-byte.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .molgraph import SmilesError
from .tokenizer import detect_smiles_spans, tokenize_smiles


class TaskKind(str, Enum):
    NER = "ner"
    PICO = "pico"
    ENTAILMENT = "entailment"
    RELATION_EXTRACTION = "relation_extraction"
    SENTENCE_SIMILARITY = "sentence_similarity"
    DOC_CLASSIFICATION = "doc_classification"
    QA_YESNO = "qa_yesno"
    QA_MULTICHOICE = "qa_multichoice"
    QA_OPEN = "qa_open"
    PROP_CLASSIFICATION = "prop_classification"
    PROP_REGRESSION = "prop_regression"
    MOL_GENERATION = "mol_generation"
    FORWARD_REACTION = "forward_reaction"
    REAGENT_PREDICTION = "reagent_prediction"
    RETROSYNTHESIS = "retrosynthesis"
    MOL_TO_TEXT = "mol_to_text"
    TEXT_TO_MOL = "text_to_mol"


SPAN_TASKS = (TaskKind.NER, TaskKind.PICO)


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    task: TaskKind
    pattern: str
    target_pattern: str
    markers: tuple[str, str] | None = None
    template_id: str = ""
    dataset: str = ""  # empty = usable for any dataset of the task

    def __post_init__(self) -> None:
        if self.task in SPAN_TASKS and self.markers is None:
            raise PromptError(f"{self.task.value} template needs a marker pair")


@dataclass
class TaskInstance:
    task: TaskKind
    fields: dict[str, Any]
    instance_id: str = ""
    dataset: str = ""


@dataclass(frozen=True)
class FormattedPair:
    input: str
    target: str
    template_id: str = ""
    instance_id: str = ""


CHOICE_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _serialize(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if not math.isfinite(value):
            raise PromptError(f"non-finite numeric field value {value!r}")
        return f"{value:.6f}"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    raise PromptError(f"cannot render field value of type {type(value).__name__}")


class _SlotMap(dict):
    def __missing__(self, key: str) -> str:
        raise PromptError(f"missing slot {key!r}")


def _render_slots(pattern: str, slots: dict[str, str]) -> str:
    try:
        return pattern.format_map(_SlotMap(slots))
    except PromptError:
        raise
    except (KeyError, IndexError, ValueError) as err:
        raise PromptError(f"bad template pattern: {err}") from err


def format_instance(inst: TaskInstance, tmpl: PromptTemplate) -> FormattedPair:
    """Render one instance through one template.

    Regression values serialize with exactly six decimals; multi-choice
    answers render as "The final answer is (X)."; span tasks mark the text
    via encode_spans.
    """
    if inst.task != tmpl.task:
        raise PromptError(f"template task {tmpl.task.value} != instance task {inst.task.value}")
    slots: dict[str, str] = {}
    for name, value in inst.fields.items():
        if name == "spans":
            continue
        if name == "choices":
            items = [f"({CHOICE_LETTERS[k]}) {v}" for k, v in enumerate(value)]
            slots["choices"] = "\n\n".join(items)
        else:
            slots[name] = _serialize(value)
    if inst.task in SPAN_TASKS:
        spans = [(s, e) for s, e, *_ in inst.fields.get("spans", [])]
        assert tmpl.markers is not None
        slots["marked_text"] = encode_spans(slots["text"], spans, tmpl.markers)
    return FormattedPair(
        input=_render_slots(tmpl.pattern, slots),
        target=_render_slots(tmpl.target_pattern, slots),
        template_id=tmpl.template_id,
        instance_id=inst.instance_id,
    )


def select_template(templates: list[PromptTemplate], task: TaskKind,
                    instance_id: str, seed: int,
                    dataset: str = "") -> PromptTemplate:
    """Seeded deterministic choice among a task's (or dataset's) templates.

    Dataset-specific templates take priority; task-wide templates (no
    dataset) are the fallback pool.
    """
    if dataset:
        pool = [t for t in templates if t.task == task and t.dataset == dataset]
        if not pool:
            pool = [t for t in templates if t.task == task and not t.dataset]
    else:
        pool = [t for t in templates if t.task == task]
    if not pool:
        raise PromptError(f"no template for task {task.value}")
    digest = hashlib.sha256(f"{seed}:{instance_id}".encode("utf-8")).digest()
    return pool[int.from_bytes(digest[:8], "big") % len(pool)]


# -- span markup ------------------------------------------------------------


def encode_spans(text: str, spans: list[tuple[int, int]],
                 markers: tuple[str, str]) -> str:
    """Insert `open + ' '` before and `' ' + close` after each span.

    Spans are character offsets, sorted and non-overlapping.
    """
    open_m, close_m = markers
    prev_end = 0
    out: list[str] = []
    cursor = 0
    for start, end in spans:
        if start < prev_end or start > end:
            raise PromptError(f"span ({start}, {end}) overlaps or is out of order")
        if end > len(text):
            raise PromptError(f"span ({start}, {end}) outside text of length {len(text)}")
        out.append(text[cursor:start])
        out.append(open_m + " ")
        out.append(text[start:end])
        out.append(" " + close_m)
        cursor = end
        prev_end = end
    out.append(text[cursor:])
    return "".join(out)


def _token_offsets(text: str) -> list[tuple[str, int, int]]:
    return [(m.group(0), m.start(), m.end()) for m in re.finditer(r"\S+", text)]


def decode_spans(marked: str, original: str, markers: tuple[str, str],
                 strict: bool = False) -> tuple[list[tuple[int, int]], int]:
    """Recover spans from marked-up model output, tolerating drift.

    Marker tokens are stripped; remaining tokens align to the original by
    longest-common-subsequence, and each marked run maps to the original
    character range its aligned tokens cover. Unmatched or crossing markers
    are dropped and counted in the returned warning tally. With
    `strict=True` no alignment is attempted: any token drift voids every
    span (scored as misses downstream).
    """
    open_m, close_m = markers
    orig_tokens = _token_offsets(original)
    content: list[str] = []
    runs: list[tuple[int, int]] = []  # [start, end) over content token indices
    warnings = 0
    run_start: int | None = None
    for tok in marked.split():
        if tok == open_m:
            if run_start is not None:
                warnings += 1  # nested open; ignore the marker
            else:
                run_start = len(content)
            continue
        if tok == close_m:
            if run_start is None:
                warnings += 1  # close without open
            else:
                if run_start < len(content):
                    runs.append((run_start, len(content)))
                else:
                    warnings += 1  # empty run
                run_start = None
            continue
        content.append(tok)
    if run_start is not None:
        warnings += 1  # unclosed marker

    orig_surface = [t for t, _, _ in orig_tokens]
    if strict:
        if content != orig_surface:
            return [], warnings + len(runs)
        alignment = {i: i for i in range(len(content))}
    else:
        alignment = _lcs_align(content, orig_surface)
    spans: list[tuple[int, int]] = []
    for cstart, cend in runs:
        covered = [alignment[ci] for ci in range(cstart, cend) if ci in alignment]
        if not covered:
            warnings += 1
            continue
        first, last = min(covered), max(covered)
        spans.append((orig_tokens[first][1], orig_tokens[last][2]))
    spans.sort()
    return spans, warnings


def _lcs_align(a: list[str], b: list[str]) -> dict[int, int]:
    """First-maximal LCS alignment a->b as an index map."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return {}
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = dp[i]
        nxt = dp[i + 1]
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                row[j] = nxt[j + 1] + 1
            else:
                row[j] = nxt[j] if nxt[j] >= row[j + 1] else row[j + 1]
    out: dict[int, int] = {}
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j] and dp[i][j] == dp[i + 1][j + 1] + 1:
            out[i] = j
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            i += 1
        else:
            j += 1
    return out


# -- output decoding ---------------------------------------------------------

_MULTICHOICE_RE = re.compile(r"final answer is\s*\(([A-Za-z])\)", re.IGNORECASE)
_BARE_LETTER_RE = re.compile(r"^\(?([A-Za-z])\)?\.?$")
_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def parse_label(output: str, task: TaskKind, label_set: list[str]) -> str | None:
    """Strict label decoding; None is the reject value (scored as wrong)."""
    if not label_set:
        raise PromptError("label_set must be nonempty")
    text = output.strip()
    if task == TaskKind.QA_MULTICHOICE:
        m = _MULTICHOICE_RE.search(text)
        if m is None:
            m = _BARE_LETTER_RE.match(text)
        if m is None:
            return None
        letter = m.group(1).upper()
        for label in label_set:
            if label.upper() == letter:
                return label
        return None
    if text.endswith("."):
        text = text[:-1].rstrip()
    lowered = text.lower()
    for label in label_set:
        if label.lower() == lowered:
            return label
    return None


def parse_numeric(output: str) -> float | None:
    """First decimal-number token, or None to reject."""
    m = _NUMBER_RE.search(output)
    return float(m.group(0)) if m else None


def extract_smiles(output: str) -> str | None:
    """Best-effort SMILES extraction from a model's text output.

    A cleanly lexing output is returned verbatim (validity is judged by the
    scorer); otherwise the longest detected SMILES span is used.
    """
    stripped = output.strip().strip("\"'")
    if stripped:
        try:
            tokenize_smiles(stripped)
            return stripped
        except SmilesError:
            pass
    candidates = [seg.content for seg in detect_smiles_spans(output)
                  if seg.kind == "smiles"]
    if not candidates:
        return None
    return max(candidates, key=len)


# -- template files -----------------------------------------------------------

def load_templates(path: str) -> list[PromptTemplate]:
    """Template file: records separated by blank lines.

    Fields `task:`, `input:`, `target:`, optional `markers:` (two
    whitespace-separated strings), optional `id:` and `dataset:`. Non-field
    lines continue the previous field, preserving newlines.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    templates: list[PromptTemplate] = []
    for recno, block in enumerate(re.split(r"\n\s*\n", text)):
        if not block.strip():
            continue
        fields: dict[str, str] = {}
        current: str | None = None
        for line in block.splitlines():
            m = re.match(r"^(id|task|dataset|input|target|markers):\s?(.*)$", line)
            if m:
                current = m.group(1)
                fields[current] = m.group(2)
            elif current is not None:
                fields[current] += "\n" + line
            elif line.strip():
                raise PromptError(f"{path}: record {recno}: stray line {line!r}")
        try:
            task = TaskKind(fields["task"].strip())
        except (KeyError, ValueError) as err:
            raise PromptError(f"{path}: record {recno}: bad or missing task") from err
        if "input" not in fields or "target" not in fields:
            raise PromptError(f"{path}: record {recno}: needs input and target")
        markers = None
        if "markers" in fields:
            parts = fields["markers"].split()
            if len(parts) != 2:
                raise PromptError(f"{path}: record {recno}: markers needs two strings")
            markers = (parts[0], parts[1])
        templates.append(PromptTemplate(
            task=task,
            pattern=fields["input"],
            target_pattern=fields["target"],
            markers=markers,
            template_id=fields.get("id", f"{task.value}-{recno}").strip(),
            dataset=fields.get("dataset", "").strip(),
        ))
    if not templates:
        raise PromptError(f"{path}: no templates found")
    return templates
