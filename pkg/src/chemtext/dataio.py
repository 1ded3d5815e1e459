"""Memory-mapped random access over newline-delimited corpora and mixing.

A sidecar index (`<file>.nidx`) stores record-start byte offsets so any
record is one seek away regardless of corpus size; resident memory stays
at the index plus a constant buffer. The sidecar layout is fixed:

    magic "NIDX" | u16 version=1 | u64 record_count | record_count x u64
    offsets | 32-byte SHA-256 of the data file

all little-endian. The digest check on open is mandatory; stale indices
fail fast rather than serving silently corrupt training data.
"""

from __future__ import annotations

import hashlib
import json
import mmap
import queue
import random
import struct
import threading
from array import array
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .prompts import (
    PromptTemplate, TaskInstance, TaskKind, format_instance, select_template,
)
from .tokenizer import TextTokenizer, Vocabulary, detect_smiles_spans, tokenize_mixed

MAGIC = b"NIDX"
VERSION = 1
_HEADER = struct.Struct("<4sHQ")
_CHUNK = 1 << 20


class IndexError_(Exception):
    """Sidecar missing, malformed, or out of date."""


class DigestMismatch(IndexError_):
    pass


@dataclass
class DatasetIndex:
    record_count: int
    offsets: array  # array('Q')
    source_digest: bytes
    version: int = VERSION

    def save(self, path: str | Path) -> None:
        payload = self.offsets.tobytes()
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, self.version, self.record_count))
            fh.write(payload)
            fh.write(self.source_digest)

    @classmethod
    def load(cls, path: str | Path) -> "DatasetIndex":
        with open(path, "rb") as fh:
            head = fh.read(_HEADER.size)
            if len(head) != _HEADER.size:
                raise IndexError_(f"{path}: truncated index header")
            magic, version, count = _HEADER.unpack(head)
            if magic != MAGIC:
                raise IndexError_(f"{path}: bad magic {magic!r}")
            if version != VERSION:
                raise IndexError_(f"{path}: unsupported version {version}")
            offsets = array("Q")
            raw = fh.read(8 * count)
            if len(raw) != 8 * count:
                raise IndexError_(f"{path}: truncated offset table")
            offsets.frombytes(raw)
            digest = fh.read(32)
            if len(digest) != 32:
                raise IndexError_(f"{path}: truncated digest")
        return cls(count, offsets, digest, version)


def sidecar_path(data_path: str | Path) -> Path:
    return Path(str(data_path) + ".nidx")


def build_index(path: str | Path, sidecar: str | Path | None = None) -> DatasetIndex:
    """One sequential scan: record offsets + content digest, sidecar written.

    A missing trailing newline is fine; the remainder is the last record.
    """
    offsets = array("Q")
    digest = hashlib.sha256()
    pos = 0
    saw_any = False
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(_CHUNK)
            if not chunk:
                break
            digest.update(chunk)
            if not saw_any and chunk:
                offsets.append(0)
                saw_any = True
            base = pos
            idx = chunk.find(b"\n")
            while idx != -1:
                start = base + idx + 1
                offsets.append(start)
                idx = chunk.find(b"\n", idx + 1)
            pos += len(chunk)
    # a trailing newline opens a phantom record at EOF; drop it
    if saw_any and offsets[-1] == pos:
        offsets.pop()
    index = DatasetIndex(len(offsets), offsets, digest.digest())
    index.save(sidecar or sidecar_path(path))
    return index


def _file_digest(path: str | Path) -> bytes:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(_CHUNK)
            if not chunk:
                break
            digest.update(chunk)
    return digest.digest()


class DatasetReader:
    """Random access to records by index, via mmap.

    Opening verifies the sidecar digest against the data file. Safe for
    concurrent readers; each reader holds its own mapping.
    """

    def __init__(self, path: str | Path, index: DatasetIndex | None = None,
                 verify: bool = True):
        self.path = Path(path)
        side = sidecar_path(path)
        if index is None:
            if not side.exists():
                raise IndexError_(f"{side}: sidecar index not found (run build_index)")
            index = DatasetIndex.load(side)
        self.index = index
        if verify and _file_digest(self.path) != index.source_digest:
            raise DigestMismatch(f"{self.path}: content changed since indexing")
        self._fh = open(self.path, "rb")
        self._size = self.path.stat().st_size
        if self._size:
            self._mm = mmap.mmap(self._fh.fileno(), 0, access=mmap.ACCESS_READ)
            self._trailing_newline = self._mm[-1:] == b"\n"
        else:
            self._mm = None
            self._trailing_newline = False

    def __len__(self) -> int:
        return self.index.record_count

    def get_record(self, i: int) -> bytes:
        """Record i without its trailing newline."""
        n = self.index.record_count
        if not 0 <= i < n:
            raise IndexError(f"record {i} out of range [0, {n})")
        start = self.index.offsets[i]
        if i + 1 < n:
            end = self.index.offsets[i + 1] - 1
        else:
            end = self._size - (1 if self._trailing_newline else 0)
        return self._mm[start:end]

    def __iter__(self) -> Iterator[bytes]:
        for i in range(len(self)):
            yield self.get_record(i)

    def close(self) -> None:
        if self._mm is not None:
            self._mm.close()
            self._mm = None
        self._fh.close()

    def __enter__(self) -> "DatasetReader":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


# -- mixture sampling ----------------------------------------------------------


@dataclass
class MixtureComponent:
    path: str
    task: TaskKind
    weight: float

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise ValueError("component weights must be positive")
        if isinstance(self.task, str):
            self.task = TaskKind(self.task)


@dataclass
class MixtureSpec:
    components: list[MixtureComponent]
    seed: int = 0
    temperature: float = 1.0

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("mixture needs at least one component")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")

    @classmethod
    def load(cls, path: str | Path) -> "MixtureSpec":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        comps = [MixtureComponent(c["path"], c["task"], c["weight"])
                 for c in payload["components"]]
        return cls(comps, seed=payload.get("seed", 0),
                   temperature=payload.get("temperature", 1.0))


def component_probabilities(spec: MixtureSpec) -> list[float]:
    """P(component) proportional to weight^(1/temperature)."""
    raw = [c.weight ** (1.0 / spec.temperature) for c in spec.components]
    total = sum(raw)
    return [r / total for r in raw]


def sample_mixture(spec: MixtureSpec, n: int,
                   record_counts: list[int]) -> Iterator[tuple[int, int]]:
    """n seeded draws of (component index, record index), with replacement."""
    if len(record_counts) != len(spec.components):
        raise ValueError("record_counts must align with components")
    probs = component_probabilities(spec)
    cumulative = []
    acc = 0.0
    for p in probs:
        acc += p
        cumulative.append(acc)
    cumulative[-1] = 1.0
    rng = random.Random(spec.seed)
    for _ in range(n):
        r = rng.random()
        ci = next(k for k, c in enumerate(cumulative) if r <= c)
        if record_counts[ci] == 0:
            raise ValueError(f"component {ci} has no records")
        yield ci, rng.randrange(record_counts[ci])


# -- formatted streaming ---------------------------------------------------------


class SchemaError(ValueError):
    pass


def parse_instance_record(raw: bytes | str) -> TaskInstance:
    """One InstanceRecord JSONL line -> TaskInstance.

    Schema: {"task": str, "id": str, "fields": {...}, "spans"?: [[s,e,t]...],
    "dataset"?: str}.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    payload = json.loads(raw)
    if not isinstance(payload, dict):
        raise SchemaError("record is not a JSON object")
    try:
        task = TaskKind(payload["task"])
        fields = dict(payload["fields"])
        instance_id = str(payload["id"])
    except (KeyError, ValueError, TypeError) as err:
        raise SchemaError(f"bad instance record: {err}") from err
    if "spans" in payload:
        fields["spans"] = [tuple(s) for s in payload["spans"]]
    return TaskInstance(task, fields, instance_id=instance_id,
                        dataset=payload.get("dataset", ""))


@dataclass
class StreamStats:
    yielded: int = 0
    skipped: int = 0
    unknown_tokens: int = 0


_SENTINEL = object()


def stream_formatted(spec: MixtureSpec, templates: list[PromptTemplate],
                     vocab: Vocabulary, text_tokenizer: TextTokenizer, n: int,
                     prefetch: int = 1024,
                     stats: StreamStats | None = None,
                     readers: list[DatasetReader] | None = None,
                     ) -> Iterator[tuple[list[int], list[int]]]:
    """Sample, format, and tokenize n instances with bounded prefetch.

    A producer thread performs record fetch, template rendering, and
    tokenization ahead of consumption through a bounded queue; output order
    always equals sampling order. Malformed records are skipped and counted.
    """
    if prefetch < 1:
        raise ValueError("prefetch must be >= 1")
    own_readers = readers is None
    if readers is None:
        readers = [DatasetReader(c.path) for c in spec.components]
    stats = stats if stats is not None else StreamStats()
    q: queue.Queue = queue.Queue(maxsize=prefetch)
    stop = threading.Event()

    def produce() -> None:
        try:
            for ci, ri in sample_mixture(spec, n, [len(r) for r in readers]):
                if stop.is_set():
                    break
                raw = readers[ci].get_record(ri)
                try:
                    inst = parse_instance_record(raw)
                except (SchemaError, json.JSONDecodeError):
                    stats.skipped += 1
                    continue
                tmpl = select_template(templates, inst.task, inst.instance_id,
                                       spec.seed, dataset=inst.dataset)
                pair = format_instance(inst, tmpl)
                enc_in = tokenize_mixed(detect_smiles_spans(pair.input), vocab, text_tokenizer)
                enc_out = tokenize_mixed(detect_smiles_spans(pair.target), vocab, text_tokenizer)
                stats.unknown_tokens += enc_in.unknown_count + enc_out.unknown_count
                q.put((enc_in.ids, enc_out.ids))
            q.put(_SENTINEL)
        except BaseException as err:  # propagate into the consumer
            q.put(err)

    worker = threading.Thread(target=produce, daemon=True)
    worker.start()
    try:
        while True:
            item = q.get()
            if item is _SENTINEL:
                break
            if isinstance(item, BaseException):
                raise item
            stats.yielded += 1
            yield item
    finally:
        stop.set()
        while worker.is_alive():
            try:
                q.get_nowait()
            except queue.Empty:
                pass
            worker.join(timeout=0.05)
        if own_readers:
            for r in readers:
                r.close()
