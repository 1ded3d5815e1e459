"""Substructure patterns and the structural filter rules.

The pattern language is a strict subset of common substructure-query
syntax: atoms `C c N n O o S s F Cl Br I *`, bracket combinations of an
element with `R` (ring membership), `D<n>` (degree), and `+`/`-` (charge),
bonds `- = # : ~`, branches, and ring closures. Anything outside the subset
is rejected with a diagnostic naming the unsupported token.

An unannotated bond matches single or aromatic, following the usual
query-language convention, so `c1ccccc1` matches benzene targets.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .molgraph import AROMATIC, DOUBLE, SINGLE, TRIPLE, Molecule, ParseDiagnostic, SmilesError

ANY_BOND = 0  # `~`
DEFAULT_BOND = -1  # unannotated: single or aromatic

_ELEMENTS = ("Cl", "Br", "C", "N", "O", "S", "F", "I")
_AROMATIC_ELEMENTS = {"c": "C", "n": "N", "o": "O", "s": "S"}


@dataclass
class PatternNode:
    """Atom predicate: None fields are wildcards."""

    element: str | None = None
    aromatic: bool | None = None
    in_ring: bool | None = None
    degree: int | None = None
    charge: int | None = None

    def matches(self, mol: Molecule, i: int, ring_atoms: set[int]) -> bool:
        atom = mol.atoms[i]
        if self.element is not None and atom.element != self.element:
            return False
        if self.aromatic is not None and atom.aromatic != self.aromatic:
            return False
        if self.in_ring is not None and (i in ring_atoms) != self.in_ring:
            return False
        if self.degree is not None and mol.degree(i) != self.degree:
            return False
        if self.charge is not None and atom.charge != self.charge:
            return False
        return True


@dataclass
class PatternEdge:
    a: int
    b: int
    order: int  # SINGLE/DOUBLE/TRIPLE/AROMATIC/ANY_BOND/DEFAULT_BOND

    def matches(self, order: int) -> bool:
        if self.order == ANY_BOND:
            return True
        if self.order == DEFAULT_BOND:
            return order in (SINGLE, AROMATIC)
        return order == self.order


@dataclass
class PatternGraph:
    """A connected substructure query."""

    source: str
    nodes: list[PatternNode]
    edges: list[PatternEdge]
    adjacency: list[list[tuple[int, int]]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.adjacency:
            self.adjacency = [[] for _ in self.nodes]
            for ei, e in enumerate(self.edges):
                self.adjacency[e.a].append((e.b, ei))
                self.adjacency[e.b].append((e.a, ei))


def _fail(position: int, message: str) -> None:
    raise SmilesError(ParseDiagnostic("lex_error", position, message))


def parse_pattern(text: str) -> PatternGraph:
    """Parse the subset grammar; unsupported constructs raise SmilesError."""
    if not text:
        raise SmilesError(ParseDiagnostic("empty_input", 0, "empty pattern"))
    nodes: list[PatternNode] = []
    edges: list[PatternEdge] = []
    prev: int | None = None
    stack: list[int] = []
    pending: int | None = None
    rings: dict[int, tuple[int, int]] = {}
    i = 0
    n = len(text)
    bond_chars = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC, "~": ANY_BOND}

    def attach(idx: int) -> None:
        nonlocal pending
        if prev is not None:
            edges.append(PatternEdge(prev, idx, pending if pending is not None else DEFAULT_BOND))
        pending = None

    while i < n:
        ch = text[i]
        if ch == "(":
            if prev is None:
                _fail(i, "branch start before any atom")
            stack.append(prev)
            i += 1
        elif ch == ")":
            if not stack:
                _fail(i, "unmatched ')'")
            prev = stack.pop()
            i += 1
        elif ch in bond_chars:
            if pending is not None:
                _fail(i, "two consecutive bond symbols")
            pending = bond_chars[ch]
            i += 1
        elif ch.isdigit():
            d = int(ch)
            if prev is None:
                _fail(i, "ring closure before any atom")
            if d in rings:
                other, other_bond = rings.pop(d)
                order = pending if pending is not None else other_bond
                if order is None:
                    order = DEFAULT_BOND
                edges.append(PatternEdge(other, prev, order))
            else:
                rings[d] = (prev, pending if pending is not None else DEFAULT_BOND)
            pending = None
            i += 1
        elif ch == "[":
            node, width = _parse_bracket(text, i)
            nodes.append(node)
            attach(len(nodes) - 1)
            prev = len(nodes) - 1
            i += width
        elif ch == "*":
            nodes.append(PatternNode())
            attach(len(nodes) - 1)
            prev = len(nodes) - 1
            i += 1
        else:
            matched = None
            for sym in _ELEMENTS:
                if text.startswith(sym, i):
                    matched = sym
                    break
            if matched:
                nodes.append(PatternNode(element=matched, aromatic=False))
                attach(len(nodes) - 1)
                prev = len(nodes) - 1
                i += len(matched)
            elif ch in _AROMATIC_ELEMENTS:
                nodes.append(PatternNode(element=_AROMATIC_ELEMENTS[ch], aromatic=True))
                attach(len(nodes) - 1)
                prev = len(nodes) - 1
                i += 1
            else:
                _fail(i, f"unsupported pattern token {ch!r}")
    if rings:
        _fail(n, "unclosed ring in pattern")
    if stack:
        _fail(n, "unmatched '(' in pattern")
    if not nodes:
        _fail(0, "pattern has no atoms")
    graph = PatternGraph(text, nodes, edges)
    if len(_connected_nodes(graph)) != len(nodes):
        _fail(0, "pattern must be connected")
    return graph


def _parse_bracket(text: str, start: int) -> tuple[PatternNode, int]:
    i = start + 1
    n = len(text)
    node = PatternNode()
    saw_any = False
    while i < n and text[i] != "]":
        ch = text[i]
        matched = None
        for sym in _ELEMENTS:
            if text.startswith(sym, i):
                matched = sym
                break
        if matched and node.element is None and ch != "R":
            node.element = matched
            node.aromatic = False
            i += len(matched)
        elif ch in _AROMATIC_ELEMENTS and node.element is None:
            node.element = _AROMATIC_ELEMENTS[ch]
            node.aromatic = True
            i += 1
        elif ch == "*" and node.element is None:
            i += 1
        elif ch == "R":
            node.in_ring = True
            i += 1
        elif ch == "D":
            i += 1
            if i >= n or not text[i].isdigit():
                _fail(i, "D must be followed by a digit")
            node.degree = int(text[i])
            i += 1
        elif ch in "+-":
            sign = 1 if ch == "+" else -1
            i += 1
            if i < n and text[i].isdigit():
                node.charge = sign * int(text[i])
                i += 1
            else:
                node.charge = sign
        else:
            _fail(i, f"unsupported pattern token {ch!r}")
        saw_any = True
    if i >= n:
        _fail(start, "unterminated bracket in pattern")
    if not saw_any:
        _fail(start, "empty bracket in pattern")
    return node, i + 1 - start


def _connected_nodes(p: PatternGraph) -> set[int]:
    seen = {0}
    queue = [0]
    while queue:
        cur = queue.pop()
        for nb, _ in p.adjacency[cur]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return seen


def match_count(pattern: PatternGraph, mol: Molecule) -> int:
    """Number of distinct matched atom subsets (VF2-style backtracking).

    Automorphic re-embeddings over the same atom set count once.
    """
    return len(find_matches(pattern, mol))


def find_matches(pattern: PatternGraph, mol: Molecule) -> set[frozenset[int]]:
    if not mol.atoms:
        return set()
    ring_atoms = mol.ring_atoms
    # search order: BFS from node 0 so each new node attaches to a mapped one
    order: list[int] = []
    anchor: list[tuple[int, int] | None] = []  # (mapped node, edge id) per step
    seen = {0}
    queue = [0]
    while queue:
        cur = queue.pop(0)
        order.append(cur)
        for nb, ei in pattern.adjacency[cur]:
            if nb not in seen:
                seen.add(nb)
                anchor.append(None)  # placeholder; fixed below
                queue.append(nb)
    anchor = [None] * len(order)
    placed: set[int] = set()
    for k, node in enumerate(order):
        if k == 0:
            placed.add(node)
            continue
        for nb, ei in pattern.adjacency[node]:
            if nb in placed:
                anchor[k] = (nb, ei)
                break
        placed.add(node)

    matches: set[frozenset[int]] = set()
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def feasible(node: int, target: int) -> bool:
        if not pattern.nodes[node].matches(mol, target, ring_atoms):
            return False
        for nb, ei in pattern.adjacency[node]:
            if nb in mapping:
                bond = mol.bond_between(mapping[nb], target)
                if bond is None or not pattern.edges[ei].matches(bond.order):
                    return False
        return True

    def backtrack(k: int) -> None:
        if k == len(order):
            matches.add(frozenset(mapping.values()))
            return
        node = order[k]
        if anchor[k] is None:
            candidates = range(len(mol.atoms))
        else:
            base, _ = anchor[k]
            candidates = [nb for nb, _ in mol.neighbors(mapping[base])]
        for target in candidates:
            if target in used:
                continue
            if feasible(node, target):
                mapping[node] = target
                used.add(target)
                backtrack(k + 1)
                del mapping[node]
                used.discard(target)

    backtrack(0)
    return matches


DEFAULT_ALLOWED_ELEMENTS = frozenset({"C", "N", "S", "O", "F", "Cl", "Br", "H"})


@dataclass
class FilterConfig:
    """Structural filter rules for the generative-metric Filters column."""

    allowed_elements: frozenset[str] = DEFAULT_ALLOWED_ELEMENTS
    require_neutral: bool = True
    max_ring_size: int = 8
    pattern_blacklist: list[PatternGraph] = field(default_factory=list)
    blacklist_digest: str = ""

    def __post_init__(self) -> None:
        if not self.allowed_elements:
            raise ValueError("allowed_elements must be nonempty")
        if self.max_ring_size < 3:
            raise ValueError("max_ring_size must be >= 3")


@dataclass(frozen=True)
class FilterResult:
    ok: bool
    reason: str | None

    def __bool__(self) -> bool:
        return self.ok


def passes_filters(mol: Molecule, cfg: FilterConfig | None = None) -> FilterResult:
    """Apply element, charge, ring-size, and blacklist rules in order.

    The reason names the first failing rule.
    """
    cfg = cfg or FilterConfig()
    for atom in mol.atoms:
        if atom.element not in cfg.allowed_elements:
            return FilterResult(False, f"element {atom.element}")
    if cfg.require_neutral:
        for atom in mol.atoms:
            if atom.charge != 0:
                return FilterResult(False, "charge")
    for ring in mol.sssr():
        if len(ring) > cfg.max_ring_size:
            return FilterResult(False, f"ring size {len(ring)}")
    for pattern in cfg.pattern_blacklist:
        if find_matches(pattern, mol):
            return FilterResult(False, f"pattern {pattern.source}")
    return FilterResult(True, None)


def load_pattern_file(path: str) -> tuple[list[PatternGraph], str]:
    """Load one pattern per line; `#` comments and blanks are skipped.

    Returns the patterns plus a content digest recorded in metric reports.
    Invalid patterns abort loading with their line number.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()[:16]
    patterns = []
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            patterns.append(parse_pattern(stripped))
        except SmilesError as err:
            raise ValueError(f"{path}:{lineno}: invalid pattern: {err.diagnostic.message}") from err
    return patterns, digest
