"""Canonical and randomized SMILES writers.

Canonical ranks come from iterative invariant refinement (Morgan-style):
the initial invariant is (element, aromatic, degree, H count, charge,
isotope, ring membership), refined by sorted neighbor ranks until stable;
remaining ties are broken by fixing the lowest-index tied atom and
re-refining. Output is a depth-first rendering from the lowest-ranked atom
of each fragment with neighbors visited in rank order, fragments sorted
lexicographically. Tetrahedral parity and double-bond geometry markers are
recomputed for the emission order.
"""

from __future__ import annotations

import random
from collections import defaultdict
from typing import Callable

from .kekulize import normalize, validate
from .molgraph import (
    AROMATIC, DOUBLE, H_SENTINEL, SINGLE, TRIPLE,
    Molecule, SmilesError, bare_implicit_h,
)
from .periodic import BARE_AROMATIC, ORGANIC_SUBSET
from .smiles_parser import parse_smiles


def canonical_ranks(mol: Molecule) -> list[int]:
    """Assign each atom a unique rank independent of input atom order."""
    n = len(mol.atoms)
    if n == 0:
        return []
    ring = mol.ring_atoms
    keys: list[tuple] = [
        (a.element, a.aromatic, mol.degree(i), a.total_h, a.charge,
         a.isotope or 0, i in ring)
        for i, a in enumerate(mol.atoms)
    ]
    ranks = _dense_ranks(keys)
    nbr_static = [
        [(mol.bonds[bi].order, nb) for nb, bi in mol.neighbors(i)]
        for i in range(n)
    ]
    ranks = _refine(nbr_static, ranks)
    while len(set(ranks)) < n:
        counts = defaultdict(int)
        for r in ranks:
            counts[r] += 1
        tied_rank = min(r for r, c in counts.items() if c > 1)
        fixed = min(i for i in range(n) if ranks[i] == tied_rank)
        seeded = [(ranks[i], 0 if i == fixed else 1) for i in range(n)]
        ranks = _refine(nbr_static, _dense_ranks(seeded))
    return ranks


def _dense_ranks(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _refine(nbr_static: list[list[tuple[int, int]]], ranks: list[int]) -> list[int]:
    while True:
        keys = [
            (ranks[i], tuple(sorted((o, ranks[nb]) for o, nb in nbrs)))
            for i, nbrs in enumerate(nbr_static)
        ]
        new = _dense_ranks(keys)
        if new == ranks:
            return ranks
        ranks = new


class _Traversal:
    """DFS plan for one fragment: visit order, tree, and ring closures."""

    def __init__(self, mol: Molecule, start: int,
                 neighbor_order: Callable[[int], list[tuple[int, int]]]):
        self.visit_index: dict[int, int] = {start: 0}
        self.order: list[int] = [start]
        self.parent_edge: dict[int, tuple[int, int] | None] = {start: None}
        self.children: dict[int, list[int]] = defaultdict(list)
        self.closures: dict[int, list[tuple[int, int]]] = defaultdict(list)
        self.closure_bonds: set[int] = set()
        stack = [(start, iter(neighbor_order(start)))]
        while stack:
            a, it = stack[-1]
            for nb, bi in it:
                pe = self.parent_edge[a]
                if pe is not None and bi == pe[1]:
                    continue
                if nb in self.visit_index:
                    if bi not in self.closure_bonds:
                        self.closure_bonds.add(bi)
                        self.closures[a].append((nb, bi))
                        self.closures[nb].append((a, bi))
                    continue
                self.parent_edge[nb] = (a, bi)
                self.children[a].append(nb)
                self.visit_index[nb] = len(self.order)
                self.order.append(nb)
                stack.append((nb, iter(neighbor_order(nb))))
                break
            else:
                stack.pop()


def _assign_directions(mol: Molecule,
                       plans: list[_Traversal]) -> dict[tuple[int, int], int]:
    """Solve side-of-double-bond constraints into per-oriented-bond signs.

    Returns side[(x, y)] in {+1, -1}: x sits above (+1) or below (-1) y.
    Only variables on traversal tree single bonds can be emitted; components
    with no emittable variable or with contradictions are dropped.
    """
    stereo_bonds = [b for b in mol.bonds if b.order == DOUBLE and b.stereo is not None]
    if not stereo_bonds:
        return {}
    # adjacency of the constraint graph: node=(sub, center), edges carry the
    # sign relating the two node values
    cons: dict[tuple[int, int], list[tuple[tuple[int, int], int]]] = defaultdict(list)

    def connect(p: tuple[int, int], q: tuple[int, int], sign: int) -> None:
        cons[p].append((q, sign))
        cons[q].append((p, sign))

    centers: set[int] = set()
    for bond in stereo_bonds:
        s, t, same = bond.stereo  # type: ignore[misc]
        connect((s, bond.a), (t, bond.b), 1 if same else -1)
        centers.update((bond.a, bond.b))
    for u in centers:
        subs = [nb for nb, bi in mol.neighbors(u) if mol.bonds[bi].order == SINGLE]
        for k in range(len(subs) - 1):
            connect((subs[k], u), (subs[k + 1], u), -1)
        for s in subs:
            connect((s, u), (u, s), -1)

    tree_bonds: dict[tuple[int, int], tuple[int, int]] = {}
    for plan in plans:
        for child, pe in plan.parent_edge.items():
            if pe is None:
                continue
            parent, bi = pe
            if mol.bonds[bi].order == SINGLE:
                tree_bonds[(child, parent)] = (bi, plan.visit_index[child])

    side: dict[tuple[int, int], int] = {}
    seen: set[tuple[int, int]] = set()
    for node in list(cons):
        if node in seen:
            continue
        component: dict[tuple[int, int], int] = {node: 1}
        queue = [node]
        ok = True
        while queue:
            cur = queue.pop()
            seen.add(cur)
            for other, sign in cons[cur]:
                want = component[cur] * sign
                if other in component:
                    if component[other] != want:
                        ok = False
                else:
                    component[other] = want
                    queue.append(other)
        if not ok:
            continue
        emittable = [(v, n) for n, v in
                     ((n, tree_bonds.get(n)) for n in component) if v is not None]
        if not emittable:
            continue
        # orient the earliest-emitted marker as '/'
        _, root = min(emittable, key=lambda vn: vn[0][1])
        flip = 1 if component[root] == 1 else -1
        for n, val in component.items():
            x, y = n
            if (x, y) in tree_bonds or (y, x) in tree_bonds:
                side[n] = val * flip
    return side


def write_smiles(mol: Molecule, ranks: list[int] | None = None,
                 rng: random.Random | None = None,
                 include_stereo: bool = True) -> str:
    """Render a molecule; exactly one of `ranks` (canonical) or `rng` drives order."""
    if not mol.atoms:
        return ""
    if ranks is not None:
        def neighbor_order(a: int) -> list[tuple[int, int]]:
            return sorted(mol.neighbors(a), key=lambda nb: ranks[nb[0]])
        fragments = sorted(mol.fragments, key=lambda frag: min(ranks[i] for i in frag))
        starts = [min(frag, key=lambda i: ranks[i]) for frag in fragments]
    else:
        assert rng is not None
        def neighbor_order(a: int) -> list[tuple[int, int]]:
            nbrs = list(mol.neighbors(a))
            rng.shuffle(nbrs)
            return nbrs
        fragments = list(mol.fragments)
        rng.shuffle(fragments)
        starts = [rng.choice(frag) for frag in fragments]

    plans = [_Traversal(mol, start, neighbor_order) for start in starts]
    side = _assign_directions(mol, plans) if include_stereo else {}

    pieces = [_emit_fragment(mol, plan, side, include_stereo) for plan in plans]
    if ranks is not None:
        pieces.sort()
    return ".".join(pieces)


def _emit_fragment(mol: Molecule, plan: _Traversal,
                   side: dict[tuple[int, int], int], include_stereo: bool) -> str:
    tokens: list[str] = []
    active_digits: set[int] = set()
    open_digit: dict[int, int] = {}

    def digit_token(d: int) -> str:
        return str(d) if d <= 9 else f"%{d:02d}"

    def alloc_digit() -> int:
        d = 1
        while d in active_digits:
            d += 1
        active_digits.add(d)
        return d

    def bond_token(bi: int, child: int, parent: int) -> str:
        bond = mol.bonds[bi]
        if bond.order == AROMATIC:
            if mol.atoms[bond.a].aromatic and mol.atoms[bond.b].aromatic:
                return ""
            return ":"
        if bond.order == DOUBLE:
            return "="
        if bond.order == TRIPLE:
            return "#"
        if include_stereo and (child, parent) in side:
            return "/" if side[(child, parent)] == 1 else "\\"
        if mol.atoms[bond.a].aromatic and mol.atoms[bond.b].aromatic:
            return "-"
        return ""

    def closure_prefix(bi: int) -> str:
        bond = mol.bonds[bi]
        if bond.order == AROMATIC:
            if mol.atoms[bond.a].aromatic and mol.atoms[bond.b].aromatic:
                return ""
            return ":"
        if bond.order == DOUBLE:
            return "="
        if bond.order == TRIPLE:
            return "#"
        if mol.atoms[bond.a].aromatic and mol.atoms[bond.b].aromatic:
            return "-"
        return ""

    def atom_tokens(a: int) -> str:
        parts = [_atom_label(mol, a, plan, include_stereo)]
        for partner, bi in plan.closures.get(a, ()):
            if plan.visit_index[a] < plan.visit_index[partner]:
                d = alloc_digit()
                open_digit[bi] = d
                parts.append(closure_prefix(bi) + digit_token(d))
            else:
                d = open_digit.pop(bi)
                active_digits.discard(d)
                parts.append(digit_token(d))
        return "".join(parts)

    # task stack: ("atom", atom, bond-from-parent, parent) or ("text", s)
    tasks: list[tuple] = [("atom", plan.order[0], None, None)]
    while tasks:
        task = tasks.pop()
        if task[0] == "text":
            tokens.append(task[1])
            continue
        _, a, pbond, parent = task
        if pbond is not None:
            tokens.append(bond_token(pbond, a, parent))
        tokens.append(atom_tokens(a))
        kids = plan.children.get(a, [])
        pushed: list[tuple] = []
        for k, kid in enumerate(kids):
            bi = plan.parent_edge[kid][1]  # type: ignore[index]
            last = k == len(kids) - 1
            if last:
                pushed.append(("atom", kid, bi, a))
            else:
                pushed.append(("text", "("))
                pushed.append(("atom", kid, bi, a))
                pushed.append(("text", ")"))
        tasks.extend(reversed(pushed))
    return "".join(tokens)


def _atom_label(mol: Molecule, a: int, plan: _Traversal, include_stereo: bool) -> str:
    atom = mol.atoms[a]
    chirality = atom.chirality if include_stereo and atom.chiral_neighbors else ""
    symbol = atom.element.lower() if atom.aromatic else atom.element
    bare_ok = (
        atom.element in ORGANIC_SUBSET
        and atom.isotope is None
        and atom.charge == 0
        and not chirality
        and (not atom.aromatic or atom.element.lower() in BARE_AROMATIC)
    )
    if bare_ok:
        implied = bare_implicit_h(atom.element, atom.aromatic,
                                  mol.degree(a), mol.sigma_valence(a))
        if implied is not None and implied == atom.total_h:
            return symbol
    if chirality:
        chirality = _oriented_chirality(mol, a, plan)
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(symbol)
    parts.append(chirality)
    h = atom.total_h
    if h == 1:
        parts.append("H")
    elif h > 1:
        parts.append(f"H{h}")
    if atom.charge:
        if atom.charge == 1:
            parts.append("+")
        elif atom.charge == -1:
            parts.append("-")
        else:
            parts.append(f"{atom.charge:+d}")
    parts.append("]")
    return "".join(parts)


def _oriented_chirality(mol: Molecule, a: int, plan: _Traversal) -> str:
    """Chirality symbol adjusted to the emission neighbor order."""
    atom = mol.atoms[a]
    parsed = atom.chiral_neighbors or []
    emitted: list[int] = []
    pe = plan.parent_edge.get(a)
    if pe is not None:
        emitted.append(pe[0])
    if atom.total_h >= 1:
        emitted.append(H_SENTINEL)
    emitted.extend(partner for partner, _ in plan.closures.get(a, ()))
    emitted.extend(plan.children.get(a, ()))
    if sorted(parsed) != sorted(emitted) or len(set(parsed)) != len(parsed):
        return ""  # neighbor set changed; marker no longer meaningful
    parity = _permutation_parity(parsed, emitted)
    if parity == 0:
        return atom.chirality
    return "@" if atom.chirality == "@@" else "@@"


def _permutation_parity(src: list[int], dst: list[int]) -> int:
    pos = {x: i for i, x in enumerate(src)}
    perm = [pos[x] for x in dst]
    swaps = 0
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        swaps += length - 1
    return swaps % 2


def canonical_smiles(mol: Molecule, ignore_stereo: bool = False) -> str:
    """Deterministic rendering independent of input atom order.

    The molecule must be valid (see `validate`); aromatic systems are
    normalized so both benzene spellings yield one string.
    """
    norm = normalize(mol)
    ranks = canonical_ranks(norm)
    return write_smiles(norm, ranks=ranks, include_stereo=not ignore_stereo)


def randomize_smiles(mol: Molecule, seed: int) -> str:
    """A random but valid rendering: seeded start atom and neighbor order."""
    rng = random.Random(seed)
    return write_smiles(mol, rng=rng)


def canonical_equal(a: str, b: str, ignore_stereo: bool = False) -> bool:
    """True iff both strings parse, validate, and share one canonical form.

    Multi-fragment inputs compare as sorted fragment multisets because the
    canonical writer orders fragments lexicographically.
    """
    try:
        ma = parse_smiles(a)
        mb = parse_smiles(b)
    except SmilesError:
        return False
    if validate(ma) or validate(mb):
        return False
    return canonical_smiles(ma, ignore_stereo) == canonical_smiles(mb, ignore_stereo)
