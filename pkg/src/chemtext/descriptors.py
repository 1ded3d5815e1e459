"""Fingerprints, scaffolds, fragments, and descriptor vectors.

These feed the generative-model metric suite. All operations are pure and
invariant under re-rendering of the same molecule; callers comparing
molecules parsed from different spellings should normalize them first
(see `chemtext.normalize`).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .canonical import canonical_smiles
from .kekulize import normalize
from .molgraph import DOUBLE, SINGLE, TRIPLE, Molecule, extract_subgraph
from .periodic import HALOGENS, atomic_number, default_mass

# splitmix64 constants; the fixed seed makes fingerprints reproducible
# across platforms and is recorded in metric reports.
FINGERPRINT_SEED = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def _mix64(x: int) -> int:
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def _hash_ints(values: tuple[int, ...]) -> int:
    h = FINGERPRINT_SEED
    for v in values:
        h = _mix64(h ^ ((v + 0x9E3779B97F4A7C15) & _MASK))
    return h


@dataclass(frozen=True)
class Fingerprint:
    """Fixed-width binary fingerprint held as one big int."""

    bits: int
    width: int
    radius: int

    @property
    def popcount(self) -> int:
        return self.bits.bit_count()

    def on_bits(self) -> list[int]:
        return [i for i in range(self.width) if (self.bits >> i) & 1]


def morgan_fingerprint(mol: Molecule, radius: int = 2, width: int = 2048) -> Fingerprint:
    """Circular fingerprint over hashed atom environments.

    Round 0 hashes (element, degree, charge, H count, ring flag, aromatic
    flag) per atom; each later round rehashes the atom's invariant with its
    sorted (bond order, neighbor invariant) pairs. Every invariant from
    every round sets bit (invariant mod width).
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if width < 64 or width & (width - 1):
        raise ValueError("width must be a power of two >= 64")
    ring = mol.ring_atoms
    inv = [
        _hash_ints((
            atomic_number(a.element), mol.degree(i), a.charge, a.total_h,
            int(i in ring), int(a.aromatic),
        ))
        for i, a in enumerate(mol.atoms)
    ]
    bits = 0
    for v in inv:
        bits |= 1 << (v % width)
    for _ in range(radius):
        nxt = []
        for i in range(len(mol.atoms)):
            env = sorted((mol.bonds[bi].order, inv[nb]) for nb, bi in mol.neighbors(i))
            flat = [inv[i]]
            for order, nb_inv in env:
                flat.append(order)
                flat.append(nb_inv)
            nxt.append(_hash_ints(tuple(flat)))
        inv = nxt
        for v in inv:
            bits |= 1 << (v % width)
    return Fingerprint(bits, width, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """Intersection over union of set bits; 1.0 when both are empty."""
    if a.width != b.width:
        raise ValueError(f"fingerprint width mismatch: {a.width} != {b.width}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union


def pack_fingerprints(fps: list[Fingerprint]) -> np.ndarray:
    """Pack fingerprints into a (n, width/64) uint64 matrix for bulk Tanimoto."""
    if not fps:
        return np.zeros((0, 0), dtype=np.uint64)
    words = fps[0].width // 64
    out = np.zeros((len(fps), words), dtype=np.uint64)
    for i, fp in enumerate(fps):
        bits = fp.bits
        for w in range(words):
            out[i, w] = (bits >> (64 * w)) & _MASK
    return out


def bulk_tanimoto(packed_a: np.ndarray, packed_b: np.ndarray,
                  chunk: int = 64) -> np.ndarray:
    """Pairwise Tanimoto matrix between two packed fingerprint sets."""
    n, m = len(packed_a), len(packed_b)
    out = np.empty((n, m), dtype=np.float64)
    pop_b = np.bitwise_count(packed_b).sum(axis=1).astype(np.int64)
    pop_a = np.bitwise_count(packed_a).sum(axis=1).astype(np.int64)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        inter = np.bitwise_count(packed_a[lo:hi, None, :] & packed_b[None, :, :]).sum(axis=2)
        union = pop_a[lo:hi, None] + pop_b[None, :] - inter
        block = np.divide(inter, union, out=np.ones_like(union, dtype=np.float64),
                          where=union != 0)
        out[lo:hi] = block
    return out


def murcko_scaffold(mol: Molecule) -> Molecule:
    """Ring systems plus connecting linkers, side chains pruned.

    Degree-one atoms are deleted iteratively; terminal atoms double-bonded
    to a surviving skeleton atom (carbonyl oxygens on rings or linkers) are
    retained. Acyclic molecules give an empty scaffold.
    """
    if not mol.ring_atoms:
        return Molecule([], [])
    degree = [mol.degree(i) for i in range(len(mol.atoms))]
    alive = set(range(len(mol.atoms)))
    leaves = [i for i in alive if degree[i] <= 1]
    while leaves:
        nxt = []
        for leaf in leaves:
            if leaf not in alive or degree[leaf] > 1:
                continue
            alive.discard(leaf)
            for nb, _ in mol.neighbors(leaf):
                if nb in alive:
                    degree[nb] -= 1
                    if degree[nb] <= 1:
                        nxt.append(nb)
        leaves = nxt
    retained = set(alive)
    for bond in mol.bonds:
        if bond.order in (DOUBLE, TRIPLE):
            if bond.a in alive and bond.b not in alive and mol.degree(bond.b) == 1:
                retained.add(bond.b)
            elif bond.b in alive and bond.a not in alive and mol.degree(bond.a) == 1:
                retained.add(bond.a)
    return extract_subgraph(mol, sorted(retained))


def scaffold_smiles(mol: Molecule) -> str:
    """Canonical SMILES of the scaffold; empty string for acyclic input."""
    scaffold = murcko_scaffold(mol)
    if not scaffold.atoms:
        return ""
    return canonical_smiles(scaffold)


def _is_cut_bond(mol: Molecule, bi: int) -> bool:
    bond = mol.bonds[bi]
    if bond.order != SINGLE or bi in mol.ring_bonds:
        return False
    a, b = bond.a, bond.b
    ring = mol.ring_atoms
    if (a in ring) != (b in ring):
        return True  # ring/side-chain attachment

    def carbonyl_carbon(i: int) -> bool:
        atom = mol.atoms[i]
        if atom.element != "C":
            return False
        return any(mol.bonds[bj].order == DOUBLE and mol.atoms[nb].element == "O"
                   for nb, bj in mol.neighbors(i))

    for x, y in ((a, b), (b, a)):
        if carbonyl_carbon(x) and mol.atoms[y].element == "N":
            return True  # amide C-N
        if carbonyl_carbon(x) and mol.atoms[y].element == "O":
            return True  # ester C-O
    return False


def fragment_molecule(mol: Molecule) -> Counter[str]:
    """Cut the reduced bond set and return canonical fragment SMILES counts.

    Cut bonds: acyclic single bonds joining a ring atom to a non-ring atom,
    plus acyclic amide C-N and ester C-O single bonds. Cut ends are capped
    with hydrogens; heavy atoms are conserved across the pieces.
    """
    cut = {bi for bi in range(len(mol.bonds)) if _is_cut_bond(mol, bi)}
    if not cut:
        return Counter([canonical_smiles(mol)] if mol.atoms else [])
    seen: set[int] = set()
    pieces: Counter[str] = Counter()
    for start in range(len(mol.atoms)):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = [start]
        while queue:
            cur = queue.pop()
            for nb, bi in mol.neighbors(cur):
                if bi in cut or nb in seen:
                    continue
                seen.add(nb)
                comp.append(nb)
                queue.append(nb)
        piece = extract_subgraph(mol, comp)
        pieces[canonical_smiles(piece)] += 1
    return pieces


# DescriptorVector component names, in order.
DESCRIPTOR_NAMES = (
    "heavy_atoms", "mol_weight", "rings", "aromatic_rings", "n_count",
    "o_count", "halogens", "charge_sum", "hbd", "hba", "rotatable_bonds",
    "frac_sp3_carbon",
)


def descriptor_vector(mol: Molecule) -> np.ndarray:
    """Twelve interpretable descriptors; the feature space for the
    distribution-distance metric reported in place of a neural FCD."""
    atoms = mol.atoms
    heavy = sum(1 for a in atoms if a.element != "H")
    weight = 0
    for a in atoms:
        weight += a.isotope if a.isotope is not None else default_mass(a.element)
        weight += a.total_h  # hydrogens at mass 1
    rings = mol.sssr()
    aromatic_rings = sum(1 for r in rings if all(atoms[i].aromatic for i in r))
    n_count = sum(1 for a in atoms if a.element == "N")
    o_count = sum(1 for a in atoms if a.element == "O")
    halogen = sum(1 for a in atoms if a.element in HALOGENS)
    charge = sum(a.charge for a in atoms)
    hbd = sum(1 for a in atoms if a.element in ("N", "O") and a.total_h >= 1)
    hba = n_count + o_count
    rotatable = 0
    for bi, bond in enumerate(mol.bonds):
        if bond.order == SINGLE and bi not in mol.ring_bonds \
                and mol.degree(bond.a) >= 2 and mol.degree(bond.b) >= 2:
            rotatable += 1
    carbons = [i for i, a in enumerate(atoms) if a.element == "C"]
    sp3 = sum(
        1 for i in carbons
        if not atoms[i].aromatic
        and all(mol.bonds[bi].order == SINGLE for _, bi in mol.neighbors(i))
    )
    frac_sp3 = sp3 / len(carbons) if carbons else 0.0
    return np.array([
        heavy, weight, len(rings), aromatic_rings, n_count, o_count,
        halogen, charge, hbd, hba, rotatable, frac_sp3,
    ], dtype=np.float64)
