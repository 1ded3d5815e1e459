"""Molecular graph model: atoms, bonds, diagnostics, and derived structure.

Molecules are treated as immutable after construction; every transformation
(kekulization, scaffold extraction, fragment cutting) builds a new Molecule.
That keeps all operations pure and safe for data-parallel use.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .periodic import BARE_AROMATIC, ORGANIC_SUBSET, VALENCES, allowed_valences

# Bond orders. AROMATIC is a distinct order, not a flag: a kekulized graph
# contains no AROMATIC bonds.
SINGLE, DOUBLE, TRIPLE, AROMATIC = 1, 2, 3, 4

BOND_SYMBOLS = {SINGLE: "-", DOUBLE: "=", TRIPLE: "#", AROMATIC: ":"}

# Directional single-bond markers for double-bond geometry, stored relative
# to the order the bond's endpoints were written: UP is `/`, DOWN is `\`.
DIR_NONE, DIR_UP, DIR_DOWN = 0, 1, -1

# Sentinel used in chiral neighbor lists for a bracket-implicit hydrogen.
H_SENTINEL = -1

DIAGNOSTIC_KINDS = (
    "lex_error",
    "unclosed_ring",
    "unmatched_paren",
    "valence_violation",
    "kekulization_failure",
    "empty_input",
)


@dataclass(frozen=True)
class ParseDiagnostic:
    """A problem found while parsing or validating a SMILES string."""

    kind: str
    position: int
    message: str

    def __str__(self) -> str:
        return f"{self.kind}@{self.position}: {self.message}"

    @property
    def short(self) -> str:
        return f"{self.kind}@{self.position}"


class SmilesError(ValueError):
    """Raised where an operation cannot return diagnostics as data."""

    def __init__(self, diagnostic: ParseDiagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


@dataclass
class Atom:
    """One heavy atom (or explicit [H]) of a molecular graph.

    `explicit_h` is set if and only if the atom came from a bracket
    expression, in which case `implicit_h` is 0. `chiral_neighbors` records
    the neighbor order seen at parse time (H_SENTINEL marks an in-bracket
    hydrogen) so writers can recompute tetrahedral parity.
    """

    element: str
    aromatic: bool = False
    isotope: int | None = None
    charge: int = 0
    explicit_h: int | None = None
    chirality: str = ""  # "", "@", "@@"
    implicit_h: int = 0
    offset: int = 0  # source character offset, 0 for synthesized atoms
    was_aromatic: bool = False  # set by kekulize so lowercase can be restored
    chiral_neighbors: list[int] | None = None

    @property
    def total_h(self) -> int:
        return (self.explicit_h or 0) + self.implicit_h

    @property
    def from_bracket(self) -> bool:
        return self.explicit_h is not None


@dataclass
class Bond:
    """An edge between two atom indices."""

    a: int
    b: int
    order: int = SINGLE
    direction: int = DIR_NONE
    # For double bonds with parsed geometry: (substituent at a, substituent
    # at b, True if the two substituents lie on the same side).
    stereo: tuple[int, int, bool] | None = None

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


class Molecule:
    """An attributed molecular graph with derived adjacency and ring flags."""

    __slots__ = (
        "atoms", "bonds", "_adj", "_bond_index", "_fragments",
        "_ring_atoms", "_ring_bonds", "_sssr",
    )

    def __init__(self, atoms: list[Atom], bonds: list[Bond],
                 structure_from: "Molecule | None" = None):
        self.atoms = atoms
        self.bonds = bonds
        if structure_from is not None:
            # same connectivity, different orders/flags: share derived structure
            self._adj = structure_from._adj
            self._bond_index = structure_from._bond_index
            self._fragments = structure_from._fragments
            self._ring_atoms = structure_from._ring_atoms
            self._ring_bonds = structure_from._ring_bonds
            self._sssr = structure_from._sssr
            return
        self._adj: list[list[tuple[int, int]]] = [[] for _ in atoms]
        self._bond_index: dict[tuple[int, int], int] = {}
        for bi, bond in enumerate(bonds):
            if bond.a == bond.b or not (0 <= bond.a < len(atoms)) or not (0 <= bond.b < len(atoms)):
                raise ValueError(f"bond {bi} endpoints out of range: {bond.a}-{bond.b}")
            if bond.key in self._bond_index:
                raise ValueError(f"duplicate bond between atoms {bond.a} and {bond.b}")
            self._bond_index[bond.key] = bi
            self._adj[bond.a].append((bond.b, bi))
            self._adj[bond.b].append((bond.a, bi))
        self._fragments: list[list[int]] | None = None
        self._ring_atoms: set[int] | None = None
        self._ring_bonds: set[int] | None = None
        self._sssr: list[list[int]] | None = None

    # -- basic structure ---------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, i: int) -> list[tuple[int, int]]:
        """(neighbor index, bond index) pairs for atom i."""
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def bond_between(self, i: int, j: int) -> Bond | None:
        bi = self._bond_index.get((i, j) if i < j else (j, i))
        return self.bonds[bi] if bi is not None else None

    def sigma_valence(self, i: int, aromatic_as: int = 1) -> int:
        """Sum of bond orders at atom i, counting aromatic bonds as `aromatic_as`."""
        total = 0
        for _, bi in self._adj[i]:
            order = self.bonds[bi].order
            total += aromatic_as if order == AROMATIC else order
        return total

    @property
    def fragments(self) -> list[list[int]]:
        """Connected components, each a sorted list of atom indices."""
        if self._fragments is None:
            seen = [False] * len(self.atoms)
            comps = []
            for start in range(len(self.atoms)):
                if seen[start]:
                    continue
                comp = [start]
                seen[start] = True
                queue = [start]
                while queue:
                    cur = queue.pop()
                    for nb, _ in self._adj[cur]:
                        if not seen[nb]:
                            seen[nb] = True
                            comp.append(nb)
                            queue.append(nb)
                comps.append(sorted(comp))
            self._fragments = comps
        return self._fragments

    @property
    def fragment_count(self) -> int:
        return len(self.fragments)

    # -- rings -------------------------------------------------------------

    def _find_ring_membership(self) -> None:
        """Mark ring bonds (non-bridges) and ring atoms via bridge detection."""
        n = len(self.atoms)
        disc = [-1] * n
        low = [0] * n
        bridges: set[int] = set()
        timer = 0
        for root in range(n):
            if disc[root] != -1:
                continue
            # iterative DFS; (atom, parent bond, neighbor iterator position)
            stack = [(root, -1, 0)]
            disc[root] = low[root] = timer
            timer += 1
            while stack:
                cur, pbond, pos = stack[-1]
                if pos < len(self._adj[cur]):
                    stack[-1] = (cur, pbond, pos + 1)
                    nb, bi = self._adj[cur][pos]
                    if bi == pbond:
                        continue
                    if disc[nb] == -1:
                        disc[nb] = low[nb] = timer
                        timer += 1
                        stack.append((nb, bi, 0))
                    else:
                        low[cur] = min(low[cur], disc[nb])
                else:
                    stack.pop()
                    if stack:
                        par = stack[-1][0]
                        low[par] = min(low[par], low[cur])
                        if low[cur] > disc[par]:
                            bridges.add(pbond)
        ring_bonds = {bi for bi in range(len(self.bonds)) if bi not in bridges}
        ring_atoms: set[int] = set()
        for bi in ring_bonds:
            ring_atoms.add(self.bonds[bi].a)
            ring_atoms.add(self.bonds[bi].b)
        self._ring_atoms = ring_atoms
        self._ring_bonds = ring_bonds

    @property
    def ring_atoms(self) -> set[int]:
        if self._ring_atoms is None:
            self._find_ring_membership()
        return self._ring_atoms  # type: ignore[return-value]

    @property
    def ring_bonds(self) -> set[int]:
        if self._ring_bonds is None:
            self._find_ring_membership()
        return self._ring_bonds  # type: ignore[return-value]

    def in_ring(self, i: int) -> bool:
        return i in self.ring_atoms

    def sssr(self) -> list[list[int]]:
        """Smallest set of smallest rings, as atom-index cycles.

        Candidate rings are the shortest cycles through each ring bond; a
        GF(2)-independent subset of size |bonds| - |atoms| + |components| is
        selected smallest-first, which is deterministic for a fixed graph.
        """
        if self._sssr is not None:
            return self._sssr
        target = len(self.bonds) - len(self.atoms) + self.fragment_count
        if target <= 0:
            self._sssr = []
            return self._sssr
        candidates: dict[frozenset[int], list[int]] = {}
        for bi in sorted(self.ring_bonds):
            bond = self.bonds[bi]
            path = self._shortest_path_avoiding(bond.a, bond.b, bi)
            if path is None:
                continue
            mask = frozenset(self._cycle_bond_ids(path))
            if mask not in candidates:
                candidates[mask] = path
        ordered = sorted(candidates.items(), key=lambda kv: (len(kv[1]), sorted(kv[1])))
        basis: list[int] = []  # pivot bitmasks over bond ids
        rings: list[list[int]] = []
        for mask, path in ordered:
            vec = 0
            for bi in mask:
                vec |= 1 << bi
            for pivot in basis:
                vec = min(vec, vec ^ pivot)
            if vec:
                basis.append(vec)
                rings.append(path)
                if len(rings) == target:
                    break
        self._sssr = rings
        return rings

    def _shortest_path_avoiding(self, src: int, dst: int, skip_bond: int) -> list[int] | None:
        """BFS shortest path src -> dst ignoring one bond; ties by atom index."""
        prev = {src: -1}
        frontier = [src]
        while frontier and dst not in prev:
            nxt = []
            for cur in frontier:
                for nb, bi in sorted(self._adj[cur]):
                    if bi == skip_bond or nb in prev:
                        continue
                    prev[nb] = cur
                    nxt.append(nb)
            frontier = nxt
        if dst not in prev:
            return None
        path = [dst]
        while path[-1] != src:
            path.append(prev[path[-1]])
        return path

    def _cycle_bond_ids(self, cycle: list[int]) -> list[int]:
        ids = []
        for k in range(len(cycle)):
            a, b = cycle[k], cycle[(k + 1) % len(cycle)]
            ids.append(self._bond_index[(a, b) if a < b else (b, a)])
        return ids

    # -- derived chemistry -------------------------------------------------

    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.element != "H")


    def copy(self) -> "Molecule":
        return Molecule([replace(a, chiral_neighbors=list(a.chiral_neighbors) if a.chiral_neighbors else None)
                         for a in self.atoms],
                        [replace(b) for b in self.bonds])


def bare_implicit_h(element: str, aromatic: bool, degree: int, sigma: int) -> int | None:
    """Hydrogen count implied for a bracket-free atom, or None if unwritable.

    Aromatic carbon is assumed to take one ring double bond; aromatic N, P,
    O, and S carry no implicit hydrogens in bare form (pyrrole-type nitrogen
    must be written [nH]).
    """
    if aromatic:
        if element == "C":
            return max(0, 4 - (degree + 1))
        if element == "B":
            return max(0, 3 - (degree + 1))
        if element in ("N", "P", "O", "S"):
            return 0
        return None
    valences = VALENCES.get(element)
    if valences is None:
        return None
    for v in valences:
        if v >= sigma:
            return v - sigma
    return None


def derive_implicit_h(mol: Molecule) -> None:
    """Fill `implicit_h` for bare (non-bracket) atoms in place.

    Called once at the end of parsing, before the molecule is shared.
    """
    for i, atom in enumerate(mol.atoms):
        if atom.from_bracket:
            atom.implicit_h = 0
            continue
        h = bare_implicit_h(atom.element, atom.aromatic, mol.degree(i), mol.sigma_valence(i))
        atom.implicit_h = h if h is not None and h > 0 else 0


def extract_subgraph(mol: Molecule, keep: list[int], cap_cut_bonds: bool = True,
                     drop_stereo: bool = True) -> Molecule:
    """Induced subgraph over `keep`, capping severed bonds with hydrogens.

    Severed single bonds add one hydrogen to the surviving endpoint; for
    bracket atoms the explicit count is bumped, for bare organic atoms the
    implicit count refills on its own via the valence model.
    """
    keep_sorted = sorted(set(keep))
    remap = {old: new for new, old in enumerate(keep_sorted)}
    cut_count = {old: 0 for old in keep_sorted}
    new_bonds = []
    for bond in mol.bonds:
        ina, inb = bond.a in remap, bond.b in remap
        if ina and inb:
            new_bonds.append(Bond(remap[bond.a], remap[bond.b], bond.order,
                                  DIR_NONE if drop_stereo else bond.direction,
                                  None if drop_stereo else bond.stereo))
        elif ina:
            cut_count[bond.a] += bond.order if bond.order != AROMATIC else 1
        elif inb:
            cut_count[bond.b] += bond.order if bond.order != AROMATIC else 1
    new_atoms = []
    for old in keep_sorted:
        atom = mol.atoms[old]
        cuts = cut_count[old] if cap_cut_bonds else 0
        explicit = atom.explicit_h
        if cuts:
            # pin the hydrogen count explicitly: implicit recomputation cannot
            # know how many bonds were severed (aromatic N would lose its cap)
            explicit = atom.total_h + cuts
        new_atoms.append(Atom(
            element=atom.element,
            aromatic=atom.aromatic,
            isotope=atom.isotope,
            charge=atom.charge,
            explicit_h=explicit,
            chirality="" if drop_stereo else atom.chirality,
            offset=atom.offset,
            was_aromatic=atom.was_aromatic,
            chiral_neighbors=None,
        ))
    sub = Molecule(new_atoms, new_bonds)
    derive_implicit_h(sub)
    return sub
