"""Kekulization, aromaticity restoration, and valence validation.

The aromaticity model is deliberately small and self-consistent:

* Written-aromatic input is accepted only if every lowercase atom sits in a
  five- or six-membered SSSR ring whose atoms are all aromatic (the
  ring-membership check), and an alternating single/double assignment exists
  over the atoms that need a double bond (a perfect matching over aromatic
  ring bonds).
* Kekule input is re-aromatized only for five/six-membered rings whose atoms
  all either donate a lone pair or carry exactly one ring double bond, and
  whose pi-electron count is 2 mod 4.

Both benzene spellings therefore normalize to the same graph, while exotic
systems (azulenes, pyridone-type rings) stay in whichever of the two forms
survives the rules. `normalize` composes the two steps into the normal form
used by canonicalization and the descriptor metrics.
"""

from __future__ import annotations

from dataclasses import replace

from .molgraph import (
    AROMATIC, DOUBLE, SINGLE, TRIPLE,
    Atom, Bond, Molecule, ParseDiagnostic, SmilesError,
)
from .periodic import allowed_valences

_DONOR_ELEMENTS = frozenset({"N", "P", "O", "S", "Se"})


def _aromatic_valence_state(mol: Molecule, i: int) -> int | None:
    """-1: inconsistent, 0: satisfied without a double bond, 1: needs one."""
    atom = mol.atoms[i]
    allowed = allowed_valences(atom.element, atom.charge)
    if allowed is None:
        return 0
    v = mol.sigma_valence(i, aromatic_as=1) + atom.total_h
    if v in allowed:
        return 0
    if v + 1 in allowed:
        return 1
    return -1


def kekulize(mol: Molecule) -> Molecule:
    """Replace aromatic bonds with an alternating single/double assignment.

    Atoms keep a `was_aromatic` flag. Raises SmilesError with a
    kekulization_failure diagnostic when the aromatic system is not a valid
    five/six-ring system or admits no perfect matching.
    """
    aromatic_atoms = {i for i, a in enumerate(mol.atoms) if a.aromatic}
    if not aromatic_atoms:
        return mol

    covered: set[int] = set()
    for ring in mol.sssr():
        if len(ring) in (5, 6) and all(mol.atoms[i].aromatic for i in ring):
            covered.update(ring)
    stray = aromatic_atoms - covered
    if stray:
        i = min(stray, key=lambda k: mol.atoms[k].offset)
        raise SmilesError(ParseDiagnostic(
            "kekulization_failure", mol.atoms[i].offset,
            "aromatic atom outside any five/six-membered aromatic ring"))

    needs: set[int] = set()
    for i in aromatic_atoms:
        state = _aromatic_valence_state(mol, i)
        if state == -1:
            raise SmilesError(ParseDiagnostic(
                "kekulization_failure", mol.atoms[i].offset,
                f"aromatic {mol.atoms[i].element} atom has no consistent valence"))
        if state == 1:
            needs.add(i)

    # matching edges: aromatic ring bonds between two atoms that need a double
    ring_bonds = mol.ring_bonds
    adj: dict[int, list[int]] = {i: [] for i in needs}
    for bi, bond in enumerate(mol.bonds):
        if bond.order == AROMATIC and bi in ring_bonds \
                and bond.a in needs and bond.b in needs:
            adj[bond.a].append(bond.b)
            adj[bond.b].append(bond.a)
    match = _perfect_matching(needs, adj)
    if match is None:
        i = min(needs, key=lambda k: mol.atoms[k].offset)
        raise SmilesError(ParseDiagnostic(
            "kekulization_failure", mol.atoms[i].offset,
            "no alternating single/double assignment for the aromatic system"))

    new_bonds = []
    for bond in mol.bonds:
        if bond.order == AROMATIC:
            order = DOUBLE if match.get(bond.a) == bond.b else SINGLE
            new_bonds.append(Bond(bond.a, bond.b, order, bond.direction, bond.stereo))
        else:
            new_bonds.append(Bond(bond.a, bond.b, bond.order, bond.direction, bond.stereo))
    new_atoms = [
        Atom(element=a.element, aromatic=False, isotope=a.isotope, charge=a.charge,
             explicit_h=a.explicit_h, chirality=a.chirality, implicit_h=a.implicit_h,
             offset=a.offset, was_aromatic=a.was_aromatic or a.aromatic,
             chiral_neighbors=list(a.chiral_neighbors) if a.chiral_neighbors else None)
        for a in mol.atoms
    ]
    return Molecule(new_atoms, new_bonds, structure_from=mol)


def _perfect_matching(nodes: set[int], adj: dict[int, list[int]]) -> dict[int, int] | None:
    """Backtracking perfect matching; aromatic systems are small."""
    if not nodes:
        return {}
    if len(nodes) % 2:
        return None
    match: dict[int, int] = {}
    for nbrs in adj.values():
        nbrs.sort()

    def bt(remaining: frozenset[int]) -> bool:
        if not remaining:
            return True
        u = min(remaining)
        for v in adj[u]:
            if v in remaining:
                match[u] = v
                match[v] = u
                if bt(remaining - {u, v}):
                    return True
                del match[u], match[v]
        return False

    return match if bt(frozenset(nodes)) else None


def _lone_pair_donor(mol: Molecule, i: int) -> bool:
    atom = mol.atoms[i]
    if atom.element not in _DONOR_ELEMENTS and not (atom.element == "C" and atom.charge == -1):
        return False
    if not all(mol.bonds[bi].order == SINGLE for _, bi in mol.neighbors(i)):
        return False
    allowed = allowed_valences(atom.element, atom.charge)
    if allowed is None:
        return True  # unconstrained element (e.g. Se) with sigma-only bonding
    return mol.sigma_valence(i) + atom.total_h in allowed


def rearomatize(mol: Molecule) -> Molecule:
    """Mark qualifying Kekule rings aromatic so both spellings unify.

    A five/six-membered SSSR ring qualifies if every atom either donates a
    lone pair or has exactly one double bond lying on a ring bond, and the
    ring's pi-electron count is 2 mod 4.
    """
    if not any(b.order == DOUBLE for b in mol.bonds) and \
            not any(_lone_pair_donor(mol, i) for i in mol.ring_atoms):
        return mol
    ring_bond_ids = mol.ring_bonds
    accepted: list[list[int]] = []
    for ring in mol.sssr():
        if len(ring) not in (5, 6):
            continue
        pi = 0
        ok = True
        for i in ring:
            doubles = [bi for _, bi in mol.neighbors(i) if mol.bonds[bi].order == DOUBLE]
            if len(doubles) == 1 and doubles[0] in ring_bond_ids:
                pi += 1
            elif not doubles and not any(mol.bonds[bi].order == TRIPLE
                                         for _, bi in mol.neighbors(i)) \
                    and _lone_pair_donor(mol, i):
                pi += 2
            else:
                ok = False
                break
        if ok and pi % 4 == 2:
            accepted.append(ring)
    if not accepted:
        return mol

    aromatic_atoms: set[int] = set()
    aromatic_bonds: set[int] = set()
    for ring in accepted:
        aromatic_atoms.update(ring)
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            bond = mol.bond_between(a, b)
            assert bond is not None
            aromatic_bonds.add(mol._bond_index[bond.key])

    new_bonds = []
    for bi, bond in enumerate(mol.bonds):
        if bi in aromatic_bonds:
            new_bonds.append(Bond(bond.a, bond.b, AROMATIC, bond.direction, None))
        else:
            new_bonds.append(Bond(bond.a, bond.b, bond.order, bond.direction, bond.stereo))
    new_atoms = [
        Atom(element=a.element, aromatic=i in aromatic_atoms, isotope=a.isotope,
             charge=a.charge, explicit_h=a.explicit_h, chirality=a.chirality,
             implicit_h=a.implicit_h, offset=a.offset, was_aromatic=a.was_aromatic,
             chiral_neighbors=list(a.chiral_neighbors) if a.chiral_neighbors else None)
        for i, a in enumerate(mol.atoms)
    ]
    return Molecule(new_atoms, new_bonds, structure_from=mol)


def normalize(mol: Molecule) -> Molecule:
    """Kekulize then re-aromatize: the normal form used for canonical output.

    If the restored aromatic form would not kekulize again (possible for
    unusual fused assignments), the Kekule form is kept so canonical output
    always re-parses as valid.
    """
    kek = kekulize(mol)
    rearom = rearomatize(kek)
    if rearom is kek:
        return kek
    if _aromatic_signature(rearom) == _aromatic_signature(mol):
        return rearom  # restored exactly the input assignment, already proven
    try:
        kekulize(rearom)
    except SmilesError:
        return kek
    return rearom


def _aromatic_signature(mol: Molecule) -> tuple[frozenset[int], frozenset[tuple[int, int]]]:
    return (
        frozenset(i for i, a in enumerate(mol.atoms) if a.aromatic),
        frozenset(b.key for b in mol.bonds if b.order == AROMATIC),
    )


def validate(mol: Molecule) -> list[ParseDiagnostic]:
    """Check the valence model and kekulizability; empty list means valid."""
    diags: list[ParseDiagnostic] = []
    check_mol = mol
    try:
        check_mol = kekulize(mol)
    except SmilesError as err:
        diags.append(err.diagnostic)
    for i, atom in enumerate(check_mol.atoms):
        if check_mol is mol and atom.aromatic:
            continue  # kekulization failed; aromatic valences are unresolved
        allowed = allowed_valences(atom.element, atom.charge)
        if allowed is None:
            continue
        total = check_mol.sigma_valence(i, aromatic_as=1) + atom.total_h
        if total not in allowed:
            diags.append(ParseDiagnostic(
                "valence_violation", atom.offset,
                f"atom {i} ({atom.element}{atom.charge:+d}) has valence {total}, "
                f"allowed {sorted(allowed)}" if atom.charge else
                f"atom {i} ({atom.element}) has valence {total}, allowed {sorted(allowed)}"))
    return diags
