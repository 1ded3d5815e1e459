"""SMILES parser producing an explicit molecular graph.

The accepted grammar covers organic-subset atoms, aromatic lowercase forms,
bracket atoms `[isotope? symbol chirality? Hcount? charge?]`, bond symbols
`- = # : / \\`, branches, ring closures (digits and %nn), and the fragment
separator `.`. Parsing is purely syntactic; chemistry checks live in
`validate` and `kekulize`.
"""

from __future__ import annotations

from .molgraph import (
    AROMATIC, DIR_DOWN, DIR_NONE, DIR_UP, DOUBLE, H_SENTINEL, SINGLE, TRIPLE,
    Atom, Bond, Molecule, ParseDiagnostic, SmilesError, derive_implicit_h,
)
from .periodic import BARE_AROMATIC, ELEMENTS

_BOND_CHARS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}
_DIR_CHARS = {"/": DIR_UP, "\\": DIR_DOWN}
_TWO_CHAR_ORGANIC = ("Cl", "Br")
_ONE_CHAR_ORGANIC = frozenset("BCNOPSFI")
_BRACKET_AROMATIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P",
                     "s": "S", "se": "Se", "as": "As"}


def _fail(kind: str, position: int, message: str) -> None:
    raise SmilesError(ParseDiagnostic(kind, position, message))


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string, raising SmilesError with a diagnostic on failure.

    The returned molecule carries aromatic flags exactly as written and has
    implicit hydrogen counts derived for bare atoms. No valence or
    kekulization checking is performed here.
    """
    if text == "":
        _fail("empty_input", 0, "empty SMILES string")
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    bond_seen: set[tuple[int, int]] = set()
    prev: int | None = None
    branch_stack: list[tuple[int, int]] = []  # (atom index, '(' offset)
    pending_order: int | None = None
    pending_dir = DIR_NONE
    pending_pos = 0
    # open ring digits: digit -> (atom, order-or-None, direction, digit offset)
    open_rings: dict[int, tuple[int, int | None, int, int]] = {}

    def add_atom(atom: Atom) -> int:
        atoms.append(atom)
        return len(atoms) - 1

    def add_bond(a: int, b: int, order: int, direction: int, pos: int) -> None:
        key = (a, b) if a < b else (b, a)
        if key in bond_seen:
            _fail("lex_error", pos, f"duplicate bond between atoms {a} and {b}")
        bond_seen.add(key)
        bonds.append(Bond(a, b, order, direction))

    def attach(new_idx: int, pos: int) -> None:
        nonlocal pending_order, pending_dir
        if prev is not None:
            if pending_order is not None:
                order = pending_order
            elif atoms[prev].aromatic and atoms[new_idx].aromatic:
                order = AROMATIC
            else:
                order = SINGLE
            add_bond(prev, new_idx, order, pending_dir, pos)
            if atoms[prev].chiral_neighbors is not None:
                atoms[prev].chiral_neighbors.append(new_idx)
            if atoms[new_idx].chiral_neighbors is not None:
                # the preceding atom comes before the in-bracket H
                atoms[new_idx].chiral_neighbors.insert(0, prev)
        pending_order = None
        pending_dir = DIR_NONE

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "(":
            if prev is None:
                _fail("lex_error", i, "branch start before any atom")
            if pending_order is not None or pending_dir != DIR_NONE:
                _fail("lex_error", i, "bond symbol before branch start")
            branch_stack.append((prev, i))
            i += 1
        elif ch == ")":
            if not branch_stack:
                _fail("unmatched_paren", i, "unmatched ')'")
            if pending_order is not None or pending_dir != DIR_NONE:
                _fail("lex_error", i, "dangling bond before ')'")
            prev, _ = branch_stack.pop()
            i += 1
        elif ch == ".":
            if branch_stack:
                _fail("lex_error", i, "fragment separator inside branch")
            if pending_order is not None or pending_dir != DIR_NONE:
                _fail("lex_error", i, "bond symbol before fragment separator")
            if prev is None:
                _fail("lex_error", i, "unexpected fragment separator")
            prev = None
            i += 1
        elif ch in _BOND_CHARS or ch in _DIR_CHARS:
            if pending_order is not None or pending_dir != DIR_NONE:
                _fail("lex_error", i, "two consecutive bond symbols")
            if prev is None:
                _fail("lex_error", i, "bond symbol before any atom")
            if ch in _BOND_CHARS:
                pending_order = _BOND_CHARS[ch]
            else:
                pending_order = SINGLE
                pending_dir = _DIR_CHARS[ch]
            pending_pos = i
            i += 1
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                if i + 2 >= n or not (text[i + 1].isdigit() and text[i + 2].isdigit()):
                    _fail("lex_error", i, "% ring closure needs two digits")
                digit = int(text[i + 1 : i + 3])
                width = 3
            else:
                digit = int(ch)
                width = 1
            if prev is None:
                _fail("lex_error", i, "ring closure before any atom")
            if digit in open_rings:
                other, other_order, other_dir, other_pos = open_rings.pop(digit)
                if other == prev:
                    _fail("lex_error", i, f"ring closure {digit} bonds an atom to itself")
                order: int | None
                if pending_order is not None and other_order is not None:
                    if pending_order != other_order:
                        _fail("lex_error", i, f"ring closure {digit} bond symbols disagree")
                    order = pending_order
                else:
                    order = pending_order if pending_order is not None else other_order
                if order is None:
                    order = AROMATIC if atoms[prev].aromatic and atoms[other].aromatic else SINGLE
                # geometry markers on ring-closure bonds are not preserved
                add_bond(other, prev, order, DIR_NONE, i)
                if atoms[other].chiral_neighbors is not None:
                    slots = atoms[other].chiral_neighbors
                    slots[slots.index(-(digit + 2))] = prev
                if atoms[prev].chiral_neighbors is not None:
                    atoms[prev].chiral_neighbors.append(other)
            else:
                open_rings[digit] = (prev, pending_order, pending_dir, i)
                if atoms[prev].chiral_neighbors is not None:
                    # placeholder resolved when the ring closes
                    atoms[prev].chiral_neighbors.append(-(digit + 2))
            pending_order = None
            pending_dir = DIR_NONE
            i += width
        elif ch == "[":
            atom, width = _parse_bracket_atom(text, i)
            idx = add_atom(atom)
            attach(idx, i)
            prev = idx
            i += width
        else:
            atom, width = _parse_bare_atom(text, i)
            idx = add_atom(atom)
            attach(idx, i)
            prev = idx
            i += width

    if pending_order is not None or pending_dir != DIR_NONE:
        _fail("lex_error", pending_pos, "dangling bond at end of input")
    if open_rings:
        digit, (_, _, _, pos) = min(open_rings.items(), key=lambda kv: kv[1][3])
        _fail("unclosed_ring", pos, f"ring closure {digit} never closed")
    if branch_stack:
        _fail("unmatched_paren", branch_stack[-1][1], "unmatched '('")

    mol = Molecule(atoms, bonds)
    derive_implicit_h(mol)
    _derive_double_bond_stereo(mol)
    return mol


def _parse_bare_atom(text: str, i: int) -> tuple[Atom, int]:
    two = text[i : i + 2]
    if two in _TWO_CHAR_ORGANIC:
        return Atom(element=two, offset=i), 2
    ch = text[i]
    if ch in _ONE_CHAR_ORGANIC:
        return Atom(element=ch, offset=i), 1
    if ch in BARE_AROMATIC:
        return Atom(element=ch.upper(), aromatic=True, offset=i), 1
    _fail("lex_error", i, f"unexpected character {ch!r}")
    raise AssertionError  # unreachable


def _parse_bracket_atom(text: str, start: int) -> tuple[Atom, int]:
    i = start + 1
    n = len(text)

    def need(pos: int) -> None:
        if pos >= n:
            _fail("lex_error", start, "unterminated bracket atom")

    need(i)
    isotope = None
    j = i
    while j < n and text[j].isdigit():
        j += 1
    if j > i:
        isotope = int(text[i:j])
        i = j
    need(i)

    aromatic = False
    element = None
    two = text[i : i + 2]
    if two in _BRACKET_AROMATIC and two in ("se", "as"):
        element, aromatic = _BRACKET_AROMATIC[two], True
        i += 2
    elif two[:1].isupper() and len(two) == 2 and two[1].islower() and two in ELEMENTS:
        element = two
        i += 2
    elif text[i].isupper() and text[i] in ELEMENTS:
        element = text[i]
        i += 1
    elif text[i] in _BRACKET_AROMATIC:
        element, aromatic = _BRACKET_AROMATIC[text[i]], True
        i += 1
    else:
        _fail("lex_error", i, f"unknown element symbol at {i}")
    need(i)

    chirality = ""
    if text[i] == "@":
        if i + 1 < n and text[i + 1] == "@":
            chirality = "@@"
            i += 2
        else:
            chirality = "@"
            i += 1
        need(i)

    explicit_h = 0
    if text[i] == "H":
        i += 1
        need(i)
        j = i
        while j < n and text[j].isdigit():
            j += 1
        explicit_h = int(text[i:j]) if j > i else 1
        i = j
        need(i)

    charge = 0
    if text[i] in "+-":
        sign = 1 if text[i] == "+" else -1
        symbol = text[i]
        i += 1
        need(i)
        if text[i].isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            charge = sign * int(text[i:j])
            i = j
        else:
            charge = sign
            while i < n and text[i] == symbol:
                charge += sign
                i += 1
        need(i)

    if text[i] != "]":
        _fail("lex_error", i, f"expected ']' in bracket atom, found {text[i]!r}")
    atom = Atom(
        element=element,
        aromatic=aromatic,
        isotope=isotope,
        charge=charge,
        explicit_h=explicit_h,
        chirality=chirality,
        offset=start,
    )
    if chirality:
        atom.chiral_neighbors = [H_SENTINEL] if explicit_h >= 1 else []
    return atom, i + 1 - start


def _derive_double_bond_stereo(mol: Molecule) -> None:
    """Turn directional single bonds into same-side constraints on doubles.

    For each double bond u=v with a directional single bond on both ends the
    first marked substituent on each side is recorded along with whether the
    two lie on the same side. Conflicting markers around one center drop that
    bond's geometry.
    """
    # side of `sub` relative to `center`: +1 above, -1 below, per marker
    sides: dict[tuple[int, int], int] = {}
    for bond in mol.bonds:
        if bond.direction == DIR_NONE or bond.order != SINGLE:
            continue
        # written a -> b with '/' puts b above a
        rel = 1 if bond.direction == DIR_UP else -1
        sides[(bond.b, bond.a)] = rel
        sides[(bond.a, bond.b)] = -rel
    if not sides:
        return
    for bond in mol.bonds:
        if bond.order != DOUBLE:
            continue
        u, v = bond.a, bond.b
        su = [(s, sides[(s, u)]) for s, _ in mol.neighbors(u) if (s, u) in sides and s != v]
        sv = [(t, sides[(t, v)]) for t, _ in mol.neighbors(v) if (t, v) in sides and t != u]
        if not su or not sv:
            continue
        if len(su) == 2 and su[0][1] == su[1][1]:
            continue  # contradictory markers; geometry dropped
        if len(sv) == 2 and sv[0][1] == sv[1][1]:
            continue
        (s, side_s), (t, side_t) = su[0], sv[0]
        bond.stereo = (s, t, side_s == side_t)
