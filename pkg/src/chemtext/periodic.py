"""Element tables: symbols, integer masses, and the valence model.

Masses are integer mass numbers of the most abundant isotope, which keeps
molecular weights deterministic across platforms. Isotope-labelled atoms
override the default with their written mass number.
"""

from __future__ import annotations

# symbol -> (atomic number, default integer mass)
ELEMENTS: dict[str, tuple[int, int]] = {
    "H": (1, 1), "He": (2, 4),
    "Li": (3, 7), "Be": (4, 9), "B": (5, 11), "C": (6, 12), "N": (7, 14),
    "O": (8, 16), "F": (9, 19), "Ne": (10, 20),
    "Na": (11, 23), "Mg": (12, 24), "Al": (13, 27), "Si": (14, 28),
    "P": (15, 31), "S": (16, 32), "Cl": (17, 35), "Ar": (18, 40),
    "K": (19, 39), "Ca": (20, 40), "Sc": (21, 45), "Ti": (22, 48),
    "V": (23, 51), "Cr": (24, 52), "Mn": (25, 55), "Fe": (26, 56),
    "Co": (27, 59), "Ni": (28, 58), "Cu": (29, 63), "Zn": (30, 64),
    "Ga": (31, 69), "Ge": (32, 74), "As": (33, 75), "Se": (34, 80),
    "Br": (35, 79), "Kr": (36, 84),
    "Rb": (37, 85), "Sr": (38, 88), "Y": (39, 89), "Zr": (40, 90),
    "Nb": (41, 93), "Mo": (42, 98), "Tc": (43, 98), "Ru": (44, 102),
    "Rh": (45, 103), "Pd": (46, 106), "Ag": (47, 107), "Cd": (48, 114),
    "In": (49, 115), "Sn": (50, 120), "Sb": (51, 121), "Te": (52, 130),
    "I": (53, 127), "Xe": (54, 132),
    "Cs": (55, 133), "Ba": (56, 138), "La": (57, 139), "Ce": (58, 140),
    "Pr": (59, 141), "Nd": (60, 142), "Pm": (61, 145), "Sm": (62, 152),
    "Eu": (63, 153), "Gd": (64, 158), "Tb": (65, 159), "Dy": (66, 164),
    "Ho": (67, 165), "Er": (68, 166), "Tm": (69, 169), "Yb": (70, 174),
    "Lu": (71, 175), "Hf": (72, 180), "Ta": (73, 181), "W": (74, 184),
    "Re": (75, 187), "Os": (76, 192), "Ir": (77, 193), "Pt": (78, 195),
    "Au": (79, 197), "Hg": (80, 202), "Tl": (81, 205), "Pb": (82, 208),
    "Bi": (83, 209), "Po": (84, 209), "At": (85, 210), "Rn": (86, 222),
    "Fr": (87, 223), "Ra": (88, 226), "Ac": (89, 227), "Th": (90, 232),
    "Pa": (91, 231), "U": (92, 238), "Np": (93, 237), "Pu": (94, 244),
    "Am": (95, 243), "Cm": (96, 247), "Bk": (97, 247), "Cf": (98, 251),
    "Es": (99, 252), "Fm": (100, 257), "Md": (101, 258), "No": (102, 259),
    "Lr": (103, 262), "Rf": (104, 267), "Db": (105, 268), "Sg": (106, 269),
    "Bh": (107, 270), "Hs": (108, 269), "Mt": (109, 278), "Ds": (110, 281),
    "Rg": (111, 282), "Cn": (112, 285), "Nh": (113, 286), "Fl": (114, 289),
    "Mc": (115, 290), "Lv": (116, 293), "Ts": (117, 294), "Og": (118, 294),
}

# Atoms writable without brackets, per the organic subset convention.
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})

# Elements that may carry an aromatic (lowercase) flag. `se` and `as` are
# bracket-only; the rest have bare lowercase forms.
AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S", "Se", "As"})
BARE_AROMATIC = frozenset({"b", "c", "n", "o", "p", "s"})

# Allowed total valences for neutral atoms. Elements absent from this table
# are unconstrained (validation skips them).
VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

HALOGENS = frozenset({"F", "Cl", "Br", "I"})


def atomic_number(symbol: str) -> int:
    return ELEMENTS[symbol][0]


def default_mass(symbol: str) -> int:
    return ELEMENTS[symbol][1]


def allowed_valences(symbol: str, charge: int = 0) -> tuple[int, ...] | None:
    """Valences permitted for an element at a given formal charge.

    A charge of magnitude m shifts each neutral valence by +/- m (e.g. [O-]
    admits valence 1, [N+] admits 4). Returns None for elements outside the
    valence table, which are accepted at any valence.
    """
    base = VALENCES.get(symbol)
    if base is None:
        return None
    if charge == 0:
        return base
    m = abs(charge)
    shifted = {v + m for v in base} | {v - m for v in base if v - m >= 0}
    return tuple(sorted(shifted))
