"""Parse, validate, canonicalize, and re-render SMILES strings."""

from chemtext import (
    canonical_equal, canonical_smiles, parse_smiles, randomize_smiles, validate,
)

# Two spellings of ethanol parse into isomorphic graphs and share one
# canonical string.
for spelling in ("CCO", "OCC", "C(O)C"):
    mol = parse_smiles(spelling)
    print(f"{spelling:>8} -> canonical {canonical_smiles(mol)}")

# Aromatic and Kekule benzene unify through kekulization + restoration.
print("benzene spellings equal:", canonical_equal("c1ccccc1", "C1=CC=CC=C1"))

# Validation returns diagnostics as data; nothing is raised.
bad = parse_smiles("C(C)(C)(C)(C)C")
for diag in validate(bad):
    print("diagnostic:", diag)

# A seeded random rendering is a different string for the same molecule;
# canonicalization collapses them all.
mol = parse_smiles("CC(=O)Nc1ccc(O)cc1")  # paracetamol
renderings = {randomize_smiles(mol, seed) for seed in range(8)}
print(f"{len(renderings)} distinct renderings, e.g.:")
for r in sorted(renderings)[:4]:
    print("  ", r)
print("all collapse to:", canonical_smiles(mol))

# Stereochemistry is preserved and compared strictly by default.
print("E/Z differ:", not canonical_equal("F/C=C/F", "F/C=C\\F"))
print("ignoring stereo:", canonical_equal("F/C=C/F", "F/C=C\\F", ignore_stereo=True))
