"""Fingerprints, Tanimoto similarity, scaffolds, fragments, descriptors."""

from chemtext import (
    descriptor_vector, fragment_molecule, morgan_fingerprint, murcko_scaffold,
    normalize, parse_smiles, scaffold_smiles, tanimoto,
)
from chemtext.descriptors import DESCRIPTOR_NAMES

aspirin = normalize(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"))
paracetamol = normalize(parse_smiles("CC(=O)Nc1ccc(O)cc1"))
caffeine = normalize(parse_smiles("Cn1cnc2c1c(=O)n(C)c(=O)n2C"))

fp_a = morgan_fingerprint(aspirin)
fp_p = morgan_fingerprint(paracetamol)
print(f"aspirin fingerprint: {fp_a.popcount} bits set of {fp_a.width}")
print(f"tanimoto(aspirin, paracetamol) = {tanimoto(fp_a, fp_p):.3f}")
print(f"tanimoto(aspirin, aspirin)     = {tanimoto(fp_a, fp_a):.3f}")

# The ring framework with side chains removed.
print("aspirin scaffold:     ", scaffold_smiles(aspirin))
print("paracetamol scaffold: ", scaffold_smiles(paracetamol))

# Fragment multiset from the reduced cutting rules (ring attachments,
# amide C-N, ester C-O).
print("paracetamol fragments:")
for frag, count in sorted(fragment_molecule(paracetamol).items()):
    print(f"  {count} x {frag}")

# Twelve interpretable descriptors; the feature space behind the
# distribution-distance metric.
vec = descriptor_vector(aspirin)
for name, value in zip(DESCRIPTOR_NAMES, vec):
    print(f"  {name:>18} = {value:g}")
