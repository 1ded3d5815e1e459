"""Regenerate the bundled 1k-SMILES corpus (src/chemtext/data/corpus_1k.smi).

Molecules are assembled from curated ring scaffolds and substituents with a
fixed seed, then screened: every emitted string must parse, validate, and
canonicalize identically across ten random renderings. Failures abort so
algorithmic regressions are caught here rather than in the corpus.
"""

import random
import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from chemtext import canonical_smiles, parse_smiles, randomize_smiles, validate

# {0}/{1} are substituent slots; digits are ring closures local to the template
SCAFFOLDS = [
    "c1ccc({0})cc1",
    "c1ccc({0})c({1})c1",
    "c1cc({0})cc({1})c1",
    "c1ccnc({0})c1",
    "c1ccc({0})nc1",
    "c1cncnc1{0}",
    "c1csc({0})c1",
    "c1coc({0})c1",
    "c1cc({0})[nH]c1",
    "c1cn({0})cn1",
    "c1ccc2ccccc2c1",
    "c1ccc2[nH]ccc2c1",
    "c1ccc2ncccc2c1",
    "C1CCC({0})CC1",
    "C1CCN({0})CC1",
    "C1CCOC1{0}",
    "C1CN({0})CCN1{1}",
    "C1CCN(C1)C(=O){0}",
    "O=C1CCCN1{0}",
    "C1COCCN1{0}",
    "C1CCSC1",
    "c1ccc(-c2ccccc2{0})cc1",
    "c1ccc(Cc2ccccc2{0})cc1",
    "c1ccc(Oc2ccccc2)cc1{0}",
    "c1ccc(N({0})c2ccccc2)cc1",
    "O=C(Nc1ccccc1{0})c1ccccc1",
    "O=C(N{0})c1ccccc1",
    "O=S(=O)(N{0})c1ccccc1",
    "c1ccc2c(c1)OCO2",
    "c1ccc2c(c1)CCC2{0}",
    "c1ccc2c(c1)cccc2{0}",
    "c1nc2ccccc2[nH]1",
    "c1nc2ccccc2n1{0}",
    "c1ccc(-c2nc3ccccc3[nH]2)cc1",
    "c1ccc(-c2ccc({0})cc2)cc1",
    "C(c1ccccc1)N1CCC({0})CC1",
]

GROUPS = [
    "", "", "", "C", "C", "CC", "CCC", "C(C)C", "C(C)(C)C",
    "O", "OC", "OCC", "N", "NC", "N(C)C", "NCC",
    "F", "F", "Cl", "Cl", "Br", "I",
    "C(=O)O", "C(=O)OC", "C(=O)N", "C(=O)NC", "C(=O)C",
    "C#N", "C#CC", "C=C",
    "S(=O)(=O)C", "S(=O)(=O)N", "SC",
    "C(F)(F)F", "OC(F)(F)F",
    "CCO", "CCN", "CN", "CO", "COC", "CCOC",
    "NC(=O)C", "NC(C)=O", "OC(=O)C",
    "[N+](=O)[O-]",
    "C(=O)[O-]",
    "[C@H](C)O", "[C@@H](C)N", "[C@H](N)C(=O)O",
    "/C=C/C", "/C=C/C(=O)O",
    "[13CH3]", "[2H]",
    "CN1CCOCC1", "N1CCOCC1", "N1CCNCC1", "CC1CC1",
]

CURATED_SEEDS = [
    "CC(C)(C)NC(=O)CN1CCC(C(=O)Nc2cccc(-c3nc4ccccc4n3Cc3ccccc3)c2)CC1",
    "O=C(NC1CCN(Cc2ccccc2)CC1)c1c(Cl)cccc1[N+](=O)[O-]",
    "C1=CC(=CC=C1C[C@H](C(=O)[O-])N)O",
    "CC1C2CCC(C2)C1CN(CCO)C(=O)c1ccc(Cl)cc1",
    "CC(=O)c1cc2c(cc1)Sc1ccccc1N2C[C@@H](C)N(C)C",
    "C(=C(Cl)Cl)(Cl)Cl",
    "C#Cc1ccc(C=O)cc1",
    "COC(=O)c1c(F)cc(NC(=O)c2cc(C(C)C)c(C(C)C)s2)cc1F",
    "CC(C)c1c(C(C)C)sc(C(=O)Nc2cc(F)c(C(=O)O)c(F)c2)c1",
    "Cc1ccc(-c2ccccc2N)cc1",
    "Cc1ccc(B(O)O)cc1",
    "Nc1ccccc1I",
    "OCC2OC(Oc1ccccc1CO)C(O)C(O)C2O",
    "COc1cc(c(c(c1O)OC)Cl)C=O",
    "O=C1OC2C3CC1OC32",
    "COc1cc(OC)c(cc1NC(=O)CCC(=O)O)S(=O)(=O)NCc2ccccc2N3CCCCC3",
    "CN(C)[C@H]1[C@@H]2C[C@H]3C(=C(O)c4c(O)cccc4[C@@]3(C)O)C(=O)[C@]2(O)C(=O)C(=C(O)NCN5CCCC5)C1=O",
    "S(=O)(=O)(CCCCC)C[C@@H](NC(=O)c1cccnc1)C(=O)N[C@H]([C@H](O)C[NH2+]Cc1cc(ccc1)CC)Cc1cc(F)cc(F)c1",
]


def shift_digits(smiles: str, base: int) -> str:
    return re.sub(r"\d", lambda m: str(int(m.group(0)) + base), smiles)


def assemble(rng: random.Random) -> str:
    scaffold = rng.choice(SCAFFOLDS)
    slots = scaffold.count("{")
    args = []
    for k in range(slots):
        if rng.random() < 0.12:
            inner = rng.choice(SCAFFOLDS)
            inner = inner.format(*[""] * inner.count("{")) if inner.count("{") else inner
            args.append(shift_digits(inner, 4))
        else:
            args.append(rng.choice(GROUPS))
    return scaffold.format(*args) if slots else scaffold


def screened(smiles: str) -> str | None:
    try:
        mol = parse_smiles(smiles)
    except Exception:
        return None
    if validate(mol):
        return None
    if mol.heavy_atom_count() > 45:
        return None
    canon = canonical_smiles(mol)
    for seed in range(10):
        rendering = randomize_smiles(mol, seed)
        if canonical_smiles(parse_smiles(rendering)) != canon:
            raise AssertionError(
                f"canonical invariance broken for {smiles!r} via {rendering!r}")
    return canon


def main() -> None:
    rng = random.Random(20240901)
    out: list[str] = []
    seen: set[str] = set()
    for smi in CURATED_SEEDS:
        canon = screened(smi)
        if canon is None:
            raise AssertionError(f"curated seed failed screening: {smi}")
        if canon not in seen:
            seen.add(canon)
            out.append(smi)
    attempts = 0
    while len(out) < 1000:
        attempts += 1
        if attempts > 200000:
            raise AssertionError("generator stalled")
        smi = assemble(rng)
        canon = screened(smi)
        if canon is None or canon in seen:
            continue
        seen.add(canon)
        out.append(smi)
    dest = Path(__file__).resolve().parents[1] / "src" / "chemtext" / "data" / "corpus_1k.smi"
    dest.write_text("\n".join(out) + "\n", encoding="utf-8")
    sizes = [parse_smiles(s).heavy_atom_count() for s in out]
    print(f"wrote {len(out)} molecules to {dest}")
    print(f"heavy atoms: min {min(sizes)} mean {sum(sizes)/len(sizes):.1f} max {max(sizes)}")


if __name__ == "__main__":
    main()
