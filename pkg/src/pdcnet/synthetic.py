"""Synthetic PDC records for tests, demos and the acceptance suite.

Components are drawn from small pools of real linker / payload structures and
random standard-residue peptides; nothing here resembles the benchmark data.
"""

from __future__ import annotations

from .chem import smiles_fingerprint
from .dataset import ActivityMeasurement, PdcRecord, STATUSES
from .peptide import ALPHABET
from .rng import Rng

PAYLOADS = {
    "doxorubicin": "COc1cccc2C(=O)c3c(O)c4CC(O)(CC(OC5CC(N)C(O)C(C)O5)c4c(O)c3C(=O)c12)C(=O)CO",
    "camptothecin": "CCC1(O)C(=O)OCc2c1cc1-c3nc4ccccc4cc3Cn1c2=O",
    "sn38": "CCc1c2Cn3c(cc4c(c3=O)COC(=O)C4(O)CC)-c2nc2ccc(O)cc12",
    "gemcitabine": "NC1=NC(=O)N(C=C1)C1OC(CO)C(O)C1(F)F",
    "fluorouracil": "O=c1[nH]cc(F)c(=O)[nH]1",
    "methotrexate": "CN(Cc1cnc2nc(N)nc(N)c2n1)c1ccc(cc1)C(=O)NC(CCC(=O)O)C(=O)O",
    "chlorambucil": "OC(=O)CCCc1ccc(cc1)N(CCCl)CCCl",
    "lonidamine": "OC(=O)c1nn(Cc2ccc(Cl)cc2Cl)c2ccccc12",
    "pomalidomide": "Nc1cccc2C(=O)N(C3CCC(=O)NC3=O)C(=O)c12",
    "podophyllotoxin": "COc1cc(cc(OC)c1OC)C1C2C(COC2=O)C(O)c2cc3OCOc3cc12",
    "combretastatin": "COc1ccc(C=Cc2cc(OC)c(OC)c(OC)c2)cc1O",
    "paclitaxel_core": "CC(=O)OC1C(=O)C2(C)C(O)CC3OCC3(OC(C)=O)C2C(OC(=O)c2ccccc2)C2(O)CC(O)C(C)=C1C2(C)C",
}

LINKERS = {
    "glutaryl": "O=C(O)CCCC(=O)O",
    "succinyl": "O=C(O)CCC(=O)O",
    "disulfide": "NCCSSCCC(=O)O",
    "succinimidyl_thioether": "O=C(O)CCN1C(=O)CC(SC)C1=O",
    "peg2": "NCCOCCOCC(=O)O",
    "ester": "OCC(=O)O",
    "hydrazone": "CC(=NNC(=O)CCC(=O)O)c1ccccc1",
    "val_cit_pab": "CC(C)C(N)C(=O)NC(CCCNC(N)=O)C(=O)Nc1ccc(CO)cc1",
}


def payload_label(smiles: str) -> int:
    """Deterministic label from the payload fingerprint: 1 iff bit 0 of the popcount is set."""
    return smiles_fingerprint(smiles).popcount() % 2


def random_peptide(rng: Rng, lo: int = 3, hi: int = 16) -> str:
    n = lo + rng.below(hi - lo + 1)
    return "".join(ALPHABET[rng.below(20)] for _ in range(n))


def payload_function_dataset(n: int = 60, seed: int = 7) -> list[PdcRecord]:
    """Labeled records whose label depends only on the payload fingerprint."""
    rng = Rng(seed)
    names = sorted(PAYLOADS)
    linkers = sorted(LINKERS)
    out = []
    for i in range(n):
        payload = PAYLOADS[names[i % len(names)]]
        out.append(
            PdcRecord(
                id=f"syn{i:04d}",
                peptide=random_peptide(rng),
                linker_smiles=LINKERS[linkers[rng.below(len(linkers))]],
                payload_smiles=payload,
                label=payload_label(payload),
            )
        )
    return out


def raw_records(n: int, seed: int = 0) -> list[PdcRecord]:
    """Unlabeled raw records with mixed statuses and 0-3 measurements in mixed units."""
    rng = Rng(seed)
    payloads, linkers = sorted(PAYLOADS.values()), sorted(LINKERS.values())
    units = ("pM", "nM", "uM", "M")
    scale = {"pM": 1e6, "nM": 1e3, "uM": 1.0, "M": 1e-6}
    out = []
    for i in range(n):
        status = "investigational" if rng.random() < 0.9 else STATUSES[rng.below(5)]
        ms = []
        for _ in range(rng.below(4)):
            um = 10 ** (rng.random() * 4 - 2.5)
            unit = units[rng.below(4)]
            ms.append(ActivityMeasurement(("IC50", "EC50", "GI50")[rng.below(3)], um * scale[unit], unit))
        out.append(
            PdcRecord(
                id=f"raw{i:05d}",
                peptide=random_peptide(rng, 2, 30),
                linker_smiles=linkers[rng.below(len(linkers))],
                payload_smiles=payloads[rng.below(len(payloads))],
                measurements=tuple(ms),
                status=status,
            )
        )
    return out
