"""Benchmark construction: ingestion, curation, labeling, splits and novelty scoring."""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from . import chem
from .peptide import PeptideError, PeptideSequence, peptide_similarity
from .rng import Rng

ASSAYS = ("IC50", "EC50", "GI50")
UNIT_TO_UM = {"pM": 1e-6, "nM": 1e-3, "uM": 1.0, "M": 1e6}
STATUSES = (
    "marketed",
    "clinical_phase_1",
    "clinical_phase_2",
    "clinical_phase_3",
    "preclinical_animal",
    "investigational",
)
STATUS_POSITIVE = frozenset(STATUSES[:5])
FIELDS = (
    "id",
    "peptide_sequence",
    "linker_smiles",
    "payload_smiles",
    "assay",
    "activity_value",
    "activity_unit",
    "status",
)

_UNIT_ALIASES = {"um": "uM", "μm": "uM", "µm": "uM", "nm": "nM", "pm": "pM", "m": "M", "mol/l": "M"}
_STATUS_ALIASES = {
    "approved": "marketed",
    "phase_1": "clinical_phase_1",
    "phase_2": "clinical_phase_2",
    "phase_3": "clinical_phase_3",
    "phase_i": "clinical_phase_1",
    "phase_ii": "clinical_phase_2",
    "phase_iii": "clinical_phase_3",
    "in_vivo": "preclinical_animal",
    "in_vivo_study": "preclinical_animal",
    "preclinical": "preclinical_animal",
}


class DataError(ValueError):
    """Input data that cannot be used (bad file, bad field, impossible split)."""


@dataclass(frozen=True)
class ActivityMeasurement:
    assay: str
    value: float
    unit: str

    def __post_init__(self):
        if self.assay not in ASSAYS:
            raise DataError(f"unknown assay {self.assay!r}")
        if self.unit not in UNIT_TO_UM:
            raise DataError(f"unknown unit {self.unit!r}")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise DataError(f"activity value must be positive, got {self.value}")


def normalize_activity(m: ActivityMeasurement) -> float:
    """Measurement value in μM."""
    return m.value * UNIT_TO_UM[m.unit]


def parse_activity_value(text) -> float:
    """Number from an activity field; ranges ("12.5-25") and bounds (">2") yield the lower number."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().replace("\u2212", "-").replace("\u2013", "-").replace("\u2014", "-")
    s = s.lstrip("<>=≤≥~≈ ")
    nums = re.findall(r"\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?", s)
    if not nums:
        raise DataError(f"unparseable activity value {text!r}")
    return min(float(x) for x in nums)


def normalize_unit(text: str) -> str:
    t = str(text).strip()
    if t in UNIT_TO_UM:
        return t
    try:
        return _UNIT_ALIASES[t.lower()]
    except KeyError:
        raise DataError(f"unknown activity unit {text!r}") from None


def normalize_status(text: str) -> str:
    t = re.sub(r"[\s\-]+", "_", str(text).strip().lower())
    if t in STATUSES:
        return t
    try:
        return _STATUS_ALIASES[t]
    except KeyError:
        raise DataError(f"unknown development status {text!r}") from None


def parse_bioactivity(text: str) -> tuple[ActivityMeasurement | None, str]:
    """Read a free-text bioactivity cell such as ``"IC50 = 12.5-25 μM"`` or ``"In vivo study"``.

    Returns the measurement (or None) and the implied development status.
    """
    t = text.strip()
    if re.search(r"in\s*vivo", t, re.I):
        return None, "preclinical_animal"
    m = re.match(r"\s*([A-Za-z]{2})\s*[_₅]?\s*(50|₅₀)\s*(.*)$", t)
    if not m:
        raise DataError(f"unrecognized bioactivity {text!r}")
    assay = m.group(1).upper() + "50"
    rest = m.group(3)
    um = re.search(r"(pM|nM|[uμµ]M|M)\s*$", rest)
    if not um:
        raise DataError(f"bioactivity without unit: {text!r}")
    value = parse_activity_value(rest[: um.start()])
    return ActivityMeasurement(assay, value, normalize_unit(um.group(1))), "investigational"


@dataclass(frozen=True)
class PdcRecord:
    id: str
    peptide: str
    linker_smiles: str
    payload_smiles: str
    measurements: tuple[ActivityMeasurement, ...] = ()
    status: str = "investigational"
    label: int | None = None
    defect: str | None = None  # reason code recorded at load time

    def min_activity_um(self) -> float | None:
        if not self.measurements:
            return None
        return min(normalize_activity(m) for m in self.measurements)

    def triple(self) -> tuple[str, str, str]:
        return tuple("".join(s.split()) for s in (self.peptide, self.linker_smiles, self.payload_smiles))


@dataclass
class CurationResult:
    records: list[PdcRecord]
    report: dict[str, str] = field(default_factory=dict)  # dropped id -> reason code


def curate(records: Iterable[PdcRecord]) -> CurationResult:
    """Dedup, completeness, standard residues, valid SMILES, μM units, minimum measurement."""
    kept: list[PdcRecord] = []
    report: dict[str, str] = {}
    seen: set[tuple[str, str, str]] = set()
    for r in records:
        key = r.triple()
        if key in seen:
            report[r.id] = "duplicate"
            continue
        seen.add(key)
        pep, linker, payload = key
        if r.defect:
            report[r.id] = r.defect
        elif not (pep and linker and payload):
            report[r.id] = "missing_component"
        else:
            try:
                PeptideSequence(pep)
            except PeptideError:
                report[r.id] = "non_standard_residue"
                continue
            for smi, reason in ((linker, "invalid_linker_smiles"), (payload, "invalid_payload_smiles")):
                try:
                    chem.parse_smiles(smi)
                except chem.SmilesError:
                    report[r.id] = reason
                    break
            else:
                ms = ()
                if r.measurements:
                    best = min(r.measurements, key=normalize_activity)
                    ms = (ActivityMeasurement(best.assay, normalize_activity(best), "uM"),)
                kept.append(replace(r, peptide=pep, linker_smiles=linker, payload_smiles=payload, measurements=ms))
    return CurationResult(kept, report)


def assign_label(r: PdcRecord, threshold_uM: float = 1.0) -> int:
    if r.status in STATUS_POSITIVE:
        return 1
    best = r.min_activity_um()
    if best is None:
        return 0
    return int(best <= threshold_uM)


def label_records(records: Iterable[PdcRecord], threshold_uM: float = 1.0) -> list[PdcRecord]:
    return [replace(r, label=assign_label(r, threshold_uM)) for r in records]


@dataclass(frozen=True)
class DataSplit:
    seed: int
    train: tuple[int, ...]
    val: tuple[int, ...]
    test: tuple[int, ...]
    stratified: bool = False

    @property
    def n(self) -> int:
        return len(self.train) + len(self.val) + len(self.test)

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "n": self.n,
                "stratified": self.stratified,
                "train": list(self.train),
                "val": list(self.val),
                "test": list(self.test),
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "DataSplit":
        d = json.loads(text)
        return cls(d["seed"], tuple(d["train"]), tuple(d["val"]), tuple(d["test"]), d.get("stratified", False))


def _split_sizes(n: int) -> tuple[int, int]:
    return n * 8 // 10, n // 10


def split(dataset: Sequence, seed: int, stratify: bool = False) -> DataSplit:
    """Seeded 8:1:1 split; train = floor(0.8 N), val = floor(0.1 N), test = the rest.

    With ``stratify`` the floor rule is applied within each label class.
    """
    n = len(dataset)
    if n < 10:
        raise DataError(f"need at least 10 records for an 8:1:1 split, got {n}")
    rng = Rng(seed)
    perm = rng.permutation(n)
    if not stratify:
        n_train, n_val = _split_sizes(n)
        return DataSplit(seed, tuple(perm[:n_train]), tuple(perm[n_train : n_train + n_val]), tuple(perm[n_train + n_val :]))
    train, val, test = [], [], []
    for cls in (0, 1):
        members = [i for i in perm if dataset[i].label == cls]
        n_train, n_val = _split_sizes(len(members))
        train += members[:n_train]
        val += members[n_train : n_train + n_val]
        test += members[n_train + n_val :]
    return DataSplit(seed, tuple(train), tuple(val), tuple(test), stratified=True)


def kfold(dataset: Sequence | int, k: int = 5, seed: int = 1) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(train, val) index pairs; fold sizes differ by at most one, larger folds first."""
    n = dataset if isinstance(dataset, int) else len(dataset)
    if k < 2:
        raise DataError("k must be at least 2")
    if n < k:
        raise DataError(f"cannot make {k} folds from {n} records")
    perm = Rng(seed).permutation(n)
    base, extra = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(perm[start : start + size])
        start += size
    out = []
    for i in range(k):
        train = tuple(x for j, f in enumerate(folds) if j != i for x in f)
        out.append((train, tuple(folds[i])))
    return out


@dataclass(frozen=True)
class SimilarityReport:
    max_peptide_sim: float
    max_linker_sim: float
    max_payload_sim: float
    harmonic_mean: float

    def as_dict(self) -> dict:
        return {
            "max_peptide_sim": self.max_peptide_sim,
            "max_linker_sim": self.max_linker_sim,
            "max_payload_sim": self.max_payload_sim,
            "harmonic_mean": self.harmonic_mean,
        }


def harmonic_mean(*values: float) -> float:
    """Harmonic mean; 0 if any component is 0."""
    if any(v <= 0 for v in values):
        return 0.0
    return len(values) / sum(1.0 / v for v in values)


class ReferenceSet:
    """Reference PDCs with ECFP4 fingerprints cached for repeated novelty queries."""

    def __init__(self, reference: Sequence[PdcRecord]):
        if not reference:
            raise DataError("reference set is empty")
        self.peptides = sorted({r.triple()[0] for r in reference})
        self.linker_fps = [chem.smiles_fingerprint(s) for s in sorted({r.triple()[1] for r in reference})]
        self.payload_fps = [chem.smiles_fingerprint(s) for s in sorted({r.triple()[2] for r in reference})]

    def score(self, query: PdcRecord) -> SimilarityReport:
        pep, linker, payload = query.triple()
        lfp = chem.smiles_fingerprint(linker)
        yfp = chem.smiles_fingerprint(payload)
        sp = max(peptide_similarity(pep, p) for p in self.peptides)
        sl = max(chem.tanimoto(lfp, f) for f in self.linker_fps)
        sy = max(chem.tanimoto(yfp, f) for f in self.payload_fps)
        return SimilarityReport(sp, sl, sy, harmonic_mean(sp, sl, sy))


def novelty_score(query: PdcRecord, reference: Sequence[PdcRecord]) -> SimilarityReport:
    return ReferenceSet(reference).score(query)


# ---------------------------------------------------------------- file I/O


def _rows_from_file(path: Path) -> list[dict]:
    if path.suffix in (".jsonl", ".ndjson", ".json"):
        with open(path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def records_from_rows(rows: Iterable[dict]) -> list[PdcRecord]:
    """Group rows by id (one row per measurement) into records, preserving first-seen order."""
    groups: dict[str, dict] = {}
    for lineno, row in enumerate(rows, start=1):
        if "id" not in row:
            raise DataError(f"row {lineno}: missing id field")
        rid = str(row["id"]).strip()
        g = groups.setdefault(
            rid,
            {
                "peptide": str(row.get("peptide_sequence") or ""),
                "linker": str(row.get("linker_smiles") or ""),
                "payload": str(row.get("payload_smiles") or ""),
                "status": row.get("status") or "investigational",
                "label": row.get("label"),
                "ms": [],
                "defect": None,
            },
        )
        value = row.get("activity_value")
        if value in (None, ""):
            continue
        try:
            g["ms"].append(
                ActivityMeasurement(
                    str(row.get("assay") or "IC50").strip().upper(),
                    parse_activity_value(value),
                    normalize_unit(row.get("activity_unit") or "uM"),
                )
            )
        except DataError:
            g["defect"] = "invalid_activity"
    out = []
    for rid, g in groups.items():
        defect = g["defect"]
        try:
            status = normalize_status(g["status"])
        except DataError:
            status, defect = "investigational", defect or "invalid_status"
        label = g["label"]
        label = None if label in (None, "") else int(float(label))
        out.append(PdcRecord(rid, g["peptide"], g["linker"], g["payload"], tuple(g["ms"]), status, label, defect))
    return out


def read_records(path) -> list[PdcRecord]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    rows = _rows_from_file(path)
    missing = [f for f in ("id", "peptide_sequence", "linker_smiles", "payload_smiles") if rows and f not in rows[0]]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
    return records_from_rows(rows)


def record_rows(records: Iterable[PdcRecord], with_label: bool = True) -> list[dict]:
    rows = []
    for r in records:
        base = {
            "id": r.id,
            "peptide_sequence": r.peptide,
            "linker_smiles": r.linker_smiles,
            "payload_smiles": r.payload_smiles,
        }
        ms = r.measurements or (None,)
        for m in ms:
            row = dict(base)
            row["assay"] = m.assay if m else ""
            row["activity_value"] = repr(m.value) if m else ""
            row["activity_unit"] = m.unit if m else ""
            row["status"] = r.status
            if with_label:
                row["label"] = "" if r.label is None else str(r.label)
            rows.append(row)
    return rows


def write_records(path, records: Iterable[PdcRecord], with_label: bool = True) -> None:
    path = Path(path)
    rows = record_rows(records, with_label)
    fields = list(FIELDS) + (["label"] if with_label else [])
    if path.suffix in (".jsonl", ".ndjson"):
        with open(path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
