"""Per-residue peptide features and global-alignment peptide similarity."""

from __future__ import annotations

import math

import numpy as np

from . import _kernels

ALPHABET = "ACDEFGHIKLMNPQRSTVWY"
INDEX = {aa: i for i, aa in enumerate(ALPHABET)}
FEATURE_DIM = 65
POS_DIM = 20

# BLOSUM62 (NCBI), rows and columns in ALPHABET order.
# fmt: off
BLOSUM62 = np.array([
    [ 4,  0, -2, -1, -2,  0, -2, -1, -1, -1, -1, -2, -1, -1, -1,  1,  0,  0, -3, -2],
    [ 0,  9, -3, -4, -2, -3, -3, -1, -3, -1, -1, -3, -3, -3, -3, -1, -1, -1, -2, -2],
    [-2, -3,  6,  2, -3, -1, -1, -3, -1, -4, -3,  1, -1,  0, -2,  0, -1, -3, -4, -3],
    [-1, -4,  2,  5, -3, -2,  0, -3,  1, -3, -2,  0, -1,  2,  0,  0, -1, -2, -3, -2],
    [-2, -2, -3, -3,  6, -3, -1,  0, -3,  0,  0, -3, -4, -3, -3, -2, -2, -1,  1,  3],
    [ 0, -3, -1, -2, -3,  6, -2, -4, -2, -4, -3,  0, -2, -2, -2,  0, -2, -3, -2, -3],
    [-2, -3, -1,  0, -1, -2,  8, -3, -1, -3, -2,  1, -2,  0,  0, -1, -2, -3, -2,  2],
    [-1, -1, -3, -3,  0, -4, -3,  4, -3,  2,  1, -3, -3, -3, -3, -2, -1,  3, -3, -1],
    [-1, -3, -1,  1, -3, -2, -1, -3,  5, -2, -1,  0, -1,  1,  2,  0, -1, -2, -3, -2],
    [-1, -1, -4, -3,  0, -4, -3,  2, -2,  4,  2, -3, -3, -2, -2, -2, -1,  1, -2, -1],
    [-1, -1, -3, -2,  0, -3, -2,  1, -1,  2,  5, -2, -2,  0, -1, -1, -1,  1, -1, -1],
    [-2, -3,  1,  0, -3,  0,  1, -3,  0, -3, -2,  6, -2,  0,  0,  1,  0, -3, -4, -2],
    [-1, -3, -1, -1, -4, -2, -2, -3, -1, -3, -2, -2,  7, -1, -2, -1, -1, -2, -4, -3],
    [-1, -3,  0,  2, -3, -2,  0, -3,  1, -2,  0,  0, -1,  5,  1,  0, -1, -2, -2, -1],
    [-1, -3, -2,  0, -3, -2,  0, -3,  2, -2, -1,  0, -2,  1,  5, -1, -1, -3, -3, -2],
    [ 1, -1,  0,  0, -2,  0, -1, -2,  0, -2, -1,  1, -1,  0, -1,  4,  1, -2, -3, -2],
    [ 0, -1, -1, -1, -2, -2, -2, -1, -1, -1, -1,  0, -1, -1, -1,  1,  5,  0, -2, -2],
    [ 0, -1, -3, -2, -1, -3, -3,  3, -2,  1,  1, -3, -2, -2, -3, -2,  0,  4, -3, -1],
    [-3, -2, -4, -3,  1, -2, -2, -3, -3, -2, -1, -4, -4, -2, -3, -3, -2, -3, 11,  2],
    [-2, -2, -3, -2,  3, -3,  2, -1, -2, -1, -1, -2, -3, -1, -2, -2, -2, -1,  2,  7],
], dtype=np.float64)

# Z-scales z1..z5 (Sandberg et al., J. Med. Chem. 1998), ALPHABET order.
ZSCALES = np.array([
    [ 0.24, -2.32,  0.60, -0.14,  1.30],  # A
    [ 0.84, -1.67,  3.71,  0.18, -2.65],  # C
    [ 3.98,  0.93,  1.93, -2.46,  0.75],  # D
    [ 3.11,  0.26, -0.11, -3.04, -0.25],  # E
    [-4.22,  1.94,  1.06,  0.54, -0.62],  # F
    [ 2.05, -4.06,  0.36, -0.82, -0.38],  # G
    [ 2.47,  1.95,  0.26,  3.90,  0.09],  # H
    [-3.89, -1.73, -1.71, -0.84,  0.26],  # I
    [ 2.29,  0.89, -2.49,  1.49,  0.31],  # K
    [-4.28, -1.30, -1.49, -0.72,  0.84],  # L
    [-2.85, -0.22,  0.47,  1.94, -0.98],  # M
    [ 3.05,  1.62,  1.04, -1.15,  1.61],  # N
    [-1.66,  0.27,  1.84,  0.70,  2.00],  # P
    [ 1.75,  0.50, -1.44, -1.34,  0.66],  # Q
    [ 3.52,  2.50, -3.50,  1.99, -0.17],  # R
    [ 2.39, -1.07,  1.15, -1.39,  0.67],  # S
    [ 0.75, -2.18, -1.12, -1.46, -0.40],  # T
    [-2.59, -2.64, -1.54, -0.85, -0.02],  # V
    [-4.36,  3.94,  0.59,  3.44, -1.59],  # W
    [-2.54,  2.44,  0.43,  0.04, -1.47],  # Y
], dtype=np.float64)
# fmt: on


class PeptideError(ValueError):
    pass


class PeptideSequence(str):
    """A non-empty string over the 20 standard one-letter codes."""

    def __new__(cls, text: str):
        seq = "".join(str(text).split()).upper()
        if not seq:
            raise PeptideError("empty peptide sequence")
        bad = sorted({c for c in seq if c not in INDEX})
        if bad:
            raise PeptideError(f"non-standard residue(s) {''.join(bad)!r} in {seq!r}")
        return super().__new__(cls, seq)


def positional_encoding(pos: int, d: int = POS_DIM) -> np.ndarray:
    if d % 2:
        raise ValueError(f"positional encoding width must be even, got {d}")
    out = np.empty(d)
    for i in range(d // 2):
        angle = pos / 10000.0 ** (2 * i / d)
        out[2 * i] = math.sin(angle)
        out[2 * i + 1] = math.cos(angle)
    return out


def encode_residues(seq: str) -> np.ndarray:
    """T x 65 matrix: one-hot(20) | BLOSUM62 row(20) | sinusoidal position(20) | Z-scales(5)."""
    seq = PeptideSequence(seq)
    out = np.zeros((len(seq), FEATURE_DIM))
    for t, aa in enumerate(seq):
        k = INDEX[aa]
        out[t, k] = 1.0
        out[t, 20:40] = BLOSUM62[k]
        out[t, 40:60] = positional_encoding(t)
        out[t, 60:65] = ZSCALES[k]
    return out


def alignment_score(a: str, b: str) -> int:
    """Needleman-Wunsch score with identity scoring (match 1, mismatch 0, gap 0)."""
    return _kernels.nw_score(str(a), str(b), 1, 0, 0)


def peptide_similarity(a: str, b: str) -> float:
    a, b = PeptideSequence(a), PeptideSequence(b)
    return alignment_score(a, b) / max(len(a), len(b))


def aac_features(seq: str) -> np.ndarray:
    seq = PeptideSequence(seq)
    out = np.zeros(20)
    for aa in seq:
        out[INDEX[aa]] += 1.0
    return out / len(seq)
