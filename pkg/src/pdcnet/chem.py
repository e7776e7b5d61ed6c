"""SMILES parsing, ring-bond detection, circular fingerprints and Tanimoto similarity.

Supported grammar: organic-subset atoms (B C N O P S F Cl Br I and aromatic
b c n o p s), bracket atoms with isotope / H count / charge, bonds ``- = # :``,
branches, ring closures (digits and ``%nn``) and ``.`` separators. Stereo marks
(``/ \\ @``) are accepted and ignored.

Implicit hydrogens use a single valence per element (B 3, C 4, N 3, O 2, P 3,
S 2, halogens 1). An aromatic bond counts as order 1, plus one extra unit if the
atom has any aromatic bond, so benzene carbons get one H and pyridine nitrogen
gets none.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels

SINGLE, DOUBLE, TRIPLE, AROMATIC = "single", "double", "triple", "aromatic"
BOND_CODES = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3, AROMATIC: 4}
_BOND_VALENCE = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3, AROMATIC: 1}

# fmt: off
ELEMENTS = (
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S",
    "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga",
    "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd",
    "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm",
    "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os",
    "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa",
    "U", "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg",
    "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
)
# fmt: on
ATOMIC_NUMBER = {sym: i + 1 for i, sym in enumerate(ELEMENTS)}

ORGANIC = {"B": 5, "C": 6, "N": 7, "O": 8, "P": 15, "S": 16, "F": 9, "Cl": 17, "Br": 35, "I": 53}
AROMATIC_ORGANIC = {"b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16}
AROMATIC_BRACKET = {**AROMATIC_ORGANIC, "se": 34, "as": 33, "te": 52}

DEFAULT_VALENCE = {5: 3, 6: 4, 7: 3, 8: 2, 15: 3, 16: 2, 9: 1, 17: 1, 35: 1, 53: 1}
# upper bound used to reject impossible bracket atoms, before the charge allowance
MAX_VALENCE = {1: 1, 5: 3, 6: 4, 7: 5, 8: 2, 9: 1, 15: 5, 16: 6, 17: 7, 35: 7, 53: 7}

FP_HASH_VERSION = 1
FP_HASH_SEED = 0x4D4F5247414E0000 | FP_HASH_VERSION


class SmilesError(ValueError):
    """Malformed SMILES; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Atom:
    element: int
    aromatic: bool = False
    formal_charge: int = 0
    isotope: int | None = None
    explicit_h: int = 0
    implicit_h: int = 0
    bracket: bool = False


@dataclass(frozen=True)
class Bond:
    endpoints: tuple[int, int]
    order: str
    in_ring: bool = False


@dataclass(frozen=True)
class MolGraph:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    _adj: tuple = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.atoms)

    def neighbors(self, i: int) -> list[tuple[int, int]]:
        """(neighbor atom, bond index) pairs of atom ``i``."""
        if self._adj is None:
            adj = [[] for _ in self.atoms]
            for k, b in enumerate(self.bonds):
                u, v = b.endpoints
                adj[u].append((v, k))
                adj[v].append((u, k))
            object.__setattr__(self, "_adj", tuple(tuple(a) for a in adj))
        return list(self._adj[i])

    def atom_in_ring(self, i: int) -> bool:
        return any(self.bonds[k].in_ring for _, k in self.neighbors(i))

    def total_h(self, i: int) -> int:
        a = self.atoms[i]
        return a.implicit_h + a.explicit_h + sum(
            1 for j, _ in self.neighbors(i) if self.atoms[j].element == 1
        )


def _bond_sum(orders) -> int:
    orders = list(orders)
    total = sum(_BOND_VALENCE[o] for o in orders)
    if AROMATIC in orders:
        total += 1
    return total


def assign_implicit_h(atoms, bonds) -> list[Atom]:
    """Recompute implicit H for organic-subset atoms from the valence table."""
    incident = [[] for _ in atoms]
    for b in bonds:
        u, v = b.endpoints
        incident[u].append(b.order)
        incident[v].append(b.order)
    out = []
    for a, orders in zip(atoms, incident):
        if a.bracket or a.element not in DEFAULT_VALENCE:
            out.append(replace(a, implicit_h=0))
        else:
            out.append(replace(a, implicit_h=max(0, DEFAULT_VALENCE[a.element] - _bond_sum(orders))))
    return out


def ring_bonds(mol: MolGraph) -> set[int]:
    """Indices of bonds that are not bridges (iterative Tarjan low-link)."""
    n = len(mol.atoms)
    disc = [-1] * n
    low = [0] * n
    bridges = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(mol.neighbors(root)))]
        while stack:
            u, parent_bond, it = stack[-1]
            advanced = False
            for v, k in it:
                if k == parent_bond:
                    continue
                if disc[v] == -1:
                    disc[v] = low[v] = timer
                    timer += 1
                    stack.append((v, k, iter(mol.neighbors(v))))
                    advanced = True
                    break
                low[u] = min(low[u], disc[v])
            if advanced:
                continue
            stack.pop()
            if stack:
                p = stack[-1][0]
                low[p] = min(low[p], low[u])
                if low[u] > disc[p]:
                    bridges.add(parent_bond)
    return set(range(len(mol.bonds))) - bridges


def _finish(atoms, bonds, offsets=None) -> MolGraph:
    atoms = assign_implicit_h(atoms, bonds)
    if offsets is not None:
        incident = [[] for _ in atoms]
        for b in bonds:
            for e in b.endpoints:
                incident[e].append(b.order)
        for i, a in enumerate(atoms):
            if a.bracket and a.element in MAX_VALENCE:
                used = a.explicit_h + _bond_sum(incident[i])
                if used > MAX_VALENCE[a.element] + abs(a.formal_charge):
                    raise SmilesError(f"impossible valence {used} for bracket atom", offsets[i])
    mol = MolGraph(tuple(atoms), tuple(bonds))
    rings = ring_bonds(mol)
    bonds = tuple(replace(b, in_ring=k in rings) for k, b in enumerate(bonds))
    return MolGraph(tuple(atoms), bonds)


def _parse_bracket(text: str, start: int, byte_off) -> tuple[Atom, int]:
    end = text.find("]", start)
    if end < 0:
        raise SmilesError("unterminated bracket atom", byte_off(start))
    body = text[start + 1 : end]
    i = 0
    iso = ""
    while i < len(body) and body[i].isdigit():
        iso += body[i]
        i += 1
    sym = None
    aromatic = False
    for cand in (body[i : i + 2], body[i : i + 1]):
        if len(cand) == 2 and cand in AROMATIC_BRACKET:
            sym, aromatic = cand, True
        elif cand in ATOMIC_NUMBER:
            sym = cand
        elif len(cand) == 1 and cand in AROMATIC_BRACKET:
            sym, aromatic = cand, True
        if sym:
            break
    if sym is None:
        raise SmilesError(f"unknown atom symbol in [{body}]", byte_off(start + 1 + i))
    element = AROMATIC_BRACKET[sym] if aromatic else ATOMIC_NUMBER[sym]
    i += len(sym)
    while i < len(body) and body[i] == "@":
        i += 1
        if body[i : i + 2] in ("TH", "AL", "SP", "TB", "OH"):
            i += 2
            while i < len(body) and body[i].isdigit():
                i += 1
    hcount = 0
    if i < len(body) and body[i] == "H":
        i += 1
        hcount = 1
        if i < len(body) and body[i].isdigit():
            hcount = int(body[i])
            i += 1
    charge = 0
    if i < len(body) and body[i] in "+-":
        sign = 1 if body[i] == "+" else -1
        i += 1
        if i < len(body) and body[i].isdigit():
            digits = ""
            while i < len(body) and body[i].isdigit():
                digits += body[i]
                i += 1
            charge = sign * int(digits)
        else:
            charge = sign
            while i < len(body) and body[i] == ("+" if sign > 0 else "-"):
                charge += sign
                i += 1
    if i < len(body) and body[i] == ":":
        i += 1
        while i < len(body) and body[i].isdigit():
            i += 1
    if i != len(body):
        raise SmilesError(f"unexpected {body[i]!r} in bracket atom", byte_off(start + 1 + i))
    atom = Atom(
        element=element,
        aromatic=aromatic,
        formal_charge=charge,
        isotope=int(iso) if iso else None,
        explicit_h=hcount,
        bracket=True,
    )
    return atom, end + 1


def parse_smiles(text: str) -> MolGraph:
    if not text or not text.strip():
        raise SmilesError("empty SMILES", 0)
    text = text.strip()

    def byte_off(i):
        return len(text[:i].encode("utf-8"))

    atoms: list[Atom] = []
    offsets: list[int] = []
    bonds: list[Bond] = []
    pairs: set[frozenset] = set()
    prev = None
    pending = None  # (bond order, offset) of an explicit bond symbol
    branches: list[tuple[int | None, int]] = []
    rings: dict[int, tuple[int, str | None, int]] = {}

    def add_bond(u, v, order, off):
        key = frozenset((u, v))
        if u == v or key in pairs:
            raise SmilesError("duplicate or self bond", byte_off(off))
        pairs.add(key)
        if order is None:
            order = AROMATIC if atoms[u].aromatic and atoms[v].aromatic else SINGLE
        bonds.append(Bond((u, v), order))

    def add_atom(atom, off):
        nonlocal prev, pending
        atoms.append(atom)
        offsets.append(byte_off(off))
        idx = len(atoms) - 1
        if prev is not None:
            add_bond(prev, idx, pending[0] if pending else None, off)
        elif pending:
            raise SmilesError("bond without a preceding atom", byte_off(pending[1]))
        pending = None
        prev = idx

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            atom, j = _parse_bracket(text, i, byte_off)
            add_atom(atom, i)
            i = j
            continue
        two = text[i : i + 2]
        if two in ("Cl", "Br"):
            add_atom(Atom(ORGANIC[two]), i)
            i += 2
            continue
        if ch in ORGANIC:
            add_atom(Atom(ORGANIC[ch]), i)
        elif ch in AROMATIC_ORGANIC:
            add_atom(Atom(AROMATIC_ORGANIC[ch], aromatic=True), i)
        elif ch in "-=#:/\\":
            if pending:
                raise SmilesError("consecutive bond symbols", byte_off(i))
            pending = ({"=": DOUBLE, "#": TRIPLE, ":": AROMATIC}.get(ch, SINGLE), i)
        elif ch == "(":
            if prev is None:
                raise SmilesError("branch without a preceding atom", byte_off(i))
            branches.append((prev, i))
        elif ch == ")":
            if not branches:
                raise SmilesError("unbalanced ')'", byte_off(i))
            if pending:
                raise SmilesError("dangling bond before ')'", byte_off(pending[1]))
            prev = branches.pop()[0]
        elif ch == ".":
            if pending:
                raise SmilesError("dangling bond before '.'", byte_off(pending[1]))
            if prev is None or i == n - 1:
                raise SmilesError("empty component around '.'", byte_off(i))
            prev = None
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                digits = text[i + 1 : i + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise SmilesError("malformed %nn ring label", byte_off(i))
                label, width = int(digits), 3
            else:
                label, width = int(ch), 1
            if prev is None:
                raise SmilesError("ring closure without a preceding atom", byte_off(i))
            order = pending[0] if pending else None
            if label in rings:
                other, other_order, _ = rings.pop(label)
                if order and other_order and order != other_order:
                    raise SmilesError(f"conflicting bond orders on ring label {label}", byte_off(i))
                add_bond(other, prev, order or other_order, i)
            else:
                rings[label] = (prev, order, i)
            pending = None
            i += width
            continue
        else:
            raise SmilesError(f"unknown atom symbol {ch!r}", byte_off(i))
        i += 1

    if pending:
        raise SmilesError("dangling bond at end of input", byte_off(pending[1]))
    if branches:
        raise SmilesError("unbalanced '('", byte_off(branches[-1][1]))
    if rings:
        label, (_, _, off) = min(rings.items(), key=lambda kv: kv[1][2])
        raise SmilesError(f"unmatched ring closure at label {label}", byte_off(off))
    return _finish(atoms, bonds, offsets)


def adjacency_listing(mol: MolGraph) -> dict:
    """Atoms without implicit H plus a sorted edge list; inverse of ``from_adjacency``."""
    atoms = [
        (a.element, a.aromatic, a.formal_charge, a.isotope, a.explicit_h, a.bracket) for a in mol.atoms
    ]
    edges = sorted((min(b.endpoints), max(b.endpoints), b.order) for b in mol.bonds)
    return {"atoms": atoms, "bonds": edges}


def from_adjacency(listing: dict) -> MolGraph:
    atoms = [
        Atom(element=e, aromatic=ar, formal_charge=q, isotope=iso, explicit_h=h, bracket=br)
        for e, ar, q, iso, h, br in listing["atoms"]
    ]
    bonds = [Bond((u, v), order) for u, v, order in listing["bonds"]]
    return _finish(atoms, bonds)


def renumber_atoms(mol: MolGraph, order) -> MolGraph:
    """Same molecule with atom ``order[k]`` placed at position ``k``."""
    order = list(order)
    new_index = {old: new for new, old in enumerate(order)}
    atoms = tuple(mol.atoms[old] for old in order)
    bonds = tuple(
        replace(b, endpoints=(new_index[b.endpoints[0]], new_index[b.endpoints[1]])) for b in mol.bonds
    )
    return MolGraph(atoms, bonds)


@dataclass(frozen=True, eq=False)
class Fingerprint:
    bits: np.ndarray  # uint8 0/1
    radius: int = 2

    def __eq__(self, other):
        return (
            isinstance(other, Fingerprint)
            and self.bits.shape == other.bits.shape
            and bool(np.array_equal(self.bits, other.bits))
        )

    def __len__(self):
        return len(self.bits)

    @property
    def nbits(self) -> int:
        return len(self.bits)

    def popcount(self) -> int:
        return int(self.bits.sum())

    def on_bits(self) -> list[int]:
        return np.flatnonzero(self.bits).tolist()

    def to_hex(self) -> str:
        """Lowercase hex; bit 0 is the most significant bit of the first digit."""
        return np.packbits(self.bits, bitorder="big").tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, nbits: int = 1024, radius: int = 2) -> "Fingerprint":
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="big")[:nbits].astype(np.uint8)
        return cls(bits, radius)

    @classmethod
    def from_on_bits(cls, on, nbits: int = 1024, radius: int = 2) -> "Fingerprint":
        bits = np.zeros(nbits, dtype=np.uint8)
        bits[list(on)] = 1
        return cls(bits, radius)


def atom_invariants(mol: MolGraph, heavy: list[int]) -> dict[int, int]:
    inv = {}
    heavy_set = set(heavy)
    for i in heavy:
        a = mol.atoms[i]
        degree = sum(1 for j, _ in mol.neighbors(i) if j in heavy_set)
        key = (a.element, degree, mol.total_h(i), a.formal_charge, int(a.aromatic), int(mol.atom_in_ring(i)))
        inv[i] = _kernels.hash_ints(key, FP_HASH_SEED)
    return inv


def morgan_fingerprint(mol: MolGraph, radius: int = 2, nbits: int = 1024) -> Fingerprint:
    """Circular fingerprint: every environment identifier of every iteration, folded mod nbits.

    Explicit hydrogen atoms attached to heavy atoms are folded into their
    neighbour's H count and do not get environments of their own.
    """
    if nbits <= 0:
        raise ValueError("nbits must be positive")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if not mol.atoms:
        raise ValueError("empty molecule")
    heavy = [i for i, a in enumerate(mol.atoms) if a.element != 1]
    if not heavy:
        heavy = list(range(len(mol.atoms)))
    heavy_set = set(heavy)
    inv = atom_invariants(mol, heavy)
    bits = np.zeros(nbits, dtype=np.uint8)
    for ident in inv.values():
        bits[ident % nbits] = 1
    for r in range(1, radius + 1):
        nxt = {}
        for i in heavy:
            env = sorted(
                (BOND_CODES[mol.bonds[k].order], inv[j]) for j, k in mol.neighbors(i) if j in heavy_set
            )
            flat = [r, inv[i]]
            for code, h in env:
                flat.append(code)
                flat.append(h)
            nxt[i] = _kernels.hash_ints(flat, FP_HASH_SEED)
        inv = nxt
        for ident in inv.values():
            bits[ident % nbits] = 1
    return Fingerprint(bits, radius)


def smiles_fingerprint(text: str, radius: int = 2, nbits: int = 1024) -> Fingerprint:
    return morgan_fingerprint(parse_smiles(text), radius, nbits)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|; 1.0 when both are empty."""
    if len(a.bits) != len(b.bits):
        raise ValueError(f"fingerprint length mismatch: {len(a.bits)} vs {len(b.bits)}")
    union = int(np.count_nonzero(a.bits | b.bits))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(a.bits & b.bits)) / union
