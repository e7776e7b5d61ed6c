"""Four-channel PDC activity model.

Channels: residue-level peptide encoding t1 (BiLSTM + self-attention, 512),
peptide-level embedding t2 (640), linker x1 (256) and payload x2 (256). They are
fused as concat(x1, x2, t1, t2) and scored by a single affine layer + sigmoid.

t2, x1 and x2 come from precomputed embedding tables when a key is present;
otherwise from trainable fallback encoders (mean residue features -> 640 and
Morgan fingerprint -> 256).
"""

from __future__ import annotations

import base64
import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import checkpoint, chem
from .ndmath import layers
from .ndmath import tensor as nd
from .ndmath.tensor import Tensor
from .dataset import DataError
from .peptide import FEATURE_DIM, encode_residues
from .rng import Rng

PEPTIDE_RESIDUE, PEPTIDE_GLOBAL, LINKER, PAYLOAD = "peptide_residue", "peptide_global", "linker", "payload"
CHANNELS = (PEPTIDE_RESIDUE, PEPTIDE_GLOBAL, LINKER, PAYLOAD)
# fused layout follows concat(x1, x2, t1, t2)
FUSION_ORDER = (LINKER, PAYLOAD, PEPTIDE_RESIDUE, PEPTIDE_GLOBAL)

ABLATIONS = {
    "w/o encode": frozenset({PEPTIDE_RESIDUE}),
    "w/o embed": frozenset({PEPTIDE_GLOBAL}),
    "w/o peptide": frozenset({PEPTIDE_RESIDUE, PEPTIDE_GLOBAL}),
    "w/o linker": frozenset({LINKER}),
    "w/o payload": frozenset({PAYLOAD}),
}

KIND = "pdcnet"


class MissingEmbeddingError(KeyError):
    def __init__(self, channel: str, key: str):
        super().__init__(f"no {channel} embedding for key {key!r} and fallback is disabled")
        self.channel = channel
        self.key = key

    def __str__(self):
        return self.args[0]


@dataclass
class ModelConfig:
    d_h: int = 256
    dropout: float = 0.1
    t2_dim: int = 640
    mol_dim: int = 256
    fp_bits: int = 1024
    fp_radius: int = 2
    fallback_peptide_global: bool = True
    fallback_linker: bool = True
    fallback_payload: bool = True
    head_hidden: int = 0

    def __post_init__(self):
        if self.d_h < 1:
            raise ValueError("d_h must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @property
    def dims(self) -> dict[str, int]:
        return {PEPTIDE_RESIDUE: 2 * self.d_h, PEPTIDE_GLOBAL: self.t2_dim, LINKER: self.mol_dim, PAYLOAD: self.mol_dim}

    @property
    def fused_dim(self) -> int:
        return sum(self.dims.values())

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


# ---------------------------------------------------------------- embedding tables


def _key(text: str) -> str:
    return "".join(str(text).split())


class EmbeddingTable:
    """Key -> fixed-width vector, stored as JSON lines with base64 little-endian float32 vectors."""

    def __init__(self, dim: int, entries: dict[str, np.ndarray] | None = None):
        if dim < 1:
            raise ValueError("embedding dimension must be positive")
        self.dim = dim
        self.entries: dict[str, np.ndarray] = {}
        for k, v in (entries or {}).items():
            self.add(k, v)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return _key(key) in self.entries

    def add(self, key: str, vec) -> None:
        v = np.asarray(vec, dtype=np.float32).astype(np.float64)
        if v.shape != (self.dim,):
            raise ValueError(f"embedding for {key!r} has shape {v.shape}, table dimension is {self.dim}")
        k = _key(key)
        if k in self.entries:
            raise ValueError(f"duplicate embedding key {key!r}")
        self.entries[k] = v

    def get(self, key: str) -> np.ndarray | None:
        return self.entries.get(_key(key))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"format": "pdcnet-embeddings", "version": 1, "dim": self.dim}) + "\n")
            for k, v in self.entries.items():
                raw = np.asarray(v, dtype="<f4").tobytes()
                fh.write(json.dumps({"key": k, "dim": self.dim, "vec": base64.b64encode(raw).decode("ascii")}) + "\n")

    @classmethod
    def load(cls, path) -> "EmbeddingTable":
        with open(path, encoding="utf-8") as fh:
            lines = [line for line in fh if line.strip()]
        if not lines:
            raise DataError(f"{path}: empty embedding table")
        header = json.loads(lines[0])
        if "dim" not in header or "key" in header:
            raise DataError(f"{path}: first line must be a header declaring the table dimension")
        table = cls(int(header["dim"]))
        for n, line in enumerate(lines[1:], start=2):
            obj = json.loads(line)
            if int(obj.get("dim", table.dim)) != table.dim:
                raise DataError(f"{path}:{n}: entry dim {obj['dim']} != table dim {table.dim}")
            vec = np.frombuffer(base64.b64decode(obj["vec"]), dtype="<f4")
            table.add(obj["key"], vec)
        return table


@dataclass
class EmbeddingTables:
    peptide: EmbeddingTable | None = None
    linker: EmbeddingTable | None = None
    payload: EmbeddingTable | None = None

    @classmethod
    def load(cls, peptide=None, linker=None, payload=None) -> "EmbeddingTables":
        return cls(*(EmbeddingTable.load(p) if p else None for p in (peptide, linker, payload)))


# ---------------------------------------------------------------- inputs and channels


@dataclass
class RecordInputs:
    """Non-trainable per-record inputs, computed once and reused every epoch."""

    residues: np.ndarray  # T x 65
    peptide_vec: np.ndarray | None  # table vector (640) or None -> fallback from residue mean
    linker_vec: np.ndarray | None  # table vector (256) or None -> fallback from fingerprint
    payload_vec: np.ndarray | None
    linker_fp: np.ndarray | None = None
    payload_fp: np.ndarray | None = None
    sequence: str = ""


def prepare_inputs(record, config: ModelConfig, tables: EmbeddingTables | None = None) -> RecordInputs:
    tables = tables or EmbeddingTables()
    residues = encode_residues(record.peptide)

    def lookup(table, key, channel, allow_fallback, dim):
        vec = table.get(key) if table is not None else None
        if vec is not None:
            if vec.shape != (dim,):
                raise DataError(f"{channel} table dimension {vec.shape[0]} != model dimension {dim}")
            return vec
        if not allow_fallback:
            raise MissingEmbeddingError(channel, key)
        return None

    pep = lookup(tables.peptide, record.peptide, PEPTIDE_GLOBAL, config.fallback_peptide_global, config.t2_dim)
    lin = lookup(tables.linker, record.linker_smiles, LINKER, config.fallback_linker, config.mol_dim)
    pay = lookup(tables.payload, record.payload_smiles, PAYLOAD, config.fallback_payload, config.mol_dim)

    def fp(smiles):
        return chem.smiles_fingerprint(smiles, config.fp_radius, config.fp_bits).bits.astype(np.float64)

    return RecordInputs(
        residues=residues,
        peptide_vec=pep,
        linker_vec=lin,
        payload_vec=pay,
        linker_fp=fp(record.linker_smiles) if lin is None else None,
        payload_fp=fp(record.payload_smiles) if pay is None else None,
        sequence=_key(record.peptide),
    )


@dataclass
class ChannelVectors:
    t1: np.ndarray
    t2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray

    def by_name(self) -> dict[str, np.ndarray]:
        return {PEPTIDE_RESIDUE: self.t1, PEPTIDE_GLOBAL: self.t2, LINKER: self.x1, PAYLOAD: self.x2}

    @property
    def fused(self) -> np.ndarray:
        return np.concatenate([self.x1, self.x2, self.t1, self.t2])

    @classmethod
    def from_named(cls, d: dict) -> "ChannelVectors":
        return cls(t1=d[PEPTIDE_RESIDUE], t2=d[PEPTIDE_GLOBAL], x1=d[LINKER], x2=d[PAYLOAD])


def _check_mask(mask) -> frozenset:
    mask = frozenset(mask)
    unknown = mask - set(CHANNELS)
    if unknown:
        raise ValueError(f"unknown channel(s) {sorted(unknown)}; expected a subset of {CHANNELS}")
    return mask


def mask_channels(channels: ChannelVectors, mask) -> ChannelVectors:
    """Replace every masked channel by a zero vector of the same width."""
    mask = _check_mask(mask)
    named = channels.by_name()
    return ChannelVectors.from_named({k: np.zeros_like(v) if k in mask else v for k, v in named.items()})


# ---------------------------------------------------------------- the network


class PdcNet:
    def __init__(self, config: ModelConfig | None = None, seed: int = 0):
        self.config = config or ModelConfig()
        self.seed = seed
        self.params: dict[str, Tensor] = {}
        self._init(Rng(seed))

    def _add(self, name, data):
        self.params[name] = Tensor(data, requires_grad=True, name=name)

    def _init(self, rng: Rng):
        """Glorot-uniform weights, zero biases (forget gate +1), drawn in construction order."""
        c = self.config
        for prefix in ("lstm_fwd", "lstm_bwd"):
            p = layers.LstmParams.init(rng, FEATURE_DIM, c.d_h, prefix)
            for t in p.tensors():
                self._add(t.name, t.data)
        for name, d_in, d_out in (
            ("t2_proj", FEATURE_DIM, c.t2_dim),
            ("linker_proj", c.fp_bits, c.mol_dim),
            ("payload_proj", c.fp_bits, c.mol_dim),
        ):
            self._add(f"{name}.W", layers.glorot_uniform(rng, d_in, d_out, (d_out, d_in)))
            self._add(f"{name}.b", np.zeros(d_out))
        width = c.fused_dim
        if c.head_hidden:
            self._add("head_hidden.W", layers.glorot_uniform(rng, width, c.head_hidden, (c.head_hidden, width)))
            self._add("head_hidden.b", np.zeros(c.head_hidden))
            width = c.head_hidden
        self._add("head.W", layers.glorot_uniform(rng, width, 1, (1, width)))
        self._add("head.b", np.zeros(1))

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def lstm_params(self, direction: str) -> layers.LstmParams:
        p = self.params
        return layers.LstmParams(p[f"{direction}.wx"], p[f"{direction}.wh"], p[f"{direction}.b"])

    # -- channels

    def peptide_states(self, inputs: RecordInputs) -> Tensor:
        return layers.bilstm(Tensor(inputs.residues), self.lstm_params("lstm_fwd"), self.lstm_params("lstm_bwd"))

    def _proj(self, name, x) -> Tensor:
        return layers.dense(Tensor(x), self.params[f"{name}.W"], self.params[f"{name}.b"])

    def channel_tensors(self, inputs: RecordInputs, mask=frozenset()) -> dict[str, Tensor]:
        mask = _check_mask(mask)
        dims = self.config.dims
        out = {}
        for ch in CHANNELS:
            if ch in mask:
                out[ch] = Tensor(np.zeros(dims[ch]))
            elif ch == PEPTIDE_RESIDUE:
                out[ch] = layers.attention_pool(self.peptide_states(inputs))
            elif ch == PEPTIDE_GLOBAL:
                if inputs.peptide_vec is not None:
                    out[ch] = Tensor(inputs.peptide_vec)
                else:
                    out[ch] = self._proj("t2_proj", inputs.residues.mean(axis=0))
            elif ch == LINKER:
                out[ch] = Tensor(inputs.linker_vec) if inputs.linker_vec is not None else self._proj("linker_proj", inputs.linker_fp)
            else:
                out[ch] = Tensor(inputs.payload_vec) if inputs.payload_vec is not None else self._proj("payload_proj", inputs.payload_fp)
        return out

    def fuse(self, channels: dict[str, Tensor]) -> Tensor:
        return nd.concat([channels[ch] for ch in FUSION_ORDER])

    # -- head

    def head_logit(self, x, dropout_mask: np.ndarray | None = None) -> Tensor:
        x = nd.as_tensor(x)
        if x.shape != (self.config.fused_dim,):
            raise ValueError(f"fused vector has width {x.shape}, head expects {self.config.fused_dim}")
        if dropout_mask is not None:
            x = nd.mul(x, dropout_mask)
        if self.config.head_hidden:
            x = nd.tanh(layers.dense(x, self.params["head_hidden.W"], self.params["head_hidden.b"]))
        return nd.getitem(layers.dense(x, self.params["head.W"], self.params["head.b"]), 0)

    def dropout_mask(self, rng: Rng) -> np.ndarray:
        p = self.config.dropout
        keep = rng.uniform_array(self.config.fused_dim) >= p
        return keep / (1.0 - p)

    def logit(self, inputs: RecordInputs, mask=frozenset(), dropout_rng: Rng | None = None) -> Tensor:
        x = self.fuse(self.channel_tensors(inputs, mask))
        dm = self.dropout_mask(dropout_rng) if (dropout_rng is not None and self.config.dropout > 0) else None
        return self.head_logit(x, dm)

    def predict_proba(self, inputs: RecordInputs, mask=frozenset()) -> float:
        return float(nd.sigmoid(self.logit(inputs, mask)).data)

    def encode(self, inputs: RecordInputs, mask=frozenset()) -> ChannelVectors:
        return ChannelVectors.from_named({k: v.data.copy() for k, v in self.channel_tensors(inputs, mask).items()})

    # -- state

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.params.items()}

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        if set(state) != set(self.params):
            raise checkpoint.CheckpointError(
                f"parameter set mismatch: missing {sorted(set(self.params) - set(state))}, "
                f"unexpected {sorted(set(state) - set(self.params))}"
            )
        for k, v in state.items():
            if v.shape != self.params[k].shape:
                raise checkpoint.CheckpointError(f"parameter {k} has shape {v.shape}, expected {self.params[k].shape}")
            self.params[k].data = np.array(v, dtype=np.float64, copy=True)

    def copy(self) -> "PdcNet":
        other = PdcNet.__new__(PdcNet)
        other.config = ModelConfig.from_dict(self.config.to_dict())
        other.seed = self.seed
        other.params = {k: Tensor(v.data.copy(), True, k) for k, v in self.params.items()}
        return other


def encode_channels(record, model: PdcNet, tables: EmbeddingTables | None = None, mask=frozenset()) -> ChannelVectors:
    return model.encode(prepare_inputs(record, model.config, tables), mask)


def forward(model: PdcNet, channels: ChannelVectors) -> float:
    """Inference-mode probability for already-encoded channels."""
    return float(nd.sigmoid(model.head_logit(channels.fused)).data)


@dataclass
class TrainingMeta:
    seed: int | None = None
    history: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def save_checkpoint(model: PdcNet, path, seed: int | None = None, history: list | None = None, extra: dict | None = None) -> None:
    checkpoint.save(
        path,
        KIND,
        model.config.to_dict(),
        model.state_dict(),
        seed=model.seed if seed is None else seed,
        history=history,
        extra={"init_seed": model.seed, **(extra or {})},
    )


def load_checkpoint(path, with_meta: bool = False):
    body = checkpoint.load(path, KIND)
    model = PdcNet.__new__(PdcNet)
    model.config = ModelConfig.from_dict(body["config"])
    model.seed = body["extra"].get("init_seed", body["seed"] or 0)
    model.params = {k: Tensor(v.copy(), True, k) for k, v in body["params"].items()}
    expected = set(PdcNet(ModelConfig(**{**model.config.to_dict(), "d_h": 1, "t2_dim": 1, "mol_dim": 1, "fp_bits": 1}), 0).params)
    if set(model.params) != expected:
        raise checkpoint.CheckpointError("checkpoint parameters do not match the model configuration")
    if with_meta:
        return model, TrainingMeta(body["seed"], body["history"], body["extra"])
    return model
