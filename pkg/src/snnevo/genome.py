"""Flat genome encoding and the genetic operators applied to it.

Layout: ``N*N`` weight genes, then 9 micro genes, then 3 flag bits. Micro
genes are stored unconstrained and squashed into legal ranges on decode, so
every genome, however mutated, decodes to a valid network.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from snnevo.errors import DimensionError
from snnevo.substrate import FeatureFlags, MicroParams

GENOME_VERSION = 1

MICRO_NAMES = (
    "threshold",
    "decay",
    "v_reset",
    "refractory_period",
    "stdp_a_plus",
    "stdp_a_minus",
    "stdp_tau",
    "learning_rate",
    "w_max",
)
FLAG_NAMES = ("stdp_enabled", "refractory_enabled", "symmetric_stdp")

# gene value -1 maps to lo, +1 maps to hi
MICRO_RANGES = {
    "threshold": (0.5, 2.0),
    "decay": (0.0, 0.99),
    "v_reset": (-1.0, 0.0),
    "refractory_period": (0.0, 5.0),
    "stdp_a_plus": (0.0, 0.5),
    "stdp_a_minus": (0.0, 0.5),
    "stdp_tau": (1.0, 20.0),
    "learning_rate": (0.0, 1.0),
    "w_max": (0.5, 4.0),
}

N_MICRO = len(MICRO_NAMES)
N_FLAGS = len(FLAG_NAMES)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Genome:
    weight_genes: np.ndarray
    micro_genes: np.ndarray
    flag_genes: np.ndarray

    def __post_init__(self):
        w = _frozen(np.array(self.weight_genes, dtype=np.float64).ravel())
        m = _frozen(np.array(self.micro_genes, dtype=np.float64).ravel())
        f = _frozen(np.array(self.flag_genes, dtype=np.uint8).ravel())
        n = math.isqrt(w.size)
        if n * n != w.size or n == 0:
            raise DimensionError(f"weight gene count {w.size} is not a positive square")
        if m.size != N_MICRO:
            raise DimensionError(f"expected {N_MICRO} micro genes, got {m.size}")
        if f.size != N_FLAGS or np.any(f > 1):
            raise DimensionError(f"expected {N_FLAGS} flag bits")
        object.__setattr__(self, "weight_genes", w)
        object.__setattr__(self, "micro_genes", m)
        object.__setattr__(self, "flag_genes", f)

    @property
    def n_neurons(self) -> int:
        return math.isqrt(self.weight_genes.size)

    def __len__(self) -> int:
        return self.weight_genes.size + N_MICRO + N_FLAGS

    def __eq__(self, other):
        if not isinstance(other, Genome):
            return NotImplemented
        return (
            np.array_equal(self.weight_genes, other.weight_genes)
            and np.array_equal(self.micro_genes, other.micro_genes)
            and np.array_equal(self.flag_genes, other.flag_genes)
        )

    __hash__ = None

    @property
    def flags(self) -> FeatureFlags:
        return FeatureFlags.from_bits(self.flag_genes)

    def micro_params(self) -> MicroParams:
        return decode_micro(self)

    def flat(self) -> np.ndarray:
        """All genes as one float vector (flags as 0.0/1.0)."""
        return np.concatenate([self.weight_genes, self.micro_genes, self.flag_genes.astype(np.float64)])

    @classmethod
    def from_flat(cls, flat: np.ndarray, n_neurons: int) -> Genome:
        n2 = n_neurons * n_neurons
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != n2 + N_MICRO + N_FLAGS:
            raise DimensionError(f"flat genome length {flat.size} does not match N={n_neurons}")
        return cls(flat[:n2], flat[n2 : n2 + N_MICRO], flat[n2 + N_MICRO :].astype(np.uint8))

    def with_flags(self, **bits: bool) -> Genome:
        f = self.flag_genes.copy()
        for name, value in bits.items():
            f[FLAG_NAMES.index(name)] = int(bool(value))
        return Genome(self.weight_genes, self.micro_genes, f)

    def digest(self) -> int:
        """Stable 63-bit content hash."""
        h = hashlib.blake2b(digest_size=8)
        h.update(np.int64(self.n_neurons).tobytes())
        h.update(np.ascontiguousarray(self.weight_genes, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.micro_genes, dtype="<f8").tobytes())
        h.update(self.flag_genes.tobytes())
        return int.from_bytes(h.digest(), "little") >> 1

    def to_dict(self) -> dict:
        return {
            "version": GENOME_VERSION,
            "N": self.n_neurons,
            "weight_genes": [float(x) for x in self.weight_genes],
            "micro_genes": [float(x) for x in self.micro_genes],
            "flag_genes": [int(x) for x in self.flag_genes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Genome:
        if d.get("version") != GENOME_VERSION:
            raise ValueError(f"unsupported genome version {d.get('version')!r}")
        g = cls(d["weight_genes"], d["micro_genes"], d["flag_genes"])
        if g.n_neurons != d["N"]:
            raise DimensionError(f"N={d['N']} disagrees with {len(d['weight_genes'])} weight genes")
        return g

    def dumps(self) -> str:
        # json renders floats with repr(), which round-trips exactly
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> Genome:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class MutationConfig:
    weight_sigma: float = 0.1
    micro_sigma: float = 0.1
    flag_flip_prob: float = 0.01
    per_gene_prob: float = 0.05

    def __post_init__(self):
        if self.weight_sigma < 0 or self.micro_sigma < 0:
            raise ValueError("mutation sigmas must be >= 0")
        for name in ("flag_flip_prob", "per_gene_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


def random_genome(rng: np.random.Generator, n_neurons: int) -> Genome:
    if n_neurons <= 0:
        raise DimensionError("n_neurons must be positive")
    w = rng.uniform(-1.0, 1.0, n_neurons * n_neurons)
    m = rng.uniform(-1.0, 1.0, N_MICRO)
    f = rng.integers(0, 2, N_FLAGS, dtype=np.uint8)
    return Genome(w, m, f)


def crossover(a: Genome, b: Genome, rng: np.random.Generator) -> tuple[Genome, Genome]:
    """Uniform crossover: each gene position swaps between the children with probability 1/2."""
    if len(a) != len(b):
        raise DimensionError(f"parent lengths differ: {len(a)} vs {len(b)}")
    fa, fb = a.flat(), b.flat()
    swap = rng.random(fa.size) < 0.5
    n = a.n_neurons
    return Genome.from_flat(np.where(swap, fb, fa), n), Genome.from_flat(np.where(swap, fa, fb), n)


def mutate(g: Genome, cfg: MutationConfig, rng: np.random.Generator) -> Genome:
    nw = g.weight_genes.size
    reals = np.concatenate([g.weight_genes, g.micro_genes])
    hit = rng.random(reals.size) < cfg.per_gene_prob
    noise = rng.standard_normal(reals.size)
    sigma = np.full(reals.size, cfg.micro_sigma)
    sigma[:nw] = cfg.weight_sigma
    reals = np.where(hit, reals + sigma * noise, reals)
    flip = rng.random(N_FLAGS) < cfg.flag_flip_prob
    flags = np.where(flip, 1 - g.flag_genes, g.flag_genes).astype(np.uint8)
    return Genome(reals[:nw], reals[nw:], flags)


def squash(gene: float, lo: float, hi: float) -> float:
    x = min(max(float(gene), -1.0), 1.0)
    return lo + (x + 1.0) * 0.5 * (hi - lo)


def decode_micro(g: Genome) -> MicroParams:
    vals = {name: squash(gene, *MICRO_RANGES[name]) for name, gene in zip(MICRO_NAMES, g.micro_genes)}
    vals["refractory_period"] = int(math.floor(vals["refractory_period"] + 0.5))
    flags = g.flags
    if flags.symmetric_stdp:
        vals["stdp_a_minus"] = vals["stdp_a_plus"]
    # threshold >= 0.5 > 0 >= v_reset, so the decoded params are always valid
    return MicroParams(flags=flags, **vals)
