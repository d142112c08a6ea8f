"""Stability fitness: repeat one scenario K times on a single learning network.

The network is built once per evaluation and carries its weights from one
episode into the next; only the transient neuron state is reset between
episodes. Fitness rewards the mean score, penalises behavioural dispersion
across the K episodes, and applies a flat penalty when the weights barely
moved (the learning rule must actually be at work).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from snnevo.errors import DimensionError
from snnevo.genome import Genome
from snnevo.scenarios import EpisodeTrace, ScenarioSpec, decode_counts, env_step, reset
from snnevo.scenarios.coding import DEFAULT_GAIN
from snnevo.substrate import Network, Topology, apply_plasticity, build_network, step, weight_change_norm

PAD = -2  # fills a signature past the end of its episode


@dataclass(frozen=True, eq=False)
class BehaviorSignature:
    actions: np.ndarray
    observations_hash: int = 0
    score: float = 0.0

    def __post_init__(self):
        a = np.array(self.actions, dtype=np.int64)
        if a.ndim != 1:
            raise DimensionError("signature actions must be a vector")
        pad = np.flatnonzero(a == PAD)
        if pad.size and not np.all(a[pad[0] :] == PAD):
            raise ValueError("padding may only appear as a suffix")
        a.flags.writeable = False
        object.__setattr__(self, "actions", a)

    @classmethod
    def from_episode(cls, actions, t_max: int, observations_hash: int = 0, score: float = 0.0) -> BehaviorSignature:
        actions = list(actions)
        if len(actions) > t_max:
            raise DimensionError(f"episode has {len(actions)} actions, signature holds {t_max}")
        return cls(np.array(actions + [PAD] * (t_max - len(actions))), observations_hash, score)

    @property
    def t_max(self) -> int:
        return self.actions.size

    def __eq__(self, other):
        if not isinstance(other, BehaviorSignature):
            return NotImplemented
        return (
            np.array_equal(self.actions, other.actions)
            and self.observations_hash == other.observations_hash
            and self.score == other.score
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {"actions": [int(x) for x in self.actions], "observations_hash": self.observations_hash, "score": self.score}

    @classmethod
    def from_dict(cls, d: dict) -> BehaviorSignature:
        return cls(d["actions"], int(d["observations_hash"]), float(d["score"]))


def mismatch_count(a: BehaviorSignature, b: BehaviorSignature) -> int:
    """Positions where the padded action sequences differ (padding is an ordinary symbol)."""
    if a.t_max != b.t_max:
        raise DimensionError(f"signature lengths differ: {a.t_max} vs {b.t_max}")
    return int(np.count_nonzero(a.actions != b.actions))


def behavior_distance(a: BehaviorSignature, b: BehaviorSignature) -> float:
    """Normalised Hamming distance, ``mismatch_count / T_max``.

    The metric axioms hold exactly on the integer counts; the float quotient
    can differ from them by one rounding step.
    """
    return mismatch_count(a, b) / a.t_max


def dispersion(signatures) -> float:
    """Mean pairwise behaviour distance over all unordered pairs."""
    sigs = list(signatures)
    if len(sigs) < 2:
        raise ValueError("dispersion needs at least two signatures")
    pairs = list(itertools.combinations(sigs, 2))
    return sum(behavior_distance(a, b) for a, b in pairs) / len(pairs)


@dataclass(frozen=True)
class FitnessConfig:
    K: int = 5
    lambda_disp: float = 0.5
    eps_plastic: float = 1e-3
    penalty: float | None = None  # None -> 10 * max_score of the scenario
    T_max: int = 64

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be >= 2 (dispersion is undefined for a single episode)")
        if self.lambda_disp < 0 or self.eps_plastic < 0:
            raise ValueError("lambda_disp and eps_plastic must be >= 0")
        if self.penalty is not None and self.penalty < 0:
            raise ValueError("penalty must be >= 0")
        if self.T_max < 1:
            raise ValueError("T_max must be positive")

    def penalty_for(self, max_score: float) -> float:
        return 10.0 * max_score if self.penalty is None else self.penalty


@dataclass(frozen=True)
class EpisodeRecord:
    score: float
    signature: BehaviorSignature
    plasticity: float

    def to_dict(self) -> dict:
        return {"score": self.score, "signature": self.signature.to_dict(), "plasticity": self.plasticity}

    @classmethod
    def from_dict(cls, d: dict) -> EpisodeRecord:
        return cls(float(d["score"]), BehaviorSignature.from_dict(d["signature"]), float(d["plasticity"]))


@dataclass(frozen=True)
class FitnessReport:
    mean_score: float
    dispersion: float
    plasticity_magnitude: float
    fitness: float
    episodes: tuple[EpisodeRecord, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "mean_score": self.mean_score,
            "dispersion": self.dispersion,
            "plasticity_magnitude": self.plasticity_magnitude,
            "fitness": self.fitness,
            "episodes": [e.to_dict() for e in self.episodes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> FitnessReport:
        return cls(
            float(d["mean_score"]),
            float(d["dispersion"]),
            float(d["plasticity_magnitude"]),
            float(d["fitness"]),
            tuple(EpisodeRecord.from_dict(e) for e in d["episodes"]),
        )

    def dumps(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def combine_fitness(mean_score: float, disp: float, plasticity: float, cfg: FitnessConfig, max_score: float) -> float:
    gate = cfg.penalty_for(max_score) if plasticity < cfg.eps_plastic else 0.0
    return mean_score - cfg.lambda_disp * disp - gate


class Agent(Protocol):
    def begin_episode(self) -> None: ...

    def act(self, obs: np.ndarray, present_ticks: int, decision_ticks: int) -> int: ...

    def weights(self) -> np.ndarray: ...


class SpikingAgent:
    """Drives a Network through an environment: rate-code in, spike-count vote out."""

    def __init__(self, net: Network, gain: float = DEFAULT_GAIN):
        self.net = net
        self.current = gain * net.micro.threshold

    def begin_episode(self) -> None:
        self.net.reset_state()

    def weights(self) -> np.ndarray:
        return self.net.weights.copy()

    def act(self, obs: np.ndarray, present_ticks: int, decision_ticks: int) -> int:
        net = self.net
        drive = self.current * np.asarray(obs, dtype=np.float64)
        n = net.n_neurons
        out = slice(n - net.n_out, n)
        counts = np.zeros(net.n_out, dtype=np.int64)
        for t in range(present_ticks + decision_ticks):
            fired = step(net, drive)
            apply_plasticity(net, fired)
            if t >= present_ticks:
                counts += fired[out]
        return decode_counts(counts)


def run_episode(agent: Agent, spec: ScenarioSpec, t_max: int) -> tuple[EpisodeTrace, BehaviorSignature, float]:
    """One episode. Returns the trace, its signature, and the episode's weight_change_norm."""
    agent.begin_episode()
    before = agent.weights()
    env, obs = reset(spec)
    trace = EpisodeTrace()
    h = hashlib.blake2b(digest_size=8)
    while not env.done and len(trace) < t_max:
        action = agent.act(obs, env.present_ticks, env.decision_ticks)
        h.update(np.ascontiguousarray(obs, dtype="<f8").tobytes())
        trace.steps.append((obs, action))
        env, obs, _, _ = env_step(env, action)
    trace.score = env.score
    plasticity = weight_change_norm(before, agent.weights())
    sig = BehaviorSignature.from_episode(
        [a for _, a in trace.steps], t_max, int.from_bytes(h.digest(), "little") >> 1, env.score
    )
    return trace, sig, plasticity


def run_episodes(agent: Agent, spec: ScenarioSpec, n_episodes: int, t_max: int) -> list[EpisodeRecord]:
    records = []
    for _ in range(n_episodes):
        _, sig, plasticity = run_episode(agent, spec, t_max)
        records.append(EpisodeRecord(sig.score, sig, plasticity))
    return records


def evaluate_agent(agent: Agent, spec: ScenarioSpec, cfg: FitnessConfig) -> FitnessReport:
    episodes = run_episodes(agent, spec, cfg.K, cfg.T_max)
    mean_score = sum(e.score for e in episodes) / len(episodes)
    disp = dispersion([e.signature for e in episodes])
    plasticity = sum(e.plasticity for e in episodes) / len(episodes)
    fit = combine_fitness(mean_score, disp, plasticity, cfg, spec.max_score)
    return FitnessReport(mean_score, disp, plasticity, fit, tuple(episodes))


def topology_for(genome: Genome, spec: ScenarioSpec) -> Topology:
    return Topology(genome.n_neurons, spec.obs_dim, spec.n_actions)


def build_agent(genome: Genome, spec: ScenarioSpec, topology: Topology | None = None) -> SpikingAgent:
    expected = topology_for(genome, spec)
    if topology is not None and topology != expected:
        raise DimensionError(f"topology {topology} does not fit genome/scenario (expected {expected})")
    return SpikingAgent(build_network(genome, expected))


def evaluate(
    genome: Genome,
    spec: ScenarioSpec,
    cfg: FitnessConfig,
    rng: np.random.Generator | None = None,
    topology: Topology | None = None,
) -> FitnessReport:
    """Score one genome. ``rng`` is reserved for stochastic scenario modes; the
    fixed-scenario mode used here draws nothing from it."""
    return evaluate_agent(build_agent(genome, spec, topology), spec, cfg)
