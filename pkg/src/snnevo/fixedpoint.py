"""Convergence diagnostics for the episode-to-episode learning map.

Running the same scenario repeatedly on one plastic network yields a
sequence of behaviour signatures. If learning settles, consecutive
signatures stop changing: the signature is (within ``tol``) a fixed point of
"run one more episode". The generalisation probe repeats that measurement
in a perturbed neighbour of the training scenario.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from snnevo.fitness import BehaviorSignature, FitnessConfig, behavior_distance, build_agent, run_episodes
from snnevo.genome import Genome
from snnevo.scenarios import ScenarioSpec, perturb


@dataclass(frozen=True)
class ProbeConfig:
    max_episodes: int = 20
    tol: float = 0.05
    window: int = 3

    def __post_init__(self):
        if self.max_episodes < 2:
            raise ValueError("max_episodes must be >= 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.window >= self.max_episodes:
            raise ValueError(f"window ({self.window}) must be smaller than max_episodes ({self.max_episodes})")


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    n_star: int | None
    consecutive_distances: tuple[float, ...]
    final_score: float
    stability_window: int
    tol: float = field(default=0.05)

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "n_star": self.n_star,
            "consecutive_distances": list(self.consecutive_distances),
            "final_score": self.final_score,
            "stability_window": self.stability_window,
            "tol": self.tol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ConvergenceReport:
        return cls(
            bool(d["converged"]),
            d["n_star"],
            tuple(float(x) for x in d["consecutive_distances"]),
            float(d["final_score"]),
            int(d["stability_window"]),
            float(d["tol"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def stable_suffix_start(distances, tol: float, window: int) -> int | None:
    """Smallest s such that every distance from s to the end is below tol and
    at least ``window`` distances remain; None if there is no such s."""
    d = list(distances)
    s = len(d)
    while s > 0 and d[s - 1] < tol:
        s -= 1
    return s if len(d) - s >= window else None


def detect_from_distances(distances, tol: float, window: int, final_score: float = 0.0) -> ConvergenceReport:
    distances = tuple(float(x) for x in distances)
    if len(distances) < window:
        raise ValueError(f"need at least {window} distances, got {len(distances)}")
    n_star = stable_suffix_start(distances, tol, window)
    return ConvergenceReport(n_star is not None, n_star, distances, final_score, window, tol)


def detect_fixed_point(signatures, tol: float, m: int) -> ConvergenceReport:
    sigs = list(signatures)
    if len(sigs) < m + 1:
        raise ValueError(f"need at least {m + 1} signatures for window {m}, got {len(sigs)}")
    distances = [behavior_distance(a, b) for a, b in zip(sigs, sigs[1:])]
    return detect_from_distances(distances, tol, m, sigs[-1].score)


def signature_sequence(genome: Genome, spec: ScenarioSpec, n_episodes: int, cfg: FitnessConfig) -> list[BehaviorSignature]:
    """Signatures of ``n_episodes`` consecutive episodes on one network."""
    agent = build_agent(genome, spec)
    return [rec.signature for rec in run_episodes(agent, spec, n_episodes, cfg.T_max)]


def generalization_probe(
    genome: Genome,
    train_spec: ScenarioSpec,
    kind: str,
    level: float,
    probe: ProbeConfig,
    cfg: FitnessConfig | None = None,
) -> tuple[ConvergenceReport, ConvergenceReport]:
    """Convergence on the training scenario and on its perturbed neighbour.

    Each side starts from a freshly built network. Nothing is asserted about
    either outcome; the reports are measurements.
    """
    cfg = cfg or FitnessConfig()
    reports = []
    for spec in (train_spec, perturb(train_spec, kind, level)):
        sigs = signature_sequence(genome, spec, probe.max_episodes, cfg)
        reports.append(detect_fixed_point(sigs, probe.tol, probe.window))
    return reports[0], reports[1]
