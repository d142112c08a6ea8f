"""Cue-response association.

Each round shows one of ``n_cues`` one-hot cue patterns; the agent scores a
point when its committed action is the cue's target. The cue order is
balanced (every cue appears equally often when ``rounds`` is a multiple of
``n_cues``), so a constant policy earns exactly the chance score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from snnevo.errors import ScenarioError
from snnevo.rng import scenario_stream
from snnevo.scenarios.base import Environment, n_touched


@dataclass(frozen=True)
class CueAssocParams:
    n_cues: int = 4
    rounds: int = 8
    present_ticks: int = 8
    decision_ticks: int = 8

    def __post_init__(self):
        if self.n_cues < 2:
            raise ScenarioError("cue_assoc needs n_cues >= 2")
        if self.rounds < 1:
            raise ScenarioError("cue_assoc needs rounds >= 1")
        if self.present_ticks < 0 or self.decision_ticks < 1:
            raise ScenarioError("cue_assoc needs present_ticks >= 0 and decision_ticks >= 1")


def base_layout(seed: int, params: CueAssocParams) -> tuple[np.ndarray, np.ndarray]:
    """(cue -> target table, cue shown in each round) before any perturbation."""
    rng = scenario_stream(seed, "cue_assoc.layout")
    targets = rng.permutation(params.n_cues)
    reps = -(-params.rounds // params.n_cues)
    sequence = rng.permutation(np.tile(np.arange(params.n_cues), reps)[: params.rounds])
    return targets, sequence


def remap_targets(targets: np.ndarray, seed: int, level: float) -> np.ndarray:
    """Rotate the targets of the first ceil(level*C) cues in a seeded order."""
    c = targets.size
    m = n_touched(level, c)
    order = scenario_stream(seed, "cue_remap").permutation(c)
    chosen = order[:m]
    out = targets.copy()
    if m >= 2:
        out[chosen] = targets[np.roll(chosen, 1)]
    return out


class CueAssocEnv(Environment):
    name = "cue_assoc"
    params_cls = CueAssocParams
    n_actions = 0  # set per instance
    perturbations = ("cue_remap",)

    def __init__(self, spec):
        super().__init__(spec)
        p = self.params
        self.n_actions = p.n_cues
        self.targets, self.sequence = base_layout(spec.seed, p)
        pert = spec.perturbation
        if pert.kind == "cue_remap" and pert.active:
            self.targets = remap_targets(self.targets, spec.seed, pert.level)
        self.round = 0

    @classmethod
    def obs_dim_for(cls, params) -> int:
        return params.n_cues

    @classmethod
    def n_actions_for(cls, params) -> int:
        return params.n_cues

    @classmethod
    def max_score_for(cls, params) -> float:
        return float(params.rounds)

    @property
    def current_cue(self) -> int:
        return int(self.sequence[self.round])

    def _clean_observation(self) -> np.ndarray:
        obs = np.zeros(self.params.n_cues)
        if not self.done:
            obs[self.current_cue] = 1.0
        return obs

    def _apply(self, action: int) -> float:
        delta = 1.0 if action == self.targets[self.current_cue] else 0.0
        self.round += 1
        self.done = self.round >= self.params.rounds
        return delta
