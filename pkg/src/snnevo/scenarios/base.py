"""Scenario specs, the environment registry, and perturbations."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np

from snnevo.errors import ScenarioError
from snnevo.rng import scenario_stream

NONE = -1  # no-op action; also what the decoder returns for a silent output layer

PERTURBATION_KINDS = ("none", "obs_noise", "cue_remap", "layout_shift")


@dataclass(frozen=True)
class Perturbation:
    kind: str = "none"
    level: float = 0.0

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ScenarioError(f"unknown perturbation kind {self.kind!r}; expected one of {PERTURBATION_KINDS}")
        if not 0.0 <= self.level <= 1.0:
            raise ScenarioError(f"perturbation level must lie in [0, 1], got {self.level}")

    @property
    def active(self) -> bool:
        return self.kind != "none" and self.level > 0.0


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    seed: int = 0
    params: Any = None
    perturbation: Perturbation = field(default_factory=Perturbation)

    def __post_init__(self):
        if self.name not in REGISTRY:
            raise ScenarioError(f"unknown scenario {self.name!r}; registered: {sorted(REGISTRY)}")
        params_cls = REGISTRY[self.name].params_cls
        params = self.params
        if params is None:
            params = params_cls()
        elif isinstance(params, dict):
            try:
                params = params_cls(**params)
            except TypeError as exc:
                raise ScenarioError(f"malformed params for {self.name}: {exc}") from None
        elif not isinstance(params, params_cls):
            raise ScenarioError(f"params for {self.name} must be {params_cls.__name__}")
        object.__setattr__(self, "params", params)
        if isinstance(self.perturbation, dict):
            object.__setattr__(self, "perturbation", Perturbation(**self.perturbation))
        kind = self.perturbation.kind
        if kind not in ("none", "obs_noise") and kind not in REGISTRY[self.name].perturbations:
            raise ScenarioError(f"perturbation {kind!r} does not apply to scenario {self.name!r}")

    @property
    def env_cls(self) -> type[Environment]:
        return REGISTRY[self.name]

    @property
    def obs_dim(self) -> int:
        return self.env_cls.obs_dim_for(self.params)

    @property
    def n_actions(self) -> int:
        return self.env_cls.n_actions_for(self.params)

    @property
    def max_score(self) -> float:
        return self.env_cls.max_score_for(self.params)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "params": dataclasses.asdict(self.params),
            "perturbation": {"kind": self.perturbation.kind, "level": self.perturbation.level},
        }

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioSpec:
        return cls(d["name"], int(d.get("seed", 0)), dict(d.get("params") or {}), Perturbation(**d.get("perturbation", {})))


class Environment:
    """Base environment state. Subclasses register themselves by ``name``."""

    name: ClassVar[str]
    params_cls: ClassVar[type]
    n_actions: ClassVar[int]
    perturbations: ClassVar[tuple[str, ...]] = ()

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        REGISTRY[cls.name] = cls

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self.params = spec.params
        self.done = False
        self.score = 0.0
        self.steps = 0
        pert = spec.perturbation
        self._noise_level = pert.level if pert.kind == "obs_noise" and pert.active else 0.0
        self._noise = scenario_stream(spec.seed, "obs_noise") if self._noise_level > 0 else None

    @classmethod
    def obs_dim_for(cls, params) -> int:
        raise NotImplementedError

    @classmethod
    def max_score_for(cls, params) -> float:
        raise NotImplementedError

    @classmethod
    def n_actions_for(cls, params) -> int:
        return cls.n_actions

    @property
    def obs_dim(self) -> int:
        return self.obs_dim_for(self.params)

    @property
    def max_score(self) -> float:
        return self.max_score_for(self.params)

    @property
    def present_ticks(self) -> int:
        return self.params.present_ticks

    @property
    def decision_ticks(self) -> int:
        return self.params.decision_ticks

    def _clean_observation(self) -> np.ndarray:
        raise NotImplementedError

    def _apply(self, action: int) -> float:
        raise NotImplementedError

    def observe(self) -> np.ndarray:
        obs = self._clean_observation()
        if self._noise is not None:
            u = self._noise.uniform(-1.0, 1.0, obs.shape[0])
            obs = np.clip(obs + self._noise_level * u, 0.0, 1.0)
        return obs

    def step(self, action: int) -> tuple[Environment, np.ndarray, float, bool]:
        if self.done:
            raise ScenarioError("step called on a finished episode")
        action = int(action)
        if action != NONE and not 0 <= action < self.n_actions:
            raise ScenarioError(f"action {action} outside [0, {self.n_actions})")
        delta = self._apply(action)
        self.steps += 1
        self.score += delta
        return self, self.observe(), delta, self.done


REGISTRY: dict[str, type[Environment]] = {}


def reset(spec: ScenarioSpec) -> tuple[Environment, np.ndarray]:
    env = spec.env_cls(spec)
    return env, env.observe()


def env_step(state: Environment, action: int) -> tuple[Environment, np.ndarray, float, bool]:
    return state.step(action)


def perturb(spec: ScenarioSpec, kind: str, level: float) -> ScenarioSpec:
    """Neighbouring scenario: same seed and params with a perturbation attached."""
    if kind not in PERTURBATION_KINDS:
        raise ScenarioError(f"unknown perturbation kind {kind!r}; expected one of {PERTURBATION_KINDS}")
    p = Perturbation(kind, float(level))
    if not p.active:
        return spec
    return dataclasses.replace(spec, perturbation=p)


def n_touched(level: float, count: int) -> int:
    """Number of discrete elements a perturbation of this level rewrites."""
    return min(count, math.ceil(level * count))


@dataclass
class EpisodeTrace:
    steps: list[tuple[np.ndarray, int]] = field(default_factory=list)
    score: float = 0.0

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "steps": [{"observation": [float(x) for x in obs], "action": int(a)} for obs, a in self.steps],
        }
