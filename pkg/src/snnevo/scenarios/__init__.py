from snnevo.scenarios.base import (
    NONE,
    PERTURBATION_KINDS,
    REGISTRY,
    EpisodeTrace,
    Environment,
    Perturbation,
    ScenarioSpec,
    env_step,
    perturb,
    reset,
)
from snnevo.scenarios.coding import decode, decode_counts, encode
from snnevo.scenarios.cue_assoc import CueAssocEnv, CueAssocParams
from snnevo.scenarios.gridworld import GridForageEnv, GridParams

__all__ = [
    "NONE",
    "PERTURBATION_KINDS",
    "REGISTRY",
    "CueAssocEnv",
    "CueAssocParams",
    "EpisodeTrace",
    "Environment",
    "GridForageEnv",
    "GridParams",
    "Perturbation",
    "ScenarioSpec",
    "decode",
    "decode_counts",
    "encode",
    "env_step",
    "perturb",
    "reset",
]
