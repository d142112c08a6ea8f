"""Run configuration files (YAML).

Top-level sections: ``search``, ``fitness``, ``scenario``, ``topology``,
``output``. Unknown keys anywhere are rejected, and every error names the
offending field as a dotted path such as ``search.pop_size``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from snnevo.errors import ConfigError, ScenarioError
from snnevo.evolution import SearchConfig
from snnevo.fitness import FitnessConfig
from snnevo.genome import MutationConfig
from snnevo.scenarios import PERTURBATION_KINDS, Perturbation, ScenarioSpec
from snnevo.substrate import Topology


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)


class MutationSection(_Strict):
    weight_sigma: float = Field(0.1, ge=0)
    micro_sigma: float = Field(0.1, ge=0)
    flag_flip_prob: float = Field(0.01, ge=0, le=1)
    per_gene_prob: float = Field(0.05, ge=0, le=1)


class SearchSection(_Strict):
    pop_size: int = Field(ge=2)
    generations: int = Field(ge=1)
    tournament_k: int = Field(3, ge=1)
    elitism_count: int = Field(2, ge=0)
    crossover_prob: float = Field(0.9, ge=0, le=1)
    master_seed: int = Field(0, ge=0, lt=2**64)
    target_fitness: Optional[float] = None
    mutation: MutationSection = Field(default_factory=MutationSection)


class FitnessSection(_Strict):
    K: int = Field(5, ge=2)
    lambda_disp: float = Field(0.5, ge=0)
    eps_plastic: float = Field(1e-3, ge=0)
    penalty: Optional[float] = Field(None, ge=0)
    T_max: int = Field(64, ge=1)


class PerturbationSection(_Strict):
    kind: Literal[PERTURBATION_KINDS] = "none"  # type: ignore[valid-type]
    level: float = Field(0.0, ge=0, le=1)


class ScenarioSection(_Strict):
    name: str
    seed: int = 0
    params: dict[str, Any] = Field(default_factory=dict)
    perturbation: PerturbationSection = Field(default_factory=PerturbationSection)


class TopologySection(_Strict):
    N: int = Field(ge=1)
    n_in: Optional[int] = Field(None, ge=0)
    n_out: Optional[int] = Field(None, ge=0)


class OutputSection(_Strict):
    dir: Optional[str] = None


class RunConfigFile(_Strict):
    search: SearchSection
    fitness: FitnessSection = Field(default_factory=FitnessSection)
    scenario: ScenarioSection
    topology: TopologySection
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _cross_field(self):
        s = self.search
        if s.elitism_count >= s.pop_size:
            raise ValueError("search.elitism_count must be smaller than search.pop_size")
        if s.tournament_k > s.pop_size:
            raise ValueError("search.tournament_k must not exceed search.pop_size")
        return self


@dataclass(frozen=True)
class RunConfig:
    search: SearchConfig
    output_dir: str | None = None


def _field_path(loc: tuple) -> str:
    return ".".join(str(p) for p in loc)


def parse_config(doc: Any, seed_override: int | None = None) -> RunConfig:
    """Validate a parsed YAML document into a RunConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping with sections search, fitness, scenario, topology, output")
    try:
        raw = RunConfigFile.model_validate(doc)
    except ValidationError as exc:
        err = exc.errors()[0]
        path = _field_path(err["loc"]) or "<root>"
        msg = "field required" if err["type"] == "missing" else err["msg"]
        if err["type"] == "value_error" and not err["loc"]:
            # cross-field checks already name their fields
            raise ConfigError(msg.removeprefix("Value error, ")) from None
        raise ConfigError(msg, path) from None
    try:
        spec = ScenarioSpec(
            raw.scenario.name,
            raw.scenario.seed,
            dict(raw.scenario.params),
            Perturbation(raw.scenario.perturbation.kind, raw.scenario.perturbation.level),
        )
    except ScenarioError as exc:
        where = "scenario.params" if "params" in str(exc) else "scenario"
        raise ConfigError(str(exc), where) from None
    except ValueError as exc:
        raise ConfigError(str(exc), "scenario.params") from None
    topo = raw.topology
    n_in = spec.obs_dim if topo.n_in is None else topo.n_in
    n_out = spec.n_actions if topo.n_out is None else topo.n_out
    if n_in != spec.obs_dim:
        raise ConfigError(f"must equal the scenario's observation size {spec.obs_dim}", "topology.n_in")
    if n_out != spec.n_actions:
        raise ConfigError(f"must equal the scenario's action count {spec.n_actions}", "topology.n_out")
    if n_in + n_out > topo.N:
        raise ConfigError(f"N={topo.N} is too small for {n_in} sensory + {n_out} motor neurons", "topology.N")
    s = raw.search
    try:
        search = SearchConfig(
            scenario=spec,
            topology=Topology(topo.N, n_in, n_out),
            pop_size=s.pop_size,
            generations=s.generations,
            tournament_k=s.tournament_k,
            elitism_count=s.elitism_count,
            crossover_prob=s.crossover_prob,
            mutation=MutationConfig(**s.mutation.model_dump()),
            fitness=FitnessConfig(**raw.fitness.model_dump()),
            master_seed=s.master_seed if seed_override is None else int(seed_override),
            target_fitness=s.target_fitness,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "search") from None
    return RunConfig(search, raw.output.dir)


def load_config(path: str | Path, seed_override: int | None = None) -> RunConfig:
    """Read and validate a config file. Missing files raise FileNotFoundError."""
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from None
    return parse_config(doc, seed_override)


def config_document(cfg: RunConfig) -> dict:
    """Fully resolved document; parsing it back yields an identical config."""
    s = cfg.search
    return {
        "search": {
            "pop_size": s.pop_size,
            "generations": s.generations,
            "tournament_k": s.tournament_k,
            "elitism_count": s.elitism_count,
            "crossover_prob": s.crossover_prob,
            "master_seed": s.master_seed,
            "target_fitness": s.target_fitness,
            "mutation": {
                "weight_sigma": s.mutation.weight_sigma,
                "micro_sigma": s.mutation.micro_sigma,
                "flag_flip_prob": s.mutation.flag_flip_prob,
                "per_gene_prob": s.mutation.per_gene_prob,
            },
        },
        "fitness": {
            "K": s.fitness.K,
            "lambda_disp": s.fitness.lambda_disp,
            "eps_plastic": s.fitness.eps_plastic,
            "penalty": s.fitness.penalty,
            "T_max": s.fitness.T_max,
        },
        "scenario": s.scenario.to_dict(),
        "topology": {"N": s.topology.n_neurons, "n_in": s.topology.n_in, "n_out": s.topology.n_out},
        "output": {"dir": cfg.output_dir},
    }


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_document(cfg), sort_keys=False)
