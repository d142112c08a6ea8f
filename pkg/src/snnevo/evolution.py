"""Generational genetic algorithm with tournament selection and elitism.

All randomness is drawn from streams keyed by (master_seed, generation,
slot, purpose), so a run is reproducible regardless of how many worker
processes evaluate fitness or in which order they finish.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from collections.abc import Callable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from snnevo.errors import CheckpointError, CheckpointVersionError, DimensionError
from snnevo.fitness import FitnessConfig, FitnessReport, evaluate
from snnevo.genome import Genome, MutationConfig, crossover, mutate, random_genome
from snnevo.rng import derive_stream
from snnevo.scenarios import ScenarioSpec
from snnevo.substrate import Topology

CHECKPOINT_VERSION = 1
CHECKPOINT_FORMAT = "snnevo-checkpoint"


@dataclass(frozen=True)
class SearchConfig:
    scenario: ScenarioSpec
    topology: Topology
    pop_size: int = 64
    generations: int = 50
    tournament_k: int = 3
    elitism_count: int = 2
    crossover_prob: float = 0.9
    mutation: MutationConfig = field(default_factory=MutationConfig)
    fitness: FitnessConfig = field(default_factory=FitnessConfig)
    master_seed: int = 0
    target_fitness: float | None = None

    def __post_init__(self):
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if not 1 <= self.tournament_k <= self.pop_size:
            raise ValueError("tournament_k must lie in [1, pop_size]")
        if not 0 <= self.elitism_count < self.pop_size:
            raise ValueError("elitism_count must lie in [0, pop_size)")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must lie in [0, 1]")
        topo, spec = self.topology, self.scenario
        if topo.n_in != spec.obs_dim or topo.n_out != spec.n_actions:
            raise DimensionError(
                f"topology n_in={topo.n_in}, n_out={topo.n_out} does not match scenario "
                f"{spec.name} (obs_dim={spec.obs_dim}, n_actions={spec.n_actions})"
            )

    def to_dict(self) -> dict:
        return {
            "pop_size": self.pop_size,
            "generations": self.generations,
            "tournament_k": self.tournament_k,
            "elitism_count": self.elitism_count,
            "crossover_prob": self.crossover_prob,
            "master_seed": self.master_seed,
            "target_fitness": self.target_fitness,
            "mutation": dataclasses.asdict(self.mutation),
            "fitness": dataclasses.asdict(self.fitness),
            "scenario": self.scenario.to_dict(),
            "topology": dataclasses.asdict(self.topology),
        }

    @classmethod
    def from_dict(cls, d: dict) -> SearchConfig:
        return cls(
            scenario=ScenarioSpec.from_dict(d["scenario"]),
            topology=Topology(**d["topology"]),
            pop_size=d["pop_size"],
            generations=d["generations"],
            tournament_k=d["tournament_k"],
            elitism_count=d["elitism_count"],
            crossover_prob=d["crossover_prob"],
            mutation=MutationConfig(**d["mutation"]),
            fitness=FitnessConfig(**d["fitness"]),
            master_seed=d["master_seed"],
            target_fitness=d["target_fitness"],
        )


@dataclass(frozen=True)
class Individual:
    genome: Genome
    report: FitnessReport

    @property
    def fitness(self) -> float:
        return self.report.fitness


Population = list[Individual]

LOG_COLUMNS = (
    "generation",
    "best_fitness",
    "mean_fitness",
    "best_mean_score",
    "best_dispersion",
    "best_plasticity",
    "best_genome_digest",
)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_mean_score: float
    best_dispersion: float
    best_plasticity: float
    best_genome_digest: int

    def row(self) -> list[str]:
        return [repr(v) if isinstance(v, float) else str(v) for v in dataclasses.astuple(self)]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> GenerationRecord:
        return cls(**d)


def best_index(pop: Sequence[Individual]) -> int:
    """Index of the fittest individual; ties go to the lower index."""
    return min(range(len(pop)), key=lambda i: (-pop[i].fitness, i))


def make_record(pop: Sequence[Individual], generation: int) -> GenerationRecord:
    b = pop[best_index(pop)]
    return GenerationRecord(
        generation=generation,
        best_fitness=b.report.fitness,
        mean_fitness=math.fsum(ind.fitness for ind in pop) / len(pop),
        best_mean_score=b.report.mean_score,
        best_dispersion=b.report.dispersion,
        best_plasticity=b.report.plasticity_magnitude,
        best_genome_digest=b.genome.digest(),
    )


def _evaluate_task(args) -> FitnessReport:
    genome, cfg, generation, slot = args
    return evaluate(genome, cfg.scenario, cfg.fitness, derive_stream(cfg.master_seed, generation, slot, "eval"), cfg.topology)


def evaluate_genomes(
    genomes: Sequence[Genome],
    cfg: SearchConfig,
    generation: int,
    first_slot: int = 0,
    executor: Executor | None = None,
) -> list[FitnessReport]:
    tasks = [(g, cfg, generation, first_slot + j) for j, g in enumerate(genomes)]
    if executor is None:
        return [_evaluate_task(t) for t in tasks]
    return list(executor.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // 32)))


def init_population(cfg: SearchConfig, executor: Executor | None = None) -> Population:
    genomes = [
        random_genome(derive_stream(cfg.master_seed, 0, i, "init"), cfg.topology.n_neurons)
        for i in range(cfg.pop_size)
    ]
    reports = evaluate_genomes(genomes, cfg, 0, executor=executor)
    return [Individual(g, r) for g, r in zip(genomes, reports)]


def select(pop: Sequence[Individual], k: int, rng: np.random.Generator) -> Genome:
    """Tournament of ``k`` entrants drawn uniformly with replacement."""
    if not pop:
        raise ValueError("cannot select from an empty population")
    if k < 1:
        raise ValueError("tournament size must be >= 1")
    entrants = rng.integers(0, len(pop), size=k)
    winner = min(entrants, key=lambda i: (-pop[i].fitness, i))
    return pop[int(winner)].genome


def breed(pop: Sequence[Individual], cfg: SearchConfig, generation: int, n_children: int) -> list[Genome]:
    children: list[Genome] = []
    pair = 0
    while len(children) < n_children:
        rng = derive_stream(cfg.master_seed, generation, pair, "breed")
        a = select(pop, cfg.tournament_k, rng)
        b = select(pop, cfg.tournament_k, rng)
        if rng.random() < cfg.crossover_prob:
            a, b = crossover(a, b, rng)
        children.append(mutate(a, cfg.mutation, rng))
        children.append(mutate(b, cfg.mutation, rng))
        pair += 1
    return children[:n_children]


def evolve_generation(
    pop: Sequence[Individual], cfg: SearchConfig, generation: int, executor: Executor | None = None
) -> tuple[Population, GenerationRecord]:
    """Build and evaluate generation ``generation`` from the evaluated previous one."""
    n = len(pop)
    ranked = sorted(range(n), key=lambda i: (-pop[i].fitness, i))
    elites = [pop[i] for i in ranked[: cfg.elitism_count]]
    children = breed(pop, cfg, generation, n - len(elites))
    reports = evaluate_genomes(children, cfg, generation, first_slot=len(elites), executor=executor)
    new_pop = elites + [Individual(g, r) for g, r in zip(children, reports)]
    return new_pop, make_record(new_pop, generation)


@dataclass
class Checkpoint:
    config: SearchConfig
    generation: int
    population: Population
    records: list[GenerationRecord]
    best: Individual
    version: int = CHECKPOINT_VERSION

    @property
    def finished(self) -> bool:
        if self.generation + 1 >= self.config.generations:
            return True
        target = self.config.target_fitness
        return target is not None and self.records[-1].best_fitness >= target

    def payload(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "generation": self.generation,
            # every stream is keyed by (master_seed, generation, slot, purpose),
            # so the next generation index is the whole RNG position
            "rng": {"scheme": "blake2b-philox", "master_seed": self.config.master_seed, "next_generation": self.generation + 1},
            "population": [{"genome": ind.genome.to_dict(), "report": ind.report.to_dict()} for ind in self.population],
            "records": [r.to_dict() for r in self.records],
            "best": {"genome": self.best.genome.to_dict(), "report": self.best.report.to_dict()},
        }

    def dumps(self) -> str:
        payload = self.payload()
        return json.dumps(
            {"format": CHECKPOINT_FORMAT, "version": self.version, "checksum": _checksum(payload), "payload": payload},
            indent=1,
        )

    @classmethod
    def loads(cls, text: str) -> Checkpoint:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"checkpoint is not valid JSON: {exc}") from None
        if not isinstance(doc, dict) or doc.get("format") != CHECKPOINT_FORMAT:
            raise CheckpointError("not a checkpoint file")
        if doc.get("version") != CHECKPOINT_VERSION:
            raise CheckpointVersionError(
                f"checkpoint version {doc.get('version')!r} is not supported (expected {CHECKPOINT_VERSION})"
            )
        payload = doc.get("payload")
        if not isinstance(payload, dict) or doc.get("checksum") != _checksum(payload):
            raise CheckpointError("checkpoint checksum mismatch")
        try:
            def ind(d):
                return Individual(Genome.from_dict(d["genome"]), FitnessReport.from_dict(d["report"]))

            return cls(
                config=SearchConfig.from_dict(payload["config"]),
                generation=int(payload["generation"]),
                population=[ind(d) for d in payload["population"]],
                records=[GenerationRecord.from_dict(r) for r in payload["records"]],
                best=ind(payload["best"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"malformed checkpoint: {exc}") from None

    def save(self, path: str | Path) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(self.dumps())
        tmp.replace(path)

    @classmethod
    def load(cls, path: str | Path) -> Checkpoint:
        return cls.loads(Path(path).read_text())


def _checksum(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass
class SearchResult:
    best_genome: Genome
    best_report: FitnessReport
    records: list[GenerationRecord]
    checkpoint: Checkpoint


def run_search(
    cfg: SearchConfig | None = None,
    workers: int = 1,
    resume: Checkpoint | None = None,
    on_generation: Callable[[GenerationRecord, Checkpoint], None] | None = None,
    max_new_generations: int | None = None,
) -> SearchResult:
    """Run (or continue) a search until the generation budget or target is reached.

    ``max_new_generations`` stops early after that many generations have been
    produced in this call; the returned checkpoint resumes the run exactly.
    """
    if resume is not None:
        cfg = resume.config
    if cfg is None:
        raise ValueError("need a config or a checkpoint")
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        produced = 0
        if resume is None:
            pop = init_population(cfg, executor)
            records = [make_record(pop, 0)]
            ckpt = Checkpoint(cfg, 0, pop, records, pop[best_index(pop)])
            produced = 1
            if on_generation:
                on_generation(records[-1], ckpt)
        else:
            ckpt = Checkpoint(cfg, resume.generation, list(resume.population), list(resume.records), resume.best)
        while not ckpt.finished and (max_new_generations is None or produced < max_new_generations):
            gen = ckpt.generation + 1
            pop, rec = evolve_generation(ckpt.population, cfg, gen, executor)
            champion = pop[best_index(pop)]
            best = champion if champion.fitness > ckpt.best.fitness else ckpt.best
            ckpt = Checkpoint(cfg, gen, pop, ckpt.records + [rec], best)
            produced += 1
            if on_generation:
                on_generation(rec, ckpt)
    finally:
        if executor is not None:
            executor.shutdown()
    return SearchResult(ckpt.best.genome, ckpt.best.report, ckpt.records, ckpt)
