"""Command-line front end: ``snnevo run | resume | eval | probe``.

Exit codes: 0 success, 2 missing input, 3 validation, 4 runtime, 5 checkpoint version.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import yaml

from snnevo.config import RunConfig, dump_config, load_config
from snnevo.errors import CheckpointError, CheckpointVersionError, ConfigError, ScenarioError
from snnevo.evolution import LOG_COLUMNS, Checkpoint, GenerationRecord, run_search
from snnevo.fitness import FitnessConfig, evaluate
from snnevo.fixedpoint import ProbeConfig, generalization_probe
from snnevo.genome import Genome
from snnevo.scenarios import PERTURBATION_KINDS, ScenarioSpec

log = logging.getLogger("snnevo")

EXIT_OK = 0
EXIT_MISSING = 2
EXIT_INVALID = 3
EXIT_RUNTIME = 4
EXIT_VERSION = 5

LOG_NAME = "generations.csv"
GENOME_NAME = "best_genome.json"
CHECKPOINT_NAME = "checkpoint.json"
CONFIG_NAME = "config.yaml"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class GenerationLog:
    """Append-only CSV of generation records, flushed row by row."""

    def __init__(self, path: Path, records: list[GenerationRecord] = ()):
        self.path = path
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(LOG_COLUMNS)
            for rec in records:
                w.writerow(rec.row())

    def append(self, rec: GenerationRecord) -> None:
        with open(self.path, "a", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(rec.row())


def read_log(path: str | Path) -> list[GenerationRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != LOG_COLUMNS:
        raise ValueError(f"{path}: unexpected header {rows[:1]}")
    return [
        GenerationRecord(int(r[0]), *(float(x) for x in r[1:6]), int(r[6]))  # type: ignore[arg-type]
        for r in rows[1:]
    ]


def _run_with_artifacts(out: Path, cfg: RunConfig | None, resume: Checkpoint | None, workers: int, stop_after: int | None):
    out.mkdir(parents=True, exist_ok=True)
    search_cfg = resume.config if resume is not None else cfg.search
    echo = RunConfig(search_cfg, None)
    (out / CONFIG_NAME).write_text(dump_config(echo))
    gen_log = GenerationLog(out / LOG_NAME, resume.records if resume is not None else [])

    def on_generation(rec: GenerationRecord, ckpt: Checkpoint) -> None:
        gen_log.append(rec)
        ckpt.save(out / CHECKPOINT_NAME)
        log.info("generation %d best=%.4f mean=%.4f", rec.generation, rec.best_fitness, rec.mean_fitness)

    result = run_search(search_cfg, workers=workers, resume=resume, on_generation=on_generation, max_new_generations=stop_after)
    result.checkpoint.save(out / CHECKPOINT_NAME)
    (out / GENOME_NAME).write_text(result.best_genome.dumps())
    return result


def cmd_run(config_path, out_dir=None, seed_override=None, workers=1, stop_after=None) -> int:
    try:
        cfg = load_config(config_path, seed_override)
    except FileNotFoundError:
        raise CliError(f"config file not found: {config_path}", EXIT_MISSING) from None
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    out = out_dir or cfg.output_dir
    if out is None:
        raise CliError("output.dir: no output directory (set it in the config or pass --out)", EXIT_INVALID)
    _run_with_artifacts(Path(out), cfg, None, workers, stop_after)
    return EXIT_OK


def cmd_resume(checkpoint_path, out_dir, workers=1, stop_after=None) -> int:
    try:
        ckpt = Checkpoint.load(checkpoint_path)
    except FileNotFoundError:
        raise CliError(f"checkpoint not found: {checkpoint_path}", EXIT_MISSING) from None
    except CheckpointVersionError as exc:
        raise CliError(str(exc), EXIT_VERSION) from None
    except CheckpointError as exc:
        raise CliError(str(exc), EXIT_RUNTIME) from None
    _run_with_artifacts(Path(out_dir), None, ckpt, workers, stop_after)
    return EXIT_OK


def _load_genome(path) -> Genome:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise CliError(f"genome file not found: {path}", EXIT_MISSING) from None
    try:
        return Genome.loads(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"cannot parse genome {path}: {exc}", EXIT_INVALID) from None


def _scenario_and_fitness(config_path, scenario_name, scenario_seed) -> tuple[ScenarioSpec, FitnessConfig]:
    if config_path is not None:
        try:
            cfg = load_config(config_path)
        except FileNotFoundError:
            raise CliError(f"config file not found: {config_path}", EXIT_MISSING) from None
        except ConfigError as exc:
            raise CliError(str(exc), EXIT_INVALID) from None
        spec, fit = cfg.search.scenario, cfg.search.fitness
        if scenario_name is None and scenario_seed is None:
            return spec, fit
        name = scenario_name or spec.name
        seed = spec.seed if scenario_seed is None else scenario_seed
        params = spec.params if name == spec.name else None
    else:
        if scenario_name is None:
            raise CliError("scenario: pass --scenario or --config", EXIT_INVALID)
        name, seed, params, fit = scenario_name, scenario_seed or 0, None, FitnessConfig()
    try:
        return ScenarioSpec(name, seed, params), fit
    except ScenarioError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None


def cmd_eval(genome_path, config_path=None, scenario=None, scenario_seed=None, episodes=None, t_max=None) -> int:
    genome = _load_genome(genome_path)
    spec, fit = _scenario_and_fitness(config_path, scenario, scenario_seed)
    try:
        fit = FitnessConfig(
            K=fit.K if episodes is None else episodes,
            lambda_disp=fit.lambda_disp,
            eps_plastic=fit.eps_plastic,
            penalty=fit.penalty,
            T_max=fit.T_max if t_max is None else t_max,
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    if genome.n_neurons < spec.obs_dim + spec.n_actions:
        raise CliError(f"genome N={genome.n_neurons} too small for scenario {spec.name}", EXIT_INVALID)
    report = evaluate(genome, spec, fit)
    print(report.dumps())
    return EXIT_OK


def cmd_probe(genome_path, config_path=None, kind="none", level=0.0, episodes=20, tol=0.05, window=3,
              scenario=None, scenario_seed=None) -> int:
    if kind not in PERTURBATION_KINDS:
        raise CliError(f"perturb: unknown kind {kind!r}; expected one of {PERTURBATION_KINDS}", EXIT_INVALID)
    try:
        probe = ProbeConfig(episodes, tol, window)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    genome = _load_genome(genome_path)
    spec, fit = _scenario_and_fitness(config_path, scenario, scenario_seed)
    try:
        train, perturbed = generalization_probe(genome, spec, kind, level, probe, fit)
    except ScenarioError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    print(json.dumps({"train": train.to_dict(), "perturbed": perturbed.to_dict()}, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="snnevo", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a search from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--stop-after", type=int, help="stop after this many generations (resume later)")

    res = sub.add_parser("resume", help="continue a run from its checkpoint")
    res.add_argument("--checkpoint", required=True)
    res.add_argument("--out", required=True)
    res.add_argument("--workers", type=int, default=1)
    res.add_argument("--stop-after", type=int)

    ev = sub.add_parser("eval", help="evaluate one genome and print its fitness report")
    ev.add_argument("--genome", required=True)
    ev.add_argument("--config")
    ev.add_argument("--scenario")
    ev.add_argument("--scenario-seed", type=int)
    ev.add_argument("--episodes", type=int, help="K, the number of repeated episodes")
    ev.add_argument("--t-max", type=int)

    pr = sub.add_parser("probe", help="fixed-point convergence on a scenario and a perturbed neighbour")
    pr.add_argument("--genome", required=True)
    pr.add_argument("--config")
    pr.add_argument("--scenario")
    pr.add_argument("--scenario-seed", type=int)
    pr.add_argument("--perturb", default="none")
    pr.add_argument("--level", type=float, default=0.0)
    pr.add_argument("--episodes", type=int, default=20)
    pr.add_argument("--tol", type=float, default=0.05)
    pr.add_argument("--window", type=int, default=3)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out, args.seed, args.workers, args.stop_after)
        if args.command == "resume":
            return cmd_resume(args.checkpoint, args.out, args.workers, args.stop_after)
        if args.command == "eval":
            return cmd_eval(args.genome, args.config, args.scenario, args.scenario_seed, args.episodes, args.t_max)
        return cmd_probe(args.genome, args.config, args.perturb, args.level, args.episodes, args.tol, args.window,
                         args.scenario, args.scenario_seed)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - any failure inside the engine is a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
