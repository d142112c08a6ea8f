from pathlib import Path

import pytest
import yaml

from snnevo.config import dump_config, load_config, parse_config
from snnevo.errors import ConfigError

GOLDEN = Path(__file__).parent / "golden"
CONFIGS = Path(__file__).parent.parent / "configs"


def minimal(**overrides):
    doc = {
        "search": {"pop_size": 4, "generations": 2},
        "scenario": {"name": "cue_assoc", "seed": 1},
        "topology": {"N": 8},
    }
    for dotted, value in overrides.items():
        node = doc
        *head, last = dotted.split(".")
        for k in head:
            node = node.setdefault(k, {})
        if value is None:
            node.pop(last, None)
        else:
            node[last] = value
    return doc


class TestParse:
    def test_defaults_filled(self):
        cfg = parse_config(minimal())
        s = cfg.search
        assert (s.tournament_k, s.elitism_count, s.crossover_prob) == (3, 2, 0.9)
        assert (s.fitness.K, s.fitness.lambda_disp, s.fitness.T_max) == (5, 0.5, 64)
        assert (s.topology.n_in, s.topology.n_out) == (4, 4)
        assert cfg.output_dir is None

    def test_missing_pop_size_named(self):
        with pytest.raises(ConfigError, match=r"search\.pop_size"):
            parse_config(minimal(**{"search.pop_size": None}))

    @pytest.mark.parametrize(
        "key,value,path",
        [
            ("search.colour", 1, "search.colour"),
            ("search.mutation.sigma", 0.1, "search.mutation.sigma"),
            ("fitness.K", 1, "fitness.K"),
            ("fitness.lambda_disp", -1.0, "fitness.lambda_disp"),
            ("search.pop_size", "ten", "search.pop_size"),
            ("scenario.perturbation", {"kind": "quake", "level": 0.1}, "scenario.perturbation.kind"),
            ("topology.N", 6, "topology.N"),
            ("topology.n_in", 3, "topology.n_in"),
            ("scenario.params", {"n_cues": 4, "colour": 2}, "scenario.params"),
            ("scenario.name", "pong", "scenario"),
        ],
    )
    def test_errors_name_the_field(self, key, value, path):
        with pytest.raises(ConfigError) as info:
            parse_config(minimal(**{key: value}))
        assert str(info.value).startswith(path)

    def test_cross_field(self):
        with pytest.raises(ConfigError, match="elitism_count"):
            parse_config(minimal(**{"search.elitism_count": 4}))
        with pytest.raises(ConfigError, match="tournament_k"):
            parse_config(minimal(**{"search.tournament_k": 5}))

    def test_not_a_mapping(self):
        with pytest.raises(ConfigError):
            parse_config([1, 2])

    def test_seed_override(self):
        assert parse_config(minimal(), seed_override=42).search.master_seed == 42


class TestFiles:
    def test_echo_round_trip(self, tmp_path):
        cfg = load_config(GOLDEN / "tiny.yaml")
        path = tmp_path / "echo.yaml"
        path.write_text(dump_config(cfg))
        assert load_config(path) == cfg
        assert dump_config(load_config(path)) == dump_config(cfg)

    @pytest.mark.parametrize("name", ["cue_assoc.yaml", "gridworld.yaml"])
    def test_shipped_configs_valid(self, name):
        cfg = load_config(CONFIGS / name)
        assert cfg.search.pop_size == 64 and cfg.search.generations == 50

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "nope.yaml")

    def test_bad_yaml(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("search: [unclosed")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_echo_is_plain_yaml(self):
        doc = yaml.safe_load(dump_config(load_config(GOLDEN / "tiny.yaml")))
        assert list(doc) == ["search", "fitness", "scenario", "topology", "output"]
