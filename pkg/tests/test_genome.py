import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snnevo.errors import DimensionError
from snnevo.genome import (
    MICRO_NAMES,
    MICRO_RANGES,
    N_FLAGS,
    N_MICRO,
    Genome,
    MutationConfig,
    crossover,
    decode_micro,
    mutate,
    random_genome,
)


def genome_with_micro(name, value, n=2):
    m = np.zeros(N_MICRO)
    m[MICRO_NAMES.index(name)] = value
    return Genome(np.zeros(n * n), m, np.zeros(N_FLAGS))


def three_sigma(n, p):
    return 3 * math.sqrt(n * p * (1 - p))


class TestRandomGenome:
    def test_length(self, rng):
        g = random_genome(rng, 5)
        assert len(g) == 25 + 9 + 3
        assert g.n_neurons == 5

    def test_stream_advances(self, rng):
        assert random_genome(rng, 4) != random_genome(rng, 4)

    def test_same_seed_same_genome(self):
        a = random_genome(np.random.default_rng(9), 4)
        b = random_genome(np.random.default_rng(9), 4)
        assert a == b

    @pytest.mark.parametrize("position", [0, 1 + MICRO_NAMES.index("threshold")])
    def test_uniform_histogram(self, position):
        rng = np.random.default_rng(0)
        draws = np.array([random_genome(rng, 1).flat()[position] for _ in range(10_000)])
        n_bins = 5
        counts, _ = np.histogram(draws, bins=n_bins, range=(-1, 1))
        expected = draws.size / n_bins
        assert np.all(np.abs(counts - expected) <= three_sigma(draws.size, 1 / n_bins))
        assert draws.min() >= -1 and draws.max() < 1

    def test_flags_fair(self):
        rng = np.random.default_rng(1)
        bits = np.concatenate([random_genome(rng, 1).flag_genes for _ in range(10_000)])
        assert abs(bits.sum() - bits.size / 2) <= three_sigma(bits.size, 0.5)

    def test_immutable(self, rng):
        g = random_genome(rng, 3)
        with pytest.raises(ValueError):
            g.weight_genes[0] = 1.0


class TestCrossover:
    def test_identical_parents(self, rng):
        a = random_genome(rng, 4)
        c1, c2 = crossover(a, a, rng)
        assert c1 == a and c2 == a

    def test_positionwise_conservation(self, rng):
        a, b = random_genome(rng, 4), random_genome(rng, 4)
        c1, c2 = crossover(a, b, rng)
        fa, fb, f1, f2 = a.flat(), b.flat(), c1.flat(), c2.flat()
        for k in range(fa.size):
            assert sorted([f1[k], f2[k]]) == sorted([fa[k], fb[k]])

    def test_origin_proportion(self):
        rng = np.random.default_rng(2)
        a = Genome(np.zeros(4), np.zeros(N_MICRO), np.zeros(N_FLAGS))
        b = Genome(np.ones(4), np.ones(N_MICRO), np.ones(N_FLAGS))
        from_b = 0
        total = 0
        for _ in range(10_000):
            c1, _ = crossover(a, b, rng)
            f = c1.flat()
            from_b += int(f.sum())
            total += f.size
        assert abs(from_b - total / 2) <= three_sigma(total, 0.5)

    def test_length_mismatch(self, rng):
        with pytest.raises(DimensionError):
            crossover(random_genome(rng, 3), random_genome(rng, 4), rng)

    def test_pure_given_stream(self, rng):
        a, b = random_genome(rng, 4), random_genome(rng, 4)
        r1, r2 = np.random.default_rng(5), np.random.default_rng(5)
        assert crossover(a, b, r1) == crossover(a, b, r2)


class TestMutate:
    def test_zero_probabilities_identity(self, rng):
        g = random_genome(rng, 4)
        assert mutate(g, MutationConfig(1.0, 1.0, 0.0, 0.0), rng) == g

    def test_zero_sigma_identity(self, rng):
        g = random_genome(rng, 4)
        assert mutate(g, MutationConfig(0.0, 0.0, 0.0, 1.0), rng) == g

    def test_flag_flip_rate(self):
        rng = np.random.default_rng(3)
        g = Genome(np.zeros(1), np.zeros(N_MICRO), np.zeros(N_FLAGS))
        cfg = MutationConfig(0.0, 0.0, 0.2, 0.0)
        flips = sum(int(mutate(g, cfg, rng).flag_genes.sum()) for _ in range(10_000))
        n = 10_000 * N_FLAGS
        assert abs(flips - 0.2 * n) <= three_sigma(n, 0.2)

    def test_sigmas_apply_to_their_genes(self, rng):
        g = random_genome(rng, 3)
        m = mutate(g, MutationConfig(weight_sigma=0.5, micro_sigma=0.0, flag_flip_prob=0, per_gene_prob=1), rng)
        assert np.array_equal(m.micro_genes, g.micro_genes)
        assert not np.array_equal(m.weight_genes, g.weight_genes)
        assert len(m) == len(g)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            MutationConfig(flag_flip_prob=1.5)


class TestDecodeMicro:
    def test_threshold_endpoints(self):
        assert decode_micro(genome_with_micro("threshold", -1.0)).threshold == 0.5
        assert decode_micro(genome_with_micro("threshold", 1.0)).threshold == 2.0

    def test_decay_midpoint(self):
        assert decode_micro(genome_with_micro("decay", 0.0)).decay == 0.495

    def test_out_of_range_clamped(self):
        assert decode_micro(genome_with_micro("threshold", 3.7)) == decode_micro(genome_with_micro("threshold", 1.0))

    def test_refractory_integer(self):
        vals = [decode_micro(genome_with_micro("refractory_period", x)).refractory_period for x in np.linspace(-1, 1, 41)]
        assert vals[0] == 0 and vals[-1] == 5
        assert all(isinstance(v, int) for v in vals)

    def test_symmetric_forces_a_minus(self):
        g = genome_with_micro("stdp_a_plus", 0.6).with_flags(symmetric_stdp=True)
        micro = decode_micro(g)
        assert micro.stdp_a_minus == micro.stdp_a_plus

    @pytest.mark.parametrize("name", MICRO_NAMES)
    def test_monotone_and_in_range(self, name):
        lo, hi = MICRO_RANGES[name]
        values = [getattr(decode_micro(genome_with_micro(name, x)), name) for x in np.linspace(-1, 1, 101)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert lo <= values[0] and values[-1] <= hi

    @settings(max_examples=200)
    @given(st.lists(st.floats(-50, 50), min_size=N_MICRO, max_size=N_MICRO), st.lists(st.integers(0, 1), min_size=3, max_size=3))
    def test_total(self, micro, flags):
        # decode never fails, whatever the raw gene values
        decode_micro(Genome(np.zeros(4), micro, flags))


class TestClosure:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_operators_yield_valid_genomes(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_genome(rng, 3), random_genome(rng, 3)
        cfg = MutationConfig(2.0, 5.0, 0.5, 0.5)
        for child in crossover(a, b, rng):
            m = mutate(child, cfg, rng)
            assert len(m) == len(a)
            decode_micro(m)


class TestSerialization:
    def test_round_trip_bit_exact(self, rng):
        g = mutate(random_genome(rng, 6), MutationConfig(per_gene_prob=1.0), rng)
        back = Genome.loads(g.dumps())
        assert back == g
        assert back.weight_genes.tobytes() == g.weight_genes.tobytes()
        assert back.digest() == g.digest()

    def test_record_fields(self, rng):
        d = random_genome(rng, 2).to_dict()
        assert list(d) == ["version", "N", "weight_genes", "micro_genes", "flag_genes"]

    def test_bad_version(self, rng):
        d = random_genome(rng, 2).to_dict()
        d["version"] = 99
        with pytest.raises(ValueError):
            Genome.from_dict(d)
