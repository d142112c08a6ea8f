import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracle import NaiveSimulator, hamming_fraction

from snnevo.fitness import PAD, BehaviorSignature, FitnessConfig
from snnevo.fixedpoint import (
    ConvergenceReport,
    ProbeConfig,
    detect_fixed_point,
    detect_from_distances,
    generalization_probe,
    signature_sequence,
    stable_suffix_start,
)
from snnevo.genome import N_MICRO, Genome
from snnevo.scenarios import NONE, ScenarioSpec, reset

TINY = ScenarioSpec("cue_assoc", 3, {"n_cues": 2, "rounds": 3, "present_ticks": 2, "decision_ticks": 3})

distance_lists = st.lists(st.sampled_from([0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0]), min_size=1, max_size=15)


def sig(actions, score=0.0):
    return BehaviorSignature(np.array(actions), 0, score)


def brute_n_star(d, tol, m):
    for s in range(len(d) + 1):
        if all(x < tol for x in d[s:]) and len(d) - s >= m:
            return s
    return None


def lively_genome(n=5, seed=4, stdp=True):
    rng = np.random.default_rng(seed)
    micro = np.zeros(N_MICRO)
    micro[0] = -1.0
    micro[2] = 1.0
    micro[7] = 1.0
    micro[4] = micro[5] = 0.5
    return Genome(rng.uniform(-1, 1.5, n * n), micro, [int(stdp), 1, 0])


class TestDetect:
    def test_constant_sequence(self):
        rep = detect_fixed_point([sig([0, 1, 1])] * 5, 0.05, 2)
        assert rep.converged and rep.n_star == 0
        assert rep.consecutive_distances == (0.0,) * 4

    def test_stated_example(self):
        rep = detect_from_distances([0.5, 0.2, 0.05, 0.01, 0.0], 0.1, 2)
        assert rep.converged and rep.n_star == 2

    def test_never_settles(self):
        rep = detect_from_distances([0.3, 0.2, 0.5, 0.1], 0.1, 2)
        assert not rep.converged and rep.n_star is None

    def test_suffix_too_short(self):
        rep = detect_from_distances([0.5, 0.5, 0.5, 0.0], 0.1, 2)
        assert not rep.converged

    def test_too_few_signatures(self):
        with pytest.raises(ValueError):
            detect_fixed_point([sig([0])] * 3, 0.1, 3)

    def test_signatures_to_distances(self):
        sigs = [sig([0, 1, 2, 3]), sig([0, 1, 2, 2]), sig([0, 1, 2, 2], 4.0)]
        rep = detect_fixed_point(sigs, 0.1, 1)
        assert rep.consecutive_distances == (0.25, 0.0)
        assert rep.n_star == 1 and rep.final_score == 4.0

    def test_round_trip(self):
        rep = detect_from_distances([0.5, 0.0, 0.0], 0.1, 2, 3.0)
        assert ConvergenceReport.from_dict(rep.to_dict()) == rep

    @settings(max_examples=300)
    @given(distance_lists, st.sampled_from([0.02, 0.06, 0.15, 0.3]), st.integers(1, 4))
    def test_minimal_and_matches_brute_force(self, d, tol, m):
        if len(d) < m:
            return
        rep = detect_from_distances(d, tol, m)
        assert rep.n_star == brute_n_star(d, tol, m)
        assert rep.converged == (rep.n_star is not None)
        if rep.converged:
            assert all(x < tol for x in d[rep.n_star :])
            assert rep.n_star == 0 or d[rep.n_star - 1] >= tol

    @settings(max_examples=200)
    @given(distance_lists, st.integers(1, 3))
    def test_monotone_in_tol(self, d, m):
        if len(d) < m:
            return
        prev = None
        for tol in (0.02, 0.06, 0.15, 0.3, 2.0):
            n = stable_suffix_start(d, tol, m)
            if prev is not None:
                assert n is not None and n <= prev
            prev = n

    def test_probe_config_validation(self):
        with pytest.raises(ValueError):
            ProbeConfig(max_episodes=3, window=3)
        with pytest.raises(ValueError):
            ProbeConfig(tol=0.0)


class TestSignatureSequence:
    def test_single_episode(self):
        assert len(signature_sequence(lively_genome(), TINY, 1, FitnessConfig(T_max=6))) == 1

    def test_frozen_weights_repeat(self):
        sigs = signature_sequence(lively_genome(stdp=False), TINY, 4, FitnessConfig(T_max=6))
        assert all(s == sigs[0] for s in sigs)
        rep = detect_fixed_point(sigs, 0.05, 2)
        assert rep.converged and rep.n_star == 0

    def test_manual_replay(self):
        g = lively_genome()
        sigs = signature_sequence(g, TINY, 3, FitnessConfig(T_max=6))
        micro = g.micro_params()
        sim = NaiveSimulator(g.weight_genes.reshape(5, 5), micro, 2)
        gain = 1.2 * micro.threshold
        expected = []
        for _ in range(3):
            sim.v, sim.refr, sim.arriving, sim.trace = [micro.v_reset] * 5, [0] * 5, [0.0] * 5, [0.0] * 5
            env, obs = reset(TINY)
            actions = []
            while not env.done:
                counts = [0, 0]
                for t in range(5):
                    fired = sim.tick([gain * x for x in obs])
                    sim.learn(fired)
                    if t >= 2:
                        counts[0] += fired[3]
                        counts[1] += fired[4]
                a = NONE if max(counts) == 0 else counts.index(max(counts))
                actions.append(a)
                env, obs, _, _ = env.step(a)
            expected.append(actions + [PAD] * (6 - len(actions)))
        assert [s.actions.tolist() for s in sigs] == expected
        rep = detect_fixed_point(sigs, 0.05, 1)
        assert rep.consecutive_distances == (hamming_fraction(*expected[:2]), hamming_fraction(*expected[1:]))


class TestProbe:
    def test_level_zero_identical(self):
        probe = ProbeConfig(6, 0.05, 2)
        train, pert = generalization_probe(lively_genome(), TINY, "cue_remap", 0.0, probe, FitnessConfig(T_max=6))
        assert train == pert

    def test_frozen_converges_at_zero(self):
        probe = ProbeConfig(5, 0.05, 2)
        for kind in ("none", "cue_remap", "obs_noise"):
            train, pert = generalization_probe(lively_genome(stdp=False), TINY, kind, 0.5, probe, FitnessConfig(T_max=6))
            assert train.n_star == 0 and pert.n_star == 0

    def test_perturbed_report_well_formed(self):
        probe = ProbeConfig(8, 0.05, 3)
        train, pert = generalization_probe(lively_genome(n=10, seed=9), ScenarioSpec("cue_assoc", 5), "cue_remap", 0.25, probe)
        for rep in (train, pert):
            assert len(rep.consecutive_distances) == 7
            assert all(0.0 <= d <= 1.0 for d in rep.consecutive_distances)
            assert rep.converged == (rep.n_star is not None)
            assert rep.stability_window == 3 and rep.tol == 0.05
            assert 0.0 <= rep.final_score <= 8.0
