"""Tests for the evaluation-suite corpus tooling and study harnesses."""

import math

import numpy as np
import pytest

from turnprint.classify import predict_trip_map, train
from turnprint.config import RunConfig
from turnprint.evalsuite import (
    RANDOM_KNOB_RANGES,
    benchmark_profiles,
    build_corpus,
    build_oracle_route,
    build_route,
    extract_corpus,
    flatten,
    knob_distance,
    load_corpus,
    perr_sweep,
    perturb,
    random_profile,
    random_profile_pair,
    relabel,
    run_eval_suite,
    save_corpus,
    subset_by_labels,
)
from turnprint.features import FEATURE_NAMES, FeatureVector
from turnprint.pipeline import trace_to_vectors
from turnprint.seeds import derive_seed
from turnprint.simgen import (
    LaneChange,
    LeftTurn,
    RightTurn,
    Stop,
    Straight,
    UTurn,
)


class TestProfileDraws:
    def test_random_profile_stays_inside_the_documented_ranges(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            p = random_profile(rng)
            for name, lo, hi in RANDOM_KNOB_RANGES:
                assert lo <= getattr(p, name) <= hi, name
            assert p.steering_jitter_sd == 0.010
            assert p.accel_noise_sd == 0.15

    def test_random_pair_honors_the_minimum_distance(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a, b = random_profile_pair(rng, min_distance=0.65)
            assert knob_distance(a, b) >= 0.65

    def test_knob_distance_is_a_metric_on_the_knobs(self):
        rng = np.random.default_rng(1)
        a, b = random_profile(rng), random_profile(rng)
        assert knob_distance(a, a) == 0.0
        assert knob_distance(a, b) == knob_distance(b, a)
        assert knob_distance(a, b) > 0.0

    def test_benchmark_roster_labels_and_noise_scaling(self):
        roster = benchmark_profiles(12)
        assert sorted(roster) == [f"D{i:02d}" for i in range(1, 13)]
        quiet = benchmark_profiles(2, noise_scale=0.5)
        assert quiet["D01"].steering_jitter_sd == pytest.approx(0.005)
        assert quiet["D01"].accel_noise_sd == pytest.approx(0.075)
        with pytest.raises(ValueError, match="n must be"):
            benchmark_profiles(0)
        with pytest.raises(ValueError, match="n must be"):
            benchmark_profiles(13)


class TestRouteBuilders:
    def test_standard_route_shape(self):
        route = build_route(np.random.default_rng(5), 6)
        segments = route.segments
        assert isinstance(segments[0], Straight)
        assert isinstance(segments[-1], Straight)
        turns = [s for s in segments if isinstance(s, (LeftTurn, RightTurn))]
        assert len(turns) == 6
        assert sum(isinstance(s, LaneChange) for s in segments) == 1
        assert not any(isinstance(s, (UTurn, Stop)) for s in segments)
        # every maneuver is buffered by straights on both sides
        for i, seg in enumerate(segments):
            if not isinstance(seg, Straight):
                assert isinstance(segments[i - 1], Straight)
                assert isinstance(segments[i + 1], Straight)

    def test_routes_differ_across_draws_but_not_across_reruns(self):
        r1 = build_route(np.random.default_rng(5), 6)
        r2 = build_route(np.random.default_rng(5), 6)
        r3 = build_route(np.random.default_rng(6), 6)
        assert r1 == r2
        assert r1 != r3

    def test_oracle_route_mixes_in_confusers(self):
        route = build_oracle_route(np.random.default_rng(5), 6)
        kinds = [type(s) for s in route.segments]
        assert kinds.count(LaneChange) == 1
        assert kinds.count(UTurn) == 1
        assert kinds.count(Stop) == 1
        assert sum(k in (LeftTurn, RightTurn) for k in kinds) == 6


class TestVectorHelpers:
    def make(self, label, x=0.0):
        return FeatureVector(np.full(len(FEATURE_NAMES), x), "left", label)

    def test_relabel_replaces_only_the_label(self):
        vecs = [self.make("a", 1.0), self.make("b", 2.0)]
        out = relabel(vecs, "z")
        assert [v.label for v in out] == ["z", "z"]
        np.testing.assert_array_equal(out[1].values, vecs[1].values)
        assert vecs[0].label == "a"

    def test_subset_by_labels_filters_and_preserves_order(self):
        vecs = [self.make(l) for l in ("a", "b", "c", "a", "b")]
        out = subset_by_labels(vecs, ["a", "c"])
        assert [v.label for v in out] == ["a", "c", "a"]


@pytest.fixture(scope="module")
def small_corpus():
    return build_corpus(
        benchmark_profiles(3), trips_per_driver=3, turns_per_trip=8, seed=17
    )


@pytest.fixture(scope="module")
def small_vectors(small_corpus):
    return flatten(extract_corpus(small_corpus, RunConfig()))


class TestCorpusPersistence:
    def test_save_load_round_trip(self, tmp_path):
        corpus = build_corpus(
            benchmark_profiles(2), trips_per_driver=1, turns_per_trip=2, seed=3
        )
        save_corpus(corpus, tmp_path / "corpus")
        loaded = load_corpus(tmp_path / "corpus")
        assert loaded.seed == corpus.seed
        assert [t.name for t in loaded.trips] == [t.name for t in corpus.trips]
        assert [t.driver for t in loaded.trips] == [t.driver for t in corpus.trips]
        for got, want in zip(loaded.trips, corpus.trips):
            assert got.annotations == want.annotations
            np.testing.assert_allclose(got.trace.gyro, want.trace.gyro, rtol=1e-8)
            np.testing.assert_allclose(got.trace.accel, want.trace.accel, rtol=1e-8)
            assert got.trace.already_aligned == want.trace.already_aligned

    def test_missing_or_foreign_directory_is_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="cannot read corpus manifest"):
            load_corpus(tmp_path / "nowhere")
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "manifest.json").write_text('{"format": "other"}')
        with pytest.raises(ValueError, match="not a corpus directory"):
            load_corpus(bad)


class TestLabelCorruptionSweep:
    def test_accuracy_trend_is_non_increasing_within_noise(self, small_vectors):
        sweep = perr_sweep(small_vectors, seed=17)
        assert [p for p, _ in sweep] == [0.0, 5.0, 10.0, 15.0, 20.0]
        accs = [a for _, a in sweep]
        assert accs[0] >= max(accs) - 1e-9
        for prev, cur in zip(accs, accs[1:]):
            assert cur <= prev + 0.1


class TestNoiseCountermeasure:
    def test_large_noise_drives_trip_accuracy_to_chance(self):
        # 2 drivers, so chance is 50%; the perturbed sweep must fall
        # below chance + 10 points at some noise level while the clean
        # corpus stays perfectly identified. A probe trip that loses all
        # of its turns to noise counts as a miss: the countermeasure
        # succeeded on it.
        cfg = RunConfig()
        profiles = benchmark_profiles(2)
        train_corpus = build_corpus(
            profiles, trips_per_driver=2, turns_per_trip=6, seed=31
        )
        model = train(flatten(extract_corpus(train_corpus, cfg)), "nb", seed=0)
        probes = build_corpus(
            profiles, trips_per_driver=5, turns_per_trip=6, seed=77,
            trace_salt="probe",
        )

        def sweep_accuracy(noise_sd):
            hits = 0
            for trip in probes.trips:
                noisy = perturb(
                    trip.trace,
                    noise_sd,
                    trigger="always",
                    seed=derive_seed(0, "noise", trip.name),
                )
                vectors = trace_to_vectors(noisy, cfg)
                if vectors and predict_trip_map(model, vectors).predicted == trip.driver:
                    hits += 1
            return hits / len(probes.trips)

        assert sweep_accuracy(0.0) == 1.0
        chance = 0.5
        assert min(sweep_accuracy(s) for s in (0.5, 1.0)) < chance + 0.10

    def test_perturb_rejects_bad_arguments(self):
        trip = build_corpus(
            benchmark_profiles(1), trips_per_driver=1, turns_per_trip=2, seed=1
        ).trips[0]
        with pytest.raises(ValueError, match="nonnegative"):
            perturb(trip.trace, -0.1)
        with pytest.raises(ValueError, match="trigger"):
            perturb(trip.trace, 0.1, trigger="sometimes")


class TestEvalSuiteRunner:
    def test_quick_run_emits_every_report(self, small_corpus, tmp_path):
        cfg = RunConfig(seed=17)
        out_dir = tmp_path / "reports"
        report = run_eval_suite(cfg, small_corpus, out_dir, quick=True)
        for name in (
            "maneuver_accuracy.csv",
            "trip_accuracy.csv",
            "factor_analysis.csv",
            "interpolation_ablation.csv",
            "perr_sweep.csv",
            "summary.txt",
        ):
            assert (out_dir / name).exists(), name
        assert set(report["maneuver"]) == {"nb", "rf"}
        assert set(report["trip_curve"]) == set(range(1, 9))
        summary = (out_dir / "summary.txt").read_text()
        # reproducibility: the report embeds the full effective config
        assert "effective config:" in summary
        assert "seed = 17" in summary
        assert "delta_bump = 0.15" in summary
