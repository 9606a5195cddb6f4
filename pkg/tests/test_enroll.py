"""Tests for mixture-profile enrollment and open-set trip attribution."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from turnprint.enroll import (
    GMM_VARIANCE_FLOOR,
    ProfileTable,
    assign_or_new_driver,
    corrupt_labels,
    enroll_driver,
    fit_gmm,
    load_profiles,
    save_profiles,
    trip_loglikelihood,
    vector_log_density,
)
from turnprint.features import FEATURE_NAMES, FeatureVector

D = len(FEATURE_NAMES)


def tight_trip(center, rng, n=24, d=8, sd=0.03):
    """Cluster sample whose mean log density is comfortably positive."""
    return center + rng.normal(0.0, sd, size=(n, d))


class TestFitGmm:
    def test_single_component_is_the_sample_moments(self):
        rng = np.random.default_rng(4)
        x = rng.normal(2.0, 1.5, size=(15, 6))
        model = fit_gmm(x, 1, seed=4)
        assert model.k == 1
        np.testing.assert_array_equal(model.means[0], x.mean(axis=0))
        np.testing.assert_array_equal(
            model.variances[0], np.maximum(x.var(axis=0), GMM_VARIANCE_FLOOR)
        )
        np.testing.assert_array_equal(model.weights, [1.0])

    def test_two_separated_clusters_are_recovered(self):
        rng = np.random.default_rng(42)
        sd = 0.5
        a = rng.normal(-5.0, sd, size=(40, 8))
        b = rng.normal(+5.0, sd, size=(40, 8))
        model = fit_gmm(np.vstack([a, b]), 2, seed=1)
        fitted = model.means[np.argsort(model.means[:, 0])]
        assert np.abs(fitted[0] - a.mean(axis=0)).max() < 0.1 * sd
        assert np.abs(fitted[1] - b.mean(axis=0)).max() < 0.1 * sd
        np.testing.assert_allclose(model.weights, [0.5, 0.5], atol=1e-6)

    def test_constant_data_hits_the_variance_floor_and_stays_finite(self):
        x = np.ones((10, 4))
        model = fit_gmm(x, 2, seed=1)
        assert np.all(model.variances == GMM_VARIANCE_FLOOR)
        assert np.isfinite(trip_loglikelihood(model, x))

    @settings(max_examples=25, deadline=None)
    @given(
        seed=st.integers(0, 2**31 - 1),
        k=st.integers(1, 4),
        n=st.integers(12, 40),
    )
    def test_weights_are_positive_and_sum_to_one(self, seed, k, n):
        rng = np.random.default_rng(seed)
        x = rng.normal(0.0, 1.0, size=(n, 5)) + rng.integers(0, 3, size=(n, 1)) * 4.0
        model = fit_gmm(x, k, seed=seed)
        assert np.all(model.weights > 0.0)
        assert abs(model.weights.sum() - 1.0) < 1e-9

    def test_same_seed_and_data_refit_bitwise_identically(self):
        rng = np.random.default_rng(8)
        x = rng.normal(0.0, 1.0, size=(30, 6))
        m1 = fit_gmm(x, 2, seed=5)
        m2 = fit_gmm(x, 2, seed=5)
        np.testing.assert_array_equal(m1.means, m2.means)
        np.testing.assert_array_equal(m1.variances, m2.variances)
        np.testing.assert_array_equal(m1.weights, m2.weights)

    def test_degenerate_requests_are_rejected(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(5, 3))
        with pytest.raises(ValueError, match="at least 1"):
            fit_gmm(x, 0, seed=0)
        with pytest.raises(ValueError, match="need at least 6 vectors"):
            fit_gmm(x, 6, seed=0)
        with pytest.raises(ValueError, match="2-d array"):
            fit_gmm(np.zeros(7), 1, seed=0)


class TestGateStatistic:
    def test_training_data_scores_above_a_shifted_copy(self):
        rng = np.random.default_rng(6)
        x = rng.normal(0.0, 1.0, size=(50, 8))
        model = fit_gmm(x, 2, seed=2)
        assert trip_loglikelihood(model, x) > trip_loglikelihood(model, x + 10.0)

    def test_same_cluster_beats_other_cluster_across_seeded_trials(self):
        # cluster pairs 3 sd apart; the gate must rank the matching probe
        # above the foreign one in at least 95 of 100 trials
        wins = 0
        for trial in range(100):
            rng = np.random.default_rng(5000 + trial)
            ca = rng.normal(0.0, 1.0, size=8)
            step = rng.normal(0.0, 1.0, size=8)
            cb = ca + 3.0 * step / np.linalg.norm(step)
            model = fit_gmm(ca + rng.normal(0.0, 1.0, size=(60, 8)), 2, seed=trial)
            s_same = trip_loglikelihood(model, ca + rng.normal(0.0, 1.0, size=(20, 8)))
            s_other = trip_loglikelihood(model, cb + rng.normal(0.0, 1.0, size=(20, 8)))
            wins += s_same > s_other
        assert wins >= 95

    def test_dimension_mismatch_is_rejected(self):
        rng = np.random.default_rng(1)
        model = fit_gmm(rng.normal(size=(10, 4)), 1, seed=0)
        with pytest.raises(ValueError, match="expected"):
            vector_log_density(model, np.zeros((3, 5)))

    def test_no_vectors_is_an_error(self):
        rng = np.random.default_rng(1)
        model = fit_gmm(rng.normal(size=(10, 4)), 1, seed=0)
        with pytest.raises(ValueError, match="no vectors"):
            trip_loglikelihood(model, [])


class TestAssignOrNewDriver:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.trip_a1 = tight_trip(0.0, rng)
        self.trip_a2 = tight_trip(0.0, rng)
        self.trip_b = tight_trip(9.0, rng)
        self.trip_a3 = tight_trip(0.0, rng)

    def test_empty_table_opens_the_first_profile(self):
        table = ProfileTable(seed=77)
        label, created = assign_or_new_driver(table, self.trip_a1)
        assert (label, created) == ("D_1", True)
        assert table.labels() == ["D_1"]
        assert table.entries[0].n_vectors == self.trip_a1.shape[0]

    def test_matching_trip_is_appended_not_duplicated(self):
        table = ProfileTable(seed=77)
        assign_or_new_driver(table, self.trip_a1)
        label, created = assign_or_new_driver(table, self.trip_a2)
        assert (label, created) == ("D_1", False)
        assert table.labels() == ["D_1"]
        assert table.entries[0].n_vectors == 48

    def test_foreign_trip_opens_the_next_profile(self):
        table = ProfileTable(seed=77)
        assign_or_new_driver(table, self.trip_a1)
        assign_or_new_driver(table, self.trip_a2)
        label, created = assign_or_new_driver(table, self.trip_b)
        assert (label, created) == ("D_2", True)
        assert table.labels() == ["D_1", "D_2"]

    def test_match_leaves_other_entries_untouched(self):
        table = ProfileTable(seed=77)
        assign_or_new_driver(table, self.trip_a1)
        assign_or_new_driver(table, self.trip_b)
        b_before = table.entries[1].vectors.copy()
        label, created = assign_or_new_driver(table, self.trip_a3)
        assert (label, created) == ("D_1", False)
        np.testing.assert_array_equal(table.entries[1].vectors, b_before)

    def test_high_threshold_forces_a_new_profile(self):
        table = ProfileTable(seed=77)
        assign_or_new_driver(table, self.trip_a1)
        label, created = assign_or_new_driver(table, self.trip_a2, threshold=1e9)
        assert (label, created) == ("D_2", True)

    def test_rebuilding_from_the_same_trips_is_bitwise_identical(self):
        trips = [self.trip_a1, self.trip_a2, self.trip_b, self.trip_a3]
        tables = []
        for _ in range(2):
            table = ProfileTable(seed=77)
            for trip in trips:
                assign_or_new_driver(table, trip)
            tables.append(table)
        first, second = tables
        assert first.labels() == second.labels()
        for e1, e2 in zip(first.entries, second.entries):
            np.testing.assert_array_equal(e1.vectors, e2.vectors)
            np.testing.assert_array_equal(e1.model.means, e2.model.means)
            np.testing.assert_array_equal(e1.model.weights, e2.model.weights)
            np.testing.assert_array_equal(e1.model.variances, e2.model.variances)

    def test_duplicate_enrollment_label_is_rejected(self):
        table = ProfileTable(seed=1)
        enroll_driver(table, "X", self.trip_a1)
        with pytest.raises(ValueError, match="already enrolled"):
            enroll_driver(table, "X", self.trip_a2)


class TestCorruptLabels:
    def make_vectors(self, n=100):
        return [
            FeatureVector(np.full(D, float(i)), "right", "a" if i % 2 else "b")
            for i in range(n)
        ]

    def test_zero_rate_is_an_identity_copy(self):
        vecs = self.make_vectors()
        out = corrupt_labels(vecs, 0.0, seed=3)
        assert [v.label for v in out] == [v.label for v in vecs]
        assert all(o is not v for o, v in zip(out, vecs))
        for o, v in zip(out, vecs):
            np.testing.assert_array_equal(o.values, v.values)

    def test_rows_and_redraws_follow_the_documented_rng_contract(self):
        # replicate the stated draw order with the same generator: one
        # choice() for the row set, then one label per row ascending
        vecs = self.make_vectors()
        out = corrupt_labels(vecs, 20.0, seed=9)
        rng = np.random.default_rng(9)
        rows = np.sort(rng.choice(100, size=20, replace=False))
        pool = ["a", "b"]
        want = [v.label for v in vecs]
        for i in rows:
            want[i] = pool[rng.integers(len(pool))]
        assert [v.label for v in out] == want

    def test_row_count_is_the_ceiling_of_the_requested_fraction(self):
        vecs = self.make_vectors(10)
        out = corrupt_labels(vecs, 11.0, seed=2)  # ceil(1.1) = 2 rows redrawn
        changed = sum(o.label != v.label for o, v in zip(out, vecs))
        assert changed <= 2
        rng = np.random.default_rng(2)
        assert len(rng.choice(10, size=2, replace=False)) == 2

    def test_single_label_pool_cannot_change_anything(self):
        vecs = [FeatureVector(np.zeros(D), "left", "only") for _ in range(12)]
        out = corrupt_labels(vecs, 50.0, seed=1)
        assert all(v.label == "only" for v in out)

    def test_rate_out_of_range_and_missing_labels_are_rejected(self):
        vecs = self.make_vectors(4)
        with pytest.raises(ValueError, match="percentage"):
            corrupt_labels(vecs, -1.0)
        with pytest.raises(ValueError, match="percentage"):
            corrupt_labels(vecs, 100.5)
        vecs[2] = FeatureVector(vecs[2].values, "right", None)
        with pytest.raises(ValueError, match="labeled"):
            corrupt_labels(vecs, 10.0)


class TestProfilePersistence:
    def test_save_load_round_trip_is_lossless(self, tmp_path):
        rng = np.random.default_rng(12)
        table = ProfileTable(seed=5)
        enroll_driver(table, "D_1", tight_trip(0.0, rng))
        enroll_driver(table, "D_2", tight_trip(6.0, rng), k=1)
        path = tmp_path / "profiles.jsonl"
        save_profiles(table, path)
        loaded = load_profiles(path)
        assert loaded.seed == table.seed
        assert loaded.labels() == table.labels()
        for got, want in zip(loaded.entries, table.entries):
            assert got.k == want.k and got.seed == want.seed
            np.testing.assert_array_equal(got.vectors, want.vectors)
            np.testing.assert_array_equal(got.model.weights, want.model.weights)
            np.testing.assert_array_equal(got.model.means, want.model.means)
            np.testing.assert_array_equal(got.model.variances, want.model.variances)

    def test_foreign_and_empty_files_are_rejected(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        with pytest.raises(ValueError, match="empty profile file"):
            load_profiles(empty)
        foreign = tmp_path / "foreign.jsonl"
        foreign.write_text('{"format": "something-else"}\n')
        with pytest.raises(ValueError, match="not a profile file"):
            load_profiles(foreign)
