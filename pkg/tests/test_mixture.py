import json
import math

import numpy as np
import pytest

from privleak.leakage import sigma_laplace
from privleak.mixture import (
    LAMBDA_MIN,
    ClusterLeakage,
    DeleteClusters,
    EditError,
    FitSession,
    LaplaceComponent,
    MixtureModel,
    PickCluster,
    SetCluster,
    cluster_leakage,
    e_step,
    fit,
    kmeans_init,
    laplace_pdf,
    m_step,
    mml,
    weighted_median,
)

SQRT2 = math.sqrt(2)


def wmedian_trace(values, weights):
    """Loop transcription of the cumulative-weight median; the independent
    oracle for the vectorized production implementation.

    Branches, checked in order at the first half-crossing: exact cumulative
    hit returns the element; an exactly balanced crossing (equal mass
    strictly below and above the element) returns the element; any other
    strict crossing averages the element with its predecessor (first
    element: no predecessor, return it)."""
    n = len(values)
    q = [0.0] * (n + 1)
    running = 0.0
    for i in range(1, n + 1):
        running += weights[i - 1]
        q[i] = running
    half = 0.5 * q[n]
    for i in range(1, n + 1):
        if q[i] > half > q[i - 1]:
            if q[i - 1] == q[n] - q[i]:
                return values[i - 1]
            if i == 1:
                return values[0]
            return (values[i - 1] + values[i - 2]) / 2.0
        elif q[i] == half:
            return values[i - 1]
    raise AssertionError("no branch fired; total weight must be positive")


class TestLaplacePdf:
    def test_peak_height(self):
        assert laplace_pdf(3.0, 3.0, 0.5) == pytest.approx(1.0)

    def test_one_scale_out(self):
        assert laplace_pdf(1.5, 1.0, 0.5) == pytest.approx(math.exp(-1) / 1.0)

    def test_symmetry(self):
        assert laplace_pdf(2.0 + 0.7, 2.0, 0.3) == pytest.approx(laplace_pdf(2.0 - 0.7, 2.0, 0.3))

    def test_integrates_to_one(self):
        xs = np.linspace(-30, 30, 200_001)
        dens = laplace_pdf(xs, 0.7, 1.3)
        assert np.trapezoid(dens, xs) == pytest.approx(1.0, abs=1e-6)

    def test_scale_domain(self):
        with pytest.raises(ValueError):
            laplace_pdf(0.0, 0.0, 0.0)


class TestWeightedMedian:
    def test_uniform_weights_odd(self):
        assert weighted_median(np.array([1.0, 2.0, 3.0]), np.ones(3)) == 2.0

    def test_uniform_weights_even_hits_equality_branch(self):
        assert weighted_median(np.array([1.0, 2.0, 3.0, 4.0]), np.ones(4)) == 2.0

    def test_strict_crossing_averages(self):
        assert weighted_median(np.array([5.0, 10.0]), np.array([0.1, 0.9])) == 7.5

    def test_duplicate_values_even(self):
        # q = [1,2,3,4], half exactly at q_2 -> second value
        assert weighted_median(np.array([0.0, 0.0, 4.0, 4.0]), np.ones(4)) == 0.0

    def test_first_element_dominates(self):
        assert weighted_median(np.array([2.0, 9.0]), np.array([0.9, 0.1])) == 2.0

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            weighted_median(np.array([3.0, 1.0]), np.ones(2))

    def test_all_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            weighted_median(np.array([1.0, 2.0]), np.zeros(2))

    def test_matches_trace_oracle_randomized(self):
        rng = np.random.default_rng(2024)
        for case in range(3000):
            n = int(rng.integers(1, 9))
            values = np.sort(rng.choice([0.0, 0.5, 1.0, 2.5, 7.0], size=n)
                             if case % 3 == 0 else rng.normal(size=n))
            if case % 2 == 0:
                weights = rng.integers(0, 4, size=n).astype(float)
                if weights.sum() == 0:
                    weights[int(rng.integers(0, n))] = 1.0
            else:
                weights = rng.random(n)
            got = weighted_median(values, weights)
            want = wmedian_trace(list(values), list(weights))
            assert got == want, (values, weights)

    def test_uniform_weights_equal_plain_median_odd_n(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            n = int(rng.choice([1, 3, 5, 7]))
            values = np.sort(rng.normal(size=n))
            assert weighted_median(values, np.ones(n)) == float(np.median(values))


class TestESTep:
    def _model(self, params):
        return MixtureModel(components=[LaplaceComponent(*p) for p in params])

    def test_single_component_all_one(self):
        model = self._model([(0.5, 0.2, 1.0)])
        resp = e_step(np.array([0.1, 0.5, 3.0]), model)
        assert np.allclose(resp, 1.0)

    def test_midpoint_symmetry(self):
        model = self._model([(0.0, 1.0, 0.5), (2.0, 1.0, 0.5)])
        resp = e_step(np.array([1.0]), model)
        assert resp[0, 0] == pytest.approx(0.5)
        assert resp[0, 1] == pytest.approx(0.5)

    def test_density_ratio(self):
        model = self._model([(0.0, 1.0, 0.5), (2.0, 1.0, 0.5)])
        resp = e_step(np.array([0.0]), model)
        assert resp[0, 0] / resp[0, 1] == pytest.approx(math.exp(2), rel=1e-9)
        assert resp[0, 0] == pytest.approx(0.8807970779778823, abs=1e-9)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        model = self._model([(0.0, 0.3, 0.2), (1.0, 0.1, 0.5), (4.0, 1.0, 0.3)])
        resp = e_step(rng.normal(size=500), model)
        assert np.allclose(resp.sum(axis=1), 1.0, atol=1e-9)
        assert resp.min() >= 0.0 and resp.max() <= 1.0

    def test_underflow_falls_back_to_nearest_median(self):
        model = self._model([(0.0, LAMBDA_MIN, 0.5), (1.0, LAMBDA_MIN, 0.5)])
        resp = e_step(np.array([0.3, 0.8]), model)
        assert resp[0].tolist() == [1.0, 0.0]
        assert resp[1].tolist() == [0.0, 1.0]

    def test_deleted_component_gets_no_mass(self):
        model = self._model([(0.0, 1.0, 1.0)])
        model.components.append(LaplaceComponent(0.0, 0.0, 0.0, deleted=True))
        resp = e_step(np.array([0.5, -0.5]), model)
        assert np.all(resp[:, 1] == 0.0)


class TestMStep:
    def test_k1_collapses_to_median_and_mad(self):
        samples = np.sort(np.array([0.0, 0.0, 4.0, 4.0]))
        resp = np.ones((4, 1))
        model = m_step(samples, resp)
        comp = model.components[0]
        # trace: q=[1,2,3,4], half=2 -> value at i=2, which is 0
        assert comp.median == 0.0
        assert comp.scale == pytest.approx(2.0)
        assert comp.weight == pytest.approx(1.0)

    def test_hard_split_recovers_group_medians(self):
        samples = np.sort(np.concatenate([np.full(5, 1.0), np.full(5, 9.0)]))
        resp = np.zeros((10, 2))
        resp[:5, 0] = 1.0
        resp[5:, 1] = 1.0
        model = m_step(samples, resp)
        assert model.components[0].median == 1.0
        assert model.components[1].median == 9.0
        assert model.components[0].weight == pytest.approx(0.5)

    def test_beta_sums_to_one(self):
        rng = np.random.default_rng(11)
        samples = np.sort(rng.normal(size=40))
        raw = rng.random((40, 3))
        resp = raw / raw.sum(axis=1, keepdims=True)
        model = m_step(samples, resp)
        assert sum(c.weight for c in model.components) == pytest.approx(1.0, abs=1e-9)

    def test_zero_weight_component_becomes_deleted(self):
        samples = np.sort(np.array([0.0, 1.0, 2.0]))
        resp = np.zeros((3, 2))
        resp[:, 0] = 1.0
        model = m_step(samples, resp)
        assert model.components[1].deleted
        assert model.components[1].scale == 0.0


class TestMML:
    def test_twelve_samples_single_component(self):
        model = MixtureModel(components=[LaplaceComponent(0.0, 1.0, 1.0)])
        resp = np.ones((12, 1))
        assert mml(model, resp, 12) == pytest.approx(1.5)

    def test_fortyeight_samples(self):
        model = MixtureModel(components=[LaplaceComponent(0.0, 1.0, 1.0)])
        resp = np.ones((48, 1))
        assert mml(model, resp, 48) == pytest.approx(4.5)

    def test_parameter_cost_grows_with_n(self):
        model = MixtureModel(components=[LaplaceComponent(0.0, 1.0, 1.0)])
        costs = [mml(model, np.ones((n, 1)), n) for n in (12, 24, 48, 96)]
        assert costs == sorted(costs)

    def test_zero_responsibility_floored_not_infinite(self):
        model = MixtureModel(
            components=[LaplaceComponent(0.0, 1.0, 0.5), LaplaceComponent(5.0, 1.0, 0.5)]
        )
        resp = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert math.isfinite(mml(model, resp, 2))


class TestKMeansInit:
    def test_two_tight_groups(self):
        rng = np.random.default_rng(1)
        samples = np.concatenate([rng.normal(2, 0.05, 100), rng.normal(6, 0.05, 100)])
        model = kmeans_init(samples, 2, seed=0)
        medians = sorted(c.median for c in model.components)
        assert medians[0] == pytest.approx(2.0, abs=0.1)
        assert medians[1] == pytest.approx(6.0, abs=0.1)
        assert sum(c.weight for c in model.components) == pytest.approx(1.0)

    def test_k1_center_is_mean(self):
        samples = np.array([1.0, 2.0, 6.0])
        model = kmeans_init(samples, 1, seed=0)
        assert model.components[0].median == pytest.approx(3.0)

    def test_identical_samples_floor_scale(self):
        model = kmeans_init(np.full(20, 0.7), 1, seed=0)
        assert model.components[0].scale == LAMBDA_MIN

    def test_k_reduced_with_warning(self):
        with pytest.warns(UserWarning, match="reducing"):
            model = kmeans_init(np.array([1.0, 1.0, 2.0, 2.0]), 5, seed=0)
        assert model.k_live <= 2


def bimodal_samples(n=2000, seed=42, centers=(2.0, 6.0), scale=0.1):
    rng = np.random.default_rng(seed)
    half = n // 2
    return np.concatenate(
        [rng.laplace(centers[0], scale, half), rng.laplace(centers[1], scale, n - half)]
    )


class TestFit:
    def test_bimodal_recovery(self):
        samples = bimodal_samples()
        result = fit(samples, 2, seed=0)
        comps = sorted(
            (result.model.components[k] for k in result.model.live),
            key=lambda c: c.median,
        )
        assert comps[0].median == pytest.approx(2.0, abs=0.05)
        assert comps[1].median == pytest.approx(6.0, abs=0.05)
        assert comps[0].weight == pytest.approx(0.5, abs=0.05)
        assert comps[1].weight == pytest.approx(0.5, abs=0.05)
        for c in comps:
            assert c.scale == pytest.approx(0.1, rel=0.10)
        assert result.converged
        assert result.model.iterations >= 40

    def test_constant_samples_k1(self):
        with pytest.warns(UserWarning):
            result = fit(np.full(30, 0.93), 1, seed=0)
        comp = result.model.components[0]
        assert comp.median == 0.93
        assert comp.scale == LAMBDA_MIN
        assert result.leakage.sigma_laplace == pytest.approx(0.0, abs=1e-8)

    def test_k1_equals_robust_series_statistics(self):
        rng = np.random.default_rng(9)
        samples = rng.laplace(3.0, 0.4, 400)
        result = fit(samples, 1, seed=0)
        comp = result.model.components[0]
        sorted_samples = np.sort(samples)
        expected_median = weighted_median(sorted_samples, np.ones(samples.size))
        assert comp.median == expected_median
        mad = np.abs(samples - expected_median).mean()
        assert comp.scale == pytest.approx(mad, rel=1e-9)
        assert result.leakage.sigma_laplace == pytest.approx(
            sigma_laplace(samples, center=expected_median), rel=1e-9
        )

    def test_permutation_invariance(self):
        samples = bimodal_samples(600, seed=5)
        rng = np.random.default_rng(0)
        shuffled = samples.copy()
        rng.shuffle(shuffled)
        a = fit(samples, 2, seed=3)
        b = fit(shuffled, 2, seed=3)
        assert a.model.to_json() == b.model.to_json()

    def test_nll_monotone_on_separated_data(self):
        samples = bimodal_samples(1000, seed=8)
        session = FitSession(samples, 2, seed=0)
        session.run_to_convergence()
        terms = np.array(session.nll_trace)
        assert np.all(np.diff(terms) <= 1e-9)

    def test_edit_callback_recovers_second_mode(self):
        samples = bimodal_samples(1200, seed=21)
        calls = []

        def assert_second_cluster(model, sorted_samples):
            if calls:
                return None
            calls.append(True)
            return [SetCluster(k=model.k_live + 1, median=6.0)]

        single = fit(samples, 1, seed=0)
        assert single.model.k_live == 1
        # one broad component spans both modes: scale near half the
        # mode separation
        assert single.model.components[0].scale == pytest.approx(2.0, rel=0.2)

        steered = fit(samples, 1, assert_second_cluster, seed=0)
        medians = sorted(steered.model.components[k].median for k in steered.model.live)
        assert len(medians) == 2
        assert medians[0] == pytest.approx(2.0, abs=0.1)
        assert medians[1] == pytest.approx(6.0, abs=0.1)

    def test_below_fifty_samples_warns(self):
        with pytest.warns(UserWarning, match="50"):
            fit(np.linspace(0, 1, 20), 1, seed=0)

    def test_responsibilities_rows_sum_to_one(self):
        result = fit(bimodal_samples(400, seed=2), 2, seed=0)
        assert np.allclose(result.responsibilities.sum(axis=1), 1.0, atol=1e-9)


class TestEdits:
    def _session(self, k=2):
        return FitSession(bimodal_samples(600, seed=3), k, seed=0)

    def test_delcl_zeroes_component(self):
        session = self._session()
        session.run_to_convergence()
        session.apply_edit(DeleteClusters([2]))
        comp = session.model.components[1]
        assert comp.deleted
        assert (comp.median, comp.scale, comp.weight) == (0.0, 0.0, 0.0)
        assert session.model.components[0].weight == pytest.approx(1.0)

    def test_delcl_rejects_bad_index(self):
        session = self._session()
        with pytest.raises(EditError):
            session.apply_edit(DeleteClusters([99]))

    def test_delcl_cannot_remove_every_component(self):
        session = self._session()
        with pytest.raises(EditError):
            session.apply_edit(DeleteClusters([1, 2]))

    def test_pickcl_reuses_deleted_slot(self):
        session = self._session()
        session.run_to_convergence()
        session.apply_edit(DeleteClusters([2]))
        session.apply_edit(PickCluster(x=6.0))
        comp = session.model.components[1]
        assert not comp.deleted
        assert comp.median == 6.0

    def test_pickcl_without_deleted_slot_moves_least_significant(self):
        session = self._session()
        session.run_to_convergence()
        weights = [c.weight for c in session.model.components]
        weakest = weights.index(min(weights))
        session.apply_edit(PickCluster(x=2.5))
        assert session.model.components[weakest].median == 2.5

    def test_pickcl_outside_range_rejected(self):
        session = self._session()
        with pytest.raises(EditError):
            session.apply_edit(PickCluster(x=99.0))

    def test_setcl_moves_median(self):
        session = self._session()
        session.run_to_convergence()
        session.apply_edit(SetCluster(k=1, median=2.2))
        assert session.model.components[0].median == 2.2

    def test_setcl_rejects_deleted_target(self):
        session = self._session()
        session.run_to_convergence()
        session.apply_edit(DeleteClusters([2]))
        with pytest.raises(EditError):
            session.apply_edit(SetCluster(k=2, median=1.0))

    def test_beta_renormalized_after_edit(self):
        session = self._session(k=3)
        session.run_to_convergence()
        session.apply_edit(DeleteClusters([1]))
        live_sum = sum(session.model.components[k].weight for k in session.model.live)
        assert live_sum == pytest.approx(1.0, abs=1e-9)


class TestClusterLeakage:
    def test_single_component_model_sigma(self):
        samples = np.sort(np.random.default_rng(0).laplace(1.0, 0.2, 500))
        model = MixtureModel(components=[LaplaceComponent(1.0, 0.2, 1.0)])
        resp = np.ones((500, 1))
        leak = cluster_leakage(samples, resp, model)
        assert leak.components[0].sigma_model == pytest.approx(SQRT2 * 0.2)

    def test_equal_clusters_aggregate_to_common_sigma(self):
        # hard split, equal sizes, equal within-cluster spread
        left = np.array([0.0, 1.0, 2.0] * 10)
        right = np.array([10.0, 11.0, 12.0] * 10)
        samples = np.sort(np.concatenate([left, right]))
        resp = np.zeros((60, 2))
        resp[:30, 0] = 1.0
        resp[30:, 1] = 1.0
        model = MixtureModel(
            components=[LaplaceComponent(1.0, 1.0, 0.5), LaplaceComponent(11.0, 1.0, 0.5)]
        )
        leak = cluster_leakage(samples, resp, model)
        a, b = leak.components
        assert a.sigma_laplace == pytest.approx(b.sigma_laplace)
        assert leak.sigma_laplace == pytest.approx(a.sigma_laplace)

    def test_model_sigma_understates_spread_of_unclustered_data(self):
        # uniform entropies are no mixture of narrow peaks: the model sigma
        # must fall well short of the series-level spread
        rng = np.random.default_rng(31)
        samples = rng.uniform(0.0, 8.0, 2000)
        result = fit(samples, 2, seed=0)
        assert result.leakage.sigma_model < sigma_laplace(samples)

    def test_serialization_round_trip(self):
        result = fit(bimodal_samples(300, seed=13), 2, seed=0)
        text = result.model.to_json()
        clone = MixtureModel.from_json(text)
        assert clone.to_json() == text
        doc = json.loads(text)
        assert set(doc) == {"components", "mml", "iterations", "converged"}
        assert set(doc["components"][0]) == {"median", "lambda", "beta", "deleted"}


class TestIterationCap:
    def test_cap_returns_best_model_flagged_unconverged(self):
        samples = bimodal_samples(400, seed=17)
        session = FitSession(samples, 2, seed=0, max_iterations=5)
        with pytest.warns(UserWarning, match="iteration cap"):
            model = session.run_to_convergence()
        assert model.converged is False
        assert session.converged is False
        assert model.iterations == 5
