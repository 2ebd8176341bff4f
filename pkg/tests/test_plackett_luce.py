import itertools

import numpy as np
import pytest

from agora.analytics.plackett_luce import (
    DegenerateRankingsError,
    PLParameters,
    PlackettLuce,
    PlackettLuceMixture,
    _ballot_logliks,
    _mm_step,
    _validate_rankings,
    cluster_summary,
    fit_pl_mixture,
    fit_plackett_luce,
    linearize_weak_orders,
    sample_rankings,
)
from agora.profiles import WeakOrder


class TestSingleFit:
    def test_two_alternative_closed_form(self):
        # with two items the MLE is the empirical win rate
        rankings = [("a", "b")] * 3 + [("b", "a")]
        params = fit_plackett_luce(rankings)
        assert params.gamma["a"] == pytest.approx(0.75, abs=1e-6)
        assert params.gamma["b"] == pytest.approx(0.25, abs=1e-6)

    def test_fully_symmetric_profile_is_uniform(self):
        rankings = list(itertools.permutations(["a", "b", "c"]))
        params = fit_plackett_luce(rankings)
        for value in params.gamma.values():
            assert value == pytest.approx(1 / 3, abs=1e-8)

    def test_recovers_generator_truth(self):
        truth = {"a": 0.5, "b": 0.3, "c": 0.2}
        rankings = sample_rankings(truth, n_samples=10000, seed=42)
        params = fit_plackett_luce(rankings)
        l1 = sum(abs(params.gamma[i] - truth[i]) for i in truth)
        assert l1 <= 0.05

    def test_normalised_and_positive(self):
        rankings = [("a", "b", "c"), ("b", "a", "c"), ("c", "a", "b")]
        params = fit_plackett_luce(rankings)
        assert sum(params.gamma.values()) == pytest.approx(1.0, abs=1e-9)
        assert all(v > 0 for v in params.gamma.values())

    def test_permutation_equivariant(self):
        rankings = [("a", "b", "c")] * 2 + [("b", "c", "a"), ("c", "a", "b")]
        relabel = {"a": "z", "b": "x", "c": "y"}
        renamed = [tuple(relabel[i] for i in r) for r in rankings]
        base = fit_plackett_luce(rankings)
        moved = fit_plackett_luce(renamed)
        for i, gamma in base.gamma.items():
            assert moved.gamma[relabel[i]] == pytest.approx(gamma, abs=1e-9)

    def test_degenerate_rankings_rejected(self):
        with pytest.raises(DegenerateRankingsError) as err:
            fit_plackett_luce([("a", "b", "c"), ("a", "c", "b")])
        assert err.value.always_first == ["a"]

    def test_degenerate_report_names_never_winner(self):
        with pytest.raises(DegenerateRankingsError) as err:
            fit_plackett_luce([("a", "b", "c"), ("b", "a", "c")])
        assert err.value.always_last == ["c"]

    def test_mm_step_keeps_simplex(self):
        rankings = [("a", "b", "c"), ("b", "a", "c"), ("c", "b", "a")]
        _, matrix = _validate_rankings(rankings)
        gamma = np.full(3, 1 / 3)
        w = np.ones(3)
        for _ in range(20):
            gamma = _mm_step(matrix, w, gamma)
            assert np.all(gamma > 0)
            assert gamma.sum() == pytest.approx(1.0, abs=1e-12)

    def test_mm_never_decreases_loglik(self):
        rankings = sample_rankings({"a": 0.6, "b": 0.3, "c": 0.1}, 200, seed=3)
        _, matrix = _validate_rankings(rankings)
        w = np.ones(len(matrix))
        gamma = np.full(3, 1 / 3)
        last = w @ _ballot_logliks(matrix, gamma)
        for _ in range(30):
            gamma = _mm_step(matrix, w, gamma)
            current = w @ _ballot_logliks(matrix, gamma)
            assert current >= last - 1e-9
            last = current


class TestMixtureFit:
    def test_k1_reduces_to_single_fit(self):
        rankings = [("a", "b", "c"), ("b", "a", "c"), ("c", "a", "b"), ("a", "c", "b")]
        single = fit_plackett_luce(rankings)
        mixture = fit_pl_mixture(rankings, k=1, seed=9)
        assert mixture.weights == (1.0,)
        for i, v in single.gamma.items():
            assert mixture.components[0].gamma[i] == pytest.approx(v, abs=1e-12)

    def test_loglik_non_decreasing(self):
        rankings = sample_rankings({"a": 0.4, "b": 0.3, "c": 0.2, "d": 0.1}, 300, seed=5)
        for seed in range(8):
            mixture = fit_pl_mixture(rankings, k=2, seed=seed)
            path = np.array(mixture.loglik_path)
            assert np.all(np.diff(path) >= -1e-9)

    def test_separated_components_recovered(self):
        comp_a = {"a": 0.7, "b": 0.1, "c": 0.1, "d": 0.1}
        comp_c = {"a": 0.1, "b": 0.1, "c": 0.7, "d": 0.1}
        rankings = sample_rankings(comp_a, 2500, seed=21) + sample_rankings(
            comp_c, 2500, seed=22
        )
        mixture = fit_pl_mixture(rankings, k=2, seed=7)
        best_l1, best_weights = best_match(mixture, [comp_a, comp_c])
        assert all(l1 <= 0.1 for l1 in best_l1)
        assert all(abs(w - 0.5) <= 0.05 for w in best_weights)

    def test_identical_ballots_concentrate_top(self):
        rankings = [("b", "a", "c")] * 30
        mixture = fit_pl_mixture(rankings, k=2, seed=1)
        for comp in mixture.components:
            assert comp.gamma["b"] == max(comp.gamma.values())

    def test_k_larger_than_n_rejected(self):
        with pytest.raises(ValueError, match="components"):
            fit_pl_mixture([("a", "b")], k=2)

    def test_empty_rankings_rejected(self):
        with pytest.raises(ValueError, match="no rankings"):
            fit_pl_mixture([], k=1)

    def test_seed_reproducibility(self):
        rankings = sample_rankings({"a": 0.5, "b": 0.3, "c": 0.2}, 100, seed=17)
        m1 = fit_pl_mixture(rankings, k=2, seed=33)
        m2 = fit_pl_mixture(rankings, k=2, seed=33)
        assert m1.loglik == m2.loglik
        assert np.array_equal(m1.responsibilities, m2.responsibilities)


def best_match(mixture, truths):
    """Best component-permutation match: (per-component L1 errors, weights)."""
    items = list(truths[0])
    best = None
    for perm in itertools.permutations(range(mixture.k)):
        l1s = [
            sum(abs(mixture.components[z].gamma[i] - truth[i]) for i in items)
            for z, truth in zip(perm, truths)
        ]
        weights = [mixture.weights[z] for z in perm]
        if best is None or sum(l1s) < sum(best[0]):
            best = (l1s, weights)
    return best


class TestClusterSummary:
    def test_single_cluster_holds_everything(self):
        rankings = [("a", "b"), ("b", "a"), ("a", "b")]
        mixture = fit_pl_mixture(rankings, k=1)
        (summary,) = cluster_summary(mixture)
        assert summary["size"] == 3
        assert summary["weight"] == 1.0

    def test_tied_responsibilities_go_to_first_component(self):
        from agora.analytics.plackett_luce import PLMixture

        mixture = PLMixture(
            k=2,
            weights=(0.5, 0.5),
            components=(
                PLParameters({"a": 0.6, "b": 0.4}),
                PLParameters({"a": 0.4, "b": 0.6}),
            ),
            responsibilities=np.full((4, 2), 0.5),
            loglik=0.0,
            n_iter=1,
            seed=0,
        )
        sizes = [c["size"] for c in cluster_summary(mixture)]
        assert sizes == [4, 0]

    def test_separated_fixture_sizes(self):
        comp_a = {"a": 0.7, "b": 0.1, "c": 0.1, "d": 0.1}
        comp_c = {"a": 0.1, "b": 0.1, "c": 0.7, "d": 0.1}
        rankings = sample_rankings(comp_a, 2500, seed=21) + sample_rankings(
            comp_c, 2500, seed=22
        )
        mixture = fit_pl_mixture(rankings, k=2, seed=7)
        sizes = sorted(c["size"] for c in cluster_summary(mixture))
        assert sum(sizes) == 5000
        assert all(abs(size - 2500) <= 250 for size in sizes)

    def test_top_alternatives_ordering(self):
        mixture = fit_pl_mixture([("a", "b", "c")] * 5 + [("b", "a", "c")] * 2, k=1)
        (summary,) = cluster_summary(mixture)
        assert summary["top_alternatives"][0] == "a"


class TestLinearize:
    def test_strict_orders_untouched(self):
        orders = [WeakOrder([["a"], ["b"], ["c"]])]
        assert linearize_weak_orders(orders, seed=4) == [("a", "b", "c")]

    def test_groups_stay_contiguous_and_complete(self):
        orders = [WeakOrder([["a", "b"], ["c", "d"]])] * 10
        for ranking in linearize_weak_orders(orders, seed=12):
            assert set(ranking[:2]) == {"a", "b"}
            assert set(ranking[2:]) == {"c", "d"}

    def test_seed_reproducible_and_varies_by_ballot(self):
        orders = [WeakOrder([["a", "b", "c"]])] * 50
        first = linearize_weak_orders(orders, seed=99)
        second = linearize_weak_orders(orders, seed=99)
        assert first == second
        assert len(set(first)) > 1  # different ballots draw independently


class TestParameters:
    def test_rejects_non_positive(self):
        with pytest.raises(ValueError, match="positive"):
            PLParameters({"a": 0.0, "b": 1.0})

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum"):
            PLParameters({"a": 0.5, "b": 0.6})

    def test_estimator_is_labelled(self):
        mixture = fit_pl_mixture([("a", "b")] * 2 + [("b", "a")], k=1)
        assert mixture.estimator == "em_mm"


def test_sklearn_params_roundtrip():
    est = PlackettLuceMixture(n_components=3, seed=5)
    params = est.get_params()
    assert params["n_components"] == 3
    clone = PlackettLuceMixture(**params)
    assert clone.get_params() == params
    single = PlackettLuce(tol=1e-6)
    assert single.get_params()["tol"] == 1e-6
