"""Plackett-Luce strength estimation and mixture clustering.

The Plackett-Luce model draws a ranking by repeatedly choosing the next
item with probability proportional to positive strengths gamma.  The
single-model maximum-likelihood fit uses the classic minorize-maximize
update; mixtures are fit by expectation-maximization whose M-step reuses
the same MM update on responsibility-weighted data (reported as
``estimator: em_mm``).

Estimators follow the scikit-learn convention: hyper-parameters in the
constructor, data to ``fit``, learned state in trailing-underscore
attributes.  ``fit_plackett_luce`` / ``fit_pl_mixture`` are functional
shorthands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ..profiles import WeakOrder

GAMMA_FLOOR = 1e-300
WEIGHT_EPS = 1e-12


class DegenerateRankingsError(ValueError):
    """The comparison graph cannot identify every strength.

    Raised when some item never beats another (always ranked last) or
    never loses (always ranked first); the likelihood then has no interior
    maximum for those items.
    """

    def __init__(self, always_first: list[str], always_last: list[str]):
        self.always_first = always_first
        self.always_last = always_last
        parts = []
        if always_first:
            parts.append(f"never lose: {always_first}")
        if always_last:
            parts.append(f"never win: {always_last}")
        super().__init__("degenerate rankings; " + "; ".join(parts))


@dataclass(frozen=True)
class PLParameters:
    """One component's strengths, normalised to sum to 1."""

    gamma: dict[str, float]

    def __post_init__(self):
        values = np.array(list(self.gamma.values()), dtype=float)
        if values.size == 0 or np.any(values <= 0):
            raise ValueError("strengths must be strictly positive")
        if abs(values.sum() - 1.0) > 1e-9:
            raise ValueError(f"strengths must sum to 1, got {values.sum()!r}")

    def as_array(self, items: list[str]) -> np.ndarray:
        return np.array([self.gamma[i] for i in items], dtype=float)


@dataclass(frozen=True)
class PLMixture:
    """A fitted k-component mixture with per-ballot responsibilities."""

    k: int
    weights: tuple[float, ...]
    components: tuple[PLParameters, ...]
    responsibilities: np.ndarray
    loglik: float
    n_iter: int
    seed: int
    loglik_path: tuple[float, ...] = field(default=())
    estimator: str = "em_mm"

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")
        row_sums = self.responsibilities.sum(axis=1)
        if not np.allclose(row_sums, 1.0, atol=1e-9):
            raise ValueError("responsibility rows must sum to 1")


# ---------------------------------------------------------------------------
# data validation


def _validate_rankings(
    rankings, items: list[str] | None = None
) -> tuple[list[str], np.ndarray]:
    """Check strict complete rankings; return item list + index matrix."""
    rankings = [tuple(r) for r in rankings]
    if not rankings:
        raise ValueError("no rankings supplied")
    if items is None:
        items = sorted(set().union(*map(set, rankings)))
    index = {item: i for i, item in enumerate(items)}
    m = len(items)
    matrix = np.empty((len(rankings), m), dtype=np.int64)
    for row, ranking in enumerate(rankings):
        if len(ranking) != m or set(ranking) != set(items):
            raise ValueError(
                f"ranking {row} is not a strict complete order over {m} items: {ranking!r}"
            )
        matrix[row] = [index[x] for x in ranking]
    return items, matrix


def _connectivity_gaps(items: list[str], matrix: np.ndarray) -> tuple[list[str], list[str]]:
    n, m = matrix.shape
    first_counts = np.bincount(matrix[:, 0], minlength=m)
    win_counts = np.bincount(matrix[:, :-1].ravel(), minlength=m) if m > 1 else np.zeros(m)
    always_first = [items[i] for i in range(m) if first_counts[i] == n]
    always_last = [items[i] for i in range(m) if win_counts[i] == 0]
    if m == 1:
        return [], []
    return always_first, always_last


# ---------------------------------------------------------------------------
# MM core (weighted)


def _mm_step(matrix: np.ndarray, weights: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    n, m = matrix.shape
    if m == 1 or weights.sum() <= WEIGHT_EPS:
        return gamma
    by_position = gamma[matrix]
    suffix = np.flip(np.cumsum(np.flip(by_position, axis=1), axis=1), axis=1)
    inv = 1.0 / suffix[:, :-1]
    cum = np.cumsum(inv, axis=1)
    # item at position q is "in the running" for choices 0..min(q, m-2)
    per_position = np.concatenate([cum, cum[:, -1:]], axis=1)
    denom = np.zeros(m)
    np.add.at(denom, matrix, weights[:, None] * per_position)
    wins = np.zeros(m)
    np.add.at(wins, matrix[:, :-1], np.broadcast_to(weights[:, None], (n, m - 1)))
    new = wins / np.maximum(denom, WEIGHT_EPS * WEIGHT_EPS)
    new = np.maximum(new, GAMMA_FLOOR)
    return new / new.sum()


def _mm_fit(
    matrix: np.ndarray,
    weights: np.ndarray,
    gamma: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int]:
    for it in range(1, max_iter + 1):
        new = _mm_step(matrix, weights, gamma)
        delta = float(np.max(np.abs(new - gamma)))
        gamma = new
        if delta < tol:
            return gamma, it
    return gamma, max_iter


def _ballot_logliks(matrix: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """log P(ranking | gamma) per row."""
    n, m = matrix.shape
    if m == 1:
        return np.zeros(n)
    by_position = gamma[matrix]
    suffix = np.flip(np.cumsum(np.flip(by_position, axis=1), axis=1), axis=1)
    return np.sum(
        np.log(by_position[:, :-1]) - np.log(suffix[:, :-1]), axis=1
    )


# ---------------------------------------------------------------------------
# estimators


class PlackettLuce(BaseEstimator):
    """Maximum-likelihood Plackett-Luce strengths via MM iteration.

    Parameters
    ----------
    tol:
        Convergence threshold on max |change in gamma| per iteration.
    max_iter:
        Iteration cap.
    check_connectivity:
        Raise :class:`DegenerateRankingsError` when some item always wins
        or always loses (no interior maximum exists for it).
    """

    def __init__(self, tol: float = 1e-8, max_iter: int = 500, check_connectivity: bool = True):
        self.tol = tol
        self.max_iter = max_iter
        self.check_connectivity = check_connectivity

    def fit(self, rankings, items: list[str] | None = None, sample_weight=None):
        items, matrix = _validate_rankings(rankings, items)
        if self.check_connectivity:
            always_first, always_last = _connectivity_gaps(items, matrix)
            if always_first or always_last:
                raise DegenerateRankingsError(always_first, always_last)
        weights = (
            np.ones(len(matrix))
            if sample_weight is None
            else np.asarray(sample_weight, dtype=float)
        )
        gamma = np.full(len(items), 1.0 / len(items))
        gamma, self.n_iter_ = _mm_fit(matrix, weights, gamma, self.tol, self.max_iter)
        self.items_ = list(items)
        self.strengths_ = gamma
        self.loglik_ = float(weights @ _ballot_logliks(matrix, gamma))
        return self

    @property
    def parameters_(self) -> PLParameters:
        return PLParameters(dict(zip(self.items_, map(float, self.strengths_))))


class PlackettLuceMixture(BaseEstimator):
    """k-component Plackett-Luce mixture fit by EM with MM inner updates.

    Components are initialised from a seeded symmetric Dirichlet with
    uniform mixing weights; ``n_restarts`` independent initialisations are
    run and the best final log-likelihood kept.  Each M-step applies a few
    warm-started MM updates per component (generalized EM: any surrogate
    improvement keeps the outer log-likelihood non-decreasing).  The
    E-step log-likelihood trace of the winning restart is exposed as
    ``loglik_path_`` and is non-decreasing up to 1e-9.
    """

    def __init__(
        self,
        n_components: int = 2,
        seed: int = 0,
        tol: float = 1e-8,
        max_iter: int = 500,
        n_restarts: int = 5,
        inner_max_iter: int = 3,
    ):
        self.n_components = n_components
        self.seed = seed
        self.tol = tol
        self.max_iter = max_iter
        self.n_restarts = n_restarts
        self.inner_max_iter = inner_max_iter

    def fit(self, rankings, items: list[str] | None = None):
        k = self.n_components
        if k < 1:
            raise ValueError("n_components must be >= 1")
        items, matrix = _validate_rankings(rankings, items)
        n, m = matrix.shape
        if k > n:
            raise ValueError(f"more components ({k}) than ballots ({n})")

        if k == 1:
            single = PlackettLuce(
                tol=self.tol, max_iter=self.max_iter, check_connectivity=False
            ).fit(rankings, items=items)
            self.items_ = single.items_
            self.weights_ = np.array([1.0])
            self.components_ = single.strengths_[None, :]
            self.responsibilities_ = np.ones((n, 1))
            self.loglik_ = single.loglik_
            self.loglik_path_ = (single.loglik_,)
            self.n_iter_ = single.n_iter_
            return self

        rng = np.random.default_rng(self.seed)
        best: tuple | None = None
        for _restart in range(self.n_restarts):
            gammas = np.maximum(rng.dirichlet(np.ones(m), size=k), GAMMA_FLOOR)
            gammas /= gammas.sum(axis=1, keepdims=True)
            weights = np.full(k, 1.0 / k)
            result = self._run_em(matrix, gammas, weights)
            if best is None or result[2] > best[2]:
                best = result
        gammas, weights, loglik, resp, path, iters = best
        self.items_ = list(items)
        self.weights_ = weights
        self.components_ = gammas
        self.responsibilities_ = resp
        self.loglik_ = loglik
        self.loglik_path_ = tuple(path)
        self.n_iter_ = iters
        return self

    def _e_step(self, matrix, gammas, weights):
        per_component = np.stack(
            [_ballot_logliks(matrix, g) for g in gammas], axis=1
        )
        with np.errstate(divide="ignore"):
            joint = per_component + np.log(weights)[None, :]
        norm = np.logaddexp.reduce(joint, axis=1)
        resp = np.exp(joint - norm[:, None])
        return float(norm.sum()), resp

    def _run_em(self, matrix, gammas, weights):
        loglik, resp = self._e_step(matrix, gammas, weights)
        path = [loglik]
        iters = 0
        for iters in range(1, self.max_iter + 1):
            weights = np.maximum(resp.mean(axis=0), GAMMA_FLOOR)
            weights = weights / weights.sum()
            gammas = np.stack(
                [
                    _mm_fit(matrix, resp[:, z], gammas[z], self.tol, self.inner_max_iter)[0]
                    for z in range(len(gammas))
                ]
            )
            new_loglik, resp = self._e_step(matrix, gammas, weights)
            path.append(new_loglik)
            done = abs(new_loglik - loglik) < self.tol
            loglik = new_loglik
            if done:
                break
        return gammas, weights, loglik, resp, path, iters

    @property
    def mixture_(self) -> PLMixture:
        return PLMixture(
            k=len(self.weights_),
            weights=tuple(map(float, self.weights_)),
            components=tuple(
                PLParameters(dict(zip(self.items_, map(float, g))))
                for g in self.components_
            ),
            responsibilities=self.responsibilities_,
            loglik=self.loglik_,
            n_iter=self.n_iter_,
            seed=self.seed if len(self.weights_) > 1 else 0,
            loglik_path=self.loglik_path_,
        )


# ---------------------------------------------------------------------------
# functional API


def fit_plackett_luce(rankings, tol: float = 1e-8, max_iters: int = 500) -> PLParameters:
    return PlackettLuce(tol=tol, max_iter=max_iters).fit(rankings).parameters_


def fit_pl_mixture(
    rankings, k: int, seed: int = 0, tol: float = 1e-8, max_iters: int = 500
) -> PLMixture:
    est = PlackettLuceMixture(n_components=k, seed=seed, tol=tol, max_iter=max_iters)
    est.fit(rankings)
    mixture = est.mixture_
    if k == 1:
        return mixture
    return PLMixture(
        k=mixture.k,
        weights=mixture.weights,
        components=mixture.components,
        responsibilities=mixture.responsibilities,
        loglik=mixture.loglik,
        n_iter=mixture.n_iter,
        seed=seed,
        loglik_path=mixture.loglik_path,
    )


def cluster_summary(mixture: PLMixture, top: int = 3) -> list[dict]:
    """Per-component overview: hard-assigned size, weight, strongest items.

    Hard assignment is argmax responsibility with ties going to the lowest
    component index, so sizes always sum to the ballot count.
    """
    assignment = np.argmax(mixture.responsibilities, axis=1)
    out = []
    for z in range(mixture.k):
        gamma = mixture.components[z].gamma
        leaders = sorted(gamma, key=lambda i: (-gamma[i], i))[:top]
        out.append(
            {
                "component": z,
                "weight": mixture.weights[z],
                "size": int(np.sum(assignment == z)),
                "top_alternatives": leaders,
            }
        )
    return out


def linearize_weak_orders(
    orders: list[WeakOrder], seed: int, items: list[str] | None = None
) -> list[tuple[str, ...]]:
    """Expand tied groups into random strict orders, one draw per ballot.

    The i-th ballot uses a generator seeded by (seed, i), so a recorded
    seed reproduces the exact linearization.
    """
    out: list[tuple[str, ...]] = []
    for i, order in enumerate(orders):
        rng = np.random.default_rng([seed, i])
        flat: list[str] = []
        for group in order.groups:
            members = sorted(group)
            rng.shuffle(members)
            flat.extend(members)
        out.append(tuple(flat))
    return out


def sample_rankings(gamma: dict[str, float], n_samples: int, seed: int) -> list[tuple[str, ...]]:
    """Draw rankings from a Plackett-Luce model via the Gumbel-max trick:
    sorting log-strengths plus i.i.d. Gumbel noise in descending order is
    distributed exactly as sequential choice without replacement."""
    rng = np.random.default_rng(seed)
    items = list(gamma)
    keys = np.log([gamma[i] for i in items])
    noise = rng.gumbel(size=(n_samples, len(items)))
    order = np.argsort(-(keys[None, :] + noise), axis=1)
    return [tuple(items[j] for j in row) for row in order]
