"""Naive and modified HSIC estimators and the asymptotic-normal test.

All estimators take precomputed Gram matrices ``K`` (for X) and ``L``
(for Y) and work through row sums and grand sums, so they cost O(n^2).

The modified estimator reweights the cross term with a sequence
``w_i = 1 + (-1)^i * gamma`` (i = 1..n). This keeps the null limit of
``sqrt(n) * H`` normal with variance ``4 * (w2 - 1) * Var(V)`` where
``w2 = lim mean(w_i^2) = 1 + gamma^2``. Weights are attached to sample
positions, so the statistic depends on sample order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import NormalDist

import numpy as np

from .errors import DimensionError, DomainError

DEFAULT_GAMMA = 0.32
DEFAULT_SIGNIFICANCE = 0.05

_STD_NORMAL = NormalDist()


def norm_cdf(x: float) -> float:
    return _STD_NORMAL.cdf(x)


def norm_ppf(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    return _STD_NORMAL.inv_cdf(p)


@dataclass(frozen=True)
class WeightScheme:
    """Alternating weights 1 + (-1)^i * gamma, i = 1..n."""

    gamma: float = DEFAULT_GAMMA
    kind: str = "alternating"

    def __post_init__(self):
        if self.kind != "alternating":
            raise DomainError(f"unsupported weight scheme {self.kind!r}")
        g = float(self.gamma)
        if not 0.0 < g <= 1.0:
            raise DomainError(f"gamma must lie in (0, 1], got {g}")
        object.__setattr__(self, "gamma", g)

    @property
    def w_sq_limit(self) -> float:
        """Limit of the mean squared weight, 1 + gamma^2."""
        return 1.0 + self.gamma ** 2

    @property
    def bound(self) -> float:
        """Strict upper bound on every weight."""
        return 1.0 + self.gamma

    def weights(self, n: int) -> np.ndarray:
        return weight_sequence(n, self)


def weight_sequence(n: int, scheme: WeightScheme) -> np.ndarray:
    """Weights for positions i = 1..n; the first sample gets 1 - gamma."""
    if n < 1:
        raise DimensionError(f"n must be at least 1, got {n}")
    signs = np.where(np.arange(1, n + 1) % 2 == 0, 1.0, -1.0)
    return 1.0 + signs * scheme.gamma


@dataclass(frozen=True)
class HsicEstimate:
    value: float
    n: int
    gamma: float | None = None

    @property
    def is_naive(self) -> bool:
        return self.gamma is None

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class TestOutcome:
    statistic: float
    alpha_hat: float
    sigma_sq_hat: float
    z_score: float
    p_value: float
    reject: bool
    significance: float
    degenerate: bool
    n: int
    gamma: float
    critical_value: float
    threshold: float

    __test__ = False  # not a pytest class

    def as_dict(self) -> dict:
        return asdict(self)


def _check_pair(K, L) -> tuple[np.ndarray, np.ndarray]:
    K = np.asarray(K, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionError(f"K must be square, got shape {K.shape}")
    if L.shape != K.shape:
        raise DimensionError(f"K has shape {K.shape} but L has shape {L.shape}")
    if K.shape[0] < 2:
        raise DimensionError("need at least 2 observations")
    return K, L


def _hsic_terms(K, L):
    n = K.shape[0]
    within = (K * L).sum() / n ** 2
    outer = K.sum() * L.sum() / n ** 4
    cross = K.sum(axis=1) * L.sum(axis=1) / n ** 3
    return within, outer, cross


def naive_hsic(K, L) -> HsicEstimate:
    """Plug-in (V-statistic) HSIC estimate from two Gram matrices."""
    K, L = _check_pair(K, L)
    within, outer, cross = _hsic_terms(K, L)
    return HsicEstimate(float(within + outer - 2.0 * cross.sum()), K.shape[0])


def modified_hsic(K, L, weights, gamma: float | None = None) -> HsicEstimate:
    """HSIC estimate whose cross term is reweighted per sample position.

    With all-ones weights this is exactly :func:`naive_hsic`.
    """
    K, L = _check_pair(K, L)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (K.shape[0],):
        raise DimensionError(f"expected {K.shape[0]} weights, got shape {w.shape}")
    # gamma = 1 zeroes the odd positions, so only negative weights are refused
    if np.any(~(w >= 0)):
        raise DomainError("weights must be nonnegative")
    within, outer, cross = _hsic_terms(K, L)
    return HsicEstimate(float(within + outer - 2.0 * (w * cross).sum()), K.shape[0], gamma)


def alpha_hat(K, L) -> float:
    """Spread of the row means of K * L about their grand mean."""
    K, L = _check_pair(K, L)
    prod = K * L
    rows = prod.mean(axis=1)
    return float(np.mean((rows - prod.mean()) ** 2))


def sigma_sq_hat(scheme: WeightScheme, a: float) -> float:
    if a < 0:
        raise DomainError(f"alpha_hat must be nonnegative, got {a}")
    return 4.0 * (scheme.w_sq_limit - 1.0) * a


def independence_test(K, L, scheme: WeightScheme | None = None,
                      significance: float = DEFAULT_SIGNIFICANCE) -> TestOutcome:
    """Asymptotic-normal test of independence based on the modified estimator.

    Rejects when ``H > n^{-1/2} * sigma * q`` with ``q`` the standard normal
    quantile at ``1 - significance / 2``. The p-value ``2 * (1 - Phi(z))``,
    clamped to [0, 1], is below ``significance`` exactly when this rule
    rejects (for z > 0). A zero variance estimate gives a degenerate outcome
    that never rejects.
    """
    scheme = scheme or WeightScheme()
    if not 0.0 < significance < 1.0:
        raise DomainError(f"significance must lie in (0, 1), got {significance}")
    K, L = _check_pair(K, L)
    n = K.shape[0]
    stat = modified_hsic(K, L, scheme.weights(n), scheme.gamma).value
    a = alpha_hat(K, L)
    s2 = sigma_sq_hat(scheme, a)
    sigma = math.sqrt(s2)
    q = norm_ppf(1.0 - significance / 2.0)
    threshold = sigma * q / math.sqrt(n)
    if sigma == 0.0:
        z, p, reject, degenerate = math.nan, 1.0, False, True
    else:
        z = math.sqrt(n) * stat / sigma
        p = min(1.0, max(0.0, 2.0 * norm_cdf(-z)))
        reject = bool(stat > threshold)
        degenerate = False
    return TestOutcome(
        statistic=stat,
        alpha_hat=a,
        sigma_sq_hat=s2,
        z_score=z,
        p_value=p,
        reject=reject,
        significance=significance,
        degenerate=degenerate,
        n=n,
        gamma=scheme.gamma,
        critical_value=q,
        threshold=threshold,
    )


def permutation_test_naive(K, L, permutations: int = 50, rng_seed: int = 0) -> float:
    """Permutation p-value for the naive HSIC.

    Rows and columns of ``L`` are permuted together. Permutation ``b`` draws
    from its own substream ``SeedSequence(rng_seed, spawn_key=(b,))``, so the
    result does not depend on evaluation order.
    """
    K, L = _check_pair(K, L)
    if permutations < 1:
        raise DomainError(f"permutations must be positive, got {permutations}")
    n = K.shape[0]
    observed = naive_hsic(K, L).value
    hits = 0
    for b in range(permutations):
        rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(b,)))
        perm = rng.permutation(n)
        value = naive_hsic(K, L[np.ix_(perm, perm)]).value
        # count numerical ties as exceedances
        if value >= observed or math.isclose(value, observed, rel_tol=1e-12):
            hits += 1
    return (1 + hits) / (permutations + 1)
