"""Multiple-testing procedures on a vector of observations.

Implemented rules:

* Benjamini-Hochberg step-up at level alpha on two-sided p-values
  p_i = 2 * Fbar(|X_i|): with p_(1) <= ... <= p_(n), reject the khat smallest
  where khat = max{k : p_(k) <= alpha * k / n} (zero rejections if no k
  qualifies).  Tied p-values are rejected or retained together.  The realized
  threshold |X|_(khat) is recorded (+inf when nothing is rejected).
* Empirical-Bayes l-value thresholding for standard Gaussian noise: a
  spike-and-slab prior with quasi-Cauchy slab marginal
  g(x) = (1 - exp(-x^2/2)) / (sqrt(2*pi) * x^2) and mixing weight w estimated
  by marginal maximum likelihood over [1/n, 1]; coordinate i is rejected when
  its posterior null probability l_{i, w_hat} falls strictly below t.
* Oracle thresholding at a*_n = (zeta log(n/s_n))**(1/zeta), which needs s_n.
* Fixed thresholding at a user-supplied level, and the two trivial rules.

The l-value rule is defined for Gaussian noise only (zeta = 2); running it
under any other shape raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .model import oracle_threshold
from .subbotin import NoiseDist

__all__ = [
    "DecisionVector",
    "ProcedureSpec",
    "two_sided_pvalue",
    "bh_procedure",
    "oracle_procedure",
    "fixed_threshold_procedure",
    "quasi_cauchy_g",
    "beta_fn",
    "mmle_weight",
    "lvalues",
    "lvalue_procedure",
    "xi_fn",
    "zeta_fn",
    "apply_procedure",
    "load_observations",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class DecisionVector:
    """Binary rejection vector plus the realized threshold or MMLE weight."""

    rejections: np.ndarray
    threshold: float | None = None
    weight: float | None = None

    def __post_init__(self):
        rej = np.asarray(self.rejections, dtype=bool)
        rej.flags.writeable = False
        object.__setattr__(self, "rejections", rej)

    @property
    def n_rejections(self) -> int:
        return int(self.rejections.sum())


@dataclass(frozen=True)
class ProcedureSpec:
    """Tagged choice of procedure: bh(alpha), lvalue(t), oracle, fixed(t), trivials."""

    kind: str
    alpha: float | None = None
    t: float | None = None

    _KINDS = ("bh", "lvalue", "oracle", "fixed", "all-reject", "none-reject")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown procedure kind {self.kind!r}; expected {self._KINDS}")
        if self.kind == "bh":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ValueError(f"bh requires alpha in (0, 1), got {self.alpha}")
        elif self.kind == "lvalue":
            if self.t is None or not 0.0 < self.t < 1.0:
                raise ValueError(f"lvalue requires t in (0, 1), got {self.t}")
        elif self.kind == "fixed":
            if self.t is None or not self.t >= 0.0:
                raise ValueError(f"fixed requires threshold t >= 0, got {self.t}")

    def label(self) -> str:
        if self.kind == "bh":
            return f"bh(alpha={self.alpha:g})"
        if self.kind == "lvalue":
            return f"lvalue(t={self.t:g})"
        if self.kind == "fixed":
            return f"fixed(t={self.t:g})"
        return self.kind


# -- p-values and thresholding rules ----------------------------------------


def two_sided_pvalue(noise: NoiseDist, x):
    """p(x) = 2 * Fbar(|x|) in (0, 1]; p(0) = 1 and p(x) = p(-x)."""
    return 2.0 * noise.upper_tail(np.abs(x))


def bh_procedure(X, alpha: float, noise: NoiseDist) -> DecisionVector:
    """Benjamini-Hochberg step-up at level alpha on p_i = 2*Fbar(|X_i|)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    X = np.asarray(X, dtype=float)
    n = len(X)
    p = two_sided_pvalue(noise, X)
    p_sorted = np.sort(p)
    ok = p_sorted <= alpha * np.arange(1, n + 1) / n
    if not ok.any():
        return DecisionVector(np.zeros(n, dtype=bool), threshold=math.inf)
    khat = int(np.flatnonzero(ok)[-1]) + 1
    # Maximality of khat forbids ties straddling the cutoff, so rejecting at
    # the khat-th smallest p-value rejects exactly khat hypotheses.
    rejections = p <= p_sorted[khat - 1]
    threshold = float(np.sort(np.abs(X))[n - khat])
    return DecisionVector(rejections, threshold=threshold)


def oracle_procedure(X, n: int, s_n: int, noise: NoiseDist) -> DecisionVector:
    """Reject i iff |X_i| >= a*_n (weak inequality)."""
    X = np.asarray(X, dtype=float)
    a_star = oracle_threshold(n, s_n, noise.zeta)
    return DecisionVector(np.abs(X) >= a_star, threshold=a_star)


def fixed_threshold_procedure(X, t: float) -> DecisionVector:
    """Reject i iff |X_i| >= t."""
    if not t >= 0.0:
        raise ValueError(f"threshold must be >= 0, got {t}")
    X = np.asarray(X, dtype=float)
    return DecisionVector(np.abs(X) >= t, threshold=float(t))


# -- quasi-Cauchy slab and the marginal likelihood ---------------------------


def quasi_cauchy_g(x):
    """Slab marginal g(x) = (1 - exp(-x^2/2)) / (sqrt(2*pi) * x^2), even in x.

    The singularity at 0 is removable; |x| < 1e-4 uses the series
    (1/2 - x^2/8 + x^4/48) / sqrt(2*pi).
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)  # dummy to keep the main branch finite
    with np.errstate(over="ignore"):
        main = -np.expm1(-xs * xs / 2.0) / (xs * xs)
    xt = np.where(small, x, 0.0)
    series = 0.5 - xt * xt / 8.0 + xt**4 / 48.0
    out = np.where(small, series, main) / _SQRT_2PI
    return out if out.ndim else float(out)


def beta_fn(x):
    """beta(x) = g(x)/phi(x) - 1 = expm1(x^2/2)/x^2 - 1.

    Even, increasing in |x|, with beta(0) = -1/2; overflows to +inf for
    |x| > ~38, which downstream score computations handle explicitly.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    with np.errstate(over="ignore", invalid="ignore"):
        main = np.expm1(xs * xs / 2.0) / (xs * xs)
    # x*x overflows past ~1.3e154, turning main into inf/inf = nan
    main = np.where(np.isnan(main) & (np.abs(xs) > 1.0), np.inf, main)
    xt = np.where(small, x, 0.0)
    series = 0.5 + xt * xt / 8.0 + xt**4 / 48.0
    out = np.where(small, series, main) - 1.0
    return out if out.ndim else float(out)


def _log_beta1p(x: float) -> float:
    """log(g/phi)(x) = log(1 + beta(x)), stable for all x >= 0."""
    x = abs(float(x))
    if x < 1e-4:
        return math.log(0.5 + x * x / 8.0 + x**4 / 48.0)
    z = x * x / 2.0
    if z < 700.0:
        return math.log(math.expm1(z)) - 2.0 * math.log(x)
    return z + math.log1p(-math.exp(-z)) - 2.0 * math.log(x)


def _score_terms(beta, w: float):
    """beta_i / (1 + w * beta_i), with the +inf betas contributing 1/w."""
    with np.errstate(invalid="ignore"):
        terms = beta / (1.0 + w * beta)
    return np.where(np.isinf(beta), 1.0 / w, terms)


def mmle_weight(X) -> float:
    """Maximizer over [1/n, 1] of the marginal log-likelihood sum log(1 + w*beta(X_i)).

    The score S(w) = sum beta_i / (1 + w*beta_i) is strictly decreasing, so the
    maximizer is the unique zero of S when the sign changes on [1/n, 1] and the
    appropriate boundary otherwise.  Bisection to 1e-12 in w.
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    if n < 1:
        raise ValueError("mmle_weight needs at least one observation")
    beta = beta_fn(X)
    lo, hi = 1.0 / n, 1.0
    s_lo = float(_score_terms(beta, lo).sum())
    if s_lo <= 0.0:
        return lo
    s_hi = float(_score_terms(beta, hi).sum())
    if s_hi >= 0.0:
        return hi
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if float(_score_terms(beta, mid).sum()) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lvalues(X, w: float):
    """Posterior null probabilities l_{i,w} = (1-w)phi / ((1-w)phi + w*g) in [0, 1]."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w must lie in [0, 1], got {w}")
    X = np.asarray(X, dtype=float)
    if w == 0.0:
        return np.ones_like(X)
    if w == 1.0:
        return np.zeros_like(X)
    ratio = w / (1.0 - w)
    with np.errstate(over="ignore"):
        out = 1.0 / (1.0 + ratio * (beta_fn(X) + 1.0))
    return out


def lvalue_procedure(X, t: float) -> DecisionVector:
    """Reject i iff l_{i, w_hat}(X) < t (strict), w_hat by marginal max likelihood.

    Defined for standard Gaussian noise; see apply_procedure for the shape check.
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    X = np.asarray(X, dtype=float)
    w_hat = mmle_weight(X)
    return DecisionVector(lvalues(X, w_hat) < t, weight=w_hat)


# -- monotone inverses used by the slab analysis ------------------------------


def _solve_log_beta1p(target: float) -> float:
    """Unique x >= 0 with log(1 + beta(x)) = target (target > log(1/2))."""
    f = lambda x: (_LOG_HALF if x == 0.0 else _log_beta1p(x)) - target
    hi = max(3.0, math.sqrt(2.0 * max(target, 0.0)) + 3.0)
    while _log_beta1p(hi) < target:
        hi *= 1.5
    return optimize.brentq(f, 0.0, hi, xtol=1e-14, rtol=8.9e-16)


def xi_fn(u: float) -> float:
    """Inverse of the decreasing map x -> (phi/g)(x) on x >= 0, for u in (0, 2).

    ((phi/g)(0) = 2 is the supremum.)  Residual |(phi/g)(xi(u)) - u| <= 1e-10.
    """
    u = float(u)
    if not 0.0 < u < 2.0:
        raise ValueError(f"xi_fn domain is (0, 2), got {u}")
    return _solve_log_beta1p(-math.log(u))


def zeta_fn(u: float) -> float:
    """Inverse of beta at 1/u: the unique x >= 0 with beta(x) = 1/u, u in (0, 1)."""
    u = float(u)
    if not 0.0 < u < 1.0:
        raise ValueError(f"zeta_fn domain is (0, 1), got {u}")
    # beta(x) = 1/u  <=>  log(1 + beta(x)) = log(1 + 1/u) = log1p(u) - log(u)
    return _solve_log_beta1p(math.log1p(u) - math.log(u))


def load_observations(path) -> np.ndarray:
    """Observation vector from a text file, one real per line ('#' comments ok)."""
    data = np.loadtxt(path, comments="#", ndmin=1)
    if data.ndim != 1:
        raise ValueError(f"expected one value per line, got shape {data.shape}")
    return data.astype(float)


# -- dispatch -----------------------------------------------------------------


def apply_procedure(
    spec: ProcedureSpec, X, noise: NoiseDist, s_n: int | None = None
) -> DecisionVector:
    """Run the procedure described by spec on an observation vector."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    if spec.kind == "bh":
        return bh_procedure(X, spec.alpha, noise)
    if spec.kind == "lvalue":
        if noise.zeta != 2.0:
            raise ValueError(
                "the l-value procedure is defined for Gaussian noise (zeta=2) only; "
                f"got zeta={noise.zeta}"
            )
        return lvalue_procedure(X, spec.t)
    if spec.kind == "oracle":
        if s_n is None:
            raise ValueError("oracle thresholding requires the sparsity s_n")
        return oracle_procedure(X, n, s_n, noise)
    if spec.kind == "fixed":
        return fixed_threshold_procedure(X, spec.t)
    if spec.kind == "all-reject":
        return DecisionVector(np.ones(n, dtype=bool), threshold=0.0)
    return DecisionVector(np.zeros(n, dtype=bool), threshold=math.inf)
