"""Asymptotic boundary functionals and Monte-Carlo lower-bound quantities.

* lambda_n(b) = mean_j Fbar(b_j): the average tail mass at the signal offsets,
  whose limit is the asymptotic minimax combined risk of the multi-offset
  class.  The single-offset case reduces to Fbar(b).
* Two-offset level sets Lambda(x, y) = beta*Fbar(max(x,y)) + (1-beta)*Fbar(min(x,y)).
* t*_n: the deterministic fixed-point proxy for the BH rejection threshold,
  the unique t > 0 solving

      (1 - s_n/n) * 2*Fbar(t) + (s_n/n) * mean_j Fbar(t - a*_n - b_j)
          = 3 * Fbar(t) / alpha,

  found through the increasing map Psi(t) = mean_j Fbar(t - a*_n - b_j) / Fbar(t):
  t*_n = Psi^{-1}(tau_n) with tau_n = (3/alpha - 2(1 - s_n/n)) * n/s_n.
* p_n(b, rho): probability that at least rho of floor(n/s_n) - 1 fresh noise
  draws exceed a*_n + b + eps_1, estimated by Monte Carlo.  With a shared seed
  the same noise matrix is reused across b and rho (common random numbers), so
  monotonicity in either argument holds exactly, not just statistically.
* fbar_n(b, rho) = mean_j p_n(b_j, rho), each offset on its own child seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .mc import child_seed, map_indexed
from .model import oracle_threshold
from .subbotin import NoiseDist

__all__ = [
    "BoundaryQuery",
    "NonConvergenceError",
    "lambda_n",
    "minimax_risk_limit",
    "two_signal_levels",
    "tstar",
    "pn_lower",
    "fbar_n",
    "omega_q",
]


class NonConvergenceError(RuntimeError):
    """A numerical solve failed to meet its residual contract."""


@dataclass(frozen=True)
class BoundaryQuery:
    """Inputs for boundary evaluations: class geometry plus optional alpha / rho."""

    n: int
    s_n: int
    zeta: float = 2.0
    offsets: tuple[float, ...] = (0.0,)
    alpha: float | None = None
    rho: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(float(b) for b in self.offsets))
        if not 0 < self.s_n < self.n:
            raise ValueError(f"need 0 < s_n < n, got s_n={self.s_n}, n={self.n}")
        if not self.zeta > 1.0:
            raise ValueError(f"need zeta > 1, got {self.zeta}")
        if not self.offsets:
            raise ValueError("offsets must be nonempty")
        a_star = oracle_threshold(self.n, self.s_n, self.zeta)
        if not min(self.offsets) > -a_star:
            raise ValueError(f"offsets must exceed -a*_n = {-a_star:.6g}")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.rho is not None and self.rho < 1:
            raise ValueError(f"rho must be >= 1, got {self.rho}")


def lambda_n(offsets, noise: NoiseDist) -> float:
    """Mean of Fbar over the offsets; in (0, 1) for finite offsets."""
    offsets = np.asarray(offsets, dtype=float)
    if offsets.size == 0:
        raise ValueError("offsets must be nonempty")
    return float(np.mean(noise.upper_tail(offsets)))


def minimax_risk_limit(b: float, noise: NoiseDist) -> float:
    """Fbar(b): the limiting minimax combined risk of the single-offset class."""
    return float(noise.upper_tail(b))


def two_signal_levels(beta: float, noise: NoiseDist, x_grid, y_grid) -> np.ndarray:
    """Matrix of beta*Fbar(max(x,y)) + (1-beta)*Fbar(min(x,y)) over the lattice.

    Entry [i, j] corresponds to (x_grid[i], y_grid[j]); symmetric in (x, y).
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    x = np.asarray(x_grid, dtype=float)[:, None]
    y = np.asarray(y_grid, dtype=float)[None, :]
    hi = np.maximum(x, y)
    lo = np.minimum(x, y)
    return beta * noise.upper_tail(hi) + (1.0 - beta) * noise.upper_tail(lo)


def tstar(n: int, s_n: int, alpha: float, offsets, noise: NoiseDist) -> float:
    """Fixed-point threshold t*_n, solved by bracketed bisection on log Psi.

    The bracket starts at [0, a*_n + 10] and the upper end doubles until the
    sign changes; monotonicity of Psi on the bracket is checked each step.
    Raises NonConvergenceError if the defining equation's relative residual
    exceeds 1e-10.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    offsets = np.asarray(offsets, dtype=float)
    a_star = oracle_threshold(n, s_n, noise.zeta)
    if not np.all(offsets > -a_star):
        raise ValueError(f"offsets must exceed -a*_n = {-a_star:.6g}")

    log_tau = math.log((3.0 / alpha - 2.0 * (1.0 - s_n / n)) * (n / s_n))

    def log_psi(t: float) -> float:
        num = logsumexp(noise.log_upper_tail(t - a_star - offsets)) - math.log(len(offsets))
        return num - noise.log_upper_tail(t)

    lo, f_lo = 0.0, log_psi(0.0)
    hi = a_star + 10.0
    f_hi = log_psi(hi)
    while f_hi < log_tau:
        lo, f_lo = hi, f_hi
        hi *= 2.0
        f_hi = log_psi(hi)
    while hi - lo > 1e-12:
        if f_lo > f_hi + 1e-9:
            raise NonConvergenceError("Psi not increasing on the bisection bracket")
        mid = 0.5 * (lo + hi)
        f_mid = log_psi(mid)
        if f_mid < log_tau:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    t = 0.5 * (lo + hi)

    lhs = (1.0 - s_n / n) * 2.0 * noise.upper_tail(t) + (s_n / n) * float(
        np.mean(noise.upper_tail(t - a_star - offsets))
    )
    rhs = 3.0 * noise.upper_tail(t) / alpha
    if abs(lhs - rhs) > 1e-10 * rhs:
        raise NonConvergenceError(
            f"t* residual {abs(lhs - rhs) / rhs:.3e} exceeds 1e-10 relative"
        )
    return t


# chunk target keeps the per-chunk noise matrix around 8 MB regardless of reps
_CHUNK_VALUES = 1 << 20


def pn_lower(
    b: float,
    rho: int,
    n: int,
    s_n: int,
    noise: NoiseDist,
    reps: int,
    seed,
    threads: int = 1,
) -> float:
    """Monte-Carlo estimate of P[#{fresh noise draws > a*_n + b + eps_1} >= rho].

    Each replicate draws eps_1 plus floor(n/s_n) - 1 comparison draws.  The
    draws depend only on (seed, reps, n/s_n), never on b or rho, so estimates
    at matched seeds are exactly monotone in both arguments.
    """
    if rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    q = n / s_n
    m = int(math.floor(q)) - 1
    if m < 1:
        raise ValueError(f"need n/s_n >= 2, got {q}")
    if rho > m:
        return 0.0
    a_b = oracle_threshold(n, s_n, noise.zeta) + b

    per_chunk = max(1, _CHUNK_VALUES // (m + 1))
    n_chunks = (reps + per_chunk - 1) // per_chunk

    def one_chunk(c: int) -> int:
        rows = min(per_chunk, reps - c * per_chunk)
        eps = noise.sample(rows * (m + 1), child_seed(seed, c)).reshape(rows, m + 1)
        exceed = np.sum(eps[:, 1:] > a_b + eps[:, :1], axis=1)
        return int(np.sum(exceed >= rho))

    hits = map_indexed(one_chunk, n_chunks, threads)
    return sum(hits) / reps


def fbar_n(
    offsets,
    rho: int,
    n: int,
    s_n: int,
    noise: NoiseDist,
    reps: int,
    seed,
    threads: int = 1,
) -> float:
    """Mean of pn_lower over the offsets, offset j on the child seed (seed, j)."""
    offsets = np.asarray(offsets, dtype=float)
    if offsets.size == 0:
        raise ValueError("offsets must be nonempty")
    estimates = [
        pn_lower(float(b), rho, n, s_n, noise, reps, child_seed(seed, j), threads)
        for j, b in enumerate(offsets)
    ]
    return float(np.mean(estimates))


def omega_q(delta: float, q: float, noise: NoiseDist) -> float:
    """exp(-(floor(q) - 1) * Fbar((zeta log q)**(1/zeta) - delta)), for q >= 2."""
    if q < 2:
        raise ValueError(f"need q >= 2, got {q}")
    x = (noise.zeta * math.log(q)) ** (1.0 / noise.zeta) - delta
    return math.exp(-(math.floor(q) - 1.0) * noise.upper_tail(x))
