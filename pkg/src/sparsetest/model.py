"""Sparse signal configurations and observation sampling, X = theta + eps.

A configuration places s_n nonzero entries in a length-n vector.  Nonzero
magnitudes are written as offsets b_j from the oracle threshold

    a*_n = (zeta * log(n / s_n)) ** (1 / zeta),

i.e. |theta_{i_j}| = a*_n + b_j, the hardest (boundary) point of the signal
class with those offsets.  Offsets must satisfy b_j > -a*_n so every nonzero
magnitude is strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .subbotin import NoiseDist

__all__ = [
    "SignalConfig",
    "ThetaVector",
    "oracle_threshold",
    "make_theta",
    "sample_data",
    "single_strength",
    "two_strength",
    "in_class",
]

_SIGN_RULES = ("all-positive", "random")
_PLACEMENT_RULES = ("first-s", "uniform-random")


def oracle_threshold(n: int, s_n: int, zeta: float) -> float:
    """a*_n = (zeta * log(n/s_n))**(1/zeta); requires 0 < s_n < n and zeta > 1."""
    if not 0 < s_n < n:
        raise ValueError(f"need 0 < s_n < n, got s_n={s_n}, n={n}")
    if not zeta > 1.0:
        raise ValueError(f"need zeta > 1, got {zeta}")
    return (zeta * math.log(n / s_n)) ** (1.0 / zeta)


@dataclass(frozen=True)
class SignalConfig:
    """Point of a multi-offset signal class: n tests, s_n signals at a*_n + b_j."""

    n: int
    s_n: int
    offsets: tuple[float, ...] = ()
    zeta: float = 2.0
    signs: str = "all-positive"
    placement: str = "first-s"

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(float(b) for b in self.offsets))
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.s_n <= self.n:
            raise ValueError(f"need 0 <= s_n <= n, got s_n={self.s_n}, n={self.n}")
        if self.s_n > 0 and self.s_n >= self.n:
            raise ValueError(f"need n/s_n > 1 when s_n > 0, got n={self.n}, s_n={self.s_n}")
        if len(self.offsets) != self.s_n:
            raise ValueError(
                f"offsets must have length s_n={self.s_n}, got {len(self.offsets)}"
            )
        if self.signs not in _SIGN_RULES:
            raise ValueError(f"signs must be one of {_SIGN_RULES}, got {self.signs!r}")
        if self.placement not in _PLACEMENT_RULES:
            raise ValueError(
                f"placement must be one of {_PLACEMENT_RULES}, got {self.placement!r}"
            )
        if self.s_n > 0:
            a_star = oracle_threshold(self.n, self.s_n, self.zeta)
            worst = min(self.offsets)
            if not worst > -a_star:
                raise ValueError(
                    f"every offset must exceed -a*_n = {-a_star:.6g}, got min {worst:.6g}"
                )

    @property
    def a_star(self) -> float:
        return oracle_threshold(self.n, self.s_n, self.zeta) if self.s_n else math.inf


def single_strength(n: int, s_n: int, b: float, zeta: float = 2.0, **kw) -> SignalConfig:
    """All s_n nonzero magnitudes equal to a*_n + b (beta-min boundary case)."""
    return SignalConfig(n=n, s_n=s_n, offsets=(float(b),) * s_n, zeta=zeta, **kw)


def two_strength(
    n: int, s_n: int, x: float, y: float, beta: float = 0.5, zeta: float = 2.0, **kw
) -> SignalConfig:
    """floor(s_n * beta) signals at a*_n + max(x, y), the rest at a*_n + min(x, y)."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    k = int(math.floor(s_n * beta))
    offsets = (max(x, y),) * k + (min(x, y),) * (s_n - k)
    return SignalConfig(n=n, s_n=s_n, offsets=offsets, zeta=zeta, **kw)


@dataclass(frozen=True)
class ThetaVector:
    """Mean vector with its support; arrays are treated as read-only."""

    values: np.ndarray
    support: np.ndarray = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "support", np.flatnonzero(values))


def make_theta(config: SignalConfig, rng_seed) -> ThetaVector:
    """Boundary vector of the class: exactly s_n nonzeros with |theta| = a*_n + b_j."""
    values = np.zeros(config.n)
    if config.s_n == 0:
        return ThetaVector(values)
    rng = np.random.default_rng(rng_seed)
    magnitudes = config.a_star + np.asarray(config.offsets)
    if config.placement == "first-s":
        idx = np.arange(config.s_n)
    else:
        idx = rng.choice(config.n, size=config.s_n, replace=False)
    if config.signs == "all-positive":
        signs = np.ones(config.s_n)
    else:
        signs = np.where(rng.random(config.s_n) < 0.5, -1.0, 1.0)
    values[idx] = signs * magnitudes
    return ThetaVector(values)


def sample_data(theta: ThetaVector, noise: NoiseDist, rng_seed) -> np.ndarray:
    """X_i = theta_i + eps_i with eps i.i.d. from the noise law; seed-deterministic."""
    values = theta.values if isinstance(theta, ThetaVector) else np.asarray(theta, float)
    return values + noise.sample(len(values), rng_seed)


def in_class(theta: ThetaVector, config: SignalConfig) -> bool:
    """Class membership: sorted nonzero magnitudes dominate sorted a*_n + b_j."""
    mags = np.sort(np.abs(theta.values[theta.support]))
    if len(mags) != config.s_n:
        return False
    if config.s_n == 0:
        return True
    floors = np.sort(config.a_star + np.asarray(config.offsets))
    return bool(np.all(mags >= floors - 1e-12))
