"""Per-realization testing losses, Monte-Carlo risk estimation, and the
closed-form marginal risk curves of thresholding rules.

Loss conventions (all with the max(1, .) denominator floor):

    FDP = #(false positives) / max(1, #rejections)
    FNP = #(missed signals)  / max(1, #signals)

Monte-Carlo reports contain two false-discovery summaries that differ at
finite n and are labeled distinctly:

* ``fdr``  -- mean of per-replicate FDP ratios (the FDR proper);
* ``mfdr`` -- ratio of means, total false positives over total rejections
  (the marginal FDR), which is what the closed-form curves compute.

Marginal curves for the rule "reject iff |X_i| >= t", at the boundary signal
with all s_n nonzero means equal to a*_n:

    FNR(t)  = 1 - Fbar(t - a*_n) - Fbar(t + a*_n)
    mFDR(t) = 2(n - s_n) Fbar(t) / [2(n - s_n) Fbar(t) + s_n (1 - FNR(t))]
    mR(t)   = mFDR(t) + FNR(t)

Sign convention, stated explicitly because the two appear interchanged in
some treatments: FNR here is the probability of *missing* a signal, so it
increases with t and vanishes at t = 0; the complementary detection
probability is Fbar(t - a*_n) + Fbar(t + a*_n).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .mc import child_seed, map_indexed
from .model import SignalConfig, ThetaVector, make_theta, oracle_threshold, sample_data
from .procedures import DecisionVector, ProcedureSpec, apply_procedure
from .subbotin import NoiseDist

__all__ = [
    "RiskReport",
    "fdp",
    "fnp",
    "hamming_loss",
    "weighted_loss",
    "monte_carlo_risk",
    "marginal_risk_curve",
    "sparsity_preserving_estimate",
]


def _values(theta) -> np.ndarray:
    return theta.values if isinstance(theta, ThetaVector) else np.asarray(theta, float)


def _rejections(phi) -> np.ndarray:
    return phi.rejections if isinstance(phi, DecisionVector) else np.asarray(phi, bool)


def fdp(theta, phi) -> float:
    """False discovery proportion, with denominator max(1, #rejections)."""
    values, rej = _values(theta), _rejections(phi)
    if len(values) != len(rej):
        raise ValueError(f"length mismatch: {len(values)} vs {len(rej)}")
    false_pos = int(np.sum((values == 0) & rej))
    return false_pos / max(1, int(rej.sum()))


def fnp(theta, phi) -> float:
    """False negative proportion, with denominator max(1, #signals)."""
    values, rej = _values(theta), _rejections(phi)
    if len(values) != len(rej):
        raise ValueError(f"length mismatch: {len(values)} vs {len(rej)}")
    signal = values != 0
    missed = int(np.sum(signal & ~rej))
    return missed / max(1, int(signal.sum()))


def hamming_loss(theta, phi) -> int:
    """#false positives + #false negatives."""
    values, rej = _values(theta), _rejections(phi)
    if len(values) != len(rej):
        raise ValueError(f"length mismatch: {len(values)} vs {len(rej)}")
    signal = values != 0
    return int(np.sum(~signal & rej)) + int(np.sum(signal & ~rej))


def weighted_loss(theta, phi, rho: float) -> float:
    """#false positives + rho * #false negatives (rho = 1 is the Hamming loss)."""
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    values, rej = _values(theta), _rejections(phi)
    signal = values != 0
    return float(np.sum(~signal & rej)) + rho * float(np.sum(signal & ~rej))


@dataclass(frozen=True)
class RiskReport:
    """Monte-Carlo risk estimates with replicate count and standard errors."""

    fdr: float
    fnr: float
    hamming_mean: float
    mfdr: float
    reps: int
    se_fdr: float
    se_fnr: float
    se_mfdr: float
    seed: int | None = None

    @property
    def combined(self) -> float:
        """FDR + FNR over the same replicates, by construction."""
        return self.fdr + self.fnr


def _sample_se(x: np.ndarray) -> float:
    if len(x) < 2 or np.ptp(x) == 0.0:  # constant replicates: exactly zero spread
        return 0.0
    return float(np.std(x, ddof=1) / np.sqrt(len(x)))


def monte_carlo_risk(
    config: SignalConfig,
    noise: NoiseDist,
    proc: ProcedureSpec,
    reps: int,
    seed: int,
    threads: int = 1,
) -> RiskReport:
    """Estimate FDR/FNR/Hamming risk of a procedure at the boundary vector of config.

    The signal vector is drawn once from (config, seed); replicate r draws its
    noise from the child seed (seed, 1, r), so results are bit-identical for
    any thread count.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    theta = make_theta(config, child_seed(seed, 0))
    values = theta.values
    signal = values != 0

    def one(r: int):
        X = sample_data(theta, noise, child_seed(seed, 1, r))
        phi = apply_procedure(proc, X, noise, s_n=config.s_n)
        rej = phi.rejections
        n_rej = int(rej.sum())
        false_pos = int(np.sum(~signal & rej))
        missed = int(np.sum(signal & ~rej))
        return (
            false_pos / max(1, n_rej),
            missed / max(1, config.s_n),
            false_pos + missed,
            false_pos,
            n_rej,
        )

    rows = np.asarray(map_indexed(one, reps, threads), dtype=float)
    fdp_r, fnp_r, ham_r, v_r, r_r = rows.T
    if reps == 1:
        warnings.warn("reps=1: standard errors are reported as 0", stacklevel=2)
    v_bar, r_bar = float(v_r.mean()), float(r_r.mean())
    mfdr = v_bar / r_bar if r_bar > 0 else 0.0
    if r_bar > 0 and reps >= 2:
        # delta method for the ratio of means
        cov = np.cov(v_r, r_r, ddof=1)
        var = (
            cov[0, 0] / r_bar**2
            + v_bar**2 * cov[1, 1] / r_bar**4
            - 2 * v_bar * cov[0, 1] / r_bar**3
        ) / reps
        se_mfdr = float(np.sqrt(max(var, 0.0)))
    else:
        se_mfdr = 0.0
    return RiskReport(
        fdr=float(fdp_r.mean()),
        fnr=float(fnp_r.mean()),
        hamming_mean=float(ham_r.mean()),
        mfdr=mfdr,
        reps=reps,
        se_fdr=_sample_se(fdp_r),
        se_fnr=_sample_se(fnp_r),
        se_mfdr=se_mfdr,
        seed=seed,
    )


def marginal_risk_curve(n: int, s_n: int, noise: NoiseDist, t_grid) -> np.ndarray:
    """Closed-form (t, mFDR, FNR, mR) rows for thresholding at each t in the grid.

    Evaluated in log space so the mFDR ratio stays accurate when both expected
    counts underflow.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise ValueError("t_grid must be nonempty")
    if np.any(t < 0):
        raise ValueError("thresholds must be >= 0")
    a_star = oracle_threshold(n, s_n, noise.zeta)
    log_det = np.logaddexp(
        noise.log_upper_tail(t - a_star), noise.log_upper_tail(t + a_star)
    )  # log detection probability Fbar(t-a*) + Fbar(t+a*)
    fnr = np.maximum(-np.expm1(log_det), 0.0)  # clip -1e-17 rounding at t=0
    log_ev = np.log(2.0 * (n - s_n)) + noise.log_upper_tail(t)
    log_es = np.log(float(s_n)) + log_det
    mfdr = special.expit(log_ev - log_es)
    return np.column_stack([t, mfdr, fnr, mfdr + fnr])


def sparsity_preserving_estimate(
    config: SignalConfig,
    noise: NoiseDist,
    proc: ProcedureSpec,
    A: float,
    reps: int,
    seed: int,
    threads: int = 1,
) -> float:
    """Monte-Carlo estimate of P[#rejections > A * s_n]."""
    if not A >= 1.0:
        raise ValueError(f"A must be >= 1, got {A}")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    theta = make_theta(config, child_seed(seed, 0))
    cutoff = A * config.s_n

    def one(r: int) -> float:
        X = sample_data(theta, noise, child_seed(seed, 1, r))
        phi = apply_procedure(proc, X, noise, s_n=config.s_n)
        return float(phi.rejections.sum() > cutoff)

    hits = np.asarray(map_indexed(one, reps, threads), dtype=float)
    return float(hits.mean())
