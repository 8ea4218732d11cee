"""Pooling estimators and heterogeneity statistics for a StudySet.

Implements the estimating-equation view of pooling: every model solves
Sum w_i (y_i - mu) = 0 for mu, they differ only in the weights,

    fixed            w_i = 1 / se_i^2
    additive RE      w_i = 1 / (se_i^2 + tau^2)   (tau^2 via DL or PM)
    multiplicative   w_i = 1 / (phi se_i^2)       (phi cancels from mu)

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .data import StudySet
from .errors import DomainError, SolverError

MODEL_FIXED = "fixed"
MODEL_RE_DL = "re_additive_dl"
MODEL_RE_PM = "re_additive_pm"
MODEL_MULT = "re_multiplicative"

POOLING_MODELS = (MODEL_FIXED, MODEL_RE_DL, MODEL_RE_PM, MODEL_MULT)

# Bisection controls for the Paule-Mandel root (see pm_fit).
PM_MAX_DOUBLINGS = 64
PM_TAU2_TOL = 1e-13
PM_MAX_ITER = 300


@dataclass(frozen=True)
class PooledEstimate:
    """Pooled effect with its uncertainty and the per-study weights used.

    ``weights`` follow the included studies in their original order.  For
    the multiplicative model they are the fixed-effect weights 1/se^2:
    the dispersion factor cancels from the point estimate and from any
    normalised quantity, and enters only through ``se_mu``.
    """

    mu_hat: float
    se_mu: float
    ci_low: float
    ci_high: float
    weights: tuple[float, ...]
    model_tag: str
    ci_level: float = 0.95


@dataclass(frozen=True)
class Heterogeneity:
    """Heterogeneity statistics attached to one fit.

    ``q`` is always Cochran's Q about the fixed-effect estimate with
    fixed-effect weights; ``i2`` = max(0, (Q-(k-1))/Q).  ``tau2`` is set
    by the additive models, ``phi`` by the multiplicative one, and
    ``s2_typ`` (the typical within-study variance) by the DL estimator.
    """

    q: float
    i2: float
    tau2: float | None = None
    phi: float | None = None
    s2_typ: float | None = None


def _quantile(ci_level: float, use_t: bool, dof: int) -> float:
    if not 0 < ci_level < 1:
        raise DomainError(f"ci_level must be in (0, 1), got {ci_level}")
    p = 0.5 + ci_level / 2
    if use_t:
        if dof < 1:
            raise DomainError("t-based interval needs at least 1 degree of freedom")
        return float(stats.t.ppf(p, dof))
    return float(stats.norm.ppf(p))


def _interval(mu: float, se: float, ci_level: float, use_t: bool,
              dof: int) -> tuple[float, float]:
    half = _quantile(ci_level, use_t, dof) * se
    return mu - half, mu + half


def fixed_effect(study_set: StudySet, ci_level: float = 0.95,
                 use_t: bool = False) -> PooledEstimate:
    """Inverse-variance weighted mean: w_i = 1/se_i^2, Var = 1/sum(w)."""
    study_set.require_k(1, "fixed_effect")
    y, se = study_set.arrays()
    w = 1.0 / se**2
    mu = float(np.sum(w * y) / np.sum(w))
    se_mu = float(math.sqrt(1.0 / np.sum(w)))
    lo, hi = _interval(mu, se_mu, ci_level, use_t, study_set.k - 1)
    return PooledEstimate(mu, se_mu, lo, hi, tuple(w), MODEL_FIXED, ci_level)


def cochran_q(study_set: StudySet, mu: float) -> float:
    """Cochran's Q about ``mu``: sum (1/se_i^2)(y_i - mu)^2."""
    study_set.require_k(1, "cochran_q")
    if not math.isfinite(mu):
        raise DomainError(f"mu must be finite, got {mu!r}")
    y, se = study_set.arrays()
    return float(np.sum((y - mu) ** 2 / se**2))


def _i2_from_q(q: float, k: int) -> float:
    if q <= 0:
        return 0.0
    return max(0.0, (q - (k - 1)) / q)


def fixed_effect_heterogeneity(study_set: StudySet) -> Heterogeneity:
    """Q and I-squared about the fixed-effect estimate; nothing else set."""
    q = cochran_q(study_set, fixed_effect(study_set).mu_hat)
    return Heterogeneity(q=q, i2=_i2_from_q(q, study_set.k))


def dl_tau2(study_set: StudySet) -> Heterogeneity:
    """Moment estimator of the between-study variance.

    tau2 = max(0, (Q - (k-1)) / C) with C = S1 - S2/S1, S1 = sum(1/se^2),
    S2 = sum(1/se^4).  The typical within-study variance is defined as
    s2_typ = (k-1)/C so that (Q-(k-1))/Q = tau2/(tau2 + s2_typ) = I^2
    holds exactly whenever Q > k-1.
    """
    study_set.require_k(2, "dl_tau2")
    y, se = study_set.arrays()
    k = study_set.k
    w = 1.0 / se**2
    s1 = float(np.sum(w))
    s2 = float(np.sum(w**2))
    c = s1 - s2 / s1
    if c <= 0:
        raise DomainError("degenerate weight configuration: S1 - S2/S1 <= 0")
    q = cochran_q(study_set, fixed_effect(study_set).mu_hat)
    tau2 = max(0.0, (q - (k - 1)) / c)
    s2_typ = (k - 1) / c
    return Heterogeneity(q=q, i2=_i2_from_q(q, k), tau2=tau2, s2_typ=s2_typ)


def re_additive(study_set: StudySet, tau2: float, model_tag: str,
                ci_level: float = 0.95, use_t: bool = False) -> PooledEstimate:
    """Pool with additive random-effects weights 1/(se^2 + tau2)."""
    study_set.require_k(2, "re_additive")
    if tau2 < 0:
        raise DomainError(f"tau2 must be >= 0, got {tau2}")
    y, se = study_set.arrays()
    w = 1.0 / (se**2 + tau2)
    mu = float(np.sum(w * y) / np.sum(w))
    se_mu = float(math.sqrt(1.0 / np.sum(w)))
    lo, hi = _interval(mu, se_mu, ci_level, use_t, study_set.k - 1)
    return PooledEstimate(mu, se_mu, lo, hi, tuple(w), model_tag, ci_level)


def dl_fit(study_set: StudySet, ci_level: float = 0.95,
           use_t: bool = False) -> tuple[PooledEstimate, Heterogeneity]:
    """DerSimonian-Laird random-effects fit: dl_tau2 then re-weighted pooling."""
    het = dl_tau2(study_set)
    est = re_additive(study_set, het.tau2, MODEL_RE_DL, ci_level, use_t)
    return est, het


def generalized_q(study_set: StudySet, tau2: float) -> float:
    """Generalized Q at tau2, with mu profiled out as the weighted mean."""
    if tau2 < 0:
        raise DomainError(f"tau2 must be >= 0, got {tau2}")
    y, se = study_set.arrays()
    w = 1.0 / (se**2 + tau2)
    mu = np.sum(w * y) / np.sum(w)
    return float(np.sum(w * (y - mu) ** 2))


def pm_tau2(study_set: StudySet) -> float:
    """Paule-Mandel tau2: the root of generalized_q(tau2) = k - 1.

    The generalized Q is continuous and strictly decreasing in tau2, so
    the root is found by bisection after doubling an upper bound until it
    brackets.  Returns 0 when the equation has no positive root
    (generalized Q at 0 already <= k-1).
    """
    study_set.require_k(2, "pm_tau2")
    y, se = study_set.arrays()
    k = study_set.k
    target = float(k - 1)
    if generalized_q(study_set, 0.0) <= target:
        return 0.0
    hi = float(np.var(y, ddof=1) + np.max(se**2))
    hi = max(hi, 1e-12)
    doublings = 0
    while generalized_q(study_set, hi) > target:
        hi *= 2.0
        doublings += 1
        if doublings > PM_MAX_DOUBLINGS:
            raise SolverError(
                f"Paule-Mandel root not bracketed below tau2 = {hi:.6g}")
    lo = 0.0
    for _ in range(PM_MAX_ITER):
        if hi - lo <= PM_TAU2_TOL * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if generalized_q(study_set, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pm_fit(study_set: StudySet, ci_level: float = 0.95,
           use_t: bool = False) -> tuple[PooledEstimate, Heterogeneity]:
    """Joint (mu, tau2) solving the three-equation Paule-Mandel system.

    Weight equation w_i = 1/(se_i^2 + tau2); mean equation
    sum w_i (y_i - mu) = 0; heterogeneity equation
    sum w_i (y_i - mu)^2 = k - 1.  Boundary solution tau2 = 0 (the
    fixed-effect mu) when the generalized Q at 0 is already <= k-1.
    """
    tau2 = pm_tau2(study_set)
    est = re_additive(study_set, tau2, MODEL_RE_PM, ci_level, use_t)
    q = cochran_q(study_set, fixed_effect(study_set).mu_hat)
    het = Heterogeneity(q=q, i2=_i2_from_q(q, study_set.k), tau2=tau2)
    return est, het


def multiplicative_fit(study_set: StudySet, ci_level: float = 0.95,
                       use_t: bool = False) -> tuple[PooledEstimate, Heterogeneity]:
    """Multiplicative-dispersion fit: same mu as fixed effect, scaled variance.

    phi is estimated by the method of moments on the fixed-effect
    residuals, phi = Q/(k-1), and is deliberately not clamped at 1:
    under-dispersion is reported as estimated.  se_mu = sqrt(phi/sum w).
    """
    study_set.require_k(2, "multiplicative_fit")
    fe = fixed_effect(study_set, ci_level)
    k = study_set.k
    q = cochran_q(study_set, fe.mu_hat)
    phi = q / (k - 1)
    se_mu = float(math.sqrt(phi / sum(fe.weights)))
    lo, hi = _interval(fe.mu_hat, se_mu, ci_level, use_t, k - 1)
    est = PooledEstimate(fe.mu_hat, se_mu, lo, hi, fe.weights, MODEL_MULT, ci_level)
    het = Heterogeneity(q=q, i2=_i2_from_q(q, k), phi=phi)
    return est, het
