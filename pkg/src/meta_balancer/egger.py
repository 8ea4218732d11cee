"""Small-study-bias regression by two equivalent routes.

The multiplicative bias model

    y_i/s_i = b0 + mu/s_i + phi^(1/2) eps_i

is fitted (a) by least squares on the transformed scale (egger_wls) and
(b) by solving the estimating-equation system directly (egger_gest):
transform y_i(b0) = y_i - b0 s_i, profile mu as the 1/s^2-weighted mean,
and find the b0 that zeroes the weighted covariance of the transformed
residuals with s.  The two routes agree to solver precision; both are
exposed so either can serve as a check on the other.

``metric`` selects the precision scale: "inv_se" uses the standard
errors, "inv_n" substitutes 1/n_i (study-size precision) for s_i
throughout, which requires a sample size on every study.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .data import StudySet
from .errors import ContractError, DomainError, SolverError

log = logging.getLogger(__name__)

METRIC_INV_SE = "inv_se"
METRIC_INV_N = "inv_n"
METRICS = (METRIC_INV_SE, METRIC_INV_N)

MODEL_EGGER = "egger"

# bracket expansion for the estimating-equation root
GEST_BRACKET_START = 5.0
GEST_MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class EggerFit:
    """Bias-adjusted fit: intercept = mean bias, slope = adjusted effect.

    ``transformed`` holds one (y_i - beta0_hat * s_i, 1/(phi_hat^(1/2) s_i))
    pair per included study in original order; the precision is math.inf
    when phi_hat is zero (exact fit).
    """

    beta0_hat: float
    mu_hat: float
    phi_hat: float
    se_beta0: float
    se_mu: float
    cov_beta0_mu: float
    transformed: tuple[tuple[float, float], ...]
    dof: int
    precision_metric: str


def precision_scale(study_set: StudySet, metric: str) -> np.ndarray:
    """The s_i used on the regression scale: se_i, or 1/n_i under inv_n."""
    if metric not in METRICS:
        raise DomainError(f"unknown precision metric {metric!r}; expected one of {METRICS}")
    if metric == METRIC_INV_N:
        return 1.0 / study_set.sizes()
    _, se = study_set.arrays()
    return se


def asymmetry_correlation(study_set: StudySet) -> float | None:
    """Pearson correlation between effect size and precision 1/se.

    A strongly negative value is the classic small-study-bias signature.
    Returns None (undefined) when either coordinate has zero variance.
    """
    study_set.require_k(3, "asymmetry_correlation")
    y, se = study_set.arrays()
    prec = 1.0 / se
    if np.ptp(y) == 0.0 or np.ptp(prec) == 0.0:
        return None
    r = np.corrcoef(y, prec)[0, 1]
    return float(r)


def _check_design(s: np.ndarray) -> None:
    if np.ptp(s) == 0.0:
        raise DomainError(
            "all precision values are equal: 1/s is constant and the "
            "regression design is collinear")


def _dispersion(y: np.ndarray, s: np.ndarray, beta0: float, mu: float) -> float:
    # Eq-(17)-style moment estimator with the dispersion normalised out
    k = len(y)
    w = 1.0 / s**2
    resid = (y - beta0 * s) - mu
    return float(np.sum(w * resid**2) / (k - 2))


def _coefficient_covariance(s: np.ndarray, phi: float) -> tuple[float, float, float]:
    """Exact WLS covariance on the transformed scale (x = 1/s).

    Var(mu) = phi/Sxx, Var(b0) = phi (1/k + xbar^2/Sxx),
    Cov(b0, mu) = -phi xbar/Sxx.
    """
    x = 1.0 / s
    k = len(s)
    xbar = float(np.mean(x))
    sxx = float(np.sum((x - xbar) ** 2))
    var_mu = phi / sxx
    var_b0 = phi * (1.0 / k + xbar**2 / sxx)
    cov = -phi * xbar / sxx
    # alternative intercept variance sometimes quoted: Var(mu) * mean(s^2);
    # it differs from the WLS algebra, so surface both at debug level.
    var_b0_alt = var_mu * float(np.mean(s**2))
    if not math.isclose(var_b0, var_b0_alt, rel_tol=1e-12, abs_tol=1e-300):
        log.debug("intercept variance: wls=%.6g, var(mu)*mean(s^2)=%.6g",
                  var_b0, var_b0_alt)
    return math.sqrt(var_b0), math.sqrt(var_mu), cov


def _transformed_pairs(y: np.ndarray, s: np.ndarray, beta0: float,
                       phi: float) -> tuple[tuple[float, float], ...]:
    y_t = y - beta0 * s
    if phi > 0.0:
        prec = 1.0 / (math.sqrt(phi) * s)
        return tuple((float(a), float(b)) for a, b in zip(y_t, prec))
    return tuple((float(a), math.inf) for a in y_t)


def _finish(y: np.ndarray, s: np.ndarray, beta0: float, mu: float,
            phi: float, metric: str) -> EggerFit:
    se_b0, se_mu, cov = _coefficient_covariance(s, phi)
    return EggerFit(
        beta0_hat=float(beta0),
        mu_hat=float(mu),
        phi_hat=float(phi),
        se_beta0=se_b0,
        se_mu=se_mu,
        cov_beta0_mu=cov,
        transformed=_transformed_pairs(y, s, beta0, phi),
        dof=len(y) - 2,
        precision_metric=metric,
    )


def egger_wls(study_set: StudySet, metric: str = METRIC_INV_SE) -> EggerFit:
    """Least-squares route: regress y/s on 1/s.

    The intercept of that regression is the bias term and the slope the
    adjusted effect (equivalently: weighted regression of y on s with
    weights 1/s^2, coefficients swapped).  Dispersion is the residual
    mean square with k-2 degrees of freedom.
    """
    study_set.require_k(3, "egger_wls")
    y, _ = study_set.arrays()
    s = precision_scale(study_set, metric)
    _check_design(s)
    x = 1.0 / s
    z = y / s
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, z, rcond=None)
    beta0, mu = float(coef[0]), float(coef[1])
    resid = z - design @ coef
    phi = float(np.sum(resid**2) / (study_set.k - 2))
    return _finish(y, s, beta0, mu, phi, metric)


def gest_statistic(study_set: StudySet, beta0: float,
                   metric: str = METRIC_INV_SE) -> float:
    """The estimating-function value at a candidate bias beta0.

    Transforms the outcomes, profiles mu as the 1/s^2-weighted mean and
    returns sum w_i (y_i(beta0) - mu)(s_i - sbar).  The fitted beta0 is
    the root of this function.
    """
    y, _ = study_set.arrays()
    s = precision_scale(study_set, metric)
    w = 1.0 / s**2
    y_b = y - beta0 * s
    mu = np.sum(w * y_b) / np.sum(w)
    return float(np.sum(w * (y_b - mu) * (s - np.mean(s))))


def egger_gest(study_set: StudySet, metric: str = METRIC_INV_SE) -> EggerFit:
    """Estimating-equation route: bracketed root-finding on the bias term.

    Expands a symmetric bracket until the estimating function changes
    sign, then solves with Brent's method.  Produces the same
    coefficients as egger_wls up to solver tolerance.
    """
    study_set.require_k(3, "egger_gest")
    y, _ = study_set.arrays()
    s = precision_scale(study_set, metric)
    _check_design(s)

    def estfun(b0: float) -> float:
        return gest_statistic(study_set, b0, metric)

    half = GEST_BRACKET_START
    doublings = 0
    fa, fb = estfun(-half), estfun(half)
    while fa * fb > 0.0:
        half *= 2.0
        doublings += 1
        if doublings > GEST_MAX_DOUBLINGS:
            raise SolverError(
                f"estimating-equation root not bracketed within [-{half}, {half}]")
        fa, fb = estfun(-half), estfun(half)
    if fa == 0.0:
        beta0 = -half
    elif fb == 0.0:
        beta0 = half
    else:
        beta0 = float(brentq(estfun, -half, half, xtol=1e-13, rtol=8.9e-16))

    w = 1.0 / s**2
    y_b = y - beta0 * s
    mu = float(np.sum(w * y_b) / np.sum(w))
    phi = _dispersion(y, s, beta0, mu)
    return _finish(y, s, beta0, mu, phi, metric)


def potential_outcome_view(fit: EggerFit, study_set: StudySet
                           ) -> list[tuple[float, float]]:
    """Transformed (outcome, precision) pairs for the funnel overlay.

    Horizontal shift proportional to s_i, vertical rescale by
    phi_hat^(-1/2); study order preserved.  The fit must have been
    produced from this set.
    """
    s = precision_scale(study_set, fit.precision_metric)
    if len(s) != len(fit.transformed):
        raise ContractError("fit and study set have different study counts")
    y, _ = study_set.arrays()
    pairs = _transformed_pairs(y, s, fit.beta0_hat, fit.phi_hat)
    for (a, _), (b, _) in zip(pairs, fit.transformed):
        if abs(a - b) > 1e-9 * max(1.0, abs(a)):
            raise ContractError("fit was not produced from this study set")
    return list(pairs)
