"""Synthetic data generators that follow the model equations verbatim.

Each generator draws the precision scale first (s_i, uniform on a
configurable positive interval by default), then the unit-normal errors,
then any model-specific extras, so that nested models produce
bit-identical output for the same seed (e.g. additive heterogeneity at
tau2 = 0 equals the fixed-effect generator).

Randomness comes from the counter-based Philox generator keyed on
(seed, stream): replicate r of a Monte-Carlo run uses stream r and is
reproducible regardless of scheduling or evaluation order.
"""

from __future__ import annotations

import math

import numpy as np

from .data import MRDataset, MRVariant, Study, StudySet
from .errors import DomainError

MODEL_FIXED_GEN = "eq1"
MODEL_ADDITIVE_GEN = "eq3"
MODEL_MULTIPLICATIVE_GEN = "eq4"
MODEL_EGGER_FIXED_GEN = "eq8"
MODEL_EGGER_MULT_GEN = "eq10"
MODEL_PLEIOTROPY_GEN = "eq12"

GENERATOR_MODELS = (MODEL_FIXED_GEN, MODEL_ADDITIVE_GEN, MODEL_MULTIPLICATIVE_GEN,
                    MODEL_EGGER_FIXED_GEN, MODEL_EGGER_MULT_GEN,
                    MODEL_PLEIOTROPY_GEN)

# pleiotropy-term laws for eq12, all variance-matched to sigma2_beta0
PSI_LAWS = ("normal", "laplace", "uniform")

# se_xg is inert under the first-order Wald-ratio rule; a fixed small
# value keeps generated MR panels fully deterministic.
MR_SE_XG = 0.01


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for (seed, stream); streams never collide."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _draw_psi(rng: np.random.Generator, k: int, sigma2: float,
              law: str) -> np.ndarray:
    # variance-matched alternatives to the default normal pleiotropy term
    if law == "normal":
        return math.sqrt(sigma2) * rng.standard_normal(k)
    if law == "laplace":
        return rng.laplace(0.0, math.sqrt(sigma2 / 2.0), k)
    return rng.uniform(-math.sqrt(3.0 * sigma2), math.sqrt(3.0 * sigma2), k)


def simulate(model: str, k: int, seed: int, *, mu: float = 0.0,
             tau2: float = 0.0, phi: float = 1.0, beta0: float = 0.0,
             sigma2_beta0: float = 0.0, s_low: float = 0.05,
             s_high: float = 1.0, psi_law: str = "normal",
             stream: int = 0) -> StudySet | MRDataset:
    """Draw k studies (or variants, under eq12) from the named model.

    eq1   y = mu + s e                      fixed effect
    eq3   y = mu + s e + d,  d ~ N(0,tau2)  additive heterogeneity
    eq4   y = mu + phi^(1/2) s e            multiplicative dispersion
    eq8   y = mu + b0 s + s e               small-study bias, fixed
    eq10  y = mu + b0 s + phi^(1/2) s e     small-study bias, dispersed
    eq12  y = mu + b0 s + s e + s p,  Var(p) = sigma2_beta0
          returned as an MR panel with mu_xg = 1/s, mu_yg = y/s,
          se_yg = 1 (so its Wald-ratio StudySet is exactly (y, s)).

    ``psi_law`` picks the pleiotropy-term distribution for eq12 (normal
    by default; laplace and uniform are variance-matched alternatives
    for robustness experiments).
    """
    if model not in GENERATOR_MODELS:
        raise DomainError(f"unknown generator model {model!r}; "
                          f"expected one of {GENERATOR_MODELS}")
    _check(k >= 1, f"k must be >= 1, got {k}")
    _check(math.isfinite(mu), "mu must be finite")
    _check(tau2 >= 0, f"tau2 must be >= 0, got {tau2}")
    _check(phi > 0, f"phi must be > 0, got {phi}")
    _check(sigma2_beta0 >= 0, f"sigma2_beta0 must be >= 0, got {sigma2_beta0}")
    _check(0 < s_low <= s_high, f"need 0 < s_low <= s_high, got [{s_low}, {s_high}]")
    _check(psi_law in PSI_LAWS, f"psi_law must be one of {PSI_LAWS}, "
                                f"got {psi_law!r}")

    rng = make_rng(seed, stream)
    s = rng.uniform(s_low, s_high, k)
    eps = rng.standard_normal(k)

    if model == MODEL_FIXED_GEN:
        y = mu + s * eps
    elif model == MODEL_ADDITIVE_GEN:
        delta = rng.standard_normal(k)
        y = mu + s * eps + math.sqrt(tau2) * delta
    elif model == MODEL_MULTIPLICATIVE_GEN:
        y = mu + math.sqrt(phi) * s * eps
    elif model == MODEL_EGGER_FIXED_GEN:
        y = mu + beta0 * s + s * eps
    elif model == MODEL_EGGER_MULT_GEN:
        y = mu + beta0 * s + math.sqrt(phi) * s * eps
    else:  # eq12: heterogeneous pleiotropy, psi independent of s
        psi = _draw_psi(rng, k, sigma2_beta0, psi_law)
        y = mu + beta0 * s + s * eps + s * psi
        width = len(str(k))
        return MRDataset(tuple(
            MRVariant(id=f"variant_{i + 1:0{width}d}", mu_xg=1.0 / s[i],
                      se_xg=MR_SE_XG, mu_yg=y[i] / s[i], se_yg=1.0)
            for i in range(k)
        ))

    width = len(str(k))
    return StudySet(tuple(
        Study(id=f"study_{i + 1:0{width}d}", y=float(y[i]), se=float(s[i]))
        for i in range(k)
    ))
