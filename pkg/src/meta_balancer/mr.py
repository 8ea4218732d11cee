"""Summary-data Mendelian randomization on top of the pooling machinery.

A variant's Wald ratio is treated as one study: effect mu_yg/mu_xg with
standard error se_yg/|mu_xg| (first order, gene-exposure association
taken as known).  IVW is then literally a fixed-effect meta-analysis of
those studies, and pleiotropy adjustment is the Egger fit applied to
them after orienting every variant to a positive gene-exposure
association.
"""

from __future__ import annotations

from dataclasses import dataclass

from .data import MRDataset, Study, StudySet
from .egger import EggerFit, egger_wls
from .errors import DomainError
from .pooling import PooledEstimate, fixed_effect


@dataclass(frozen=True)
class PleiotropyEstimate:
    """Between-variant pleiotropy variance read off the dispersion.

    Identified only when the dispersion exceeds 1; never reported as a
    negative number.
    """

    sigma2_beta0: float | None
    identified: bool

    @classmethod
    def from_phi(cls, phi: float) -> "PleiotropyEstimate":
        if phi > 1.0:
            return cls(sigma2_beta0=phi - 1.0, identified=True)
        return cls(sigma2_beta0=None, identified=False)


def wald_ratios(data: MRDataset) -> StudySet:
    """Per-variant causal effect estimates as a StudySet.

    Rejects any variant with a zero gene-exposure association: its Wald
    ratio is undefined.
    """
    if data.k < 1:
        raise DomainError("wald_ratios needs at least 1 variant")
    studies = []
    for v in data.variants:
        if v.mu_xg == 0.0:
            raise DomainError(
                f"variant {v.id!r}: gene-exposure association is zero, "
                f"Wald ratio undefined")
        studies.append(Study(id=v.id, y=v.mu_yg / v.mu_xg,
                             se=v.se_yg / abs(v.mu_xg)))
    return StudySet(tuple(studies))


def ivw(data: MRDataset, ci_level: float = 0.95) -> PooledEstimate:
    """Inverse-variance weighted causal estimate.

    Exactly fixed_effect(wald_ratios(data)); with unit gene-outcome
    standard errors this reduces to the precision-squared weighted mean
    of the Wald ratios.
    """
    return fixed_effect(wald_ratios(data), ci_level)


def mr_egger(data: MRDataset) -> tuple[EggerFit, PleiotropyEstimate]:
    """Pleiotropy-adjusted causal estimate via Egger regression.

    Variants are re-oriented to mu_xg > 0 first (Wald ratios are
    preserved; the intercept is orientation dependent).  The dispersion
    in excess of 1 estimates the pleiotropy variance.
    """
    if data.k < 3:
        raise DomainError(f"mr_egger needs at least 3 variants, got {data.k}")
    oriented = data if data.oriented else data.oriented_copy()
    fit = egger_wls(wald_ratios(oriented))
    return fit, PleiotropyEstimate.from_phi(fit.phi_hat)
