"""The physical balance representation of a fit.

Every fit -- pooled or Egger-adjusted -- reduces to the same picture: a
horizontal pole carrying one mass per study at its effect position, a
pivot at the pooled estimate where the torques cancel, and a stand whose
feet mark the confidence interval.  Moving from fixed to additive
random effects drills a square hole of side x_i out of each mass so that
x_i^2 + 1/(se_i^2 + tau2) = 1/se_i^2; the Egger view slides each mass to
its transformed position y_i - b0 s_i instead.

This module is the single data contract the UI renders; it computes no
statistics of its own beyond re-deriving weights for validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .analysis import MIN_K, fit_model
from .data import StudySet
from .egger import MODEL_EGGER, EggerFit, potential_outcome_view, precision_scale
from .errors import ContractError, DomainError
from .pooling import (
    MODEL_RE_DL,
    MODEL_RE_PM,
    Heterogeneity,
    PooledEstimate,
)


@dataclass(frozen=True)
class StudyMass:
    """One rendered mass: position, height, size and drill hole."""

    id: str
    x_position: float
    height: float
    mass_pct: float
    hole_len: float
    excluded: bool


@dataclass(frozen=True)
class BalanceState:
    """Everything the Meta-Analyzer view needs for one fit."""

    studies: tuple[StudyMass, ...]
    pivot: float
    stand: tuple[float, float]
    torque_residual: float
    model_tag: str
    ghost: Optional["BalanceState"] = None


def _mass_percentages(weights: np.ndarray) -> np.ndarray:
    return 100.0 * weights / float(np.sum(weights))


def _pooled_components(study_set: StudySet, result: PooledEstimate,
                       het: Heterogeneity):
    y, se = study_set.arrays()
    if len(result.weights) != study_set.k:
        raise ContractError("result carries a different number of weights "
                            "than the set has included studies")
    w = np.asarray(result.weights)
    if result.model_tag in (MODEL_RE_DL, MODEL_RE_PM):
        if het.tau2 is None:
            raise ContractError("additive random-effects result needs a "
                                "heterogeneity with tau2")
        expected = 1.0 / (se**2 + het.tau2)
    else:
        expected = 1.0 / se**2
    if not np.allclose(w, expected, rtol=1e-9, atol=0.0):
        raise ContractError("result weights do not match this study set "
                            "(was the fit computed from it?)")
    if result.model_tag in (MODEL_RE_DL, MODEL_RE_PM) and het.tau2 > 0.0:
        holes = np.sqrt(np.maximum(0.0, 1.0 / se**2 - w))
    else:
        holes = np.zeros_like(w)
    heights = 1.0 / se
    return y, heights, w, holes, result.mu_hat, (result.ci_low, result.ci_high)


def _egger_components(study_set: StudySet, fit: EggerFit,
                      ci_level: float):
    pairs = potential_outcome_view(fit, study_set)  # validates the pairing
    x = np.array([p[0] for p in pairs])
    heights = np.array([p[1] for p in pairs])
    s = precision_scale(study_set, fit.precision_metric)
    w = 1.0 / s**2
    holes = np.zeros_like(w)
    t_mult = float(stats.t.ppf(0.5 + ci_level / 2, fit.dof))
    stand = (fit.mu_hat - t_mult * fit.se_mu, fit.mu_hat + t_mult * fit.se_mu)
    return x, heights, w, holes, fit.mu_hat, stand


def build_balance(study_set: StudySet, result: PooledEstimate | EggerFit,
                  heterogeneity: Heterogeneity,
                  ghost: Optional[BalanceState] = None,
                  ci_level: float = 0.95) -> BalanceState:
    """Convert a fit into the renderable balance state.

    For Egger fits the positions and heights are the potential-outcome
    transformed pairs and the stand uses the t(k-2) interval at
    ``ci_level``; pooled results carry their own interval.  Excluded
    studies are kept (grey in the UI) at their raw coordinates with zero
    mass.  Raises ContractError when the fit does not belong to the set.
    """
    if isinstance(result, EggerFit):
        x, heights, w, holes, pivot, stand = _egger_components(
            study_set, result, ci_level)
        model_tag = MODEL_EGGER
    else:
        x, heights, w, holes, pivot, stand = _pooled_components(
            study_set, result, heterogeneity)
        model_tag = result.model_tag

    mass = _mass_percentages(w)
    torque = float(np.sum(w * (x - pivot)))

    masses = []
    i = 0
    for s in study_set.studies:
        if s.included:
            masses.append(StudyMass(
                id=s.id, x_position=float(x[i]), height=float(heights[i]),
                mass_pct=float(mass[i]), hole_len=float(holes[i]),
                excluded=False))
            i += 1
        else:
            masses.append(StudyMass(
                id=s.id, x_position=s.y, height=1.0 / s.se,
                mass_pct=0.0, hole_len=0.0, excluded=True))
    return BalanceState(studies=tuple(masses), pivot=float(pivot),
                        stand=(float(stand[0]), float(stand[1])),
                        torque_residual=torque, model_tag=model_tag,
                        ghost=ghost)


@dataclass(frozen=True)
class LeaveOneOutEntry:
    """One sensitivity-analysis row; ``error`` set when the refit is invalid."""

    excluded_id: str
    result: object | None
    heterogeneity: Heterogeneity | None
    error: str | None = None


def leave_one_out(study_set: StudySet, model_tag: str, *,
                  ci_level: float = 0.95, metric: str = "inv_se",
                  ) -> list[LeaveOneOutEntry]:
    """Refit the full pipeline once per included study, excluding it.

    Entries whose reduced set falls below the model's minimum size are
    flagged with an error message instead of aborting the whole series.
    """
    minimum = MIN_K.get(model_tag)
    if minimum is None:
        raise DomainError(f"unknown model {model_tag!r}")
    study_set.require_k(4 if model_tag == MODEL_EGGER else 2,
                        f"leave_one_out[{model_tag}]")
    entries = []
    for s in study_set.included_studies():
        sub = study_set.excluding({s.id})
        if sub.k < minimum:
            entries.append(LeaveOneOutEntry(
                excluded_id=s.id, result=None, heterogeneity=None,
                error=f"{model_tag} needs at least {minimum} studies, "
                      f"{sub.k} left after excluding {s.id!r}"))
            continue
        result, het = fit_model(sub, model_tag, ci_level=ci_level, metric=metric)
        entries.append(LeaveOneOutEntry(
            excluded_id=s.id, result=result, heterogeneity=het))
    return entries
