"""Single dispatch from a model tag to a fitted (result, heterogeneity) pair.

Every front door (library calls, CLI, HTTP service, leave-one-out) goes
through fit_model so the numbers can never diverge between entry points.
"""

from __future__ import annotations

from .data import StudySet
from .egger import MODEL_EGGER, EggerFit, egger_wls
from .errors import DomainError
from .pooling import (
    MODEL_FIXED,
    MODEL_MULT,
    MODEL_RE_DL,
    MODEL_RE_PM,
    Heterogeneity,
    PooledEstimate,
    dl_fit,
    fixed_effect,
    fixed_effect_heterogeneity,
    multiplicative_fit,
    pm_fit,
)

ANALYSIS_MODELS = (MODEL_FIXED, MODEL_RE_DL, MODEL_RE_PM, MODEL_MULT, MODEL_EGGER)

# minimum number of included studies per model
MIN_K = {
    MODEL_FIXED: 1,
    MODEL_RE_DL: 2,
    MODEL_RE_PM: 2,
    MODEL_MULT: 2,
    MODEL_EGGER: 3,
}


def fit_model(study_set: StudySet, model_tag: str, *, ci_level: float = 0.95,
              use_t: bool = False, metric: str = "inv_se",
              ) -> tuple[PooledEstimate | EggerFit, Heterogeneity]:
    """Fit the named model and return (result, heterogeneity).

    ``metric`` only applies to the Egger model; ``use_t`` only to the
    pooling models (Egger inference is t-based by construction).
    """
    if model_tag not in ANALYSIS_MODELS:
        raise DomainError(f"unknown model {model_tag!r}; "
                          f"expected one of {ANALYSIS_MODELS}")
    if model_tag == MODEL_FIXED:
        return (fixed_effect(study_set, ci_level, use_t),
                fixed_effect_heterogeneity(study_set))
    if model_tag == MODEL_RE_DL:
        return dl_fit(study_set, ci_level, use_t)
    if model_tag == MODEL_RE_PM:
        return pm_fit(study_set, ci_level, use_t)
    if model_tag == MODEL_MULT:
        return multiplicative_fit(study_set, ci_level, use_t)
    fit = egger_wls(study_set, metric)
    het_base = fixed_effect_heterogeneity(study_set)
    return fit, Heterogeneity(q=het_base.q, i2=het_base.i2, phi=fit.phi_hat)
