"""Meta-analysis as an estimating-equation system with a physical balance view.

Pooling (fixed, additive and multiplicative random effects), small-study
bias adjustment by Egger regression / G-estimation, summary-data
Mendelian randomization, and a mass-pivot-stand balance model that turns
any fit into renderable physics.
"""

from .analysis import ANALYSIS_MODELS, fit_model
from .balance import BalanceState, LeaveOneOutEntry, StudyMass, build_balance, leave_one_out
from .data import MRDataset, MRVariant, Study, StudySet
from .egger import (
    EggerFit,
    asymmetry_correlation,
    egger_gest,
    egger_wls,
    gest_statistic,
    potential_outcome_view,
)
from .errors import (
    ContractError,
    DomainError,
    MetaBalancerError,
    SolverError,
    ValidationError,
)
from .io import (
    deserialize_result,
    parse_mr,
    parse_studies,
    serialize_mr,
    serialize_result,
    serialize_studies,
)
from .mr import PleiotropyEstimate, ivw, mr_egger, wald_ratios
from .pooling import (
    Heterogeneity,
    PooledEstimate,
    cochran_q,
    dl_fit,
    dl_tau2,
    fixed_effect,
    fixed_effect_heterogeneity,
    generalized_q,
    multiplicative_fit,
    pm_fit,
    pm_tau2,
)
from .simulate import GENERATOR_MODELS, make_rng, simulate

__version__ = "0.1.0"

__all__ = [
    "ANALYSIS_MODELS",
    "BalanceState",
    "ContractError",
    "DomainError",
    "EggerFit",
    "GENERATOR_MODELS",
    "Heterogeneity",
    "LeaveOneOutEntry",
    "MetaBalancerError",
    "MRDataset",
    "MRVariant",
    "PleiotropyEstimate",
    "PooledEstimate",
    "SolverError",
    "Study",
    "StudyMass",
    "StudySet",
    "ValidationError",
    "asymmetry_correlation",
    "build_balance",
    "cochran_q",
    "deserialize_result",
    "dl_fit",
    "dl_tau2",
    "egger_gest",
    "egger_wls",
    "fit_model",
    "fixed_effect",
    "fixed_effect_heterogeneity",
    "generalized_q",
    "gest_statistic",
    "ivw",
    "leave_one_out",
    "make_rng",
    "mr_egger",
    "multiplicative_fit",
    "parse_mr",
    "parse_studies",
    "pm_fit",
    "pm_tau2",
    "potential_outcome_view",
    "serialize_mr",
    "serialize_result",
    "serialize_studies",
    "simulate",
    "wald_ratios",
]
