"""Request orchestration shared by the CLI and the HTTP service.

Both front doors build the same request dictionaries and call the same
handlers here, so for a given request they emit byte-identical JSON.
Handlers return an outcome carrying the serialized payload plus the
structured objects (for table rendering) and any compatibility warnings
(side channel: stderr for the CLI, logs for the service -- never part of
the payload).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .analysis import ANALYSIS_MODELS, fit_model
from .balance import BalanceState, build_balance, leave_one_out
from .data import MRDataset, StudySet
from .egger import METRIC_INV_SE, METRICS, MODEL_EGGER, EggerFit
from .errors import DomainError, MetaBalancerError, ValidationError
from .io import (
    FORMATS,
    parse_mr,
    parse_studies,
    serialize_leave_one_out,
    serialize_result,
)
from .mr import PleiotropyEstimate, mr_egger, wald_ratios
from .pooling import (
    MODEL_FIXED,
    Heterogeneity,
    PooledEstimate,
    fixed_effect_heterogeneity,
)

MR_METHODS = ("ivw", "egger")
TAU2_METHODS = ("dl", "pm")
ORIENTATION_RULE = "mu_xg_positive"


@dataclass(frozen=True)
class Options:
    """Validated request options."""

    exclude_ids: tuple[str, ...] = ()
    precision_metric: str = METRIC_INV_SE
    ci_level: float = 0.95
    tau2_method: str | None = None


@dataclass
class Outcome:
    """One handled request: wire payload plus structured pieces."""

    payload: bytes
    warnings: list[str] = field(default_factory=list)
    result: PooledEstimate | EggerFit | None = None
    heterogeneity: Heterogeneity | None = None
    balance: BalanceState | None = None
    pleiotropy: PleiotropyEstimate | None = None
    entries: list | None = None


def _expect_dict(obj, name: str) -> dict:
    if not isinstance(obj, dict):
        raise ValidationError(f"{name} must be an object", field=name)
    return obj


def _check_keys(d: dict, allowed: set[str], name: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ValidationError(f"{name}: unknown fields {sorted(unknown)}",
                              field=name)


def load_dataset(spec, kind: str) -> StudySet | MRDataset:
    """Load inline content or a file reference in the declared format."""
    spec = _expect_dict(spec, "dataset")
    _check_keys(spec, {"format", "content", "path"}, "dataset")
    fmt = spec.get("format")
    if fmt not in FORMATS:
        raise ValidationError(f"dataset.format must be one of {FORMATS}, "
                              f"got {fmt!r}", field="dataset.format")
    if ("content" in spec) == ("path" in spec):
        raise ValidationError("dataset needs exactly one of 'content' or 'path'",
                              field="dataset")
    if "content" in spec:
        raw = spec["content"]
        if not isinstance(raw, (str, bytes)):
            raise ValidationError("dataset.content must be text",
                                  field="dataset.content")
    else:
        path = Path(str(spec["path"]))
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ValidationError(f"cannot read dataset file {path}: {exc}",
                                  field="dataset.path") from exc
    parser = parse_studies if kind == "studies" else parse_mr
    return parser(raw, fmt)


def parse_options(raw, model_tag: str | None) -> tuple[Options, list[str]]:
    """Validate options and report model/option compatibility warnings."""
    warnings: list[str] = []
    if raw is None:
        return Options(), warnings
    raw = _expect_dict(raw, "options")
    _check_keys(raw, {"exclude_ids", "precision_metric", "ci_level",
                      "tau2_method"}, "options")
    exclude = raw.get("exclude_ids", [])
    if (not isinstance(exclude, (list, tuple))
            or not all(isinstance(i, str) for i in exclude)):
        raise ValidationError("options.exclude_ids must be a list of ids",
                              field="options.exclude_ids")
    metric = raw.get("precision_metric", METRIC_INV_SE)
    if metric not in METRICS:
        raise ValidationError(f"options.precision_metric must be one of "
                              f"{METRICS}, got {metric!r}",
                              field="options.precision_metric")
    ci_level = raw.get("ci_level", 0.95)
    if not isinstance(ci_level, (int, float)) or not 0 < ci_level < 1:
        raise ValidationError("options.ci_level must be a number in (0, 1)",
                              field="options.ci_level")
    tau2 = raw.get("tau2_method")
    if tau2 is not None and tau2 not in TAU2_METHODS:
        raise ValidationError(f"options.tau2_method must be one of "
                              f"{TAU2_METHODS}, got {tau2!r}",
                              field="options.tau2_method")
    if tau2 is not None and model_tag is not None:
        if model_tag in ("re_additive_dl", "re_additive_pm"):
            implied = model_tag.rsplit("_", 1)[1]
            if tau2 != implied:
                raise ValidationError(
                    f"model {model_tag} contradicts tau2_method {tau2!r}",
                    field="options.tau2_method")
        else:
            warnings.append(f"tau2_method is ignored for model {model_tag}")
    if metric != METRIC_INV_SE and model_tag is not None \
            and model_tag != MODEL_EGGER:
        warnings.append(f"precision_metric is ignored for model {model_tag}")
    return Options(exclude_ids=tuple(exclude), precision_metric=metric,
                   ci_level=float(ci_level), tau2_method=tau2), warnings


def _apply_exclusions(study_set: StudySet, exclude_ids: tuple[str, ...]
                      ) -> StudySet:
    if not exclude_ids:
        return study_set
    try:
        return study_set.excluding(set(exclude_ids))
    except DomainError as exc:
        raise ValidationError(str(exc), field="options.exclude_ids") from exc


def _fit_with_ghost(study_set: StudySet, model_tag: str, opts: Options,
                    orientation: str | None = None) -> Outcome:
    """Fit the (possibly reduced) set; ghost = the pre-exclusion fit."""
    ghost = None
    reduced = _apply_exclusions(study_set, opts.exclude_ids)
    if opts.exclude_ids:
        g_result, g_het = fit_model(study_set, model_tag,
                                    ci_level=opts.ci_level,
                                    metric=opts.precision_metric)
        ghost = build_balance(study_set, g_result, g_het,
                              ci_level=opts.ci_level)
    result, het = fit_model(reduced, model_tag, ci_level=opts.ci_level,
                            metric=opts.precision_metric)
    balance = build_balance(reduced, result, het, ghost=ghost,
                            ci_level=opts.ci_level)
    payload = serialize_result(result, het, balance, orientation=orientation)
    pleio = PleiotropyEstimate.from_phi(result.phi_hat) \
        if isinstance(result, EggerFit) else None
    return Outcome(payload=payload, result=result, heterogeneity=het,
                   balance=balance, pleiotropy=pleio)


def handle_analyze(payload) -> Outcome:
    """AnalysisRequest -> result envelope (the /v1/analyze and CLI path)."""
    payload = _expect_dict(payload, "request")
    _check_keys(payload, {"dataset", "model", "options"}, "request")
    if "dataset" not in payload:
        raise ValidationError("request needs a dataset", field="dataset")
    model_tag = payload.get("model", MODEL_FIXED)
    if model_tag not in ANALYSIS_MODELS:
        raise ValidationError(f"model must be one of {ANALYSIS_MODELS}, "
                              f"got {model_tag!r}", field="model")
    opts, warnings = parse_options(payload.get("options"), model_tag)
    study_set = load_dataset(payload["dataset"], "studies")
    try:
        outcome = _fit_with_ghost(study_set, model_tag, opts)
    except ValidationError:
        raise
    except MetaBalancerError as exc:
        raise ValidationError(str(exc)) from exc
    outcome.warnings = warnings
    return outcome


def handle_egger(payload) -> Outcome:
    """The /v1/egger endpoint: analyze with the model pinned to egger."""
    payload = _expect_dict(payload, "request")
    _check_keys(payload, {"dataset", "options"}, "request")
    return handle_analyze({"dataset": payload.get("dataset"),
                           "model": MODEL_EGGER,
                           "options": payload.get("options")})


def _drop_variants(data: MRDataset, exclude_ids: tuple[str, ...]) -> MRDataset:
    if not exclude_ids:
        return data
    known = {v.id for v in data.variants}
    unknown = sorted(set(exclude_ids) - known)
    if unknown:
        raise ValidationError(f"cannot exclude unknown variant ids: {unknown}",
                              field="options.exclude_ids")
    return MRDataset(tuple(v for v in data.variants
                           if v.id not in set(exclude_ids)))


def handle_mr(payload) -> Outcome:
    """MR request -> result envelope (the /v1/mr and CLI mr-analyze path)."""
    payload = _expect_dict(payload, "request")
    _check_keys(payload, {"dataset", "method", "options"}, "request")
    if "dataset" not in payload:
        raise ValidationError("request needs a dataset", field="dataset")
    method = payload.get("method")
    if method not in MR_METHODS:
        raise ValidationError(f"method must be one of {MR_METHODS}, "
                              f"got {method!r}", field="method")
    opts, warnings = parse_options(payload.get("options"), None)
    if opts.tau2_method is not None:
        warnings.append("tau2_method is ignored for MR analyses")
    if opts.precision_metric != METRIC_INV_SE:
        warnings.append("precision_metric is ignored for MR analyses "
                        "(Wald ratios carry no sample sizes)")
    data = load_dataset(payload["dataset"], "mr")
    data = _drop_variants(data, opts.exclude_ids)
    try:
        studies = wald_ratios(data)
        if method == "ivw":
            result, het = fit_model(studies, MODEL_FIXED, ci_level=opts.ci_level)
            balance = build_balance(studies, result, het, ci_level=opts.ci_level)
            payload_bytes = serialize_result(result, het, balance,
                                             orientation=ORIENTATION_RULE)
            outcome = Outcome(payload=payload_bytes, result=result,
                              heterogeneity=het, balance=balance)
        else:
            fit, pleio = mr_egger(data)
            het_base = fixed_effect_heterogeneity(studies)
            het = Heterogeneity(q=het_base.q, i2=het_base.i2, phi=fit.phi_hat)
            balance = build_balance(studies, fit, het, ci_level=opts.ci_level)
            payload_bytes = serialize_result(fit, het, balance,
                                             orientation=ORIENTATION_RULE)
            outcome = Outcome(payload=payload_bytes, result=fit,
                              heterogeneity=het, balance=balance,
                              pleiotropy=pleio)
    except ValidationError:
        raise
    except MetaBalancerError as exc:
        raise ValidationError(str(exc)) from exc
    outcome.warnings = warnings
    return outcome


def handle_leave_one_out(payload) -> Outcome:
    """Sensitivity series over single-study exclusions."""
    payload = _expect_dict(payload, "request")
    _check_keys(payload, {"dataset", "model", "options"}, "request")
    if "dataset" not in payload:
        raise ValidationError("request needs a dataset", field="dataset")
    model_tag = payload.get("model", MODEL_FIXED)
    if model_tag not in ANALYSIS_MODELS:
        raise ValidationError(f"model must be one of {ANALYSIS_MODELS}, "
                              f"got {model_tag!r}", field="model")
    opts, warnings = parse_options(payload.get("options"), model_tag)
    study_set = load_dataset(payload["dataset"], "studies")
    study_set = _apply_exclusions(study_set, opts.exclude_ids)
    try:
        entries = leave_one_out(study_set, model_tag, ci_level=opts.ci_level,
                                metric=opts.precision_metric)
    except ValidationError:
        raise
    except MetaBalancerError as exc:
        raise ValidationError(str(exc)) from exc
    return Outcome(payload=serialize_leave_one_out(model_tag, entries),
                   warnings=warnings, entries=entries)
