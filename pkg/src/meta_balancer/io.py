"""Dataset ingestion and the versioned result wire format.

Fixed file schemas (UTF-8, comma separator, dot decimal, header first):

    studies:  id,y,se        or  id,y,se,n   (n blank = absent)
    MR:       id,mu_xg,se_xg,mu_yg,se_yg

JSON datasets are arrays of objects with exactly those keys; unknown
keys are rejected so config drift cannot pass silently.  Results are
serialized into a deterministic, canonically ordered envelope

    {schema_version, model, estimates, heterogeneity, balance}

with floats at shortest round-trip precision.  Non-finite precisions
(infinite precision at zero dispersion) are encoded as null.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math

from .balance import BalanceState, StudyMass
from .data import MRDataset, MRVariant, Study, StudySet
from .egger import EggerFit
from .errors import MetaBalancerError, ValidationError
from .pooling import Heterogeneity, PooledEstimate

SCHEMA_VERSION = "1"

FORMAT_CSV = "csv"
FORMAT_JSON = "json"
FORMATS = (FORMAT_CSV, FORMAT_JSON)

STUDY_HEADER = ["id", "y", "se"]
STUDY_HEADER_N = ["id", "y", "se", "n"]
MR_HEADER = ["id", "mu_xg", "se_xg", "mu_yg", "se_yg"]


def _decode(data: bytes | str) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValidationError(f"input is not valid UTF-8: {exc}") from exc
    return data


def _check_format(fmt: str) -> None:
    if fmt not in FORMATS:
        raise ValidationError(f"unknown format {fmt!r}; expected one of {FORMATS}",
                              field="format")


def _parse_float(raw: str, field: str, row: int) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ValidationError(f"row {row}: field {field!r}: "
                              f"not a number: {raw!r}", field=field, row=row)


def _csv_rows(text: str, allowed_headers: list[list[str]]) -> tuple[list[str], list[tuple[int, list[str]]]]:
    reader = csv.reader(_io.StringIO(text))
    rows = [r for r in reader if r]  # ignore fully blank lines
    if not rows:
        raise ValidationError("empty file: missing header", row=0)
    header = [h.strip() for h in rows[0]]
    if header not in allowed_headers:
        expected = " or ".join(",".join(h) for h in allowed_headers)
        raise ValidationError(f"bad header {','.join(header)!r}; "
                              f"expected {expected}", row=1)
    body = []
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise ValidationError(f"row {i}: expected {len(header)} fields, "
                                  f"got {len(r)}", row=i)
        body.append((i, r))
    if not body:
        raise ValidationError("no data rows: a study file must contain at "
                              "least one row", row=1)
    return header, body


def _json_rows(text: str, required: list[str], optional: set[str]) -> list[tuple[int, dict]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise ValidationError("top-level JSON value must be an array of row objects")
    if not doc:
        raise ValidationError("empty dataset: at least one row required")
    rows = []
    for i, item in enumerate(doc, start=1):
        if not isinstance(item, dict):
            raise ValidationError(f"row {i}: expected an object", row=i)
        unknown = set(item) - set(required) - optional
        if unknown:
            raise ValidationError(f"row {i}: unknown fields {sorted(unknown)}",
                                  row=i)
        missing = [f for f in required if f not in item]
        if missing:
            raise ValidationError(f"row {i}: missing fields {missing}", row=i)
        rows.append((i, item))
    return rows


def _build_study(row: int, id_raw, y_raw, se_raw, n_raw) -> Study:
    if not str(id_raw).strip():
        raise ValidationError(f"row {row}: empty id", field="id", row=row)
    y = y_raw if isinstance(y_raw, (int, float)) and not isinstance(y_raw, bool) \
        else _parse_float(y_raw, "y", row)
    se = se_raw if isinstance(se_raw, (int, float)) and not isinstance(se_raw, bool) \
        else _parse_float(se_raw, "se", row)
    n = None
    if n_raw is not None and n_raw != "":
        n = n_raw if isinstance(n_raw, (int, float)) and not isinstance(n_raw, bool) \
            else _parse_float(n_raw, "n", row)
    try:
        return Study(id=str(id_raw), y=float(y), se=float(se),
                     n=None if n is None else float(n))
    except MetaBalancerError as exc:
        raise ValidationError(f"row {row}: {exc}", row=row) from exc


def parse_studies(data: bytes | str, fmt: str) -> StudySet:
    """Parse a study dataset, preserving row order; duplicate ids rejected."""
    _check_format(fmt)
    text = _decode(data)
    studies = []
    if fmt == FORMAT_CSV:
        header, body = _csv_rows(text, [STUDY_HEADER, STUDY_HEADER_N])
        has_n = header == STUDY_HEADER_N
        for i, r in body:
            n_raw = r[3] if has_n else None
            studies.append(_build_study(i, r[0].strip(), r[1], r[2], n_raw))
    else:
        for i, item in _json_rows(text, STUDY_HEADER, optional={"n"}):
            studies.append(_build_study(i, item["id"], item["y"], item["se"],
                                        item.get("n")))
    try:
        return StudySet(tuple(studies))
    except MetaBalancerError as exc:
        raise ValidationError(str(exc)) from exc


def parse_mr(data: bytes | str, fmt: str) -> MRDataset:
    """Parse an MR summary dataset; zero gene-exposure rows are rejected."""
    _check_format(fmt)
    text = _decode(data)
    variants = []
    if fmt == FORMAT_CSV:
        _, body = _csv_rows(text, [MR_HEADER])
        raw_rows = [(i, {k: v for k, v in zip(MR_HEADER, r)}) for i, r in body]
    else:
        raw_rows = _json_rows(text, MR_HEADER, optional=set())
    for i, item in raw_rows:
        if not str(item["id"]).strip():
            raise ValidationError(f"row {i}: empty id", field="id", row=i)
        vals = {}
        for f in MR_HEADER[1:]:
            v = item[f]
            vals[f] = v if isinstance(v, (int, float)) and not isinstance(v, bool) \
                else _parse_float(v, f, i)
        if vals["mu_xg"] == 0.0:
            raise ValidationError(f"row {i}: mu_xg is zero, Wald ratio undefined",
                                  field="mu_xg", row=i)
        try:
            variants.append(MRVariant(id=str(item["id"]), **vals))
        except MetaBalancerError as exc:
            raise ValidationError(f"row {i}: {exc}", row=i) from exc
    try:
        return MRDataset(tuple(variants))
    except MetaBalancerError as exc:
        raise ValidationError(str(exc)) from exc


def _num(x: float) -> str:
    return repr(float(x))


def serialize_studies(study_set: StudySet, fmt: str) -> bytes:
    """Canonical dataset serialization (inverse of parse_studies)."""
    _check_format(fmt)
    has_n = any(s.n is not None for s in study_set.studies)
    if fmt == FORMAT_CSV:
        lines = [",".join(STUDY_HEADER_N if has_n else STUDY_HEADER)]
        for s in study_set.studies:
            row = [s.id, _num(s.y), _num(s.se)]
            if has_n:
                row.append("" if s.n is None else _num(s.n))
            lines.append(",".join(row))
        return ("\n".join(lines) + "\n").encode("utf-8")
    rows = []
    for s in study_set.studies:
        d = {"id": s.id, "y": s.y, "se": s.se}
        if s.n is not None:
            d["n"] = s.n
        rows.append(d)
    return _dumps(rows)


def serialize_mr(data: MRDataset, fmt: str) -> bytes:
    """Canonical MR dataset serialization (inverse of parse_mr)."""
    _check_format(fmt)
    if fmt == FORMAT_CSV:
        lines = [",".join(MR_HEADER)]
        for v in data.variants:
            lines.append(",".join([v.id, _num(v.mu_xg), _num(v.se_xg),
                                   _num(v.mu_yg), _num(v.se_yg)]))
        return ("\n".join(lines) + "\n").encode("utf-8")
    rows = [{"id": v.id, "mu_xg": v.mu_xg, "se_xg": v.se_xg,
             "mu_yg": v.mu_yg, "se_yg": v.se_yg} for v in data.variants]
    return _dumps(rows)


def _wire_float(x: float | None) -> float | None:
    if x is None:
        return None
    return x if math.isfinite(x) else None


def _dumps(obj) -> bytes:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False,
                      ensure_ascii=False).encode("utf-8")


def _estimates_dict(result: PooledEstimate | EggerFit,
                    orientation: str | None = None) -> dict:
    if isinstance(result, EggerFit):
        return {
            "type": "egger",
            "beta0_hat": result.beta0_hat,
            "mu_hat": result.mu_hat,
            "phi_hat": result.phi_hat,
            "se_beta0": result.se_beta0,
            "se_mu": result.se_mu,
            "cov_beta0_mu": result.cov_beta0_mu,
            "dof": result.dof,
            "precision_metric": result.precision_metric,
            "sigma2_beta0": result.phi_hat - 1.0 if result.phi_hat > 1.0 else None,
            "orientation": orientation,
            "transformed": [[y, _wire_float(p)] for y, p in result.transformed],
        }
    return {
        "type": "pooled",
        "mu_hat": result.mu_hat,
        "se_mu": result.se_mu,
        "ci_low": result.ci_low,
        "ci_high": result.ci_high,
        "ci_level": result.ci_level,
        "weights": list(result.weights),
    }


def _heterogeneity_dict(het: Heterogeneity) -> dict:
    return {"q": het.q, "i2": het.i2, "tau2": het.tau2, "phi": het.phi,
            "s2_typ": het.s2_typ}


def _balance_dict(state: BalanceState) -> dict:
    return {
        "pivot": state.pivot,
        "stand": [state.stand[0], state.stand[1]],
        "torque_residual": state.torque_residual,
        "model_tag": state.model_tag,
        "studies": [
            {"id": m.id, "x_position": m.x_position,
             "height": _wire_float(m.height), "mass_pct": m.mass_pct,
             "hole_len": m.hole_len, "excluded": m.excluded}
            for m in state.studies
        ],
        "ghost": None if state.ghost is None else _balance_dict(state.ghost),
    }


def serialize_result(result: PooledEstimate | EggerFit,
                     heterogeneity: Heterogeneity,
                     balance: BalanceState, *,
                     orientation: str | None = None) -> bytes:
    """Deterministic canonical envelope for one fit.

    ``orientation`` records the MR variant-orientation rule when the fit
    came from an MR panel; null otherwise.
    """
    model = "egger" if isinstance(result, EggerFit) else result.model_tag
    envelope = {
        "schema_version": SCHEMA_VERSION,
        "model": model,
        "estimates": _estimates_dict(result, orientation),
        "heterogeneity": _heterogeneity_dict(heterogeneity),
        "balance": _balance_dict(balance),
    }
    return _dumps(envelope)


def serialize_leave_one_out(model_tag: str, entries) -> bytes:
    """Envelope for the sensitivity series: one entry per excluded study."""
    rows = []
    for e in entries:
        rows.append({
            "excluded_id": e.excluded_id,
            "estimates": None if e.result is None else _estimates_dict(e.result),
            "heterogeneity": (None if e.heterogeneity is None
                              else _heterogeneity_dict(e.heterogeneity)),
            "error": e.error,
        })
    return _dumps({
        "schema_version": SCHEMA_VERSION,
        "model": model_tag,
        "entries": rows,
    })


def _require_keys(d: dict, keys: set[str], where: str) -> None:
    unknown = set(d) - keys
    if unknown:
        raise ValidationError(f"{where}: unknown fields {sorted(unknown)}")
    missing = keys - set(d)
    if missing:
        raise ValidationError(f"{where}: missing fields {sorted(missing)}")


def _undo_wire_float(x):
    return math.inf if x is None else x


def _balance_from_dict(d: dict) -> BalanceState:
    _require_keys(d, {"pivot", "stand", "torque_residual", "model_tag",
                      "studies", "ghost"}, "balance")
    masses = []
    for m in d["studies"]:
        _require_keys(m, {"id", "x_position", "height", "mass_pct",
                          "hole_len", "excluded"}, "balance.studies[]")
        masses.append(StudyMass(
            id=m["id"], x_position=m["x_position"],
            height=_undo_wire_float(m["height"]), mass_pct=m["mass_pct"],
            hole_len=m["hole_len"], excluded=m["excluded"]))
    ghost = None if d["ghost"] is None else _balance_from_dict(d["ghost"])
    return BalanceState(studies=tuple(masses), pivot=d["pivot"],
                        stand=(d["stand"][0], d["stand"][1]),
                        torque_residual=d["torque_residual"],
                        model_tag=d["model_tag"], ghost=ghost)


def deserialize_result(data: bytes | str
                       ) -> tuple[PooledEstimate | EggerFit, Heterogeneity,
                                  BalanceState]:
    """Inverse of serialize_result (strict: unknown fields rejected)."""
    try:
        doc = json.loads(_decode(data))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from exc
    _require_keys(doc, {"schema_version", "model", "estimates",
                        "heterogeneity", "balance"}, "envelope")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported schema_version {doc['schema_version']!r}")
    est = doc["estimates"]
    if est.get("type") == "egger":
        _require_keys(est, {"type", "beta0_hat", "mu_hat", "phi_hat",
                            "se_beta0", "se_mu", "cov_beta0_mu", "dof",
                            "precision_metric", "sigma2_beta0", "orientation",
                            "transformed"}, "estimates")
        result: PooledEstimate | EggerFit = EggerFit(
            beta0_hat=est["beta0_hat"], mu_hat=est["mu_hat"],
            phi_hat=est["phi_hat"], se_beta0=est["se_beta0"],
            se_mu=est["se_mu"], cov_beta0_mu=est["cov_beta0_mu"],
            transformed=tuple((y, _undo_wire_float(p))
                              for y, p in est["transformed"]),
            dof=est["dof"], precision_metric=est["precision_metric"])
    else:
        _require_keys(est, {"type", "mu_hat", "se_mu", "ci_low", "ci_high",
                            "ci_level", "weights"}, "estimates")
        result = PooledEstimate(
            mu_hat=est["mu_hat"], se_mu=est["se_mu"], ci_low=est["ci_low"],
            ci_high=est["ci_high"], weights=tuple(est["weights"]),
            model_tag=doc["model"], ci_level=est["ci_level"])
    het_d = doc["heterogeneity"]
    _require_keys(het_d, {"q", "i2", "tau2", "phi", "s2_typ"}, "heterogeneity")
    het = Heterogeneity(q=het_d["q"], i2=het_d["i2"], tau2=het_d["tau2"],
                        phi=het_d["phi"], s2_typ=het_d["s2_typ"])
    return result, het, _balance_from_dict(doc["balance"])
