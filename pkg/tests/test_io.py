"""File parsing, strict-mode validation and wire-format round-trips."""

import json
import math

import numpy as np
import pytest

from meta_balancer.analysis import fit_model
from meta_balancer.balance import build_balance
from meta_balancer.data import MRDataset, MRVariant, Study, StudySet
from meta_balancer.egger import EggerFit
from meta_balancer.errors import ValidationError
from meta_balancer.io import (
    deserialize_result,
    parse_mr,
    parse_studies,
    serialize_mr,
    serialize_result,
    serialize_studies,
)
from meta_balancer.simulate import simulate


def test_header_only_csv_is_an_error():
    with pytest.raises(ValidationError, match="no data rows"):
        parse_studies(b"id,y,se\n", "csv")


def test_single_row_csv():
    s = parse_studies(b"id,y,se\ntrial_a,0.5,0.25\n", "csv")
    assert s.k == 1
    assert s.studies[0] == Study(id="trial_a", y=0.5, se=0.25)


def test_csv_with_sizes_column():
    s = parse_studies(b"id,y,se,n\na,0.1,0.2,100\nb,0.2,0.3,\n", "csv")
    assert s.studies[0].n == 100.0
    assert s.studies[1].n is None


def test_bad_header_rejected():
    with pytest.raises(ValidationError, match="bad header"):
        parse_studies(b"study,effect,stderr\na,0.1,0.2\n", "csv")


def test_malformed_row_names_row_and_field():
    with pytest.raises(ValidationError, match="row 3.*'se'.*oops"):
        parse_studies(b"id,y,se\na,0.1,0.2\nb,0.3,oops\n", "csv")


def test_nonpositive_se_named_error():
    with pytest.raises(ValidationError, match="row 2.*se must be > 0"):
        parse_studies(b"id,y,se\na,0.1,-0.2\n", "csv")


def test_duplicate_ids_rejected():
    with pytest.raises(ValidationError, match="duplicate"):
        parse_studies(b"id,y,se\na,0.1,0.2\na,0.3,0.4\n", "csv")


def test_json_unknown_fields_rejected_strict():
    doc = json.dumps([{"id": "a", "y": 0.1, "se": 0.2, "extra": 1}])
    with pytest.raises(ValidationError, match="unknown fields.*extra"):
        parse_studies(doc, "json")


def test_json_single_row():
    s = parse_studies(json.dumps([{"id": "a", "y": 0.1, "se": 0.2}]), "json")
    assert s.k == 1


def test_study_round_trip_50_random_rows():
    rng = np.random.default_rng(71)
    studies = tuple(
        Study(id=f"study_{i}", y=float(rng.normal()), se=float(rng.uniform(0.01, 2)),
              n=float(rng.integers(10, 500)) if i % 3 == 0 else None)
        for i in range(50))
    original = StudySet(studies)
    for fmt in ("csv", "json"):
        blob = serialize_studies(original, fmt)
        again = parse_studies(blob, fmt)
        assert again == original
        assert serialize_studies(again, fmt) == blob  # canonical fixed point


def test_non_canonical_input_canonicalizes():
    raw = b"id,y,se\na,0.50,0.2500\nb,1e-1,2.5e-1\n"
    parsed = parse_studies(raw, "csv")
    canon = serialize_studies(parsed, "csv")
    assert canon == b"id,y,se\na,0.5,0.25\nb,0.1,0.25\n"


def test_mr_zero_mu_xg_rejected_with_row_number():
    blob = b"id,mu_xg,se_xg,mu_yg,se_yg\nv1,1.0,0.1,0.5,0.2\nv2,0.0,0.1,0.5,0.2\n"
    with pytest.raises(ValidationError, match="row 3.*mu_xg"):
        parse_mr(blob, "csv")


def test_mr_single_row_and_round_trip():
    d = parse_mr(b"id,mu_xg,se_xg,mu_yg,se_yg\nv1,2.0,0.1,1.0,0.2\n", "csv")
    assert d.k == 1
    rng = np.random.default_rng(72)
    panel = MRDataset(tuple(
        MRVariant(id=f"v{i}", mu_xg=float(rng.normal() or 0.5),
                  se_xg=float(rng.uniform(0.01, 1)),
                  mu_yg=float(rng.normal()),
                  se_yg=float(rng.uniform(0.01, 1)))
        for i in range(50)))
    for fmt in ("csv", "json"):
        blob = serialize_mr(panel, fmt)
        assert parse_mr(blob, fmt) == panel
        assert serialize_mr(parse_mr(blob, fmt), fmt) == blob


def fitted_envelope(model):
    st = simulate("eq10", 12, seed=73, mu=0.4, beta0=1.0, phi=1.3)
    result, het = fit_model(st, model)
    balance = build_balance(st, result, het)
    return result, het, balance


@pytest.mark.parametrize("model", ["fixed", "re_additive_dl", "re_additive_pm",
                                   "re_multiplicative", "egger"])
def test_serialize_result_deterministic_and_versioned(model):
    result, het, balance = fitted_envelope(model)
    b1 = serialize_result(result, het, balance)
    b2 = serialize_result(result, het, balance)
    assert b1 == b2
    doc = json.loads(b1)
    assert doc["schema_version"] == "1"
    assert doc["model"] == model
    assert set(doc) == {"schema_version", "model", "estimates",
                        "heterogeneity", "balance"}


@pytest.mark.parametrize("model", ["fixed", "re_additive_pm", "egger"])
def test_round_trip_decode_encode(model):
    result, het, balance = fitted_envelope(model)
    blob = serialize_result(result, het, balance)
    r2, h2, b2 = deserialize_result(blob)
    assert r2 == result
    assert h2 == het
    assert b2 == balance
    assert serialize_result(r2, h2, b2) == blob


def test_round_trip_with_ghost_and_exclusions():
    st = simulate("eq3", 8, seed=74, mu=0.1, tau2=0.2)
    result, het = fit_model(st, "re_additive_pm")
    ghost = build_balance(st, result, het)
    reduced = st.excluding({"study_3"})
    r2, h2 = fit_model(reduced, "re_additive_pm")
    balance = build_balance(reduced, r2, h2, ghost=ghost)
    blob = serialize_result(r2, h2, balance)
    _, _, back = deserialize_result(blob)
    assert back == balance
    assert back.ghost.pivot == ghost.pivot


def test_infinite_precision_encodes_as_null():
    fit = EggerFit(beta0_hat=2.0, mu_hat=1.0, phi_hat=0.0, se_beta0=0.0,
                   se_mu=0.0, cov_beta0_mu=0.0,
                   transformed=((1.0, math.inf), (0.5, math.inf)),
                   dof=1, precision_metric="inv_se")
    from meta_balancer.pooling import Heterogeneity
    from meta_balancer.balance import BalanceState, StudyMass
    het = Heterogeneity(q=0.0, i2=0.0, phi=0.0)
    bal = BalanceState(studies=(StudyMass("a", 1.0, math.inf, 100.0, 0.0, False),),
                       pivot=1.0, stand=(1.0, 1.0), torque_residual=0.0,
                       model_tag="egger")
    blob = serialize_result(fit, het, bal)
    doc = json.loads(blob)
    assert doc["estimates"]["transformed"][0][1] is None
    r2, _, b2 = deserialize_result(blob)
    assert math.isinf(r2.transformed[0][1])
    assert math.isinf(b2.studies[0].height)


def test_deserialize_rejects_unknown_envelope_fields():
    result, het, balance = fitted_envelope("fixed")
    doc = json.loads(serialize_result(result, het, balance))
    doc["surprise"] = 1
    with pytest.raises(ValidationError, match="unknown fields.*surprise"):
        deserialize_result(json.dumps(doc))


def test_deserialize_rejects_wrong_schema_version():
    result, het, balance = fitted_envelope("fixed")
    doc = json.loads(serialize_result(result, het, balance))
    doc["schema_version"] = "2"
    with pytest.raises(ValidationError, match="schema_version"):
        deserialize_result(json.dumps(doc))
