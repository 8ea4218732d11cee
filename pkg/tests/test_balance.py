"""Balance-state construction and leave-one-out sensitivity series."""

import numpy as np
import pytest

from meta_balancer.analysis import fit_model
from meta_balancer.balance import build_balance, leave_one_out
from meta_balancer.data import Study, StudySet
from meta_balancer.errors import ContractError, DomainError
from meta_balancer.simulate import simulate

from oracles import dl_oracle


def make_set(ys, ses):
    return StudySet(tuple(
        Study(id=f"s{i}", y=float(y), se=float(s))
        for i, (y, s) in enumerate(zip(ys, ses))
    ))


def balance_for(study_set, model_tag, **kw):
    result, het = fit_model(study_set, model_tag, **kw)
    return build_balance(study_set, result, het)


def test_two_equal_studies_balance_at_zero():
    state = balance_for(make_set([-1.0, 1.0], [0.5, 0.5]), "fixed")
    assert state.pivot == pytest.approx(0.0, abs=1e-15)
    assert [m.mass_pct for m in state.studies] == pytest.approx([50.0, 50.0])
    assert all(m.hole_len == 0.0 for m in state.studies)
    assert state.stand[0] < 0.0 < state.stand[1]


def test_drill_identity_under_pm():
    st = simulate("eq3", 12, seed=51, mu=0.2, tau2=0.3)
    result, het = fit_model(st, "re_additive_pm")
    assert het.tau2 > 0
    state = build_balance(st, result, het)
    _, se = st.arrays()
    for m, s in zip(state.studies, se):
        assert m.hole_len**2 + 1.0 / (s**2 + het.tau2) == pytest.approx(
            1.0 / s**2, abs=1e-12)


def test_mass_ranking_matches_weight_sort_oracle():
    st = simulate("eq3", 15, seed=52, mu=0.0, tau2=0.15)
    result, het = fit_model(st, "re_additive_dl")
    state = build_balance(st, result, het)
    _, se = st.arrays()
    oracle_order = np.argsort([1.0 / (s**2 + het.tau2) for s in se])
    model_order = np.argsort([m.mass_pct for m in state.studies])
    assert list(oracle_order) == list(model_order)


def test_mass_percentages_sum_to_100():
    for model in ("fixed", "re_additive_dl", "re_additive_pm",
                  "re_multiplicative", "egger"):
        st = simulate("eq10", 20, seed=53, mu=0.1, beta0=1.0, phi=1.2)
        state = balance_for(st, model)
        total = sum(m.mass_pct for m in state.studies if not m.excluded)
        assert total == pytest.approx(100.0, abs=1e-9)


def test_torque_residual_small_for_every_model():
    for model in ("fixed", "re_additive_dl", "re_additive_pm",
                  "re_multiplicative", "egger"):
        st = simulate("eq10", 17, seed=54, mu=-0.4, beta0=1.5, phi=0.8)
        state = balance_for(st, model)
        result, het = fit_model(st, model)
        y, se = st.arrays()
        scale = sum(abs(m.x_position) / s**2
                    for m, s in zip(state.studies, se))
        assert abs(state.torque_residual) <= 1e-8 * max(scale, 1e-300)


def test_egger_balance_uses_transformed_positions():
    st = simulate("eq10", 30, seed=55, mu=0.5, beta0=2.0, phi=1.1)
    fit, het = fit_model(st, "egger")
    state = build_balance(st, fit, het)
    y, se = st.arrays()
    for m, yi, si in zip(state.studies, y, se):
        assert m.x_position == pytest.approx(yi - fit.beta0_hat * si, rel=1e-12)
    assert state.pivot == fit.mu_hat
    assert state.stand[0] < fit.mu_hat < state.stand[1]


def test_excluded_studies_kept_grey_with_zero_mass():
    st = make_set([0.0, 0.5, 1.0, 1.5], [0.2, 0.3, 0.4, 0.5])
    st = st.excluding({"s2"})
    state = balance_for(st, "fixed")
    by_id = {m.id: m for m in state.studies}
    assert by_id["s2"].excluded
    assert by_id["s2"].mass_pct == 0.0
    assert by_id["s2"].x_position == 1.0
    assert sum(m.mass_pct for m in state.studies if not m.excluded) == \
        pytest.approx(100.0, abs=1e-9)


def test_ghost_carries_previous_pivot_exactly():
    st = make_set([0.0, 0.5, 1.0, 1.5], [0.2, 0.3, 0.4, 0.5])
    result, het = fit_model(st, "fixed")
    before = build_balance(st, result, het)
    reduced = st.excluding({"s3"})
    result2, het2 = fit_model(reduced, "fixed")
    after = build_balance(reduced, result2, het2, ghost=before)
    assert after.ghost.pivot == before.pivot
    assert after.pivot != before.pivot


def test_stand_width_ratio_is_sqrt_phi():
    st = simulate("eq4", 25, seed=56, mu=0.3, phi=2.5)
    fe, fe_het = fit_model(st, "fixed")
    mult, mult_het = fit_model(st, "re_multiplicative")
    s_fixed = build_balance(st, fe, fe_het)
    s_mult = build_balance(st, mult, mult_het)
    width_fixed = s_fixed.stand[1] - s_fixed.stand[0]
    width_mult = s_mult.stand[1] - s_mult.stand[0]
    assert width_mult / width_fixed == pytest.approx(
        np.sqrt(mult_het.phi), abs=1e-10)
    assert s_mult.pivot == s_fixed.pivot


def test_build_balance_rejects_foreign_result():
    a = simulate("eq1", 10, seed=57)
    b = simulate("eq1", 10, seed=58)
    result, het = fit_model(a, "fixed")
    with pytest.raises(ContractError):
        build_balance(b, result, het)


def test_leave_one_out_two_identical_studies():
    st = make_set([0.4, 0.4], [0.3, 0.3])
    entries = leave_one_out(st, "fixed")
    assert [e.excluded_id for e in entries] == ["s0", "s1"]
    for e in entries:
        assert e.error is None
        assert e.result.mu_hat == pytest.approx(0.4, abs=1e-15)
        assert e.result.se_mu == pytest.approx(0.3, abs=1e-15)


def test_leave_one_out_negligible_weight_barely_moves_estimate():
    st = make_set([0.0, 1.0, 5.0], [0.1, 0.2, 1e6])
    full, _ = fit_model(st, "fixed")
    entries = leave_one_out(st, "fixed")
    moved = next(e for e in entries if e.excluded_id == "s2")
    assert abs(moved.result.mu_hat - full.mu_hat) < 1e-9


def test_leave_one_out_outlier_drop_matches_exhaustive_oracle():
    # 7 consistent studies plus one planted outlier
    ys = [0.10, 0.05, 0.12, 0.08, 0.11, 0.07, 0.09, 2.50]
    ses = [0.10, 0.12, 0.11, 0.09, 0.10, 0.13, 0.12, 0.30]
    st = make_set(ys, ses)
    entries = leave_one_out(st, "re_additive_dl")
    tau2s = {e.excluded_id: e.heterogeneity.tau2 for e in entries}
    assert min(tau2s, key=tau2s.get) == "s7"
    # exhaustive-exclusion oracle agrees entry by entry
    for i in range(8):
        rest_y = [y for j, y in enumerate(ys) if j != i]
        rest_s = [s for j, s in enumerate(ses) if j != i]
        assert tau2s[f"s{i}"] == pytest.approx(dl_oracle(rest_y, rest_s)["tau2"],
                                               rel=1e-10, abs=1e-12)


def test_leave_one_out_flags_too_small_refits():
    st = make_set([0.1, 0.9], [0.2, 0.4])
    entries = leave_one_out(st, "re_additive_pm")
    assert all(e.result is None and "at least 2" in e.error for e in entries)


def test_leave_one_out_egger_needs_four():
    st = simulate("eq10", 3, seed=59, beta0=1.0)
    with pytest.raises(DomainError, match="at least 4"):
        leave_one_out(st, "egger")


def test_leave_one_out_entries_match_full_pipeline_refits():
    st = simulate("eq3", 9, seed=60, mu=0.2, tau2=0.1)
    entries = leave_one_out(st, "re_additive_pm")
    for e in entries:
        sub = st.excluding({e.excluded_id})
        result, het = fit_model(sub, "re_additive_pm")
        assert e.result == result
        assert e.heterogeneity == het
