import csv
import io
import itertools
import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simpsons.paradox_bn import (
    MAX_JOINT_N,
    ParadoxBnSpec,
    RegimeWarning,
    SpecError,
    build_npt,
    case1_recovery,
    case2_recovery,
    certify_reversal,
    drug_probability,
    exact_joint,
    joint_query,
    posterior_xn,
    regime_warnings,
    validate,
)

DEFAULTS = ParadoxBnSpec()

# n = 3 table as published: columns run Drug (outer), X3, X2, X1 (inner);
# first value row is Recovered = False, second Recovered = True.
PUBLISHED_N3 = {
    "False": [0.48] * 4 + [0.1] * 4 + [0.52] * 4 + [0.2] * 4,
    "True": [0.52] * 4 + [0.9] * 4 + [0.48] * 4 + [0.8] * 4,
}


def test_defaults():
    s = DEFAULTS
    assert (s.p1, s.p2, s.p3, s.p4, s.p, s.q, s.prior_xn) == (0.52, 0.9, 0.48, 0.8, 0.999, 0.001, 0.5)
    assert s.priors_x == (0.5, 0.5)


@pytest.mark.parametrize("field, value", [("p1", 1.2), ("q", -0.1), ("prior_xn", float("nan")), ("p", "x")])
def test_spec_rejects_bad_probability(field, value):
    with pytest.raises(SpecError) as info:
        ParadoxBnSpec(**{field: value})
    assert info.value.field == field


def test_spec_rejects_bad_n_and_priors():
    with pytest.raises(SpecError, match="n"):
        ParadoxBnSpec(n=0)
    with pytest.raises(SpecError, match="priors_x"):
        ParadoxBnSpec(n=3, priors_x=[0.5])
    with pytest.raises(SpecError, match=r"priors_x\[1\]"):
        ParadoxBnSpec(n=3, priors_x=[0.5, 2.0])


def test_spec_json_round_trip(tmp_path):
    s = ParadoxBnSpec(n=4, p=0.97, priors_x=[0.1, 0.2, 0.3])
    doc = json.loads(s.to_json())
    assert set(doc) == {"n", "p1", "p2", "p3", "p4", "p", "q", "prior_xn", "priors_x"}
    assert ParadoxBnSpec.from_json(s.to_json()) == s
    s.save(tmp_path / "spec.json")
    assert ParadoxBnSpec.load(tmp_path / "spec.json") == s
    with pytest.raises(SpecError, match="bogus"):
        ParadoxBnSpec.from_dict({"bogus": 1})


def test_fingerprint_tracks_content():
    assert ParadoxBnSpec().fingerprint() == ParadoxBnSpec().fingerprint()
    assert ParadoxBnSpec().fingerprint() != ParadoxBnSpec(q=0.002).fingerprint()


def test_regime_warnings():
    assert regime_warnings(DEFAULTS) == []
    with pytest.warns(RegimeWarning):
        validate(ParadoxBnSpec(p=0.5, q=0.5))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        validate(DEFAULTS)


# --- NPT --------------------------------------------------------------------


def test_npt_n3_matches_published_table():
    rows = list(csv.reader(io.StringIO(build_npt(ParadoxBnSpec(n=3)).to_csv())))
    assert rows[0] == ["Drug taken"] + ["False"] * 8 + ["True"] * 8
    assert rows[1] == ["X3"] + (["False"] * 4 + ["True"] * 4) * 2
    assert rows[2] == ["X2"] + (["False"] * 2 + ["True"] * 2) * 4
    assert rows[3] == ["X1"] + ["False", "True"] * 8
    for label, values in PUBLISHED_N3.items():
        row = next(r for r in rows[4:] if r[0] == label)
        assert [float(v) for v in row[1:]] == pytest.approx(values, abs=1e-12)


def test_npt_dense_is_constant_over_leading_parents():
    arr = build_npt(ParadoxBnSpec(n=3)).array()
    assert arr.shape == (2, 2, 2, 2)
    for x1, x2 in itertools.product((0, 1), repeat=2):
        np.testing.assert_array_equal(arr[x1, x2], [[0.52, 0.48], [0.9, 0.8]])


def test_npt_n1_and_uniform():
    assert build_npt(ParadoxBnSpec(n=1)).array().shape == (2, 2)
    uniform = ParadoxBnSpec(p1=0.5, p2=0.5, p3=0.5, p4=0.5)
    assert np.all(build_npt(uniform).array() == 0.5)


# --- inference --------------------------------------------------------------


@pytest.mark.parametrize(
    "xn, d, expected",
    [(True, True, 0.8), (True, False, 0.9), (False, True, 0.48), (False, False, 0.52)],
)
def test_case1(xn, d, expected):
    assert case1_recovery(DEFAULTS, xn, d) == expected


def test_case2_defaults_frozen_from_joint():
    # frozen from the joint-enumeration oracle below; closed form 0.999*0.8 + 0.001*0.48 etc.
    joint = exact_joint(ParadoxBnSpec(n=1))
    drug = joint_query(joint, {2: 1}, {1: 1})
    placebo = joint_query(joint, {2: 1}, {1: 0})
    assert drug == pytest.approx(0.79968, abs=1e-12)
    assert placebo == pytest.approx(0.52038, abs=1e-12)
    assert case2_recovery(DEFAULTS, True) == pytest.approx(0.79968, abs=1e-12)
    assert case2_recovery(DEFAULTS, False) == pytest.approx(0.52038, abs=1e-12)
    assert DEFAULTS.p3 < case2_recovery(DEFAULTS, True) < 0.8
    assert 0.52 < case2_recovery(DEFAULTS, False) < DEFAULTS.p2


def test_case2_independent_drug_keeps_prior():
    s = ParadoxBnSpec(p=0.5, q=0.5, prior_xn=0.5)
    assert case2_recovery(s, True) == pytest.approx((s.p3 + s.p4) / 2, abs=1e-15)
    assert case2_recovery(s, False) == pytest.approx((s.p1 + s.p2) / 2, abs=1e-15)


def test_case2_zero_probability_condition():
    s = ParadoxBnSpec(p=1.0, q=1.0)
    assert drug_probability(s, False) == 0.0
    with pytest.raises(ZeroDivisionError):
        case2_recovery(s, False)


def test_posterior_defaults():
    assert posterior_xn(DEFAULTS, True) == pytest.approx(0.999, abs=1e-15)
    assert posterior_xn(DEFAULTS, False) == pytest.approx(0.001, abs=1e-15)


# --- certificate ------------------------------------------------------------


def test_certificate_defaults():
    cert = certify_reversal(DEFAULTS)
    assert cert.stratified_drug_worse and cert.hidden_drug_better and cert.paradox
    assert (cert.case2_drug_rate, cert.case2_placebo_rate) == pytest.approx((0.79968, 0.52038), abs=1e-12)


def test_certificate_independent_drug_breaks_paradox():
    cert = certify_reversal(ParadoxBnSpec(p=0.3, q=0.3))
    assert cert.case2_drug_rate == pytest.approx(0.64) and cert.case2_placebo_rate == pytest.approx(0.71)
    assert cert.stratified_drug_worse and not cert.hidden_drug_better and not cert.paradox


def test_certificate_no_stratified_effect():
    cert = certify_reversal(ParadoxBnSpec(p3=0.52, p4=0.9))
    assert not cert.stratified_drug_worse and not cert.paradox


@pytest.mark.parametrize("n", range(1, 9))
def test_certificate_any_n(n):
    assert certify_reversal(ParadoxBnSpec(n=n)).paradox


# --- joint ------------------------------------------------------------------


def test_joint_chain_rule_cell():
    joint = exact_joint(ParadoxBnSpec(n=1))
    assert joint[1, 1, 1] == pytest.approx(0.5 * 0.999 * 0.8, abs=1e-15)
    assert joint[1, 1, 1] == pytest.approx(0.3996, abs=1e-15)


def test_joint_certain_recovery():
    joint = exact_joint(ParadoxBnSpec(n=2, p1=1, p2=1, p3=1, p4=1))
    assert joint[..., 1].sum() == pytest.approx(1.0, abs=1e-12)


def test_joint_cap():
    with pytest.raises(ValueError, match="cap"):
        exact_joint(ParadoxBnSpec(n=MAX_JOINT_N + 1))


probs = st.floats(0.0, 1.0, allow_nan=False)
open_probs = st.floats(0.01, 0.99, allow_nan=False)


@st.composite
def specs(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    return ParadoxBnSpec(
        n=n,
        p1=draw(probs), p2=draw(probs), p3=draw(probs), p4=draw(probs),
        p=draw(open_probs), q=draw(open_probs), prior_xn=draw(open_probs),
        priors_x=draw(st.lists(open_probs, min_size=n - 1, max_size=n - 1)),
    )


@given(specs(max_n=6))
@settings(max_examples=60, deadline=None)
def test_joint_normalized(spec):
    assert exact_joint(spec).sum() == pytest.approx(1.0, abs=1e-12)


@given(specs(max_n=5), st.data())
@settings(max_examples=60, deadline=None)
def test_leading_parents_irrelevant(spec, data):
    joint = exact_joint(spec)
    n = spec.n
    xs = data.draw(st.lists(st.integers(0, 1), min_size=n - 1, max_size=n - 1))
    for xn, d in itertools.product((0, 1), repeat=2):
        evidence = {i: v for i, v in enumerate(xs)}
        evidence.update({n - 1: xn, n: d})
        assert joint_query(joint, {n + 1: 1}, evidence) == pytest.approx(
            case1_recovery(spec, bool(xn), bool(d)), abs=1e-12
        )


def test_priors_cannot_change_certificate():
    a = certify_reversal(ParadoxBnSpec(n=4))
    b = certify_reversal(ParadoxBnSpec(n=4, priors_x=[0.01, 0.7, 0.99]))
    assert a == b
