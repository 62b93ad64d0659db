import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loewner.errors import CertificationError, ConfigError, PreconditionError
from loewner.expr import parse_expr
from loewner.fields import (
    HerglotzField,
    SampledFunction,
    bp_data_in_time,
    certify,
    field_eval,
    herglotz_bound_check,
    lie_bracket,
    make_field,
    recover_g,
    splitting_residual,
)
from loewner.holo import polar_grid

GRID = polar_grid()
PARABOLIC = {"kind": "general", "expr": "(1+i*t)*(z-1)^2"}
ELLIPTIC = {"kind": "general", "expr": "-(t*(1+i)+1)*z*(2+z)"}
PIECEWISE = {"kind": "piecewise", "pieces": [{"start": 0, "expr": "-z"},
                                             {"start": 1, "expr": "-z*(2+z)"}]}


@pytest.fixture(scope="module")
def fields():
    return {
        "parabolic": make_field(PARABOLIC),
        "elliptic": make_field(ELLIPTIC),
        "piecewise": make_field(PIECEWISE),
        "linear": make_field({"kind": "autonomous", "expr": "-z"}),
        "split": make_field({"kind": "splitting", "g": "1+i*t", "base": "(z-1)^2"}),
    }


def test_make_field_kinds(fields):
    assert fields["linear"].kind == "autonomous"
    assert fields["linear"](0.5, 7.0) == -0.5
    assert fields["piecewise"].breakpoints == (1.0,)
    assert fields["parabolic"].kind == "general"


def test_make_field_table_factor():
    F = make_field({"kind": "splitting", "g": {"times": [0, 1, 2], "values": [1, [1, 1], 3]},
                    "base": "(z-1)^2"})
    assert F.time_factor(0.5) == pytest.approx(1 + 0.5j)
    assert F(0.0, 2.0) == pytest.approx(3)


def test_certification_reports_time_and_point():
    with pytest.raises(CertificationError) as exc:
        make_field({"kind": "general", "expr": "(1-2*t)*(-z)"})
    assert exc.value.t is not None and 0.5 < exc.value.t <= 2
    with pytest.raises(CertificationError):
        make_field({"kind": "splitting", "g": "1-2*t", "base": "-z"})
    with pytest.raises(CertificationError):
        make_field({"kind": "piecewise", "pieces": [{"start": 0, "expr": "-z", "scale": -1}]})


def test_splitting_with_group_base_allows_sign_flips():
    F = make_field({"kind": "splitting", "g": "1-2*t", "base": "1-z^2", "horizon": 1})
    assert F(0.0, 1.0) == pytest.approx(-1)


def test_config_errors():
    for bad in ({}, {"kind": "nope"}, {"kind": "general"},
                {"kind": "piecewise", "pieces": [{"expr": "-z"}]}):
        with pytest.raises(ConfigError):
            make_field(bad)


def test_piecewise_validation():
    with pytest.raises(ValueError):
        HerglotzField.piecewise([(0.5, "-z")])
    with pytest.raises(ValueError):
        HerglotzField.general("z*t", breakpoints=(2, 1))


def test_field_eval_examples(fields):
    split = fields["split"]
    assert field_eval(split, 0, 1) == pytest.approx(1 + 1j)
    pw = fields["piecewise"]
    assert field_eval(pw, 0.5, 0.5) == pytest.approx(-0.5)
    assert field_eval(pw, 0.5, 1.0) == pytest.approx(-1.25)
    assert field_eval(pw, 0.5, 1.0, side="left") == pytest.approx(-0.5)
    with pytest.raises(PreconditionError):
        field_eval(pw, 0.5, -1)


def test_lie_bracket_examples():
    X, Y = parse_expr("-z"), parse_expr("-z*(2+z)")
    assert lie_bracket(X, X, 0.3) == pytest.approx(0, abs=1e-14)
    assert lie_bracket(X, Y, 0.5) == pytest.approx(-0.25, abs=1e-12)
    np.testing.assert_allclose(lie_bracket(X, Y, GRID), -GRID**2, atol=1e-12)
    P, Q = parse_expr("(z-1)^2"), parse_expr("3*(z-1)^2")
    assert np.max(np.abs(lie_bracket(P, Q, GRID))) <= 1e-12


def test_splitting_residual_examples(fields):
    res, ok = splitting_residual(fields["linear"], [0, 1])
    assert res == 0 and ok
    res, ok = splitting_residual(fields["parabolic"], [0, 0.5, 1, 2])
    assert res <= 1e-9 and ok
    res, ok = splitting_residual(fields["piecewise"], [0.5, 1.5])
    assert res >= 0.1 and not ok
    with pytest.raises(PreconditionError):
        splitting_residual(fields["linear"], [0])


@given(st.floats(0, 2 * np.pi))
def test_splitting_residual_is_rotation_invariant(theta):
    c = complex(np.cos(theta), np.sin(theta))
    F = HerglotzField.general("-z*(1+t*z/2)")
    G = HerglotzField.general(f"({c.real!r}+({c.imag!r})*i)*(-z*(1+t*z/2))")
    r1, v1 = splitting_residual(F, [0, 1])
    r2, v2 = splitting_residual(G, [0, 1])
    assert v1 == v2
    assert abs(r1 - r2) <= 1e-12


def test_recover_g_examples(fields):
    ts = [0, 0.5, 1, 2]
    for tf in recover_g(fields["parabolic"], parse_expr("(z-1)^2"), time_samples=ts):
        assert abs(tf.g - (1 + 1j * tf.t)) <= 1e-9 and tf.dispersion <= 1e-9
    for tf in recover_g(fields["elliptic"], parse_expr("-z*(2+z)"), time_samples=ts):
        assert abs(tf.g - (tf.t * (1 + 1j) + 1)) <= 1e-9
    for tf in recover_g(fields["linear"], time_samples=ts):
        assert tf.g == pytest.approx(1)
    with pytest.raises(PreconditionError):
        recover_g(fields["piecewise"], time_samples=[1.5])


def test_bp_data_in_time(fields):
    d = bp_data_in_time(fields["parabolic"], 2.0)
    assert abs(d.tau - 1) <= 1e-8
    np.testing.assert_allclose(d.p(GRID), 1 + 2j, atol=1e-9)
    for t in (0.0, 0.7, 3.0):
        assert abs(bp_data_in_time(fields["elliptic"], t).tau) <= 1e-12
    G = make_field({"kind": "autonomous", "expr": "1-z^2"})
    assert abs(bp_data_in_time(G, 5.0).tau - 1) <= 1e-8


def test_herglotz_bound_examples(fields):
    assert herglotz_bound_check(fields["linear"], 0.9, 1.0) == pytest.approx(0.9)
    assert herglotz_bound_check(fields["parabolic"], 0.9, 1.0) == pytest.approx(
        np.sqrt(2) * 1.9**2, rel=1e-12)
    assert herglotz_bound_check(fields["piecewise"], 0.5, 2.0) == pytest.approx(1.25)


def test_frozen_matches_call(fields):
    for F in fields.values():
        for t in (0.0, 0.99, 1.0, 1.7):
            np.testing.assert_allclose(F.frozen(t)(GRID), F(GRID, t), atol=1e-15)


def test_sampled_function():
    g = SampledFunction([0, 1], [0, 2j])
    assert g(0.25) == 0.5j
    with pytest.raises(ValueError):
        SampledFunction([0, 0], [1, 1])


def test_certify_returns_field(fields):
    assert certify(fields["parabolic"], horizon=1.0) is fields["parabolic"]
