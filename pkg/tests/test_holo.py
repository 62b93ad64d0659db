import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from loewner.errors import ConvergenceError, DomainError, EvaluationError
from loewner.expr import parse_expr
from loewner.holo import (
    Path,
    as_boundary_point,
    as_disc_point,
    cayley,
    derivative,
    invert_at,
    path_integral,
    poincare_distance,
    polar_grid,
    segment_integral,
)
from oracles import diff, evaluate

GRID = polar_grid()

ORACLE_EXPRS = [
    "-z*(2+z)",
    "(z-1)^2",
    "1-z^2",
    "exp(z)*sin(2*z)",
    "z/(1-z)",
    "log(2+z) - sqrt(3-z)",
    "(1+z)/(1-z) + 1",
    "cos(z)^3/(z+4)",
    "(2+z)^(0.5+i)",
]


@pytest.mark.parametrize("src", ORACLE_EXPRS)
def test_derivative_matches_symbolic_oracle(src):
    f = parse_expr(src)
    got = derivative(f, GRID)
    want = evaluate(diff(f.ast), GRID)
    scale = np.maximum(1.0, np.abs(want))
    assert np.max(np.abs(got - want) / scale) <= 1e-9


@pytest.mark.parametrize("src,z,order,expected", [
    ("z^2", 0.3, 1, 0.6),
    ("-z*(2+z)", 0, 1, -2),
    ("exp(z)", 0, 3, 1),
    ("z^3", 0.5j, 2, 3j),
])
def test_derivative_examples(src, z, order, expected):
    assert abs(derivative(parse_expr(src), z, order) - expected) <= 1e-10


def test_higher_derivatives_match_oracle():
    f = parse_expr("exp(z)*(z-1)^2")
    d2 = diff(diff(f.ast))
    d3 = diff(d2)
    np.testing.assert_allclose(derivative(f, GRID, 2), evaluate(d2, GRID), rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(derivative(f, GRID, 3), evaluate(d3, GRID), rtol=1e-9, atol=1e-9)


def test_derivative_with_time_argument():
    f = parse_expr("(1+i*t)*(z-1)^2", arity=2)
    assert derivative(f, 0.0, 1, t=1.0) == pytest.approx(-2 * (1 + 1j))


def test_derivative_contour_through_singularity():
    with pytest.raises(DomainError):
        derivative(parse_expr("1/(z-0.1)"), 0.0)  # pole on a contour node
    with pytest.raises(ValueError):
        derivative(parse_expr("z"), 0.1, 4)


@pytest.mark.parametrize("src,path,expected", [
    ("1", Path.radial(0.5), 0.5),
    ("1/(z-1)^2", Path.radial(0.5), 1.0),
    ("1/z", Path.circle(0, 0.5), 2j * np.pi),
    ("z^2", Path.polyline([0, 0.5, 0.5 + 0.5j]), (0.5 + 0.5j) ** 3 / 3),
])
def test_path_integral_examples(src, path, expected):
    assert abs(path_integral(parse_expr(src), path) - expected) <= 1e-12


def test_path_validation():
    with pytest.raises(ValueError):
        Path.radial(0.5, samples=8)
    with pytest.raises(ValueError):
        Path("spiral")
    with pytest.raises(ValueError):
        Path.circle(0, -1)


def test_quadrature_reports_singularity():
    with pytest.raises((ConvergenceError, EvaluationError)):
        path_integral(parse_expr("1/(z-0.25)^2"), Path.radial(0.5))


def test_segment_integral_is_vectorized():
    b = np.array([0.1, 0.5j, -0.7 + 0.2j])
    got = segment_integral(parse_expr("exp(z)"), 0.0, b)
    np.testing.assert_allclose(got, np.exp(b) - 1, rtol=1e-13)


disc_point = st.builds(
    lambda r, a: r * np.exp(1j * a), st.floats(0, 0.95), st.floats(0, 2 * np.pi)
)


@given(st.lists(disc_point, min_size=3, max_size=6))
def test_cauchy_theorem_on_closed_polylines(vertices):
    f = parse_expr("exp(z)/(2-z) + z^5")
    loop = Path.polyline(list(vertices) + [vertices[0]])
    assert abs(path_integral(f, loop)) <= 1e-10


@given(disc_point)
def test_invert_then_evaluate_is_identity(z):
    f = parse_expr("2*z/(2+z)")
    w = f(z)
    z_back = invert_at(f, w, 0.0)
    assert abs(z_back - z) <= 1e-10


@pytest.mark.parametrize("src,w,expected", [
    ("z", 0.3 + 0.1j, 0.3 + 0.1j),
    ("z/(1-z)", 1.0, 0.5),
    ("2*z/(2+z)", 0.4 - 0.1j, 2 * (0.4 - 0.1j) / (2 - (0.4 - 0.1j))),
])
def test_invert_examples(src, w, expected):
    assert abs(invert_at(parse_expr(src), w, 0.0) - expected) <= 1e-12


def test_invert_failure_modes():
    f = parse_expr("z/(1-z)")
    with pytest.raises(ConvergenceError):
        invert_at(f, -0.75, 0.0)  # h(D) is Re w > -1/2
    z, ok = invert_at(f, np.array([1.0, -0.75]), 0.0, return_mask=True)
    assert ok.tolist() == [True, False]
    assert abs(z[0] - 0.5) < 1e-12
    with pytest.raises(DomainError):
        invert_at(f, 1.0, 1.5)


def test_poincare_examples():
    assert poincare_distance(0.3j, 0.3j) == 0
    assert poincare_distance(0, 0.5) == pytest.approx(0.5493061443340549)
    assert poincare_distance(0.2j, -0.3) == pytest.approx(poincare_distance(-0.3, 0.2j), abs=1e-15)


@given(disc_point, disc_point, disc_point)
def test_poincare_triangle_inequality(a, b, c):
    assert poincare_distance(a, c) <= poincare_distance(a, b) + poincare_distance(b, c) + 1e-12


@given(disc_point, disc_point, st.floats(0, 2 * np.pi), disc_point)
def test_poincare_invariant_under_automorphisms(z, w, theta, a):
    assume(abs(a) < 0.9)

    def m(x):
        return np.exp(1j * theta) * (x - a) / (1 - np.conj(a) * x)

    assert poincare_distance(m(z), m(w)) == pytest.approx(poincare_distance(z, w), abs=1e-8)


def test_cayley():
    assert cayley(1, 0) == 1
    assert cayley(1, 0.5) == pytest.approx(3)
    assert np.all(np.real(cayley(1j, polar_grid([0.9]))) > 0)
    with pytest.raises(EvaluationError):
        cayley(1, 1)


def test_point_validation():
    assert as_disc_point(0.5j) == 0.5j
    with pytest.raises(DomainError):
        as_disc_point(1.0)
    with pytest.raises(DomainError):
        as_disc_point(complex("nan"))
    assert as_boundary_point(1j) == 1j
    with pytest.raises(DomainError):
        as_boundary_point(0.99)


def test_polar_grid_shape():
    assert GRID.shape == (144,)
    assert np.max(np.abs(GRID)) == pytest.approx(0.9)
