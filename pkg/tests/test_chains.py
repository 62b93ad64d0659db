import csv

import numpy as np
import pytest

from loewner.chains import (
    TimeChange,
    affine_chain,
    chain_compat_report,
    chain_pde_report,
    chain_univalence,
    decreasing_chain,
    range_inclusion_report,
    write_chain_csv,
)
from loewner.errors import ConvergenceError, PreconditionError
from loewner.evolution import evolve, family
from loewner.fields import HerglotzField, SampledFunction, make_field
from loewner.holo import polar_grid

GRID = polar_grid()
SMALL = polar_grid([0.3, 0.6, 0.9], 8)
PARABOLIC = {"kind": "general", "expr": "(1+i*t)*(z-1)^2"}
ELLIPTIC = {"kind": "general", "expr": "-(t*(1+i)+1)*z*(2+z)"}


@pytest.fixture(scope="module")
def parabolic():
    F = make_field(PARABOLIC)
    return F, affine_chain(F), family(F)


@pytest.fixture(scope="module")
def elliptic():
    F = make_field(ELLIPTIC)
    return F, affine_chain(F), family(F)


def test_time_change():
    lam = TimeChange(lambda t: 1 + 1j * t)
    assert lam(2.0) == pytest.approx(2 + 2j, abs=1e-14)
    step = TimeChange(SampledFunction([0, 1, 1 + 1e-9, 3], [1, 1, 3, 3]), breakpoints=(1.0,))
    assert step(2.0) == pytest.approx(4, abs=1e-8)
    with pytest.raises(PreconditionError):
        lam(-1.0)


def test_boundary_chain_closed_form(parabolic):
    _, chain, _ = parabolic
    assert chain.case == "boundary"
    for s in (0.0, 0.6, 1.7):
        want = GRID / (1 - GRID) - (s + 0.5j * s**2)
        np.testing.assert_allclose(chain(s, GRID), want, atol=1e-8)


def test_elliptic_chain_closed_form(elliptic):
    _, chain, _ = elliptic
    assert chain.case == "elliptic"
    for s in (0.0, 0.6, 1.7):
        lam = s + (1 + 1j) * s**2 / 2
        np.testing.assert_allclose(chain(s, GRID), np.exp(2 * lam) * 2 * GRID / (GRID + 2),
                                   rtol=1e-8, atol=1e-9)


def test_autonomous_chain():
    chain = affine_chain("-z")
    np.testing.assert_allclose(chain(1.5, SMALL), np.exp(1.5) * SMALL, atol=1e-10)


def test_compat_and_pde(parabolic, elliptic):
    pairs = [(0, 1), (0.5, 2), (0.3, 0.31)]
    for F, chain, fam in (parabolic, elliptic):
        rep = chain_compat_report(chain, fam, pairs, SMALL)
        assert rep.verdict, rep.summary()
        rep = chain_pde_report(chain, F, [0.3, 1.2, 1.9], SMALL)
        assert rep.verdict, rep.summary()
    with pytest.raises(PreconditionError):
        chain_pde_report(parabolic[1], parabolic[0], [1e-5], SMALL)
    with pytest.raises(PreconditionError):
        chain_compat_report(parabolic[1], parabolic[2], [(1, 0)], SMALL)


def test_family_map_matches_evolution(parabolic, elliptic):
    for _, chain, fam in (parabolic, elliptic):
        for s, t in ((0, 1), (0.5, 2)):
            got = chain.family_map(s, t, SMALL)
            assert np.max(np.abs(got - evolve(fam, s, t, SMALL))) <= 1e-6
    _, chain, _ = parabolic
    z = 0.2 - 0.1j
    assert abs(chain.inverse(1.0, chain(1.0, z), 0.0) - z) <= 1e-10


def test_range_inclusion_linear():
    chain = affine_chain("-z")
    rep = range_inclusion_report(chain, [(0, 1)])
    assert rep.verdict and rep.sup_residual == 0
    w = chain.family_map(0, 1, np.array([0.999]))
    assert abs(w[0] - 0.999 * np.exp(-1)) <= 1e-10


def test_range_inclusion_splitting(parabolic, elliptic):
    for _, chain, _ in (parabolic, elliptic):
        assert range_inclusion_report(chain, [(0, 1), (0.5, 2)]).verdict


def test_decreasing_chain_is_rejected():
    bad = decreasing_chain("(z-1)^2")
    rep = range_inclusion_report(bad, [(0, 1)])
    assert not rep.verdict and rep.sup_residual > 0
    with pytest.raises(ConvergenceError):
        bad.family_map(0, 1, np.array([0.999 * np.exp(2.5j)]))
    with pytest.raises(PreconditionError):
        decreasing_chain("-z")


def test_nonsplitting_field_rejected():
    F = make_field({"kind": "piecewise", "pieces": [{"start": 0, "expr": "-z"},
                                                    {"start": 1, "expr": "-z*(2+z)"}]})
    with pytest.raises(PreconditionError):
        affine_chain(F)


def test_splitting_kind_used_directly():
    F = HerglotzField.splitting("1+t", "(z-1)^2")
    chain = affine_chain(F)
    np.testing.assert_allclose(chain(2.0, SMALL), SMALL / (1 - SMALL) - 4, atol=1e-9)


def test_chain_univalence(elliptic):
    assert chain_univalence(elliptic[1], 1.0, SMALL) > 1e-6


def test_chain_csv(parabolic, tmp_path):
    path = tmp_path / "chain.csv"
    write_chain_csv(parabolic[1], [0.0, 1.0], [0.5, 0.5j], path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["s", "re_z", "im_z", "re_f", "im_f"]
    assert len(rows) == 1 + 4
    assert float(rows[3][3]) == pytest.approx(0.5 / 0.5 - 1, abs=1e-9)
    assert float(rows[3][4]) == pytest.approx(-0.5, abs=1e-9)
