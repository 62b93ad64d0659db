"""Affine Loewner chains of splitting fields.

For ``G(z, t) = g(t) G0(z)`` with Koenigs map ``h`` of ``G0`` and
``lam(s) = int_0^s g``:

    elliptic   f_s(z) = exp(-beta lam(s)) h(z),   beta = G0'(tau)
    boundary   f_s(z) = h(z) - lam(s)

``lam`` may be complex.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, LoewnerError, PreconditionError
from .evolution import _avoid_breakpoints, _grid, _worst, evolve
from .fields import HerglotzField, recover_g, splitting_residual
from .generators import GeneratorSpec, KoenigsMap, generator_spec, is_zero_field
from .holo import adaptive_quad, circle_points, derivative, invert_at
from .reports import PropertyReport

INCLUSION_MARGIN = 1e-9 + 1e-8
CONTINUATION_STEPS = 8


class TimeChange:
    """``lam(s) = int_0^s g``, by Gauss-Legendre quadrature split at breakpoints."""

    def __init__(self, g, breakpoints=()):
        self.g = g
        self.breakpoints = tuple(breakpoints)

    def _piece(self, a, b):
        def curve(x):
            return x[None, :], np.ones((1, x.size))

        f = lambda t: np.asarray(self.g(t.real), dtype=complex)  # noqa: E731
        return complex(adaptive_quad(f, curve, a, b, atol=1e-15)[0])

    def __call__(self, s):
        s = float(s)
        if s < 0:
            raise PreconditionError("time change evaluated at negative time")
        cuts = [0.0] + [b for b in self.breakpoints if 0 < b < s] + [s]
        return sum((self._piece(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a), 0j)


@dataclass(frozen=True)
class LoewnerChainHandle:
    case: str
    h: KoenigsMap
    lam: Callable
    base: GeneratorSpec
    field: HerglotzField

    def _factor(self, s):
        return np.exp(-self.base.spectral * self.lam(s))

    def f(self, s, z):
        hz = self.h(z)
        if self.case == "elliptic":
            return self._factor(s) * hz
        return hz - self.lam(s)

    def __call__(self, s, z):
        return self.f(s, z)

    def derivative(self, s, z):
        return derivative(lambda x: self.f(s, x), z)

    def inverse(self, t, x, seed):
        """``f_t^{-1}(x)`` by Newton from ``seed``."""
        return self.h.inverse(self._unshift(t, x), seed)

    def _unshift(self, t, x):
        if self.case == "elliptic":
            return x / self._factor(t)
        return x + self.lam(t)

    def family_map(self, s, t, z, steps=CONTINUATION_STEPS):
        """``f_t^{-1}(f_s(z))``; raises when the continuation leaves the disc."""
        w, ok = self._transport(s, t, z, steps)
        if not ok.all():
            k = int(np.flatnonzero(~ok)[0])
            raise ConvergenceError(f"f_t^-1 o f_s undefined near z={np.ravel(z)[k]:.6g}")
        return complex(w[0]) if np.ndim(z) == 0 else w.reshape(np.shape(z))

    def _transport(self, s, t, z, steps):
        # continue the Koenigs target from h(z) to its image along r in [0, 1]
        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        hz = self.h(z)
        d = self.lam(t) - self.lam(s)
        w = z.copy()
        ok = np.ones(z.shape, dtype=bool)
        for r in np.linspace(0.0, 1.0, steps + 1)[1:]:
            if self.case == "elliptic":
                target = np.exp(self.base.spectral * d * r) * hz
            else:
                target = hz + d * r
            idx = np.flatnonzero(ok)
            if idx.size == 0:
                break
            try:
                wn, conv = invert_at(self.h, target[idx], w[idx], fprime=self.h.prime,
                                     return_mask=True)
            except LoewnerError:
                wn, conv = self._one_by_one(target[idx], w[idx])
            w[idx] = wn
            ok[idx] = conv
        return w, ok

    def _one_by_one(self, target, seed):
        out, conv = seed.copy(), np.zeros(seed.shape, dtype=bool)
        for k in range(seed.size):
            try:
                out[k], conv[k] = invert_at(self.h, target[k:k + 1], seed[k:k + 1],
                                            fprime=self.h.prime, return_mask=True)
            except LoewnerError:
                conv[k] = False
        return out, conv


def _splitting_data(F, probe_times):
    if F.kind in ("autonomous", "splitting"):
        g = (lambda t: np.ones_like(np.asarray(t, dtype=complex))) if F.kind == "autonomous" else F.g
        return F.generator, g
    _, ok = splitting_residual(F, probe_times)
    if not ok:
        raise PreconditionError("field does not split: brackets of frozen fields do not vanish")
    t0 = next((t for t in probe_times if not is_zero_field(F.frozen(t))), None)
    if t0 is None:
        raise PreconditionError("field vanishes at every probe time")
    base = generator_spec(F.frozen(t0))

    def g(ts):
        ts = np.asarray(ts, dtype=float)
        vals = [tf.g for tf in recover_g(F, base, time_samples=ts.ravel())]
        return np.reshape(vals, ts.shape)

    return base, g


def affine_chain(F, probe_times=None):
    """Loewner chain of a splitting field, assembled from the base Koenigs map."""
    if not isinstance(F, HerglotzField):
        F = HerglotzField.autonomous(F)
    if probe_times is None:
        probe_times = sorted(set(np.linspace(0.0, 2.0, 9)) | set(
            b + d for b in F.breakpoints[:4] for d in (-0.25, 0.25) if b + d >= 0))
    base, g = _splitting_data(F, probe_times)
    h = base.koenigs_map
    res = h.residual(np.asarray(circle_points(0.8, 16)))
    if res > 1e-8:
        raise ConvergenceError(f"Koenigs residual {res:.3g} exceeds 1e-8")
    return LoewnerChainHandle(h.case, h, TimeChange(g, F.breakpoints), base, F)


# -- reports -------------------------------------------------------------------


def chain_compat_report(chain, fam, pairs, grid=None):
    """``f_t(phi_{s,t}(z)) = f_s(z)``."""
    z = _grid(grid)
    rep = PropertyReport("chain_compat", 1e-6)
    for s, t in pairs:
        if s > t:
            raise PreconditionError(f"need s <= t, got {(s, t)}")
        diff = chain.f(t, evolve(fam, s, t, z)) - chain.f(s, z)
        zw, r = _worst(diff, z)
        rep.add((s, t, zw), r)
    return rep


def chain_pde_report(chain, F, s_samples, grid=None, step=1e-4):
    """``d f_s/ds = -G(z, s) f_s'(z)``.

    ``d/ds`` is the five-point central difference with spacing ``step``; the
    elliptic chain grows like ``exp(-beta lam(s))``, which the two-point rule
    cannot follow to 1e-5 absolute.
    """
    z = _grid(grid)
    _avoid_breakpoints(F, s_samples, 2 * step, "s")
    rep = PropertyReport("chain_pde", 1e-5)
    for s in s_samples:
        if s - 2 * step < 0:
            raise PreconditionError(f"s={s} too close to 0 for the difference stencil")
        f = lambda k: chain.f(s + k * step, z)  # noqa: E731
        lhs = (f(-2) - 8 * f(-1) + 8 * f(1) - f(2)) / (12 * step)
        rhs = -F(z, s) * chain.derivative(s, z)
        zw, r = _worst(lhs - rhs, z)
        rep.add((s, zw), r)
    return rep


def range_inclusion_report(chain, pairs, boundary_samples=None):
    """``f_s(D) in f_t(D)``, tested as ``f_t^{-1} o f_s`` mapping a circle at 0.999 into D.

    Residual per pair is the excess of the largest image modulus over
    ``1 - 1.1e-8``; a failed inversion counts as residual 1.
    """
    zeta = circle_points(0.999, 64) if boundary_samples is None else np.asarray(boundary_samples)
    rep = PropertyReport("range_inclusion", 0.0)
    for s, t in pairs:
        if s > t:
            raise PreconditionError(f"need s <= t, got {(s, t)}")
        w, ok = chain._transport(s, t, zeta, CONTINUATION_STEPS)
        if not ok.all():
            k = int(np.flatnonzero(~ok)[0])
            rep.add((s, t, complex(zeta[k]), "inversion failed"), 1.0)
            continue
        mod = np.abs(w)
        k = int(np.argmax(mod))
        rep.add((s, t, complex(zeta[k])), max(0.0, float(mod[k]) - (1.0 - INCLUSION_MARGIN)))
    return rep


def chain_univalence(chain, s, grid=None):
    """Smallest pairwise distance between ``f_s`` images of grid points."""
    z = _grid(grid)
    img = np.asarray(chain.f(s, z))
    i, j = np.triu_indices(len(img), 1)
    return float(np.min(np.abs(img[i] - img[j])))


def write_chain_csv(chain, s_values, z, path):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "re_z", "im_z", "re_f", "im_f"])
        for s in s_values:
            vals = np.atleast_1d(chain.f(float(s), z))
            for zz, v in zip(z, vals):
                w.writerow([repr(float(s)), repr(float(zz.real)), repr(float(zz.imag)),
                            repr(float(v.real)), repr(float(v.imag))])


def decreasing_chain(base, rate=1.0):
    """Counterexample ``f_s = h - lam(s)`` with ``lam(s) = -rate * s``; not a Loewner chain."""
    base = base if isinstance(base, GeneratorSpec) else generator_spec(base)
    if base.interior:
        raise PreconditionError("decreasing_chain expects a boundary Denjoy-Wolff point")
    F = HerglotzField.autonomous(base)
    lam = TimeChange(lambda t: -rate * np.ones_like(np.asarray(t, dtype=complex)))
    return LoewnerChainHandle("boundary", base.koenigs_map, lam, base, F)

