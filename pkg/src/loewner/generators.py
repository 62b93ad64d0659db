"""Infinitesimal generators of holomorphic semigroups of the unit disc.

A generator ``G`` factors as ``G(z) = (z - tau)(conj(tau) z - 1) p(z)`` with
``Re p >= 0``.  ``tau`` is the Denjoy-Wolff point of the semigroup it
generates.  This module recovers that factorization numerically, classifies
the semigroup, builds its Koenigs linearization, and transports points along
the flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import expr as E
from .errors import (
    CertificationError,
    ConvergenceError,
    DomainError,
    EvaluationError,
    PreconditionError,
)
from .holo import (
    cauchy_derivative,
    circle_points,
    derivative,
    in_disc,
    invert_at,
    polar_grid,
    poincare_distance,
    segment_integral,
)

POSITIVITY_TOL = 1e-9
SCAN_RADIUS = 1.0 - 1e-6
SCAN_ANGLES = 4096
INTERIOR_MARGIN = 1e-6
SPECTRAL_TOL = 1e-6
BOUNDARY_TOL = 1e-6  # |beta| at or below this counts as parabolic
NEWTON_SEEDS = (0.0, 0.5, -0.5, 0.5j, -0.5j)


def validation_points():
    """9x16 polar grid plus a 64-point circle at radius 0.999."""
    return np.concatenate([polar_grid(), circle_points(0.999, 64)])


def _sup(f, pts):
    return float(np.max(np.abs(f(pts))))


# -- data types ----------------------------------------------------------------


class BPFactor:
    """``p(z) = G(z) / ((z - tau)(conj(tau) z - 1))`` with a guard at ``tau``.

    Near an interior ``tau`` the quotient is replaced by its mean over a small
    circle, which equals the value of the removable singularity.
    """

    def __init__(self, G, tau):
        self.G = G
        self.tau = complex(tau)

    def _raw(self, z):
        tau = self.tau
        return self.G(z) / ((z - tau) * (np.conj(tau) * z - 1))

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        near = np.abs(z - self.tau) < 1e-6
        out = np.empty(z.shape, dtype=complex)
        if (~near).any():
            out[~near] = self._raw(z[~near])
        if near.any():
            ring = z[near][:, None] + 1e-4 * circle_points(1.0, 16)[None, :]
            out[near] = self._raw(ring).mean(axis=-1)
        return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class GeneratorSpec:
    """A certified generator with its Berkson-Porta data.

    ``spectral`` is ``G'(tau)`` for interior ``tau`` and the real rate
    ``beta <= 0`` for boundary ``tau``.
    """

    G: Callable
    dw: complex
    p: Callable
    spectral: complex
    interior: bool

    def __call__(self, z):
        return self.G(z)

    @property
    def source(self):
        return getattr(self.G, "source", repr(self.G))

    @cached_property
    def koenigs_map(self):
        return KoenigsMap(self)


@dataclass(frozen=True)
class ClassificationReport:
    kind: str
    dw: Optional[complex]
    spectral: complex
    boundary_repelling: list = field(default_factory=list)
    # angular derivative of Phi_1 at a boundary Denjoy-Wolff point
    angular_derivative: Optional[float] = None


# -- Berkson-Porta --------------------------------------------------------------


def _bp_ast(tau, p_ast):
    tau = complex(tau)
    z = E.Var("z")
    left = E.BinOp("-", z, E.Num(tau))
    right = E.BinOp("-", E.BinOp("*", E.Num(tau.conjugate()), z), E.Num(1.0))
    return E.BinOp("*", E.BinOp("*", left, right), p_ast)


def _check_positive(p, pts, what="p"):
    re = np.real(p(pts))
    k = int(np.argmin(re))
    if re[k] < -POSITIVITY_TOL:
        raise CertificationError(
            f"Re {what} = {re[k]:.3g} < 0 at z = {pts[k]:.6g}", z=complex(pts[k])
        )


def _as_point(tau):
    tau = complex(tau)
    if abs(abs(tau) - 1.0) <= 1e-9:
        return tau / abs(tau), False
    if abs(tau) < 1.0:
        return tau, True
    raise DomainError(f"tau = {tau} lies outside the closed disc")


def bp_compose(tau, p):
    """Generator ``(z - tau)(conj(tau) z - 1) p(z)``, certified on the grid."""
    tau, interior = _as_point(tau)
    if isinstance(p, str):
        p = E.parse_expr(p)
    _check_positive(p, validation_points())
    if isinstance(p, E.HoloFunction):
        G = E.HoloFunction(f"BP[tau={tau!r}; p={p.source}]", 1, _bp_ast(tau, p.ast))
    else:
        G = _ProductGenerator(tau, p)
    beta = spectral_value(G, tau)
    return GeneratorSpec(G, tau, p, beta, interior)


class _ProductGenerator:
    def __init__(self, tau, p):
        self.tau, self.p = tau, p
        self.source = f"BP[tau={tau!r}; p=<callable>]"

    def __call__(self, z):
        tau = self.tau
        return (z - tau) * (np.conj(tau) * z - 1) * self.p(z)


def bp_decompose(G):
    """Recover ``(tau, p)`` from a generator; raises if ``Re p < 0`` somewhere."""
    tau = denjoy_wolff(G)
    p = BPFactor(G, tau)
    _check_positive(p, validation_points())
    return tau, p


def generator_spec(G):
    """Certify ``G`` and package it as a :class:`GeneratorSpec`."""
    if isinstance(G, str):
        G = E.parse_expr(G)
    tau, p = bp_decompose(G)
    interior = abs(tau) < 1.0 - INTERIOR_MARGIN
    return GeneratorSpec(G, tau, p, spectral_value(G, tau), interior)


def is_generator(G):
    if is_zero_field(G):
        return True
    try:
        bp_decompose(G)
    except (CertificationError, ConvergenceError, EvaluationError, DomainError):
        return False
    return True


def is_zero_field(G, pts=None):
    pts = validation_points() if pts is None else pts
    return _sup(G, pts) == 0.0


# -- fixed points ---------------------------------------------------------------


def _interior_zero(G):
    """Newton from a few seeds; returns an interior simple zero or None."""
    scale = max(_sup(G, polar_grid()), 1e-300)
    for seed in NEWTON_SEEDS:
        z = complex(seed)
        try:
            for _ in range(100):
                g = G(z)
                dg = cauchy_derivative(G, z, 1, 1e-3)
                if abs(dg) <= 1e-14 * scale:
                    break
                step = g / dg
                z -= step
                if abs(z) > 1.5:
                    break
                if abs(step) <= 1e-15 or abs(g) <= 1e-15 * scale:
                    if (abs(z) < 1.0 - INTERIOR_MARGIN
                            and abs(G(z)) <= 1e-12 * scale
                            and abs(cauchy_derivative(G, z, 1, 1e-3)) > 1e-8 * scale):
                        return z
                    break
        except EvaluationError:
            continue
    return None


def _golden_min(f, a, b, tol=1e-14):
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _boundary_candidates(G):
    """Angles of boundary zeros of ``G`` located on the circle ``|z| = 1 - 1e-6``."""
    theta = 2 * np.pi * np.arange(SCAN_ANGLES) / SCAN_ANGLES
    mag = np.abs(G(SCAN_RADIUS * np.exp(1j * theta)))
    big = float(np.max(mag))
    if big == 0.0:
        return []
    minima = np.flatnonzero((mag <= np.roll(mag, 1)) & (mag <= np.roll(mag, -1)))
    dtheta = 2 * np.pi / SCAN_ANGLES
    found = []
    for k in minima:
        if mag[k] > 0.05 * big:
            continue

        def obj(th):
            return abs(G(SCAN_RADIUS * complex(math.cos(th), math.sin(th))))

        th = _golden_min(obj, theta[k] - dtheta, theta[k] + dtheta)
        if obj(th) <= 1e-4 * big:
            th = math.remainder(th, 2 * math.pi)
            if all(abs(math.remainder(th - o, 2 * math.pi)) > 1e-6 for o in found):
                found.append(th)
    return found


def spectral_value(G, tau):
    """``G'(tau)`` for interior ``tau``; the radial limit of ``G(z)/(z - tau)`` otherwise.

    The boundary limit is extrapolated (Richardson, halving steps) from samples
    at ``r = 1 - 2^-k``, ``k = 4..20``, and must be real.
    """
    tau = complex(tau)
    if abs(tau) < 1.0 - INTERIOR_MARGIN:
        return derivative(G, tau, 1)
    tau = tau / abs(tau)
    k = np.arange(4, 21)
    eps = 2.0 ** (-k)
    zs = (1.0 - eps) * tau
    vals = np.asarray(G(zs)) / (zs - tau)
    table = [vals]
    best, best_err = vals[-1], abs(vals[-1] - vals[-2])
    for j in range(1, len(vals)):
        prev = table[-1]
        nxt = prev[1:] + (prev[1:] - prev[:-1]) / (2.0**j - 1.0)
        table.append(nxt)
        if len(nxt) < 2:
            break
        diffs = np.abs(np.diff(nxt))
        i = int(np.argmin(diffs))
        if diffs[i] < best_err:
            best, best_err = nxt[i + 1], diffs[i]
    scale = max(1.0, abs(best))
    if not np.isfinite(best) or best_err > SPECTRAL_TOL * scale:
        raise ConvergenceError(f"radial limit at {tau} does not converge (spread {best_err:.3g})")
    if abs(best.imag) > SPECTRAL_TOL * scale:
        raise ConvergenceError(
            f"radial limit at {tau} is not real ({best:.6g}); not a boundary fixed point of a generator"
        )
    return complex(best.real, 0.0)


def boundary_fixed_points(G):
    """All boundary zeros of ``G`` with their rates ``beta`` (``beta > 0``: repelling)."""
    out = []
    for th in _boundary_candidates(G):
        tau = complex(math.cos(th), math.sin(th))
        try:
            beta = spectral_value(G, tau)
        except ConvergenceError:
            continue
        out.append((tau, beta.real))
    return out


def denjoy_wolff(G):
    """Common Denjoy-Wolff point of the semigroup generated by ``G``."""
    if is_zero_field(G):
        raise PreconditionError("the zero field has no Denjoy-Wolff point")
    z = _interior_zero(G)
    if z is not None:
        return z
    cands = boundary_fixed_points(G)
    attracting = [c for c in cands if c[1] <= SPECTRAL_TOL]
    if not attracting:
        raise ConvergenceError("no Denjoy-Wolff point: no interior zero and no boundary zero with beta <= 0")
    return min(attracting, key=lambda c: c[1])[0]


# -- classification --------------------------------------------------------------


def classify(G):
    if isinstance(G, str):
        G = E.parse_expr(G)
    if is_zero_field(G):
        return ClassificationReport("identity", None, 0j)
    tau = denjoy_wolff(G)
    beta = spectral_value(G, tau)
    repelling = [(p, b) for p, b in boundary_fixed_points(G) if b > SPECTRAL_TOL]
    if abs(tau) < 1.0 - INTERIOR_MARGIN:
        kind = "elliptic-automorphism-type" if abs(beta.real) <= 1e-9 else "elliptic"
        return ClassificationReport(kind, tau, beta, repelling)
    b = beta.real
    if b < -BOUNDARY_TOL:
        return ClassificationReport("hyperbolic", tau, beta, repelling, math.exp(b))
    step = parabolic_step(G, 0.0)
    return ClassificationReport(f"parabolic-{step}-step", tau, beta, repelling, 1.0)


def parabolic_step(G, z0, iterations=200):
    """``"zero"`` or ``"positive"`` parabolic step of ``Phi_1``.

    The orbit ``z_n = Phi_1^n(z0)`` is computed for ``n <= iterations``.  The
    Poincare increments ``omega(z_n, z_{n+1})`` are non-increasing, so the
    limit is estimated by a least-squares fit ``a + b/n`` over the last 50.
    """
    spec = G if isinstance(G, GeneratorSpec) else generator_spec(G)
    if spec.interior or abs(spec.spectral.real) > BOUNDARY_TOL:
        raise PreconditionError("parabolic_step needs a parabolic generator")
    z = complex(z0)
    orbit = [z]
    for _ in range(iterations + 1):
        z = complex(semigroup_map(spec, 1.0, z))
        orbit.append(z)
    orbit = np.array(orbit)
    inc = np.asarray(poincare_distance(orbit[:-1], orbit[1:]))
    n = np.arange(1, len(inc) + 1, dtype=float)
    tail = slice(len(inc) - 50, len(inc))
    A = np.column_stack([np.ones(50), 1.0 / n[tail]])
    (limit, _), *_ = np.linalg.lstsq(A, inc[tail], rcond=None)
    if limit < 1e-3:
        return "zero"
    if limit > 1e-2 and inc[-1] > 1e-2:
        return "positive"
    raise ConvergenceError(
        f"parabolic step inconclusive: extrapolated increment {limit:.3g}"
    )


# -- Koenigs function and semigroup transport -------------------------------------


class KoenigsMap:
    """Koenigs linearization ``h`` of a generator.

    elliptic (``tau`` inside): ``h(tau) = 0``, ``h'(tau) = 1``, ``h' G = G'(tau) h``
    boundary: ``h(0) = 0``, ``h' G = 1``

    ``h`` is evaluated by quadrature along straight segments (``tau -> z`` or
    ``0 -> z``); the disc is convex and ``G`` has no other zeros inside it.
    """

    def __init__(self, base):
        self.base = base
        self.case = "elliptic" if base.interior else "boundary"

    def _integrand(self, zeta):
        G = self.base.G
        if self.case == "boundary":
            return 1.0 / G(zeta)
        tau, lam = self.base.dw, self.base.spectral
        return lam / G(zeta) - 1.0 / (zeta - tau)

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(~in_disc(z)):
            raise DomainError("Koenigs function evaluated outside the disc")
        if self.case == "boundary":
            out = segment_integral(self._integrand, 0.0, z, atol=1e-14 * np.abs(z))
        else:
            tau = self.base.dw
            out = np.zeros(z.shape, dtype=complex)
            far = np.abs(z - tau) > 0
            if far.any():
                zf = z[far]
                out[far] = (zf - tau) * np.exp(
                    segment_integral(self._integrand, tau, zf, atol=1e-13)
                )
        return complex(out[0]) if scalar else out

    def prime(self, z):
        """``h'`` read off the functional equation (used as a Newton slope)."""
        G = self.base.G(z)
        if self.case == "boundary":
            return 1.0 / G
        h = self(z)
        lam = self.base.spectral
        return np.where(np.abs(G) > 0, lam * h / np.where(G == 0, 1.0, G), 1.0)

    def inverse(self, w, seed):
        return invert_at(self, w, seed, fprime=self.prime)

    def residual(self, pts):
        """Sup of the functional-equation residual on ``pts`` (Cauchy h')."""
        hp = derivative(self, pts)
        G = self.base.G(pts)
        if self.case == "boundary":
            return float(np.max(np.abs(hp * G - 1.0)))
        return float(np.max(np.abs(hp * G - self.base.spectral * self(pts))))


def koenigs(spec, check=True):
    """Koenigs map of a certified generator; validated on the radius-0.8 grid."""
    if not isinstance(spec, GeneratorSpec):
        spec = generator_spec(spec)
    if is_zero_field(spec.G):
        raise PreconditionError("the zero field has no Koenigs function")
    h = KoenigsMap(spec)
    if check:
        pts = polar_grid([0.8])
        res = h.residual(pts)
        if res > 1e-8:
            raise ConvergenceError(f"Koenigs residual {res:.3g} exceeds 1e-8")
    return h


def flow(G, t, z, rtol=1e-7):
    """Integrate ``dz/dr = t G(z)`` on ``r in [0, 1]`` (``t`` may be an array)."""
    from .integrate import integrate

    z = np.atleast_1d(np.asarray(z, dtype=complex))
    shape = z.shape
    t = np.broadcast_to(np.asarray(t, dtype=float), shape).ravel()
    out = integrate(lambda w, r: t * G(w), z.ravel(), 0.0, 1.0, rtol=rtol, atol=1e-12,
                    max_step=0.25)
    return out.reshape(shape)


def semigroup_map(spec, t, z):
    """``Phi_t(z)`` via the Koenigs map, seeded by a short ODE prediction."""
    if not isinstance(spec, GeneratorSpec):
        spec = generator_spec(spec)
    if np.any(np.asarray(t) < 0):
        raise PreconditionError("semigroup time must be non-negative")
    scalar = np.ndim(z) == 0 and np.ndim(t) == 0
    z, t = np.broadcast_arrays(np.atleast_1d(np.asarray(z, dtype=complex)),
                               np.asarray(t, dtype=float))
    shape = z.shape
    z, t = z.ravel(), t.ravel()
    h = spec.koenigs_map
    hz = h(z)
    if h.case == "elliptic":
        target = np.exp(spec.spectral * t) * hz
    else:
        target = hz + t
    seed = flow(spec.G, t, z)
    try:
        out = h.inverse(target, seed)
    except ConvergenceError as exc:
        raise ConvergenceError(f"semigroup inversion failed: {exc}") from exc
    return complex(out[0]) if scalar else out.reshape(shape)


def hyperbolic_group_generator(lam, tau, sigma):
    """``lam (z - tau)(z - sigma)``, certified to generate a group of automorphisms.

    Requires ``Re lam (sigma + tau) = |lam| |1 + tau sigma|`` and that both
    ``G`` and ``-G`` pass the Berkson-Porta certificate.
    """
    lam, tau, sigma = complex(lam), complex(tau), complex(sigma)
    if abs(tau - sigma) < 1e-12:
        raise PreconditionError("tau and sigma must be distinct")
    lhs = (lam * (sigma + tau)).real
    rhs = abs(lam) * abs(1 + tau * sigma)
    if abs(lhs - rhs) > 1e-9:
        raise PreconditionError(f"group constraint violated: {lhs:.6g} != {rhs:.6g}")
    src = f"{E.literal(lam)}*(z-{E.literal(tau)})*(z-{E.literal(sigma)})"
    G = E.parse_expr(src)
    neg = E.HoloFunction(f"-({src})", 1, E.Neg(G.ast))
    for g, name in ((G, "G"), (neg, "-G")):
        if not is_generator(g):
            raise CertificationError(f"{name} = {g.source} is not an infinitesimal generator")
    return generator_spec(G)
