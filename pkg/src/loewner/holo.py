"""Disc geometry and numerical holomorphic calculus.

Everything here is vectorized: ``z`` may be a scalar or a complex array, and
maps passed in as ``f`` must accept arrays (every :class:`HoloFunction` does).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError, EvaluationError

EPS_BOUNDARY = 1e-12
CAUCHY_NODES = 64
CAUCHY_MAX_RADIUS = 0.1
GL_NODES = 16
QUAD_RTOL = 1e-12
QUAD_MAX_LEVEL = 20


def _out(x, scalar):
    return complex(x) if scalar else x


def in_disc(z, eps=EPS_BOUNDARY):
    return np.abs(z) < 1.0 - eps


def as_disc_point(z):
    z = complex(z)
    if not math.isfinite(z.real) or not math.isfinite(z.imag):
        raise DomainError(f"non-finite point {z}")
    if abs(z) >= 1.0 - EPS_BOUNDARY:
        raise DomainError(f"{z} is not inside the unit disc")
    return z


def as_boundary_point(z):
    z = complex(z)
    if abs(abs(z) - 1.0) > EPS_BOUNDARY:
        raise DomainError(f"{z} is not on the unit circle")
    return z


def polar_grid(radii=None, angles=16):
    """The validation grid: ``len(radii)`` circles times ``angles`` rays."""
    if radii is None:
        radii = np.round(np.arange(1, 10) * 0.1, 12)
    radii = np.asarray(radii, dtype=float)
    theta = 2 * np.pi * np.arange(angles) / angles
    return (radii[:, None] * np.exp(1j * theta)[None, :]).ravel()


def circle_points(radius, n=64, center=0.0):
    theta = 2 * np.pi * np.arange(n) / n
    return center + radius * np.exp(1j * theta)


# -- geometry ----------------------------------------------------------------


def pseudo_hyperbolic(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.abs((z - w) / (1 - np.conj(w) * z))


def poincare_distance(z, w):
    """Hyperbolic distance ``artanh |(z - w)/(1 - conj(w) z)|`` (curvature -4)."""
    rho = pseudo_hyperbolic(z, w)
    out = np.arctanh(np.minimum(rho, 1.0))
    return float(out) if np.ndim(out) == 0 else out


def cayley(tau, z):
    """``(tau + z)/(tau - z)``; maps the disc onto the right half-plane."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    den = tau - z
    if np.any(den == 0):
        raise EvaluationError("Cayley transform evaluated at its pole")
    return _out((tau + z) / den, scalar)


# -- derivatives ---------------------------------------------------------------


def cauchy_derivative(f, z, order=1, radius=1e-3, nodes=CAUCHY_NODES):
    """n-th derivative by the trapezoid rule on ``|zeta - z| = radius``.

    ``radius`` may be an array broadcastable against ``z``.
    """
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    r = np.broadcast_to(np.asarray(radius, dtype=float), z.shape)
    w = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    ring = z[..., None] + r[..., None] * w
    vals = np.asarray(f(ring), dtype=complex)
    coef = np.mean(vals * w ** (-order), axis=-1)
    out = math.factorial(order) * coef / r**order
    return _out(out, scalar)


def derivative_radius(z):
    return np.minimum(CAUCHY_MAX_RADIUS, 0.5 * (1.0 - np.abs(z)))


def derivative(f, z, order=1, t=None):
    """n-th z-derivative of ``f`` at disc points ``z`` (Cauchy integral).

    The contour radius is ``min(0.1, (1 - |z|)/2)`` so the contour stays in
    the disc; ``t`` freezes the time argument of a two-argument function.
    A singularity is only detected when a contour node hits it; ``f`` must be
    holomorphic on the closed contour disc.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if t is not None:
        g = f
        f = lambda zeta: g(zeta, t)  # noqa: E731
    z = np.asarray(z, dtype=complex) if np.ndim(z) else z
    r = derivative_radius(z)
    if np.any(r <= 0):
        raise DomainError("Cauchy contour leaves the unit disc")
    try:
        return cauchy_derivative(f, z, order, r)
    except EvaluationError as exc:
        raise DomainError(f"Cauchy contour hits a singularity: {exc}") from exc


# -- quadrature ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _panel(f, curve, lo, hi):
    x, w = _gl(GL_NODES)
    s = lo + (hi - lo) * x
    zeta, dzeta = curve(s)
    vals = np.asarray(f(zeta), dtype=complex) * dzeta
    return (hi - lo) * (vals @ w), (hi - lo) * (np.abs(vals) @ w)


def adaptive_quad(f, curve, lo=0.0, hi=1.0, panels=1, rtol=QUAD_RTOL, atol=0.0,
                  max_level=QUAD_MAX_LEVEL):
    """Composite 16-node Gauss-Legendre quadrature with adaptive bisection.

    ``curve(s)`` maps a 1-d parameter array of shape ``(m,)`` to
    ``(zeta, dzeta/ds)`` of shape ``(n, m)``, one row per integral, so ``n``
    integrals sharing a parameter interval are refined on a common mesh.  A
    panel is accepted once it agrees with the sum of its halves to ``rtol``
    relative to the integral of ``|f dzeta|`` over the whole path, or to the
    absolute floor ``atol`` (scalar or one entry per integral), whichever is
    larger.
    """
    edges = np.linspace(lo, hi, panels + 1)
    work = []
    total_abs = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, mag = _panel(f, curve, a, b)
        work.append((a, b, val, 0))
        total_abs = total_abs + mag
    tol = np.maximum(rtol * total_abs, atol)
    tol = np.maximum(tol, 1e-300)
    total = 0.0
    while work:
        a, b, whole, level = work.pop()
        m = 0.5 * (a + b)
        left, _ = _panel(f, curve, a, m)
        right, _ = _panel(f, curve, m, b)
        halves = left + right
        if np.all(np.abs(halves - whole) <= tol):
            total = total + halves
            continue
        if level + 1 >= max_level:
            raise ConvergenceError(
                "quadrature did not converge after "
                f"{max_level} levels near parameter {m:.6g}; singularity on or near path?"
            )
        work.append((m, b, right, level + 1))
        work.append((a, m, left, level + 1))
    return total


@dataclass(frozen=True)
class Path:
    """Integration contour.

    ``kind`` is ``"segment"`` (``points = (a, b)``), ``"polyline"``
    (``points`` = vertices) or ``"circle"`` (``center``, ``radius``).
    ``samples`` sets the initial node count.
    """

    kind: str
    points: tuple = ()
    center: complex = 0.0
    radius: float = 0.0
    samples: int = 16

    def __post_init__(self):
        if self.samples < 16:
            raise ValueError("paths need at least 16 samples")
        if self.kind in ("segment", "radial") and len(self.points) != 2:
            raise ValueError("a segment needs exactly two endpoints")
        if self.kind == "polyline" and len(self.points) < 2:
            raise ValueError("a polyline needs at least two vertices")
        if self.kind == "circle" and self.radius <= 0:
            raise ValueError("circle radius must be positive")
        if self.kind not in ("segment", "radial", "polyline", "circle"):
            raise ValueError(f"unknown path kind {self.kind!r}")

    @classmethod
    def radial(cls, end, start=0.0, samples=16):
        return cls("segment", (complex(start), complex(end)), samples=samples)

    @classmethod
    def polyline(cls, vertices, samples=16):
        return cls("polyline", tuple(complex(v) for v in vertices), samples=samples)

    @classmethod
    def circle(cls, center, radius, samples=16):
        return cls("circle", center=complex(center), radius=float(radius), samples=samples)


def segment_integral(f, a, b, rtol=QUAD_RTOL, atol=0.0):
    """Vectorized ``int_a^b f(zeta) dzeta`` along straight segments."""
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a, b = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=complex)),
                               np.atleast_1d(np.asarray(b, dtype=complex)))
    shape = a.shape
    a = a.ravel()[:, None]
    d = (b.ravel() - a.ravel())[:, None]

    def curve(s):
        return a + d * s[None, :], np.broadcast_to(d, (d.shape[0], s.size))

    atol = np.broadcast_to(np.asarray(atol, dtype=float), shape).ravel()
    out = np.reshape(adaptive_quad(f, curve, rtol=rtol, atol=atol), shape)
    return _out(out[0], True) if scalar else out


def path_integral(f, path):
    """``int_path f(zeta) dzeta`` for a :class:`Path`."""
    panels = max(1, path.samples // GL_NODES)
    if path.kind == "circle":
        c, r = path.center, path.radius

        def curve(s):
            e = np.exp(2j * np.pi * s)[None, :]
            return c + r * e, 2j * np.pi * r * e

        return complex(adaptive_quad(f, curve, panels=panels)[0])
    verts = path.points
    total = 0.0 + 0.0j
    for a, b in zip(verts[:-1], verts[1:]):
        d = b - a

        def curve(s, a=a, d=d):
            return (a + d * s)[None, :], np.full((1, s.size), d)

        total += complex(adaptive_quad(f, curve, panels=panels)[0])
    return total


# -- inversion ----------------------------------------------------------------


def invert_at(f, w, seed, fprime=None, tol=1e-12, max_iter=100, return_mask=False):
    """Solve ``f(z) = w`` for ``z`` in the disc by damped Newton iteration.

    ``fprime`` defaults to the Cauchy-integral derivative.  Steps that would
    leave the disc are halved.  Convergence is ``|f(z) - w| <= tol * max(1, |w|)``.
    With ``return_mask`` nothing is raised; the result is ``(z, converged)``.
    """
    scalar = np.ndim(w) == 0 and np.ndim(seed) == 0
    w, z = np.broadcast_arrays(np.atleast_1d(np.asarray(w, dtype=complex)),
                               np.atleast_1d(np.asarray(seed, dtype=complex)))
    w = w.copy()
    z = z.copy()
    if np.any(~in_disc(z)):
        raise DomainError("Newton seed outside the unit disc")
    if fprime is None:
        fprime = lambda x: derivative(f, x)  # noqa: E731
    thresh = tol * np.maximum(1.0, np.abs(w))
    active = np.ones(z.shape, dtype=bool)
    resid = np.asarray(f(z), dtype=complex) - w
    for _ in range(max_iter):
        active = np.abs(resid) > thresh
        if not active.any():
            break
        za, ra = z[active], resid[active]
        step = ra / np.asarray(fprime(za), dtype=complex)
        znew = za - step
        for _ in range(60):
            bad = ~in_disc(znew)
            if not bad.any():
                break
            step = np.where(bad, 0.5 * step, step)
            znew = za - step
        if not np.all(np.isfinite(znew)):
            if not return_mask:
                raise ConvergenceError("Newton iteration produced a non-finite iterate")
            znew = np.where(np.isfinite(znew), znew, za)
        z[active] = znew
        resid[active] = np.asarray(f(znew), dtype=complex) - w[active]
    else:
        active = np.abs(resid) > thresh
    if return_mask:
        ok = ~(np.abs(resid) > thresh)
        return z.reshape(np.shape(w)), ok.reshape(np.shape(w))
    if active.any():
        k = int(np.flatnonzero(active)[0])
        raise ConvergenceError(
            f"inversion did not converge for w={w[k]:.6g} "
            f"(residual {abs(resid[k]):.3g}, last iterate {z[k]:.6g})"
        )
    return _out(z[0], True) if scalar else z.reshape(np.shape(w))
