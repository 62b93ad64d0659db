"""Time-dependent Herglotz vector fields ``G(z, t)``.

Four kinds are supported:

``autonomous``  a single generator, constant in time
``splitting``   ``g(t) * G0(z)`` for a time factor ``g`` and a generator ``G0``
``piecewise``   a different (scaled) generator on each interval ``[t_k, t_{k+1})``
``general``     any two-argument expression, certified at sampled times
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from . import expr as E
from .errors import CertificationError, ConfigError, LoewnerError, PreconditionError
from .generators import (
    GeneratorSpec,
    bp_decompose,
    generator_spec,
    validation_points,
)
from .holo import circle_points, derivative, polar_grid

SPLITTING_TOL = 1e-7
CERT_SAMPLES_PER_UNIT = 16


class SampledFunction:
    """Piecewise-linear interpolation of a complex sample table ``(t, value)``."""

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=complex)
        if self.times.ndim != 1 or self.times.size < 2 or np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing (at least two)")
        self.re, self.im = values.real, values.imag
        self.source = f"table[{self.times.size} samples]"

    def __call__(self, t):
        out = np.interp(t, self.times, self.re) + 1j * np.interp(t, self.times, self.im)
        return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Piece:
    start: float
    generator: GeneratorSpec
    scale: complex = 1.0


@dataclass(frozen=True)
class HerglotzField:
    """``G(z, t)`` with metadata.  Call as ``F(z, t)``.

    ``breakpoints`` are the times where the field may jump; integrators end
    steps exactly there.  At a breakpoint the right-limit branch is used unless
    ``side="left"`` is requested.
    """

    kind: str
    generator: Optional[GeneratorSpec] = None  # autonomous / splitting base
    g: Optional[Callable] = None  # splitting time factor
    pieces: tuple = ()
    expression: Optional[E.HoloFunction] = None
    order: float = math.inf
    breakpoints: tuple = ()
    name: str = ""

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bps)

    # construction -------------------------------------------------------

    @classmethod
    def autonomous(cls, G, **kw):
        return cls("autonomous", generator=_spec(G), **kw)

    @classmethod
    def splitting(cls, g, base, **kw):
        if isinstance(g, str):
            g = E.parse_time_function(g)
        return cls("splitting", generator=_spec(base), g=g, **kw)

    @classmethod
    def piecewise(cls, pieces, **kw):
        """``pieces``: iterable of ``(start, generator)`` or ``(start, generator, scale)``."""
        out = []
        for item in pieces:
            start, G = item[0], item[1]
            scale = complex(item[2]) if len(item) > 2 else 1.0
            out.append(Piece(float(start), _spec(G), scale))
        out.sort(key=lambda p: p.start)
        if not out or out[0].start != 0.0:
            raise ValueError("the first piece must start at t = 0")
        bps = tuple(p.start for p in out[1:])
        return cls("piecewise", pieces=tuple(out), breakpoints=bps, **kw)

    @classmethod
    def general(cls, expression, breakpoints=(), **kw):
        if isinstance(expression, str):
            expression = E.parse_expr(expression, arity=2)
        return cls("general", expression=expression, breakpoints=tuple(breakpoints), **kw)

    # evaluation ---------------------------------------------------------

    def piece_index(self, t, side="right"):
        starts = [p.start for p in self.pieces]
        if side == "left" and t > 0:
            return max(bisect.bisect_left(starts, t) - 1, 0)
        return max(bisect.bisect_right(starts, t) - 1, 0)

    def time_factor(self, t):
        if self.kind == "autonomous":
            return 1.0
        if self.kind == "splitting":
            return complex(self.g(t))
        raise PreconditionError(f"a {self.kind} field has no declared time factor")

    def __call__(self, z, t, side="right"):
        if self.kind == "autonomous":
            return self.generator.G(z)
        if self.kind == "splitting":
            return complex(self.g(t)) * self.generator.G(z)
        if self.kind == "piecewise":
            p = self.pieces[self.piece_index(t, side)]
            return p.scale * p.generator.G(z)
        return self.expression(z, t)

    def frozen(self, t, side="right"):
        """The generator ``z -> G(z, t)`` as a one-argument callable."""
        if self.kind == "general":
            return self.expression.freeze(t)
        if self.kind == "autonomous":
            return self.generator.G
        if self.kind == "piecewise":
            p = self.pieces[self.piece_index(t, side)]
            if p.scale == 1.0:
                return p.generator.G
            return _Scaled(p.generator.G, p.scale)
        return _Scaled(self.generator.G, complex(self.g(t)))

    def generators(self):
        """Constituent generators that must certify at construction."""
        if self.kind in ("autonomous", "splitting"):
            return [self.generator]
        if self.kind == "piecewise":
            return [p.generator for p in self.pieces]
        return []


class _Scaled:
    def __init__(self, G, c):
        self.G, self.c = G, complex(c)
        self.source = f"({self.c!r})*[{getattr(G, 'source', 'G')}]"

    def __call__(self, z):
        return self.c * self.G(z)


def _spec(G):
    if isinstance(G, GeneratorSpec):
        return G
    if isinstance(G, str):
        G = E.parse_expr(G)
    return generator_spec(G)


# -- certification ------------------------------------------------------------


def certification_times(F, horizon):
    n = max(1, int(round(CERT_SAMPLES_PER_UNIT * horizon)))
    return np.linspace(0.0, horizon, n + 1)


def certify(F, horizon=2.0):
    """Check ``G(., t)`` is a generator at sampled times; raises :class:`CertificationError`."""
    if F.kind == "general":
        for t in certification_times(F, horizon):
            G = F.frozen(t)
            if _zero(G):
                continue
            try:
                bp_decompose(G)
            except CertificationError as exc:
                raise CertificationError(f"t={t:.6g}: {exc}", t=float(t), z=exc.z) from exc
            except LoewnerError as exc:
                raise CertificationError(f"t={t:.6g}: {exc}", t=float(t)) from exc
    elif F.kind == "splitting":
        # g(t) G0 is a generator iff Re(g(t) p0) >= 0
        pts = validation_points()
        p0 = F.generator.p(pts)
        for t in certification_times(F, horizon):
            c = complex(F.g(t))
            if c == 0 or np.min(np.real(c * p0)) >= -1e-9:
                continue
            # c * G0 may still generate with another Denjoy-Wolff point (group case)
            try:
                bp_decompose(_Scaled(F.generator.G, c))
            except CertificationError as exc:
                raise CertificationError(f"t={t:.6g}: {exc}", t=float(t), z=exc.z) from exc
            except LoewnerError as exc:
                raise CertificationError(f"t={t:.6g}: {exc}", t=float(t)) from exc
    elif F.kind == "piecewise":
        for p in F.pieces:
            if p.scale != 1.0 and not _zero(_Scaled(p.generator.G, p.scale)):
                try:
                    bp_decompose(_Scaled(p.generator.G, p.scale))
                except LoewnerError as exc:
                    raise CertificationError(f"t={p.start:.6g}: {exc}", t=p.start) from exc
    return F


def _zero(G):
    return float(np.max(np.abs(G(validation_points())))) == 0.0


def make_field(spec):
    """Build and certify a field from a config mapping.

    Keys: ``kind`` (autonomous | splitting | piecewise | general), then
    ``expr`` (autonomous, general), ``g`` + ``base`` (splitting; ``g`` is an
    expression of ``t`` or ``{"times": [...], "values": [...]}``), ``pieces``
    (list of ``{"start", "expr", "scale"?}``), and optionally ``order``,
    ``breakpoints``, ``horizon`` (certification window, default 2), ``name``.
    """
    try:
        kind = spec["kind"]
    except (KeyError, TypeError):
        raise ConfigError("field.kind", "missing field kind") from None
    kw = {"order": float(spec.get("order", math.inf)), "name": spec.get("name", "")}
    try:
        if kind == "autonomous":
            F = HerglotzField.autonomous(_need(spec, "expr"), **kw)
        elif kind == "splitting":
            g = _need(spec, "g")
            if isinstance(g, dict):
                g = SampledFunction(g["times"], _complex_list(g["values"]))
            F = HerglotzField.splitting(g, _need(spec, "base"), **kw)
        elif kind == "piecewise":
            pieces = [
                (p["start"], p["expr"], _complex(p.get("scale", 1.0)))
                for p in _need(spec, "pieces")
            ]
            F = HerglotzField.piecewise(pieces, **kw)
        elif kind == "general":
            F = HerglotzField.general(
                _need(spec, "expr"), breakpoints=spec.get("breakpoints", ()), **kw
            )
        else:
            raise ConfigError("field.kind", f"unknown kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ConfigError("field", f"malformed field spec: {exc}") from exc
    return certify(F, float(spec.get("horizon", 2.0)))


def _need(spec, key):
    if key not in spec:
        raise ConfigError(f"field.{key}", "required key missing")
    return spec[key]


def _complex(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _complex_list(vals):
    return [_complex(v) for v in vals]


def field_eval(F, z, t, side="right"):
    if t < 0:
        raise PreconditionError("field evaluated at negative time")
    return F(z, t, side)


# -- brackets and splitting -----------------------------------------------------


def lie_bracket(X, Y, z):
    """``[X, Y] = Y X' - X Y'`` at ``z`` (Cauchy derivatives)."""
    return Y(z) * derivative(X, z) - X(z) * derivative(Y, z)


def splitting_residual(F, time_samples, grid=None):
    """Normalized sup of ``|[G(., t), G(., s)]|`` over sample pairs and grid.

    Each pair is normalized by ``sup|G(., t)| * sup|G(., s)|`` on the grid,
    which makes the residual invariant under rescaling ``G``.  Returns
    ``(residual, verdict)``; the verdict is ``residual <= 1e-7``.
    """
    times = sorted(float(t) for t in time_samples)
    if len(times) < 2:
        raise PreconditionError("splitting_residual needs at least two sample times")
    z = polar_grid() if grid is None else np.asarray(grid, dtype=complex)
    frozen = [F.frozen(t) for t in times]
    vals = [np.asarray(G(z)) for G in frozen]
    ders = [np.asarray(derivative(G, z)) for G in frozen]
    sups = [float(np.max(np.abs(v))) for v in vals]
    worst = 0.0
    for i, j in combinations(range(len(times)), 2):
        norm = sups[i] * sups[j]
        if norm == 0.0:
            continue
        br = vals[j] * ders[i] - vals[i] * ders[j]
        worst = max(worst, float(np.max(np.abs(br))) / norm)
    return worst, worst <= SPLITTING_TOL


@dataclass(frozen=True)
class TimeFactor:
    t: float
    g: complex
    dispersion: float


def recover_g(F, base=None, t0=0.0, time_samples=(), grid=None):
    """Recover ``g(t)`` with ``G(z, t) = g(t) base(z)`` as a grid median.

    ``base`` defaults to ``G(., t0)``.  Raises if the across-grid dispersion
    exceeds ``1e-4`` (the field does not split against this base).
    """
    z = polar_grid() if grid is None else np.asarray(grid, dtype=complex)
    if base is None:
        base = F.frozen(t0)
    Gb = base.G if isinstance(base, GeneratorSpec) else base
    b = np.asarray(Gb(z))
    keep = np.abs(b) > 1e-12 * np.max(np.abs(b))
    if not keep.any():
        raise PreconditionError("base field vanishes on the grid")
    out = []
    for t in time_samples:
        ratio = np.asarray(F(z[keep], float(t))) / b[keep]
        g = complex(np.median(ratio.real), np.median(ratio.imag))
        disp = float(np.max(np.abs(ratio - g)))
        if disp > 1e-4:
            raise PreconditionError(
                f"t={t:.6g}: ratio G(z,t)/base(z) varies by {disp:.3g} across the grid; not splitting"
            )
        out.append(TimeFactor(float(t), g, disp))
    return out


@dataclass(frozen=True)
class BPDataSample:
    t: float
    tau: complex
    p: Callable


def bp_data_in_time(F, t):
    G = F.frozen(t)
    if _zero(G):
        raise PreconditionError(f"G(., {t}) vanishes identically")
    tau, p = bp_decompose(G)
    return BPDataSample(float(t), tau, p)


def herglotz_bound_check(F, radius, T, n_times=256, angles=64):
    """Sampled sup of ``|G(z, t)|`` over ``|z| <= radius`` and ``t in [0, T]``.

    By the maximum principle the sup over the closed disc is attained on its
    boundary circle, which is sampled together with interior rings.
    """
    rings = np.linspace(radius / 4, radius, 4)
    z = np.concatenate([circle_points(r, angles) for r in rings])
    best = 0.0
    for t in np.linspace(0.0, T, n_times):
        best = max(best, float(np.max(np.abs(F(z, float(t))))))
    return best
