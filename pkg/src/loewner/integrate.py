"""Adaptive Dormand-Prince 5(4) integrator for batches of complex ODEs.

All points in a batch share one step sequence; the error norm is the max over
the batch.  Integration never steps across a breakpoint, and a step that
would carry any point to ``|w| >= 1 - 1e-12`` is rejected and halved.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, EvaluationError
from .holo import EPS_BOUNDARY

# Dormand & Prince (1980) coefficients
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
MIN_FACTOR, MAX_FACTOR = 0.2, 5.0
MIN_STEP = 1e-14
MAX_ESCAPES = 100  # containment rejections per segment before giving up


def _segment(f, y, t0, t1, rtol, atol, max_step, h0, contain):
    """Integrate from ``t0`` to ``t1`` with no breakpoint inside."""
    t = t0
    h = min(h0, max_step, t1 - t0)
    # stage times that reach t1 evaluate with side="left" (the segment's own piece)
    k1 = f(y, t, "right")
    escapes = 0
    while t < t1:
        if t + h >= t1 - 1e-15 * max(1.0, abs(t1)):
            h = t1 - t
            last = True
        else:
            last = False
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(A[i], ks))
            ti = t + C[i] * h
            side = "left" if (last and C[i] == 1.0) or ti >= t1 else "right"
            ks.append(f(yi, ti, side))
        y5 = y + h * sum(b * k for b, k in zip(B5, ks) if b != 0.0)
        errv = h * sum(e * k for e, k in zip(E, ks) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.max(np.abs(errv) / scale)) if y.size else 0.0
        if not np.isfinite(err):
            err = np.inf
        escaped = contain and np.any(np.abs(y5) >= 1.0 - EPS_BOUNDARY)
        if err <= 1.0 and not escaped:
            t = t1 if last else t + h
            y = y5
            k1 = ks[6] if not last else k1
            factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** (-0.2))
            h = min(max_step, h * max(1.0, factor))
        else:
            if escaped and err <= 1.0:
                escapes += 1
                if escapes > MAX_ESCAPES:
                    k = int(np.argmax(np.abs(y)))
                    raise ConvergenceError(
                        f"trajectory from the batch reaches |w| = {abs(y[k]):.15g} at "
                        f"t={t:.12g}; it cannot be kept inside |w| < 1 - 1e-12"
                    )
                h *= 0.5
            else:
                h *= max(MIN_FACTOR, SAFETY * err ** (-0.2)) if np.isfinite(err) else MIN_FACTOR
            if h < MIN_STEP:
                raise ConvergenceError(f"step size underflow at t={t:.12g}")
    return y, h


def integrate(f, z0, s, t, breakpoints=(), rtol=1e-10, atol=1e-12, max_step=0.05,
              contain=True, out_times=None):
    """Solve ``w' = f(w, tau)`` from ``w(s) = z0`` up to ``tau = t``.

    ``f(w, tau)`` or ``f(w, tau, side)`` returns the field at the batch ``w``;
    ``side`` is ``"left"`` for stage times that coincide with the end of the
    current breakpoint segment.  With ``out_times`` the states at those
    (sorted, within ``[s, t]``) times are returned as a list.
    """
    y = np.array(np.atleast_1d(np.asarray(z0, dtype=complex)), copy=True)
    shape = y.shape
    y = y.ravel()
    try:
        f(y[:1], s, "right")
        g = f
    except TypeError:
        g = lambda w, tau, side: f(w, tau)  # noqa: E731

    def rhs(w, tau, side):
        try:
            out = np.asarray(g(w, tau, side), dtype=complex)
        except EvaluationError:
            raise
        return np.broadcast_to(out, w.shape)

    stops = sorted({float(b) for b in breakpoints if s < b < t})
    marks = sorted({float(x) for x in (out_times or ()) if s <= x <= t})
    nodes = sorted(set(stops) | set(marks) | {float(t)})
    results = {}
    if s in marks:
        results[s] = y.copy()
    cur, h = float(s), max_step
    for nxt in nodes:
        if nxt > cur:
            y, h = _segment(rhs, y, cur, nxt, rtol, atol, max_step, h, contain)
            cur = nxt
        if nxt in marks:
            results[nxt] = y.copy()
    if out_times is not None:
        return [results[m].reshape(shape) for m in marks]
    return y.reshape(shape)
