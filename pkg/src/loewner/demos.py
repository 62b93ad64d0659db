"""Named scenarios used by ``check --demo`` and the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass, field

FLIP_PIECES = 64


@dataclass(frozen=True)
class Demo:
    name: str
    description: str
    field: dict
    times: tuple = (0.0, 0.5, 1.0, 1.5, 2.0)
    pairs: tuple = (
        ((0.0, 0.5), (1.0, 1.5)),
        ((0.0, 1.0), (0.5, 2.0)),
        ((0.2, 0.7), (1.1, 1.9)),
        ((0.0, 2.0), (0.5, 1.0)),
        ((0.3, 1.2), (0.6, 1.7)),
        ((0.0, 0.25), (1.75, 2.0)),
    )
    s_samples: tuple = (0.3, 0.7, 1.25, 1.6, 1.85)
    triples: tuple = ((0.0, 0.5, 1.0), (0.0, 1.0, 2.0), (0.5, 1.5, 2.0), (0.2, 1.1, 1.9))
    u_samples: tuple = (0.3, 0.9, 1.4, 1.8)
    automorphic: bool = False
    expected: dict = field(default_factory=dict)


def _flip_field():
    pieces = [{"start": float(k), "expr": "1-z^2", "scale": (-1.0) ** k} for k in range(FLIP_PIECES)]
    return {
        "kind": "piecewise",
        "pieces": pieces,
        "name": f"alternating sign on integer intervals, defined on [0, {FLIP_PIECES})",
    }


CATALOG = (
    Demo(
        "splitting-parabolic",
        "(1+it)(z-1)^2: parabolic base, complex time factor",
        {"kind": "general", "expr": "(1+i*t)*(z-1)^2"},
    ),
    Demo(
        "splitting-elliptic",
        "-(t(1+i)+1) z(2+z): elliptic base at 0, complex time factor",
        {"kind": "general", "expr": "-(t*(1+i)+1)*z*(2+z)"},
    ),
    Demo(
        "hyperbolic-group-flip",
        "(-1)^[t] (1-z^2): each frozen field generates hyperbolic automorphisms",
        _flip_field(),
        automorphic=True,
    ),
    Demo(
        "piecewise-nonsplitting",
        "-z on [0,1), -z(2+z) on [1,oo): frozen fields do not commute",
        {"kind": "piecewise", "pieces": [{"start": 0.0, "expr": "-z"},
                                         {"start": 1.0, "expr": "-z*(2+z)"}]},
        expected={"splitting": False, "commuting": False, "reversing": False,
                  "reversing_field_identity": False},
    ),
    Demo(
        "autonomous-linear",
        "-z: the semigroup e^{-t} z",
        {"kind": "autonomous", "expr": "-z"},
    ),
)


def demo_catalog():
    return list(CATALOG)


def get_demo(name):
    for d in CATALOG:
        if d.name == name:
            return d
    raise KeyError(f"unknown demo {name!r}; available: {', '.join(d.name for d in CATALOG)}")
