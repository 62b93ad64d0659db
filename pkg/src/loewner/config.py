"""JSON scenario files.

A minimal config::

    {
      "schema": "loewner-scenario/1",
      "field": {"kind": "general", "expr": "(1+i*t)*(z-1)^2"},
      "integrator": {"rel_tol": 1e-10},
      "grid": {"radii": [0.1, 0.5, 0.9], "angles": 16},
      "times": [0, 0.5, 1, 2],
      "output": {"path": "out.json", "format": "json"}
    }

``check`` configs may also carry a ``plan`` object with ``times``,
``pairs``, ``s_samples``, ``triples``, ``u_samples`` and ``automorphic``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .demos import Demo
from .errors import ConfigError
from .evolution import IntegratorSettings
from .holo import polar_grid
from .suite import CheckPlan

SCHEMA = "loewner-scenario/1"
_TOP_KEYS = {"schema", "field", "integrator", "grid", "times", "plan", "output"}
_DEFAULT = Demo("config", "", {})


@dataclass(frozen=True)
class GridSpec:
    radii: tuple = tuple(np.round(np.arange(1, 10) * 0.1, 12))
    angles: int = 16

    def points(self):
        return polar_grid(self.radii, self.angles)

    @classmethod
    def parse(cls, text):
        """``"R1,R2,.../ANGLES"``."""
        try:
            radii_s, angles_s = text.split("/")
            radii = tuple(float(r) for r in radii_s.split(",") if r.strip())
            angles = int(angles_s)
        except ValueError:
            raise ConfigError("--grid", f"expected R1,R2,.../ANGLES, got {text!r}") from None
        return cls(radii, angles).validated("--grid")

    def validated(self, where):
        if not self.radii or self.angles < 1:
            raise ConfigError(where, "grid must have at least one radius and one angle")
        if any(not 0 <= r < 1 for r in self.radii):
            raise ConfigError(where, "grid radii must lie in [0, 1)")
        return self


@dataclass(frozen=True)
class ScenarioConfig:
    field: dict
    settings: IntegratorSettings = IntegratorSettings()
    grid: GridSpec = GridSpec()
    times: tuple = (0.0, 0.5, 1.0, 2.0)
    plan: Optional[CheckPlan] = None
    out_path: Optional[str] = None
    out_format: str = "json"
    extra: dict = field(default_factory=dict)


def _plan(doc):
    d = _DEFAULT
    try:
        return CheckPlan(
            tuple(float(t) for t in doc.get("times", d.times)),
            tuple(tuple(tuple(float(x) for x in iv) for iv in pair)
                  for pair in doc.get("pairs", d.pairs)),
            tuple(float(s) for s in doc.get("s_samples", d.s_samples)),
            tuple(tuple(float(x) for x in tr) for tr in doc.get("triples", d.triples)),
            tuple(float(u) for u in doc.get("u_samples", d.u_samples)),
            bool(doc.get("automorphic", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("plan", f"malformed plan: {exc}") from exc


def parse_config(doc):
    if not isinstance(doc, dict):
        raise ConfigError("$", "config must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise ConfigError("schema", f"expected {SCHEMA!r}, got {doc.get('schema')!r}")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    if "field" not in doc:
        raise ConfigError("field", "required key missing")
    integ = doc.get("integrator", {})
    try:
        settings = IntegratorSettings(**integ)
    except (TypeError, ValueError) as exc:
        raise ConfigError("integrator", str(exc)) from exc
    g = doc.get("grid", {})
    try:
        grid = GridSpec(tuple(float(r) for r in g.get("radii", GridSpec.radii)),
                        int(g.get("angles", 16))).validated("grid")
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError("grid", f"malformed grid: {exc}") from exc
    try:
        times = tuple(float(t) for t in doc.get("times", ScenarioConfig.times))
    except (TypeError, ValueError) as exc:
        raise ConfigError("times", f"malformed times: {exc}") from exc
    if not times or any(t < 0 for t in times):
        raise ConfigError("times", "times must be a nonempty list of non-negative numbers")
    out = doc.get("output", {})
    fmt = out.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError("output.format", f"expected csv or json, got {fmt!r}")
    plan = _plan(doc["plan"]) if "plan" in doc else None
    return ScenarioConfig(doc["field"], settings, grid, times, plan, out.get("path"), fmt)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(doc)
