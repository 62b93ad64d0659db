"""Property reports: named residual checks with a verdict, plus export."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field


@dataclass
class PropertyReport:
    """Residuals keyed by witness tuples; ``verdict`` is ``sup_residual <= tolerance``."""

    name: str
    tolerance: float
    residuals: list = field(default_factory=list)

    def add(self, witness, value):
        self.residuals.append((tuple(witness), float(value)))

    @property
    def sup_residual(self):
        return max((r for _, r in self.residuals), default=0.0)

    @property
    def verdict(self):
        return self.sup_residual <= self.tolerance

    @property
    def worst(self):
        if not self.residuals:
            return None
        return max(self.residuals, key=lambda item: item[1])[0]

    def to_dict(self):
        return {
            "name": self.name,
            "witnesses": [
                {"witness": [_jsonable(x) for x in w], "residual": _finite(r)}
                for w, r in self.residuals
            ],
            "sup_residual": _finite(self.sup_residual),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }

    def summary(self):
        mark = "PASS" if self.verdict else "FAIL"
        return f"{mark}  {self.name:<28} sup={self.sup_residual:.3e}  tol={self.tolerance:.1e}"


def _finite(x):
    return x if math.isfinite(x) else None


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float):
        return _finite(x)
    return x


def reports_to_json(reports, path=None, extra=None):
    doc = {"reports": [r.to_dict() for r in reports]}
    if extra:
        doc.update(extra)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def reports_to_csv(reports, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "sup_residual", "tolerance", "verdict"])
        for r in reports:
            w.writerow([r.name, repr(r.sup_residual), repr(r.tolerance), r.verdict])
