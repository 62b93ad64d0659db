"""The standard battery of property reports for one field."""

from __future__ import annotations

from dataclasses import dataclass

from .chains import (
    affine_chain,
    chain_compat_report,
    chain_pde_report,
    chain_univalence,
    range_inclusion_report,
)
from .evolution import (
    IntegratorSettings,
    commuting_report,
    ef_axiom_report,
    evolve,
    family,
    isometry_report,
    reversing_field_identity,
    reversing_report,
    schwarz_pick_report,
    transport_residual,
    univalence_check,
)
from .fields import splitting_residual
from .reports import PropertyReport


@dataclass(frozen=True)
class CheckPlan:
    times: tuple
    pairs: tuple
    s_samples: tuple
    triples: tuple
    u_samples: tuple
    automorphic: bool = False

    @classmethod
    def from_demo(cls, demo):
        return cls(demo.times, demo.pairs, demo.s_samples, demo.triples, demo.u_samples,
                   demo.automorphic)

    @classmethod
    def default(cls):
        from .demos import Demo

        return cls.from_demo(Demo("default", "", {}))

    @property
    def horizon(self):
        return max(max(self.times), max(t for pair in self.pairs for _, t in pair))

    @property
    def intervals(self):
        seen = []
        for pair in self.pairs:
            for iv in pair:
                if iv not in seen:
                    seen.append(iv)
        return seen


def _flag(name, ok, witness=()):
    rep = PropertyReport(name, 0.0)
    rep.add(witness, 0.0 if ok else 1.0)
    return rep


def run_checks(F, plan, settings=None, grid=None):
    """Return the list of reports in a fixed order."""
    fam = family(F, settings or IntegratorSettings())
    T = plan.horizon
    reports = [
        ef_axiom_report(fam, plan.times, grid),
        transport_residual(fam, plan.s_samples, T, grid),
    ]
    res, _ = splitting_residual(F, sorted(set(plan.times) | set(plan.s_samples)), grid)
    split = PropertyReport("splitting", 1e-7)
    split.add(("normalized bracket",), res)
    reports.append(split)
    reports.append(commuting_report(fam, plan.pairs, grid))
    reports.append(reversing_report(fam, plan.triples, grid))
    reports.append(reversing_field_identity(fam, 0.0, T, plan.u_samples, grid))
    reports.append(schwarz_pick_report(fam, plan.intervals))
    if plan.automorphic:
        reports.append(isometry_report(fam, plan.intervals))
    dmin, wind = univalence_check(lambda z: evolve(fam, 0.0, T, z), grid)
    reports.append(_flag("univalence", dmin > 1e-12 and wind == 1, (0.0, T, dmin, wind)))
    if split.verdict:
        chain = affine_chain(F)
        reports.append(chain_compat_report(chain, fam, plan.intervals, grid))
        chain_s = [s for s in plan.s_samples if s >= 2e-4]
        reports.append(chain_pde_report(chain, F, chain_s, grid))
        reports.append(range_inclusion_report(chain, plan.intervals))
        reports.append(_flag("chain_univalence",
                             chain_univalence(chain, T, grid) > 1e-12, (T,)))
    return reports


def all_pass(reports):
    return all(r.verdict for r in reports)


def verdict_table(reports):
    return "\n".join(r.summary() for r in reports)

