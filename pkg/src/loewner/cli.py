"""Command-line entry point: ``python -m loewner <command> ...``.

Exit status is 0 when every computed verdict holds, 2 when some verdict is
false and 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import expr as E
from .chains import affine_chain
from .config import SCHEMA, GridSpec, ScenarioConfig, load_config
from .demos import demo_catalog, get_demo
from .errors import ConfigError, LoewnerError
from .evolution import IntegratorSettings, family, trajectory
from .fields import make_field
from .generators import classify, generator_spec, koenigs
from .holo import polar_grid
from .reports import reports_to_csv, reports_to_json
from .suite import CheckPlan, run_checks, verdict_table

OK, ERROR, FALSE_VERDICT = 0, 1, 2


def fmt_number(c, digits=10):
    """Short form of a complex number: ``-2``, ``0.5``, ``1+0.5i``."""
    if c is None:
        return "none"
    c = complex(c)

    def one(x):
        s = f"{x:.{digits}g}"
        return "0" if s in ("-0", "0") else s

    scale = max(1.0, abs(c))
    re = 0.0 if abs(c.real) <= 1e-9 * scale else c.real
    im = 0.0 if abs(c.imag) <= 1e-9 * scale else c.imag
    if im == 0.0:
        return one(re)
    if re == 0.0:
        return f"{one(im)}i"
    sign = "-" if im < 0 else "+"
    return f"{one(re)}{sign}{one(abs(im))}i"


def _num(x):
    return repr(float(x))


def _pair(c):
    c = complex(c)
    return [c.real, c.imag]


def _dump(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument handling -----------------------------------------------------------


def _floats(text, flag):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(flag, f"expected comma-separated numbers, got {text!r}") from None


def _scenario(args, need_field=True):
    """Merge config file, demo and command-line flags (flags win)."""
    cfg = load_config(args.config) if args.config else None
    plan = cfg.plan if cfg else None
    field = cfg.field if cfg else None
    if getattr(args, "demo", None):
        try:
            d = get_demo(args.demo)
        except KeyError as exc:
            raise ConfigError("--demo", str(exc.args[0])) from None
        field, plan = d.field, CheckPlan.from_demo(d)
    if args.expr:
        ast = E.parse_expr(args.expr, arity=2)
        kind = "general" if E.uses_t(ast.ast) else "autonomous"
        field = {"kind": kind, "expr": args.expr}
    if field is None and need_field:
        raise ConfigError("field", "give --expr, --demo or --config")
    settings = cfg.settings if cfg else IntegratorSettings()
    if args.tol is not None:
        if args.tol <= 0:
            raise ConfigError("--tol", "tolerance must be positive")
        settings = IntegratorSettings(args.tol, min(settings.abs_tol, 1e-2 * args.tol),
                                      settings.max_step)
    grid = GridSpec.parse(args.grid) if args.grid else (cfg.grid if cfg else GridSpec())
    times = _floats(args.times, "--times") if args.times else (
        cfg.times if cfg else ScenarioConfig.times)
    if any(t < 0 for t in times):
        raise ConfigError("--times", "times must be non-negative")
    out = args.out or (cfg.out_path if cfg else None)
    fmt = args.format or (cfg.out_format if cfg else "json")
    return ScenarioConfig(field or {}, settings, grid, tuple(times), plan, out, fmt)


# -- commands ------------------------------------------------------------------


def cmd_classify(args):
    sc = _scenario(args)
    if sc.field.get("kind") != "autonomous":
        raise ConfigError("--expr", "classify takes an expression in z only")
    rep = classify(E.parse_expr(sc.field["expr"]))
    print(f"{rep.kind}, dw={fmt_number(rep.dw)}, spectral={fmt_number(rep.spectral)}")
    if sc.out_path:
        doc = {
            "schema": SCHEMA,
            "command": "classify",
            "expr": sc.field["expr"],
            "kind": rep.kind,
            "dw": None if rep.dw is None else _pair(rep.dw),
            "spectral": _pair(rep.spectral),
            "boundary_repelling": [[_pair(x), _pair(b)] for x, b in rep.boundary_repelling],
            "angular_derivative": rep.angular_derivative,
        }
        _emit(_dump(doc), sc.out_path)
    return OK


def cmd_koenigs(args):
    sc = _scenario(args)
    if sc.field.get("kind") != "autonomous":
        raise ConfigError("--expr", "koenigs takes an expression in z only")
    spec = generator_spec(E.parse_expr(sc.field["expr"]))
    h = koenigs(spec, check=False)
    res = h.residual(polar_grid([0.8]))
    z = sc.grid.points()
    ok = res <= 1e-8
    print(f"{h.case}, dw={fmt_number(spec.dw)}, residual={res:.3e} "
          f"({'PASS' if ok else 'FAIL'} at 1e-8)")
    vals = h(z)
    if sc.out_format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re_z", "im_z", "re_h", "im_h"])
        for zz, v in zip(z, vals):
            w.writerow([_num(zz.real), _num(zz.imag), _num(v.real), _num(v.imag)])
        text = buf.getvalue()
    else:
        text = _dump({
            "schema": SCHEMA, "command": "koenigs", "expr": sc.field["expr"],
            "case": h.case, "residual": res,
            "values": [[_pair(zz), _pair(v)] for zz, v in zip(z, vals)],
        })
    if sc.out_path:
        _emit(text, sc.out_path)
    return OK if ok else FALSE_VERDICT


def cmd_evolve(args):
    sc = _scenario(args)
    F = make_field(sc.field)
    fam = family(F, sc.settings)
    times = sorted(set(sc.times))
    s = times[0]
    tr = trajectory(fam, s, times, sc.grid.points())
    if sc.out_format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "t", "re_z0", "im_z0", "re_phi", "im_phi"])
        for t, vals in tr.samples:
            for z0, v in zip(tr.z0, vals):
                w.writerow([_num(s), _num(t), _num(z0.real), _num(z0.imag),
                            _num(v.real), _num(v.imag)])
        text = buf.getvalue()
    else:
        text = _dump({
            "schema": SCHEMA, "command": "evolve", "field": sc.field, "s": s,
            "samples": [{"t": t, "values": [[_pair(z0), _pair(v)] for z0, v in zip(tr.z0, vals)]}
                        for t, vals in tr.samples],
        })
    if sc.out_path:
        _emit(text, sc.out_path)
        print(f"evolved {len(tr.z0)} points from s={s:g} to t={times[-1]:g}; wrote {sc.out_path}")
    else:
        sys.stdout.write(text)
    return OK


def cmd_chain(args):
    sc = _scenario(args)
    F = make_field(sc.field)
    chain = affine_chain(F)
    z = sc.grid.points()
    rows = [(s, zz, v) for s in sc.times for zz, v in zip(z, np.atleast_1d(chain.f(s, z)))]
    if sc.out_format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "re_z", "im_z", "re_f", "im_f"])
        for s, zz, v in rows:
            w.writerow([_num(s), _num(zz.real), _num(zz.imag), _num(v.real), _num(v.imag)])
        text = buf.getvalue()
    else:
        text = _dump({
            "schema": SCHEMA, "command": "chain", "field": sc.field, "case": chain.case,
            "lambda": [[s, _pair(chain.lam(s))] for s in sc.times],
            "values": [[s, _pair(zz), _pair(v)] for s, zz, v in rows],
        })
    print(f"{chain.case} chain; "
          + ", ".join(f"lambda({s:g})={fmt_number(chain.lam(s), 8)}" for s in sc.times))
    if sc.out_path:
        _emit(text, sc.out_path)
    return OK


def cmd_check(args):
    sc = _scenario(args)
    F = make_field(sc.field)
    plan = sc.plan or CheckPlan.default()
    reports = run_checks(F, plan, sc.settings, sc.grid.points())
    print(verdict_table(reports))
    if sc.out_path:
        if sc.out_format == "csv":
            reports_to_csv(reports, sc.out_path)
        else:
            reports_to_json(reports, sc.out_path, {"schema": SCHEMA, "field": sc.field})
    return OK if all(r.verdict for r in reports) else FALSE_VERDICT


def cmd_demo(args):
    if not args.name:
        for d in demo_catalog():
            print(f"{d.name:<24} {d.description}")
        return OK
    try:
        d = get_demo(args.name)
    except KeyError as exc:
        raise ConfigError("demo", str(exc.args[0])) from None
    doc = {
        "schema": SCHEMA,
        "field": d.field,
        "plan": {"times": d.times, "pairs": d.pairs, "s_samples": d.s_samples,
                 "triples": d.triples, "u_samples": d.u_samples, "automorphic": d.automorphic},
    }
    _emit(_dump(doc), args.out)
    return OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share the generic error status
        self.print_usage(sys.stderr)
        self.exit(ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--expr", metavar="STRING")
    common.add_argument("--tol", type=float, metavar="REAL", help="integrator relative tolerance")
    common.add_argument("--grid", metavar="R1,R2,.../ANGLES")
    common.add_argument("--times", metavar="T1,T2,...")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=("csv", "json"))

    p = _Parser(prog="loewner", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, hlp in (
        ("evolve", cmd_evolve, "integrate phi_{s,t} on a grid"),
        ("classify", cmd_classify, "type, Denjoy-Wolff point and spectral value of a generator"),
        ("koenigs", cmd_koenigs, "Koenigs function of a generator"),
        ("chain", cmd_chain, "affine Loewner chain of a splitting field"),
        ("check", cmd_check, "run the property battery"),
    ):
        sp = sub.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("--demo", metavar="NAME")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("demo", help="list demos, or print one as a config")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_demo)
    return p


_VALUE_FLAGS = ("--expr", "--times", "--grid", "--tol")


def _glue_values(argv):
    # let values start with "-" (e.g. --expr "-z*(2+z)")
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_values(argv))
    try:
        return args.func(args)
    except (LoewnerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
