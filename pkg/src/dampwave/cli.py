"""Command line entry point: ``dampwave {exponents,sweep,fit,verify}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__


def _cmd_exponents(args) -> int:
    from .exponents import (DataClass, ModelParams, classify_regime, fujita_exponent,
                            mu_zero, predicted_lifespan, strauss_exponent)
    n, mu = args.n, args.mu
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["quantity", "value"])
    w.writerow(["p_F(n)", repr(fujita_exponent(n))])
    w.writerow(["p_S(n+mu)", repr(strauss_exponent(n + mu))])
    w.writerow(["mu_0(n)", repr(mu_zero(n))])
    w.writerow(["regime", classify_regime(n, mu).value])
    for p in args.p or []:
        for dc in DataClass:
            try:
                pred = predicted_lifespan(ModelParams(n, mu, p), dc, extended=args.extended)
                w.writerow([f"lifespan[p={p},{dc.value}]",
                            f"{pred.form.value}:{pred.exponent!r}"
                            + ("" if pred.theorem_backed else ":conjectural")])
            except ValueError as exc:
                w.writerow([f"lifespan[p={p},{dc.value}]", f"n/a ({exc})"])
    return 0


def _cmd_sweep(args) -> int:
    from .sweep import load_config, run_sweep, write_outputs
    with open(args.config) as fh:
        cfg = load_config(fh.read(), base_dir=os.path.dirname(os.path.abspath(args.config)))
    if args.workers is not None:
        from dataclasses import replace
        cfg = replace(cfg, workers=args.workers)
    out_dir = args.out or cfg.output_dir
    records = run_sweep(cfg)
    paths = write_outputs(records, out_dir, cfg.name, cfg, figure=not args.no_figure)
    for rec in records:
        print(f"eps={rec.epsilon:.6g} T={rec.T_num:.6g} status={rec.status.value} "
              f"converged={rec.converged}")
    for key, path in sorted(paths.items()):
        print(f"wrote {key}: {path}")
    return 0


def _cmd_fit(args) -> int:
    from .sweep import (InsufficientDataError, fit_exp_law, fit_power_law, read_records,
                        select_model)
    records = read_records(args.records)
    try:
        if args.model == "power":
            doc = fit_power_law(records).to_dict()
        elif args.model in ("exp-half", "exp-two-thirds"):
            doc = fit_exp_law(records, 0.5 if args.model == "exp-half" else 2 / 3).to_dict()
        else:
            doc = select_model(records).to_dict()
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return 0


# -- verify -----------------------------------------------------------------


def _check(rows, suite, name, value, ok, note=""):
    rows.append([suite, name, repr(float(value)), "PASS" if ok else "FAIL", note])


def _suite_kernel(rows):
    from .duhamel import RadialSource, complete_rho_integral, evaluate_L
    from .wave_kernel import Constant, spherical_mean_radial
    rng = np.random.default_rng(0)
    r = rng.uniform(0, 5, 20)
    t = rng.uniform(0, 5, 20)
    err = np.max(np.abs(spherical_mean_radial(Constant(), r, t) - t))
    _check(rows, "kernel", "R(1)=t max error", err, err < 1e-8)
    lam, rr = rng.uniform(0.01, 5, 100), rng.uniform(0.01, 5, 100)
    err = max(abs(complete_rho_integral(a, b) - math.pi / 2) for a, b in zip(lam, rr))
    _check(rows, "kernel", "complete rho integral = pi/2", err, err < 1e-8)
    bumpy = RadialSource(lambda l, s: np.exp(-1.0 / np.maximum(1 - (l / (s + 1)) ** 2, 1e-300))
                         * np.cos(s) ** 2, 1.0)
    worst = 0.0
    for ri, ti in [(0.0, 2.0), (0.6, 2.0), (1.5, 3.0), (3.2, 3.0)]:
        a = evaluate_L(bumpy, 1.5, ri, ti, "disc", n_tau=24)
        b = evaluate_L(bumpy, 1.5, ri, ti, "split", n_tau=24)
        worst = max(worst, float(abs(a - b) / abs(b)))
    _check(rows, "kernel", "disc vs L1+L2 relative", worst, worst < 1e-4)


def _suite_decay(rows, figure_dir=None):
    from .initial_data import integrals, make_case_A, make_case_B
    from .wave_kernel import DECAY_QUADRATURE, free_solution_radial, verify_decay_lemma
    A = make_case_A(1.0)
    t = np.array([101.0, 150.0, 300.0])
    r = t - 100.0
    u = free_solution_radial(A, r, t)
    scaled = 2 * math.pi * np.sqrt((t + r) * (t - r)) * u / integrals(A).int_f_plus_g
    dev = float(np.max(np.abs(scaled - 1)))
    _check(rows, "decay", "case A leading ratio at t-r=100k", dev, dev < 0.02)
    rep = verify_decay_lemma(A, *np.meshgrid(np.linspace(0, 20, 6), np.linspace(24, 40, 5)))
    _check(rows, "decay", "case A remainder constant", rep.c_half, rep.passed)
    for sign in ("PosF", "NegIntF"):
        B = make_case_B(1.0, sign)
        int_f = integrals(B).int_f
        u = free_solution_radial(B, 0.0, 30.0, DECAY_QUADRATURE)
        ratio = float(u / (-30.0 * int_f / (2 * math.pi * 30.0**3)))
        _check(rows, "decay", f"case B {sign} leading ratio at t-r=30k", ratio,
               abs(ratio - 1) < 0.05)
    if figure_dir:
        from .plotting import decay_figure
        ts = np.geomspace(4, 200, 20)
        sc = 2 * math.pi * ts * free_solution_radial(A, 0.0, ts)
        decay_figure(ts, sc, "2 pi sqrt((t+r)(t-r)) u_L", os.path.join(figure_dir, "decay_caseA.png"))


def _suite_duhamel(rows):
    from .duhamel import RadialSource, WeightSpec, apriori_ratio, weight
    for p in (1.5, 2.0):
        V = RadialSource(lambda l, s, p=p: 1.0 / weight(WeightSpec(1, 1.0, p), l, s), 1.0)
        vals = [apriori_ratio(V, p, T) for T in (10.0, 40.0, 160.0)]
        band = max(vals) / min(vals)
        _check(rows, "duhamel", f"a-priori ratio band p={p}", band, band <= 3.0,
               ";".join(f"{v:.4g}" for v in vals))


def _suite_slicing(rows):
    from .functional_ode import SlicingVariant, slicing_iterate
    for var in SlicingVariant:
        res = slicing_iterate(1.0, 0.1, 40, var)
        a0 = 0 if var is SlicingVariant.A else 1
        closed = all(s.a == (a0 + 2) * 2**s.j - 2 for s in res.states)
        _check(rows, "slicing", f"{var.value} a_j closed form", float(closed), closed)
        _check(rows, "slicing", f"{var.value} lower bound j<=40", res.q_limit, res.bound_holds)


_SUITES = {"kernel": _suite_kernel, "decay": _suite_decay, "duhamel": _suite_duhamel,
           "slicing": _suite_slicing}


def _cmd_verify(args) -> int:
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    rows = []
    for name in names:
        if name == "decay":
            _suite_decay(rows, args.out)
        else:
            _SUITES[name](rows)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["suite", "check", "value", "result", "note"])
    w.writerows(rows)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "verify.csv"), "w") as fh:
            cw = csv.writer(fh, lineterminator="\n")
            cw.writerow(["suite", "check", "value", "result", "note"])
            cw.writerows(rows)
    return 0 if all(r[3] == "PASS" for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dampwave", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("exponents", help="critical exponents and lifespan predictions")
    e.add_argument("--n", type=int, default=2)
    e.add_argument("--mu", type=float, default=2.0)
    e.add_argument("--p", type=float, action="append", help="repeatable")
    e.add_argument("--extended", action="store_true",
                   help="allow the conjectural tables outside n=2, mu=2")
    e.set_defaults(func=_cmd_exponents)

    s = sub.add_parser("sweep", help="run an epsilon sweep from a config file")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (overrides the config)")
    s.add_argument("--workers", type=int)
    s.add_argument("--no-figure", action="store_true")
    s.set_defaults(func=_cmd_sweep)

    f = sub.add_parser("fit", help="fit lifespan laws to a records CSV")
    f.add_argument("records")
    f.add_argument("--model", choices=("select", "power", "exp-half", "exp-two-thirds"),
                   default="select")
    f.add_argument("--out", help="write the fit JSON here")
    f.set_defaults(func=_cmd_fit)

    v = sub.add_parser("verify", help="run the kernel / decay / duhamel / slicing checks")
    v.add_argument("--suite", choices=("all", *_SUITES), default="all")
    v.add_argument("--out", help="directory for verify.csv and figures")
    v.set_defaults(func=_cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
