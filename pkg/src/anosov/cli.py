"""Command-line front end: scenario pipelines and verification reports.

Subcommands::

    list-scenarios                      catalog names and descriptions
    ball       --scenario NAME          enumerate a ball, write mu CSV
    conjugacy  --scenario NAME          conjugacy classes, write lambda CSV
    exponent   --scenario NAME          critical exponent of a linear form
    entropy    --scenario NAME          entropy over conjugacy classes
    limit-set  --scenario NAME          sample the symmetric limit set (CSV)
    boxdim     --scenario NAME          box dimension of a limit sample
    hilbert    --count N                boundary comparison-ratio sweep (CSV)
    verify     --scenario NAME          full pipeline, checks, JSON report

Exit codes: 0 success, 1 input/configuration error, 2 numeric or resource
failure, 3 verification ran but a check failed.

Flags may come from --config (key=value lines); explicit flags win.  The
worker-count environment variable ANOSOV_WORKERS only sizes batch chunks,
never results.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .errors import AnosovError, InputError, NumericError, ResourceBudgetError
from .exponents import (ball_truncation, count_series_from_values,
                        critical_exponent, entropy, write_estimate_json)
from .hilbert import (GromovMetric, boundary_from_direction, boundary_point,
                      comparison_ratio, domain_center, ellipsoid,
                      write_pairs_csv)
from .limitset import (METRICS, box_dimension, sample_limit_set,
                       write_dimension_json, write_points_csv)
from .linalg import LinearForm, epsilon_form, root_form
from .report import (DEFAULT_BIN, DEFAULT_BUDGET, DEFAULT_COUNT,
                     DEFAULT_MAX_LEN, DEFAULT_SCALES, DEFAULT_WORD_LEN,
                     run_verify, write_report)
from .scenarios import build_scenario, list_scenarios, parse_config
from .words import Ball, ConjugacyClasses, write_ball_csv, write_classes_csv


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="anosov",
                     description="critical exponents, entropies and "
                                 "limit-set dimensions for matrix groups")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, *, scenario=True, needs_out=False):
        p = sub.add_parser(name, help=help_text)
        if scenario:
            p.add_argument("--scenario", help="catalog scenario name")
            p.add_argument("--config", help="key=value config file")
            p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None,
                       required=needs_out, help="output file")
        return p

    sub.add_parser("list-scenarios", help="print the scenario catalog")

    p = add("ball", "enumerate a word ball and export Cartan data")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)

    p = add("conjugacy", "enumerate conjugacy classes and export Jordan data")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)

    for name, help_text in (("exponent", "critical exponent of a linear form"),
                            ("entropy", "entropy over conjugacy classes")):
        p = add(name, help_text)
        p.add_argument("--max-len", type=int, default=None)
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--bin", type=float, default=None)
        p.add_argument("--form", default=None,
                       help="a12 | a1n | e1 | custom:c1,...,cn")

    p = add("limit-set", "sample the symmetric limit set")
    p.add_argument("--word-len", type=int, default=None)
    p.add_argument("--count", type=int, default=None)

    p = add("boxdim", "box dimension of a limit sample")
    p.add_argument("--word-len", type=int, default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--scales", type=int, default=None)
    p.add_argument("--metric", default=None,
                   choices=["sym", "line", "dual", "gromov"])

    p = add("hilbert", "comparison-ratio sweep over boundary pairs",
            scenario=False)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--count", type=int, default=None)

    p = add("verify", "full verification pipeline")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--word-len", type=int, default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--bin", type=float, default=None)
    p.add_argument("--scales", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--report", default=None, help="report JSON path")
    return parser


def _setting(args, cfg: dict, key: str, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in cfg:
        return cfg[key]
    return default


def _load_scenario(args, cfg: dict):
    name = getattr(args, "scenario", None) or cfg.get("name")
    if not name:
        raise InputError("a scenario is required (--scenario or config name=)")
    kwargs = {k: cfg[k] for k in ("t", "psi", "t2", "psi2", "cocycle", "base")
              if k in cfg}
    seed = _setting(args, cfg, "seed", 0)
    return build_scenario(name, seed=seed, **kwargs)


def _resolve_form(spec: str, n: int) -> LinearForm:
    if spec == "a12":
        return root_form(1, 2, n)
    if spec == "a1n":
        return root_form(1, n, n)
    if spec == "e1":
        return epsilon_form(1, n)
    if spec.startswith("custom:"):
        try:
            coeffs = [float(c) for c in spec[len("custom:"):].split(",")]
        except ValueError:
            raise InputError(f"bad custom form {spec!r}") from None
        if len(coeffs) != n:
            raise InputError(f"custom form needs {n} coefficients")
        return LinearForm(coeffs, name="custom")
    raise InputError(f"unknown form {spec!r}")


def _print_estimate(label: str, est):
    tail = "" if not est.low_confidence else "  [low confidence]"
    print(f"{label}: {est.value:.6f} +/- {est.stderr:.6f}  "
          f"window [{est.window[0]:g}, {est.window[1]:g}]  "
          f"count {est.count_at_hi}{tail}")


def _cmd_ball(args, cfg) -> int:
    scen = _load_scenario(args, cfg)
    ball = Ball(scen.gs, int(_setting(args, cfg, "max_len", DEFAULT_MAX_LEN)),
                budget=int(_setting(args, cfg, "budget", DEFAULT_BUDGET)))
    if args.out:
        rows = write_ball_csv(ball, args.out)
        print(f"{rows} entries -> {args.out}")
    else:
        print(f"{ball.total} entries up to length {ball.max_len}")
    return 0


def _cmd_conjugacy(args, cfg) -> int:
    scen = _load_scenario(args, cfg)
    classes = ConjugacyClasses(
        scen.gs, int(_setting(args, cfg, "max_len", DEFAULT_MAX_LEN)),
        budget=int(_setting(args, cfg, "budget", DEFAULT_BUDGET)))
    if args.out:
        rows = write_classes_csv(classes, args.out)
        print(f"{rows} classes -> {args.out}")
    else:
        print(f"{classes.total} classes up to length {classes.max_len}")
    return 0


def _growth_estimate(args, cfg, classes_mode: bool):
    scen = _load_scenario(args, cfg)
    gs = scen.gs
    form = _resolve_form(str(_setting(args, cfg, "form", "a12")), scen.n)
    bin_width = float(_setting(args, cfg, "bin", DEFAULT_BIN))
    max_len = int(_setting(args, cfg, "max_len", DEFAULT_MAX_LEN))
    budget = int(_setting(args, cfg, "budget", DEFAULT_BUDGET))
    if classes_mode:
        classes = ConjugacyClasses(gs, max_len, budget=budget)
        return form, entropy(classes, form, bin_width)
    ball = Ball(gs, max_len, budget=budget)
    cs = count_series_from_values(form(ball.mu_all()), bin_width)
    return form, critical_exponent(cs, truncation=ball_truncation(ball, form))


def _cmd_exponent(args, cfg) -> int:
    form, est = _growth_estimate(args, cfg, classes_mode=False)
    _print_estimate(f"critical exponent ({form.name})", est)
    if args.out:
        write_estimate_json(est, args.out, form)
    return 0


def _cmd_entropy(args, cfg) -> int:
    form, est = _growth_estimate(args, cfg, classes_mode=True)
    _print_estimate(f"entropy ({form.name})", est)
    if args.out:
        write_estimate_json(est, args.out, form)
    return 0


def _sample(args, cfg):
    scen = _load_scenario(args, cfg)
    word_len = int(_setting(args, cfg, "word_len", DEFAULT_WORD_LEN))
    count = int(_setting(args, cfg, "count", DEFAULT_COUNT))
    points = sample_limit_set(scen.gs, word_len, count,
                              seed=scen.params["seed"])
    return scen, points


def _cmd_limit_set(args, cfg) -> int:
    scen, points = _sample(args, cfg)
    if args.out:
        rows = write_points_csv(points, args.out, scen.gs)
        print(f"{rows} limit points -> {args.out}")
    else:
        print(f"{len(points)} limit points sampled")
    return 0


def _cmd_boxdim(args, cfg) -> int:
    scen, points = _sample(args, cfg)
    metric_name = str(_setting(args, cfg, "metric", "sym"))
    scales = int(_setting(args, cfg, "scales", DEFAULT_SCALES))
    if metric_name == "gromov":
        dom = ellipsoid(scen.n)
        base = domain_center(dom)
        boundary = [boundary_point(dom, p.line) for p in points]
        est = box_dimension(boundary, GromovMetric(dom, base), scales)
    else:
        est = box_dimension(points, METRICS[metric_name], scales)
    print(f"box dimension ({metric_name}): {est.value:.4f} +/- {est.stderr:.4f}"
          f"  window 2^-{est.window[0]}..2^-{est.window[1]}"
          + ("  [low confidence]" if est.low_confidence else ""))
    if args.out:
        write_dimension_json(est, args.out)
    return 0


def _cmd_hilbert(args, cfg) -> int:
    count = int(_setting(args, cfg, "count", 10_000))
    seed = int(_setting(args, cfg, "seed", 0) or 0)
    dom = ellipsoid(3)
    base = domain_center(dom)
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=(count, 2))
    pairs = [(boundary_from_direction(dom, [math.cos(a), math.sin(a)]),
              boundary_from_direction(dom, [math.cos(b), math.sin(b)]))
             for a, b in angles]
    max_ratio, by_band = comparison_ratio(dom, base, pairs)
    print(f"max d_x / sqrt(d d*) over {count} pairs: {max_ratio:.6f}")
    for row in by_band:
        print(f"  band {row['band']:2d}  (d <= {row['eps_hi']:.3e})  "
              f"count {row['count']:6d}  max ratio {row['max_ratio']:.6f}")
    if args.out:
        rows = write_pairs_csv(dom, base, pairs, args.out)
        print(f"{rows} pairs -> {args.out}")
    return 0


def _cmd_verify(args, cfg) -> int:
    name = getattr(args, "scenario", None) or cfg.get("name")
    if not name:
        raise InputError("a scenario is required (--scenario or config name=)")
    overrides = {}
    for key in ("t", "psi", "t2", "psi2", "cocycle", "base"):
        if key in cfg:
            overrides[key] = cfg[key]
    for key, default in (("seed", 0), ("max_len", None), ("word_len", None),
                         ("count", None), ("bin", None), ("scales", None),
                         ("budget", None)):
        value = _setting(args, cfg, key, default)
        if value is not None:
            overrides[key] = value
    report = run_verify(name, overrides)
    print(f"scenario {report.scenario}  params {report.params}")
    _print_estimate("delta_12 ", report.delta12)
    _print_estimate("delta_1n ", report.delta1n)
    _print_estimate("delta_1  ", report.delta1)
    _print_estimate("h_12     ", report.h12)
    _print_estimate("h_1n     ", report.h1n)
    for label, est in (("sym ", report.boxdim_sym),
                       ("line", report.boxdim_line),
                       ("dual", report.boxdim_dual)):
        print(f"boxdim {label}: {est.value:.4f} +/- {est.stderr:.4f}"
              + ("  [low confidence]" if est.low_confidence else ""))
    for check in report.inequality_checks:
        state = "PASS" if check["pass"] else "FAIL"
        print(f"[{state}] {check['name']}: lhs {check['lhs']:.6f}  "
              f"rhs {check['rhs']:.6f}  margin {check['margin']:.6f}")
    if getattr(args, "report", None):
        write_report(report, args.report)
        print(f"report -> {args.report}")
    return 0 if report.all_passed else 3


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = parse_config(args.config) if getattr(args, "config", None) else {}
        if args.command == "list-scenarios":
            for name, description in list_scenarios():
                print(f"{name:18s} {description}")
            return 0
        handler = {
            "ball": _cmd_ball,
            "conjugacy": _cmd_conjugacy,
            "exponent": _cmd_exponent,
            "entropy": _cmd_entropy,
            "limit-set": _cmd_limit_set,
            "boxdim": _cmd_boxdim,
            "verify": _cmd_verify,
            "hilbert": _cmd_hilbert,
        }[args.command]
        return handler(args, cfg)
    except (InputError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, ResourceBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AnosovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
