"""End-to-end verification pipeline and reproducible JSON reports.

run_verify enumerates a scenario's ball and conjugacy classes, estimates the
critical exponents (simple root, Hilbert form, first coordinate) and
entropies, samples the symmetric limit set and its box dimensions under the
three product metrics, then evaluates the sandwich and comparison checks:

- lower sandwich: 2*delta_1n <= dim_sym for strongly convex-cocompact
  scenarios, delta_1n <= dim_sym otherwise;
- upper sandwich: dim_sym <= delta_12;
- entropy comparisons h <= delta for both forms;
- scenario-specific exact identities (count-level ratio identities, and the
  invariant-plane residual for the cocycle family).

Inequality checks pass when margin >= -(combined stderr + 0.05); the exact
identities use their own fixed tolerance and no stderr slack.  The
delta_1n series is binned at twice the delta_12 width so the count-level
identities of the symmetric scenarios survive to the reported values
verbatim.

Reports serialize to canonical JSON: keys sorted, floats rounded to 12
significant digits, runtime excluded, so identical seeds and parameters
produce byte-identical files.
"""

from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import InputError
from .exponents import (ExponentEstimate, ball_truncation, critical_exponent,
                        count_series_from_values, entropy, estimate_to_dict)
from .limitset import (DimensionEstimate, box_dimension, dimension_to_dict,
                       sample_limit_set, METRICS)
from .linalg import epsilon_form, root_form
from .scenarios import build_scenario
from .words import Ball, ConjugacyClasses

DEFAULT_MAX_LEN = 10
DEFAULT_WORD_LEN = 12
DEFAULT_COUNT = 1000
DEFAULT_BIN = 0.25
DEFAULT_SCALES = 6
DEFAULT_BUDGET = 10_000_000
SLACK = 0.05               # estimator slack added to combined stderr
EXACT_TOL = 1e-6           # tolerance for count-level exact identities
COCYCLE_WORD_LEN = 26      # invariant-plane residual decays like e^(-gap)


@dataclass(frozen=True)
class VerificationReport:
    scenario: str
    params: dict
    delta12: ExponentEstimate
    delta1n: ExponentEstimate
    delta1: ExponentEstimate
    h12: ExponentEstimate
    h1n: ExponentEstimate
    boxdim_sym: DimensionEstimate
    boxdim_line: DimensionEstimate
    boxdim_dual: DimensionEstimate
    inequality_checks: tuple
    runtime_s: float
    versions: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c["pass"] for c in self.inequality_checks)


def _inequality(name: str, lhs, rhs, lhs_err: float, rhs_err: float) -> dict:
    margin = rhs - lhs
    budget = lhs_err + rhs_err + SLACK
    return {"name": name, "lhs": float(lhs), "rhs": float(rhs),
            "margin": float(margin), "pass": bool(margin >= -budget)}


def _equality(name: str, lhs, rhs, tol: float) -> dict:
    margin = tol - abs(lhs - rhs)
    return {"name": name, "lhs": float(lhs), "rhs": float(rhs),
            "margin": float(margin), "pass": bool(margin >= 0.0)}


def run_verify(scenario_name: str, overrides: dict | None = None) -> VerificationReport:
    """Full pipeline for one scenario; deterministic given seed and params."""
    overrides = dict(overrides or {})
    start = time.monotonic()

    scenario_keys = {k: overrides.pop(k) for k in
                     ("t", "psi", "t2", "psi2", "seed", "cocycle", "base")
                     if k in overrides}
    max_len = int(overrides.pop("max_len", DEFAULT_MAX_LEN))
    word_len = int(overrides.pop("word_len",
                                 COCYCLE_WORD_LEN if scenario_name == "cocycle-sl3"
                                 else DEFAULT_WORD_LEN))
    count = int(overrides.pop("count", DEFAULT_COUNT))
    bin_width = float(overrides.pop("bin", DEFAULT_BIN))
    scales = int(overrides.pop("scales", DEFAULT_SCALES))
    budget = int(overrides.pop("budget", DEFAULT_BUDGET))
    if overrides:
        raise InputError(f"unknown override keys: {sorted(overrides)}")

    scen = build_scenario(scenario_name, **scenario_keys)
    gs = scen.gs
    n = scen.n
    seed = scen.params["seed"]

    a12 = root_form(1, 2, n)
    a1n = root_form(1, n, n)
    e1 = epsilon_form(1, n)

    ball = Ball(gs, max_len, budget=budget)
    mu = ball.mu_all()
    delta12 = critical_exponent(count_series_from_values(a12(mu), bin_width),
                                truncation=ball_truncation(ball, a12))
    delta1n = critical_exponent(
        count_series_from_values(a1n(mu), 2.0 * bin_width),
        truncation=ball_truncation(ball, a1n))
    delta1 = critical_exponent(count_series_from_values(e1(mu), bin_width),
                               truncation=ball_truncation(ball, e1))

    classes = ConjugacyClasses(gs, max_len, budget=budget)
    h12 = entropy(classes, a12, bin_width)
    h1n = entropy(classes, a1n, 2.0 * bin_width)

    points = sample_limit_set(gs, word_len, count, seed=seed)
    boxdim_sym = box_dimension(points, METRICS["sym"], scales)
    boxdim_line = box_dimension(points, METRICS["line"], scales)
    boxdim_dual = box_dimension(points, METRICS["dual"], scales)

    checks = []
    if scen.convex_cocompact:
        checks.append(_inequality(
            "lower_sandwich_2delta1n_le_dim_sym",
            2.0 * delta1n.value, boxdim_sym.value,
            2.0 * delta1n.stderr, boxdim_sym.stderr))
    else:
        checks.append(_inequality(
            "lower_sandwich_delta1n_le_dim_sym",
            delta1n.value, boxdim_sym.value,
            delta1n.stderr, boxdim_sym.stderr))
    checks.append(_inequality(
        "upper_sandwich_dim_sym_le_delta12",
        boxdim_sym.value, delta12.value, boxdim_sym.stderr, delta12.stderr))
    checks.append(_inequality(
        "entropy_h12_le_delta12",
        h12.value, delta12.value, h12.stderr, delta12.stderr))
    checks.append(_inequality(
        "entropy_h1n_le_delta1n",
        h1n.value, delta1n.value, h1n.stderr, delta1n.stderr))

    for kind in scen.equality_checks:
        if kind == "two_delta1n_equals_delta12":
            checks.append(_equality(kind, 2.0 * delta1n.value, delta12.value,
                                    EXACT_TOL))
        elif kind == "delta1n_equals_half_delta12":
            checks.append(_equality(kind, delta1n.value,
                                    0.5 * delta12.value, EXACT_TOL))
        elif kind == "limit_lines_on_invariant_plane":
            residual = max(abs(float(p.line.vec[2])) for p in points)
            checks.append({"name": kind, "lhs": residual, "rhs": EXACT_TOL,
                           "margin": float(EXACT_TOL - residual),
                           "pass": bool(residual <= EXACT_TOL)})
        else:
            raise InputError(f"unknown scenario check {kind!r}")

    versions = {
        "package": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    return VerificationReport(
        scenario=scen.name, params=dict(scen.params),
        delta12=delta12, delta1n=delta1n, delta1=delta1,
        h12=h12, h1n=h1n,
        boxdim_sym=boxdim_sym, boxdim_line=boxdim_line, boxdim_dual=boxdim_dual,
        inequality_checks=tuple(checks),
        runtime_s=time.monotonic() - start,
        versions=versions)


# ---------------------------------------------------------------------------
# canonical serialization
# ---------------------------------------------------------------------------

def _canonical(obj):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def report_to_dict(report: VerificationReport) -> dict:
    """Canonical JSON-ready dict; runtime is excluded so identical seeds
    and parameters serialize byte-identically."""
    out = {
        "scenario": report.scenario,
        "params": report.params,
        "delta12": estimate_to_dict(report.delta12),
        "delta1n": estimate_to_dict(report.delta1n),
        "delta1": estimate_to_dict(report.delta1),
        "h12": estimate_to_dict(report.h12),
        "h1n": estimate_to_dict(report.h1n),
        "boxdim_sym": dimension_to_dict(report.boxdim_sym),
        "boxdim_line": dimension_to_dict(report.boxdim_line),
        "boxdim_dual": dimension_to_dict(report.boxdim_dual),
        "inequality_checks": list(report.inequality_checks),
        "versions": report.versions,
    }
    return _canonical(out)


def write_report(report: VerificationReport, path: str):
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
