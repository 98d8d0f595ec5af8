"""Growth-rate estimation from enumerated Cartan and Jordan data.

The critical exponent of a linear form phi is the exponential growth rate of
N(R) = #{gamma : phi(mu(gamma)) <= R}; the entropy is the analogous rate over
conjugacy classes with phi(lambda(gamma)).  Both are estimated the same way:

1. count N at thresholds R_k = k * bin ("up to the largest observed value"),
2. drop thresholds above vmax - truncation (truncation = the largest
   generator phi-value, since a word-length ball is only complete up to a
   phi-range shortened by roughly one letter),
3. drop leading thresholds with N < 10 (small-count noise),
4. least-squares slope of log N against k over the surviving window,
   divided by bin once at the end.

Counts are exact integers (a half-open comparison with a tiny deterministic
slack), so any chunked or parallel aggregation merges to identical series.
The slope is regressed against the integer index k rather than R_k and only
divided by bin at the end, so rescaling (phi, bin) -> (t*phi, t*bin) with
identical counts changes the estimate by exactly 1/t.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .linalg import CartanVector, LinearForm
from .words import ConjClassEntry

DEFAULT_BIN = 0.25
MIN_WINDOW_COUNT = 10   # smallest N_k admitted to the regression window
MIN_WINDOW_BINS = 6     # fewer surviving thresholds -> low-confidence tag
INDEX_SLACK = 1e-9      # deterministic slack in threshold index arithmetic


@dataclass(frozen=True)
class CountSeries:
    """Cumulative counts N_k = #{values <= k*bin} for k = 1..K."""

    thresholds: np.ndarray
    counts: np.ndarray
    bin: float
    vmax: float
    total: int

    def __post_init__(self):
        if len(self.thresholds) != len(self.counts) or len(self.counts) == 0:
            raise InputError("thresholds and counts must align and be nonempty")
        if np.any(np.diff(self.counts) < 0):
            raise InputError("counts must be nondecreasing")


@dataclass(frozen=True)
class ExponentEstimate:
    """A slope estimate with its regression window and quality tags."""

    value: float
    stderr: float
    window: tuple
    count_at_hi: int
    method: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def low_confidence(self) -> bool:
        return "low-confidence" in self.method or "degenerate" in self.method


def _values_array(entries, form: LinearForm | None) -> np.ndarray:
    """phi-values from an (N,n) array, CartanVectors, or entry objects."""
    if isinstance(entries, np.ndarray) and entries.ndim == 2:
        if form is None:
            raise InputError("a linear form is required for vector input")
        return form(entries)
    vals = []
    for item in entries:
        if isinstance(item, (int, float)):
            vals.append(float(item))
            continue
        if isinstance(item, ConjClassEntry):
            item = item.lam
        elif hasattr(item, "mu"):
            item = item.mu
        if form is None:
            raise InputError("a linear form is required for vector input")
        vals.append(float(form(item)))
    if not vals:
        raise InputError("empty entry stream")
    return np.array(vals)


def count_series_from_values(values: np.ndarray, bin: float) -> CountSeries:
    """Exact cumulative counts of `values` at thresholds bin, 2*bin, ..."""
    if bin <= 0:
        raise InputError("bin width must be positive")
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InputError("empty entry stream")
    if not np.all(np.isfinite(values)):
        raise InputError("nonfinite form values")
    vmax = float(values.max())
    k_all = max(1, int(math.floor(vmax / bin + INDEX_SLACK)))
    thresholds = bin * np.arange(1, k_all + 1)
    ordered = np.sort(values)
    slack = INDEX_SLACK * bin
    counts = np.searchsorted(ordered, thresholds + slack, side="right")
    return CountSeries(thresholds=thresholds, counts=counts.astype(np.int64),
                       bin=float(bin), vmax=vmax, total=int(values.size))


def count_series(entries, form: LinearForm | None = None,
                 bin: float = DEFAULT_BIN) -> CountSeries:
    """CountSeries of phi-values over ball or class entries.

    `entries` may be an (N, n) array of Cartan/Jordan rows (then `form` is
    required), or any iterable of CartanVectors, BallEntry, ConjClassEntry,
    or plain numbers.
    """
    return count_series_from_values(_values_array(entries, form), bin)


def _degenerate(cs: CountSeries, reason: str) -> ExponentEstimate:
    return ExponentEstimate(
        value=0.0, stderr=0.0, window=(0.0, 0.0),
        count_at_hi=int(cs.counts[-1]), method=f"window-lsq/{reason}",
        diagnostics={"total": cs.total})


def critical_exponent(cs: CountSeries, truncation: float = 0.0) -> ExponentEstimate:
    """Least-squares growth rate of a count series over its trusted window.

    `truncation` shortens the top of the window by the given phi-range
    (pass the maximum generator phi-value when the series came from a
    word-length ball).  Too-short or non-growing windows yield estimates
    tagged low-confidence or degenerate rather than an exception.
    """
    if truncation < 0:
        raise InputError("truncation must be nonnegative")
    k_all = len(cs.counts)
    k_hi = min(k_all, int(math.floor((cs.vmax - truncation) / cs.bin + INDEX_SLACK)))
    grown = np.nonzero(cs.counts >= MIN_WINDOW_COUNT)[0]
    if len(grown) == 0 or k_hi < 1:
        return _degenerate(cs, "degenerate")
    k_lo = int(grown[0]) + 1
    if k_hi - k_lo + 1 < 2:
        return _degenerate(cs, "degenerate")
    window_counts = cs.counts[k_lo - 1:k_hi]
    if window_counts[-1] == window_counts[0]:
        return _degenerate(cs, "degenerate")

    ks = np.arange(k_lo, k_hi + 1, dtype=float)
    ys = np.log(window_counts.astype(float))
    kc = ks - ks.mean()
    den = float(kc @ kc)
    num = float(kc @ (ys - ys.mean()))
    slope_k = num / den
    value = slope_k / cs.bin

    m = len(ks)
    resid = ys - (ys.mean() + slope_k * kc)
    stderr = 0.0
    if m > 2:
        stderr = math.sqrt(float(resid @ resid) / (m - 2) / den) / cs.bin
    local = np.diff(ys) / cs.bin
    diagnostics = {
        "total": cs.total,
        "window_bins": m,
        "max_local_slope_dev": float(np.max(np.abs(local - value))),
    }
    method = "window-lsq"
    if m < MIN_WINDOW_BINS:
        method += "/low-confidence"
    return ExponentEstimate(
        value=value, stderr=stderr,
        window=(k_lo * cs.bin, k_hi * cs.bin),
        count_at_hi=int(cs.counts[k_hi - 1]), method=method,
        diagnostics=diagnostics)


def completeness_cut(values, lengths, max_len: int) -> float:
    """Truncation for growth windows over length-limited enumerations.

    Elements longer than max_len are absent, and the cheapest of them has a
    phi-value of at least (max_len + 1) times the slowest per-letter speed
    seen among enumerated elements (the minimizer is realized by powers of a
    short word, so the observed rate is the right scale).  Thresholds above
    vmax minus the returned cut are undercounts.  One max-letter's worth of
    truncation is NOT enough when per-letter speeds vary by direction: the
    undercounted range scales with max_len itself.
    """
    values = np.asarray(values, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    sel = lengths > 0
    if not sel.any():
        return 0.0
    rate = float((values[sel] / lengths[sel]).min())
    if rate <= 0.0:
        return 0.0
    return max(0.0, float(values.max()) - (max_len + 1) * rate)


def ball_truncation(ball, form: LinearForm) -> float:
    """Completeness cut for exponent windows over a word ball."""
    return completeness_cut(form(ball.mu_all()), ball.lengths_all(),
                            ball.max_len)


def class_truncation(classes, form: LinearForm) -> float:
    """Completeness cut for entropy windows over conjugacy classes."""
    return completeness_cut(form(classes.lam_all()), classes.lengths_all(),
                            classes.max_len)


def entropy(classes, form: LinearForm | None = None, bin: float = DEFAULT_BIN,
            truncation: float | None = None) -> ExponentEstimate:
    """Growth rate of conjugacy classes counted by phi(lambda).

    Classes are counted verbatim (no primitive filtering): powers contribute
    polynomial multiplicity per class, which cannot move the exponent.
    Default truncation is the class-completeness cut; pass 0.0 to disable.
    """
    if hasattr(classes, "lam_all"):
        if form is None:
            raise InputError("a linear form is required")
        if truncation is None and hasattr(classes, "max_len"):
            truncation = class_truncation(classes, form)
        cs = count_series_from_values(form(classes.lam_all()), bin)
    else:
        cs = count_series(classes, form, bin)
    return critical_exponent(cs, truncation=truncation or 0.0)


def poincare_series(entries, form: LinearForm | None = None,
                    s: float = 1.0) -> float:
    """Partial Poincare sum over a ball: sum of exp(-s * phi(mu)).

    Diagnostic only: the partial sums keep growing with ball radius for
    s below the critical exponent and stabilize above it.
    """
    if s < 0:
        raise InputError("exponent s must be nonnegative")
    values = _values_array(entries, form)
    return float(np.exp(-s * values).sum())


def estimate_to_dict(est: ExponentEstimate, form: LinearForm | None = None) -> dict:
    """JSON-ready dict for an estimate (form coefficients included if given)."""
    out = {
        "value": est.value,
        "stderr": est.stderr,
        "window": [est.window[0], est.window[1]],
        "count_at_hi": est.count_at_hi,
        "method": est.method,
        "diagnostics": dict(est.diagnostics),
    }
    if form is not None:
        out["form"] = [float(c) for c in form.coeffs]
    return out


def write_estimate_json(est: ExponentEstimate, path: str,
                        form: LinearForm | None = None):
    with open(path, "w") as fh:
        json.dump(estimate_to_dict(est, form), fh, indent=2, sort_keys=True)
        fh.write("\n")
