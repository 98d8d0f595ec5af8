"""Symmetric limit-set sampling and box-counting dimension estimation.

Limit points are sampled deterministically: a seeded stride walks the
lexicographically ordered reduced words of a fixed length, and each word
matrix is decomposed as U diag(sigma) V^T; the first column of U approximates
the attracting line, the last column the attracting hyperplane's normal.
The gap mu_1 - mu_2 of the word certifies the quality of both (refining the
word moves the line by O(e^-gap)).

Dimension estimation uses greedy nets: for dyadic scales eps_j = diam / 2^j
the net size N(eps_j) counts greedily chosen centers at pairwise distance
> eps_j, visiting points in lexicographic coordinate order so the result is
machine- and thread-independent.  The regression window keeps scales with
N(eps) at most a tenth of the sample (density guard).  Upper box dimension
bounds Hausdorff dimension from above, so the resulting upper sandwich
checks are conservative; lower checks rely on the calibration scenarios
where the limit set is smooth or self-similar and the two notions agree.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError
from .linalg import (DualProjPoint, ProjPoint, _principal_eigvec,
                     as_matrix_array, attracting_pair, cartan_projection,
                     proj_distance)
from .words import GeneratorSet, Word

MIN_GAP = 1e-6           # below this the scenario is likely not Anosov
QUALITY_GAP = math.log(10.0)  # line position uncertain beyond 1e-1
MIN_POINTS = 500
DEFAULT_SCALE_COUNT = 6
DENSITY_GUARD = 10       # keep scales with N(eps) <= count / DENSITY_GUARD


@dataclass(frozen=True)
class SymLimitPoint:
    """A sampled point of the symmetric limit set, with provenance."""

    line: ProjPoint
    hyperplane: DualProjPoint
    word: Word
    gap: float

    def __post_init__(self):
        if not self.gap > 0:
            raise InputError("limit point needs a positive gap certificate")
        pairing = self.hyperplane.pairing(self.line)
        if pairing > 3.0 * math.exp(-self.gap):
            raise InputError(
                f"hyperplane does not contain the line: pairing {pairing:.3e} "
                f"exceeds tangency budget for gap {self.gap:.3f}")


@dataclass(frozen=True)
class DimensionEstimate:
    """Box-counting slope with the scales and window that produced it."""

    value: float
    scales: tuple          # ((eps, N(eps)), ...)
    window: tuple          # (j_lo, j_hi) dyadic scale indices used
    stderr: float
    method: str = "greedy-net"

    def __post_init__(self):
        if self.value < 0:
            raise InputError("dimension cannot be negative")

    @property
    def low_confidence(self) -> bool:
        return "low-confidence" in self.method or "degenerate" in self.method


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _unrank_reduced_word(index: int, length: int, two_k: int) -> list:
    """index-th reduced word of given length in lexicographic order."""
    block = (two_k - 1) ** (length - 1)
    first, rem = divmod(index, block)
    letters = [first]
    for _ in range(length - 1):
        block //= (two_k - 1)
        digit, rem = divmod(rem, block)
        barred = letters[-1] ^ 1
        letters.append(digit if digit < barred else digit + 1)
    return letters


def sample_limit_set(gs: GeneratorSet, word_len: int, count: int,
                     seed: int = 0) -> list:
    """Deterministic limit-set sample from `count` words of length word_len.

    Words are taken by a seeded stride through lexicographic order, so the
    sample is reproducible and spread over the whole boundary.  Samples with
    gap below MIN_GAP are rejected (scenario likely not Anosov); samples with
    gap below QUALITY_GAP are discarded as low quality.  Both are reported
    via a warning, never silently.
    """
    if word_len < 4:
        raise InputError("word_len must be at least 4")
    if count < 1:
        raise InputError("count must be positive")
    two_k = 2 * gs.k
    total = two_k * (two_k - 1) ** (word_len - 1)
    count = min(count, total)
    stride = max(1, total // count)
    base = seed % total
    letters = np.array(
        [_unrank_reduced_word((base + i * stride) % total, word_len, two_k)
         for i in range(count)], dtype=np.int8)

    mats = gs.letter_mats[letters[:, 0]]
    for pos in range(1, word_len):
        mats = mats @ gs.letter_mats[letters[:, pos]]
    u, s, _ = np.linalg.svd(mats)
    if np.any(s[:, 1] <= 0):
        raise NumericError("singular value collapse in limit sampling")
    gaps = np.log(s[:, 0] / s[:, 1])

    rejected = int(np.count_nonzero(gaps < MIN_GAP))
    low_quality = int(np.count_nonzero((gaps >= MIN_GAP) & (gaps < QUALITY_GAP)))
    if rejected:
        warnings.warn(
            f"{rejected} samples rejected with gap < {MIN_GAP:g}; "
            "the scenario is likely not projective Anosov", stacklevel=2)
    if low_quality:
        warnings.warn(
            f"{low_quality} low-quality samples discarded (gap < ln 10)",
            stacklevel=2)

    points = []
    for i in range(count):
        if gaps[i] < QUALITY_GAP:
            continue
        points.append(SymLimitPoint(
            line=ProjPoint(u[i, :, 0]),
            hyperplane=DualProjPoint(u[i, :, -1]),
            word=Word(tuple(int(j) for j in letters[i])),
            gap=float(gaps[i])))
    if not points:
        raise NumericError("no limit samples survived the gap filters")
    return points


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def _component(p, which: str) -> np.ndarray:
    if isinstance(p, SymLimitPoint):
        return p.line.vec if which == "line" else p.hyperplane.vec
    if isinstance(p, (ProjPoint, DualProjPoint)):
        return p.vec
    if hasattr(p, "point"):  # boundary points carry (point, tangent)
        return p.point.vec if which == "line" else p.tangent.vec
    return np.asarray(p, dtype=float)


def _angles(vecs: np.ndarray) -> np.ndarray:
    gram = np.abs(vecs @ vecs.T)
    return np.arccos(np.clip(gram, -1.0, 1.0))


class _ProjectiveMetric:
    """Angle metric on one component of the samples (line or hyperplane)."""

    def __init__(self, which: str):
        self.which = which

    def __call__(self, p, q) -> float:
        a = _component(p, self.which)
        b = _component(q, self.which)
        dot = abs(float(a @ b)) / (np.linalg.norm(a) * np.linalg.norm(b))
        return float(math.acos(min(1.0, dot)))

    def pairwise(self, points) -> np.ndarray:
        vecs = np.stack([_component(p, self.which) for p in points])
        vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
        return _angles(vecs)


class _SymMetric:
    """max(line angle, hyperplane angle): the product metric on P x P*."""

    def __call__(self, p, q) -> float:
        return max(line_metric(p, q), dual_metric(p, q))

    def pairwise(self, points) -> np.ndarray:
        return np.maximum(line_metric.pairwise(points),
                          dual_metric.pairwise(points))


class SnowflakeMetric:
    """d^alpha of a base metric; alpha in (0, 1] keeps it a metric."""

    def __init__(self, base, alpha: float):
        if not 0 < alpha <= 1:
            raise InputError("snowflake power must lie in (0, 1]")
        self.base = base
        self.alpha = alpha

    def __call__(self, p, q) -> float:
        return float(self.base(p, q) ** self.alpha)

    def pairwise(self, points) -> np.ndarray:
        return self.base.pairwise(points) ** self.alpha


line_metric = _ProjectiveMetric("line")
dual_metric = _ProjectiveMetric("hyperplane")
sym_metric = _SymMetric()

METRICS = {"sym": sym_metric, "line": line_metric, "dual": dual_metric}


# ---------------------------------------------------------------------------
# box dimension
# ---------------------------------------------------------------------------

def _sort_order(points) -> np.ndarray:
    """Lexicographic order of point coordinates; fixes the greedy-net scan."""
    rows = []
    for p in points:
        if isinstance(p, SymLimitPoint):
            rows.append(np.concatenate([p.line.vec, p.hyperplane.vec]))
        elif isinstance(p, (ProjPoint, DualProjPoint)):
            rows.append(p.vec)
        elif hasattr(p, "point"):
            rows.append(np.concatenate([p.point.vec, p.tangent.vec]))
        else:
            rows.append(np.asarray(p, dtype=float).ravel())
    coords = np.stack(rows)
    return np.lexsort(coords.T[::-1])


def _greedy_net_size(dists: np.ndarray, eps: float) -> int:
    n = dists.shape[0]
    alive = np.ones(n, dtype=bool)
    centers = 0
    for i in range(n):
        if alive[i]:
            centers += 1
            alive &= dists[i] > eps
    return centers


def box_dimension(points, metric, scale_count: int = DEFAULT_SCALE_COUNT):
    """Greedy-net box-counting dimension of a point sample.

    Net sizes are computed at dyadic scales diam/4 ... diam/2^(scale_count+1)
    and the dimension is the least-squares slope of log N against log(1/eps)
    over the scales where N stays below a tenth of the sample size.
    """
    count = len(points)
    if count < MIN_POINTS:
        raise InputError(f"need at least {MIN_POINTS} points, got {count}")
    if scale_count < 2:
        raise InputError("scale_count must be at least 2")
    if hasattr(metric, "pairwise"):
        dists = np.asarray(metric.pairwise(points), dtype=float)
    else:
        dists = np.array([[metric(p, q) for q in points] for p in points])
    if dists.shape != (count, count):
        raise InputError("metric.pairwise returned a misshaped matrix")
    if np.any(dists < 0) or not np.all(np.isfinite(dists)):
        raise NumericError("metric produced negative or nonfinite distances")

    diam = float(dists.max())
    if diam <= 0:
        return DimensionEstimate(value=0.0, scales=(), window=(0, 0),
                                 stderr=0.0, method="greedy-net/degenerate")
    order = _sort_order(points)
    dists = dists[np.ix_(order, order)]

    js = np.arange(2, scale_count + 2)
    scales = []
    for j in js:
        eps = diam / float(2 ** j)
        scales.append((eps, _greedy_net_size(dists, eps)))

    sizes = np.array([n for _, n in scales], dtype=float)
    keep = sizes <= count / DENSITY_GUARD
    method = "greedy-net"
    if np.count_nonzero(keep) >= 2:
        win_js = js[keep]
        win_sizes = sizes[keep]
        if np.count_nonzero(keep) < 4:
            method += "/low-confidence"
    else:
        win_js, win_sizes = js, sizes
        method += "/low-confidence"

    xs = win_js * math.log(2.0)   # log(1/eps) up to a constant shift
    ys = np.log(win_sizes)
    xc = xs - xs.mean()
    den = float(xc @ xc)
    slope = float(xc @ (ys - ys.mean())) / den
    m = len(xs)
    stderr = 0.0
    if m > 2:
        resid = ys - (ys.mean() + slope * xc)
        stderr = math.sqrt(float(resid @ resid) / (m - 2) / den)
    return DimensionEstimate(
        value=max(0.0, slope),
        scales=tuple((float(e), int(n)) for e, n in scales),
        window=(int(win_js[0]), int(win_js[-1])),
        stderr=stderr, method=method)


# ---------------------------------------------------------------------------
# distortion of projective balls
# ---------------------------------------------------------------------------

def distortion_check(g, r: float, sample: int = 500, seed: int = 0) -> float:
    """Largest expansion of the r-ball around [e1] relative to r*e^(mu2-mu1).

    The matrix must be aligned: attracting line [e1], repelling hyperplane
    span(e2..en).  Sampled boundary points of B([e1], r) are pushed through g
    and their distance to [e1] compared against the contraction factor; a
    uniform bound across a matrix family certifies the distortion constant.
    """
    mat = as_matrix_array(g)
    n = mat.shape[0]
    if not 0 < r <= 0.1:
        raise InputError("radius must lie in (0, 0.1]")
    if sample < 1:
        raise InputError("sample count must be positive")
    pair = attracting_pair(mat)
    if pair is None:
        raise InputError("matrix must be biproximal")
    e1 = ProjPoint(np.eye(n)[0])
    if proj_distance(pair[0], e1) > 1e-6:
        raise InputError("attracting line is not aligned with [e1]")
    rep_normal = _principal_eigvec(mat.T, "top")
    if proj_distance(ProjPoint(rep_normal), e1) > 1e-6:
        raise InputError("repelling hyperplane is not span(e2..en)")

    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(sample, n - 1))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = np.concatenate(
        [np.full((sample, 1), math.cos(r)), math.sin(r) * dirs], axis=1)
    images = pts @ mat.T
    norms = np.linalg.norm(images, axis=1)
    dist = np.arccos(np.clip(np.abs(images[:, 0]) / norms, 0.0, 1.0))
    mu = cartan_projection(mat)
    return float(dist.max() / (r * math.exp(mu[1] - mu[0])))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def write_points_csv(points, path: str, gs: GeneratorSet | None = None) -> int:
    """CSV of samples: word, gap, line coords, hyperplane coords."""
    if not points:
        raise InputError("no points to write")
    n = len(points[0].line.vec)
    header = (["word", "gap"] + [f"line_{i+1}" for i in range(n)]
              + [f"hyp_{i+1}" for i in range(n)])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for p in points:
            word = (gs.word_string(p.word.letters) if gs is not None
                    else ".".join(str(j) for j in p.word.letters))
            writer.writerow([word, f"{p.gap:.12g}"]
                            + [f"{x:.12g}" for x in p.line.vec]
                            + [f"{x:.12g}" for x in p.hyperplane.vec])
    return len(points)


def dimension_to_dict(est: DimensionEstimate) -> dict:
    return {
        "value": est.value,
        "stderr": est.stderr,
        "scales": [[eps, n] for eps, n in est.scales],
        "window": [est.window[0], est.window[1]],
        "method": est.method,
    }


def write_dimension_json(est: DimensionEstimate, path: str):
    with open(path, "w") as fh:
        json.dump(dimension_to_dict(est), fh, indent=2, sort_keys=True)
        fh.write("\n")
