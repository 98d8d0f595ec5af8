"""Hilbert metric on two convex projective models, boundary Gromov products,
and the comparison machinery between boundary (quasi-)metrics.

Models:

- ellipsoid(n): lines negative for the form x_1^2 + ... + x_(n-1)^2 - x_n^2
  (the Klein model of hyperbolic (n-1)-space).  Distances come from the
  chord cross-ratio, solved as a quadratic along the affine chart x_n = 1.
- psd_cone(k): projectivized positive-definite quadratic forms on R^k,
  embedded in R^(k(k+1)/2) by the Frobenius-orthonormal coordinates
  (X_aa, sqrt(2) X_ab); the Hilbert distance has the closed form
  (log lambda_max - log lambda_min)/2 of X^-1 Y.

Gromov products are evaluated at finite depth T after moving the basepoint
to the model's center by a form-preserving boost; with the basepoint at the
center the bracket reduces to hyperbolic trigonometry,

    (xi|eta)_T = T - arccosh(2 sin^2(theta/2) cosh^2 T + cos theta) / 2,

which converges to -ln sin(theta/2) at rate e^(-2T).  Richardson
extrapolation from depths T and 2T removes the leading error term.
sin^2(theta/2) is computed from the chord ||u - v||^2/4, never from
1 - cos theta, so nearby boundary points lose no precision.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError
from .linalg import (DualProjPoint, ProjPoint, as_matrix_array,
                     jordan_projection, PROXIMAL_GAP_TOL)
from .limitset import DimensionEstimate, box_dimension

INTERIOR_MARGIN = 1e-10
BOUNDARY_TOL = 1e-9
DEFAULT_GROMOV_T = 12.0


@dataclass(frozen=True)
class ConvexDomain:
    """A properly convex domain from the two-model catalog."""

    model: str   # "ellipsoid" or "psd_cone"
    size: int    # ambient n for ellipsoid, form dimension k for psd_cone

    @property
    def ambient_dim(self) -> int:
        if self.model == "ellipsoid":
            return self.size
        return self.size * (self.size + 1) // 2


def ellipsoid(n: int) -> ConvexDomain:
    if n < 3:
        raise InputError("ellipsoid model needs ambient dimension >= 3")
    return ConvexDomain("ellipsoid", n)


def psd_cone(k: int) -> ConvexDomain:
    if k < 2:
        raise InputError("psd_cone needs form dimension >= 2")
    return ConvexDomain("psd_cone", k)


def domain_center(dom: ConvexDomain) -> ProjPoint:
    if dom.model == "ellipsoid":
        v = np.zeros(dom.size)
        v[-1] = 1.0
        return ProjPoint(v)
    return ProjPoint(sym_to_vec(np.eye(dom.size)))


# ---------------------------------------------------------------------------
# psd coordinates (must match the symmetric-square basis)
# ---------------------------------------------------------------------------

def sym_to_vec(x: np.ndarray) -> np.ndarray:
    """Frobenius-orthonormal coordinates of a symmetric matrix."""
    x = np.asarray(x, dtype=float)
    k = x.shape[0]
    root2 = math.sqrt(2.0)
    return np.array([x[a, b] * (1.0 if a == b else root2)
                     for a in range(k) for b in range(a, k)])


def vec_to_sym(v: np.ndarray, k: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (k * (k + 1) // 2,):
        raise InputError("coordinate vector has the wrong length")
    out = np.zeros((k, k))
    half = 1.0 / math.sqrt(2.0)
    pos = 0
    for a in range(k):
        for b in range(a, k):
            if a == b:
                out[a, a] = v[pos]
            else:
                out[a, b] = out[b, a] = v[pos] * half
            pos += 1
    return out


# ---------------------------------------------------------------------------
# interior tests and chart helpers
# ---------------------------------------------------------------------------

def _point_vec(p) -> np.ndarray:
    if isinstance(p, (ProjPoint, DualProjPoint)):
        return p.vec
    if hasattr(p, "point"):
        return p.point.vec
    v = np.asarray(p, dtype=float)
    norm = np.linalg.norm(v)
    if v.ndim != 1 or norm == 0:
        raise InputError("expected a projective point")
    return v / norm


def _domain_vec(dom: ConvexDomain, p) -> np.ndarray:
    """Point coercion; psd_cone points may be given as symmetric matrices."""
    if dom.model == "psd_cone" and isinstance(p, np.ndarray) and p.ndim == 2:
        if p.shape != (dom.size, dom.size) or np.abs(p - p.T).max() > 1e-12:
            raise InputError("psd_cone points must be symmetric size x size")
        return _point_vec(sym_to_vec(p))
    return _point_vec(p)


def _qform(v: np.ndarray) -> float:
    return float(v[:-1] @ v[:-1] - v[-1] ** 2)


def interior_point(dom: ConvexDomain, p) -> bool:
    v = _domain_vec(dom, p)
    if v.shape != (dom.ambient_dim,):
        raise InputError("point dimension does not match the domain")
    if dom.model == "ellipsoid":
        return _qform(v) < -INTERIOR_MARGIN
    x = vec_to_sym(v, dom.size)
    tr = float(np.trace(x))
    if tr < 0:
        x = -x
        tr = -tr
    if tr <= 0:
        return False
    return float(np.linalg.eigvalsh(x / tr).min()) > INTERIOR_MARGIN


def _require_interior(dom: ConvexDomain, p) -> np.ndarray:
    v = _domain_vec(dom, p)
    if not interior_point(dom, v):
        raise InputError("point is on the boundary or outside the domain")
    return v


def _chart(v: np.ndarray) -> np.ndarray:
    """Affine chart x_n = 1 of the ellipsoid model (spatial coordinates)."""
    if abs(v[-1]) < 1e-14:
        raise NumericError("point at infinity of the affine chart")
    return v[:-1] / v[-1]


# ---------------------------------------------------------------------------
# Hilbert distance
# ---------------------------------------------------------------------------

def _cross_ratio_distance(s_a: float, s_b: float) -> float:
    """Hilbert distance of chart points at chord parameters 0 and 1, with
    boundary intersections at s_a < 0 and s_b > 1."""
    return 0.5 * math.log((s_b * (1.0 - s_a)) / ((-s_a) * (s_b - 1.0)))


def _chord_roots(u: np.ndarray, w: np.ndarray):
    """Roots of |u + s(w - u)|^2 = 1 (boundary hits of the chart chord)."""
    d = w - u
    a = float(d @ d)
    b = 2.0 * float(u @ d)
    c = float(u @ u) - 1.0
    disc = b * b - 4.0 * a * c
    if disc <= 0 or a <= 0:
        raise NumericError("degenerate chord in the ellipsoid model")
    root = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(root, b if b != 0 else 1.0))
    s1, s2 = q / a, c / q
    return min(s1, s2), max(s1, s2)


def hilbert_distance(dom: ConvexDomain, x, y) -> float:
    """Cross-ratio distance between interior points of the domain.

    The psd_cone model uses the closed form: half the log-spread of the
    eigenvalues of X^-1 Y, which equals the chord cross-ratio.
    """
    vx = _require_interior(dom, x)
    vy = _require_interior(dom, y)
    if dom.model == "psd_cone":
        xm = vec_to_sym(vx, dom.size)
        ym = vec_to_sym(vy, dom.size)
        if np.trace(xm) < 0:
            xm = -xm
        if np.trace(ym) < 0:
            ym = -ym
        el = np.linalg.cholesky(xm)
        inner = np.linalg.solve(el, np.linalg.solve(el, ym).T).T
        eig = np.linalg.eigvalsh((inner + inner.T) / 2.0)
        return 0.5 * float(np.log(eig[-1]) - np.log(eig[0]))
    u = _chart(vx)
    w = _chart(vy)
    if float((w - u) @ (w - u)) <= 1e-28:
        return 0.0
    s_a, s_b = _chord_roots(u, w)
    return _cross_ratio_distance(s_a, s_b)


def hilbert_distances_from(dom: ConvexDomain, x, ys: np.ndarray) -> np.ndarray:
    """Vectorized d_H(x, y_i) for rows y_i (ellipsoid model only).

    Chart-based chord solve: resolvable while the points stay a float64
    margin inside the ball, i.e. for distances up to roughly 16 from the
    center; deeper points raise rather than returning junk.
    """
    if dom.model != "ellipsoid":
        return np.array([hilbert_distance(dom, x, y) for y in ys])
    u = _chart(_require_interior(dom, x))
    ys = np.asarray(ys, dtype=float)
    charts = ys[:, :-1] / ys[:, -1:]
    margins = (charts ** 2).sum(axis=1)
    if np.any(margins >= 1.0 - 1e-15):
        raise NumericError(
            "points numerically on the boundary; chart distances beyond "
            "~16 are not resolvable")
    d = charts - u[None, :]
    a = (d * d).sum(axis=1)
    b = 2.0 * (d @ u)
    c = float(u @ u) - 1.0
    disc = np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
    sign = np.where(b >= 0, 1.0, -1.0)
    q = -0.5 * (b + sign * disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        s1 = np.where(a > 0, q / np.where(a > 0, a, 1.0), np.inf)
        s2 = np.where(np.abs(q) > 0, c / np.where(q != 0, q, 1.0), -np.inf)
    lo = np.minimum(s1, s2)
    hi = np.maximum(s1, s2)
    out = np.zeros(len(ys))
    moved = a > 1e-28
    out[moved] = 0.5 * np.log((hi[moved] * (1.0 - lo[moved]))
                              / ((-lo[moved]) * (hi[moved] - 1.0)))
    return out


def translation_length_hilbert(g) -> float:
    """Hilbert translation length (lambda_1 - lambda_n)/2 of a biproximal
    matrix; returns 0.0 for unipotent-like input (degenerate, documented)."""
    lam = jordan_projection(as_matrix_array(g))
    n = lam.n
    spread = lam[0] - lam[n - 1]
    top_gap = lam[0] - lam[1]
    bot_gap = lam[n - 2] - lam[n - 1]
    if top_gap <= PROXIMAL_GAP_TOL or bot_gap <= PROXIMAL_GAP_TOL:
        if spread <= PROXIMAL_GAP_TOL:
            return 0.0
        raise NumericError("matrix is not biproximal")
    return 0.5 * float(spread)


# ---------------------------------------------------------------------------
# boundary points and Gromov products
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryPoint:
    """A boundary point of the ellipsoid model with its supporting tangent."""

    point: ProjPoint
    tangent: DualProjPoint

    def __post_init__(self):
        if abs(_qform(self.point.vec)) > BOUNDARY_TOL:
            raise InputError("point does not lie on the boundary quadric")
        if self.tangent.pairing(self.point) > BOUNDARY_TOL:
            raise InputError("tangent hyperplane does not contain the point")


def boundary_point(dom: ConvexDomain, v) -> BoundaryPoint:
    """Boundary point nearest the (near-null) direction v, with its tangent.

    The direction is projected onto the null cone exactly (spatial part
    rescaled to the time coordinate); directions with relative quadric
    residual above 1e-6 are refused.
    """
    if dom.model != "ellipsoid":
        raise InputError("boundary points are supported on the ellipsoid model")
    vec = _point_vec(v)
    if vec.shape != (dom.size,):
        raise InputError("direction dimension does not match the domain")
    if abs(_qform(vec)) > 1e-6:
        raise InputError("direction is not close to the boundary quadric")
    spatial = vec[:-1]
    norm = np.linalg.norm(spatial)
    if norm == 0 or abs(vec[-1]) == 0:
        raise InputError("degenerate boundary direction")
    exact = np.concatenate([spatial * (abs(vec[-1]) / norm), [vec[-1]]])
    grad = np.concatenate([exact[:-1], [-exact[-1]]])
    return BoundaryPoint(point=ProjPoint(exact), tangent=DualProjPoint(grad))


def boundary_from_direction(dom: ConvexDomain, direction) -> BoundaryPoint:
    """Boundary point in the given spatial direction of the chart."""
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (dom.size - 1,):
        raise InputError("spatial direction has the wrong dimension")
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise InputError("zero direction")
    return boundary_point(dom, np.concatenate([direction / norm, [1.0]]))


def _boost_to_center(dom: ConvexDomain, base) -> np.ndarray:
    """A form-preserving matrix sending the interior basepoint to the center."""
    v = _require_interior(dom, base)
    if dom.model != "ellipsoid":
        raise InputError("Gromov products are evaluated on the ellipsoid model")
    n = dom.size
    jm = np.diag(np.concatenate([np.ones(n - 1), [-1.0]]))
    bhat = v / math.sqrt(-_qform(v))
    if bhat[-1] < 0:
        bhat = -bhat
    # euclidean basis of the q-orthogonal complement of bhat
    proj = np.eye(n) + np.outer(bhat, jm @ bhat)
    u0, _, _ = np.linalg.svd(proj)
    basis = u0[:, :n - 1]
    restr = basis.T @ jm @ basis
    evals, evecs = np.linalg.eigh(restr)
    if evals.min() <= 0:
        raise NumericError("degenerate complement in basepoint boost")
    frame = basis @ (evecs / np.sqrt(evals))
    full = np.concatenate([frame, bhat[:, None]], axis=1)
    return jm @ full.T @ jm


def _chart_unit(boost: np.ndarray, vec: np.ndarray) -> np.ndarray:
    y = boost @ vec
    u = _chart(y)
    return u / np.linalg.norm(u)


def _bracket_at_depth(s2, c, t: float):
    z = 2.0 * s2 * math.cosh(t) ** 2 + c
    return t - 0.5 * np.arccosh(np.maximum(z, 1.0))


def _extrapolated_bracket(s2, c, t: float):
    v1 = _bracket_at_depth(s2, c, t)
    v2 = _bracket_at_depth(s2, c, 2.0 * t)
    rho = math.exp(-2.0 * t)
    return v2 - (v1 - v2) * rho / (1.0 - rho)


def gromov_product(dom: ConvexDomain, base, xi, eta,
                   t: float = DEFAULT_GROMOV_T) -> float:
    """Boundary Gromov product (xi|eta) at the basepoint.

    Evaluated at depths t and 2t along the chords toward xi and eta, then
    Richardson-extrapolated.  Coincident endpoints return infinity.
    """
    if t < 5:
        raise InputError("depth t must be at least 5")
    boost = _boost_to_center(dom, base)
    u = _chart_unit(boost, _point_vec(xi))
    w = _chart_unit(boost, _point_vec(eta))
    s2 = float((u - w) @ (u - w)) / 4.0
    if s2 < 1e-24:
        return math.inf
    return float(_extrapolated_bracket(s2, 1.0 - 2.0 * s2, t))


def gromov_quasi_distance(dom: ConvexDomain, base, xi, eta,
                          t: float = DEFAULT_GROMOV_T) -> float:
    """exp(-(xi|eta)_base): the visual quasi-distance on the boundary."""
    return math.exp(-gromov_product(dom, base, xi, eta, t))


class GromovMetric:
    """Quasi-distance d_x as a pairwise metric object for net estimators.

    Not a true metric (no triangle inequality); the greedy-net dimension
    estimator only ever uses pairwise values, never the triangle inequality.
    """

    def __init__(self, dom: ConvexDomain, base, t: float = DEFAULT_GROMOV_T):
        self.dom = dom
        self.t = float(t)
        self.boost = _boost_to_center(dom, base)

    def _charts(self, points) -> np.ndarray:
        vecs = np.stack([_point_vec(p) for p in points])
        ys = vecs @ self.boost.T
        charts = ys[:, :-1] / ys[:, -1:]
        return charts / np.linalg.norm(charts, axis=1, keepdims=True)

    def __call__(self, p, q) -> float:
        u = self._charts([p])[0]
        w = self._charts([q])[0]
        s2 = float((u - w) @ (u - w)) / 4.0
        if s2 < 1e-24:
            return 0.0
        return math.exp(-float(_extrapolated_bracket(s2, 1.0 - 2.0 * s2, self.t)))

    def pairwise(self, points) -> np.ndarray:
        charts = self._charts(points)
        n = len(charts)
        # chord form of sin^2(theta/2): cancellation-free for close points,
        # and chart points carry no projective sign ambiguity
        s2 = np.empty((n, n))
        step = max(1, (1 << 22) // max(1, n * charts.shape[1]))
        for lo in range(0, n, step):
            hi = min(n, lo + step)
            diff = charts[lo:hi, None, :] - charts[None, :, :]
            s2[lo:hi] = (diff * diff).sum(axis=2) / 4.0
        prod = _extrapolated_bracket(s2, 1.0 - 2.0 * s2, self.t)
        out = np.exp(-prod)
        out[s2 < 1e-24] = 0.0
        np.fill_diagonal(out, 0.0)
        return out


# ---------------------------------------------------------------------------
# comparison of boundary metrics
# ---------------------------------------------------------------------------

def _pair_table(dom: ConvexDomain, base, pairs, t: float):
    ps = np.stack([_point_vec(p.point) for p, _ in pairs])
    qs = np.stack([_point_vec(q.point) for _, q in pairs])
    tps = np.stack([p.tangent.vec for p, _ in pairs])
    tqs = np.stack([q.tangent.vec for _, q in pairs])
    d = np.arccos(np.clip(np.abs((ps * qs).sum(axis=1)), 0.0, 1.0))
    dstar = np.arccos(np.clip(np.abs((tps * tqs).sum(axis=1)), 0.0, 1.0))

    boost = _boost_to_center(dom, base)
    yu = ps @ boost.T
    yw = qs @ boost.T
    cu = yu[:, :-1] / yu[:, -1:]
    cw = yw[:, :-1] / yw[:, -1:]
    cu /= np.linalg.norm(cu, axis=1, keepdims=True)
    cw /= np.linalg.norm(cw, axis=1, keepdims=True)
    s2 = ((cu - cw) ** 2).sum(axis=1) / 4.0
    dx = np.exp(-_extrapolated_bracket(s2, 1.0 - 2.0 * s2, t))
    dx[s2 < 1e-24] = 0.0
    return d, dstar, dx


def comparison_ratio(dom: ConvexDomain, base, pairs,
                     t: float = DEFAULT_GROMOV_T):
    """Max of d_x / sqrt(d * d_star) over boundary pairs, with dyadic bands.

    Returns (max_ratio, by_band) where by_band lists, for each dyadic band
    of the projective separation d, the pair count and the band's maximum
    ratio.  Flat band maxima certify the comparison constant; growth toward
    small separations would refute it.  Coincident pairs are skipped.
    """
    if not pairs:
        raise InputError("no pairs supplied")
    d, dstar, dx = _pair_table(dom, base, pairs, t)
    keep = (d > 1e-12) & (dstar > 1e-12)
    skipped = int(len(d) - keep.sum())
    if skipped:
        warnings.warn(f"{skipped} coincident pairs skipped", stacklevel=2)
    if not np.any(keep):
        raise InputError("all pairs coincident")
    d, dstar, dx = d[keep], dstar[keep], dx[keep]
    ratio = dx / np.sqrt(d * dstar)
    dmax = float(d.max())
    bands = np.floor(np.log2(dmax / d)).astype(int)
    by_band = []
    for band in range(int(bands.max()) + 1):
        mask = bands == band
        if not np.any(mask):
            continue
        by_band.append({
            "band": band,
            "eps_hi": dmax / 2 ** band,
            "count": int(mask.sum()),
            "max_ratio": float(ratio[mask].max()),
        })
    return float(ratio.max()), by_band


def write_pairs_csv(dom: ConvexDomain, base, pairs, path: str,
                    t: float = DEFAULT_GROMOV_T) -> int:
    """CSV of pair diagnostics: p, q, d, d_star, d_x, ratio, band."""
    d, dstar, dx = _pair_table(dom, base, pairs, t)
    keep = (d > 1e-12) & (dstar > 1e-12)
    dmax = float(d[keep].max())
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", "q", "d", "d_star", "d_x", "ratio", "band"])
        for i, (p, q) in enumerate(pairs):
            pstr = ";".join(f"{x:.12g}" for x in p.point.vec)
            qstr = ";".join(f"{x:.12g}" for x in q.point.vec)
            if not keep[i]:
                writer.writerow([pstr, qstr, f"{d[i]:.12g}", f"{dstar[i]:.12g}",
                                 f"{dx[i]:.12g}", "skipped", ""])
                continue
            ratio = dx[i] / math.sqrt(d[i] * dstar[i])
            band = int(math.floor(math.log2(dmax / d[i])))
            writer.writerow([pstr, qstr, f"{d[i]:.12g}", f"{dstar[i]:.12g}",
                             f"{dx[i]:.12g}", f"{ratio:.12g}", band])
            rows += 1
    return rows


def quasi_metric_dimension(points, dom: ConvexDomain, base,
                           scale_count: int = 6,
                           t: float = DEFAULT_GROMOV_T) -> DimensionEstimate:
    """Box dimension of boundary points under the Gromov quasi-distance."""
    return box_dimension(points, GromovMetric(dom, base, t), scale_count)
