"""Cartan/Jordan projections and projective geometry for SL(n, R).

This module is the numerical core of the package.  It provides:

- value types for unimodular matrices, Weyl-chamber vectors (nonincreasing,
  zero-sum), linear forms on that chamber, and points of projective space
  and its dual;
- the Cartan projection mu(g) (log singular values) and Jordan projection
  lambda(g) (log eigenvalue moduli), both computed so that every component
  keeps high *relative* accuracy even for strongly graded matrices (long
  products of generators);
- proximality diagnostics: spectral gap, attracting line, repelling
  hyperplane angle, and the attracting (line, covector) pair used to sample
  symmetric limit sets.

Accuracy note.  A plain SVD returns small singular values of a graded matrix
with absolute error on the order of eps * sigma_1, which is useless once
sigma_1/sigma_n is large (a word of length 12 easily reaches 1e10).  The top
singular value, however, is always computed to high relative accuracy, and
the product sigma_1 ... sigma_i equals the top singular value of the i-th
exterior power.  We therefore compute

    w_i = log sigma_max(Lambda^i g),      mu_i = w_i - w_{i-1},

building Lambda^i g from minors of g directly (no inversions).  The same
telescoping applied to spectral radii of exterior powers yields the Jordan
projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InputError, NumericError

# Type invariants (tolerances fixed by contract, do not tune).
MAX_DIM = 256          # native inputs are small; tensor functors go up to 16^2
DET_TOL = 1e-6
MONOTONE_TOL = 1e-12
ZERO_SUM_TOL = 1e-8
UNIT_NORM_TOL = 1e-12
SIGN_COORD_TOL = 1e-10
PROXIMAL_GAP_TOL = 1e-9
DEFAULT_PROXIMALITY_EPS = 0.1  # radians; default strength for "strongly proximal"

_CHUNK_BUDGET = 1 << 22  # scalars per temporary in batched minor extraction


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------

class SquareMatrix:
    """A real n x n matrix of determinant one, 2 <= n <= 256.

    Input with positive determinant is renormalized by det^(1/n); zero or
    negative determinant is rejected (we work in SL(n, R), not GL).
    The wrapped array is read-only.
    """

    __slots__ = ("mat", "n")

    def __init__(self, array):
        mat = np.array(array, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InputError(f"expected a square matrix, got shape {mat.shape}")
        n = mat.shape[0]
        if not 2 <= n <= MAX_DIM:
            raise InputError(f"matrix size {n} outside supported range 2..{MAX_DIM}")
        if not np.all(np.isfinite(mat)):
            raise InputError("matrix has non-finite entries")
        det = float(np.linalg.det(mat))
        # The LU determinant carries absolute error up to ~eps * ||A||^n,
        # so for graded matrices a positive value can be pure noise.  Only
        # trust it above that floor; otherwise fall back to the SVD.
        fro = float(np.linalg.norm(mat))
        trusted = det != 0.0 and math.log(abs(det)) > (
            math.log(n * np.finfo(float).eps) + n * math.log(fro))
        if trusted:
            if det <= 0.0:
                raise InputError(f"determinant must be positive, got {det:g}")
            if det != 1.0:
                mat = mat / det ** (1.0 / n)
            scale = max(1.0, float(np.max(np.abs(mat))) ** n)
            resid = abs(float(np.linalg.det(mat)) - 1.0)
            if resid > DET_TOL * scale:
                raise NumericError(
                    f"unimodular renormalization failed, |det-1| = {resid:g}")
        else:
            mat = self._renormalize_anisotropic(mat, n, det)
        mat.flags.writeable = False
        self.mat = mat
        self.n = n

    @staticmethod
    def _renormalize_anisotropic(mat: np.ndarray, n: int,
                                 det: float) -> np.ndarray:
        """LU determinants underflow once eps * sigma_1 reaches sigma_n
        (long word products).  Singular values resolved above that floor
        renormalize exactly; when the smallest are unresolved, neither the
        sign nor the magnitude of det is certifiable from the stored
        floats, and input consistent with determinant one is accepted
        unrescaled (SL(n, R) is the class contract)."""
        u, sv, vt = np.linalg.svd(mat)
        if sv[-1] <= 0.0:
            raise InputError(f"determinant must be positive, got {det:g}")
        floor = n * np.finfo(float).eps * sv[0]
        if sv[-1] > floor:
            sign = float(np.linalg.det(u)) * float(np.linalg.det(vt))
            if sign <= 0.0:
                raise InputError(f"determinant must be positive, got {det:g}")
            return mat / math.exp(float(np.log(sv).sum()) / n)
        resolved = sv[sv > floor]
        upper = float(np.log(resolved).sum()) \
            + (n - len(resolved)) * math.log(floor)
        if upper < -1.0:
            raise InputError(
                "matrix is numerically singular: largest determinant "
                f"consistent with the stored floats is exp({upper:.3g})")
        return mat

    @classmethod
    def identity(cls, n: int) -> "SquareMatrix":
        return cls(np.eye(n))

    def inverse(self) -> "SquareMatrix":
        return SquareMatrix(np.linalg.inv(self.mat))

    def __matmul__(self, other: "SquareMatrix") -> "SquareMatrix":
        return SquareMatrix(self.mat @ other.mat)

    def __repr__(self):
        return f"SquareMatrix(n={self.n})"


def as_matrix_array(g) -> np.ndarray:
    """Coerce a SquareMatrix or array-like to a validated unimodular ndarray."""
    if isinstance(g, SquareMatrix):
        return g.mat
    return SquareMatrix(g).mat


@dataclass(frozen=True)
class CartanVector:
    """A point of the closed Weyl chamber: nonincreasing entries, zero sum."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise InputError("CartanVector needs at least 2 entries")
        for a, b in zip(vals, vals[1:]):
            if b - a > MONOTONE_TOL:
                raise InputError(f"entries not nonincreasing: {a:g} < {b:g}")
        total = math.fsum(vals)
        if abs(total) > ZERO_SUM_TOL:
            raise InputError(f"entries must sum to zero, got {total:g}")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class LinearForm:
    """A linear form on the Weyl chamber, stored by coefficients in eps_i."""

    coeffs: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def __call__(self, v):
        """Evaluate on a CartanVector, a length-n vector, or an (N, n) batch."""
        if isinstance(v, CartanVector):
            v = v.as_array()
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != len(self.coeffs):
            raise InputError(f"form on R^{len(self.coeffs)} applied to shape {v.shape}")
        return v @ np.array(self.coeffs)

    def scaled(self, t: float) -> "LinearForm":
        return LinearForm(tuple(t * c for c in self.coeffs),
                          name=f"{t:g}*{self.name}" if self.name else "")


def epsilon_form(i: int, n: int) -> LinearForm:
    """eps_i: picks the i-th (1-indexed) entry of mu."""
    if not 1 <= i <= n:
        raise InputError(f"epsilon index {i} out of range for n={n}")
    c = [0.0] * n
    c[i - 1] = 1.0
    return LinearForm(tuple(c), name=f"e{i}")


def root_form(i: int, j: int, n: int) -> LinearForm:
    """alpha_{i,j} = eps_i - eps_j (simple root when j = i + 1)."""
    if not (1 <= i < j <= n):
        raise InputError(f"root indices ({i},{j}) out of range for n={n}")
    c = [0.0] * n
    c[i - 1] = 1.0
    c[j - 1] = -1.0
    return LinearForm(tuple(c), name=f"a{i}{j}")


def weight_form(i: int, n: int) -> LinearForm:
    """Fundamental weight w_i = eps_1 + ... + eps_i."""
    if not 1 <= i <= n - 1:
        raise InputError(f"weight index {i} out of range for n={n}")
    c = [1.0] * i + [0.0] * (n - i)
    return LinearForm(tuple(c), name=f"w{i}")


class _ProjBase:
    """Shared implementation for points of P(R^n) and its dual."""

    __slots__ = ("vec",)

    def __init__(self, vector):
        v = np.array(vector, dtype=float)
        if v.ndim != 1 or v.shape[0] < 2:
            raise InputError(f"expected a vector, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("vector has non-finite entries")
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InputError("zero vector does not define a projective point")
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            v = v / norm
        # canonical sign: first coordinate of usable size is positive
        for x in v:
            if abs(x) > SIGN_COORD_TOL:
                if x < 0.0:
                    v = -v
                break
        v.flags.writeable = False
        self.vec = v

    @property
    def n(self) -> int:
        return self.vec.shape[0]

    def __repr__(self):
        return f"{type(self).__name__}({np.array2string(self.vec, precision=6)})"


class ProjPoint(_ProjBase):
    """A point of P(R^n): a unit vector with canonical sign."""


class DualProjPoint(_ProjBase):
    """A point of P((R^n)*): a unit covector with canonical sign."""

    def pairing(self, p: ProjPoint) -> float:
        """|<covector, point>|; zero means the point lies on the hyperplane."""
        return abs(float(self.vec @ p.vec))


@dataclass(frozen=True)
class ProximalityInfo:
    """Tagged result of a proximality test; not raising is deliberate."""

    proximal: bool
    gap12: float
    angle: float
    reason: str = ""


# ---------------------------------------------------------------------------
# exterior powers of matrix stacks (minor extraction, chunked)
# ---------------------------------------------------------------------------

def _det_stack(blocks: np.ndarray) -> np.ndarray:
    """Determinants over the last two axes, closed forms for sizes 1..3."""
    i = blocks.shape[-1]
    if i == 1:
        return blocks[..., 0, 0]
    if i == 2:
        return (blocks[..., 0, 0] * blocks[..., 1, 1]
                - blocks[..., 0, 1] * blocks[..., 1, 0])
    if i == 3:
        a = blocks[..., 0, 0] * (blocks[..., 1, 1] * blocks[..., 2, 2]
                                 - blocks[..., 1, 2] * blocks[..., 2, 1])
        b = blocks[..., 0, 1] * (blocks[..., 1, 0] * blocks[..., 2, 2]
                                 - blocks[..., 1, 2] * blocks[..., 2, 0])
        c = blocks[..., 0, 2] * (blocks[..., 1, 0] * blocks[..., 2, 1]
                                 - blocks[..., 1, 1] * blocks[..., 2, 0])
        return a - b + c
    return np.linalg.det(blocks)


def exterior_power_many(mats: np.ndarray, i: int) -> np.ndarray:
    """Lambda^i of a stack of (N, n, n) matrices, in the lexicographic
    wedge basis e_{j1} ^ ... ^ e_{ji}, j1 < ... < ji.

    Entries are i x i minors; the wedge basis is orthonormal, so orthogonal
    input stays orthogonal and singular values multiply as expected.
    """
    mats = np.asarray(mats, dtype=float)
    single = mats.ndim == 2
    if single:
        mats = mats[None]
    n = mats.shape[-1]
    if not 1 <= i <= n - 1:
        raise InputError(f"exterior power index {i} out of range for n={n}")
    if i == 1:
        return mats[0] if single else mats
    combos = list(combinations(range(n), i))
    C = len(combos)
    rows = np.array(combos)  # (C, i)
    N = mats.shape[0]
    out = np.empty((N, C, C))
    chunk = max(1024, _CHUNK_BUDGET // (C * C * i * i))
    for lo in range(0, N, chunk):
        hi = min(N, lo + chunk)
        block = mats[lo:hi]
        # gather (chunk, C, C, i, i): rows combo a, cols combo b
        sub = block[:, rows[:, None, :, None], rows[None, :, None, :]]
        out[lo:hi] = _det_stack(sub)
    return out[0] if single else out


def _top_sv_log(mats: np.ndarray) -> np.ndarray:
    """log of the largest singular value for each matrix of a stack."""
    sv = np.linalg.svd(mats, compute_uv=False)
    top = sv[..., 0]
    if np.any(top <= 0.0) or not np.all(np.isfinite(top)):
        raise NumericError("singular value computation degenerated")
    return np.log(top)


def _top_eig_log(mats: np.ndarray) -> np.ndarray:
    """log of the spectral radius for each matrix of a stack."""
    ev = np.linalg.eigvals(mats)
    top = np.max(np.abs(ev), axis=-1)
    if np.any(top <= 0.0) or not np.all(np.isfinite(top)):
        raise NumericError("eigenvalue computation degenerated")
    return np.log(top)


def _telescope(ws: list, N: int, n: int) -> np.ndarray:
    """Turn cumulative logs w_1..w_{n-1} into sorted zero-sum rows."""
    mu = np.empty((N, n))
    prev = np.zeros(N)
    for i, w in enumerate(ws):
        mu[:, i] = w - prev
        prev = w
    mu[:, n - 1] = -prev
    # mathematically sorted already; kill 1e-14-level tie noise
    mu.sort(axis=1)
    return mu[:, ::-1]


# Exterior-power budget: the minor build scratches N * C^2 * i^2 floats
# (C = binomial(n, i)); past these limits fall back to plain SVD/eig,
# which keeps full relative accuracy on the top components and degrades
# only on small singular values of strongly anisotropic matrices.
EXT_DIM_LIMIT = 1024
EXT_SCRATCH_LIMIT = 2 ** 27    # floats, ~1 GB


def _ext_affordable(N: int, n: int) -> bool:
    C = math.comb(n, n // 2)
    if C > EXT_DIM_LIMIT:
        return False
    return N * C * C * (n // 2 + 1) ** 2 <= EXT_SCRATCH_LIMIT


def cartan_projection_many(mats: np.ndarray) -> np.ndarray:
    """Cartan projections of a stack (N, n, n) -> (N, n), high relative
    accuracy on every component (see module docstring).

    Large n (exterior dimension above EXT_DIM_LIMIT) falls back to direct
    singular values, whose component i has relative error ~eps * s1/si."""
    mats = np.asarray(mats, dtype=float)
    n = mats.shape[-1]
    if not _ext_affordable(mats.shape[0], n):
        sv = np.linalg.svd(mats, compute_uv=False)
        if np.any(sv <= 0.0) or not np.all(np.isfinite(sv)):
            raise NumericError("singular value computation degenerated")
        return np.log(sv)
    ws = [_top_sv_log(exterior_power_many(mats, i)) for i in range(1, n)]
    return _telescope(ws, mats.shape[0], n)


def jordan_projection_many(mats: np.ndarray) -> np.ndarray:
    """Jordan projections of a stack (N, n, n) -> (N, n) via spectral radii
    of exterior powers; direct eigenvalues beyond EXT_DIM_LIMIT."""
    mats = np.asarray(mats, dtype=float)
    n = mats.shape[-1]
    if not _ext_affordable(mats.shape[0], n):
        mod = np.abs(np.linalg.eigvals(mats))
        if np.any(mod <= 0.0) or not np.all(np.isfinite(mod)):
            raise NumericError("eigenvalue computation degenerated")
        mod.sort(axis=-1)
        return np.log(mod[..., ::-1])
    ws = [_top_eig_log(exterior_power_many(mats, i)) for i in range(1, n)]
    return _telescope(ws, mats.shape[0], n)


def cartan_from_exterior_stacks(stacks: list) -> np.ndarray:
    """Cartan projections from precomputed exterior-power product stacks.

    `stacks[i-1]` holds Lambda^i of each element, i = 1..n-1, built as a
    product of per-letter exterior powers.  Minors of a finished product
    lose all accuracy once eps * e^(alpha_12(mu)) ~ 1 (the minor value
    sigma_1 sigma_2 is a cancellation of terms of size sigma_1^2); products
    of exactly-computed letter minors keep the top singular value to a
    relative eps * length instead.
    """
    n = len(stacks) + 1
    ws = [_top_sv_log(s) for s in stacks]
    return _telescope(ws, stacks[0].shape[0], n)


def jordan_from_exterior_stacks(stacks: list) -> np.ndarray:
    """Jordan projections from precomputed exterior-power product stacks
    (same accuracy rationale as cartan_from_exterior_stacks)."""
    n = len(stacks) + 1
    ws = [_top_eig_log(s) for s in stacks]
    return _telescope(ws, stacks[0].shape[0], n)


# ---------------------------------------------------------------------------
# public single-matrix operations
# ---------------------------------------------------------------------------

def cartan_projection(g) -> CartanVector:
    """mu(g): logs of singular values, nonincreasing, summing to zero."""
    mat = as_matrix_array(g)
    return CartanVector(tuple(cartan_projection_many(mat[None])[0]))


def jordan_projection(g) -> CartanVector:
    """lambda(g): logs of eigenvalue moduli, nonincreasing, summing to zero.

    Agrees with lim_k mu(g^k)/k; for diagonalizable g with a spectral gap
    the k = 64 average is already within 1e-3.
    """
    mat = as_matrix_array(g)
    return CartanVector(tuple(jordan_projection_many(mat[None])[0]))


def opposition_involution(v: CartanVector) -> CartanVector:
    """i(v) = (-v_n, ..., -v_1); satisfies mu(g^-1) = i(mu(g))."""
    return CartanVector(tuple(-x for x in reversed(v.values)))


def proj_distance(p, q) -> float:
    """Angle metric on projective space: arccos |<p, q>|, in [0, pi/2]."""
    if type(p) is not type(q):
        raise InputError("proj_distance needs two points of the same space")
    c = abs(float(p.vec @ q.vec))
    return math.acos(min(1.0, c))


def sym_distance(pair_a, pair_b) -> float:
    """Metric on line-hyperplane pairs: max of the two projective distances."""
    (pa, ha), (pb, hb) = pair_a, pair_b
    return max(proj_distance(pa, pb), proj_distance(ha, hb))


def _principal_eigvec(mat: np.ndarray, which: str) -> np.ndarray:
    """Real unit eigenvector for the eigenvalue of max ("top") or min
    ("bottom") modulus; assumes that modulus is simple."""
    ev, vecs = np.linalg.eig(mat)
    order = np.argsort(np.abs(ev))
    idx = order[-1] if which == "top" else order[0]
    v = vecs[:, idx]
    # simple real eigenvalue: strip the arbitrary complex phase
    pivot = v[np.argmax(np.abs(v))]
    v = (v / pivot).real
    return v / np.linalg.norm(v)


def proximality_gaps(g) -> ProximalityInfo:
    """Spectral gap and attracting-line/repelling-hyperplane angle of g.

    Returns a tagged ProximalityInfo rather than raising: not being
    proximal is an answer, not an error.  The angle is the angle between
    the attracting eigenline and the invariant complementary hyperplane
    (kernel of the top left eigenvector).
    """
    mat = as_matrix_array(g)
    ev = np.linalg.eigvals(mat)
    moduli = np.sort(np.abs(ev))[::-1]
    if moduli[0] <= 0.0:
        return ProximalityInfo(False, 0.0, 0.0, "zero spectral radius")
    gap12 = math.log(moduli[0]) - math.log(max(moduli[1], 1e-300))
    if gap12 <= PROXIMAL_GAP_TOL:
        return ProximalityInfo(False, gap12, 0.0, "no simple top eigenvalue")
    u = _principal_eigvec(mat, "top")
    psi = _principal_eigvec(mat.T, "top")  # normal of the repelling hyperplane
    angle = math.asin(min(1.0, abs(float(u @ psi))))
    return ProximalityInfo(True, gap12, angle)


def attracting_pair(g):
    """Attracting (line, covector) pair of a biproximal element.

    The line is the eigenline of the top eigenvalue of g; the covector is
    the attracting point of the dual representation, i.e. the left
    eigenvector for the smallest eigenvalue.  Its kernel contains the
    attracting line (tangency), matching the incidence satisfied by limit
    sets.  Returns None (tagged failure) when g is not biproximal.
    """
    mat = as_matrix_array(g)
    ev = np.abs(np.linalg.eigvals(mat))
    moduli = np.sort(ev)[::-1]
    top_gap = math.log(moduli[0]) - math.log(max(moduli[1], 1e-300))
    bot_gap = math.log(max(moduli[-2], 1e-300)) - math.log(max(moduli[-1], 1e-300))
    if top_gap <= PROXIMAL_GAP_TOL or bot_gap <= PROXIMAL_GAP_TOL:
        return None
    line = ProjPoint(_principal_eigvec(mat, "top"))
    cov = DualProjPoint(_principal_eigvec(mat.T, "bottom"))
    return line, cov


def dual_action(g, cov: DualProjPoint) -> DualProjPoint:
    """Image of a covector under the dual representation (g^-1)^T."""
    mat = as_matrix_array(g)
    return DualProjPoint(np.linalg.solve(mat.T, cov.vec))


def act_on_point(g, p: ProjPoint) -> ProjPoint:
    """Image of a projective point under g."""
    mat = as_matrix_array(g)
    return ProjPoint(mat @ p.vec)
