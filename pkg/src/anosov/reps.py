"""Representation functors on SL(n, R): exterior powers, symmetric square,
tensor products, duals, and the irreducible (principal) SL(2) embeddings.

All constructions use orthonormal bases for the target spaces, so orthogonal
matrices map to orthogonal matrices and singular values transform by the
expected multiplicative rules:

    mu(Lambda^i g)   has entries  mu_a + mu_b (a < b indices of g),
    mu(Sym^2 g)      has entries  mu_a + mu_b (a <= b),
    mu(g (x) h)      has entries  mu_a(g) + mu_b(h),
    mu(dual g)       = i(mu(g))  (opposition involution).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .linalg import SquareMatrix, as_matrix_array, exterior_power_many


def exterior_power(g, i: int) -> SquareMatrix:
    """Lambda^i g in the lexicographic wedge basis e_{j1} ^ ... ^ e_{ji}."""
    mat = as_matrix_array(g)
    return SquareMatrix(exterior_power_many(mat, i))


def _sym_pairs(n: int):
    return [(a, b) for a in range(n) for b in range(a, n)]


def sym_square_many(mats: np.ndarray) -> np.ndarray:
    """Sym^2 of a stack, orthonormal basis, batched.

    Realized on symmetric matrices X -> g X g^T with the Frobenius
    orthonormal basis {E_aa} and {(E_ab + E_ba)/sqrt(2), a < b}, pairs in
    lexicographic order.  This is a homomorphism and sends SO(n) to SO(N).
    """
    mats = np.asarray(mats, dtype=float)
    single = mats.ndim == 2
    if single:
        mats = mats[None]
    n = mats.shape[-1]
    pairs = _sym_pairs(n)
    N = len(pairs)
    out = np.empty((mats.shape[0], N, N))
    half = math.sqrt(0.5)
    for col, (c, d) in enumerate(pairs):
        if c == d:
            img = np.einsum("mi,mj->mij", mats[:, :, c], mats[:, :, c])
        else:
            img = np.einsum("mi,mj->mij", mats[:, :, c], mats[:, :, d])
            img = (img + np.swapaxes(img, 1, 2)) * half
        for row, (a, b) in enumerate(pairs):
            out[:, row, col] = img[:, a, b] * (1.0 if a == b else math.sqrt(2.0))
    return out[0] if single else out


def sym_square(g) -> SquareMatrix:
    """Sym^2 g on quadratic forms, orthonormal basis, determinant one."""
    return SquareMatrix(sym_square_many(as_matrix_array(g)))


def tensor_product(g, h) -> SquareMatrix:
    """g (x) h on R^n (x) R^m in the lexicographic product basis (Kronecker)."""
    return SquareMatrix(np.kron(as_matrix_array(g), as_matrix_array(h)))


def tensor_product_many(gs: np.ndarray, hs: np.ndarray) -> np.ndarray:
    """Batched Kronecker product of two aligned stacks."""
    gs = np.asarray(gs, dtype=float)
    hs = np.asarray(hs, dtype=float)
    N, n, _ = gs.shape
    m = hs.shape[-1]
    out = np.einsum("nab,ncd->nacbd", gs, hs)
    return out.reshape(N, n * m, n * m)


def dual_rep(g) -> SquareMatrix:
    """The dual (contragredient) representation g -> (g^-1)^T."""
    return SquareMatrix(np.linalg.inv(as_matrix_array(g)).T)


def principal_sl2(g, n: int) -> SquareMatrix:
    """Irreducible n-dimensional representation of SL(2, R): Sym^(n-1) of
    the standard representation, in the orthonormal monomial basis.

    diag(e^a, e^-a) maps to a matrix conjugate to
    diag(e^((n-1)a), e^((n-3)a), ..., e^(-(n-1)a)); SO(2) lands in SO(n).
    For n = 3 this coincides with sym_square.
    """
    mat = as_matrix_array(g)
    if mat.shape[0] != 2:
        raise InputError("principal_sl2 expects a 2 x 2 matrix")
    if n < 2:
        raise InputError("target dimension must be >= 2")
    m = n - 1
    a, b = mat[0, 0], mat[0, 1]
    c, d = mat[1, 0], mat[1, 1]
    # column j = coefficients of (a e1 + c e2)^(m-j) (b e1 + d e2)^j
    # in the monomial basis e1^(m-i) e2^i, via polynomial convolution
    cols = []
    for j in range(n):
        poly = np.ones(1)
        for _ in range(m - j):
            poly = np.convolve(poly, np.array([a, c]))
        for _ in range(j):
            poly = np.convolve(poly, np.array([b, d]))
        cols.append(poly)
    mono = np.stack(cols, axis=1)
    scale = np.sqrt([math.comb(m, i) for i in range(n)])
    out = mono * (scale[None, :] / scale[:, None])
    return SquareMatrix(out)
