import math

import numpy as np
import pytest

from anosov.errors import InputError
from anosov.linalg import (
    MAX_DIM,
    CartanVector,
    DualProjPoint,
    ProjPoint,
    SquareMatrix,
    act_on_point,
    attracting_pair,
    cartan_from_exterior_stacks,
    jordan_from_exterior_stacks,
    exterior_power_many,
    cartan_projection,
    cartan_projection_many,
    dual_action,
    epsilon_form,
    jordan_projection,
    jordan_projection_many,
    opposition_involution,
    proj_distance,
    proximality_gaps,
    root_form,
    sym_distance,
    weight_form,
)

from conftest import random_unimodular


# ---------------------------------------------------------------------------
# SquareMatrix construction
# ---------------------------------------------------------------------------

def test_renormalizes_positive_determinant():
    g = SquareMatrix(2.0 * np.eye(3))
    assert abs(float(np.max(np.abs(g.mat))) - 1.0) < 1e-12
    assert abs(float(np.linalg.det(g.mat)) - 1.0) < 1e-12


def test_rejects_negative_determinant():
    with pytest.raises(InputError):
        SquareMatrix(np.diag([-2.0, 1.0, 0.5]))


def test_rejects_singular_matrix():
    with pytest.raises(InputError):
        SquareMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_rejects_numerically_singular_dense():
    with pytest.raises(InputError):
        SquareMatrix(np.outer([1.0, 2.0, 3.0], [0.5, -1.0, 2.0]))


def test_rejects_nonsquare_and_nonfinite():
    with pytest.raises(InputError):
        SquareMatrix(np.ones((2, 3)))
    bad = np.eye(3)
    bad[0, 0] = np.nan
    with pytest.raises(InputError):
        SquareMatrix(bad)


def test_rejects_oversized_and_undersized():
    with pytest.raises(InputError):
        SquareMatrix(np.eye(MAX_DIM + 1))
    with pytest.raises(InputError):
        SquareMatrix(np.eye(1))


def test_accepts_graded_word_product_unrescaled(so21):
    # LU det of this product underflows to 0; the true matrix is unimodular
    # and must be accepted as-is, keeping mu/lambda exact
    b = np.asarray(so21.gs.generator_matrix(1), dtype=float)
    p = np.linalg.matrix_power(b, 10)
    g = SquareMatrix(p)
    assert np.allclose(g.mat, p)
    lam = jordan_projection(g).values
    assert abs(lam[0] - 20.0) < 1e-9
    assert abs(lam[2] + 20.0) < 1e-9


def test_matrix_is_read_only():
    g = SquareMatrix(np.eye(3))
    with pytest.raises(ValueError):
        g.mat[0, 0] = 5.0


# ---------------------------------------------------------------------------
# Cartan projection
# ---------------------------------------------------------------------------

def test_cartan_shear_example():
    # singular values of [[1,1],[0,1]] are golden-ratio conjugates
    mu = cartan_projection(SquareMatrix([[1.0, 1.0], [0.0, 1.0]])).values
    expected = math.log((1.0 + math.sqrt(5.0)) / 2.0)
    assert abs(mu[0] - expected) < 1e-12
    assert abs(mu[1] + expected) < 1e-12


def test_cartan_diagonal_example():
    mu = cartan_projection(SquareMatrix(np.diag([3.0, 1.0 / 3.0]))).values
    assert abs(mu[0] - math.log(3.0)) < 1e-12


def test_cartan_sorted_and_zero_sum(rng):
    for _ in range(200):
        g = SquareMatrix(random_unimodular(rng, 4, spread=2.0))
        mu = np.array(cartan_projection(g).values)
        assert np.all(np.diff(mu) <= 1e-12)
        assert abs(mu.sum()) < 1e-9


def test_cartan_matches_svd_logs(rng):
    for _ in range(100):
        g = SquareMatrix(random_unimodular(rng, 3))
        mu = np.array(cartan_projection(g).values)
        sv = np.log(np.linalg.svd(g.mat, compute_uv=False))
        assert np.max(np.abs(mu - sv)) < 1e-10


def test_cartan_inverse_is_opposition(rng):
    # mu(g^-1) = i(mu(g)) across sizes
    for n in (3, 4, 5):
        for _ in range(100):
            g = SquareMatrix(random_unimodular(rng, n))
            mu = cartan_projection(g)
            mu_inv = cartan_projection(SquareMatrix(np.linalg.inv(g.mat)))
            expect = opposition_involution(mu)
            err = np.abs(np.array(mu_inv.values) - np.array(expect.values))
            assert np.max(err) < 1e-8


def test_opposition_examples():
    v = CartanVector((1.0, 0.0, -1.0))
    assert opposition_involution(v).values == pytest.approx((1.0, 0.0, -1.0))
    w = CartanVector((2.0, -0.5, -1.5))
    assert opposition_involution(w).values == pytest.approx((1.5, 0.5, -2.0))


def test_cartan_many_matches_single(rng):
    mats = np.stack([random_unimodular(rng, 3) for _ in range(50)])
    many = cartan_projection_many(mats)
    for i in range(50):
        single = cartan_projection(SquareMatrix(mats[i])).values
        assert np.max(np.abs(many[i] - np.array(single))) < 1e-10


def test_cartan_many_large_dimension_fallback(rng):
    # dimensions whose exterior powers are unaffordable still return logs
    q = rng.normal(size=(40, 40))
    q, _ = np.linalg.qr(q)
    d = np.exp(np.linspace(1.0, -1.0, 40))
    mats = np.stack([q @ np.diag(d) @ q.T])
    mu = cartan_projection_many(mats)[0]
    assert np.max(np.abs(mu - np.log(np.sort(d)[::-1]))) < 1e-8


def test_cartan_subadditive_under_products(rng):
    # |mu_i(gh) - mu_i(h)| <= ||mu(g)||_inf
    for _ in range(100):
        g = random_unimodular(rng, 3)
        h = random_unimodular(rng, 3)
        mu_g = np.array(cartan_projection(SquareMatrix(g)).values)
        mu_h = np.array(cartan_projection(SquareMatrix(h)).values)
        mu_gh = np.array(cartan_projection(SquareMatrix(g @ h)).values)
        assert np.max(np.abs(mu_gh - mu_h)) <= np.max(np.abs(mu_g)) + 1e-10


# ---------------------------------------------------------------------------
# Jordan projection
# ---------------------------------------------------------------------------

def test_jordan_unipotent_is_zero():
    lam = jordan_projection(SquareMatrix([[1.0, 1.0], [0.0, 1.0]])).values
    assert np.max(np.abs(np.array(lam))) < 1e-9


def test_jordan_similarity_invariant(rng):
    for _ in range(50):
        g = random_unimodular(rng, 3)
        h = random_unimodular(rng, 3)
        lam1 = np.array(jordan_projection(SquareMatrix(g)).values)
        conj = h @ g @ np.linalg.inv(h)
        lam2 = np.array(jordan_projection(SquareMatrix(conj)).values)
        assert np.max(np.abs(lam1 - lam2)) < 1e-7


def test_jordan_as_cartan_power_limit(rng):
    # lambda_1(g) = lim mu_1(g^k)/k; at k = 64 the gap is O(1/k).  The top
    # component stays accurate at any grading; the full vector needs mild
    # spread so the power's minors stay above the rounding floor.
    for _ in range(20):
        g = random_unimodular(rng, 3, spread=1.0)
        lam1 = jordan_projection(SquareMatrix(g)).values[0]
        p64 = np.linalg.matrix_power(SquareMatrix(g).mat, 64)
        mu1 = cartan_projection(SquareMatrix(p64)).values[0] / 64.0
        assert abs(lam1 - mu1) < 1e-1
    for _ in range(20):
        q1, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        q2, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        a = rng.uniform(-0.25, 0.25, size=3)
        g = q1 @ np.diag(np.exp(a - a.mean())) @ q2
        lam = np.array(jordan_projection(SquareMatrix(g)).values)
        p40 = np.linalg.matrix_power(SquareMatrix(g).mat, 40)
        mu40 = np.array(cartan_projection(SquareMatrix(p40)).values) / 40.0
        assert np.max(np.abs(lam - mu40)) < 1.5e-1


def test_jordan_many_matches_single(rng):
    mats = np.stack([random_unimodular(rng, 3) for _ in range(50)])
    many = jordan_projection_many(mats)
    for i in range(50):
        single = jordan_projection(SquareMatrix(mats[i])).values
        assert np.max(np.abs(many[i] - np.array(single))) < 1e-8


def test_lambda1_never_exceeds_mu1(rng):
    for _ in range(200):
        g = SquareMatrix(random_unimodular(rng, 3))
        mu1 = cartan_projection(g).values[0]
        lam1 = jordan_projection(g).values[0]
        assert lam1 <= mu1 + 1e-8


def test_mu_lambda_comparison_on_word_ball(so21_ball):
    # over proximal ball entries: mu1 >= lam1 >= mu1 + log |<v1, x+>|
    # (top right-singular direction against the attracting eigenline);
    # slack covers eigensolver conditioning on graded products
    from anosov.linalg import _principal_eigvec

    checked = 0
    for entry in so21_ball.entries():
        if len(entry.word.letters) == 0:
            continue
        m = np.asarray(entry.matrix, dtype=float)
        info = proximality_gaps(m)
        if not info.proximal:
            continue
        mu1 = entry.mu.values[0]
        lam1 = jordan_projection(SquareMatrix(m)).values[0]
        assert lam1 <= mu1 + 1e-2
        xp = _principal_eigvec(m, "top")
        v1 = np.linalg.svd(m)[2][0]
        align = abs(float(np.dot(v1, xp)))
        if align < 0.1:
            continue
        assert mu1 - lam1 <= -math.log(align) + 1e-2
        checked += 1
    assert checked > 5000


# ---------------------------------------------------------------------------
# linear forms on the Weyl chamber
# ---------------------------------------------------------------------------

def test_root_and_weight_forms():
    v = np.array([3.0, 1.0, -4.0])
    assert root_form(1, 2, 3)(v) == pytest.approx(2.0)
    assert root_form(1, 3, 3)(v) == pytest.approx(7.0)
    assert epsilon_form(2, 3)(v) == pytest.approx(1.0)
    assert weight_form(1, 3)(v) == pytest.approx(3.0)
    assert weight_form(2, 3)(v) == pytest.approx(4.0)


def test_form_rejects_bad_indices():
    with pytest.raises(InputError):
        root_form(2, 2, 3)
    with pytest.raises(InputError):
        root_form(0, 1, 3)
    with pytest.raises(InputError):
        weight_form(3, 3)


def test_forms_apply_to_batches():
    f = root_form(1, 2, 3)
    vals = f(np.array([[3.0, 1.0, -4.0], [2.0, 0.0, -2.0]]))
    assert vals == pytest.approx([2.0, 2.0])


# ---------------------------------------------------------------------------
# proximality and attracting pairs
# ---------------------------------------------------------------------------

def test_proximality_of_diagonal():
    info = proximality_gaps(np.diag([2.0, 1.0, 0.5]))
    assert info.proximal
    assert info.gap12 == pytest.approx(math.log(2.0))
    assert info.angle == pytest.approx(math.pi / 2.0)


def test_proximality_of_shear():
    # eigenvalues 2 and 1/2 but eigenbasis is skew: smaller angle
    info = proximality_gaps(np.array([[2.0, 1.0], [0.0, 0.5]]))
    assert info.proximal
    assert info.gap12 == pytest.approx(math.log(4.0))
    assert 0.0 < info.angle < math.pi / 2.0 - 0.3


def test_rotation_is_not_proximal():
    c, s = math.cos(0.7), math.sin(0.7)
    info = proximality_gaps(np.array([[c, -s], [s, c]]))
    assert not info.proximal
    assert info.reason


def test_attracting_pair_diagonal():
    line, hyp = attracting_pair(SquareMatrix(np.diag([2.0, 1.0, 0.5])))
    assert proj_distance(line, ProjPoint([1.0, 0.0, 0.0])) < 1e-12
    assert proj_distance(hyp, DualProjPoint([0.0, 0.0, 1.0])) < 1e-12


def test_attracting_pair_is_fixed(rng, so21):
    # g fixes its own attracting line and repelling hyperplane
    gens = so21.gs
    for code in range(4):
        m = gens.letter_mats[code]
        g = SquareMatrix(m)
        line, hyp = attracting_pair(g)
        assert proj_distance(act_on_point(g, line), line) < 1e-6
        assert proj_distance(dual_action(g, hyp), hyp) < 1e-6


def test_attracting_pair_conjugation_equivariance(rng):
    for _ in range(50):
        g = np.diag([3.0, 1.0, 1.0 / 3.0])
        h = random_unimodular(rng, 3)
        conj = SquareMatrix(h @ g @ np.linalg.inv(h))
        line, hyp = attracting_pair(conj)
        expect_line = ProjPoint(h @ np.array([1.0, 0.0, 0.0]))
        expect_hyp = DualProjPoint(np.linalg.inv(h).T @ np.array([0.0, 0.0, 1.0]))
        assert proj_distance(line, expect_line) < 1e-8
        assert proj_distance(hyp, expect_hyp) < 1e-8


def test_attracting_pair_rejects_nonproximal():
    c, s = math.cos(0.7), math.sin(0.7)
    rot = np.eye(3)
    rot[:2, :2] = [[c, -s], [s, c]]
    with pytest.raises(InputError):
        attracting_pair(SquareMatrix(rot))


# ---------------------------------------------------------------------------
# projective distances
# ---------------------------------------------------------------------------

def test_proj_distance_examples():
    e1 = ProjPoint([1.0, 0.0])
    e2 = ProjPoint([0.0, 1.0])
    diag = ProjPoint([1.0, 1.0])
    assert proj_distance(e1, e2) == pytest.approx(1.0)
    assert proj_distance(e1, diag) == pytest.approx(math.sin(math.pi / 4.0))
    assert proj_distance(e1, ProjPoint([-2.0, 0.0])) == pytest.approx(0.0)


def test_proj_distance_triangle_inequality(rng):
    for _ in range(300):
        p = ProjPoint(rng.normal(size=4))
        q = ProjPoint(rng.normal(size=4))
        r = ProjPoint(rng.normal(size=4))
        assert proj_distance(p, q) <= (
            proj_distance(p, r) + proj_distance(r, q) + 1e-10)


def test_sym_distance_is_max_of_components(rng):
    for _ in range(100):
        a = (ProjPoint(rng.normal(size=3)), DualProjPoint(rng.normal(size=3)))
        b = (ProjPoint(rng.normal(size=3)), DualProjPoint(rng.normal(size=3)))
        d = sym_distance(a, b)
        assert d == pytest.approx(max(proj_distance(a[0], b[0]),
                                      proj_distance(a[1], b[1])))


# ---------------------------------------------------------------------------
# exterior stack telescopes
# ---------------------------------------------------------------------------

def test_stack_telescopes_match_direct(so21):
    gens = so21.gs
    word = (0, 2, 0, 0, 3, 1)
    m = np.eye(3)
    for c in word:
        m = m @ gens.letter_mats[c]
    stacks = []
    for i in (1, 2):
        exts = exterior_power_many(gens.letter_mats, i)
        acc = np.eye(exts.shape[1])
        for c in word:
            acc = acc @ exts[c]
        stacks.append(acc[None])
    mu_stack = cartan_from_exterior_stacks(stacks)[0]
    mu_direct = np.array(cartan_projection(SquareMatrix(m)).values)
    assert np.max(np.abs(mu_stack - mu_direct)) < 1e-9
    lam_stack = jordan_from_exterior_stacks(stacks)[0]
    lam_direct = np.array(jordan_projection(SquareMatrix(m)).values)
    assert np.max(np.abs(lam_stack - lam_direct)) < 1e-9
