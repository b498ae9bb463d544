import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copdep.algebra import (
    classify_invertibility,
    markov_compose,
    refine,
    shuffle_left,
    star,
    star_boards,
    star_lattice,
)
from copdep.copulas import (
    PI,
    M,
    W,
    Checkerboard,
    CheckerboardCopula,
    DomainError,
    GridConfig,
    Tent,
    to_checkerboard,
    transpose,
    validate,
)
from copdep.props import random_board

from conftest import boards

CFG64 = GridConfig(quad_n=64)


def _lat(c):
    return c.board.lattice()


def _same_n_boards(n):
    return st.tuples(boards(st.just(n)), boards(st.just(n)))


# -- identities ------------------------------------------------------------


def test_pi_is_null_element_exact_path():
    got = star(Tent(0.4), PI, CFG64, path="exact")
    assert np.abs(_lat(got) - to_checkerboard(PI, 64).lattice()).max() <= 1e-15
    got = star(PI, Tent(0.4), CFG64, path="exact")
    assert np.abs(_lat(got) - to_checkerboard(PI, 64).lattice()).max() <= 1e-15


@pytest.mark.parametrize("path", ["exact", "quadrature"])
def test_m_is_unit_element(path):
    want = to_checkerboard(Tent(0.4), 64).lattice()
    assert np.abs(_lat(star(Tent(0.4), M, CFG64, path)) - want).max() <= 1e-12
    assert np.abs(_lat(star(M, Tent(0.4), CFG64, path)) - want).max() <= 1e-12


def test_tent_is_left_invertible():
    got = star(transpose(Tent(0.3)), Tent(0.3), GridConfig(quad_n=256))
    assert np.abs(_lat(got) - to_checkerboard(M, 256).lattice()).max() <= 1e-12


def test_tent_is_not_right_invertible():
    got = star(Tent(0.3), transpose(Tent(0.3)), CFG64)
    assert np.abs(_lat(got) - to_checkerboard(M, 64).lattice()).max() > 0.05


@given(boards(st.integers(1, 10)))
@settings(max_examples=50, deadline=None)
def test_board_identities(b):
    n = b.n
    pi, m = to_checkerboard(PI, n), to_checkerboard(M, n)
    assert np.abs(star_boards(b, pi).mass - pi.mass).max() <= 1e-12
    assert np.abs(star_boards(pi, b).mass - pi.mass).max() <= 1e-12
    assert np.abs(star_boards(b, m).mass - b.mass).max() <= 1e-12
    assert np.abs(star_boards(m, b).mass - b.mass).max() <= 1e-12


# -- the two evaluation routes ---------------------------------------------


@pytest.mark.parametrize("n", [8, 16])
def test_path_agreement(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        a, b = Checkerboard(random_board(rng, n)), Checkerboard(random_board(rng, n))
        cfg = GridConfig(quad_n=n)
        exact = star(a, b, cfg, path="exact").board.mass
        quad = star(a, b, cfg, path="quadrature").board.mass
        assert np.abs(exact - quad).max() <= 1e-10


@given(_same_n_boards(6))
@settings(max_examples=40, deadline=None)
def test_path_agreement_property(pair):
    a, b = pair
    cfg = GridConfig(quad_n=6)
    exact = star(Checkerboard(a), Checkerboard(b), cfg, "exact").board.mass
    quad = star(Checkerboard(a), Checkerboard(b), cfg, "quadrature").board.mass
    assert np.abs(exact - quad).max() <= 1e-10


def test_matrix_route_is_scaled_product(rng):
    a, b = random_board(rng, 5), random_board(rng, 5)
    assert np.allclose(star_boards(a, b).mass, 5 * (a.mass @ b.mass), atol=0, rtol=0)


def test_star_lattice_boundaries():
    s = star_lattice(Tent(0.2), Tent(0.6), 16)
    g = np.linspace(0, 1, 17)
    assert np.abs(s[0]).max() <= 1e-15 and np.abs(s[:, 0]).max() <= 1e-15
    assert np.abs(s[-1] - g).max() <= 1e-12 and np.abs(s[:, -1] - g).max() <= 1e-12


def test_mixed_resolution_uses_lcm(rng):
    a, b = random_board(rng, 4), random_board(rng, 6)
    got = star(Checkerboard(a), Checkerboard(b), GridConfig(quad_n=512))
    assert got.n == 12
    want = star_boards(refine(a, 12), refine(b, 12))
    assert np.abs(got.board.mass - want.mass).max() <= 1e-15


def test_refine_is_exact_for_multiples(rng):
    b = random_board(rng, 3)
    r = refine(b, 9)
    assert np.abs(r.mass.reshape(3, 3, 3, 3).sum(axis=(1, 3)) - b.mass).max() <= 1e-15


def test_unknown_path():
    with pytest.raises(DomainError):
        star(PI, M, CFG64, path="fast")


# -- structure -------------------------------------------------------------


@given(_same_n_boards(7))
@settings(max_examples=50, deadline=None)
def test_transpose_anti_homomorphism(pair):
    a, b = (Checkerboard(x) for x in pair)
    left = star(a, b).board.mass.T
    right = star(transpose(b), transpose(a)).board.mass
    assert np.abs(left - right).max() <= 1e-10


@given(_same_n_boards(5))
@settings(max_examples=50, deadline=None)
def test_star_output_is_a_copula(pair):
    a, b = (Checkerboard(x) for x in pair)
    c = star(a, b)
    assert c.board.margin_error() <= 1e-12
    assert validate(c, 5) == []


@pytest.mark.parametrize("a, b", [(Tent(0.3), Tent(0.7)), (transpose(Tent(0.2)), PI), (W, Tent(0.5))])
def test_star_of_analytic_copulas_is_a_copula(a, b):
    assert validate(star(a, b, CFG64), 64) == []


@given(st.tuples(boards(st.just(6)), boards(st.just(6)), boards(st.just(6))))
@settings(max_examples=40, deadline=None)
def test_associativity(triple):
    a, b, c = (Checkerboard(x) for x in triple)
    left = star(star(a, b), c).board.mass
    right = star(a, star(b, c)).board.mass
    assert np.abs(left - right).max() <= 1e-10


def test_continuity_in_the_left_factor():
    cfg = GridConfig(quad_n=256)
    ref = _lat(star(Tent(0.3), Tent(0.7), cfg))
    dist = [
        np.abs(_lat(star(Checkerboard(to_checkerboard(Tent(0.3), n)), Tent(0.7), cfg)) - ref).max()
        for n in (2, 4, 8, 16, 32, 64, 128, 256)
    ]
    assert all(b <= a + 1e-12 for a, b in zip(dist, dist[1:]))
    assert dist[-1] < 1e-3


# -- Markov chains ---------------------------------------------------------


def test_markov_compose_examples(rng):
    c = Checkerboard(random_board(rng, 8))
    d = Checkerboard(random_board(rng, 8))
    assert markov_compose([c]) is c
    pi = Checkerboard(to_checkerboard(PI, 8))
    m = Checkerboard(to_checkerboard(M, 8))
    assert np.abs(markov_compose([pi, c, d]).board.mass - pi.board.mass).max() <= 1e-15
    assert np.abs(markov_compose([m, c, m]).board.mass - c.board.mass).max() <= 1e-15


def test_markov_compose_analytic_chain():
    got = markov_compose([M, Tent(0.4), M], CFG64)
    assert np.abs(_lat(got) - to_checkerboard(Tent(0.4), 64).lattice()).max() <= 1e-12
    got = markov_compose([PI, Tent(0.4), Tent(0.1)], CFG64)
    assert np.abs(_lat(got) - to_checkerboard(PI, 64).lattice()).max() <= 1e-12


def test_markov_compose_needs_a_link():
    with pytest.raises(DomainError):
        markov_compose([])


# -- invertibility ---------------------------------------------------------


@pytest.mark.parametrize(
    "c, kind",
    [
        (M, "Invertible"),
        (W, "Invertible"),
        (Tent(0.5), "LeftInvertible"),
        (transpose(Tent(0.5)), "RightInvertible"),
        (PI, "Neither"),
        (Tent(0.0), "Invertible"),
    ],
)
def test_classify_invertibility(c, kind):
    res = classify_invertibility(c)
    assert res.kind == kind


def test_classification_diagnostics():
    res = classify_invertibility(Tent(0.5))
    assert res.left and not res.right
    assert res.left_fraction == 0.0
    assert res.right_fraction == pytest.approx(0.5, abs=0.01)
    assert classify_invertibility(PI).left_fraction > 0.8


@pytest.mark.parametrize("eps, delta", [(0.0, 0.1), (0.5, 0.1), (0.1, 0.0), (0.1, 1.0)])
def test_classify_rejects_bad_thresholds(eps, delta):
    with pytest.raises(DomainError):
        classify_invertibility(PI, eps=eps, delta=delta)


# -- shuffles --------------------------------------------------------------


def test_shuffle_examples():
    c = Tent(0.3)
    ident = shuffle_left(c, np.arange(8), 8)
    assert np.array_equal(ident.board.mass, to_checkerboard(c, 8).mass)
    perm = np.random.default_rng(0).permutation(8)
    assert np.allclose(shuffle_left(PI, perm, 8).board.mass, 1 / 64, atol=1e-16)
    rev = shuffle_left(Checkerboard(to_checkerboard(M, 4)), [3, 2, 1, 0], 4)
    assert np.array_equal(rev.board.mass, np.fliplr(np.eye(4)) / 4)
    assert np.abs(rev.board.mass - to_checkerboard(W, 4).mass).max() <= 1e-15


def test_shuffle_is_left_product_with_permutation_board(rng):
    n = 6
    c = random_board(rng, n)
    perm = rng.permutation(n)
    shuffle = CheckerboardCopula(np.eye(n)[perm] / n)
    assert np.abs(shuffle_left(Checkerboard(c), perm, n).board.mass - star_boards(shuffle, c).mass).max() <= 1e-15


@pytest.mark.parametrize("perm", [[0, 1, 1], [0, 1], [0, 1, 3]])
def test_shuffle_rejects_non_permutations(perm):
    with pytest.raises(DomainError):
        shuffle_left(PI, perm, 3)
