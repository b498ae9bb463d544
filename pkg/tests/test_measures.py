import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copdep.algebra import StripShuffle, shuffle_left
from copdep.copulas import (
    PI,
    M,
    W,
    Checkerboard,
    CheckerboardCopula,
    GridConfig,
    Tent,
    convex_mix,
    flip_y,
    to_checkerboard,
    transpose,
    validate,
)
from copdep.measures import (
    MeasureError,
    MeasureSpec,
    density_measure,
    measure,
    nonsym_entropy,
    normalization_constant,
    parse_measure,
    schweizer_wolff,
    sobolev,
    tau_alpha,
    tau_generic,
)
from copdep.props import BOUNDED_MEASURES, builtin_specs, random_board

from conftest import boards

IDS = [
    "tau1", "tau2", "tau_alpha:3", "sw_sigma", "sw_gamma", "sw_kappa", "sobolev",
    "renyi_mi:0.5", "tsallis:2", "copula_distance:1", "shannon_mi", "linfoot",
    "ns_renyi:1.5", "ns_tsallis:0.5", "ns_shannon", "gns_renyi:1.5:0", "gns_tsallis:2.5:1", "gns_shannon:0.5",
]
ENTROPY_IDS = ["ns_renyi:0.5", "ns_renyi:1.5", "ns_tsallis:0.5", "ns_tsallis:1.5", "ns_shannon",
               "gns_renyi:0.5:-1.9", "gns_renyi:3:1", "gns_tsallis:2.5:1", "gns_tsallis:0.3:-1.5",
               "gns_shannon:0", "gns_shannon:-1.5", "gns_shannon:4"]
DENSITY_IDS = ["renyi_mi:0.5", "renyi_mi:2", "tsallis:0.5", "tsallis:3", "copula_distance:1",
               "copula_distance:2", "shannon_mi", "linfoot"]


# -- identifiers -----------------------------------------------------------


@pytest.mark.parametrize("ident", IDS)
def test_identifiers_round_trip(ident):
    assert parse_measure(ident).ident == ident


@pytest.mark.parametrize(
    "ident",
    ["tau0", "tau_alpha:0.5", "tau_alpha", "renyi_mi:1", "tsallis:0", "copula_distance:0.5",
     "ns_renyi:2", "ns_renyi:1", "ns_tsallis:2.5", "gns_renyi:3:0", "gns_tsallis:1.5:-2",
     "gns_shannon:-2", "sw_delta", "tau1:3", "ns_shannon:1", "tau_alpha:x", "gns_renyi:1.5"],
)
def test_bad_identifiers_rejected(ident):
    with pytest.raises(MeasureError):
        parse_measure(ident)


def test_spec_direction():
    assert parse_measure("tau1", "yx").direction == "yx"
    with pytest.raises(MeasureError):
        MeasureSpec("tau_alpha", alpha=1.0, direction="xz")
    assert parse_measure("tau2").bounded and not parse_measure("shannon_mi").bounded


# -- tau_alpha ---------------------------------------------------------------


def test_normalization_constants():
    assert normalization_constant(1) == pytest.approx(3.0, abs=1e-15)
    assert normalization_constant(2) == pytest.approx(math.sqrt(6), abs=1e-15)


@pytest.mark.parametrize(
    "c, alpha, want",
    [(PI, 1, 0.0), (M, 1, 1.0), (M, 2, 1.0), (M, 3, 1.0), (transpose(Tent(0.3)), 1, 0.58), (W, 2, 1.0)],
)
def test_tau_examples(c, alpha, want):
    # v = theta is a kink of the u-integral; off the quadrature cell edges it costs ~1e-8
    assert tau_alpha(c, alpha).value == pytest.approx(want, abs=1e-6)


def test_tau_rejects_small_alpha():
    with pytest.raises(MeasureError):
        tau_alpha(PI, 0.9)


def test_tau_raw_value_is_the_integral():
    r = tau_alpha(M, 2)
    assert r.raw_value == pytest.approx(1 / 6, abs=1e-12)
    assert r.value == pytest.approx(normalization_constant(2) * math.sqrt(r.raw_value))


@pytest.mark.parametrize("theta", [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0])
def test_tent_closed_forms(theta):
    c = Tent(theta)
    assert tau_alpha(c, 1).value == pytest.approx(1.0, abs=1e-12)
    assert tau_alpha(c, 2).value == pytest.approx(1.0, abs=1e-12)
    # the yx integrand kinks at v = theta, inside a quadrature cell in general
    assert tau_alpha(c, 1, direction="yx").value == pytest.approx(theta**2 + (1 - theta) ** 2, abs=1e-6)
    assert tau_alpha(c, 2, direction="yx").value ** 2 == pytest.approx(3 * (theta - 0.5) ** 2 + 0.25, abs=1e-6)


def test_board_path_is_exact_and_matches_quadrature(rng):
    b = Checkerboard(random_board(rng, 8))
    for alpha in (1.0, 2.0):
        exact = tau_alpha(b, alpha)
        assert exact.path == "exact-checkerboard" and exact.grid == 8
        quad = tau_generic(b, lambda x, a=alpha: np.abs(x) ** a, GridConfig(quad_n=4096))
        assert quad.raw_value == pytest.approx(exact.raw_value, abs=1e-8)


def test_direction_is_transpose(rng):
    b = Checkerboard(random_board(rng, 6))
    for name in ("tau1", "tau2", "ns_shannon", "sobolev", "sw_sigma"):
        yx = measure(b, parse_measure(name, "yx"))
        assert yx.direction == "yx"
        assert yx.value == pytest.approx(measure(transpose(b), name).value, abs=1e-15)


# -- generic phi -------------------------------------------------------------


def test_generic_examples():
    assert tau_generic(PI, abs).value == pytest.approx(0.0, abs=1e-15)
    assert tau_generic(M, lambda x: x * x).value == pytest.approx(1 / 6, abs=1e-12)
    r = tau_generic(Tent(0.5), np.abs)
    assert r.value == pytest.approx(1 / 3, abs=1e-12)
    assert r.raw_value == r.value


def test_generic_scalar_phi_is_accepted():
    assert tau_generic(M, lambda x: abs(x) if isinstance(x, float) else float("nan"), GridConfig(quad_n=16)).value == pytest.approx(
        tau_generic(M, np.abs, GridConfig(quad_n=16)).value
    )


@pytest.mark.parametrize("phi", [lambda x: -x * x, lambda x: np.abs(x) + 1, np.sin])
def test_generic_rejects_non_convex_or_offset_phi(phi):
    with pytest.raises(MeasureError):
        tau_generic(M, phi)


# -- Schweizer-Wolff and Sobolev ---------------------------------------------


@pytest.mark.parametrize("which", ["sigma", "gamma", "kappa"])
def test_sw_independence(which):
    assert schweizer_wolff(PI, which).value == pytest.approx(0.0, abs=1e-15)


def test_sw_upper_bound():
    assert schweizer_wolff(M, "sigma").value == pytest.approx(1.0, abs=1e-12)
    assert schweizer_wolff(M, "sigma").raw_value == pytest.approx(1 / 12, abs=1e-12)
    assert schweizer_wolff(M, "gamma").value == pytest.approx(1.0, abs=1e-12)
    assert schweizer_wolff(M, "gamma").raw_value == pytest.approx(1 / 90, abs=1e-12)
    assert schweizer_wolff(M, "kappa").value == pytest.approx(1.0, abs=1e-12)
    assert schweizer_wolff(W, "sigma").value == pytest.approx(1.0, abs=1e-12)


def test_sw_rejects_unknown():
    with pytest.raises(MeasureError):
        schweizer_wolff(PI, "delta")


def test_sobolev_examples():
    assert sobolev(PI).value == pytest.approx(0.0, abs=1e-15)
    assert sobolev(M).value == pytest.approx(1.0, abs=1e-12)
    assert sobolev(Tent(0.5)).value == pytest.approx(math.sqrt(0.625), abs=1e-12)


@given(boards(st.integers(1, 12)))
@settings(max_examples=100, deadline=None)
def test_sobolev_tau_identity(b):
    c = Checkerboard(b)
    lhs = sobolev(c).value ** 2
    rhs = 0.5 * (tau_alpha(c, 2).value ** 2 + tau_alpha(transpose(c), 2).value ** 2)
    assert lhs == pytest.approx(rhs, abs=1e-9)


@pytest.mark.parametrize("theta", [0.0, 0.2, 0.5, 0.8])
def test_sobolev_tau_identity_on_tent(theta):
    c = Tent(theta)
    rhs = 0.5 * (tau_alpha(c, 2).value ** 2 + tau_alpha(c, 2, direction="yx").value ** 2)
    assert sobolev(c).value ** 2 == pytest.approx(rhs, abs=1e-9)


# -- density measures --------------------------------------------------------


@pytest.mark.parametrize("ident", DENSITY_IDS)
@pytest.mark.parametrize("n", [1, 2, 7])
def test_density_measures_vanish_on_pi(ident, n):
    assert measure(Checkerboard(to_checkerboard(PI, n)), ident).value == pytest.approx(0.0, abs=1e-12)
    assert measure(PI, ident).value == pytest.approx(0.0, abs=1e-12)


def test_density_examples():
    b = CheckerboardCopula(np.array([[0.5, 0.0], [0.0, 0.5]]))
    assert density_measure(b, "copula_distance", 1).value == pytest.approx(1.0, abs=1e-15)
    assert density_measure(b, "shannon_mi").value == pytest.approx(math.log(2), abs=1e-15)
    assert density_measure(b, "linfoot").value == pytest.approx(math.sqrt(1 - 0.25), abs=1e-15)
    # integral of c^alpha is 2^(alpha - 1)
    assert density_measure(b, "renyi_mi", 3).value == pytest.approx(math.log(4) / 2, abs=1e-15)
    assert density_measure(b, "tsallis", 3).value == pytest.approx((4 - 1) / 2, abs=1e-15)
    assert density_measure(b, "tsallis", 0.5).value == pytest.approx((2**-0.5 - 1) / -0.5, abs=1e-15)


@pytest.mark.parametrize("c", [M, W, Tent(0.3), transpose(Tent(0.3)), convex_mix([0.5, 0.5], [PI, M])])
def test_density_measures_reject_singular_copulas(c):
    with pytest.raises(MeasureError):
        measure(c, "shannon_mi")


@given(boards())
@settings(max_examples=100, deadline=None)
def test_density_measures_nonnegative_and_symmetric(b):
    c = Checkerboard(b)
    for ident in DENSITY_IDS:
        v = measure(c, ident).value
        assert v >= -1e-12
        assert measure(c, parse_measure(ident, "yx")).value == pytest.approx(v, rel=1e-12, abs=1e-15)
    assert measure(c, "linfoot").value <= 1.0


# -- entropy-like measures ---------------------------------------------------


@pytest.mark.parametrize("ident", ENTROPY_IDS)
def test_entropy_measures_span_zero_to_one(ident):
    assert measure(PI, ident).value == pytest.approx(0.0, abs=1e-9)
    assert measure(M, ident).value == pytest.approx(1.0, abs=1e-9)
    assert measure(Tent(0.3), ident).value == pytest.approx(1.0, abs=1e-6)


def test_entropy_examples():
    r = nonsym_entropy(M, "ns_renyi", alpha=1.5)
    assert r.value == pytest.approx(1.0, abs=1e-12)
    assert r.raw_value == pytest.approx(-math.log(0.5) / 0.5, abs=1e-3)
    r = nonsym_entropy(M, "ns_shannon")
    assert r.value == pytest.approx(1.0, abs=1e-12)
    assert r.raw_value == pytest.approx(1.0, abs=1e-3)
    assert nonsym_entropy(M, "ns_tsallis", alpha=0.5).raw_value * 1.5 == pytest.approx(1.0, abs=1e-3)


def test_entropy_measures_not_flip_invariant():
    c = Tent(0.3)
    assert measure(c, "tau1").value == pytest.approx(measure(flip_y(c), "tau1").value, abs=1e-12)
    b = Checkerboard(random_board(np.random.default_rng(1), 8))
    assert abs(measure(b, "ns_shannon").value - measure(flip_y(b), "ns_shannon").value) > 1e-6


def test_entropy_rejects_density_kind():
    with pytest.raises(MeasureError):
        nonsym_entropy(M, "shannon_mi")


# -- bounds and the extreme cases -------------------------------------------


@pytest.mark.parametrize("ident", BOUNDED_MEASURES)
def test_bounded_measures_on_builtins(ident):
    for label, c in builtin_specs():
        v = measure(c, ident).value
        assert -1e-9 <= v <= 1 + 1e-9, label


@given(boards(st.integers(1, 10)))
@settings(max_examples=60, deadline=None)
def test_bounded_measures_on_boards(b):
    c = Checkerboard(b)
    for ident in BOUNDED_MEASURES + ("linfoot",):
        v = measure(c, ident, GridConfig(quad_n=128)).value
        assert -1e-9 <= v <= 1 + 1e-9, ident


def _near_pi(rng, n, delta):
    # a margin-preserving perturbation of Pi's board, max cell deviation delta / n^2
    d = rng.normal(size=(n, n))
    d -= d.mean(axis=0, keepdims=True)
    d -= d.mean(axis=1, keepdims=True)
    return CheckerboardCopula(1 / n**2 + delta / n**2 * d / np.abs(d).max())


@pytest.mark.parametrize("ident", ["tau1", "tau2", "tau_alpha:3", "sw_sigma", "sobolev"])
def test_zero_iff_independence(ident, rng):
    n = 6
    assert measure(Checkerboard(to_checkerboard(PI, n)), ident).value == pytest.approx(0.0, abs=1e-9)
    for delta in (1e-5, 1e-3, 1e-1):
        assert measure(Checkerboard(_near_pi(rng, n, delta)), ident).value > 1e-9


@pytest.mark.parametrize("ident", ["ns_shannon", "copula_distance:2", "shannon_mi"])
def test_divergences_vanish_quadratically_at_independence(ident, rng):
    # these grow like delta^2 near Pi, so a 1e-9 threshold only separates
    # boards further than about sqrt(1e-9) from Pi's
    n = 6
    assert measure(Checkerboard(to_checkerboard(PI, n)), ident).value == pytest.approx(0.0, abs=1e-9)
    small = measure(Checkerboard(_near_pi(np.random.default_rng(5), n, 1e-4)), ident).value
    big = measure(Checkerboard(_near_pi(np.random.default_rng(5), n, 1e-2)), ident).value
    assert 0 < small < 1e-6
    assert big / small == pytest.approx(1e4, rel=0.05)
    for delta in (1e-3, 1e-1):
        assert measure(Checkerboard(_near_pi(rng, n, delta)), ident).value > 1e-9


@pytest.mark.parametrize("c", [M, Tent(0.0), Tent(0.3), Tent(0.77), Tent(1.0), flip_y(M)])
@pytest.mark.parametrize("alpha", [1, 2, 3.5])
def test_tau_attains_one_on_left_invertible(c, alpha):
    assert tau_alpha(c, alpha).value == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("inner", [M, Tent(0.3), flip_y(M)])
def test_tau_attains_one_on_exact_shuffles(inner, rng):
    for n in (2, 5, 9):
        s = StripShuffle(inner, tuple(rng.permutation(n)))
        for alpha in (1, 2, 3):
            assert tau_alpha(s, alpha).value == pytest.approx(1.0, abs=1e-6)


def test_discretized_shuffles_of_m_keep_the_board_value(rng):
    # M's checkerboard is not left invertible (tau1 = 1 - 1/(2n)); shuffling
    # its strips keeps whatever value the board has
    for n in (4, 9, 16):
        board = Checkerboard(to_checkerboard(M, n))
        s = shuffle_left(M, rng.permutation(n), n)
        for alpha in (1, 2, 3):
            assert tau_alpha(s, alpha).value == pytest.approx(tau_alpha(board, alpha).value, abs=1e-9)
        assert tau_alpha(board, 1).value == pytest.approx(1 - 1 / (2 * n), abs=1e-12)


def test_exact_shuffle_is_a_copula(rng):
    s = StripShuffle(transpose(Tent(0.3)), (2, 0, 3, 1))
    assert validate(s, 32) == []
    u, v = rng.random(500), rng.random(500)
    h = 1e-7
    fd = (s.cdf(u, v + h) - s.cdf(u, v - h)) / (2 * h)
    assert np.median(np.abs(fd - s.d2(u, v))) < 1e-6
    assert np.allclose(to_checkerboard(s, 4).mass, to_checkerboard(transpose(Tent(0.3)), 4).mass[[2, 0, 3, 1]], atol=1e-12)


@pytest.mark.parametrize("c", [PI, convex_mix([0.5, 0.5], [M, W]), transpose(Tent(0.3))])
@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_tau_below_one_otherwise(c, alpha):
    assert tau_alpha(c, alpha).value < 1 - 0.01


def test_report_fields():
    r = measure(Tent(0.3), "tau1", GridConfig(quad_n=64))
    d = r.to_dict()
    assert set(d) == {"measure", "value", "raw_value", "grid", "path", "direction"}
    assert d["grid"] == 64 and d["path"] == "quadrature" and d["measure"] == "tau1"
