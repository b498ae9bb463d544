import numpy as np
import pytest
from hypothesis import strategies as st

from copdep.copulas import PI, M, W, Tent, convex_mix, flip_x, flip_y, transpose
from copdep.oracle import OracleConfig
from copdep.props import random_board

thetas = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)

base_copulas = st.one_of(
    st.sampled_from([PI, M, W]),
    thetas.map(Tent),
)


@st.composite
def copulas(draw):
    c = draw(base_copulas)
    for _ in range(draw(st.integers(0, 2))):
        c = draw(st.sampled_from([transpose, flip_y, flip_x]))(c)
    if draw(st.booleans()):
        w = draw(st.floats(0.0, 1.0))
        c = convex_mix([w, 1.0 - w], [c, draw(base_copulas)])
    return c


@st.composite
def boards(draw, n=st.integers(1, 12)):
    size = draw(n)
    seed = draw(st.integers(0, 2**32 - 1))
    return random_board(np.random.default_rng(seed), size)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def ocfg():
    return OracleConfig(grid_n=2048, mc_samples=1_000_000, seed=1)
