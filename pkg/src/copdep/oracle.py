"""Brute-force reference values for integrals over the unit square.

Nothing here is shared with the measures or algebra modules: the only
imports from the package are copula evaluation and partial derivatives, so
agreement between this module and the fast code paths is evidence, not an
echo.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .copulas import Copula, CheckerboardCopula, Checkerboard, CopulaError, evaluate, partial1, partial2

__all__ = [
    "OracleConfig",
    "OracleError",
    "oracle_integral",
    "oracle_sup",
    "oracle_star",
    "rectangle_mass",
    "oracle_board",
    "fd_density",
    "agrees",
    "lattice_values",
]


class OracleError(CopulaError, ValueError):
    """The integrand produced a non-finite value."""


@dataclass(frozen=True)
class OracleConfig:
    grid_n: int = 2048
    mc_samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if int(self.grid_n) != self.grid_n or self.grid_n < 64:
            raise OracleError(f"grid_n must be an integer >= 64, got {self.grid_n}")
        if int(self.mc_samples) != self.mc_samples or self.mc_samples < 2:
            raise OracleError(f"mc_samples must be an integer >= 2, got {self.mc_samples}")


def _finite(vals, u, v):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = np.flatnonzero(bad.ravel())[0]
        uu = np.broadcast_to(u, vals.shape).ravel()[i]
        vv = np.broadcast_to(v, vals.shape).ravel()[i]
        raise OracleError(f"integrand is not finite at (u, v) = ({float(uu)!r}, {float(vv)!r})")
    return vals


def oracle_integral(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    cfg: OracleConfig | None = None,
    rows: int = 64,
) -> tuple[float, float, float]:
    """Integrate a vectorized f(u, v) over (0, 1)^2 two independent ways.

    Returns ``(riemann, mc, mc_stderr)``: the midpoint rule on a grid_n x
    grid_n grid and a seeded Monte Carlo mean with its standard error.
    """
    cfg = cfg or OracleConfig()
    n = cfg.grid_n
    x = (np.arange(n) + 0.5) / n
    total = 0.0
    for i in range(0, n, rows):
        u = x[i : i + rows, None]
        vals = _finite(np.asarray(f(u, x[None, :]), dtype=float) * np.ones((u.shape[0], n)), u, x[None, :])
        total += vals.sum()
    riemann = total / n**2

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    s1 = s2 = 0.0
    left = cfg.mc_samples
    while left:
        k = min(left, 1 << 18)
        u, v = rng.random(k), rng.random(k)
        # keep strictly inside the square, where partials are defined
        u = np.where(u == 0.0, 0.5 / n, u)
        v = np.where(v == 0.0, 0.5 / n, v)
        vals = _finite(np.asarray(f(u, v), dtype=float) * np.ones(k), u, v)
        s1 += vals.sum()
        s2 += np.square(vals).sum()
        left -= k
    N = cfg.mc_samples
    mean = s1 / N
    var = max(s2 / N - mean**2, 0.0) * N / (N - 1)
    return float(riemann), float(mean), float(np.sqrt(var / N))


def agrees(result: tuple[float, float, float], k: float = 4.0, floor: float = 1e-12) -> bool:
    """Riemann and Monte Carlo estimates within k standard errors."""
    riemann, mc, se = result
    return abs(riemann - mc) <= k * se + floor


def oracle_sup(f, cfg: OracleConfig | None = None) -> tuple[float, float]:
    """Largest value of f seen on the closed grid {i/grid_n}^2 and on the MC points."""
    cfg = cfg or OracleConfig()
    g = np.linspace(0.0, 1.0, cfg.grid_n + 1)
    grid = max(float(np.max(f(g[i : i + 64, None], g[None, :]))) for i in range(0, g.size, 64))
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    k = min(cfg.mc_samples, 1 << 20)
    mc = float(np.max(f(rng.random(k), rng.random(k))))
    return grid, mc


def _d1(c, u, v):
    # partial1 is defined on the open square; its boundary values in v are fixed
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    out = np.where(v >= 1.0, 1.0, 0.0)
    inner = (v > 0.0) & (v < 1.0)
    if np.any(inner):
        out[inner] = partial1(c, u[inner], v[inner])
    return out


def rectangle_mass(c: Copula, u1, u2, v1, v2, cfg: OracleConfig | None = None) -> tuple[float, float, float]:
    """Mass of [u1, u2] x [v1, v2] as the u-integral of d1C(u, v2) - d1C(u, v1)."""
    if isinstance(c, CheckerboardCopula):
        c = Checkerboard(c)
    w = u2 - u1

    def f(s, t):
        u = u1 + w * s
        return w * (_d1(c, u, np.full_like(u, v2)) - _d1(c, u, np.full_like(u, v1))) + 0.0 * t

    return oracle_integral(f, cfg)


def oracle_board(c: Copula, n: int, cfg: OracleConfig | None = None) -> np.ndarray:
    """Cell masses of c at resolution n, each from :func:`rectangle_mass` (Riemann part)."""
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = rectangle_mass(c, i / n, (i + 1) / n, j / n, (j + 1) / n, cfg)[0]
    return out


def fd_density(c: Copula, h: float = 1e-7):
    """Copula density as a central difference of d1C in v.

    Exact for checkerboards away from cell edges, where d1C is linear in v.
    """
    if isinstance(c, CheckerboardCopula):
        c = Checkerboard(c)

    def dens(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return (partial1(c, u, v + h) - partial1(c, u, v - h)) / (2 * h)

    return dens


def oracle_star(
    a: Copula,
    b: Copula,
    cfg: OracleConfig | None = None,
    lattice: int = 33,
    t_nodes: int | None = None,
    chunk: int = 1 << 16,
) -> np.ndarray:
    """(A * B) on a lattice x lattice grid by the t-midpoint rule.

    Interior points integrate d2A(u, t) d1B(t, v) over ``t_nodes`` midpoints
    (default grid_n^2, since each jump of a partial costs one cell width);
    the boundary rows and columns take the values every copula has there.
    """
    cfg = cfg or OracleConfig()
    if isinstance(a, CheckerboardCopula):
        a = Checkerboard(a)
    if isinstance(b, CheckerboardCopula):
        b = Checkerboard(b)
    N = t_nodes or cfg.grid_n**2
    g = np.linspace(0.0, 1.0, lattice)
    inner = g[1:-1]
    acc = np.zeros((inner.size, inner.size))
    for start in range(0, N, chunk):
        t = (np.arange(start, min(start + chunk, N)) + 0.5) / N
        acc += partial2(a, inner[:, None], t[None, :]) @ partial1(b, t[:, None], inner[None, :])
    out = np.zeros((lattice, lattice))
    out[1:-1, 1:-1] = acc / N
    out[-1, :] = g
    out[:, -1] = g
    return out


def lattice_values(c: Copula, lattice: int = 33) -> np.ndarray:
    """C on the same lattice as :func:`oracle_star`, for comparison."""
    if isinstance(c, CheckerboardCopula):
        c = Checkerboard(c)
    g = np.linspace(0.0, 1.0, lattice)
    return evaluate(c, g[:, None], g[None, :])
