"""The * product on copulas and what follows from it.

(A * B)(u, v) = integral over t of d2A(u, t) * d1B(t, v).

Two evaluation routes exist and must agree:

* checkerboards of equal resolution n multiply as matrices, the product
  having mass ``n * P_A @ P_B``;
* everything else is integrated over t on the (n+1)^2 output lattice.  The
  integrand is piecewise constant in t for every built-in copula, so the
  midpoint rule is applied on the pieces between breakpoints, which makes the
  lattice values exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .copulas import (
    Checkerboard,
    CheckerboardCopula,
    Copula,
    DomainError,
    GridConfig,
    as_checkerboard,
    segments,
    to_checkerboard,
)

__all__ = [
    "InvertibilityClass",
    "star",
    "star_boards",
    "star_lattice",
    "refine",
    "markov_compose",
    "classify_invertibility",
    "shuffle_left",
    "StripShuffle",
]


def refine(board: CheckerboardCopula, n: int) -> CheckerboardCopula:
    """Re-express a checkerboard at resolution n.

    Exact when n is a multiple of ``board.n``; otherwise the copula is
    re-discretized by inclusion-exclusion.
    """
    if n == board.n:
        return board
    if n % board.n == 0:
        k = n // board.n
        return CheckerboardCopula(np.kron(board.mass, np.ones((k, k)) / k**2))
    return to_checkerboard(Checkerboard(board), n)


def star_boards(a: CheckerboardCopula, b: CheckerboardCopula) -> CheckerboardCopula:
    """Matrix route of the * product for equal resolutions."""
    if a.n != b.n:
        raise DomainError(f"resolutions differ: {a.n} vs {b.n}; refine first")
    mass = a.n * (a.mass @ b.mass)
    return CheckerboardCopula(np.maximum(mass, 0.0), check=False)


def star_lattice(a: Copula, b: Copula, n: int, chunk: int = 64) -> np.ndarray:
    """Values of A * B on the lattice {i/n} x {j/n} by integration over t."""
    g = np.linspace(0.0, 1.0, n + 1)
    out = np.empty((n + 1, n + 1))
    vv = g[None, :, None]
    bb = b.breaks1(g[None, :])
    for start in range(0, n + 1, chunk):
        uu = g[start : start + chunk, None, None]
        ba = a.breaks2(g[start : start + chunk, None])
        if ba is None or bb is None:
            mids, lens = segments(None, n)
        else:
            shape = (uu.shape[0], n + 1)
            br = np.concatenate(
                [np.broadcast_to(ba, shape + ba.shape[-1:]), np.broadcast_to(bb, shape + bb.shape[-1:])],
                axis=-1,
            )
            mids, lens = segments(br, n)
        vals = a.d2(uu, mids) * b.d1(mids, vv)
        out[start : start + chunk] = (vals * lens).sum(axis=-1)
    return out


def _lattice_to_board(s: np.ndarray) -> CheckerboardCopula:
    n = s.shape[0] - 1
    g = np.linspace(0.0, 1.0, n + 1)
    s = s.copy()
    s[0, :] = 0.0
    s[:, 0] = 0.0
    s[-1, :] = g
    s[:, -1] = g
    mass = np.diff(np.diff(s, axis=0), axis=1)
    mass[(mass < 0) & (mass > -1e-12)] = 0.0
    return CheckerboardCopula(mass, check=False)


def star(a: Copula, b: Copula, cfg: GridConfig | None = None, path: str = "auto") -> Checkerboard:
    """A * B materialized as a checkerboard.

    ``path="auto"`` multiplies matrices when both operands are checkerboards
    and integrates otherwise.  ``"exact"`` forces the matrix route, first
    discretizing any non-checkerboard operand; ``"quadrature"`` forces
    integration.  The output resolution is the least common multiple of the
    operand resolutions on the matrix route (capped at ``cfg.quad_n``) and
    ``cfg.quad_n`` on the integration route.
    """
    cfg = cfg or GridConfig()
    boards = [c for c in (a, b) if isinstance(c, (Checkerboard, CheckerboardCopula))]
    if path == "auto":
        path = "exact" if len(boards) == 2 else "quadrature"
    if path == "exact":
        sizes = [as_checkerboard(c).n for c in boards]
        n = reduce(math.lcm, sizes, 1) if sizes else cfg.quad_n
        n = min(n, cfg.quad_n) if sizes else n
        pa = refine(_board(a, n), n)
        pb = refine(_board(b, n), n)
        return Checkerboard(star_boards(pa, pb))
    if path != "quadrature":
        raise DomainError(f"unknown path {path!r}")
    a = as_checkerboard(a) if isinstance(a, CheckerboardCopula) else a
    b = as_checkerboard(b) if isinstance(b, CheckerboardCopula) else b
    return Checkerboard(_lattice_to_board(star_lattice(a, b, cfg.quad_n)))


def _board(c, n):
    if isinstance(c, CheckerboardCopula):
        return c
    if isinstance(c, Checkerboard):
        return c.board
    return to_checkerboard(c, n)


def markov_compose(chain: Sequence[Copula], cfg: GridConfig | None = None, path: str = "auto") -> Copula:
    """Copula of (X_0, X_k) for a Markov chain with the given step copulas."""
    if not chain:
        raise DomainError("chain must contain at least one copula")
    return reduce(lambda x, y: star(x, y, cfg, path), chain)


@dataclass(frozen=True)
class InvertibilityClass:
    """Result of :func:`classify_invertibility`.

    ``left_fraction`` and ``right_fraction`` are the fractions of sampled
    points where the first (second) partial lies strictly inside
    ``(eps, 1 - eps)``.
    """

    kind: str
    left_fraction: float
    right_fraction: float

    @property
    def left(self) -> bool:
        return self.kind in ("LeftInvertible", "Invertible")

    @property
    def right(self) -> bool:
        return self.kind in ("RightInvertible", "Invertible")


def classify_invertibility(
    c: Copula,
    cfg: GridConfig | None = None,
    eps: float = 0.05,
    delta: float = 0.02,
    n: int = 256,
) -> InvertibilityClass:
    """Classify by how often the partials avoid {0, 1} on an n x n midpoint grid.

    At finite resolution this cannot separate an invertible copula from one
    that is eps-close to it; the measured fractions are reported so callers
    can judge.
    """
    if not 0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 0.5), got {eps}")
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if isinstance(c, CheckerboardCopula):
        c = Checkerboard(c)
    x = (np.arange(n) + 0.5) / n
    uu, vv = np.meshgrid(x, x, indexing="ij")

    def interior(d):
        return float(np.mean((d > eps) & (d < 1 - eps)))

    f1 = interior(c.d1(uu, vv))
    f2 = interior(c.d2(uu, vv))
    left, right = f1 < delta, f2 < delta
    kind = {
        (True, True): "Invertible",
        (True, False): "LeftInvertible",
        (False, True): "RightInvertible",
        (False, False): "Neither",
    }[(left, right)]
    return InvertibilityClass(kind, f1, f2)


def shuffle_left(c: Copula, perm: Sequence[int], n: int) -> Checkerboard:
    """Permute the u-strips of ``c`` discretized at resolution n.

    Strip i of the result is strip ``perm[i]`` of the input; this is L * C
    for the left-invertible straight shuffle L that maps those strips.
    """
    perm = np.asarray(perm, dtype=int)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise DomainError(f"perm must be a permutation of 0..{n - 1}")
    board = _board(c, n) if not isinstance(c, Checkerboard) or c.n == n else refine(c.board, n)
    return Checkerboard(CheckerboardCopula(board.mass[perm], check=board.check))


@dataclass(frozen=True)
class StripShuffle(Copula):
    """Exact strip shuffle of a copula, with no discretization.

    The u-axis is cut into n strips and strip i of the result carries strip
    ``perm[i]`` of ``inner``, translated.  Unlike :func:`shuffle_left` this
    keeps singular structure, so shuffles of left-invertible copulas stay
    left invertible.
    """

    inner: Copula
    perm: tuple

    def __post_init__(self):
        p = np.asarray(self.perm, dtype=int)
        if p.ndim != 1 or not np.array_equal(np.sort(p), np.arange(p.size)):
            raise DomainError(f"perm must be a permutation of 0..{p.size - 1}")
        object.__setattr__(self, "perm", tuple(int(k) for k in p))

    @property
    def n(self) -> int:
        return len(self.perm)

    def _locate(self, u):
        n = self.n
        p = np.asarray(self.perm)
        i = np.clip(np.floor(u * n).astype(int), 0, n - 1)
        return i, p[i] / n + (u - i / n)

    def _strips(self, method, u, v):
        # prefix sums of inner strip increments, taken in shuffled order
        n = self.n
        p = np.asarray(self.perm)
        g = np.arange(n + 1) / n
        f = getattr(self.inner, method)
        vals = f(g, v[..., None])
        inc = np.diff(vals, axis=-1)[..., p]
        before = np.concatenate([np.zeros(v.shape + (1,)), np.cumsum(inc, axis=-1)], axis=-1)
        i, x = self._locate(u)
        head = np.take_along_axis(before, i[..., None], axis=-1)[..., 0]
        return head + f(x, v) - f(p[i] / n, v)

    def cdf(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return self._strips("cdf", u, v)

    def d1(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return self.inner.d1(self._locate(u)[1], v)

    def d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return self._strips("d2", u, v)

    def breaks1(self, v):
        b = self.inner.breaks1(v)
        if b is None:
            return None
        n = self.n
        where = np.argsort(self.perm)
        j = np.clip(np.floor(b * n).astype(int), 0, n - 1)
        moved = where[j] / n + (b - j / n)
        cuts = np.broadcast_to(np.arange(1, n) / n, moved.shape[:-1] + (n - 1,))
        return np.concatenate([moved, cuts], axis=-1)

    def breaks2(self, u):
        u = np.asarray(u, float)
        at_x = self.inner.breaks2(self._locate(u)[1])
        fixed = self.inner.breaks2(np.arange(self.n + 1) / self.n)
        if at_x is None or fixed is None:
            return None
        fixed = np.broadcast_to(fixed.ravel(), u.shape + (fixed.size,))
        return np.concatenate([at_x, fixed], axis=-1)

    @property
    def is_singular(self):
        return self.inner.is_singular

    def __repr__(self):
        return f"shuffle({self.inner!r}, {list(self.perm)})"
