"""Bivariate copula representations.

Every copula here is an immutable object exposing its distribution function
``cdf`` and the two first-order partial derivatives.  All of them accept
numpy arrays and broadcast.

A structural fact used throughout the package: for every variant defined in
this module, ``u -> d1(u, v)`` is piecewise constant for fixed ``v`` and
``v -> d2(u, v)`` is piecewise constant for fixed ``u``.  ``breaks1`` and
``breaks2`` return the jump locations, which lets integrals over the
conditioning variable be computed exactly (see :func:`segments`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "CopulaError",
    "DomainError",
    "InvalidCopulaError",
    "Copula",
    "Independence",
    "UpperBound",
    "LowerBound",
    "Tent",
    "Transpose",
    "FlipY",
    "FlipX",
    "ConvexMix",
    "Checkerboard",
    "CheckerboardCopula",
    "GridConfig",
    "Violation",
    "PI",
    "M",
    "W",
    "evaluate",
    "partial1",
    "partial2",
    "numeric_partial1",
    "numeric_partial2",
    "transpose",
    "flip_y",
    "flip_x",
    "convex_mix",
    "to_checkerboard",
    "as_checkerboard",
    "validate",
    "sinkhorn",
    "segments",
    "edges",
    "read_checkerboard",
    "write_checkerboard",
    "format_checkerboard",
    "parse_checkerboard",
]

MARGIN_TOL = 1e-9


class CopulaError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CopulaError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidCopulaError(CopulaError, ValueError):
    """Data that should describe a copula does not."""


@dataclass(frozen=True)
class GridConfig:
    """Numerical resolution shared by quadrature-based operations.

    quad_n
        Number of midpoint nodes per axis for integrals over the unit square.
    fd_step
        Step of the central difference used when a copula has no analytic
        partial derivative.
    """

    quad_n: int = 512
    fd_step: float = 1e-5

    def __post_init__(self):
        if int(self.quad_n) != self.quad_n or self.quad_n < 2:
            raise DomainError(f"quad_n must be an integer >= 2, got {self.quad_n}")
        if not 0.0 < self.fd_step < 0.5:
            raise DomainError(f"fd_step must lie in (0, 0.5), got {self.fd_step}")


# ---------------------------------------------------------------------------
# Copula variants
# ---------------------------------------------------------------------------


class Copula:
    """Base class.  Subclasses override ``cdf`` and, when they can, the rest.

    A subclass that only provides ``cdf`` still works everywhere: partial
    derivatives fall back to central differences and integrals fall back to a
    plain midpoint rule (``breaks1``/``breaks2`` returning ``None``).
    """

    fd_step = 1e-5

    def cdf(self, u, v):
        raise NotImplementedError

    def d1(self, u, v):
        h = self.fd_step
        return _central_difference(self, u, v, h, axis=1)

    def d2(self, u, v):
        h = self.fd_step
        return _central_difference(self, u, v, h, axis=2)

    def breaks1(self, v):
        return None

    def breaks2(self, u):
        return None

    @property
    def is_singular(self) -> bool:
        return True

    def __call__(self, u, v):
        return evaluate(self, u, v)


def _central_difference(c, u, v, h, axis):
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    if axis == 1:
        lo, hi = np.clip(u - h, 0.0, 1.0), np.clip(u + h, 0.0, 1.0)
        d = (c.cdf(hi, v) - c.cdf(lo, v)) / (hi - lo)
    else:
        lo, hi = np.clip(v - h, 0.0, 1.0), np.clip(v + h, 0.0, 1.0)
        d = (c.cdf(u, hi) - c.cdf(u, lo)) / (hi - lo)
    return np.clip(d, 0.0, 1.0)


def _no_breaks(x):
    x = np.asarray(x, float)
    return np.empty(x.shape + (0,))


@dataclass(frozen=True)
class Independence(Copula):
    """The product copula uv."""

    def cdf(self, u, v):
        return np.asarray(u, float) * np.asarray(v, float)

    def d1(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return v.copy()

    def d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return u.copy()

    breaks1 = staticmethod(_no_breaks)
    breaks2 = staticmethod(_no_breaks)

    @property
    def is_singular(self):
        return False

    def __repr__(self):
        return "Pi"


@dataclass(frozen=True)
class UpperBound(Copula):
    """min(u, v): comonotone dependence."""

    def cdf(self, u, v):
        return np.minimum(np.asarray(u, float), np.asarray(v, float))

    def d1(self, u, v):
        # right limit in u at the kink u == v
        return np.where(np.asarray(u) < np.asarray(v), 1.0, 0.0)

    def d2(self, u, v):
        return np.where(np.asarray(v) < np.asarray(u), 1.0, 0.0)

    def breaks1(self, v):
        return np.asarray(v, float)[..., None]

    def breaks2(self, u):
        return np.asarray(u, float)[..., None]

    def __repr__(self):
        return "M"


@dataclass(frozen=True)
class LowerBound(Copula):
    """max(u + v - 1, 0): countermonotone dependence."""

    def cdf(self, u, v):
        return np.maximum(np.asarray(u, float) + np.asarray(v, float) - 1.0, 0.0)

    def d1(self, u, v):
        return np.where(np.asarray(u) + np.asarray(v) >= 1.0, 1.0, 0.0)

    def d2(self, u, v):
        return np.where(np.asarray(u) + np.asarray(v) >= 1.0, 1.0, 0.0)

    def breaks1(self, v):
        return 1.0 - np.asarray(v, float)[..., None]

    def breaks2(self, u):
        return 1.0 - np.asarray(u, float)[..., None]

    def __repr__(self):
        return "W"


@dataclass(frozen=True)
class Tent(Copula):
    """Singular copula supported on (0,0)-(theta,1) and (theta,1)-(1,0).

    Y is a function of X (left invertible) for every theta; X is a function
    of Y only for theta in {0, 1}, where the tent degenerates to W and M.
    """

    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError(f"tent theta must lie in [0, 1], got {self.theta}")

    def cdf(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        t = self.theta
        upper = 1.0 - (1.0 - t) * v
        return np.where(u <= t * v, u, np.where(u < upper, t * v, u + v - 1.0))

    def d1(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        t = self.theta
        return np.where((u < t * v) | (u >= 1.0 - (1.0 - t) * v), 1.0, 0.0)

    def d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        t = self.theta
        return np.where(
            u >= 1.0 - (1.0 - t) * v, 1.0, np.where(u <= t * v, 0.0, t)
        )

    def breaks1(self, v):
        v = np.asarray(v, float)
        t = self.theta
        return np.stack([t * v, 1.0 - (1.0 - t) * v], axis=-1)

    def breaks2(self, u):
        u = np.asarray(u, float)
        t = self.theta
        with np.errstate(divide="ignore", invalid="ignore"):
            a = u / t if t > 0 else np.full_like(u, np.inf)
            b = (1.0 - u) / (1.0 - t) if t < 1 else np.full_like(u, np.inf)
        return np.clip(np.stack([a, b], axis=-1), 0.0, 1.0)

    def __repr__(self):
        return f"Tent({self.theta:g})"


@dataclass(frozen=True)
class Transpose(Copula):
    """C^T(u, v) = C(v, u): the copula of (Y, X)."""

    inner: Copula

    def cdf(self, u, v):
        return self.inner.cdf(v, u)

    def d1(self, u, v):
        return self.inner.d2(v, u)

    def d2(self, u, v):
        return self.inner.d1(v, u)

    def breaks1(self, v):
        return self.inner.breaks2(v)

    def breaks2(self, u):
        return self.inner.breaks1(u)

    @property
    def is_singular(self):
        return self.inner.is_singular

    def __repr__(self):
        return f"transpose({self.inner!r})"


@dataclass(frozen=True)
class FlipY(Copula):
    """u - C(u, 1 - v): the copula of (X, g(Y)) for decreasing g."""

    inner: Copula

    def cdf(self, u, v):
        u = np.asarray(u, float)
        return u - self.inner.cdf(u, 1.0 - np.asarray(v, float))

    def d1(self, u, v):
        return 1.0 - self.inner.d1(u, 1.0 - np.asarray(v, float))

    def d2(self, u, v):
        return self.inner.d2(u, 1.0 - np.asarray(v, float))

    def breaks1(self, v):
        return self.inner.breaks1(1.0 - np.asarray(v, float))

    def breaks2(self, u):
        b = self.inner.breaks2(u)
        return None if b is None else 1.0 - b

    @property
    def is_singular(self):
        return self.inner.is_singular

    def __repr__(self):
        return f"flipy({self.inner!r})"


@dataclass(frozen=True)
class FlipX(Copula):
    """v - C(1 - u, v): the copula of (f(X), Y) for decreasing f."""

    inner: Copula

    def cdf(self, u, v):
        v = np.asarray(v, float)
        return v - self.inner.cdf(1.0 - np.asarray(u, float), v)

    def d1(self, u, v):
        return self.inner.d1(1.0 - np.asarray(u, float), v)

    def d2(self, u, v):
        return 1.0 - self.inner.d2(1.0 - np.asarray(u, float), v)

    def breaks1(self, v):
        b = self.inner.breaks1(v)
        return None if b is None else 1.0 - b

    def breaks2(self, u):
        return self.inner.breaks2(1.0 - np.asarray(u, float))

    @property
    def is_singular(self):
        return self.inner.is_singular

    def __repr__(self):
        return f"flipx({self.inner!r})"


@dataclass(frozen=True)
class ConvexMix(Copula):
    weights: tuple
    parts: tuple

    def __post_init__(self):
        if len(self.weights) != len(self.parts) or not self.parts:
            raise DomainError("weights and parts must be non-empty and of equal length")
        w = np.asarray(self.weights, float)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError(f"mixture weights must be nonnegative, got {self.weights}")
        if abs(w.sum() - 1.0) > 1e-12:
            raise DomainError(f"mixture weights must sum to 1, got {w.sum()!r}")

    def _combine(self, method, u, v):
        return sum(w * getattr(p, method)(u, v) for w, p in zip(self.weights, self.parts))

    def cdf(self, u, v):
        return self._combine("cdf", u, v)

    def d1(self, u, v):
        return self._combine("d1", u, v)

    def d2(self, u, v):
        return self._combine("d2", u, v)

    def _union(self, method, x):
        bs = [getattr(p, method)(x) for p in self.parts]
        if any(b is None for b in bs):
            return None
        return np.concatenate(bs, axis=-1)

    def breaks1(self, v):
        return self._union("breaks1", v)

    def breaks2(self, u):
        return self._union("breaks2", u)

    @property
    def is_singular(self):
        return any(p.is_singular for w, p in zip(self.weights, self.parts) if w > 0)

    def __repr__(self):
        inner = "; ".join(f"{w:g},{p!r}" for w, p in zip(self.weights, self.parts))
        return f"mix({inner})"


@dataclass(frozen=True, eq=False)
class CheckerboardCopula:
    """Cell masses of a checkerboard copula.

    ``mass[i, j]`` is the probability of ``[i/n, (i+1)/n] x [j/n, (j+1)/n]``;
    rows index u, columns index v.  With ``check=True`` (the default) the
    uniform-margin and nonnegativity invariants are enforced on construction.
    """

    mass: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.mass, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidCopulaError(f"mass must be a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidCopulaError("mass contains non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)
        if self.check:
            err = self.margin_error()
            if m.min() < 0:
                raise InvalidCopulaError(f"negative cell mass {m.min():.3g}")
            if err > MARGIN_TOL:
                raise InvalidCopulaError(f"margins deviate from 1/n by {err:.3g}")

    @property
    def n(self) -> int:
        return self.mass.shape[0]

    def margin_error(self) -> float:
        n = self.n
        return float(
            max(
                np.abs(self.mass.sum(axis=1) - 1.0 / n).max(),
                np.abs(self.mass.sum(axis=0) - 1.0 / n).max(),
                abs(self.mass.sum() - 1.0),
            )
        )

    def lattice(self) -> np.ndarray:
        """Copula values on the (n+1) x (n+1) lattice {i/n} x {j/n}."""
        s = np.zeros((self.n + 1, self.n + 1))
        s[1:, 1:] = self.mass.cumsum(axis=0).cumsum(axis=1)
        return s

    def density(self) -> np.ndarray:
        return self.mass * self.n**2

    def __eq__(self, other):
        return isinstance(other, CheckerboardCopula) and np.array_equal(self.mass, other.mass)

    def __hash__(self):
        return hash(self.mass.tobytes())


def _cell(x, n):
    idx = np.floor(x * n).astype(int)
    idx = np.clip(idx, 0, n - 1)
    return idx, x * n - idx


@dataclass(frozen=True)
class Checkerboard(Copula):
    """Copula with piecewise-uniform density given by a CheckerboardCopula."""

    board: CheckerboardCopula

    @property
    def n(self):
        return self.board.n

    def cdf(self, u, v):
        # bilinear interpolation of the cumulative lattice is exact here
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        s = self.board.lattice()
        i, a = _cell(u, self.n)
        j, b = _cell(v, self.n)
        return (
            (1 - a) * (1 - b) * s[i, j]
            + a * (1 - b) * s[i + 1, j]
            + (1 - a) * b * s[i, j + 1]
            + a * b * s[i + 1, j + 1]
        )

    def d1(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        n = self.n
        rows = np.zeros((n, n + 1))
        rows[:, 1:] = self.board.mass.cumsum(axis=1)
        i, _ = _cell(u, n)
        j, b = _cell(v, n)
        return np.clip(n * ((1 - b) * rows[i, j] + b * rows[i, j + 1]), 0.0, 1.0)

    def d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        n = self.n
        cols = np.zeros((n + 1, n))
        cols[1:, :] = self.board.mass.cumsum(axis=0)
        i, a = _cell(u, n)
        j, _ = _cell(v, n)
        return np.clip(n * ((1 - a) * cols[i, j] + a * cols[i + 1, j]), 0.0, 1.0)

    def breaks1(self, v):
        v = np.asarray(v, float)
        grid = np.arange(1, self.n) / self.n
        return np.broadcast_to(grid, v.shape + grid.shape)

    breaks2 = breaks1

    @property
    def is_singular(self):
        return False

    def __repr__(self):
        return f"checkerboard(n={self.n})"


PI = Independence()
M = UpperBound()
W = LowerBound()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _check_closed(u, v):
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    if np.any(~((u >= 0) & (u <= 1))) or np.any(~((v >= 0) & (v <= 1))):
        raise DomainError("arguments must lie in [0, 1]")
    return u, v


def _check_open(u, v):
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    if np.any(~((u > 0) & (u < 1))) or np.any(~((v > 0) & (v < 1))):
        raise DomainError("partial derivatives are only defined on the open unit square")
    return u, v


def _scalar(x, like):
    x = np.asarray(x, float)
    return float(x) if np.ndim(like[0]) == 0 and np.ndim(like[1]) == 0 else x


def evaluate(c: Copula, u, v):
    """C(u, v) for u, v in [0, 1]; scalars in, scalar out."""
    uu, vv = _check_closed(u, v)
    return _scalar(c.cdf(uu, vv), (u, v))


def partial1(c: Copula, u, v, cfg: GridConfig | None = None):
    """dC/du on the open unit square, clamped to [0, 1].

    Analytic for every built-in variant.  At a kink the right limit is
    returned.  ``cfg`` only matters for copulas without an analytic partial.
    """
    uu, vv = _check_open(u, v)
    if type(c).d1 is Copula.d1:
        d = numeric_partial1(c, uu, vv, cfg)
    else:
        d = c.d1(uu, vv)
    return _scalar(np.clip(d, 0.0, 1.0), (u, v))


def partial2(c: Copula, u, v, cfg: GridConfig | None = None):
    """dC/dv, computed as the first partial of the transpose."""
    return partial1(transpose(c), v, u, cfg)


def numeric_partial1(c: Copula, u, v, cfg: GridConfig | None = None):
    """Central-difference dC/du, ignoring any analytic formula."""
    h = (cfg or GridConfig()).fd_step
    return _central_difference(c, u, v, h, axis=1)


def numeric_partial2(c: Copula, u, v, cfg: GridConfig | None = None):
    h = (cfg or GridConfig()).fd_step
    return _central_difference(c, u, v, h, axis=2)


# ---------------------------------------------------------------------------
# Structural transforms
# ---------------------------------------------------------------------------


def transpose(c: Copula) -> Copula:
    if isinstance(c, Transpose):
        return c.inner
    if isinstance(c, (Independence, UpperBound, LowerBound)):
        return c
    if isinstance(c, Checkerboard):
        return Checkerboard(CheckerboardCopula(c.board.mass.T, check=c.board.check))
    if isinstance(c, ConvexMix):
        return convex_mix(c.weights, [transpose(p) for p in c.parts])
    return Transpose(c)


def flip_y(c: Copula) -> Copula:
    if isinstance(c, FlipY):
        return c.inner
    if isinstance(c, Independence):
        return c
    if isinstance(c, Checkerboard):
        return Checkerboard(CheckerboardCopula(c.board.mass[:, ::-1], check=c.board.check))
    return FlipY(c)


def flip_x(c: Copula) -> Copula:
    if isinstance(c, FlipX):
        return c.inner
    if isinstance(c, Independence):
        return c
    if isinstance(c, Checkerboard):
        return Checkerboard(CheckerboardCopula(c.board.mass[::-1, :], check=c.board.check))
    return FlipX(c)


def convex_mix(weights: Sequence[float], parts: Sequence[Copula]) -> Copula:
    """Convex combination; checkerboards of equal resolution are merged eagerly."""
    mix = ConvexMix(tuple(float(w) for w in weights), tuple(parts))
    if len(mix.parts) == 1:
        return mix.parts[0]
    boards = [p for p in mix.parts if isinstance(p, Checkerboard)]
    if len(boards) == len(mix.parts) and len({b.n for b in boards}) == 1:
        mass = sum(w * p.board.mass for w, p in zip(mix.weights, mix.parts))
        return Checkerboard(CheckerboardCopula(mass))
    return mix


def to_checkerboard(c: Copula, n: int) -> CheckerboardCopula:
    """Cell masses of ``c`` on an n x n grid by inclusion-exclusion."""
    n = int(n)
    if n < 1:
        raise DomainError(f"resolution must be >= 1, got {n}")
    if isinstance(c, Checkerboard) and c.n == n:
        return c.board
    g = np.linspace(0.0, 1.0, n + 1)
    s = c.cdf(g[:, None], g[None, :])
    s[0, :] = 0.0
    s[:, 0] = 0.0
    s[-1, :] = g
    s[:, -1] = g
    mass = np.diff(np.diff(s, axis=0), axis=1)
    # floating-point dust from the differencing
    mass[(mass < 0) & (mass > -1e-12)] = 0.0
    return CheckerboardCopula(mass, check=False)


def as_checkerboard(c, n: int | None = None) -> Checkerboard:
    """Coerce a CheckerboardCopula or copula to a Checkerboard spec."""
    if isinstance(c, CheckerboardCopula):
        c = Checkerboard(c)
    if isinstance(c, Checkerboard) and (n is None or n == c.n):
        return c
    if n is None:
        raise DomainError(f"{c!r} is not a checkerboard; a resolution is required")
    return Checkerboard(to_checkerboard(c, n))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    where: tuple
    amount: float

    def __str__(self):
        return f"{self.kind} at {self.where}: {self.amount:.3g}"


def validate(c: Copula, n: int = 64) -> list[Violation]:
    """Check the copula axioms on the (n+1) x (n+1) lattice.

    Returns one Violation per failing lattice point or cell; an empty list
    means every check passed.
    """
    g = np.linspace(0.0, 1.0, n + 1)
    uu, vv = np.meshgrid(g, g, indexing="ij")
    s = np.asarray(c.cdf(uu, vv), float)
    out: list[Violation] = []

    def record(kind, mask, amount):
        for idx in zip(*np.nonzero(mask)):
            out.append(Violation(kind, tuple(int(k) for k in idx), float(amount[idx])))

    ground = np.concatenate([s[0, :], s[:, 0]])
    for k in np.nonzero(np.abs(ground) > MARGIN_TOL)[0]:
        where = (0, int(k)) if k <= n else (int(k - n - 1), 0)
        out.append(Violation("grounded", where, float(abs(ground[k]))))
    margin = np.concatenate([s[-1, :] - g, s[:, -1] - g])
    for k in np.nonzero(np.abs(margin) > MARGIN_TOL)[0]:
        where = (n, int(k)) if k <= n else (int(k - n - 1), n)
        out.append(Violation("margin", where, float(abs(margin[k]))))

    vol = np.diff(np.diff(s, axis=0), axis=1)
    record("2-increasing", vol < -1e-12, -vol)

    h = 1.0 / n
    du = np.abs(np.diff(s, axis=0)) - h
    dv = np.abs(np.diff(s, axis=1)) - h
    record("lipschitz-u", du > 1e-12, du)
    record("lipschitz-v", dv > 1e-12, dv)

    lower = np.maximum(uu + vv - 1.0, 0.0) - s
    upper = s - np.minimum(uu, vv)
    record("frechet-lower", lower > 1e-12, lower)
    record("frechet-upper", upper > 1e-12, upper)
    return out


# ---------------------------------------------------------------------------
# Margin restoration
# ---------------------------------------------------------------------------


def sinkhorn(mass, max_iter: int = 200, tol: float = 1e-10) -> np.ndarray:
    """Alternately rescale rows and columns of a nonnegative matrix to sums 1/n.

    Raises InvalidCopulaError when the margin error is still above ``tol``
    after ``max_iter`` sweeps.
    """
    p = np.array(mass, dtype=float)
    n = p.shape[0]
    if p.ndim != 2 or p.shape != (n, n) or np.any(p < 0):
        raise InvalidCopulaError("sinkhorn needs a nonnegative square matrix")
    target = 1.0 / n
    for _ in range(max_iter):
        r = p.sum(axis=1)
        if np.any(r == 0):
            raise InvalidCopulaError("cannot rescale a matrix with an empty row")
        p *= (target / r)[:, None]
        c = p.sum(axis=0)
        if np.any(c == 0):
            raise InvalidCopulaError("cannot rescale a matrix with an empty column")
        p *= (target / c)[None, :]
        if np.abs(p.sum(axis=1) - target).max() < tol:
            return p
    raise InvalidCopulaError(f"margin rescaling did not converge in {max_iter} sweeps")


# ---------------------------------------------------------------------------
# Breakpoint-aware integration over the conditioning variable
# ---------------------------------------------------------------------------


def edges(breaks, fallback_n: int):
    """Sorted piece boundaries of [0, 1] cut at ``breaks``, 0 and 1 included.

    ``breaks`` has shape ``batch + (k,)``; the result has shape
    ``batch + (k + 2,)``.  With ``breaks=None`` a uniform partition into
    ``fallback_n`` pieces is returned (shape ``(fallback_n + 1,)``), which
    callers broadcast against the batch.
    """
    if breaks is None:
        return np.linspace(0.0, 1.0, fallback_n + 1)
    b = np.sort(np.clip(np.nan_to_num(breaks, nan=1.0, posinf=1.0, neginf=0.0), 0.0, 1.0), axis=-1)
    shape = b.shape[:-1]
    return np.concatenate([np.zeros(shape + (1,)), b, np.ones(shape + (1,))], axis=-1)


def segments(breaks, fallback_n: int):
    """Midpoints and lengths of the pieces of [0, 1] cut at ``breaks``."""
    e = edges(breaks, fallback_n)
    return 0.5 * (e[..., 1:] + e[..., :-1]), np.diff(e, axis=-1)


# ---------------------------------------------------------------------------
# Checkerboard text format
# ---------------------------------------------------------------------------


def format_checkerboard(board: CheckerboardCopula) -> str:
    lines = [f"checkerboard {board.n}"]
    lines += [" ".join(repr(float(x)) for x in row) for row in board.mass]
    return "\n".join(lines) + "\n"


def parse_checkerboard(text: str, normalize: bool = False, tol: float = 1e-6) -> CheckerboardCopula:
    """Parse the ``checkerboard <n>`` format.

    Margins may deviate from 1/n by at most ``tol``; the matrix is then
    rescaled exactly.  With ``normalize=True`` any nonnegative matrix is
    rescaled to uniform margins.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidCopulaError("empty checkerboard file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "checkerboard":
        raise InvalidCopulaError(f"bad header {lines[0]!r}; expected 'checkerboard <n>'")
    try:
        n = int(head[1])
        rows = [[float(x) for x in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise InvalidCopulaError(str(exc)) from None
    if n < 1 or len(rows) != n or any(len(r) != n for r in rows):
        raise InvalidCopulaError(f"expected {n} rows of {n} values")
    mass = np.array(rows)
    if not np.all(np.isfinite(mass)) or mass.min() < 0:
        raise InvalidCopulaError("cell masses must be finite and nonnegative")
    raw = CheckerboardCopula(mass, check=False)
    if not normalize and raw.margin_error() > tol:
        raise InvalidCopulaError(
            f"margins deviate from 1/n by {raw.margin_error():.3g} (> {tol:g}); use normalization"
        )
    if raw.margin_error() <= MARGIN_TOL:
        return CheckerboardCopula(mass)
    return CheckerboardCopula(sinkhorn(mass / mass.sum(), max_iter=10_000, tol=1e-12))


def read_checkerboard(path, normalize: bool = False) -> CheckerboardCopula:
    with open(path, encoding="utf-8") as fh:
        return parse_checkerboard(fh.read(), normalize=normalize)


def write_checkerboard(board: CheckerboardCopula, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_checkerboard(board))
