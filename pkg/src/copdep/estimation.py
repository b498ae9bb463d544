"""From paired samples to checkerboard copulas, and back."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import rankdata

from .copulas import (
    Checkerboard,
    CheckerboardCopula,
    Copula,
    CopulaError,
    DomainError,
    GridConfig,
    InvalidCopulaError,
    sinkhorn,
)
from .measures import MeasureReport, MeasureSpec, measure, parse_measure

__all__ = [
    "DegenerateSampleError",
    "SampleSet",
    "RNG_NAME",
    "pseudo_observations",
    "empirical_checkerboard",
    "default_resolution",
    "sample_from",
    "measure_from_samples",
    "read_samples",
    "write_samples",
]

RNG_NAME = "numpy.random.PCG64"


class DegenerateSampleError(CopulaError, ValueError):
    """A sample cannot identify a copula (too short, constant, non-finite)."""


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Paired observations; ``x`` and ``y`` are equal-length float arrays."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise DegenerateSampleError("x and y must have the same length")
        if x.size < 2:
            raise DegenerateSampleError(f"need at least 2 pairs, got {x.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DegenerateSampleError("samples contain NaN or infinite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "SampleSet":
        arr = np.asarray(list(pairs), dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def m(self) -> int:
        return self.x.size

    def pairs(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


def pseudo_observations(s: SampleSet, check: bool = True) -> np.ndarray:
    """Ranks scaled into the open unit square, ties sharing their average rank.

    Returns an (m, 2) array with columns u = rank(x)/(m+1), v = rank(y)/(m+1).
    A constant column carries no dependence information and is rejected
    unless ``check`` is false, in which case every entry gets rank (m+1)/2.
    """
    for name, col in (("x", s.x), ("y", s.y)):
        if check and np.all(col == col[0]):
            raise DegenerateSampleError(f"column {name} is constant")
    m = s.m
    return np.column_stack([rankdata(s.x) / (m + 1), rankdata(s.y) / (m + 1)])


def default_resolution(m: int) -> int:
    return max(1, min(math.isqrt(m), 64))


def _interval_weights(lo: np.ndarray, hi: np.ndarray, n: int) -> np.ndarray:
    """Fraction of each interval [lo, hi] falling in each of n equal bins."""
    i = np.arange(n)
    cover = np.clip(hi[:, None] * n - i, 0.0, 1.0) - np.clip(lo[:, None] * n - i, 0.0, 1.0)
    return cover / ((hi - lo) * n)[:, None]


def _rank_intervals(col: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = col.size
    return (rankdata(col, method="min") - 1) / m, rankdata(col, method="max") / m


def empirical_checkerboard(
    s: SampleSet,
    n: int | None = None,
    binning: str = "interval",
    max_iter: int = 200,
    tol: float = 1e-10,
    chunk: int = 8192,
) -> CheckerboardCopula:
    """Bin the ranked sample on an n x n grid and restore uniform margins.

    Each pair contributes mass 1/m.  With ``binning="interval"`` that mass is
    spread uniformly over the pair's rank cell [(r-1)/m, r/m]^2 (tied ranks
    share the union of their cells), so the margins are already uniform and
    the rescaling step only certifies them.  ``binning="point"`` drops the
    whole mass into the cell holding the pseudo-observation; margins are then
    restored by alternating row/column rescaling, and when a row or column is
    empty 1/(m n^2) is added to every cell first.
    """
    m = s.m
    n = default_resolution(m) if n is None else int(n)
    if not 1 <= n <= m:
        raise DegenerateSampleError(f"resolution must satisfy 1 <= n <= m = {m}, got {n}")
    uv = pseudo_observations(s)
    if binning == "interval":
        (ulo, uhi), (vlo, vhi) = _rank_intervals(s.x), _rank_intervals(s.y)
        mass = np.zeros((n, n))
        for k in range(0, m, chunk):
            sl = slice(k, k + chunk)
            mass += _interval_weights(ulo[sl], uhi[sl], n).T @ _interval_weights(vlo[sl], vhi[sl], n)
        mass /= m
    elif binning == "point":
        idx = np.minimum((uv * n).astype(int), n - 1)
        counts = np.zeros((n, n))
        np.add.at(counts, (idx[:, 0], idx[:, 1]), 1.0)
        mass = counts / m
        if np.any(mass.sum(axis=0) == 0) or np.any(mass.sum(axis=1) == 0):
            mass = mass + 1.0 / (m * n * n)
    else:
        raise DomainError(f"unknown binning {binning!r}")
    try:
        return CheckerboardCopula(sinkhorn(mass, max_iter=max_iter, tol=tol))
    except InvalidCopulaError as exc:
        raise DegenerateSampleError(f"could not restore uniform margins: {exc}") from None


def sample_from(c: Copula, m: int, seed: int = 0, cfg: GridConfig | None = None, tol: float = 1e-10) -> SampleSet:
    """Draw m pairs from a copula by conditional inversion.

    u and t are uniform; v is the smallest w with d1C(u, w) >= t, located by
    bisection (d1C(u, .) is nondecreasing).  Output is a function of the seed.
    """
    if m < 1:
        raise DomainError(f"sample size must be >= 1, got {m}")
    if isinstance(c, CheckerboardCopula):
        c = Checkerboard(c)
    rng = np.random.Generator(np.random.PCG64(seed))
    tiny = np.finfo(float).tiny
    u = rng.uniform(tiny, 1.0, m)
    t = rng.uniform(tiny, 1.0, m)
    lo = np.zeros(m)
    hi = np.ones(m)
    steps = int(math.ceil(math.log2(1.0 / tol))) + 1
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        up = c.d1(u, mid) >= t
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return SampleSet(u, hi)


def measure_from_samples(
    s: SampleSet,
    spec: MeasureSpec | str,
    n: int | None = None,
    cfg: GridConfig | None = None,
) -> tuple[MeasureReport, CheckerboardCopula]:
    """Estimate a measure by evaluating it on the empirical checkerboard.

    Returns the report and the board it was computed on; ``report.grid`` is
    the board resolution for measures computed on it in closed form.
    """
    if isinstance(spec, str):
        spec = parse_measure(spec)
    board = empirical_checkerboard(s, n)
    return measure(Checkerboard(board), spec, cfg), board


def read_samples(path) -> SampleSet:
    """Two-column CSV; the first row is a header iff either field is not numeric."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, rec in enumerate(csv.reader(fh)):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) < 2:
                raise DegenerateSampleError(f"line {i + 1}: expected two columns")
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except ValueError:
                if i == 0:
                    continue
                raise DegenerateSampleError(f"line {i + 1}: non-numeric value") from None
    return SampleSet.from_pairs(rows)


def write_samples(s: SampleSet, target, header: bool = True) -> None:
    """Write pairs as CSV to a path or an open text stream."""
    if hasattr(target, "write"):
        _write_rows(s, target, header)
        return
    with open(target, "w", newline="", encoding="utf-8") as fh:
        _write_rows(s, fh, header)


def _write_rows(s, fh, header):
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(["u", "v"])
    w.writerows([repr(float(x)), repr(float(y))] for x, y in zip(s.x, s.y))
