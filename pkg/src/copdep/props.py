"""Seeded property suites over random checkerboard copulas.

Each suite returns a :class:`SuiteResult`; ``margin`` is the smallest slack
seen (bound minus value for inequalities, tolerance minus discrepancy for
equalities), so a negative margin is a violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import shuffle_left, star_boards
from .copulas import (
    PI,
    M,
    W,
    Checkerboard,
    CheckerboardCopula,
    GridConfig,
    Tent,
    convex_mix,
    flip_y,
    sinkhorn,
    transpose,
)
from .measures import measure, parse_measure

__all__ = [
    "SuiteResult",
    "SUITES",
    "random_board",
    "random_pairs",
    "dpi_suite",
    "sobolev_counterexample",
    "coset_suite",
    "invariance_suite",
    "bounds_suite",
    "run_suite",
]

DPI_MEASURES = ("tau1", "tau2", "ns_shannon", "copula_distance:2", "shannon_mi")
COSET_MEASURES = ("tau1", "tau2", "ns_shannon")
DISTANCE_LIKE = ("tau1", "tau2", "tau_alpha:3", "sw_sigma", "sw_gamma", "sw_kappa", "sobolev")
BOUNDED_MEASURES = (
    "tau1",
    "tau2",
    "tau_alpha:3",
    "sw_sigma",
    "sw_gamma",
    "sw_kappa",
    "sobolev",
    "ns_renyi:0.5",
    "ns_renyi:1.5",
    "ns_tsallis:0.5",
    "ns_tsallis:1.5",
    "ns_shannon",
    "gns_renyi:1.5:0",
    "gns_tsallis:2.5:1",
    "gns_shannon:0.5",
)


@dataclass
class SuiteResult:
    suite: str
    checks: int = 0
    violations: int = 0
    margin: float = float("inf")
    status: str = "pass"
    notes: list = field(default_factory=list)

    def record(self, slack: float, what: str = "") -> None:
        self.checks += 1
        if slack < self.margin:
            self.margin = float(slack)
        if slack < 0:
            self.violations += 1
            if len(self.notes) < 5:
                self.notes.append(f"{what}: short by {-slack:.3g}")

    def finish(self) -> "SuiteResult":
        if self.status == "pass" and self.violations:
            self.status = "fail"
        return self

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "found", "reported")

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "status": self.status,
            "checks": self.checks,
            "violations": self.violations,
            "worst_margin": self.margin if np.isfinite(self.margin) else None,
            "notes": list(self.notes),
        }


def random_board(rng: np.random.Generator, n: int) -> CheckerboardCopula:
    """A random n x n checkerboard copula.

    A Sinkhorn-normalized matrix of gamma draws (shape log-uniform on
    [0.05, 5], floored at 1e-3 so the rescaling converges fast) is mixed with weight 1 - lam, lam ~ U(0, 1), with the board of
    a random strip shuffle.  The suites thus see nearly uniform boards as
    well as boards close to complete dependence.
    """
    shape = float(np.exp(rng.uniform(np.log(0.05), np.log(5.0))))
    lam = float(rng.uniform())
    noise = sinkhorn(rng.gamma(shape, size=(n, n)) + 1e-3, max_iter=100_000, tol=1e-14)
    return CheckerboardCopula((1.0 - lam) * noise + lam * np.eye(n)[rng.permutation(n)] / n)


def random_pairs(seed: int, trials: int, n: int):
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        yield random_board(rng, n), random_board(rng, n)


def _value(board, name: str, cfg: GridConfig | None = None) -> float:
    return measure(Checkerboard(board), name, cfg).value


def dpi_suite(trials: int = 1000, n: int = 16, seed: int = 42, tol: float = 1e-9, measures=DPI_MEASURES) -> SuiteResult:
    """tau(A * B) <= tau(B) on random pairs, matrix route."""
    res = SuiteResult("dpi")
    for t, (a, b) in enumerate(random_pairs(seed, trials, n)):
        ab = star_boards(a, b)
        for name in measures:
            res.record(_value(b, name) + tol - _value(ab, name), f"pair {t} {name}")
    return res.finish()


def sobolev_counterexample(trials: int = 1000, n: int = 16, seed: int = 42, tol: float = 1e-6) -> SuiteResult:
    """Search the DPI pairs for tau_Sob(A * B) > tau_Sob(B) + tol.

    Finding one is the expected outcome; ``status`` is ``"found"`` then and
    ``"inconclusive"`` otherwise.
    """
    res = SuiteResult("sobolev-counterexample")
    best = -np.inf
    for t, (a, b) in enumerate(random_pairs(seed, trials, n)):
        excess = _value(star_boards(a, b), "sobolev") - _value(b, "sobolev")
        res.checks += 1
        if excess > tol:
            res.violations += 1
            if len(res.notes) < 5:
                res.notes.append(f"pair {t}: excess {excess:.3g}")
        best = max(best, excess)
    res.margin = float(best)
    res.status = "found" if res.violations else "inconclusive"
    return res


def coset_suite(trials: int = 100, n: int = 32, seed: int = 7, tol: float = 1e-9) -> SuiteResult:
    """Strip shuffles leave tau unchanged; row and column shuffles leave the
    symmetric copula distance unchanged."""
    res = SuiteResult("coset")
    rng = np.random.default_rng(seed)
    for t in range(trials):
        c = random_board(rng, n)
        perm = rng.permutation(n)
        shuffled = shuffle_left(Checkerboard(c), perm, n).board
        for name in COSET_MEASURES:
            res.record(tol - abs(_value(shuffled, name) - _value(c, name)), f"trial {t} {name}")
        both = CheckerboardCopula(shuffled.mass[:, rng.permutation(n)])
        d = abs(_value(both, "copula_distance:2") - _value(c, "copula_distance:2"))
        res.record(tol - d, f"trial {t} copula_distance:2 double coset")
    return res.finish()


def invariance_suite(trials: int = 100, n: int = 16, seed: int = 11, tol: float = 1e-9) -> tuple[SuiteResult, SuiteResult]:
    """Decreasing relabelling of Y: distance-like measures are unchanged.

    The second result tracks ns_shannon under the same map; it is reported,
    never failed, since the entropy-like measures are not invariant there.
    """
    res = SuiteResult("invariance")
    ent = SuiteResult("invariance-ns_shannon", status="reported")
    rng = np.random.default_rng(seed)
    for t in range(trials):
        c = Checkerboard(random_board(rng, n))
        f = flip_y(c)
        for name in DISTANCE_LIKE:
            res.record(tol - abs(measure(f, name).value - measure(c, name).value), f"trial {t} {name}")
        d = abs(measure(f, "ns_shannon").value - measure(c, "ns_shannon").value)
        ent.record(tol - d, f"trial {t}")
    ent.status = "reported"
    return res.finish(), ent


def builtin_specs():
    yield "pi", PI
    yield "m", M
    yield "w", W
    for th in (0.0, 0.25, 0.3, 0.5, 0.75, 1.0):
        yield f"tent:{th}", Tent(th)
        yield f"transpose(tent:{th})", transpose(Tent(th))
        yield f"flipy(tent:{th})", flip_y(Tent(th))
    yield "mix:0.5,m;0.5,w", convex_mix([0.5, 0.5], [M, W])
    yield "mix:0.3,m;0.7,pi", convex_mix([0.3, 0.7], [M, PI])


def bounds_suite(trials: int = 500, n: int = 16, seed: int = 3, tol: float = 1e-9, measures=BOUNDED_MEASURES) -> SuiteResult:
    """Every normalized measure stays in [0, 1] on builtin copulas and random boards."""
    res = SuiteResult("bounds")

    def check(c, label, names):
        for name in names:
            spec = parse_measure(name)
            v = measure(c, spec).value
            res.record(min(v + tol, 1.0 + tol - v), f"{label} {spec.ident}")

    for label, c in builtin_specs():
        check(c, label, measures)
    rng = np.random.default_rng(seed)
    for t in range(trials):
        check(Checkerboard(random_board(rng, n)), f"board {t}", measures + ("linfoot",))
    return res.finish()


SUITES = ("dpi", "coset", "invariance", "bounds", "sobolev-counterexample")


def run_suite(name: str, trials: int | None = None, n: int | None = None, seed: int | None = None) -> list[SuiteResult]:
    """Run one suite (or ``"all"``) with CLI-style overrides."""
    kw = {}
    if trials is not None:
        kw["trials"] = trials
    if n is not None:
        kw["n"] = n
    if seed is not None:
        kw["seed"] = seed
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, trials, n, seed)]
    if name == "dpi":
        return [dpi_suite(**kw)]
    if name == "sobolev-counterexample":
        return [sobolev_counterexample(**kw)]
    if name == "coset":
        return [coset_suite(**kw)]
    if name == "invariance":
        return list(invariance_suite(**kw))
    if name == "bounds":
        return [bounds_suite(**kw)]
    raise ValueError(f"unknown suite {name!r}")
