"""Nonsymmetric copula-based dependence measures, the * product, and estimation."""

from .algebra import (
    InvertibilityClass,
    classify_invertibility,
    markov_compose,
    refine,
    shuffle_left,
    StripShuffle,
    star,
)
from .copulas import *  # noqa: F401,F403
from .copulas import __all__ as _copulas_all
from .estimation import (
    DegenerateSampleError,
    SampleSet,
    empirical_checkerboard,
    measure_from_samples,
    pseudo_observations,
    read_samples,
    sample_from,
    write_samples,
)
from .measures import *  # noqa: F401,F403
from .measures import __all__ as _measures_all

__version__ = "0.1.0"

__all__ = [
    *_copulas_all,
    *_measures_all,
    "InvertibilityClass",
    "classify_invertibility",
    "markov_compose",
    "refine",
    "shuffle_left",
    "StripShuffle",
    "star",
    "DegenerateSampleError",
    "SampleSet",
    "empirical_checkerboard",
    "measure_from_samples",
    "pseudo_observations",
    "read_samples",
    "sample_from",
    "write_samples",
]
