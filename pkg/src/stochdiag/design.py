"""Replicated space-filling designs on the unit hypercube."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .exceptions import DomainError
from .rng import RngStream


@dataclass(frozen=True)
class Design:
    """Unique input locations in ``[0, 1]^d`` with a replicate count per row."""

    points: np.ndarray
    replicates: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        reps = np.asarray(self.replicates, dtype=int).ravel()
        if reps.shape[0] != pts.shape[0]:
            raise DomainError("one replicate count per design point is required")
        if np.any(reps < 1):
            raise DomainError("replicate counts must be >= 1")
        if np.any(pts < 0) or np.any(pts > 1):
            raise DomainError("design points must lie in the unit hypercube")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "replicates", reps)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def with_replicates(self, replicates) -> "Design":
        reps = np.broadcast_to(np.asarray(replicates, dtype=int), (self.n,)).copy()
        return Design(self.points, reps)


def min_pairwise_distance(points) -> float:
    points = np.atleast_2d(points)
    if points.shape[0] < 2:
        return np.inf
    return float(pdist(points).min())


def random_lhs(n: int, d: int, gen: np.random.Generator) -> np.ndarray:
    """One Latin hypercube sample: a random permutation of strata per column,
    jittered uniformly within each stratum."""
    strata = np.column_stack([gen.permutation(n) for _ in range(d)])
    return (strata + gen.uniform(size=(n, d))) / n


def maximin_lhs(n: int, d: int, rng: RngStream, n_restarts: int = 1000, replicates=1) -> Design:
    """Best-of-``n_restarts`` Latin hypercube under the maximin criterion.

    Candidates are drawn in sequence from ``rng`` so that the first ``k``
    candidates do not depend on ``n_restarts``; the objective is therefore
    nondecreasing in ``n_restarts``. Ties go to the earliest candidate.
    """
    if n < 1 or d < 1 or n_restarts < 1:
        raise DomainError("n, d and n_restarts must all be >= 1")
    gen = rng.generator
    best, best_score = None, -np.inf
    for _ in range(n_restarts):
        cand = random_lhs(n, d, gen)
        score = min_pairwise_distance(cand)
        if score > best_score:
            best, best_score = cand, score
    return Design(best, np.broadcast_to(np.asarray(replicates, dtype=int), (n,)).copy())


def expand_replicates(design: Design) -> np.ndarray:
    """Repeat each design row ``r_i`` times, contiguously and in order."""
    return np.repeat(design.points, design.replicates, axis=0)


def _check_bounds(lower, upper, d):
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (d,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (d,))
    if np.any(~(lower < upper)):
        raise DomainError("each lower bound must be strictly below its upper bound")
    return lower, upper


def scale_to_bounds(design, lower, upper) -> np.ndarray:
    """Affine map of unit-cube points (a :class:`Design` or matrix) to ``[lower, upper]``."""
    pts = design.points if isinstance(design, Design) else np.atleast_2d(np.asarray(design, dtype=float))
    lower, upper = _check_bounds(lower, upper, pts.shape[1])
    return lower + pts * (upper - lower)


def unscale_from_bounds(points, lower, upper) -> np.ndarray:
    """Inverse of :func:`scale_to_bounds`."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lower, upper = _check_bounds(lower, upper, pts.shape[1])
    return (pts - lower) / (upper - lower)
