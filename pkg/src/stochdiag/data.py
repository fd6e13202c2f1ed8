"""Replicated run data grouped by unique input location."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .distributions import SampleMoments, sample_moments
from .exceptions import DomainError


def group_rows(X, tol: float = 0.0):
    """Group matching input rows.

    Returns ``(unique, labels)``: unique locations in order of first
    appearance and, for each row of ``X``, the index of its location. With
    ``tol == 0`` rows must be exactly equal; otherwise rows within ``tol`` in
    every coordinate of a location's first row join that location.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if tol == 0:
        _, first, inv = np.unique(X, axis=0, return_index=True, return_inverse=True)
        inv = inv.ravel()
        order = np.argsort(first)
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        return X[first[order]], rank[inv]
    reps: list = []
    labels = np.empty(X.shape[0], dtype=int)
    for i, row in enumerate(X):
        for k, ref in enumerate(reps):
            if np.all(np.abs(row - ref) <= tol):
                labels[i] = k
                break
        else:
            labels[i] = len(reps)
            reps.append(row)
    return np.array(reps).reshape(-1, X.shape[1]), labels


@dataclass(frozen=True)
class ReplicatedDataset:
    """Simulator runs pooled by unique input location.

    Attributes
    ----------
    X : ndarray (n_loc, d)
        Distinct input locations.
    outputs : list of ndarray
        Replicate outputs per location, in run order.
    """

    X: np.ndarray
    outputs: List[np.ndarray]

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        outs = [np.asarray(o, dtype=float).ravel() for o in self.outputs]
        if len(outs) != X.shape[0]:
            raise DomainError("one output group per location is required")
        if any(o.size == 0 for o in outs):
            raise DomainError("every location needs at least one run")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "outputs", outs)

    @classmethod
    def from_runs(cls, X, y, tol: float = 0.0) -> "ReplicatedDataset":
        X = np.asarray(X, dtype=float)
        X = X.reshape(-1, 1) if X.ndim == 1 else X
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise DomainError("X and y must have the same number of rows")
        unique, labels = group_rows(X, tol)
        outs = [y[labels == k] for k in range(unique.shape[0])]
        return cls(unique, outs)

    @property
    def n_locations(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def replicates(self) -> np.ndarray:
        return np.array([o.size for o in self.outputs])

    @property
    def means(self) -> np.ndarray:
        return np.array([o.mean() for o in self.outputs])

    def moments(self, ddof: int = 1) -> List[Optional[SampleMoments]]:
        """Per-location sample moments; ``None`` where only one run exists."""
        return [sample_moments(o, ddof=ddof) if o.size >= 2 else None for o in self.outputs]

    def runs(self):
        """Flatten back to ``(X_runs, y_runs)`` with replicates contiguous."""
        X = np.repeat(self.X, self.replicates, axis=0)
        y = np.concatenate(self.outputs)
        return X, y


# The validation set has the same layout; the diagnostics check its
# replication requirements per statistic.
ReplicatedValidationSet = ReplicatedDataset
