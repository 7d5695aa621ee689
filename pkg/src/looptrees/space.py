"""Finite pointed weighted metric spaces obtained as quotients of sampled codings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .excursion import Excursion
from .metrics import matrix

DEDUPE_TOL = 1e-9


@dataclass
class FiniteSpace:
    """
    Pointed weighted finite metric space.

    ``points`` holds a representative parameter (a sample time) per point.
    When the space comes from sampling, ``sample_times`` and ``labels`` record
    which point each original sample was merged into.
    """

    points: np.ndarray
    dist: np.ndarray
    root: int
    weights: np.ndarray
    sample_times: np.ndarray | None = None
    labels: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.dist = np.asarray(self.dist, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        n = len(self.points)
        if self.dist.shape != (n, n) or len(self.weights) != n:
            raise ValueError("inconsistent FiniteSpace sizes")
        if not (0 <= self.root < n):
            raise ValueError("root index out of range")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    def __len__(self) -> int:
        return len(self.points)

    def locate(self, times) -> np.ndarray:
        """Indices of the points that the given sample times were merged into."""
        if self.sample_times is None:
            raise ValueError("space carries no sample labels")
        times = np.asarray(times, dtype=float)
        idx = np.searchsorted(self.sample_times, times)
        idx = np.clip(idx, 0, len(self.sample_times) - 1)
        if not np.all(self.sample_times[idx] == times):
            raise ValueError("time not among the samples of this space")
        return self.labels[idx]

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "matrix": self.dist.tolist(),
            "root": int(self.root),
            "weights": self.weights.tolist(),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteSpace":
        return cls(np.array(data["points"]), np.array(data["matrix"]), int(data["root"]), np.array(data["weights"]))


def _merge_classes(D: np.ndarray, tol: float) -> tuple[int, np.ndarray]:
    adj = csr_matrix(D <= tol)
    return connected_components(adj, directed=False)


def from_matrix(dist, times=None, root: int = 0, weights=None, tol: float = DEDUPE_TOL) -> FiniteSpace:
    """Quotient a pseudo-distance matrix on sample points by {d <= tol}."""
    D = np.asarray(dist, dtype=float)
    n = len(D)
    if n == 0:
        raise ValueError("empty sample set")
    times = np.arange(n, dtype=float) if times is None else np.asarray(times, dtype=float)
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    k, lab = _merge_classes(D, tol)
    # relabel classes in order of first appearance
    order = {}
    for c in lab:
        order.setdefault(int(c), len(order))
    lab = np.array([order[int(c)] for c in lab])
    reps = np.array([int(np.argmax(lab == c)) for c in range(k)])
    weights = np.bincount(lab, weights=w, minlength=k)
    weights = weights / weights.sum()
    sort = np.argsort(times)
    return FiniteSpace(
        times[reps],
        D[np.ix_(reps, reps)],
        int(lab[root]),
        weights,
        sample_times=times[sort],
        labels=lab[sort],
    )


def quotient_space(f: Excursion, kind="loop", sample_times=None, dedupe_tol: float = DEDUPE_TOL) -> FiniteSpace:
    """Sampled approximation of the space coded by ``f`` under a pseudo-distance."""
    if sample_times is None or len(sample_times) == 0:
        raise ValueError("sample_times must be non-empty")
    times = np.unique(np.asarray(sample_times, dtype=float))
    if times[-1] != 1.0:
        raise ValueError("sample_times must include 1")
    r, _, _ = f.jump_arrays()
    if not np.all(np.isin(r, times)):
        raise ValueError("sample_times must include every jump time")
    D = matrix(f, kind, times).entries
    return from_matrix(D, times, root=len(times) - 1, tol=dedupe_tol)


def scale(X: FiniteSpace, c: float) -> FiniteSpace:
    if c <= 0:
        raise ValueError("scale factor must be positive")
    return FiniteSpace(X.points.copy(), c * X.dist, X.root, X.weights.copy(), X.sample_times, X.labels, dict(X.meta))


def diam(X: FiniteSpace) -> float:
    return float(X.dist.max()) if len(X) else 0.0


def segment(length: float, n: int) -> FiniteSpace:
    """n equispaced points on a segment, rooted at an endpoint."""
    if n < 2:
        raise ValueError("need n >= 2")
    pos = np.linspace(0.0, 1.0, n)
    D = length * np.abs(pos[:, None] - pos[None, :])
    return FiniteSpace(pos, D, 0, np.full(n, 1.0 / n), pos, np.arange(n))


def circle(length: float, n: int) -> FiniteSpace:
    """n equispaced points on a circle of the given length, rooted at position 0."""
    if n < 2:
        raise ValueError("need n >= 2")
    pos = np.arange(n) / n
    d = np.abs(pos[:, None] - pos[None, :])
    D = length * np.minimum(d, 1.0 - d)
    return FiniteSpace(pos, D, 0, np.full(n, 1.0 / n), pos, np.arange(n))


def point() -> FiniteSpace:
    return FiniteSpace(np.zeros(1), np.zeros((1, 1)), 0, np.ones(1))


def glue(X0: FiniteSpace, X1: FiniteSpace, a: int, masses: tuple[float, float] | None = None) -> FiniteSpace:
    """Glue the root of X1 onto the point ``a`` of X0; the root stays that of X0."""
    if not (0 <= a < len(X0)):
        raise IndexError("gluing point out of range")
    n0, n1 = len(X0), len(X1)
    D = np.zeros((n0 + n1, n0 + n1))
    D[:n0, :n0] = X0.dist
    D[n0:, n0:] = X1.dist
    cross = X0.dist[:, a][:, None] + X1.dist[X1.root][None, :]
    D[:n0, n0:] = cross
    D[n0:, :n0] = cross.T
    m0, m1 = masses if masses is not None else (0.5, 0.5)
    w = np.concatenate([m0 * X0.weights, m1 * X1.weights])
    return FiniteSpace(np.concatenate([X0.points, X1.points]), D, X0.root, w / w.sum())
