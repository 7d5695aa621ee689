"""Gromov-Hausdorff(-Prokhorov) estimates between finite pointed spaces."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .excursion import Warp
from .metrics import DistanceMatrix
from .space import FiniteSpace, point

Correspondence = Iterable[tuple[int, int]]


def _dmat(X) -> np.ndarray:
    if isinstance(X, FiniteSpace):
        return X.dist
    if isinstance(X, DistanceMatrix):
        return X.entries
    return np.asarray(X, dtype=float)


def distortion(R: Correspondence, X, Y) -> float:
    """sup over pairs (x, y), (x', y') in R of |d_X(x, x') − d_Y(y, y')|."""
    DX, DY = _dmat(X), _dmat(Y)
    pairs = np.array(sorted(set(map(tuple, R))), dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        return 0.0
    xi, yi = pairs[:, 0], pairs[:, 1]
    if xi.min() < 0 or xi.max() >= len(DX) or yi.min() < 0 or yi.max() >= len(DY):
        raise IndexError("correspondence index out of range")
    return float(np.max(np.abs(DX[np.ix_(xi, xi)] - DY[np.ix_(yi, yi)])))


def is_correspondence(R: Correspondence, n: int, m: int) -> bool:
    R = list(R)
    return {x for x, _ in R} == set(range(n)) and {y for _, y in R} == set(range(m))


# ---------------------------------------------------------------------------
# exact search


def gh_exact_small(X, Y, max_points: int = 6, pointed: bool = False) -> float:
    """
    Exact GH distance by branch and bound over correspondences.

    Every correspondence contains one of the form graph(g) ∪ {(h(y), y)} with
    g: X → Y and h defined on the points of Y missed by g, so only those are
    explored; partial sets are pruned once their distortion reaches the
    incumbent.
    """
    DX, DY = _dmat(X), _dmat(Y)
    n, m = len(DX), len(DY)
    if n > max_points or m > max_points:
        raise ValueError(f"exact search limited to {max_points} points per space")
    rx = X.root if isinstance(X, FiniteSpace) else 0
    ry = Y.root if isinstance(Y, FiniteSpace) else 0

    full = float(np.max(np.abs(DX[:, :, None, None] - DY[None, None, :, :])))
    best = [full]
    xs, ys = [], []

    def add_cost(x, y, cur):
        if not xs:
            return cur
        c = np.max(np.abs(DX[x, xs] - DY[y, ys]))
        return max(cur, float(c))

    if pointed:
        xs.append(rx)
        ys.append(ry)
    order_x = [x for x in range(n) if not (pointed and x == rx)]

    def phase_h(covered, cur):
        missing = [y for y in range(m) if y not in covered]
        if not missing:
            if cur < best[0]:
                best[0] = cur
            return
        y = missing[0]
        cands = sorted(((add_cost(x, y, cur), x) for x in range(n)))
        for c, x in cands:
            if c >= best[0]:
                break
            xs.append(x)
            ys.append(y)
            covered.add(y)
            phase_h(covered, c)
            covered.discard(y)
            xs.pop()
            ys.pop()

    def phase_g(i, cur):
        if i == len(order_x):
            phase_h(set(ys), cur)
            return
        x = order_x[i]
        cands = sorted(((add_cost(x, y, cur), y) for y in range(m)))
        for c, y in cands:
            if c >= best[0]:
                break
            xs.append(x)
            ys.append(y)
            phase_g(i + 1, c)
            xs.pop()
            ys.pop()

    if n and m:
        phase_g(0, 0.0)
    return best[0] / 2


# ---------------------------------------------------------------------------
# lower bounds


def _hausdorff_1d(a: np.ndarray, b: np.ndarray) -> float:
    a = np.sort(a)
    b = np.sort(b)

    def one_side(p, q):
        idx = np.clip(np.searchsorted(q, p), 1, len(q) - 1) if len(q) > 1 else np.zeros(len(p), dtype=int)
        d = np.abs(p - q[idx])
        if len(q) > 1:
            d = np.minimum(d, np.abs(p - q[idx - 1]))
        return float(d.max())

    return max(one_side(a, b), one_side(b, a))


def gh_lower(X, Y, pointed: bool = False) -> float:
    """
    Lower bound: half the largest of the diameter gap, the Hausdorff gap of
    the distance value sets, and the local distance-profile gap.
    """
    DX, DY = _dmat(X), _dmat(Y)
    bounds = [abs(DX.max() - DY.max())]
    bounds.append(_hausdorff_1d(DX.ravel(), DY.ravel()))
    H = np.array([[_hausdorff_1d(DX[i], DY[j]) for j in range(len(DY))] for i in range(len(DX))])
    bounds.append(float(H.min(axis=1).max()))
    bounds.append(float(H.min(axis=0).max()))
    if pointed:
        rx = X.root if isinstance(X, FiniteSpace) else 0
        ry = Y.root if isinstance(Y, FiniteSpace) else 0
        bounds.append(float(H[rx, ry]))
    return float(max(bounds)) / 2


# ---------------------------------------------------------------------------
# reparametrization upper bounds


def _staircase(n: int, m: int, lam: Warp) -> list[tuple[int, int]]:
    cuts = np.unique(np.concatenate([np.arange(n + 1) / n, lam.inverse(np.arange(m + 1) / m)]))
    mids = (cuts[:-1] + cuts[1:]) / 2
    mids = mids[np.diff(cuts) > 0]
    xi = np.minimum((mids * n).astype(int), n - 1)
    yi = np.minimum((lam(mids) * m).astype(int), m - 1)
    return list(zip(xi.tolist(), yi.tolist()))


def _random_warp(rng, knots: int) -> Warp:
    u = np.linspace(0, 1, knots + 2)
    v = np.sort(rng.uniform(0, 1, knots))
    v = np.concatenate([[0.0], v, [1.0]])
    v = np.maximum.accumulate(v)
    v = v + np.arange(len(v)) * 1e-9
    v = v / v[-1]
    return Warp(list(zip(u, v)))


def _local_search(cost: Callable[[Warp], float], knots: int, rng, rounds: int = 3) -> float:
    u = np.linspace(0, 1, knots + 2)
    v = u.copy()
    best = cost(Warp(list(zip(u, v))))
    step = 0.5 / (knots + 1)
    for _ in range(rounds):
        for i in rng.permutation(np.arange(1, knots + 1)):
            for s in (-step, step):
                w = v.copy()
                w[i] += s
                if not (w[i - 1] < w[i] < w[i + 1]):
                    continue
                c = cost(Warp(list(zip(u, w))))
                if c < best:
                    best, v = c, w
        step /= 2
    return best


def parametrized_upper(d1, d2, warps: int | Sequence[Warp] = 16, seed: int = 0) -> float:
    """
    GH upper bound ``½ min_λ ‖d1 − d2∘(λ, λ)‖∞`` over reparametrizations.

    ``d1``/``d2`` may be DistanceMatrix objects on identical sample times
    (identity warp only), a DistanceMatrix with a vectorized callable
    ``d2(s, t)`` (warps searched by local descent on ``warps`` knots seeded
    with the identity), or two FiniteSpaces (monotone staircase
    correspondences along the point order, always containing the roots).
    """
    rng = np.random.default_rng(seed)
    if isinstance(d1, FiniteSpace) and isinstance(d2, FiniteSpace):
        return _space_upper(d1, d2, warps, rng)
    if not isinstance(d1, DistanceMatrix):
        raise TypeError("d1 must be a DistanceMatrix or FiniteSpace")
    if isinstance(d2, DistanceMatrix):
        if len(d1) != len(d2) or not np.array_equal(d1.sample_times, d2.sample_times):
            raise ValueError("matrices must share sample times when no warp is possible")
        return float(np.max(np.abs(d1.entries - d2.entries))) / 2
    if not callable(d2):
        raise TypeError("d2 must be a DistanceMatrix or a callable pseudo-distance")
    t = d1.sample_times
    iu, ju = np.triu_indices(len(t))

    def cost(lam: Warp) -> float:
        lt = lam(t)
        return float(np.max(np.abs(d1.entries[iu, ju] - d2(lt[iu], lt[ju]))))

    best = cost(Warp([(0.0, 0.0), (1.0, 1.0)]))
    if isinstance(warps, int):
        if warps > 0:
            best = min(best, _local_search(cost, warps, rng))
    else:
        for lam in warps:
            best = min(best, cost(lam))
    return best / 2


def _space_upper(X: FiniteSpace, Y: FiniteSpace, warps, rng) -> float:
    ox = np.argsort(X.points, kind="stable")
    oy = np.argsort(Y.points, kind="stable")
    n, m = len(X), len(Y)

    def cost(lam: Warp) -> float:
        R = [(int(ox[i]), int(oy[j])) for i, j in _staircase(n, m, lam)]
        R.append((X.root, Y.root))
        return distortion(R, X, Y)

    best = cost(Warp([(0.0, 0.0), (1.0, 1.0)]))
    if isinstance(warps, int):
        if warps > 0:
            best = min(best, _local_search(cost, warps, rng))
            for _ in range(warps):
                best = min(best, cost(_random_warp(rng, 3)))
    else:
        for lam in warps:
            best = min(best, cost(lam))
    return best / 2


# ---------------------------------------------------------------------------
# GHP


def _tv(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.abs(p - q).sum() / 2)


def ghp_upper(X: FiniteSpace, Y: FiniteSpace, shared_times=None) -> float:
    """
    Pointed GHP upper bound from a coupling carried by a correspondence.

    With shared sample times the correspondence is {([t]_X, [t]_Y)} plus the
    roots and the coupling is the image of the uniform measure on the shared
    samples; the bound is ``max(dis, TV_X + TV_Y)`` where TV measures how far
    that image is from each space's own weights (zero when both spaces were
    built from these samples).  Otherwise the monotone coupling of the
    weights along the point order is used.
    """
    if shared_times is None and X.sample_times is not None and Y.sample_times is not None:
        if np.array_equal(X.sample_times, Y.sample_times):
            shared_times = X.sample_times
    if shared_times is not None:
        times = np.asarray(shared_times, dtype=float)
        ix = X.locate(times)
        iy = Y.locate(times)
        R = set(zip(ix.tolist(), iy.tolist()))
        R.add((X.root, Y.root))
        if not is_correspondence(R, len(X), len(Y)):
            raise ValueError("shared samples do not cover both spaces")
        px = np.bincount(ix, minlength=len(X)) / len(times)
        py = np.bincount(iy, minlength=len(Y)) / len(times)
        return max(distortion(R, X, Y), _tv(px, X.weights) + _tv(py, Y.weights))
    R = set(_monotone_pairs(X, Y))
    R.add((X.root, Y.root))
    return distortion(R, X, Y)


def _monotone_pairs(X: FiniteSpace, Y: FiniteSpace) -> list[tuple[int, int]]:
    ox = np.argsort(X.points, kind="stable")
    oy = np.argsort(Y.points, kind="stable")
    cx = np.concatenate([[0.0], np.cumsum(X.weights[ox])])
    cy = np.concatenate([[0.0], np.cumsum(Y.weights[oy])])
    cuts = np.unique(np.concatenate([cx, cy]))
    mids = (cuts[:-1] + cuts[1:]) / 2
    i = np.clip(np.searchsorted(cx, mids, side="right") - 1, 0, len(X) - 1)
    j = np.clip(np.searchsorted(cy, mids, side="right") - 1, 0, len(Y) - 1)
    pairs = {(int(ox[a]), int(oy[b])) for a, b in zip(i, j)}
    covered_x = {a for a, _ in pairs}
    covered_y = {b for _, b in pairs}
    for a in range(len(X)):
        if a not in covered_x:
            pairs.add((a, Y.root))
    for b in range(len(Y)):
        if b not in covered_y:
            pairs.add((X.root, b))
    return sorted(pairs)


@dataclass
class GHReport:
    lower: float
    upper: float
    exact: float | None

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "exact": self.exact}


def gh_estimate(X: FiniteSpace, Y: FiniteSpace, exact_max: int = 6, pointed: bool = False) -> GHReport:
    """Lower and upper bounds, plus the exact value for small spaces."""
    lower = gh_lower(X, Y, pointed=pointed)
    upper = parametrized_upper(X, Y)
    exact = None
    if len(X) <= exact_max and len(Y) <= exact_max:
        exact = gh_exact_small(X, Y, max_points=exact_max, pointed=pointed)
    return GHReport(lower, upper, exact)


def sequence_distance(S1: Sequence[tuple[float, FiniteSpace]], S2: Sequence[tuple[float, FiniteSpace]]) -> float:
    """sup_j max(|α_j − β_j|, GHP bound between components), padding with (0, point)."""
    n = max(len(S1), len(S2))
    pad = (0.0, point())
    a = list(S1) + [pad] * (n - len(S1))
    b = list(S2) + [pad] * (n - len(S2))
    best = 0.0
    for (ma, X), (mb, Y) in zip(a, b):
        best = max(best, abs(ma - mb), ghp_upper(X, Y))
    return best
