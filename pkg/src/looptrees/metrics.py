"""Pseudo-distances coded by an excursion, computed as finite sums over jumps."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .excursion import Excursion
from .shuffle import Shuffle, circle_dist, loop_dist

KINDS = ("classic", "tree", "loop", "vern", "loop-shuffled", "vern-shuffled")


@dataclass(frozen=True)
class MetricKind:
    name: str
    coefficient: float = 2.0
    shuffle: Shuffle | None = None

    def __post_init__(self):
        if self.name not in KINDS:
            raise ValueError(f"unknown metric kind {self.name!r}")
        if self.coefficient <= 0:
            raise ValueError("coefficient must be positive")
        if self.name.endswith("shuffled") and self.shuffle is None:
            object.__setattr__(self, "shuffle", Shuffle())

    @classmethod
    def parse(cls, name: str, coefficient: float = 2.0, shuffle: Shuffle | None = None):
        return cls(name.replace("_", "-"), coefficient, shuffle)


def _as_kind(kind) -> MetricKind:
    if isinstance(kind, MetricKind):
        return kind
    return MetricKind.parse(kind)


def _shuffled_positions(f: Excursion, X: np.ndarray, shuffle: Shuffle) -> np.ndarray:
    _, h, _ = f.jump_arrays()
    P = np.empty_like(X)
    for j, d in enumerate(h):
        P[j] = shuffle.phi(float(d), np.clip(X[j] / d, 0.0, 1.0))
    return P


def pairwise(f: Excursion, s, t, kind="loop") -> np.ndarray:
    """Vectorized pseudo-distance between the times in ``s`` and ``t``."""
    kind = _as_kind(kind)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    a = np.minimum(s, t)
    b = np.maximum(s, t)
    live = a != b
    if not live.all():
        out = np.zeros(np.broadcast(a, b).shape)
        out[live] = pairwise(f, a[live], b[live], kind)
        return out
    _, h, _ = f.jump_arrays()
    need_tree = kind.name in ("classic", "tree", "vern", "vern-shuffled")
    need_x = kind.name != "classic"
    pa, pb = f.probe(a), f.probe(b)
    out = np.zeros(a.shape)
    if need_tree:
        fa = np.where(pa[2], f.right[pa[1]], pa[3])
        fb = np.where(pb[2], f.right[pb[1]], pb[3])
        out += fa + fb - 2 * f.inf(a, b, probes=(pa, pb))
    if need_x and len(h):
        Xa = f.x_profile(a, probe=pa)
        Xb = f.x_profile(b, probe=pb)
        if kind.name in ("tree", "vern", "vern-shuffled"):
            out -= np.abs(Xa - Xb).sum(axis=0)
        if kind.name in ("loop", "vern"):
            loop = loop_dist(Xa, Xb, h[:, None]).sum(axis=0)
            out += loop if kind.name == "loop" else kind.coefficient * loop
        elif kind.name in ("loop-shuffled", "vern-shuffled"):
            Pa = _shuffled_positions(f, Xa, kind.shuffle)
            Pb = _shuffled_positions(f, Xb, kind.shuffle)
            loop = (h[:, None] * circle_dist(Pa, Pb)).sum(axis=0)
            out += loop if kind.name == "loop-shuffled" else kind.coefficient * loop
    out = np.where(a == b, 0.0, out)
    return out


def _scalar(f, s, t, kind) -> float:
    return float(pairwise(f, s, t, kind)[0])


def d_classic(f: Excursion, s: float, t: float) -> float:
    return _scalar(f, s, t, "classic")


def d_loop(f: Excursion, s: float, t: float) -> float:
    return _scalar(f, s, t, "loop")


def d_tree(f: Excursion, s: float, t: float) -> float:
    return _scalar(f, s, t, "tree")


def d_vern(f: Excursion, s: float, t: float, coefficient: float = 2.0) -> float:
    return _scalar(f, s, t, MetricKind("vern", coefficient))


def d_loop_shuffled(f: Excursion, shuffle: Shuffle, s: float, t: float) -> float:
    return _scalar(f, s, t, MetricKind("loop-shuffled", shuffle=shuffle))


def d_vern_shuffled(f: Excursion, shuffle: Shuffle, s: float, t: float, coefficient: float = 2.0) -> float:
    return _scalar(f, s, t, MetricKind("vern-shuffled", coefficient, shuffle))


def d_one_sided(f: Excursion, s: float, t: float, shuffle: Shuffle | None = None) -> float:
    """Σ over jumps r with s ≺ r ⪯ t of the loop distance from 0 to x_r^t."""
    from .excursion import is_ancestor

    r, h, _ = f.jump_arrays()
    sel = (r != s) & is_ancestor(f, np.full(len(r), s), r) & is_ancestor(f, r, np.full(len(r), t))
    total = 0.0
    for rj, hj in zip(r[sel], h[sel]):
        x = float(f.x_profile([t])[list(r).index(rj), 0])
        if shuffle is None:
            total += float(loop_dist(0.0, x, hj))
        else:
            total += float(hj * circle_dist(shuffle.phi(hj, 0.0), shuffle.phi(hj, min(x / hj, 1.0))))
    return total


# ---------------------------------------------------------------------------
# matrices


@dataclass
class DistanceMatrix:
    sample_times: np.ndarray
    entries: np.ndarray

    def __post_init__(self):
        self.sample_times = np.asarray(self.sample_times, dtype=float)
        self.entries = np.asarray(self.entries, dtype=float)

    def __len__(self):
        return len(self.sample_times)

    def max(self) -> float:
        return float(self.entries.max()) if self.entries.size else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([repr(float(x)) for x in self.sample_times])
        for row in self.entries:
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DistanceMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        times = [float(x) for x in rows[0]]
        return cls(np.array(times), np.array([[float(x) for x in r] for r in rows[1:]]))


def _inf_matrix(f: Excursion, times: np.ndarray) -> np.ndarray:
    n = len(times)
    iu, ju = np.triu_indices(n)
    vals = f.inf(times[iu], times[ju])
    M = np.empty((n, n))
    M[iu, ju] = vals
    M[ju, iu] = vals
    return M


def matrix(f: Excursion, kind="loop", sample_times=None) -> DistanceMatrix:
    """Full symmetric matrix of a pseudo-distance on ascending sample times."""
    kind = _as_kind(kind)
    if sample_times is None or len(sample_times) == 0:
        raise ValueError("sample_times must be non-empty")
    times = np.asarray(sample_times, dtype=float)
    n = len(times)
    _, h, _ = f.jump_arrays()
    out = np.zeros((n, n))
    half = np.zeros((n, n))
    if kind.name in ("classic", "tree", "vern", "vern-shuffled"):
        F = f.value(times)
        out += F[:, None] + F[None, :] - 2 * _inf_matrix(f, times)
    if kind.name != "classic" and len(h):
        X = f.x_profile(times)
        tree_part = kind.name in ("tree", "vern", "vern-shuffled")
        coef = 1.0 if kind.name.startswith("loop") else kind.coefficient
        shuffled = kind.name.endswith("shuffled")
        P = _shuffled_positions(f, X, kind.shuffle) if shuffled else None
        for j, d in enumerate(h):
            xj = X[j]
            # only descendants of the jump have x > 0; other pairs get nothing
            S = np.nonzero(xj > 0)[0]
            if len(S) == 0:
                continue
            block = np.zeros((len(S), n))
            if tree_part:
                block -= np.abs(xj[S][:, None] - xj[None, :])
            if kind.name != "tree":
                if shuffled:
                    block += coef * d * circle_dist(P[j][S][:, None], P[j][None, :])
                else:
                    block += coef * loop_dist(xj[S][:, None], xj[None, :], d)
            # rows of S only; pairs inside S are split between (p, q) and (q, p)
            block[:, S] *= 0.5
            half[S, :] += block
    out = (out + out.T) / 2 + half + half.T
    np.fill_diagonal(out, 0.0)
    same = times[:, None] == times[None, :]
    out[same] = 0.0
    return DistanceMatrix(times, out)


def default_samples(f: Excursion, n: int = 256, anchors: int = 8) -> np.ndarray:
    """Equispaced grid, breakpoints and jump times, plus anchors around every loop."""
    from .excursion import hitting_time

    parts = [np.linspace(0.0, 1.0, n), f.t]
    r, h, lr = f.jump_arrays()
    extra = []
    for rj, hj, lj in zip(r, h, lr):
        for k in range(1, anchors):
            extra.append(hitting_time(f, float(rj), float(lj + hj * k / anchors)))
    parts.append(np.asarray(extra, dtype=float))
    times = np.unique(np.concatenate(parts))
    return times
