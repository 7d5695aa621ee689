"""Piecewise-linear excursions with finitely many non-negative jumps.

An excursion is stored as a list of breakpoints ``(t, left, right)`` where
``left = f(t-)`` and ``right = f(t)``.  Between two consecutive breakpoints the
function is affine from ``(t_i, right_i)`` to ``(t_{i+1}, left_{i+1})``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ANCESTOR_TOL = 1e-9
# Snapping tolerance used when excursions are produced by arithmetic.
CLEAN_TOL = 1e-12


class ExcursionError(ValueError):
    """Raised when breakpoints do not describe a valid excursion."""


@dataclass(frozen=True)
class JumpRecord:
    time: float
    height: float


class SparseMin:
    """
    Sparse table answering vectorized minimum queries over index ranges.

    Complexity: O(N log N) to build, O(1) per query.
    """

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=float)
        n = len(data)
        levels = max(1, int(n).bit_length())
        table = np.full((levels, n), np.inf)
        table[0] = data
        for k in range(1, levels):
            span = 1 << (k - 1)
            width = n - (1 << k) + 1
            if width <= 0:
                break
            table[k, :width] = np.minimum(table[k - 1, :width], table[k - 1, span:span + width])
        self.table = table
        # exact floor(log2(length)) for every possible range length
        self._log = np.concatenate([[0], np.frexp(np.arange(1, n + 1))[1] - 1]).astype(np.int64)

    def query(self, lo, hi):
        """Minimum of ``data[lo..hi]`` (inclusive); ``inf`` for empty ranges."""
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        lo, hi = np.broadcast_arrays(lo, hi)
        empty = hi < lo
        lo_c = np.where(empty, 0, lo)
        hi_c = np.where(empty, 0, hi)
        k = self._log[hi_c - lo_c + 1]
        out = np.minimum(self.table[k, lo_c], self.table[k, hi_c - (1 << k) + 1])
        return np.where(empty, np.inf, out)


class Excursion:
    """Immutable piecewise-linear excursion on [0, 1]."""

    __slots__ = ("t", "left", "right", "_rmq")

    def __init__(self, t: np.ndarray, left: np.ndarray, right: np.ndarray):
        # No validation here; use make_excursion or _build.
        self.t = np.asarray(t, dtype=float)
        self.left = np.asarray(left, dtype=float)
        self.right = np.asarray(right, dtype=float)
        for arr in (self.t, self.left, self.right):
            arr.setflags(write=False)
        self._rmq = SparseMin(self.left)

    # -- basic accessors -------------------------------------------------
    @property
    def breakpoints(self) -> list[tuple[float, float, float]]:
        return [(float(a), float(b), float(c)) for a, b, c in zip(self.t, self.left, self.right)]

    def __len__(self) -> int:
        return len(self.t)

    def __repr__(self) -> str:
        return f"Excursion({self.breakpoints!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Excursion):
            return NotImplemented
        return (
            len(self) == len(other)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
        )

    def __hash__(self):
        return hash((self.t.tobytes(), self.left.tobytes(), self.right.tobytes()))

    def sup(self) -> float:
        return float(max(self.right.max(), self.left.max()))

    # -- evaluation ------------------------------------------------------
    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.t, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.t) - 1)
        at_bp = self.t[idx] == x
        return x, idx, at_bp

    def _interior(self, x, idx):
        nxt = np.minimum(idx + 1, len(self.t) - 1)
        dt = self.t[nxt] - self.t[idx]
        safe = np.where(dt > 0, dt, 1.0)
        frac = np.where(dt > 0, (x - self.t[idx]) / safe, 0.0)
        return self.right[idx] + (self.left[nxt] - self.right[idx]) * frac

    def value(self, x):
        """f(x), vectorized."""
        x, idx, at_bp = self._locate(x)
        return np.where(at_bp, self.right[idx], self._interior(x, idx))

    def left_limit(self, x):
        """f(x-), vectorized, with f(0-) = 0."""
        x, idx, at_bp = self._locate(x)
        return np.where(at_bp, self.left[idx], self._interior(x, idx))

    def jump(self, x):
        """Jump height f(x) - f(x-), vectorized."""
        x, idx, at_bp = self._locate(x)
        return np.where(at_bp, self.right[idx] - self.left[idx], 0.0)

    def probe(self, x):
        """Locate times once: (times, segment index, on-breakpoint mask, interpolated value)."""
        x, idx, at_bp = self._locate(x)
        return x, idx, at_bp, self._interior(x, idx)

    def inf(self, s, t, probes=None):
        """Infimum of f over [s, t] for arrays with s <= t."""
        s, si, sb, sv = probes[0] if probes else self.probe(s)
        t, ti, tb, tv = probes[1] if probes else self.probe(t)
        fs = np.where(sb, self.right[si], sv)
        ft = np.where(tb, self.left[ti], tv)
        # breakpoints strictly after s and at or before t
        lo = si + 1
        inner = self._rmq.query(lo, ti)
        out = np.minimum(np.minimum(fs, ft), inner)
        return np.where(s == t, fs, out)

    def jump_arrays(self):
        """Times, heights and left limits of the jumps, ascending."""
        h = self.right - self.left
        mask = h > 0
        return self.t[mask], h[mask], self.left[mask]

    def x_profile(self, times, jump_mask=None, probe=None):
        """Matrix ``X[j, i] = x_{r_j}^{times_i}`` over the jump times r_j."""
        r, h, lr = self.jump_arrays()
        if jump_mask is not None:
            r, h, lr = r[jump_mask], h[jump_mask], lr[jump_mask]
        times, tidx, at_bp, interior = probe if probe is not None else self.probe(times)
        if len(r) == 0:
            return np.zeros((0, len(times)))
        # f(t-) off breakpoints; at a breakpoint the left limit is already in the table
        ft = np.where(at_bp, np.inf, interior)
        out = np.empty((len(r), len(times)))
        step = max(1, 2_000_000 // len(self.t))
        for a in range(0, len(r), step):
            sl = slice(a, a + step)
            R = self._running_min(r[sl], h[sl], lr[sl])
            m = np.minimum(R[:, tidx], ft[None, :])
            out[sl] = np.clip(m - lr[sl, None], 0.0, h[sl, None])
        return out

    def _running_min(self, r, h, lr):
        """
        ``R[j, k]``: infimum of f over [r_j, t_k] (left limit at t_k included),
        or −inf when t_k lies before r_j.
        """
        k = np.arange(len(self.t))
        start = np.searchsorted(self.t, r)
        L = np.where(k[None, :] > start[:, None], self.left[None, :], np.inf)
        R = np.minimum(np.minimum.accumulate(L, axis=1), (lr + h)[:, None])
        R[k[None, :] < start[:, None]] = -np.inf
        return R

    def to_dict(self) -> dict:
        return {"breakpoints": [{"t": a, "left": b, "right": c} for a, b, c in self.breakpoints]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# ---------------------------------------------------------------------------
# construction


def _validate(t, left, right):
    if len(t) == 0:
        raise ExcursionError("breakpoint sequence is empty")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
        raise ExcursionError("non-finite breakpoint data")
    if t[0] != 0.0:
        raise ExcursionError("first breakpoint must be at t = 0")
    if t[-1] != 1.0:
        raise ExcursionError("last breakpoint must be at t = 1")
    if len(t) > 1 and np.any(np.diff(t) <= 0):
        raise ExcursionError("breakpoint times must be strictly increasing")
    if left[0] != 0.0:
        raise ExcursionError("f(0-) must be 0")
    if right[-1] != 0.0:
        raise ExcursionError("f(1) must be 0")
    if np.any(left < 0) or np.any(right < 0):
        raise ExcursionError("excursion values must be non-negative")
    if np.any(right < left):
        raise ExcursionError("jumps must be non-negative")


def _coalesce(t, left, right, tol, jump_tol=None):
    """Drop interior breakpoints that are neither jumps nor kinks."""
    jump_tol = tol if jump_tol is None else jump_tol
    keep = np.ones(len(t), dtype=bool)
    last = 0
    for i in range(1, len(t) - 1):
        if abs(right[i] - left[i]) > jump_tol:
            last = i
            continue
        nxt = i + 1
        # value predicted by the line from the last kept breakpoint
        slope = (left[nxt] - right[last]) / (t[nxt] - t[last])
        pred = right[last] + slope * (t[i] - t[last])
        if abs(pred - left[i]) <= tol:
            keep[i] = False
        else:
            last = i
    return t[keep], left[keep], right[keep]


def make_excursion(breakpoints: Iterable[Sequence[float]]) -> Excursion:
    """
    Validate breakpoints ``(t, f(t-), f(t))`` and return a canonical excursion.

    Validation is exact.  Interior breakpoints without a jump that lie on the
    line through their neighbours are removed.

    >>> make_excursion([(0, 0, 1), (1, 0, 0)]).jump(0.0)
    array(1.)
    """
    rows = [tuple(map(float, b)) for b in breakpoints]
    if not rows:
        raise ExcursionError("breakpoint sequence is empty")
    if any(len(r) != 3 for r in rows):
        raise ExcursionError("each breakpoint needs (t, left, right)")
    arr = np.array(rows, dtype=float)
    t, left, right = arr[:, 0], arr[:, 1], arr[:, 2]
    _validate(t, left, right)
    return Excursion(*_coalesce(t, left, right, CLEAN_TOL, jump_tol=0.0))


def _build(t, left, right, tol: float = CLEAN_TOL) -> Excursion:
    """Construct from arrays produced by arithmetic, snapping round-off."""
    t = np.asarray(t, dtype=float).copy()
    left = np.asarray(left, dtype=float).copy()
    right = np.asarray(right, dtype=float).copy()
    order = np.argsort(t, kind="stable")
    t, left, right = t[order], left[order], right[order]
    # merge near-duplicate times, keeping the first left and the last right
    keep = np.ones(len(t), dtype=bool)
    for i in range(1, len(t)):
        if t[i] - t[i - 1] <= 1e-13:
            j = i - 1
            while not keep[j]:
                j -= 1
            right[j] = right[i]
            keep[i] = False
    t, left, right = t[keep], left[keep], right[keep]
    t[0] = 0.0
    t[-1] = 1.0
    left[np.abs(left) <= tol] = 0.0
    right[np.abs(right) <= tol] = 0.0
    left[0] = 0.0
    right[-1] = 0.0
    close = np.abs(right - left) <= tol
    right[close] = left[close]
    _validate(t, left, right)
    return Excursion(*_coalesce(t, left, right, tol))


def zero_excursion() -> Excursion:
    return Excursion(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2))


def from_dict(data: dict) -> Excursion:
    try:
        rows = [(b["t"], b["left"], b["right"]) for b in data["breakpoints"]]
    except (KeyError, TypeError) as exc:
        raise ExcursionError(f"malformed excursion document: {exc}") from exc
    return make_excursion(rows)


def from_json(text: str) -> Excursion:
    return from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# queries


def _check_time(x):
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"time {x} outside [0, 1]")


def evaluate(f: Excursion, t: float) -> tuple[float, float, float]:
    """Return ``(f(t), f(t-), jump height)``."""
    _check_time(t)
    v = float(f.value(t))
    lv = float(f.left_limit(t))
    return v, lv, v - lv


def range_inf(f: Excursion, s: float, t: float) -> float:
    """Infimum of f over the closed interval [s, t]."""
    if s > t:
        raise ValueError("range_inf needs s <= t")
    _check_time(s)
    _check_time(t)
    return float(f.inf(s, t))


def is_ancestor(f: Excursion, s, t, tol: float = ANCESTOR_TOL):
    """Vectorized ancestor test ``s ⪯ t``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    ok = s <= t
    lo = np.where(ok, s, t)
    m = f.inf(lo, np.where(ok, t, s))
    return ok & (f.left_limit(s) <= m + tol)


def mrca(f: Excursion, s: float, t: float) -> float:
    """Most recent common ancestor ``s ∧ t``."""
    if s > t:
        s, t = t, s
    m = float(f.inf(s, t))
    if float(f.left_limit(s)) <= m:
        return float(s)
    # last breakpoint strictly before s whose left limit is below m
    J = int(np.searchsorted(f.t, s, side="left")) - 1
    cand = np.nonzero(f.left[: J + 1] <= m)[0]
    i = int(cand[-1]) if len(cand) else 0
    if f.right[i] <= m:
        upper = min(float(f.t[i + 1]), s)
        end_val = float(f.left_limit(upper))
        if end_val > f.right[i]:
            r = f.t[i] + (m - f.right[i]) * (upper - f.t[i]) / (end_val - f.right[i])
            return float(min(max(r, f.t[i]), upper))
        return upper
    return float(f.t[i])


def genealogy(f: Excursion, s: float, t: float, tol: float = ANCESTOR_TOL) -> tuple[bool, float]:
    """Return ``(s ⪯ t, s ∧ t)``."""
    _check_time(s)
    _check_time(t)
    return bool(is_ancestor(f, s, t, tol)), mrca(f, s, t)


def x_values(f: Excursion, s, t):
    """Vectorized ``x_s^t = 1{s<=t} max(inf_[s,t] f - f(s-), 0)``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    ok = s <= t
    m = f.inf(np.where(ok, s, t), np.where(ok, t, s))
    return np.where(ok, np.maximum(m - f.left_limit(s), 0.0), 0.0)


def x_value(f: Excursion, s: float, t: float) -> float:
    return float(x_values(f, s, t))


def jumps(f: Excursion) -> list[JumpRecord]:
    r, h, _ = f.jump_arrays()
    return [JumpRecord(float(a), float(b)) for a, b in zip(r, h)]


# ---------------------------------------------------------------------------
# transformations


def theta(f: Excursion) -> Excursion:
    """t ↦ 1{2t >= 1} f(2t - 1)."""
    t = np.concatenate([[0.0], 0.5 + f.t / 2])
    left = np.concatenate([[0.0], f.left])
    right = np.concatenate([[0.0], f.right])
    return _build(t, left, right)


def linear_combination(terms: Sequence[tuple[float, Excursion]]) -> Excursion:
    """Return Σ c_i f_i evaluated exactly on the union of breakpoints."""
    times = np.unique(np.concatenate([g.t for _, g in terms]))
    left = sum(c * g.left_limit(times) for c, g in terms)
    right = sum(c * g.value(times) for c, g in terms)
    return _build(times, left, right)


def scale(f: Excursion, c: float) -> Excursion:
    if c < 0:
        raise ValueError("scale factor must be non-negative")
    if c == 0:
        return zero_excursion()
    return Excursion(f.t.copy(), c * f.left, c * f.right)


class Warp:
    """Increasing piecewise-linear bijection of [0, 1] given by knots."""

    def __init__(self, knots: Sequence[tuple[float, float]]):
        k = np.asarray(sorted(knots), dtype=float)
        if k[0, 0] != 0 or k[0, 1] != 0 or k[-1, 0] != 1 or k[-1, 1] != 1:
            raise ValueError("warp must fix 0 and 1")
        if np.any(np.diff(k[:, 0]) <= 0) or np.any(np.diff(k[:, 1]) <= 0):
            raise ValueError("warp must be strictly increasing")
        self.x = k[:, 0]
        self.y = k[:, 1]

    def __call__(self, t):
        return np.interp(t, self.x, self.y)

    def inverse(self, t):
        return np.interp(t, self.y, self.x)

    def sup_shift(self) -> float:
        return float(np.max(np.abs(self.y - self.x)))


def compose_warp(f: Excursion, lam: Warp) -> Excursion:
    """The excursion ``f ∘ λ``."""
    times = np.unique(np.concatenate([lam.inverse(f.t), lam.x]))
    times = np.clip(times, 0.0, 1.0)
    img = np.clip(lam(times), 0.0, 1.0)
    # snap images back onto the breakpoints of f to keep jumps exact
    pos = np.searchsorted(f.t, img)
    for i, (p, v) in enumerate(zip(pos, img)):
        for q in (p - 1, p):
            if 0 <= q < len(f.t) and abs(f.t[q] - v) <= 1e-13:
                img[i] = f.t[q]
    return _build(times, f.left_limit(img), f.value(img))


def sup_distance(f: Excursion, g: Excursion) -> float:
    """Exact ‖f − g‖∞ for two piecewise-linear excursions."""
    times = np.unique(np.concatenate([f.t, g.t]))
    a = np.abs(f.value(times) - g.value(times))
    b = np.abs(f.left_limit(times) - g.left_limit(times))
    return float(max(a.max(), b.max()))


def hitting_time(f: Excursion, s: float, level: float) -> float:
    """First time t >= s at which f reaches ``level`` from above (``level <= f(s)``)."""
    if float(f.value(s)) <= level:
        return float(s)
    i = int(np.searchsorted(f.t, s, side="right")) - 1
    start_t, start_v = s, float(f.value(s))
    while i < len(f.t) - 1:
        end_t, end_v = float(f.t[i + 1]), float(f.left[i + 1])
        if end_v <= level:
            if start_v == end_v:
                return start_t
            if end_v == level:
                return end_t
            r = start_t + (start_v - level) * (end_t - start_t) / (start_v - end_v)
            return min(r, end_t)
        i += 1
        start_t, start_v = end_t, float(f.right[i])
        if start_v <= level:
            return start_t
    return 1.0


# ---------------------------------------------------------------------------
# Skorokhod upper bound


def _warp_cost(f: Excursion, g: Excursion, lam: Warp) -> float:
    return max(lam.sup_shift(), sup_distance(f, compose_warp(g, lam)))


def _align_jumps(a: np.ndarray, ha: np.ndarray, b: np.ndarray, hb: np.ndarray):
    """Monotone partial matching of jump lists minimizing unmatched height plus shift."""
    n, m = len(a), len(b)
    cost = np.full((n + 1, m + 1), np.inf)
    back = np.zeros((n + 1, m + 1), dtype=np.int8)
    cost[0, :] = np.concatenate([[0.0], np.cumsum(hb)])
    cost[:, 0] = np.concatenate([[0.0], np.cumsum(ha)])
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            opts = (
                cost[i - 1, j - 1] + abs(a[i - 1] - b[j - 1]) + abs(ha[i - 1] - hb[j - 1]),
                cost[i - 1, j] + ha[i - 1],
                cost[i, j - 1] + hb[j - 1],
            )
            k = int(np.argmin(opts))
            cost[i, j] = opts[k]
            back[i, j] = k
    pairs = []
    i, j = n, m
    while i > 0 and j > 0:
        k = back[i, j]
        if k == 0:
            pairs.append((a[i - 1], b[j - 1]))
            i, j = i - 1, j - 1
        elif k == 1:
            i -= 1
        else:
            j -= 1
    return pairs[::-1]


def skorokhod_upper(f: Excursion, g: Excursion, warp_grid: int = 16) -> float:
    """
    Upper bound on the Skorokhod distance between f and g.

    Candidates are the identity, the warp aligning matched jump times, and
    coordinate-descent refinements of its knots on a grid of the given size.
    """
    best = sup_distance(f, g)
    ra, ha, _ = f.jump_arrays()
    rb, hb, _ = g.jump_arrays()
    pairs = [(x, y) for x, y in _align_jumps(ra, ha, rb, hb) if 0 < x < 1 and 0 < y < 1]
    knots = {0.0: 0.0, 1.0: 1.0}
    for x, y in pairs:
        knots[float(x)] = float(y)
    # drop pairs breaking monotonicity
    xs = sorted(knots)
    clean = [(0.0, 0.0)]
    for x in xs[1:]:
        if knots[x] > clean[-1][1]:
            clean.append((x, knots[x]))
    if clean[-1] != (1.0, 1.0):
        clean = [c for c in clean if c[1] < 1.0] + [(1.0, 1.0)]
    try:
        lam = Warp(clean)
        best = min(best, _warp_cost(f, g, lam))
    except ValueError:
        lam = Warp([(0.0, 0.0), (1.0, 1.0)])
    if warp_grid and warp_grid > 1:
        cur = [tuple(k) for k in zip(lam.x, lam.y)]
        grid = np.linspace(0.0, 1.0, warp_grid + 1)[1:-1]
        extra = [(float(u), float(lam(u))) for u in grid if all(abs(u - k[0]) > 1e-12 for k in cur)]
        cur = sorted(cur + extra)
        cur_cost = _warp_cost(f, g, Warp(cur))
        step = 0.5 / warp_grid
        for _ in range(3):
            for idx in range(1, len(cur) - 1):
                for delta in (-step, step):
                    y = cur[idx][1] + delta
                    if not (cur[idx - 1][1] < y < cur[idx + 1][1]):
                        continue
                    trial = list(cur)
                    trial[idx] = (cur[idx][0], y)
                    c = _warp_cost(f, g, Warp(trial))
                    if c < cur_cost:
                        cur, cur_cost = trial, c
            step /= 2
        best = min(best, cur_cost)
    return float(best)
