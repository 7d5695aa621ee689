"""Shuffles: families of circle-valued maps repositioning gluing points on loops.

Circle positions live in [0, 1) with 0 and 1 identified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TRUNCATION = 1e-12


def circle_dist(a, b):
    """Distance on the circle of perimeter 1."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    if d.size and d.max() >= 1.0:
        d = d % 1.0
    return np.minimum(d, 1.0 - d)


def loop_dist(a, b, length):
    """``min(|a-b|, length-|a-b|)`` for positions on a loop of the given length."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return np.minimum(d, length - d)


def _geometric_phi(base: float, x, flips=None):
    """
    The piecewise map on the geometric intervals (base^{k+1}, base^k].

    The upper half of each interval is sent to ``x - base^k/2`` and the lower
    half to ``1 - x + base^{k+1}/2``.  ``flips`` is an optional set of interval
    indices k whose image is reflected (``y -> 1 - y``).
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    if not pos.any():
        return out
    xp = x[pos]
    lb = math.log(base)
    k = np.maximum(np.floor(np.log(xp) / lb).astype(np.int64), 0)
    # one formula for every interval endpoint keeps adjacent intervals flush
    hi = np.exp(k * lb)
    lo = np.exp((k + 1) * lb)
    # repair floating error so that base^{k+1} < x <= base^k (rarely needed)
    bad = (hi < xp) & (k > 0)
    if bad.any():
        k[bad] -= 1
        lo[bad] = hi[bad]
        hi[bad] = np.exp(k[bad] * lb)
    bad = lo >= xp
    if bad.any():
        k[bad] += 1
        hi[bad] = lo[bad]
        lo[bad] = np.exp((k[bad] + 1) * lb)
    mid = (hi + lo) / 2
    upper = xp > mid
    y = np.where(upper, xp - hi / 2, 1.0 - xp + lo / 2)
    y = np.where(hi < TRUNCATION, 0.0, y)
    if flips:
        flip = np.isin(k, np.fromiter(flips, dtype=np.int64))
        y = np.where(flip, 1.0 - y, y)
    # y lies in (0, 1]; the circle identifies 1 with 0
    out[pos] = np.where(y >= 1.0, y - 1.0, y)
    return out


def default_phi(delta: float, x):
    """
    Default shuffle map: identity for ``delta >= 1``; for ``delta < 1`` the
    geometric construction with base ``1 - delta``.

    >>> float(default_phi(0.5, 1.0))
    0.5
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if delta >= 1:
        return _identity(x)
    return _geometric_phi(1.0 - delta, x)


def psi(k: int) -> dict[int, int]:
    """The sibling permutation ψ_k of {1, ..., k}."""
    if k <= 0:
        raise ValueError("k must be positive")
    out = {}
    for l in range(1, k + 1):
        d = k + 1 - l
        out[l] = (d + 1) // 2 if d % 2 == 1 else k + 1 - d // 2
    return out


@dataclass(frozen=True)
class SiblingMap:
    """Circle map matched with ψ_k, built on intervals of ratio ``alpha``."""

    k: int
    alpha: float
    flips: frozenset = field(default_factory=frozenset)

    def __call__(self, x):
        return _geometric_phi(self.alpha, x, self.flips)

    @property
    def permutation(self) -> dict[int, int]:
        return psi(self.k)


def sibling_alpha(k: int, a: float) -> float:
    """Smallest admissible ratio: ``max(1-α, 1/α-1) <= min((k+1)/a, 1/(k+1))``."""
    c = min((k + 1) / a, 1.0 / (k + 1))
    return 1.0 / (1.0 + c)


def sibling_phi(k: int, a: float, alpha: float | None = None) -> SiblingMap:
    """Return the circle map for jump height ``(k+1)/a`` together with ψ_k."""
    if k <= 0:
        raise ValueError("k must be positive")
    if a <= 0:
        raise ValueError("a must be positive")
    if alpha is None:
        alpha = sibling_alpha(k, a)
    if not (0.5 < alpha < 1):
        raise ValueError("alpha must lie in (1/2, 1)")
    lb = math.log(alpha)
    flips = set()
    for j in range(1, k + 1):
        x = j / (k + 1)
        m = int(math.floor(math.log(x) / lb))
        if alpha ** m < x:
            m -= 1
        if alpha ** (m + 1) >= x:
            m += 1
        upper = x > alpha ** m * (1 + alpha) / 2
        # odd j must sit in the upper half I_{2m}, even j in the lower half
        if (j % 2 == 1) == upper:
            flips.add(m)
    return SiblingMap(k, alpha, frozenset(flips))


@dataclass(frozen=True)
class Shuffle:
    """
    A shuffle family Δ ↦ φ_Δ.

    kind is ``"default"``, ``"identity_above"`` (parameter ε) or
    ``"sibling"`` (parameters k, a; used for Δ = (k+1)/a, identity elsewhere).
    """

    kind: str = "default"
    eps: float = 0.0
    k: int = 0
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in ("default", "identity_above", "sibling"):
            raise ValueError(f"unknown shuffle kind {self.kind!r}")
        if self.kind == "identity_above" and self.eps <= 0:
            raise ValueError("identity_above needs eps > 0")
        if self.kind == "sibling" and (self.k <= 0 or self.a <= 0):
            raise ValueError("sibling needs k >= 1 and a > 0")

    def phi(self, delta: float, x):
        if delta <= 0:
            raise ValueError("delta must be positive")
        x = np.asarray(x, dtype=float)
        if self.kind == "default":
            return default_phi(delta, x)
        if self.kind == "identity_above":
            return _identity(x) if delta >= self.eps else default_phi(delta, x)
        if math.isclose(delta, (self.k + 1) / self.a, rel_tol=1e-12):
            return sibling_phi(self.k, self.a)(x)
        return _identity(x)

    @classmethod
    def parse(cls, text: str) -> "Shuffle":
        """Parse ``default``, ``identity-eps:<ε>`` or ``sibling:<k>,<a>``."""
        if text == "default":
            return cls()
        if text.startswith("identity-eps:"):
            return cls("identity_above", eps=float(text.split(":", 1)[1]))
        if text.startswith("sibling:"):
            k, a = text.split(":", 1)[1].split(",")
            return cls("sibling", k=int(k), a=float(a))
        raise ValueError(f"cannot parse shuffle {text!r}")


def _identity(x):
    # position 1 is the same circle point as 0
    return np.asarray(x, dtype=float) % 1.0


def delta_tilde(shuffle: Shuffle, delta: float, a, b):
    """Shuffled loop distance ``Δ·δ(φ_Δ(a/Δ), φ_Δ(b/Δ))``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0) or np.any(a > delta) or np.any(b > delta):
        raise ValueError("arguments must lie in [0, delta]")
    return delta * circle_dist(shuffle.phi(delta, a / delta), shuffle.phi(delta, b / delta))


@dataclass
class ShuffleReport:
    deltas: list[float]
    deviations: list[float]
    K: float

    def to_dict(self) -> dict:
        return {"deltas": self.deltas, "sup_deviation": self.deviations, "K": self.K}


def check_shuffle(shuffle: Shuffle, delta_grid, x_grid) -> ShuffleReport:
    """Grid estimate of ``sup_x |2δ(φ(0), φ(x))/x − 1|`` per Δ, and of K."""
    x = np.asarray(x_grid, dtype=float)
    x = x[x > 0]
    if len(x) == 0 or len(delta_grid) == 0:
        raise ValueError("grids must be non-empty")
    devs, K = [], 0.0
    for d in delta_grid:
        p0 = shuffle.phi(d, np.zeros(1))
        px = shuffle.phi(d, x)
        ratio = circle_dist(p0, px) / x
        devs.append(float(np.max(np.abs(2 * ratio - 1))))
        K = max(K, float(np.max(ratio)))
    return ShuffleReport([float(d) for d in delta_grid], devs, K)


def default_x_grid(n: int = 200_000) -> np.ndarray:
    """Log-spaced grid in (0, 1] refined near the interval endpoints."""
    return np.unique(np.concatenate([np.geomspace(1e-9, 1.0, n), np.linspace(1e-6, 1.0, n)]))
