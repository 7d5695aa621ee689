"""Seeded generators: conditioned Galton-Watson trees, random mappings, walk excursions."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import zeta

from .combinatorics import PlaneTree, parse_tree
from .excursion import Excursion, _build, make_excursion

STABLE_CAP = 10**6


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for a (seed, stream) pair."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(stream),))))


# ---------------------------------------------------------------------------
# offspring laws


@dataclass(frozen=True)
class OffspringLaw:
    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind == "geometric":
            if self.param is None or not (0 < self.param < 1):
                raise ValueError("geometric law needs 0 < p < 1")
        elif self.kind == "stable":
            if self.param is None or not (1 < self.param <= 2):
                raise ValueError("stable tail law needs 1 < alpha <= 2")
        elif self.kind == "binary":
            pass
        else:
            raise ValueError(f"unknown offspring law {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "OffspringLaw":
        name, _, arg = text.partition(":")
        name = {"stable_tail": "stable", "uniform_binary": "binary", "geom": "geometric"}.get(name, name)
        return cls(name, float(arg) if arg else None)

    def pmf(self, kmax: int) -> np.ndarray:
        """Probabilities of 0..kmax (untruncated, for inspection)."""
        k = np.arange(kmax + 1)
        if self.kind == "geometric":
            return self.param * (1 - self.param) ** k
        if self.kind == "binary":
            return np.where(k == 0, 0.5, 0.0) + np.where(k == 2, 0.5, 0.0)
        cdf = _stable_cdf(self.param)
        return np.diff(np.concatenate([[0.0], cdf[: kmax + 1]]))


@lru_cache(maxsize=8)
def _stable_cdf(alpha: float) -> np.ndarray:
    """
    Critical law with p_k ∝ (k+1)^(-1-alpha) for k >= 1 on 1..cap, the mass
    beyond the cap lumped at the cap, and p_0 chosen to make the mean 1.
    """
    k = np.arange(1, STABLE_CAP + 1, dtype=float)
    w = (k + 1) ** (-1 - alpha)
    tail = float(zeta(1 + alpha, STABLE_CAP + 2))
    w[-1] += tail
    s1 = w.sum()
    m1 = (k * w).sum()
    p = np.concatenate([[1 - s1 / m1], w / m1])
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return cdf


def _rotate(increments: np.ndarray) -> np.ndarray:
    """Cycle lemma: the unique rotation of a sum −1 sequence that first hits −1 at the end."""
    S = np.cumsum(increments)
    i = int(np.argmin(S))
    return np.roll(increments, -(i + 1))


def _counts_with_sum(n: int, law: OffspringLaw, rng: np.random.Generator) -> np.ndarray:
    total = n - 1
    if law.kind == "geometric":
        # iid geometric counts conditioned on their sum are uniform over weak
        # compositions, whatever p is: stars and bars
        bars = np.sort(rng.choice(2 * n - 2, size=n - 1, replace=False))
        edges = np.concatenate([[-1], bars, [2 * n - 2]])
        return np.diff(edges) - 1
    if law.kind == "binary":
        if n % 2 == 0:
            raise ValueError("binary trees have an odd number of vertices")
        k = np.zeros(n, dtype=np.int64)
        k[rng.choice(n, size=total // 2, replace=False)] = 2
        return k
    cdf = _stable_cdf(law.param)
    batch = max(1, 200_000 // n)
    while True:
        K = np.searchsorted(cdf, rng.random((batch, n)), side="right")
        ok = np.nonzero(K.sum(axis=1) == total)[0]
        if len(ok):
            return K[ok[0]]


def random_plane_tree(n: int, law: OffspringLaw | str = "geometric:0.5", seed: int = 0) -> PlaneTree:
    """Galton-Watson tree conditioned to have n vertices."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(law, str):
        law = OffspringLaw.parse(law)
    if n == 1:
        return parse_tree([0])
    rng = make_rng(seed)
    k = _counts_with_sum(n, law, rng)
    return parse_tree(_rotate(k - 1) + 1)


# ---------------------------------------------------------------------------
# mappings


@dataclass
class Mapping:
    """
    A map [n] → [n] (1-indexed images) with its cycle/basin decomposition.

    ``sample`` plays the role of the auxiliary uniform sample ordering the
    basins; ``child_order`` maps each vertex to the order of its non-cyclic
    preimages.  Both fix every choice in the decomposition.
    """

    images: tuple[int, ...]
    sample: tuple[int, ...]
    child_order: dict[int, tuple[int, ...]] = field(repr=False)
    cyclic: frozenset[int] = field(init=False)
    cycles: list[tuple[int, ...]] = field(init=False)
    basins: list[tuple[int, ...]] = field(init=False)
    roots: list[int] = field(init=False)
    components: dict[int, tuple[PlaneTree, tuple[int, ...]]] = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.images)
        if n == 0 or any(not (1 <= x <= n) for x in self.images):
            raise ValueError("images must lie in [1, n]")
        self.cyclic = frozenset(_cyclic_points(self.images))
        self._decompose()

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def _decompose(self):
        n = self.n
        m = self.images
        comp_root = _component_roots(m, self.cyclic)
        cycle_of: dict[int, tuple[int, ...]] = {}
        for g in sorted(self.cyclic):
            if g in cycle_of:
                continue
            cyc = [g]
            j = m[g - 1]
            while j != g:
                cyc.append(j)
                j = m[j - 1]
            for c in cyc:
                cycle_of[c] = tuple(cyc)
        # basin order: first appearance in the sample
        seen: list[frozenset] = []
        roots = []
        for x in self.sample:
            key = frozenset(cycle_of[comp_root[x]])
            if key not in seen:
                seen.append(key)
                roots.append(comp_root[x])
        if len(roots) < len({frozenset(c) for c in cycle_of.values()}):
            raise ValueError("sample does not meet every basin")
        self.roots = roots
        self.cycles = []
        for g in roots:
            # m(g) <= m^2(g) <= ... <= g
            cyc = []
            j = m[g - 1]
            while True:
                cyc.append(j)
                if j == g:
                    break
                j = m[j - 1]
            self.cycles.append(tuple(cyc))
        self.basins = [tuple(sorted(i for i in range(1, n + 1) if comp_root[i] in c)) for c in self.cycles]
        self.components = {}
        for g in self.cyclic:
            counts, labels = [], []
            stack = [g]
            while stack:
                v = stack.pop()
                kids = self.child_order.get(v, ())
                counts.append(len(kids))
                labels.append(v)
                stack.extend(reversed(kids))
            self.components[g] = (parse_tree(counts), tuple(labels))

    @property
    def order(self) -> list[int]:
        """Cyclic points γ(1), γ(2), ... in increasing order."""
        return [g for c in self.cycles for g in c]

    @classmethod
    def forced(cls, images, sample=None, child_order=None) -> "Mapping":
        """Deterministic constructor: default sample 1..n and increasing child order."""
        images = tuple(int(x) for x in images)
        n = len(images)
        if sample is None:
            sample = tuple(range(1, n + 1))
        else:
            # complete a partial sample so every basin is met
            sample = tuple(int(x) for x in sample) + tuple(range(1, n + 1))
        if child_order is None:
            cyc = _cyclic_points(images)
            child_order = {}
            for i in range(1, n + 1):
                if i not in cyc:
                    child_order.setdefault(images[i - 1], []).append(i)
            child_order = {k: tuple(v) for k, v in child_order.items()}
        return cls(images, sample, child_order)


def _component_roots(images, cyclic) -> list[int]:
    """Cyclic root of the tree component of every vertex (index 0 unused)."""
    n = len(images)
    root = [0] * (n + 1)
    for i in range(1, n + 1):
        path = []
        j = i
        while j not in cyclic and root[j] == 0:
            path.append(j)
            j = images[j - 1]
        r = j if j in cyclic else root[j]
        for p in path:
            root[p] = r
        if i in cyclic:
            root[i] = i
    return root


def _cyclic_points(images) -> set[int]:
    n = len(images)
    state = [0] * (n + 1)  # 0 unseen, 1 on current path, 2 done
    cyclic = set()
    for i in range(1, n + 1):
        path = []
        j = i
        while state[j] == 0:
            state[j] = 1
            path.append(j)
            j = images[j - 1]
        if state[j] == 1:
            k = path.index(j)
            cyclic.update(path[k:])
        for p in path:
            state[p] = 2
    return cyclic


def random_mapping(n: int, seed: int = 0) -> Mapping:
    """Uniform mapping on [n]; the ordering randomness uses a separate stream."""
    if n < 1:
        raise ValueError("n must be >= 1")
    images = tuple(int(x) for x in make_rng(seed, 0).integers(1, n + 1, size=n))
    rng = make_rng(seed, 1)
    cyc = _cyclic_points(images)
    roots = _component_roots(images, cyc)
    # label each cyclic point by the smallest point of its cycle
    cycle_min = {}
    for g in sorted(cyc):
        if g not in cycle_min:
            j = g
            while True:
                cycle_min[j] = g
                j = images[j - 1]
                if j == g:
                    break
    basin = [0] + [cycle_min[roots[i]] for i in range(1, n + 1)]
    wanted = set(cycle_min.values())
    sample: list[int] = []
    met: set[int] = set()
    while met != wanted:
        for x in rng.integers(1, n + 1, size=n):
            x = int(x)
            sample.append(x)
            met.add(basin[x])
            if met == wanted:
                break
    sample = tuple(sample)
    pre: dict[int, list[int]] = {}
    for i in range(1, n + 1):
        if i not in cyc:
            pre.setdefault(images[i - 1], []).append(i)
    child_order = {v: tuple(int(x) for x in rng.permutation(kids)) for v, kids in sorted(pre.items())}
    return Mapping(images, sample, child_order)


@dataclass
class MappingProcesses:
    H: np.ndarray
    C: np.ndarray
    ell_prime: np.ndarray
    Z: np.ndarray
    excursions: list[Excursion]


def mapping_processes(M: Mapping) -> MappingProcesses:
    """Height and contour processes, ℓ′, basin marks Z_j and the excursions f_j."""
    H, C = [], []
    for g in M.order:
        tree, _ = M.components[g]
        H.extend(tree.depth)
        C.extend(tree.depth[u] for u in tree.contour)
        C.append(0)
    H.append(0)
    C.append(0)
    H = np.asarray(H, dtype=np.int64)
    C = np.asarray(C, dtype=np.int64)
    double = (C[1:] == 0) & (C[:-1] == 0)
    ell = np.concatenate([[0.0], np.cumsum(double) / 2])
    Z = np.cumsum([len(b) for b in M.basins])
    starts = np.concatenate([[0], Z[:-1]])
    exc = []
    for z0, z1 in zip(starts, Z):
        idx = np.arange(2 * z0, 2 * z1 + 1)
        vals = C[idx] + 0.5 * (ell[2 * z1] - ell[idx])
        times = (idx - 2 * z0) / (2 * (z1 - z0))
        left = vals.copy()
        left[0] = 0.0
        exc.append(_build(times, left, vals))
    return MappingProcesses(H, C, ell, Z, exc)


# ---------------------------------------------------------------------------
# walk excursions


def _dyck(n: int, rng) -> np.ndarray:
    half = n // 2
    steps = np.concatenate([np.ones(half, dtype=np.int64), -np.ones(half + 1, dtype=np.int64)])
    rng.shuffle(steps)
    return _rotate(steps)[:-1]


def walk_excursion(n: int, step_law: str | OffspringLaw = "pm1", seed: int = 0) -> Excursion:
    """
    Rescaled walk excursion of length n.

    ``pm1`` gives a uniform Dyck path scaled by n^(-1/2) (n even); an offspring
    law gives the Lukasiewicz-type path of a conditioned tree, jumping by the
    child count at each step and decreasing with slope −1 in between, scaled
    by n^(-1/alpha) (alpha = 2 for non-stable laws).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(step_law, str) and step_law == "pm1":
        if n % 2:
            raise ValueError("pm1 excursions need even n")
        path = np.concatenate([[0], np.cumsum(_dyck(n, make_rng(seed)))])
        return make_excursion([(i / n, v, v) for i, v in enumerate(path / np.sqrt(n))])
    law = OffspringLaw.parse(step_law) if isinstance(step_law, str) else step_law
    alpha = law.param if law.kind == "stable" else 2.0
    tree = random_plane_tree(n, law, seed)
    k = np.asarray(tree.child_counts, dtype=float)
    L = np.concatenate([[0.0], np.cumsum(k - 1)])
    times = np.arange(n + 1) / n
    left = np.concatenate([[0.0], L[1:] + 1])
    right = np.concatenate([L[:-1] + 1 + k, [0.0]])
    return _build(times, left / n ** (1 / alpha), right / n ** (1 / alpha))


__all__ = [
    "OffspringLaw",
    "make_rng",
    "random_plane_tree",
    "Mapping",
    "random_mapping",
    "MappingProcesses",
    "mapping_processes",
    "walk_excursion",
]
