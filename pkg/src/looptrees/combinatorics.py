"""Plane trees, their exploration processes, and discrete looptree graphs."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

import networkx as nx
import numpy as np

from .excursion import Excursion, _build


class TreeError(ValueError):
    """Raised for child-count sequences that do not code a plane tree."""


@dataclass(frozen=True)
class PlaneTree:
    """Plane tree given by its child counts in depth-first order."""

    child_counts: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.child_counts)

    @cached_property
    def children(self) -> list[list[int]]:
        """Depth-first indices of the children of every vertex, in order."""
        kids: list[list[int]] = [[] for _ in self.child_counts]
        stack: list[int] = []
        for i, k in enumerate(self.child_counts):
            if stack:
                parent = stack[-1]
                kids[parent].append(i)
                if len(kids[parent]) == self.child_counts[parent]:
                    stack.pop()
            if k > 0:
                stack.append(i)
        return kids

    @cached_property
    def parent(self) -> list[int]:
        par = [-1] * len(self)
        for u, ks in enumerate(self.children):
            for v in ks:
                par[v] = u
        return par

    @cached_property
    def depth(self) -> list[int]:
        d = [0] * len(self)
        for u in range(1, len(self)):
            d[u] = d[self.parent[u]] + 1
        return d

    def label(self, u: int) -> tuple[int, ...]:
        """Ulam-Harris word of a vertex (children numbered from 1)."""
        word = []
        while self.parent[u] >= 0:
            p = self.parent[u]
            word.append(self.children[p].index(u) + 1)
            u = p
        return tuple(reversed(word))

    @cached_property
    def contour(self) -> list[int]:
        """Vertices visited by the contour exploration, 2#τ − 1 entries."""
        out = [0]
        stack = [(0, 0)]
        while stack:
            u, j = stack.pop()
            if j < len(self.children[u]):
                stack.append((u, j + 1))
                v = self.children[u][j]
                out.append(v)
                stack.append((v, 0))
            elif self.parent[u] >= 0:
                out.append(self.parent[u])
        return out

    @cached_property
    def first_visit(self) -> list[int]:
        """Contour index at which each vertex is first visited."""
        first = [-1] * len(self)
        for i, u in enumerate(self.contour):
            if first[u] < 0:
                first[u] = i
        return first

    def is_ancestor(self, u: int, v: int) -> bool:
        while v >= 0:
            if v == u:
                return True
            v = self.parent[v]
        return False


def lukasiewicz(child_counts: Sequence[int]) -> np.ndarray:
    k = np.asarray(child_counts, dtype=np.int64)
    return np.concatenate([[0], np.cumsum(k - 1)])


def parse_tree(child_counts: Sequence[int]) -> PlaneTree:
    """Validate a depth-first child-count sequence via its Lukasiewicz walk."""
    counts = [int(k) for k in child_counts]
    if not counts:
        raise TreeError("empty child-count sequence")
    if any(k < 0 for k in counts):
        raise TreeError("child counts must be non-negative")
    L = lukasiewicz(counts)
    if L[-1] != -1 or np.any(L[1:-1] < 0):
        raise TreeError("Lukasiewicz walk must stay >= 0 and end at -1")
    return PlaneTree(tuple(counts))


def read_tree(text: str) -> PlaneTree:
    """Parse one integer per line, or comma/space separated integers."""
    tokens = text.replace(",", " ").split()
    return parse_tree([int(x) for x in tokens])


@dataclass
class Processes:
    H: np.ndarray
    C: np.ndarray
    L: np.ndarray
    xi: np.ndarray


def processes(tree: PlaneTree) -> Processes:
    """Height, contour, Lukasiewicz processes and ξ (largest explored index)."""
    H = np.asarray(tree.depth, dtype=np.int64)
    C = H[np.asarray(tree.contour)]
    L = lukasiewicz(tree.child_counts)
    xi = np.maximum.accumulate(np.asarray(tree.contour, dtype=np.int64))
    return Processes(H, C, L, xi)


def w_values(tree: PlaneTree) -> np.ndarray:
    """W_0, ..., W_{2#τ−1} at integer times."""
    k = tree.child_counts
    c = tree.contour
    depth = tree.depth
    N = 2 * len(tree) - 1
    W = np.zeros(N + 1, dtype=np.int64)
    W[0] = k[0] + 1
    for i in range(1, N):
        if depth[c[i]] == depth[c[i - 1]] + 1:
            W[i] = W[i - 1] + k[c[i]]
        else:
            W[i] = W[i - 1] - 1
    W[N] = 0
    return W


def w_process(tree: PlaneTree) -> Excursion:
    """
    The excursion t ↦ W_{(2#τ−1)t}: slope −1 per unit of contour time, with a
    jump of height k_u + 1 when the contour first reaches u.
    """
    W = w_values(tree)
    N = len(W) - 1
    times = np.arange(N + 1) / N
    left = np.concatenate([[0], W[:-1] - 1]).astype(float)
    right = W.astype(float)
    return _build(times, left, right, tol=0.0)


def vertex_times(tree: PlaneTree) -> np.ndarray:
    """First-visit times r(u) in [0, 1) of the vertices, in depth-first order."""
    return np.asarray(tree.first_visit, dtype=float) / (2 * len(tree) - 1)


# ---------------------------------------------------------------------------
# discrete looptrees


@dataclass
class LoopGraph:
    tree: PlaneTree
    edges: list[tuple[int, int]]
    graph: nx.MultiGraph = field(repr=False)


def loop_graph(tree: PlaneTree) -> LoopGraph:
    """
    Multigraph on the vertices with edges between consecutive siblings,
    from each vertex to its first and to its last child, and a self-loop at
    every leaf.
    """
    edges = []
    for u, kids in enumerate(tree.children):
        for a, b in zip(kids, kids[1:]):
            edges.append((a, b))
        if kids:
            edges.append((u, kids[0]))
            edges.append((u, kids[-1]))
        else:
            edges.append((u, u))
    G = nx.MultiGraph()
    G.add_nodes_from(range(len(tree)))
    G.add_edges_from(edges)
    return LoopGraph(tree, edges, G)


def bfs_distance(G: LoopGraph | nx.Graph, u: int, v: int) -> int:
    g = G.graph if isinstance(G, LoopGraph) else G
    return int(nx.shortest_path_length(g, u, v))


def bfs_matrix(G: LoopGraph | nx.Graph) -> np.ndarray:
    g = G.graph if isinstance(G, LoopGraph) else G
    n = g.number_of_nodes()
    D = np.zeros((n, n), dtype=np.int64)
    for u, lengths in nx.all_pairs_shortest_path_length(g):
        for v, d in lengths.items():
            D[u, v] = d
    return D


def nearest_vertex(tree: PlaneTree, times) -> np.ndarray:
    """
    For each time, the vertex closest to the point it codes in the looptree of
    w(τ) (ties go to the smaller depth-first index).  Every point lies on a
    unit edge, so the distance is at most 1/2.
    """
    from .metrics import matrix

    times = np.asarray(times, dtype=float)
    r = vertex_times(tree)
    grid = np.unique(np.concatenate([times, r]))
    D = matrix(w_process(tree), "loop", grid).entries
    cols = np.searchsorted(grid, r)
    rows = np.searchsorted(grid, times)
    return np.argmin(D[np.ix_(rows, cols)], axis=1)


def loop_space(tree: PlaneTree, sample_times=None):
    """
    Loop(τ) as a FiniteSpace: graph distance, uniform weights, rooted at ∅.

    Sample labels let the space be compared with sampled quotients of w(τ):
    by default the first-visit times plus time 1 (which codes the root);
    otherwise each given time is labelled by :func:`nearest_vertex`.
    """
    from .space import FiniteSpace

    D = bfs_matrix(loop_graph(tree)).astype(float)
    n = len(tree)
    r = vertex_times(tree)
    if sample_times is None:
        order = np.argsort(r)
        st = np.concatenate([r[order], [1.0]])
        lab = np.concatenate([order, [0]])
    else:
        st = np.unique(np.asarray(sample_times, dtype=float))
        lab = nearest_vertex(tree, st)
    return FiniteSpace(r, D, 0, np.full(n, 1.0 / n), st, lab)


def is_cactus(G: LoopGraph | nx.Graph) -> bool:
    """
    True iff every edge lies on at most one simple cycle.

    Each edge is subdivided (self-loops become triangles), which turns the
    multigraph into a simple graph with the same cycle structure; then every
    biconnected block must be a single edge or a cycle.
    """
    g = G.graph if isinstance(G, LoopGraph) else G
    if g.number_of_nodes() == 0 or not nx.is_connected(nx.Graph(g)):
        raise ValueError("is_cactus needs a connected graph")
    S = nx.Graph()
    S.add_nodes_from(("v", u) for u in g.nodes)
    items = g.edges(keys=True) if g.is_multigraph() else ((u, v, 0) for u, v in g.edges)
    for u, v, key in items:
        if u == v:
            a, b = ("e", u, v, key, 0), ("e", u, v, key, 1)
            S.add_edges_from([(("v", u), a), (a, b), (b, ("v", u))])
        else:
            m = ("e", u, v, key)
            S.add_edges_from([(("v", u), m), (m, ("v", v))])
    for block in nx.biconnected_component_edges(S):
        block = list(block)
        nodes = {x for e in block for x in e}
        if len(block) > 1 and len(block) != len(nodes):
            return False
    return True


# ---------------------------------------------------------------------------
# relabelling


PermutationFamily = Callable[[int], Mapping[int, int]]


def identity_family(k: int) -> dict[int, int]:
    return {j: j for j in range(1, k + 1)}


def permute_tree(tree: PlaneTree, family: PermutationFamily) -> PlaneTree:
    """Relabel children: the j-th child of u becomes child ψ_{k_u}(j) of u."""
    out = []
    stack = [0]
    while stack:
        u = stack.pop()
        kids = tree.children[u]
        out.append(len(kids))
        if not kids:
            continue
        perm = family(len(kids))
        new = [None] * len(kids)
        for j, v in enumerate(kids, start=1):
            new[perm[j] - 1] = v
        if any(v is None for v in new):
            raise ValueError("family did not provide a permutation")
        stack.extend(reversed(new))
    return parse_tree(out)
