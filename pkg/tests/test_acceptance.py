"""End-to-end acceptance checks, one test per criterion, each printing a verdict line."""
import bisect
import itertools
import time

import networkx as nx
import numpy as np
import pytest

from looptrees.calculus import j_eps, j_transform, regularize
from looptrees.combinatorics import bfs_matrix, is_cactus, loop_graph, processes, vertex_times, w_process, w_values
from looptrees.excursion import jumps, linear_combination, make_excursion, sup_distance, x_values
from looptrees.experiments import run_experiment, tree_ghp
from looptrees.gh import distortion, gh_exact_small, gh_lower, is_correspondence, parametrized_upper
from looptrees.metrics import KINDS, matrix, pairwise
from looptrees.randgen import mapping_processes, random_mapping, random_plane_tree
from looptrees.shuffle import Shuffle, check_shuffle, default_x_grid
from looptrees.space import FiniteSpace

from conftest import excursion_suite

GRID = np.linspace(0, 1, 64)
LAWS = ["stable:1.5", "geometric:0.5", "stable:1.2", "binary", "stable:1.8"]


def verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def suite():
    return excursion_suite(200)


@pytest.fixture(scope="module")
def trees():
    rng = np.random.default_rng(55)
    out = []
    for i in range(50):
        n = int(rng.integers(1, 201))
        law = LAWS[i % len(LAWS)]
        if law == "binary" and n % 2 == 0:
            n -= 1
        out.append(random_plane_tree(n, law, seed=1000 + i))
    return out


def _minus(f, g):
    return linear_combination([(1.0, f), (-1.0, g)])


def _triple_times(rng, f, size):
    """Uniform times mixed with breakpoint times, which carry the jumps."""
    u = rng.random(size)
    pick = rng.random(size) < 0.2
    u[pick] = rng.choice(f.t, size=int(pick.sum()))
    return u


def test_criterion_01_metric_axioms(capsys, suite):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    exact = True
    for f in suite:
        s, t, u = (_triple_times(rng, f, 10**4) for _ in range(3))
        for kind in KINDS:
            dst = pairwise(f, s, t, kind)
            dtu = pairwise(f, t, u, kind)
            dsu = pairwise(f, s, u, kind)
            exact &= bool(np.array_equal(dst, pairwise(f, t, s, kind)))
            exact &= bool(np.all(pairwise(f, t, t, kind) == 0))
            worst = max(worst, float(np.max(dsu - dst - dtu)))
    elapsed = time.perf_counter() - t0
    ok = exact and worst <= 1e-9 and elapsed < 30
    verdict(capsys, 1, ok, f"symmetric/zero-diagonal={exact} worst triangle excess={worst:.3g} time={elapsed:.1f}s")


def test_criterion_02_jump_calculus(capsys, suite):
    worst = {"JJ": 0.0, "J(f-Jf)": 0.0, "loop": 0.0, "tree": 0.0, "regularize": 0.0}
    for f in suite:
        jf = j_transform(f)
        cont = _minus(f, jf)
        worst["JJ"] = max(worst["JJ"], sup_distance(j_transform(jf), jf))
        worst["J(f-Jf)"] = max(worst["J(f-Jf)"], j_transform(cont).sup())
        gap = np.abs(matrix(f, "loop", GRID).entries - matrix(jf, "loop", GRID).entries).max()
        worst["loop"] = max(worst["loop"], float(gap))
        gap = np.abs(matrix(f, "tree", GRID).entries - matrix(cont, "classic", GRID).entries).max()
        worst["tree"] = max(worst["tree"], float(gap))
        for eps in (0.05, 0.2, 0.5):
            g = regularize(f, eps, check=False)
            worst["regularize"] = max(worst["regularize"], sup_distance(j_transform(g), j_eps(f, eps)))
    ok = all(v <= 1e-9 for v in worst.values())
    verdict(capsys, 2, ok, " ".join(f"{k}={v:.3g}" for k, v in worst.items()))


def test_criterion_03_eps_bound(capsys, suite):
    worst = -np.inf
    for f in suite:
        jf = j_transform(f)
        D = matrix(f, "loop", GRID).entries
        for eps in (0.05, 0.2, 0.5):
            je = j_eps(f, eps)
            gap = np.abs(D - matrix(je, "loop", GRID).entries).max()
            worst = max(worst, float(gap - 2 * sup_distance(jf, je)))
    verdict(capsys, 3, worst <= 1e-9, f"max(gap - 2*sup) = {worst:.3g}")


def test_criterion_04_chain_bouquet(capsys):
    t0 = time.perf_counter()
    rep = run_experiment("chain-bouquet", {"ns": [10, 20, 50, 100]})
    elapsed = time.perf_counter() - t0
    ups = [r["gh_upper_chain_segment"] for r in rep.rows]
    dgs = [r["bouquet_diam"] for r in rep.rows]
    ok = (
        ups[-1] <= 0.01
        and abs(dgs[-1] - 0.005) <= 1e-6
        and all(a > b for a, b in zip(ups, ups[1:]))
        and all(a > b for a, b in zip(dgs, dgs[1:]))
        and elapsed < 20
    )
    verdict(capsys, 4, ok, f"gh upper {ups} bouquet diam {dgs} time={elapsed:.1f}s")


def _subtree_sizes(tree):
    size = np.ones(len(tree), dtype=np.int64)
    for u in range(len(tree) - 1, 0, -1):
        size[tree.parent[u]] += size[u]
    return size


def _x_case_table(tree):
    """Expected x between vertex first-visit times, case by case."""
    n = len(tree)
    size = _subtree_sizes(tree)
    want = np.zeros((n, n), dtype=np.int64)
    for u in range(n):
        k = tree.child_counts[u]
        want[u, u] = k + 1
        for j, c in enumerate(tree.children[u], start=1):
            want[u, c:c + size[c]] = k + 1 - j
    return want


def test_criterion_05_discrete_looptree(capsys, trees):
    t0 = time.perf_counter()
    bfs_ok = w_ok = x_ok = True
    for tree in trees:
        w = w_process(tree)
        r = vertex_times(tree)
        D = matrix(w, "loop", r).entries
        bfs_ok &= bool(np.array_equal(D, bfs_matrix(loop_graph(tree)).astype(float)))
        P = processes(tree)
        W = w_values(tree)
        i = np.arange(2 * len(tree) - 1)
        w_ok &= bool(np.array_equal(W[i], P.L[P.xi[i] + 1] + P.C[i] + 2))
        S, T = np.meshgrid(r, r, indexing="ij")
        x_ok &= bool(np.array_equal(x_values(w, S, T), _x_case_table(tree)))
    elapsed = time.perf_counter() - t0
    ok = bfs_ok and w_ok and x_ok and elapsed < 30
    verdict(capsys, 5, ok, f"bfs==d_loop {bfs_ok}, W identity {w_ok}, x cases {x_ok}, time={elapsed:.1f}s")


def test_criterion_06_ghp_bound(capsys, trees):
    worst = -np.inf
    for tree in trees:
        n = len(tree)
        for a in (1.0, 10.0, np.sqrt(n)):
            worst = max(worst, tree_ghp(tree, a) - (1 / a + 1 / n))
    verdict(capsys, 6, worst <= 1e-6, f"max(ghp - (1/a + 1/#vertices)) = {worst:.3g}")


def test_criterion_07_pjg_limit(capsys):
    rep = run_experiment("pjg-limit", {"ns": [10, 100, 1000]})
    ok = all(r["tree_sup"] <= 2 / r["n"] + 1e-9 and r["loop_gap"] <= 4 / r["n"] for r in rep.rows)
    ok &= all(a["loop_gap"] > b["loop_gap"] for a, b in zip(rep.rows, rep.rows[1:]))
    rows = [(r["n"], r["tree_sup"], r["loop_gap"]) for r in rep.rows]
    verdict(capsys, 7, ok, f"(n, sup d_tree, loop gap) = {rows}")


def test_criterion_08_finite_jumps(capsys):
    rep = run_experiment("finite-jumps", {"ns": [10, 20, 50, 100, 200, 500, 1000]})
    f_jumps = len(jumps(make_excursion([(0, 0, 0), (0.2, 0.2, 0.7), (0.5, 0.3, 0.3), (0.6, 0.45, 0.85), (1, 0, 0)])))
    C = max(max(r["loop_gap"], r["tree_gap"]) / r["sup_f"] for r in rep.rows)
    ok = C <= 10 and f_jumps == 2
    verdict(capsys, 8, ok, f"fitted C = {C:.4g} over n = {[r['n'] for r in rep.rows]}")


def _iterate_oracle(images):
    """Cyclic set via m^k(i) == i for some k <= n; basin label = min of the cycle reached."""
    m = np.asarray(images, dtype=np.int64) - 1
    n = len(m)
    P = m.copy()
    cyclic = P == np.arange(n)
    for _ in range(n - 1):
        P = m[P]
        cyclic |= P == np.arange(n)
    # P = m^n, which is cyclic; walk its cycle for the smallest point
    label = P.copy()
    Q = P.copy()
    for _ in range(n):
        Q = m[Q]
        label = np.minimum(label, Q)
    basins = {}
    for i, b in enumerate(label):
        basins.setdefault(int(b), set()).add(i + 1)
    return set((np.nonzero(cyclic)[0] + 1).tolist()), sorted(map(frozenset, basins.values()), key=min)


def test_criterion_09_mappings(capsys):
    rng = np.random.default_rng(9)
    failures = 0
    for seed in range(1000):
        n = int(rng.integers(1, 501))
        M = random_mapping(n, seed)
        cyclic, basins = _iterate_oracle(M.images)
        ok = M.cyclic == cyclic and sorted(map(frozenset, M.basins), key=min) == basins
        ok &= sorted(i for b in M.basins for i in b) == list(range(1, n + 1))
        ok &= all({M(g) for g in c} == set(c) for c in M.cycles)
        P = mapping_processes(M)
        ok &= bool(np.all(P.C[2 * P.Z] == 0))
        for f, c in zip(P.excursions, M.cycles):
            make_excursion(f.breakpoints)
            js = jumps(f)
            ok &= len(js) == 1 and js[0].time == 0.0 and abs(js[0].height - len(c) / 2) <= 1e-12
        failures += not ok
    verdict(capsys, 9, failures == 0, f"{1000 - failures}/1000 mappings consistent with the iteration oracle")


def test_criterion_10_cactus(capsys, trees):
    bad = sum(not is_cactus(loop_graph(t)) for t in trees)
    verdict(capsys, 10, bad == 0, f"{len(trees) - bad}/{len(trees)} loop graphs are cacti")


def _random_space(rng, n):
    W = np.triu(rng.random((n, n)) + 0.05, 1)
    G = nx.from_numpy_array(W + W.T)
    D = np.zeros((n, n))
    for u, lengths in nx.all_pairs_dijkstra_path_length(G):
        for v, d in lengths.items():
            D[u, v] = d
    return FiniteSpace(np.arange(n, dtype=float), D, int(rng.integers(n)), np.full(n, 1.0 / n))


def _correspondence_oracle(X, Y):
    """
    Exact GH by exhaustive search: the smallest pairwise mismatch δ for which
    some set of mutually compatible pairs covers both spaces, found over all
    maximal cliques of the compatibility graph.
    """
    DX, DY = X.dist, Y.dist
    n, m = len(DX), len(DY)
    pairs = list(itertools.product(range(n), range(m)))
    cand = sorted({0.0} | {abs(DX[a, b] - DY[c, d]) for a, b in itertools.product(range(n), repeat=2)
                           for c, d in itertools.product(range(m), repeat=2)})

    def feasible(delta):
        G = nx.Graph()
        G.add_nodes_from(pairs)
        G.add_edges_from((p, q) for p, q in itertools.combinations(pairs, 2)
                         if abs(DX[p[0], q[0]] - DY[p[1], q[1]]) <= delta)
        return any({x for x, _ in C} == set(range(n)) and {y for _, y in C} == set(range(m))
                   for C in nx.find_cliques(G))

    k = bisect.bisect_left(range(len(cand)), True, key=lambda i: feasible(cand[i]))
    return cand[k] / 2


def _relation_enumeration(X, Y):
    n, m = len(X), len(Y)
    pairs = list(itertools.product(range(n), range(m)))
    best = np.inf
    for mask in range(1, 1 << len(pairs)):
        R = [p for k, p in enumerate(pairs) if mask >> k & 1]
        if is_correspondence(R, n, m):
            best = min(best, distortion(R, X, Y))
    return best / 2


def test_criterion_11_gh_sandwich(capsys):
    rng = np.random.default_rng(11)
    sandwich = True
    worst = 0.0
    for _ in range(100):
        X = _random_space(rng, int(rng.integers(1, 7)))
        Y = _random_space(rng, int(rng.integers(1, 7)))
        lo, ex, up = gh_lower(X, Y), gh_exact_small(X, Y), parametrized_upper(X, Y)
        sandwich &= lo <= ex + 1e-12 and ex <= up + 1e-12
        oracle = _correspondence_oracle(X, Y)
        if len(X) * len(Y) <= 9:
            assert oracle == pytest.approx(_relation_enumeration(X, Y), abs=1e-15)
        worst = max(worst, abs(ex - oracle))
    ok = sandwich and worst <= 1e-12
    verdict(capsys, 11, ok, f"sandwich holds={sandwich}, max |exact - oracle| = {worst:.3g}")


def test_criterion_12_shuffle_conditions(capsys):
    rep = check_shuffle(Shuffle(), [0.5, 0.2, 0.1, 0.05], default_x_grid())
    devs = rep.deviations
    ok = all(a > b for a, b in zip(devs, devs[1:])) and devs[-1] <= 0.15
    verdict(capsys, 12, ok, f"sup deviations {[round(d, 4) for d in devs]} (K = {rep.K:.4g})")
