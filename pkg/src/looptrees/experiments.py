"""Desk-scale convergence experiments with deterministic JSON/CSV reports."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .combinatorics import loop_space, vertex_times, w_process
from .excursion import Excursion, make_excursion, scale as escale, sup_distance, linear_combination
from .gh import ghp_upper, parametrized_upper, sequence_distance
from .metrics import default_samples, matrix, pairwise
from .randgen import mapping_processes, random_mapping, random_plane_tree
from .space import FiniteSpace, diam, quotient_space, scale

NAMES = ("chain-bouquet", "finite-jumps", "pjg-limit", "invariance", "mapping")


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    rows: list[dict]
    passed: bool
    checks: dict = field(default_factory=dict)
    runtime: float = 0.0

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {
            "name": self.name,
            "parameters": self.parameters,
            "rows": self.rows,
            "checks": self.checks,
            "passed": self.passed,
        }
        if include_runtime:
            d["runtime"] = self.runtime
        return d

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        if not self.rows:
            return ""
        keys = [k for k in self.rows[0] if not isinstance(self.rows[0][k], (list, dict))]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: r[k] for k in keys})
        return buf.getvalue()


def _round(x: float) -> float:
    # stable textual output across platforms
    return float(f"{x:.12g}")


# ---------------------------------------------------------------------------
# families of excursions


def chain_excursion(n: int) -> Excursion:
    """n loops of length 1/n back to back, then the descent 1 − t."""
    bp = [(k / (2 * n), k / (2 * n), k / (2 * n) + 1 / n) for k in range(n)]
    bp.append((0.5, 0.5, 0.5))
    bp.append((1.0, 0.0, 0.0))
    return make_excursion(bp)


def bouquet_excursion(n: int) -> Excursion:
    """Staircase of n jumps 1/(2n) climbing to 1/2, then the descent 1 − t."""
    bp = [(k / (2 * n), k / (2 * n), (k + 1) / (2 * n)) for k in range(n)]
    bp.append((0.5, 0.5, 0.5))
    bp.append((1.0, 0.0, 0.0))
    return make_excursion(bp)


def tent() -> Excursion:
    return make_excursion([(0, 0, 0), (0.5, 0.5, 0.5), (1, 0, 0)])


def linear() -> Excursion:
    return make_excursion([(0, 0, 1), (1, 0, 0)])


def sawtooth(teeth: int) -> Excursion:
    """Continuous zigzag with the given number of unit-height teeth."""
    bp = [(0.0, 0.0, 0.0)]
    for k in range(teeth):
        bp.append(((k + 0.5) / teeth, 1.0, 1.0))
        bp.append(((k + 1) / teeth, 0.0, 0.0))
    return make_excursion(bp)


def two_jump_base() -> Excursion:
    """Fixed excursion with two jumps and a non-trivial continuous part."""
    return make_excursion(
        [(0, 0, 0), (0.2, 0.2, 0.7), (0.5, 0.3, 0.3), (0.6, 0.45, 0.85), (1, 0, 0)]
    )


def _sup_matrix_gap(f, g, kind, times) -> float:
    return float(np.max(np.abs(matrix(f, kind, times).entries - matrix(g, kind, times).entries)))


# ---------------------------------------------------------------------------
# experiments


def _chain_bouquet(params) -> tuple[list[dict], dict, bool]:
    ns = params.get("ns", [10, 20, 50, 100])
    samples = params.get("samples", 256)
    warps = params.get("warps", 0)
    f = tent()
    rows = []
    for n in ns:
        fn = chain_excursion(n)
        times = default_samples(fn, samples)
        d1 = matrix(fn, "loop", times)
        up = parametrized_upper(d1, lambda s, t: pairwise(f, s, t, "classic"), warps=warps)
        gn = bouquet_excursion(n)
        dg = diam(quotient_space(gn, "loop", default_samples(gn, samples)))
        rows.append({"n": n, "gh_upper_chain_segment": _round(up), "bouquet_diam": _round(dg),
                     "bouquet_diam_expected": _round(1 / (2 * n))})
    ups = [r["gh_upper_chain_segment"] for r in rows]
    dgs = [r["bouquet_diam"] for r in rows]
    checks = {
        "chain_decreasing": all(a > b for a, b in zip(ups, ups[1:])),
        "bouquet_decreasing": all(a > b for a, b in zip(dgs, dgs[1:])),
        "bouquet_exact": all(abs(r["bouquet_diam"] - 1 / (2 * r["n"])) <= 1e-6 for r in rows),
        "chain_within_1_over_n": all(r["gh_upper_chain_segment"] <= 1 / r["n"] for r in rows),
    }
    return rows, checks, all(checks.values())


def _finite_jumps(params):
    ns = params.get("ns", [10, 20, 50, 100, 200, 500, 1000])
    samples = params.get("samples", 128)
    f = two_jump_base()
    h = sawtooth(params.get("teeth", 3))
    times = default_samples(f, samples)
    rows = []
    for n in ns:
        fn = linear_combination([(1.0, f), (1.0 / n, h)])
        gap = sup_distance(fn, f)
        dl = _sup_matrix_gap(fn, f, "loop", times)
        dt = _sup_matrix_gap(fn, f, "tree", times)
        rows.append({"n": n, "sup_f": _round(gap), "loop_gap": _round(dl), "tree_gap": _round(dt),
                     "ratio": _round(max(dl, dt) / gap)})
    C = max(r["ratio"] for r in rows)
    checks = {"fitted_C": C, "C_at_most_10": C <= 10}
    return rows, checks, bool(checks["C_at_most_10"])


def _pjg_limit(params):
    ns = params.get("ns", [10, 100, 1000])
    samples = params.get("samples", 256)
    A = linear()
    rows = []
    for n in ns:
        worst_tree = worst_loop = 0.0
        for name, h in (("tent", tent()), ("sawtooth", sawtooth(n))):
            fn = linear_combination([(1.0, A), (1.0 / n, h)])
            times = np.unique(np.concatenate([default_samples(fn, samples), default_samples(A, samples)]))
            worst_tree = max(worst_tree, float(matrix(fn, "tree", times).max()))
            worst_loop = max(worst_loop, _sup_matrix_gap(fn, A, "loop", times))
        rows.append({"n": n, "tree_sup": _round(worst_tree), "loop_gap": _round(worst_loop),
                     "tree_bound": _round(2 / n), "loop_bound": _round(4 / n)})
    checks = {
        "tree_within_2_over_n": all(r["tree_sup"] <= 2 / r["n"] + 1e-9 for r in rows),
        "loop_within_4_over_n": all(r["loop_gap"] <= 4 / r["n"] for r in rows),
    }
    return rows, checks, all(checks.values())


def tree_ghp(tree, a: float, grid_factor: int = 4) -> float:
    """ghp_upper between (1/a)·Loop(τ) and the sampled quotient of w(τ)/a."""
    N = 2 * len(tree) - 1
    times = np.unique(np.concatenate([vertex_times(tree), [1.0], np.linspace(0, 1, grid_factor * N + 1)]))
    X = scale(loop_space(tree, times), 1 / a)
    Y = quotient_space(escale(w_process(tree), 1 / a), "loop", times)
    return ghp_upper(X, Y)


def _invariance(params):
    ns = params.get("ns", [25, 50, 100, 200])
    alpha = float(params.get("alpha", 1.5))
    seed = int(params.get("seed", 0))
    law = f"stable:{alpha}"
    rows = []
    prev = None
    for i, n in enumerate(ns):
        tree = random_plane_tree(n, law, seed + i)
        a = len(tree) ** (1 / alpha)
        g = tree_ghp(tree, a)
        X = scale(loop_space(tree), 1 / a)
        cross = parametrized_upper(prev, X) if prev is not None else None
        prev = X
        rows.append({"n": n, "a": _round(a), "ghp_upper": _round(g), "bound": _round(1 / a + 1 / n),
                     "diam": _round(diam(X)), "gh_upper_prev": None if cross is None else _round(cross)})
    checks = {"within_bound": all(r["ghp_upper"] <= r["bound"] + 1e-6 for r in rows)}
    return rows, checks, all(checks.values())


def basin_space(M, j: int) -> FiniteSpace:
    """B_j: the basin with its graph distance, uniform weights, rooted at γ_j•."""
    basin = M.basins[j]
    G = nx.Graph()
    G.add_nodes_from(basin)
    G.add_edges_from((i, M(i)) for i in basin)
    idx = {v: k for k, v in enumerate(basin)}
    D = np.zeros((len(basin), len(basin)))
    for u, lengths in nx.all_pairs_shortest_path_length(G):
        for v, d in lengths.items():
            D[idx[u], idx[v]] = d
    pts = np.arange(len(basin), dtype=float)
    return FiniteSpace(pts, D, idx[M.roots[j]], np.full(len(basin), 1.0 / len(basin)))


def mapping_sequence(M) -> list[tuple[float, FiniteSpace]]:
    """Normalized G(M): basin masses #B_j/n with spaces scaled by n^(-1/2)."""
    n = M.n
    return [(len(b) / n, scale(basin_space(M, j), 1 / math.sqrt(n))) for j, b in enumerate(M.basins)]


def _mapping(params):
    ns = params.get("ns", [50, 100, 200, 400])
    seed = int(params.get("seed", 0))
    rows = []
    prev = None
    ok = True
    for i, n in enumerate(ns):
        M = random_mapping(n, seed + i)
        P = mapping_processes(M)
        ok &= bool(np.all(P.C[2 * P.Z] == 0))
        ok &= all(abs(f.right[0] - len(c) / 2) < 1e-12 for f, c in zip(P.excursions, M.cycles))
        seq = mapping_sequence(M)
        dist = sequence_distance(prev, seq) if prev is not None else None
        prev = seq
        rows.append({"n": n, "basins": len(M.basins), "cyclic": len(M.cyclic),
                     "masses": [_round(len(b) / n) for b in M.basins],
                     "marks": [_round(z / n) for z in P.Z],
                     "largest_mass": _round(max(len(b) for b in M.basins) / n),
                     "sequence_distance_prev": None if dist is None else _round(dist)})
    checks = {"marks_are_contour_zeros": ok}
    return rows, checks, ok


_RUNNERS = {
    "chain-bouquet": _chain_bouquet,
    "finite-jumps": _finite_jumps,
    "pjg-limit": _pjg_limit,
    "invariance": _invariance,
    "mapping": _mapping,
}


def run_experiment(name: str, params: dict | None = None) -> ExperimentReport:
    if name not in _RUNNERS:
        raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(NAMES)}")
    params = dict(params or {})
    if "ns" in params and (not params["ns"] or any(int(n) < 1 for n in params["ns"])):
        raise ValueError("ns must be a non-empty list of positive integers")
    t0 = time.perf_counter()
    rows, checks, passed = _RUNNERS[name](params)
    return ExperimentReport(name, params, rows, bool(passed), checks, time.perf_counter() - t0)
