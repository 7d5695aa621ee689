import numpy as np
import pytest
from hypothesis import given, strategies as st

from looptrees.calculus import branch_split
from looptrees.excursion import (
    Warp,
    compose_warp,
    hitting_time,
    is_ancestor,
    make_excursion,
    mrca,
    scale,
    x_value,
    zero_excursion,
)
from looptrees.metrics import (
    KINDS,
    DistanceMatrix,
    MetricKind,
    d_classic,
    d_loop,
    d_loop_shuffled,
    d_one_sided,
    d_tree,
    d_vern,
    d_vern_shuffled,
    default_samples,
    matrix,
    pairwise,
)
from looptrees.shuffle import Shuffle, loop_dist

from conftest import excursion_suite, excursions

UNSHUFFLED = ("classic", "tree", "loop", "vern")


def test_classic_examples(B):
    assert d_classic(B, 0, 0.5) == pytest.approx(0.5)
    assert d_classic(B, 0.25, 0.75) == pytest.approx(0.0)
    assert d_classic(B, 0.3, 0.3) == 0.0


def test_loop_examples(A, B):
    assert d_loop(A, 0.25, 0.75) == pytest.approx(0.5)
    assert d_loop(A, 0.1, 0.2) == pytest.approx(0.1)
    t = np.linspace(0, 1, 21)
    assert np.all(pairwise(B, t[:, None].repeat(21, 1).ravel(), np.tile(t, 21), "loop") == 0)


def test_tree_examples(A, B, M):
    s = np.random.default_rng(0).random(50)
    t = np.random.default_rng(1).random(50)
    assert np.allclose(pairwise(A, s, t, "tree"), 0, atol=1e-15)
    assert np.array_equal(pairwise(B, s, t, "tree"), pairwise(B, s, t, "classic"))
    assert d_tree(M, 1.0, 0.25) == pytest.approx(0.25)
    # the segment end is the farthest from the root in the tree part
    grid = np.linspace(0, 1, 2001)
    assert pairwise(M, grid, np.ones_like(grid), "tree").max() == pytest.approx(0.25)


def test_vern_examples(A, B, M):
    grid = np.linspace(0, 1, 2001)
    far = pairwise(M, grid, np.ones_like(grid), "vern").max()
    assert far == pytest.approx(0.75, abs=1e-3)
    s, t = np.meshgrid(grid[::50], grid[::50])
    assert np.array_equal(pairwise(B, s.ravel(), t.ravel(), "vern"), pairwise(B, s.ravel(), t.ravel(), "tree"))
    assert np.allclose(pairwise(A, s.ravel(), t.ravel(), "vern"), 2 * pairwise(A, s.ravel(), t.ravel(), "loop"))
    assert d_vern(M, 0.1, 0.6, coefficient=3.0) == pytest.approx(d_tree(M, 0.1, 0.6) + 3 * d_loop(M, 0.1, 0.6))


def test_shuffled_examples(A):
    t = np.linspace(0, 1, 41)
    s = t[::-1]
    sh = Shuffle("identity_above", eps=0.1)
    kind = MetricKind("loop-shuffled", shuffle=sh)
    assert np.allclose(pairwise(A, s, t, kind), pairwise(A, s, t, "loop"))
    assert d_loop_shuffled(A, Shuffle(), 0.3, 0.3) == 0.0
    for x in t:
        assert d_loop_shuffled(A, Shuffle(), 0.0, x) == pytest.approx(d_loop(A, 0.0, x))
    assert d_vern_shuffled(A, Shuffle(), 0.2, 0.7) == pytest.approx(2 * d_loop(A, 0.2, 0.7))


def test_metric_kind_validation():
    with pytest.raises(ValueError):
        MetricKind("bogus")
    with pytest.raises(ValueError):
        MetricKind("vern", coefficient=0)
    assert MetricKind("loop-shuffled").shuffle == Shuffle()
    assert MetricKind.parse("vern_shuffled").name == "vern-shuffled"


def test_matrix_examples(A, M):
    Z = matrix(zero_excursion(), "vern", np.linspace(0, 1, 7))
    assert np.all(Z.entries == 0)
    D = matrix(A, "loop", [0, 0.25, 0.5, 0.75, 1])
    assert D.max() == pytest.approx(0.5)
    assert np.allclose(D.entries[0], [0, 0.25, 0.5, 0.25, 0])
    V = matrix(M, "vern", default_samples(M, 100))
    assert V.max() == pytest.approx(0.75, abs=0.01)
    with pytest.raises(ValueError):
        matrix(A, "loop", [])


@pytest.mark.parametrize("kind", KINDS)
def test_matrix_matches_pairwise(kind):
    for f in excursion_suite(10, seed=3):
        times = default_samples(f, 32)
        D = matrix(f, kind, times).entries
        s, t = np.meshgrid(times, times, indexing="ij")
        P = pairwise(f, s.ravel(), t.ravel(), kind).reshape(D.shape)
        assert np.abs(D - P).max() <= 1e-12


def test_csv_round_trip(M):
    D = matrix(M, "vern", np.linspace(0, 1, 9))
    E = DistanceMatrix.from_csv(D.to_csv())
    assert np.array_equal(E.sample_times, D.sample_times)
    assert np.array_equal(E.entries, D.entries)


def test_default_samples_include_jumps_and_root(M):
    times = default_samples(M, 16)
    assert 1.0 in times and 0.25 in times
    assert np.all(np.diff(times) > 0)


# -- cross-checks ------------------------------------------------------------


def _three_term(f, s, t, shuffle=None):
    m = mrca(f, s, t)
    d = float(f.jump(m))
    xs, xt = x_value(f, m, s), x_value(f, m, t)
    if d > 0:
        if shuffle is None:
            first = float(loop_dist(xs, xt, d))
        else:
            from looptrees.shuffle import delta_tilde

            first = float(delta_tilde(shuffle, d, xs, xt))
    else:
        first = 0.0
    return first + d_one_sided(f, m, s, shuffle) + d_one_sided(f, m, t, shuffle)


@given(excursions(), st.floats(0, 1), st.floats(0, 1))
def test_loop_equals_three_term_sum(f, s, t):
    assert d_loop(f, s, t) == pytest.approx(_three_term(f, s, t), abs=1e-9)
    sh = Shuffle()
    assert d_loop_shuffled(f, sh, s, t) == pytest.approx(_three_term(f, s, t, sh), abs=1e-9)


# -- invariants --------------------------------------------------------------


@given(excursions(), st.floats(0, 1), st.floats(0, 1))
def test_majorization(f, s, t):
    s, t = min(s, t), max(s, t)
    bound = float(f.value(s) + f.left_limit(t) - 2 * f.inf(s, t))
    if s < t:
        assert d_loop(f, s, t) <= bound + 1e-9
        assert d_tree(f, s, t) <= bound + 1e-9


@given(excursions(), st.sampled_from([0.5, 2.0, 4.0]), st.sampled_from(("tree", "loop", "vern")))
def test_homogeneity_exact(f, alpha, kind):
    times = default_samples(f, 24)
    a = matrix(scale(f, alpha), kind, times).entries
    b = matrix(f, kind, times).entries
    assert np.array_equal(a, alpha * b)


@given(excursions(), st.floats(0.1, 10), st.sampled_from(("tree", "loop", "vern")))
def test_homogeneity_any_factor(f, alpha, kind):
    times = default_samples(f, 24)
    a = matrix(scale(f, alpha), kind, times).entries
    assert np.allclose(a, alpha * matrix(f, kind, times).entries, atol=1e-12 * (1 + alpha))


@given(excursions(), st.lists(st.floats(0.05, 0.95), min_size=1, max_size=4, unique=True), st.data())
def test_time_change(f, xs, data):
    xs = sorted(xs)
    ys = sorted(data.draw(st.lists(st.floats(0.05, 0.95), min_size=len(xs), max_size=len(xs), unique=True)))
    if np.any(np.diff(xs) < 1e-3) or np.any(np.diff(ys) < 1e-3):
        return
    lam = Warp([(0, 0)] + list(zip(xs, ys)) + [(1, 1)])
    g = compose_warp(f, lam)
    rng = np.random.default_rng(0)
    s, t = rng.random(40), rng.random(40)
    # breakpoints are paired with their exact images: a float round trip
    # through lam and its inverse may land just beside a jump
    perm = rng.permutation(len(f.t))
    s_g = np.concatenate([s, lam.inverse(f.t)])
    t_g = np.concatenate([t, lam.inverse(f.t)[perm]])
    s_f = np.concatenate([lam(s), f.t])
    t_f = np.concatenate([lam(t), f.t[perm]])
    for kind in KINDS:
        lhs = pairwise(g, s_g, t_g, kind)
        rhs = pairwise(f, s_f, t_f, kind)
        assert np.abs(lhs - rhs).max() <= 1e-9


def _branch_pairs(f):
    r, h, lr = f.jump_arrays()
    for u, lv in zip(r, lr):
        if u < 1:
            v = hitting_time(f, float(u), float(lv))
            if v > u:
                yield float(u), v


@pytest.mark.parametrize("kind", KINDS)
def test_branching(kind):
    rng = np.random.default_rng(7)
    checked = 0
    for f in excursion_suite(40, seed=21):
        for u, v in _branch_pairs(f):
            g, h = branch_split(f, u, v)
            s, t = rng.random(30), rng.random(30)
            w_s, w_t = u + s * (v - u), u + t * (v - u)
            out = np.concatenate([f.t, rng.random(60)])
            out = out[(out < u) | (out >= v)]
            a, b = rng.permutation(out), out
            assert np.abs(pairwise(f, a, b, kind) - pairwise(g, a, b, kind)).max() <= 1e-9
            assert np.abs(pairwise(f, w_s, w_t, kind) - pairwise(h, s, t, kind)).max() <= 1e-9
            aa = rng.choice(out, 30)
            lhs = pairwise(f, w_s, aa, kind)
            rhs = pairwise(g, aa, np.full(30, u), kind) + pairwise(h, s, np.ones(30), kind)
            assert np.abs(lhs - rhs).max() <= 1e-9
            checked += 1
    assert checked > 20


def test_branching_example(M):
    g, h = branch_split(M, 0.25, 0.75)
    assert h.value(0.0) == pytest.approx(0.5)
    assert g == make_excursion([(0, 0, 0), (0.25, 0.25, 0.25), (0.75, 0.25, 0.25), (1, 0, 0)])


def test_geodesic_tree_part():
    for f in excursion_suite(60, seed=4):
        r, _, _ = f.jump_arrays()
        pts = np.concatenate([r, f.t])
        for s in pts:
            for t in pts:
                if s == t or not bool(is_ancestor(f, s, t)):
                    continue
                lhs = d_tree(f, t, 1.0)
                rhs = d_tree(f, s, 1.0) + d_tree(f, s, t)
                assert lhs == pytest.approx(rhs, abs=1e-9)


def test_jump_circle_isometry():
    xs = np.linspace(0.05, 1.0, 20)
    for f in excursion_suite(40, seed=8):
        r, h, lr = f.jump_arrays()
        for s, d, l in zip(r, h, lr):
            tau = np.array([hitting_time(f, float(s), float(l + x * d)) for x in xs])
            assert np.allclose([x_value(f, s, t) for t in tau], xs * d, atol=1e-9)
            a, b = np.meshgrid(np.arange(len(xs)), np.arange(len(xs)))
            got = pairwise(f, tau[a.ravel()], tau[b.ravel()], "loop")
            want = d * loop_dist(xs[a.ravel()], xs[b.ravel()], 1.0)
            assert np.abs(got - want).max() <= 1e-9
            assert np.abs(pairwise(f, tau[a.ravel()], tau[b.ravel()], "tree")).max() <= 1e-9
