"""Jump-part operators J and J^ε, classification and branching decomposition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .excursion import (
    ANCESTOR_TOL,
    Excursion,
    ExcursionError,
    _build,
    is_ancestor,
    linear_combination,
)
from .metrics import pairwise

BRANCH_TOL = 1e-9


def _candidate_times(f: Excursion) -> np.ndarray:
    """Breakpoints plus every time a decreasing piece crosses a breakpoint value."""
    levels = np.unique(np.concatenate([f.left, f.right]))
    out = []
    a = f.right[:-1]
    b = f.left[1:]
    t0, t1 = f.t[:-1], f.t[1:]
    for i in np.nonzero(a > b)[0]:
        lv = levels[(levels > b[i]) & (levels < a[i])]
        if len(lv):
            out.append(t0[i] + (a[i] - lv) / (a[i] - b[i]) * (t1[i] - t0[i]))
    if not out:
        return f.t.copy()
    cross = np.unique(np.concatenate(out))
    # crossings landing on (or within rounding of) a breakpoint yield to it,
    # since the breakpoint carries the jump
    pos = np.clip(np.searchsorted(f.t, cross), 1, len(f.t) - 1)
    near = np.minimum(np.abs(f.t[pos] - cross), np.abs(f.t[pos - 1] - cross))
    cross = cross[near > 1e-13]
    if len(cross):
        cross = cross[np.concatenate([[True], np.diff(cross) > 1e-13])]
    return np.unique(np.concatenate([f.t, cross]))


def _from_values(times, right, jumps_here) -> Excursion:
    left = right - jumps_here
    return _build(times, left, right)


def j_transform(f: Excursion) -> Excursion:
    """Jf(t) = f(t) − d_tree(t, 1), assembled exactly on all kink candidates."""
    times = _candidate_times(f)
    right = f.value(times) - pairwise(f, times, np.ones_like(times), "tree")
    right[-1] = 0.0
    return _from_values(times, right, f.jump(times))


def j_sum(f: Excursion, times, eps: float = 0.0) -> np.ndarray:
    """Σ_{r ⪯ t, Δ_r >= eps} x_r^t at each given time."""
    _, h, _ = f.jump_arrays()
    X = f.x_profile(np.asarray(times, dtype=float), jump_mask=h >= eps)
    return X.sum(axis=0)


def j_eps(f: Excursion, eps: float) -> Excursion:
    """J^ε f, keeping only the jumps of height at least ε."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    times = _candidate_times(f)
    right = j_sum(f, times, eps)
    jh = f.jump(times)
    return _from_values(times, right, np.where(jh >= eps, jh, 0.0))


def _sub(f: Excursion, g: Excursion) -> Excursion:
    return linear_combination([(1.0, f), (-1.0, g)])


@dataclass
class Decomposition:
    continuous_part: Excursion
    pjg_part: Excursion
    classification: str


def classify(f: Excursion, tol: float = 1e-9) -> str:
    """``continuous``, ``pjg`` or ``mixed``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    jf = j_transform(f)
    if jf.sup() <= tol:
        return "continuous"
    if _sub(f, jf).sup() <= tol:
        return "pjg"
    return "mixed"


def decompose(f: Excursion, tol: float = 1e-9) -> Decomposition:
    jf = j_transform(f)
    cont = _sub(f, jf)
    if jf.sup() <= tol:
        label = "continuous"
    elif cont.sup() <= tol:
        label = "pjg"
    else:
        label = "mixed"
    return Decomposition(cont, jf, label)


def regularize(f: Excursion, eps: float, check: bool = True) -> Excursion:
    """g = f − Jf + J^ε f, whose jump part is J^ε f."""
    jf = j_transform(f)
    je = j_eps(f, eps)
    g = linear_combination([(1.0, f), (-1.0, jf), (1.0, je)])
    if check:
        from .excursion import sup_distance

        err = sup_distance(j_transform(g), je)
        if err > 1e-9:
            raise ArithmeticError(f"regularization postcondition failed ({err:.3g})")
    return g


def branch_split(f: Excursion, u: float, v: float) -> tuple[Excursion, Excursion]:
    """
    Split at a branch ``u ≺ v`` with ``f(u-) = f(v-)``.

    Returns ``g`` (f flattened to f(u-) on [u, v)) and ``h`` (the sub-excursion
    on [u, v] rescaled to [0, 1] and shifted down by f(u-)).
    """
    if not (0 <= u < v <= 1):
        raise ValueError("branch_split needs 0 <= u < v <= 1")
    fu = float(f.left_limit(u))
    fv = float(f.left_limit(v))
    if abs(fu - fv) > BRANCH_TOL or not bool(is_ancestor(f, u, v, ANCESTOR_TOL)):
        raise ExcursionError("branch_split needs u ≺ v and f(u-) = f(v-)")
    before = f.t < u
    after = f.t > v
    tg = np.concatenate([f.t[before], [u, v], f.t[after]])
    lg = np.concatenate([f.left[before], [fu, fu], f.left[after]])
    rg = np.concatenate([f.right[before], [fu, float(f.value(v))], f.right[after]])
    g = _build(tg, lg, rg)

    inside = (f.t > u) & (f.t < v)
    th = np.concatenate([[0.0], (f.t[inside] - u) / (v - u), [1.0]])
    lh = np.concatenate([[0.0], f.left[inside] - fu, [0.0]])
    rh = np.concatenate([[float(f.value(u)) - fu], f.right[inside] - fu, [0.0]])
    h = _build(th, np.maximum(lh, 0.0), np.maximum(rh, 0.0), tol=BRANCH_TOL)
    return g, h
