"""Command-line entry point."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import calculus, combinatorics, experiments, gh, metrics, render, space
from .excursion import ExcursionError, from_json, genealogy, jumps, range_inf, x_value, evaluate
from .randgen import OffspringLaw, random_plane_tree
from .shuffle import Shuffle

log = logging.getLogger("looptrees")


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _load_excursion(path: str):
    return from_json(_read(path))


def _load_tree(args):
    if getattr(args, "random", None):
        return random_plane_tree(args.random, args.law or "geometric:0.5", args.seed)
    if not args.input:
        raise SystemExit("tree: give a child-count file or --random N")
    return combinatorics.read_tree(_read(args.input))


def _emit(args, text: str, name: str | None = None):
    if args.out:
        out = Path(args.out)
        if out.is_dir() and name:
            out = out / name
        out.write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _samples(args, f):
    return metrics.default_samples(f, args.samples)


def _metric(args) -> metrics.MetricKind:
    sh = Shuffle.parse(args.shuffle) if args.shuffle else None
    return metrics.MetricKind.parse(args.metric, args.coef, sh)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args):
    f = _load_excursion(args.input)
    info = {"valid": True, "breakpoints": len(f.t), "jumps": [[j.time, j.height] for j in jumps(f)]}
    _emit(args, json.dumps(info))


def cmd_eval(args):
    f = _load_excursion(args.input)
    res = {}
    if args.t:
        res["values"] = [dict(zip(("t", "value", "left", "jump"), (t, *map(float, evaluate(f, t))))) for t in args.t]
    if args.inf:
        s, t = args.inf
        res["inf"] = float(range_inf(f, s, t))
    if args.genealogy:
        s, t = args.genealogy
        anc, m = genealogy(f, s, t)
        res["genealogy"] = {"is_ancestor": bool(anc), "mrca": float(m), "x": float(x_value(f, s, t))}
    _emit(args, json.dumps(res))


def cmd_matrix(args):
    f = _load_excursion(args.input)
    D = metrics.matrix(f, _metric(args), _samples(args, f))
    _emit(args, D.to_csv(), "matrix.csv")


def cmd_decompose(args):
    f = _load_excursion(args.input)
    d = calculus.decompose(f, args.tol)
    res = {"classification": d.classification, "continuous_part": d.continuous_part.to_dict(),
           "pjg_part": d.pjg_part.to_dict()}
    if args.eps:
        res["regularized"] = calculus.regularize(f, args.eps).to_dict()
    _emit(args, json.dumps(res))


def cmd_space(args):
    f = _load_excursion(args.input)
    X = space.quotient_space(f, _metric(args), _samples(args, f), args.tol)
    _emit(args, X.to_json(), "space.json")


def cmd_gh(args):
    X = space.FiniteSpace.from_dict(json.loads(_read(args.x)))
    Y = space.FiniteSpace.from_dict(json.loads(_read(args.y)))
    rep = gh.gh_estimate(X, Y, exact_max=args.exact_max, pointed=args.pointed)
    _emit(args, json.dumps(rep.to_dict()))


def cmd_tree(args):
    tree = _load_tree(args)
    w = combinatorics.w_process(tree)
    G = combinatorics.loop_graph(tree)
    D = combinatorics.bfs_matrix(G)
    r = combinatorics.vertex_times(tree)
    s, t = np.meshgrid(r, r, indexing="ij")
    dl = metrics.pairwise(w, s.ravel(), t.ravel(), "loop").reshape(D.shape)
    res = {
        "child_counts": list(tree.child_counts),
        "w": w.to_dict(),
        "edges": [list(e) for e in G.edges],
        "checks": {
            "bfs_equals_d_loop": bool(np.array_equal(np.rint(dl), D) and np.allclose(dl, D, atol=1e-9)),
            "cactus": combinatorics.is_cactus(G),
            "classification": calculus.classify(w),
        },
    }
    _emit(args, json.dumps(res), "tree.json")


def cmd_experiment(args):
    params = {}
    if args.n:
        params["ns"] = args.n
    if args.name in ("invariance", "mapping"):
        params["seed"] = args.seed
    if args.law:
        law = OffspringLaw.parse(args.law)
        if law.kind != "stable":
            raise SystemExit("experiment: only stable:<alpha> laws apply")
        params["alpha"] = law.param
    if args.samples_given:
        params["samples"] = args.samples
    rep = experiments.run_experiment(args.name, params)
    if args.out and Path(args.out).is_dir():
        Path(args.out, f"{args.name}.json").write_text(rep.to_json() + "\n")
        Path(args.out, f"{args.name}.csv").write_text(rep.to_csv())
        log.info("wrote %s.{json,csv} to %s", args.name, args.out)
    else:
        _emit(args, rep.to_json())
    return 0 if rep.passed else 2


def cmd_render(args):
    text = _read(args.input)
    try:
        obj = from_json(text)
    except (ValueError, KeyError):
        obj = combinatorics.read_tree(text)
    _emit(args, render.render(obj, args.what, args.coef), "plot.svg")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--out", default=None, help="output file (or directory)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="looptrees", description="Trees, looptrees and vernation trees coded by excursions.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    def metric_flags(sp):
        sp.add_argument("--metric", default="loop", choices=[k for k in metrics.KINDS])
        sp.add_argument("--coef", type=float, default=2.0)
        sp.add_argument("--shuffle", default=None, help="default | identity-eps:<eps> | sibling:<k>,<a>")

    sp = add("validate", cmd_validate, "check an excursion JSON file")
    sp.add_argument("input")
    sp = add("eval", cmd_eval, "evaluate an excursion")
    sp.add_argument("input")
    sp.add_argument("--t", type=float, nargs="+")
    sp.add_argument("--inf", type=float, nargs=2, metavar=("S", "T"))
    sp.add_argument("--genealogy", type=float, nargs=2, metavar=("S", "T"))
    sp = add("matrix", cmd_matrix, "pseudo-distance matrix as CSV")
    sp.add_argument("input")
    metric_flags(sp)
    sp = add("decompose", cmd_decompose, "split into continuous and PJG parts")
    sp.add_argument("input")
    sp.add_argument("--eps", type=float, default=None)
    sp = add("space", cmd_space, "sampled quotient metric space as JSON")
    sp.add_argument("input")
    metric_flags(sp)
    sp = add("gh", cmd_gh, "Gromov-Hausdorff bounds between two spaces")
    sp.add_argument("x")
    sp.add_argument("y")
    sp.add_argument("--exact-max", type=int, default=6)
    sp.add_argument("--pointed", action="store_true")
    sp = add("tree", cmd_tree, "w(τ), Loop(τ) and their consistency checks")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--random", type=int, default=None, metavar="N")
    sp.add_argument("--law", default=None, help="geometric:<p> | stable:<alpha> | binary")
    sp = add("experiment", cmd_experiment, "run a convergence experiment")
    sp.add_argument("name", choices=experiments.NAMES)
    sp.add_argument("--n", type=int, nargs="+")
    sp.add_argument("--law", default=None)
    sp = add("render", cmd_render, "SVG plot")
    sp.add_argument("input")
    sp.add_argument("--what", default="excursion", choices=["excursion", "looptree", "vernation"])
    sp.add_argument("--coef", type=float, default=2.0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    args.samples_given = args.samples is not None
    if args.samples is None:
        args.samples = 256
    try:
        code = args.func(args)
    except (ExcursionError, combinatorics.TreeError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return code or 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
