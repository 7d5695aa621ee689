"""Trees, looptrees and vernation trees coded by piecewise-linear excursions."""

from .excursion import (
    Excursion,
    ExcursionError,
    JumpRecord,
    evaluate,
    from_json,
    genealogy,
    is_ancestor,
    jumps,
    make_excursion,
    mrca,
    range_inf,
    skorokhod_upper,
    theta,
    x_value,
)
from .shuffle import Shuffle, check_shuffle, default_phi, delta_tilde, sibling_phi
from .metrics import DistanceMatrix, MetricKind, d_classic, d_loop, d_tree, d_vern, matrix
from .calculus import branch_split, classify, decompose, j_eps, j_transform, regularize
from .space import FiniteSpace, circle, diam, glue, quotient_space, segment
from .gh import distortion, gh_exact_small, gh_lower, ghp_upper, parametrized_upper, sequence_distance
from .combinatorics import PlaneTree, bfs_distance, is_cactus, loop_graph, parse_tree, permute_tree, processes, w_process
from .randgen import Mapping, mapping_processes, random_mapping, random_plane_tree, walk_excursion

__version__ = "0.1.0"
