"""Chordal decomposition for sparse semidefinite and sum-of-squares programs."""

from .admm import AdmmSettings, Solution, psd_project, solve, solve_dense, solve_domain, solve_range
from .errors import CsdpError
from .factorwidth import fw_bound_program, fw_cliques, fw_dual_check, fw_membership
from .graph import (CliqueSet, CliqueTree, Graph, Ordering, Partition, chordal_extension, clique_tree,
                    is_chordal, maximal_cliques, mcs, verify_peo)
from .sdp import (SdpProblem, aggregate_pattern, clique_tree_convert, domain_decompose, range_decompose)
from .sdpa import sdpa_read, sdpa_write
from .sparse import SparseSymMatrix, chordal_decompose, completion_check, max_det_complete

SparsityPattern = Graph

__version__ = "0.1.0"
