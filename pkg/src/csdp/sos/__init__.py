"""Sparse sum-of-squares: polynomials, Newton reduction, sparsity hierarchies and Gram programs."""

from .check import (STRATEGIES, SdsosConstraint, SemialgebraicSet, SosResult, matrix_sos_assemble,
                    sdsos_check, sdsos_gram_constraint, sos_check, sos_program, weighted_sos_assemble)
from .gram import GramBlock, GramSdp, GramSolution, certificate_residual, gram_sdp, solve_gram
from .newton import in_newton_polytope, newton_basis
from .poly import ExponentSet, Polynomial, format_polynomial, full_basis, parse_polynomial, read_polynomial
from .sparsity import (block_sizes, cs_tssos_edges, csp_cliques, csp_graph, graph_cliques,
                       sign_orbit_partition, tssos_edges)

__all__ = [
    "STRATEGIES", "SdsosConstraint", "SemialgebraicSet", "SosResult", "matrix_sos_assemble", "sdsos_check",
    "sdsos_gram_constraint", "sos_check", "sos_program", "weighted_sos_assemble", "GramBlock", "GramSdp",
    "GramSolution", "certificate_residual", "gram_sdp", "solve_gram", "in_newton_polytope", "newton_basis",
    "ExponentSet", "Polynomial", "format_polynomial", "full_basis", "parse_polynomial", "read_polynomial",
    "block_sizes", "cs_tssos_edges", "csp_cliques", "csp_graph", "graph_cliques", "sign_orbit_partition",
    "tssos_edges",
]
