from .counts import VariableGroups, multihomogeneous_count, total_degree_count
from .parse import ParseError, format_poly, format_system, parse_poly, parse_system
from .poly import Poly, PolySystem, evaluate, jacobian
from .transform import SquaredSystem, diagonal_change, square_system

__all__ = [
    "ParseError",
    "Poly",
    "PolySystem",
    "SquaredSystem",
    "VariableGroups",
    "diagonal_change",
    "evaluate",
    "format_poly",
    "format_system",
    "jacobian",
    "multihomogeneous_count",
    "parse_poly",
    "parse_system",
    "square_system",
    "total_degree_count",
]
