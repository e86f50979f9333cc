"""Geometric Reidemeister torsion of framed knots in triangulated 3-manifolds."""
from .catalog import catalog_space, closed_form_lens, closed_form_s3, lens_triangulation, s3_unknot_triangulation
from .errors import GeoTorsionError
from .framing import change_framing_matrix, change_framing_triangulation, invariant_with_framing
from .geometry import Geometrization, random_geometrization
from .pachner import apply_move, fuzz
from .torsion import InvariantReport, invariant
from .triangulation import DistinguishedChain, Triangulation, build_from_gluings, validate_chain

__version__ = "0.1.0"

__all__ = [
    "DistinguishedChain", "GeoTorsionError", "Geometrization", "InvariantReport", "Triangulation",
    "apply_move", "build_from_gluings", "catalog_space", "change_framing_matrix",
    "change_framing_triangulation", "closed_form_lens", "closed_form_s3", "fuzz", "invariant",
    "invariant_with_framing", "lens_triangulation", "random_geometrization", "s3_unknot_triangulation",
    "validate_chain",
]
