"""Geometrically continuous multipatch caps and smooth iso-geometric elements.

Construct configurations of tensor-product Bezier patches that join with
geometric continuity around a central vertex where any number n >= 3 of
patches meet, verify numerically that fields and geometries drawn from one
smoothness space compose into functions that are classically smooth across
the patch interfaces, and solve small PDE problems over the resulting basis.
"""

from .errors import (
    ContractError,
    DegenerateSpaceError,
    DomainError,
    FileFormatError,
    FoldError,
    GsmoothError,
    InversionError,
    OverlapError,
    SamplingError,
    SingularJacobianError,
    UnsupportedOrderError,
)
from .galerkin import (
    DiscreteProblem,
    SpaceMember,
    assemble,
    domain_area,
    l2_error,
    l2_project,
    load_vector,
    solve_reaction,
)
from .gluing import (
    Reparameterization,
    SmoothnessReport,
    check_gk,
    enforce_gk,
    standard_repar,
)
from .io import read_complex, report_to_csv, write_complex
from .isogeo import (
    IsoGeoElement,
    crosscheck_fd,
    eval_element,
    invert_map,
    lemma_check,
    make_elements,
)
from .jets import (
    MAX_ORDER,
    Jet,
    jet_compose,
    jet_distance,
    jet_extract,
    jet_invert,
    multi_indices,
)
from .patches import EdgeId, TensorPatch
from .spaces import (
    EdgeRecord,
    GSmoothSpace,
    PatchComplex,
    assemble_constraints,
    build_complex,
    build_gsmooth_space,
    make_geometry,
    regular_layout_nets,
    sample_field,
)

__version__ = "0.1.0"

__all__ = [
    "ContractError", "DegenerateSpaceError", "DomainError", "FileFormatError",
    "FoldError", "GsmoothError", "InversionError", "OverlapError",
    "SamplingError", "SingularJacobianError", "UnsupportedOrderError",
    "DiscreteProblem", "SpaceMember", "assemble", "domain_area", "l2_error",
    "l2_project", "load_vector", "solve_reaction",
    "Reparameterization", "SmoothnessReport", "check_gk", "enforce_gk",
    "standard_repar",
    "read_complex", "report_to_csv", "write_complex",
    "IsoGeoElement", "crosscheck_fd", "eval_element", "invert_map",
    "lemma_check", "make_elements",
    "MAX_ORDER", "Jet", "jet_compose", "jet_distance", "jet_extract",
    "jet_invert", "multi_indices",
    "EdgeId", "TensorPatch",
    "EdgeRecord", "GSmoothSpace", "PatchComplex", "assemble_constraints",
    "build_complex", "build_gsmooth_space", "make_geometry",
    "regular_layout_nets", "sample_field",
    "__version__",
]
