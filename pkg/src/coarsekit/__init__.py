"""Exact dyadic complexes, midpoint subdivisions, cone triangulations,
entourage algebra on finite nets, radialization homotopies and simplicial
approximation, with a reporting CLI."""

from .geom import (
    GeoComplex,
    GeomError,
    build_complex,
    diameter,
    frac,
    frac_sqrt,
    validate,
    volume_sq,
)
from .subdivide import (
    canonical_class_count,
    canonical_counts_by_depth,
    canonical_product,
    iterate_subdivision,
    standard_product_subdivision,
    standard_subdivision,
)
from .cone import (
    ConeModel,
    PLMap,
    build_cone_triangulation,
    cone_level,
    cross_section,
    edge_statistics,
    radial_map,
)
from .coarse import (
    CoarseError,
    CylinderNet,
    Entourage,
    FiniteNet,
    SampledMap,
    concat_homotopies,
    control_profile,
    cylinder,
    entourage,
    euclidean_net,
    flip,
    grid_net,
    normalize_homotopy,
    z_operator,
)
from .radialize import (
    ConeMap,
    ConeSample,
    g_slice_report,
    make_sample,
    pad_basepoint,
    psi_map,
    radialization_bundle,
    slice_lipschitz_check,
)
from .approx import (
    ApproxError,
    simplicial_approximation,
    star_cover_lebesgue,
    straight_line_homotopy,
    stretch_map,
)

__version__ = "0.1.0"

__all__ = [
    "GeoComplex",
    "GeomError",
    "build_complex",
    "diameter",
    "frac",
    "frac_sqrt",
    "validate",
    "volume_sq",
    "canonical_class_count",
    "canonical_counts_by_depth",
    "canonical_product",
    "iterate_subdivision",
    "standard_product_subdivision",
    "standard_subdivision",
    "ConeModel",
    "PLMap",
    "build_cone_triangulation",
    "cone_level",
    "cross_section",
    "edge_statistics",
    "radial_map",
    "CoarseError",
    "CylinderNet",
    "Entourage",
    "FiniteNet",
    "SampledMap",
    "concat_homotopies",
    "control_profile",
    "cylinder",
    "entourage",
    "euclidean_net",
    "flip",
    "grid_net",
    "normalize_homotopy",
    "z_operator",
    "ConeMap",
    "ConeSample",
    "g_slice_report",
    "make_sample",
    "pad_basepoint",
    "psi_map",
    "radialization_bundle",
    "slice_lipschitz_check",
    "ApproxError",
    "simplicial_approximation",
    "star_cover_lebesgue",
    "straight_line_homotopy",
    "stretch_map",
    "__version__",
]
