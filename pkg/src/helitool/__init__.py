"""Helicity, linking and flux of divergence-free fields on tubular domains."""

__version__ = "0.1.0"

from .estimators import BiotSavartTransformer, HelicityEstimator, LinkingNumber
from .fields import (
    DiffeoWithJacobian,
    VectorField,
    dehn_twist_map,
    fd_curl,
    fd_divergence,
    flux,
    identity_map,
    longitudinal_field,
    piecewise_field,
    pushforward_density_field,
)
from .geometry import (
    Ball,
    DisjointPair,
    ParametricLoop,
    SolidTorus,
    ToroidalCoords,
    cartesian_to_toroidal,
    hopf_pair,
    meridian_disk,
    toroidal_to_cartesian,
    torus_knot_loop,
)
from .helicity import (
    biot_savart,
    biot_savart_field,
    bs_selfadjoint_defect,
    cross_helicity,
    helicity,
    helicity_4d,
    helicity_6d,
    helicity_arnold,
)
from .integrate import Estimate, MCConfig, mc_pair, mc_volume
from .linking import asymptotic_linking, gauss_linking, linking_integer, signed_crossing_linking
from .topology import (
    BoundaryHomologyData,
    cross_helicity_product,
    dehn_twist_data,
    delta_helicity,
    is_helicity_preserving,
    knm_rules,
    linked_tube_helicity,
    residual_helicity,
    validate_boundary_matrix,
)
