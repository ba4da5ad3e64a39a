"""Left-curtain martingale coupling toolkit.

Builds the lifted left-curtain coupling of two atomic measures in convex
order through exact piecewise-linear potential geometry: shadow measures,
irreducible decomposition, destination functions with their quantile
table, plus independent brute-force oracles and theorem-level verifiers.
"""

from .curtain import (
    BreakpointOverflow,
    CurtainTable,
    ExcessPotential,
    InternalGeometry,
    LiftedCoupling,
    PointConstruction,
    StepMap,
    TableInterval,
    build_curtain,
    coupling,
    curve_rows,
    excess_potential,
    point_construction,
    sample_y,
    sample_y_many,
    td_tu,
)
from .decompose import DecomposeError, Decomposition, IrreducibleComponent, decompose
from .measures import (
    DiscreteMeasure,
    Order,
    OrderResult,
    QuantileFunction,
    check_convex_order,
    measure_from_json,
    measure_to_json,
    put_potential,
    quantile_left,
    quantize_density,
    random_cx_pair,
    restricted_measure,
)
from .oracle import Infeasible, NegativeKernel, curtain_incremental, joint_tv, shadow_lp, simplex_solve
from .pwl import (
    AffineLine,
    NonConvexPotential,
    PiecewiseLinear,
    chord,
    contact_points,
    convex_hull,
    measure_from_potential,
    one_sided_slopes,
    ray,
)
from .shadow import ShadowInvalid, shadow, shadow_of_restriction
from .verify import (
    VerificationReport,
    destination_cdf,
    verify_all,
    verify_coupling,
    verify_left_monotone,
    verify_marginal_identity,
    verify_shadow_consistency,
)

__version__ = "0.1.0"

__all__ = [
    "AffineLine",
    "BreakpointOverflow",
    "CurtainTable",
    "DecomposeError",
    "Decomposition",
    "DiscreteMeasure",
    "ExcessPotential",
    "Infeasible",
    "InternalGeometry",
    "IrreducibleComponent",
    "LiftedCoupling",
    "NegativeKernel",
    "NonConvexPotential",
    "Order",
    "OrderResult",
    "PiecewiseLinear",
    "PointConstruction",
    "QuantileFunction",
    "ShadowInvalid",
    "StepMap",
    "TableInterval",
    "VerificationReport",
    "build_curtain",
    "check_convex_order",
    "chord",
    "contact_points",
    "convex_hull",
    "coupling",
    "curtain_incremental",
    "curve_rows",
    "decompose",
    "destination_cdf",
    "excess_potential",
    "joint_tv",
    "measure_from_json",
    "measure_from_potential",
    "measure_to_json",
    "one_sided_slopes",
    "point_construction",
    "put_potential",
    "quantile_left",
    "quantize_density",
    "random_cx_pair",
    "ray",
    "restricted_measure",
    "sample_y",
    "sample_y_many",
    "shadow",
    "shadow_lp",
    "shadow_of_restriction",
    "simplex_solve",
    "td_tu",
    "verify_all",
    "verify_coupling",
    "verify_left_monotone",
    "verify_marginal_identity",
    "verify_shadow_consistency",
]
