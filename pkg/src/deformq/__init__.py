"""Deformation quantization engine: exact star products on polynomial
Poisson structures, Kontsevich graph weights by Monte-Carlo integration,
and the algebraic identity suites tying them together."""

from deformq.graphs import (
    AdmissibleGraph,
    boundary,
    canonical_id,
    enumerate_graphs,
    is_admissible,
    parse_id,
)
from deformq.linsymp import (
    LinearDirac,
    SkewForm,
    Subspace,
    classify_subspace,
    dirac_from_pair,
    dirac_to_pair,
    restrict_dirac,
    standard_form,
    symplectic_orthogonal,
)
from deformq.operators import (
    MultiDiffOp,
    apply_op,
    build_b_gamma,
    compose_gerstenhaber,
    gerstenhaber_bracket,
    hkr,
    hochschild_d,
)
from deformq.polyalg import (
    FormalSeries,
    Polynomial,
    PolyVector,
    format_polynomial,
    jacobiator,
    parse_polynomial,
    poisson_bracket,
    schouten,
)
from deformq.starprod import (
    GaugeOperator,
    StarSeries,
    associator,
    first_order_antisym,
    gauge_inverse,
    gauge_transform,
    kontsevich_star,
    kontsevich_star_series,
    moyal,
    moyal_series,
    moyal_via_wick,
    wick_pairings,
)
from deformq.weights import (
    WeightEstimate,
    WeightTable,
    angle,
    build_weight_table,
    snap,
    weight_mc,
)

__all__ = [
    "AdmissibleGraph",
    "FormalSeries",
    "GaugeOperator",
    "LinearDirac",
    "MultiDiffOp",
    "Polynomial",
    "PolyVector",
    "SkewForm",
    "StarSeries",
    "Subspace",
    "WeightEstimate",
    "WeightTable",
    "angle",
    "apply_op",
    "associator",
    "boundary",
    "build_b_gamma",
    "build_weight_table",
    "canonical_id",
    "classify_subspace",
    "compose_gerstenhaber",
    "dirac_from_pair",
    "dirac_to_pair",
    "enumerate_graphs",
    "first_order_antisym",
    "format_polynomial",
    "gauge_inverse",
    "gauge_transform",
    "gerstenhaber_bracket",
    "hkr",
    "hochschild_d",
    "is_admissible",
    "jacobiator",
    "kontsevich_star",
    "kontsevich_star_series",
    "moyal",
    "moyal_series",
    "moyal_via_wick",
    "parse_id",
    "parse_polynomial",
    "poisson_bracket",
    "restrict_dirac",
    "schouten",
    "snap",
    "standard_form",
    "symplectic_orthogonal",
    "weight_mc",
    "wick_pairings",
]
