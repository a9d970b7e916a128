"""Poisson-Lie T-dual sigma models on quasitriangular Lie bialgebras.

The package builds finite-dimensional Lie bialgebras from structure
constants, assembles the double Lie algebra with its invariant pairing,
constructs the two-parameter family of orthogonal splittings, and
integrates both the loop-field flow on the double and its point-particle
reduction, verifying duality and conservation laws numerically.
"""

__version__ = "0.1.0"

from .liecore import (
    LieAlgebra,
    AlgebraVector,
    LinearOperator,
    BilinearForm,
    bracket,
    jacobi_residual,
    antisymmetry_residual,
    ad_operator,
    pair,
)
from .bialgebra import (
    TwoTensor,
    QuasiBialgebra,
    DoubleAlgebra,
    cybe_residual,
    cobracket,
    dual_algebra,
    build_double,
    double_iso_lr,
)
from .models import ModelPreset, make_sl2r, make_su2, make_preset, PRESET_NAMES
from .duality import SplittingData, GraphCoordinate, splitting, graph_at

__all__ = [
    "LieAlgebra",
    "AlgebraVector",
    "LinearOperator",
    "BilinearForm",
    "bracket",
    "jacobi_residual",
    "antisymmetry_residual",
    "ad_operator",
    "pair",
    "TwoTensor",
    "QuasiBialgebra",
    "DoubleAlgebra",
    "cybe_residual",
    "cobracket",
    "dual_algebra",
    "build_double",
    "double_iso_lr",
    "ModelPreset",
    "make_sl2r",
    "make_su2",
    "make_preset",
    "PRESET_NAMES",
    "SplittingData",
    "GraphCoordinate",
    "splitting",
    "graph_at",
]
