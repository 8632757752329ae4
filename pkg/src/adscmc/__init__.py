"""adscmc: computational 3D anti-de Sitter geometry.

Causal predicates and projective charts, achronal graph surfaces, convex
hulls of boundary curves and their black domains, Lorentzian epsilon
neighborhoods and smooth uniformly curved barrier pairs, the exact
torus-universe CMC foliation, and a mean-curvature relaxation solver for
maximal surfaces between barriers.
"""

from .core import (
    LinearPoint,
    ProjPoint,
    SL2Matrix,
    Isometry,
    q_eval,
    b_eval,
    to_abcd,
    from_abcd,
    apply_isometry,
    dual_surface,
)

__all__ = [
    "LinearPoint",
    "ProjPoint",
    "SL2Matrix",
    "Isometry",
    "q_eval",
    "b_eval",
    "to_abcd",
    "from_abcd",
    "apply_isometry",
    "dual_surface",
]

__version__ = "0.1.0"
