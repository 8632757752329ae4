"""Numerical tolerances, module-wide.

The geometry is exact mathematics; every floating-point comparison below
carries a declared budget.  Inputs feeding sign tests are normalized to
Euclidean norm 1 first, which is what makes the absolute thresholds
meaningful.
"""

import os

# Quadric membership after normalization: |Q(v) + 1| <= TOL_QUADRIC.
TOL_QUADRIC = 1e-12

# Determinant defect allowed for SL(2, R) entries.
TOL_DET = 1e-9

# Isometry validation: max entry of |m^T G m - G|.
TOL_ISOM = 1e-10

# Sign tests of the bilinear form on Euclid-normalized representatives.
TOL_CAUSAL = 1e-9

# Rank / signature decisions for 2x2 Gram matrices of normalized spans.
TOL_SIGNATURE = 1e-10

# Orientation predicate epsilon for the incremental hull, on normalized
# (unit-box) coordinates.
TOL_ORIENT = 1e-10

# Spacelikeness margin used by is_spacelike / is_nontimelike.
SPACELIKE_MARGIN = 1e-9
NONTIMELIKE_TOL = 1e-9


def numba_enabled() -> bool:
    """True when the optional numba kernels should be used.

    Set ADSCMC_NO_NUMBA=1 to force the pure-numpy fallback path.
    """
    if os.environ.get("ADSCMC_NO_NUMBA", "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True
