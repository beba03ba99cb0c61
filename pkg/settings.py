"""
Toolkit Settings
================
Shared tolerances and grid defaults for the QMF toolkit.

- Every operation takes these as keyword defaults; the command line
  overrides the user-facing ones through long flags.
- No environment variables are read.
"""

# ============================================================================
# POLYNOMIAL ARITHMETIC
# ============================================================================
CANONICAL_TOL = 1e-13        # relative size of a stripped leading coefficient
GCD_TOL = 1e-8               # remainder threshold, relative to the larger input
MULTIPLICITY_TOL = 1e-7      # Taylor coefficient threshold at a repeated root
ROOT_RESIDUAL_TOL = 1e-9     # re-expansion check on computed roots
CONJUGATE_TOL = 1e-9         # imaginary part treated as zero / pairing distance
CLUSTER_TOL = 1e-6           # roots closer than this are merged
NEWTON_STEPS = 8
PALINDROME_TOL = 1e-10
SQUARE_TOL = 1e-8            # residual allowed for a perfect-square root

# ============================================================================
# FILTER DESIGN
# ============================================================================
PREIMAGE_TOL = 1e-9          # forbidden values and pair conditions on lambda
ALLPASS_TOL = 1e-10
ALLPASS_GRID = 64

# ============================================================================
# VERIFICATION
# ============================================================================
ANALYSIS_GRID = 4096
SYM_GRID = 256
SYM_TOL = 1e-9
QMF_TOL = 1e-10
NORMALIZATION_TOL = 1e-12
CIRCLE_TOL = 1e-7            # |abs(z) - 1| for a zero to count as on the circle
ANGLE_MATCH_TOL = 1e-7
IMAGINARY_POLE_TOL = 1e-8
COPRIME_TOL = 1e-8
COHEN_MAX_CYCLE = 16

# ============================================================================
# FIR CASCADE
# ============================================================================
CASCADE_GRID = 8192
CASCADE_MAX_ATTEMPTS = 20
DEFECT_GRID = 4096

# ============================================================================
# SAMPLING AND OUTPUT
# ============================================================================
FREQ_POINTS = 1024
CASCADE_LEVELS = 8
IMAG_RESPONSE_TOL = 1e-10
DOCUMENT_VERSION = 1
CSV_FLOAT_FORMAT = "%.17g"
