"""Shared configuration values for lytrans."""

from __future__ import annotations

import math
from typing import Dict, Tuple

TWO_PI = 2.0 * math.pi

# ----------------------------------------------------------------------
# Dense kernel tolerances (fixed, never configurable)
# ----------------------------------------------------------------------

# Hermitian symmetry check relative to the largest entry.
HERMITIAN_TOL = 1e-12
# Cholesky pivots at or below order * PIVOT_TOL * max diagonal are rejected.
PIVOT_TOL = 1e-14
# Cyclic Jacobi sweep budget and off-diagonal stopping ratio.
JACOBI_SWEEPS = 50
JACOBI_TOL = 1e-13
MAX_ORDER = 64

# ----------------------------------------------------------------------
# Operators
# ----------------------------------------------------------------------

# Any coordinate magnitude above this is reported as Overflow (orbit norm = +inf).
OVERFLOW_LIMIT = 1e300
LOG_OVERFLOW = math.log(OVERFLOW_LIMIT)
# Kernel vectors are materialised up to the first coordinate below this size.
EIGEN_TRUNCATION = 1e-18
# EigenInside search heuristics: eigenvalues |nu| below the first margin
# (any |nu| < 1 would qualify), eigenvector ratios within the second fraction
# of the shift's disk.
EIGEN_REGION_MARGIN = 0.9
EIGEN_RADIUS_MARGIN = 0.95
# Points per axis of the candidate grid that EigenInside samples from.
EIGEN_GRID_POINTS = 41
# Set-geometry tolerance used by spectrum models and the analytic filters.
MODEL_TOL = 1e-9
# Tolerance for "exactly unimodular" / "exactly zero" parameters read from specs.
EXACT_TOL = 1e-12
MAX_SEQUENCE_POWER = 10**6
MAX_SAMPLED_POWER = 10**4
# Terms kept by a non-terminating Neumann expansion.
NEUMANN_MAX_TERMS = 10**4
# Norm bound for the Kalisch operator: identity part plus the Volterra part.
KALISCH_NORM_BOUND = 5.0

# ----------------------------------------------------------------------
# Kalisch calculus and claim certificates
# ----------------------------------------------------------------------

MIN_PANELS = 256
DEFAULT_PANELS = 4096
DIVERGENCE_THRESHOLD = 1e6
# Below this, a still-growing sequence means the horizon was too short.
GROWTH_FLOOR = 1e3
CLAIM_HORIZON = 2000
TANGENT_TOL = 1e-12
# Random step functions used as claim witnesses.
CLAIM_PIECES = 6

# ----------------------------------------------------------------------
# Dynamics
# ----------------------------------------------------------------------

DEFAULT_HORIZON = 2048
DIP_EPSILON = 1e-4
# Every n up to this is sampled; beyond it WINDOW_SAMPLES per dyadic window.
DENSE_PREFIX = 64
WINDOW_SAMPLES = 8
MAX_HORIZON = 2**16
# Gram entries are squares of orbit norms, so cap the norms before squaring.
GRAM_NORM_LIMIT = 1e150

# ----------------------------------------------------------------------
# Classifier
# ----------------------------------------------------------------------

DEFAULT_LEVELS = 14
DEFAULT_TRIALS = 20
DEFAULT_SEED = 0
PEAK_THRESHOLD = 1e3
BOUNDED_PEAK = 1e2
REPLAY_TOL = 1e-9
# Smallest nested-frame level used by the eigenframe alignment search.
FRAME_MIN_LEVEL = 3
# Lattice subdivisions of one frame period probed for generalized eigenvectors.
FRAME_LATTICE = 16
# Consecutive levels that must deepen before a certificate is issued.
DEEPENING_RUN = 3

# ----------------------------------------------------------------------
# Scanner and rendering
# ----------------------------------------------------------------------

MAX_RESOLUTION = 401
SCAN_MARGIN = 0.25
BOUNDARY_BAND = 0.05

VERDICT_COLORS: Dict[str, Tuple[int, int, int]] = {
    "C": (220, 40, 40),     # chaotic
    "N": (25, 25, 112),     # not chaotic
    "U": (200, 200, 60),    # undetermined
}
OVERLAY_COLOR: Tuple[int, int, int] = (255, 255, 255)
