# -*- coding: utf-8 -*-
"""
*tubespectra* settings.
"""

import os

# -----------------------------------------------------------------------------
# general purpose constants
APP_ROOT = os.path.dirname(os.path.abspath(__file__))

TUBESPECTRA_LOG_ID = 'TUBESPECTRA'
TUBESPECTRA_ENV_THREADS = 'TUBESPECTRA_THREADS'
TUBESPECTRA_DEFAULT_THREADS = 1

# all floating point output (CSV, summaries) is printed with 12 significant
# digits
TUBESPECTRA_FLOAT_FORMAT = '%.12g'

# -----------------------------------------------------------------------------
# numerics
NUMERICS_EIGEN_TOL = 1e-9
# iteration cap per Lanczos pass: ITER_CAP_FACTOR * count * sqrt(n)
NUMERICS_ITER_CAP_FACTOR = 50
NUMERICS_DENSE_FALLBACK_MAX = 300
NUMERICS_LANCZOS_SEED = 271828
NUMERICS_LANCZOS_CHECK_INTERVAL = 5
NUMERICS_LANCZOS_MAX_PASSES = 8
NUMERICS_LANCZOS_BLOCK = 64
NUMERICS_RATE_MIN_POINTS = 3

# -----------------------------------------------------------------------------
# geometry
GEOMETRY_VALIDATION_SAMPLES = 4096
GEOMETRY_REFINEMENT_SAMPLES = 64
GEOMETRY_FD_STEP = 1e-6
# range of |s| used by the contact fits near the maximum of h
GEOMETRY_CONTACT_RANGE = (1e-3, 0.1)
GEOMETRY_QUADRATIC_TOL = 0.05
GEOMETRY_UNBOUNDED_HALFWIDTH = 50.
GEOMETRY_LIMSUP_SAMPLES = (1e2, 1e3, 1e4, 1e5, 1e6)
GEOMETRY_CURVATURE_FLOOR = 1e-10

# -----------------------------------------------------------------------------
# cross section
SECTION_N_MIN = 16
SECTION_BOUNDARY_DEFAULT = 'ghost'
SECTION_BOUNDARY_CHOICES = ('ghost', 'omission')
# smallest admissible fraction of a grid link cut by the boundary
SECTION_THETA_MIN = 1e-3

# -----------------------------------------------------------------------------
# effective one-dimensional operator
EFFECTIVE_ZETA_GUARD = 0.1
EFFECTIVE_N_MIN = 64
# grid rule: ds <= sqrt(eps) / EFFECTIVE_RESOLUTION
EFFECTIVE_RESOLUTION = 20
# warning threshold: ds > sqrt(eps) / EFFECTIVE_COARSE
EFFECTIVE_COARSE = 10
EFFECTIVE_WINDOW_CAP = 50.
EFFECTIVE_WINDOW_START = 0.05
EFFECTIVE_WINDOW_GROWTH = 1.02
EFFECTIVE_WINDOW_MARGIN = 10.
EFFECTIVE_TAIL_TOL = 1e-8
EFFECTIVE_BC_CHOICES = ('dirichlet', 'neumann')

# -----------------------------------------------------------------------------
# straightened three-dimensional forms
# smallest number of s-nodes; raised to keep ds <= sqrt(eps_min) /
# TUBE3D_RESOLUTION over a sweep
TUBE3D_N_S = 96
TUBE3D_RESOLUTION = EFFECTIVE_COARSE
TUBE3D_N_Y = 24
TUBE3D_REFINEMENT_RATIO = 0.75
TUBE3D_GRID_LIMITED_FRACTION = 0.3

# -----------------------------------------------------------------------------
# harness
HARNESS_DEFAULT_EPSILONS = (0.2, 0.1, 0.05, 0.025, 0.0125)
HARNESS_UNBOUNDED_EPSILONS = (0.05, 0.025, 0.0125, 0.00625)
HARNESS_DEFAULT_J_MAX = 2
HARNESS_STABILITY_TOL = 1e-6
# window margin of the essential spectrum check
HARNESS_ESSENTIAL_WINDOW_MARGIN = 40.
# errors below this floor are flagged converged-below-tolerance
HARNESS_ERROR_FLOOR = 1e-10
HARNESS_CSV_COLUMNS = ('epsilon', 'j', 'scaled_eigenvalue', 'mu_j',
                       'abs_error', 'grid_n', 'window_L')
HARNESS_ESSENTIAL_CSV_COLUMNS = ('epsilon', 'threshold', 'l0', 'l0_doubled',
                                 'stability', 'certified_count', 'window_L')
HARNESS_REPORT_FORMATS = ('csv', 'json')
