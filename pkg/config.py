"""
Configuration file containing all numerical defaults of the toolkit
"""
import os

from dotenv import load_dotenv

load_dotenv()

# Circle grid
GRID_M = int(os.getenv("SZEGO_GRID_M", 4096))
GRID_OFFSET = float(os.getenv("SZEGO_GRID_OFFSET", 0.5))
DELTA_MIN = float(os.getenv("SZEGO_DELTA_MIN", 1e-8))

# Refinement scan (class verdicts for log-singular integrands)
SCAN_LEVELS = int(os.getenv("SZEGO_SCAN_LEVELS", 3))
SCAN_TOLERANCE = float(os.getenv("SZEGO_SCAN_TOLERANCE", 1e-6))
SCAN_RATIO_MAX = float(os.getenv("SZEGO_SCAN_RATIO_MAX", 0.9))
# doubling continues past SCAN_LEVELS until the Cauchy difference drops below SCAN_TARGET
SCAN_TARGET = float(os.getenv("SZEGO_SCAN_TARGET", 1e-12))
SCAN_MAX_LEVELS = int(os.getenv("SZEGO_SCAN_MAX_LEVELS", 8))
SCAN_M_CAP = 2 ** 22

# Guard for log of vanishing table densities
LOG_FLOOR = 1e-300

# Verblunsky extraction and CMV traces
LEVINSON_CAP = int(os.getenv("SZEGO_LEVINSON_CAP", 200))
LEVINSON_ALPHA_LIMIT = 1.0 - 1e-12
# |∫|φₙ|²dσ - 1| allowed for one recurrence step of the extraction
EXTRACTION_DRIFT_MAX = float(os.getenv("SZEGO_EXTRACTION_DRIFT_MAX", 1e-8))
CHAR_POLY_MAX_N = 12
TRACE_STABILITY_TOL = 1e-12

# Outer functions
EXTRACTION_RESIDUAL_MAX = float(os.getenv("SZEGO_EXTRACTION_RESIDUAL_MAX", 1e-6))
REALITY_TOLERANCE = 1e-8
BOUNDARY_DELTA_NODES = 10  # near-boundary radius r = 1 - BOUNDARY_DELTA_NODES / M

# Sum rules
C1_SAFETY = 0.99
SUMRULE_TOLERANCE = float(os.getenv("SZEGO_SUMRULE_TOLERANCE", 1e-8))
MONOTONE_SLACK = 1e-12
SEMICONTINUITY_SLACK = 1e-6

# Asymptotics
L2_IDENTITY_TOLERANCE = float(os.getenv("SZEGO_L2_IDENTITY_TOLERANCE", 2e-3))
BOUND_RINGS = (0.9, 0.99, 0.999)
BOUND_GROWTH_MAX = 0.05
BS_FLOOR = 1e-6

# Variational principle
JENSEN_SLACK = 1e-9
WITNESS_SLACK = 1e-3
# without exact α, convergence checks compare n_max against this degree
TREND_START = 10
CANDIDATE_COUNT = int(os.getenv("SZEGO_CANDIDATE_COUNT", 200))
CANDIDATE_MAX_DEGREE = 6

# Experiment runner
N_MAX_LIMIT = 1000
DEFAULT_N_MAX = int(os.getenv("SZEGO_N_MAX", 200))
DEFAULT_SEED = int(os.getenv("SZEGO_SEED", 0))
DEFAULT_WORKERS = int(os.getenv("SZEGO_WORKERS", 1))
OUTPUT_DIR = os.getenv("SZEGO_OUTPUT_DIR", "output")
REPORT_FLOAT_FORMAT = "%.12e"
LOG_LEVEL = os.getenv("SZEGO_LOG_LEVEL", "INFO")
