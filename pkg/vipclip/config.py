import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Runtime Configuration
VIPCLIP_THREADS = os.getenv("VIPCLIP_THREADS")  # integer or "auto"; config file wins
OUTPUT_DIR = os.getenv("VIPCLIP_OUTPUT_DIR", "results")

# Problem Zoo Configuration
SOLUTION_TOL = 1e-10  # ||A x* + b|| <= SOLUTION_TOL * (1 + ||b||)
CONSTANT_TOL = 1e-8  # slack allowed when certifying L, mu, ell, rho
MONOTONE_TOL = 1e-10  # lambda_min(A + A^T) floor accepted as monotone

# Oracle Configuration
MIN_ESTIMATOR_TRIALS = 1000
NOISE_CHUNK_SIZE = 10000  # draws per counter-keyed chunk in vectorised sampling
LEMMA_SE_MARGIN = 3.0  # standard errors added to Monte-Carlo ceilings

# Schedule Configuration
BK_MAX_ITERATIONS = 100
BK_REL_TOL = 1e-9
SCHEDULE_TABLE_LIMIT = 10000  # above this, schedules serialize as descriptors only

# Gap Solver Configuration
GAP_MAX_ITERATIONS = 100000
GAP_BASE_TOL = 1e-8

# Experiment Configuration
DEFAULT_N_SEEDS = 200
CURVE_POINTS = 100  # anytime-curve resolution per seed

# Tail Diagnostics Configuration
P_MR_NORMAL = 0.0035  # mild-outlier fraction of a normal sample
P_ER_NORMAL = 1.2e-6  # extreme-outlier fraction of a normal sample
MILD_LAMBDA = 1.5
EXTREME_LAMBDA = 3.0
MIN_TAIL_SAMPLES = 100

# Output Configuration
CSV_SIG_DIGITS = 17

# Logging configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
