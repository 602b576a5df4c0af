import os
from pathlib import Path

# --- Core Paths ---
BASE_DIR = Path(__file__).resolve().parent
RESULTS_DIR = Path(os.getenv("RESULTS_DIR", BASE_DIR / "results"))
SCHEMA_DIR = BASE_DIR / "schemas"
RUN_REPORT_SCHEMA_FILE = SCHEMA_DIR / "run_report.schema.json"

VERSION = "0.1.0"

# --- Logging ---
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# --- Test Hooks ---
# Only the test suite flips this; it is never read from the environment or the CLI.
ENABLE_TEST_HOOKS = False

# --- Geometry Settings ---
WEISZFELD_TOL = 1e-9
WEISZFELD_MAX_ITER = 10_000
ORACLE_TOL = 1e-8
PROJECTION_TOL = 1e-9
PROJECTION_MAX_SWEEPS = 1000

# --- DP Gradient Descent Settings ---
# Doubles sigma to cover the 2/n replacement sensitivity of the mean gradient.
CONSERVATIVE_DPGD_NOISE = False
LOCALIZATION_GAMMA = 0.75
WARMUP_ITERATIONS = 500
WARMUP_RADIUS_OFFSET = 12.0
LOCALIZED_RADIUS_FACTOR = 25.0
FINETUNE_STEP_FACTOR = 50.0

# --- Cutting-Plane Settings ---
CUTTING_PLANE_TAU = 0.25
CUTTING_PLANE_C_KFT = 4.0
EXP_MECH_SCALE = 448.0
NEWTON_MAX_STEPS = 100
NEWTON_TOL = 1e-9
VOLUME_MAX_DIM = 6

# --- Inverse-Sensitivity Settings ---
SINVS_EXACT_MAX_N = 14
SINVS_MAX_DIM = 2
SINVS_MAX_NODES = 200_000

# --- Experiment Defaults ---
DEFAULT_N = 1000
DEFAULT_D = 10
DEFAULT_SWEEP_R = [1e2, 1e3, 1e4]
DEFAULT_R_FLOOR = 0.05
DEFAULT_BETA = 0.05
DEFAULT_REPS = 10
DEFAULT_EPSILON = 1.0
DEFAULT_DELTA = 1e-6
DEFAULT_SEED = 0

SYNTHETIC_CLUSTER_FRACTION = 0.9
SYNTHETIC_CLUSTER_NORM = 50.0
SYNTHETIC_CLUSTER_STD = 0.01
SYNTHETIC_OUTLIER_RADIUS = 100.0

ALGORITHMS = ["dpgd-baseline", "loc-dpgd", "loc-cutting-plane", "sinvs"]

CSV_COLUMNS = [
    'algorithm', 'R', 'rep', 'objective', 'oracle_objective',
    'ratio', 'wall_ms', 'failed', 'seed'
]
SIGNIFICANT_DIGITS = 12
