import os
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES_DIR = os.path.join(BASE_DIR, "tests", "fixtures")

WORKER_THREADS = max(1, int(os.getenv("PML_THREADS", os.cpu_count() or 1)))
LOG_LEVEL = os.getenv("PML_LOG_LEVEL", "INFO")
DEFAULT_SEED = int(os.getenv("PML_SEED", "20240601"))

# Integration
DEFAULT_DT = 0.01
DEFAULT_T_END = 200.0

# Tolerances (utility units unless noted)
INDIFFERENCE_TOL = 1e-12
THRESHOLD_XTOL = 1e-12  # on p*, tighter than the 1e-9 contract
EQUILIBRIUM_TOL = 1e-12
ROOT_XTOL_FLOOR = 1e-16  # share resolution where root refinement stops
EQUILIBRIUM_GRID_N = 256

# Population simulation
DEFAULT_REVISION_RATE = 0.05

# Calibration
FIT_GRID_POINTS = 32
FIT_PASSES = 3
FIT_MIN_POINTS = 4

HYSTERESIS_JUMP = 0.5
