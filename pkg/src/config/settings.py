# src/config/settings.py
import os
from dotenv import load_dotenv

load_dotenv()

# --- Environment Variables ---
DEFAULT_SEED = int(os.environ.get("QSS6_SEED", "0"))
LOG_DIR = os.environ.get("QSS6_LOG_DIR", "log")
LOG_LEVEL = os.environ.get("QSS6_LOG_LEVEL", "INFO")
DEFAULT_WORKERS = int(os.environ.get("QSS6_WORKERS", "1"))

# --- Protocol Defaults ---
DEFAULT_CHECK_FRACTION_HOP = 0.1
DEFAULT_CHECK_FRACTION_BOB = 0.1
DEFAULT_CHECK_FRACTION_FINAL = 0.05
# six-state one-way security threshold used as the abort level
DEFAULT_ERROR_THRESHOLD = 0.127

# --- Numerical Tolerances ---
EXACT_TOL = 1e-12
PHASE_TOL = 1e-10
BOUNDS_TOL = 1e-9

# --- Bounds Engine ---
DEFAULT_RESOLUTION = 100
MIN_RESOLUTION = 50
DEFAULT_REFINEMENT = 60

# --- Reports ---
REPORT_SCHEMA_VERSION = "1.0"
