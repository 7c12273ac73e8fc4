# ==========================================
# SIGNAL BENCH – SETTINGS
# ==========================================
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# ------------------------------------------
# Configuration (env-first)
# ------------------------------------------
PROJECT_ROOT = Path(__file__).resolve().parents[1]

OUTPUT_DIR_ENV = "SIGNAL_BENCH_OUTPUT_DIR"
OUTPUT_DIR = os.getenv(OUTPUT_DIR_ENV, "results")
SCENARIO_DIR = os.getenv("SIGNAL_BENCH_SCENARIO_DIR", str(PROJECT_ROOT / "scenarios"))
DEFAULT_RULEBASE = os.getenv("SIGNAL_BENCH_RULEBASE") or None
WORKERS = max(1, int(os.getenv("SIGNAL_BENCH_WORKERS", 1)))

SCENARIO_SUFFIX = ".scn"
