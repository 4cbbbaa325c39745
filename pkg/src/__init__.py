"""defcohom - exact deformation engine for invariant Dolbeault models."""

from pathlib import Path

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent

# Data directories
DATA_DIR = PROJECT_ROOT / "data"
CORPUS_DIR = DATA_DIR / "corpus"
DEFORMATIONS_DIR = DATA_DIR / "deformations"
EXPECTED_DIR = DATA_DIR / "expected"

# Bundled central fibers, in canonical order
CORPUS_MODELS = [
    "torus3",
    "iwasawa",
    "kodaira_thurston",
]

# Sampling defaults for generic Hodge numbers
DEFAULT_SEED = 0xDEF0C0DE
SEED_ENV_VAR = "DEFCOHOM_SEED"
MAX_SAMPLE_DENOMINATOR = 97
SAMPLE_RETRIES = 8

# Prefix marking the formal conjugate of a deformation parameter ("~t11" pairs with "t11")
CONJ_PREFIX = "~"

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3
