"""Filesystem anchors for shipped assets and the filter cache.

Importing this module is side-effect free; the cache directory is created
lazily by ``ensure_cache_dir()``.
"""

import os
from pathlib import Path

# esverify/paths.py -> esverify/ -> <repo root>
PROJECT_ROOT = Path(__file__).resolve().parent.parent
CONFIGS_DIR = PROJECT_ROOT / "configs"
DEFAULT_CONFIG_PATH = CONFIGS_DIR / "default.yml"

# Computing ~600 filters takes minutes; keep them between runs. Relocatable
# for read-only installs.
CACHE_DIR = Path(os.environ.get("ESVERIFY_CACHE_DIR", PROJECT_ROOT / ".esverify-cache"))
DEFAULT_FILTERS_PATH = CACHE_DIR / "filters.txt"


def ensure_cache_dir() -> Path:
    CACHE_DIR.mkdir(parents=True, exist_ok=True)
    return CACHE_DIR
