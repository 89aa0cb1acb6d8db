# config/paths.py
# Comments in English only

from __future__ import annotations

from pathlib import Path
from typing import Optional

PROJECT_ROOT: Path = Path(__file__).resolve().parent.parent

# Runtime output directory (one subdirectory per experiment run)
RESULTS_DIR: Path = PROJECT_ROOT / "results"

# Static templates directory
TEMPLATE_DIR: Path = PROJECT_ROOT / "reports" / "templates"
TEMPLATE_SUMMARY_TEX: Path = TEMPLATE_DIR / "summary_report.tex.j2"

# Example configuration files shipped with the repo
CONFIG_EXAMPLES_DIR: Path = PROJECT_ROOT / "config" / "examples"


def ensure_directories(output_dir: Optional[Path] = None) -> Path:
    """
    Create the output directory if it does not exist (idempotent). Returns it.
    """
    target = Path(output_dir) if output_dir is not None else RESULTS_DIR
    target.mkdir(parents=True, exist_ok=True)
    return target
