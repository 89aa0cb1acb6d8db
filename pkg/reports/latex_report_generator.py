# reports/latex_report_generator.py
# Comments in English only
from __future__ import annotations

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from config.paths import TEMPLATE_SUMMARY_TEX
from reports.table_export import latex_escape, dataframe_to_latex

logger = logging.getLogger(__name__)


class LatexReportGenerator:
    """Render an experiment report into report.tex."""

    def __init__(self, template_path: str | Path | None = None) -> None:
        self.template_path = Path(template_path) if template_path is not None else TEMPLATE_SUMMARY_TEX

    # ------------------------------------------------------------------
    # Template and IO
    # ------------------------------------------------------------------

    def _environment(self) -> Environment:
        # LaTeX-friendly delimiters so braces in the template stay literal
        return Environment(
            loader=FileSystemLoader(str(self.template_path.parent)),
            block_start_string="((*",
            block_end_string="*))",
            variable_start_string="(((",
            variable_end_string=")))",
            comment_start_string="((=",
            comment_end_string="=))",
            undefined=StrictUndefined,
            autoescape=False,
            trim_blocks=True,
            lstrip_blocks=True,
        )

    def build_context(self, report: Any) -> Dict[str, Any]:
        checks = [
            {
                "name": latex_escape(c.name),
                "status": "pass" if c.passed else ("fail" if c.enforced else "not enforced"),
                "detail": latex_escape(c.detail),
            }
            for c in report.checks
        ]
        artifacts = [latex_escape(Path(p).name) for p in report.artifacts]
        return {
            "experiment": latex_escape(report.experiment),
            "generated": datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M UTC"),
            "summary_table": dataframe_to_latex(report.summary),
            "checks": checks,
            "passed": report.passed,
            "artifacts": artifacts,
            "parameters": [(latex_escape(k), latex_escape(str(v))) for k, v in report.parameters.items()],
        }

    def render(self, context: Dict[str, Any]) -> str:
        if self.template_path.exists() is False:
            raise FileNotFoundError(str(self.template_path))
        template = self._environment().get_template(self.template_path.name)
        return template.render(**context)

    def generate(self, report: Any, output_dir: str | Path) -> Path:
        """Write report.tex next to the experiment's other artifacts. Returns its path."""
        out_dir = Path(output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        tex_path = out_dir / "report.tex"
        tex_path.write_text(self.render(self.build_context(report)), encoding="utf-8")
        logger.info("wrote %s", tex_path)
        return tex_path

