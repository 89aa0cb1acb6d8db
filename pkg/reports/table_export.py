# reports/table_export.py
# Comments in English only

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, List, Optional, Sequence

import pandas as pd

logger = logging.getLogger(__name__)


def format_number(value: Any, digits: int = 6) -> str:
    """Compact numeric text for tables: integers stay integers, NaN becomes '--'."""
    try:
        fv = float(value)
    except (TypeError, ValueError):
        return str(value)
    if math.isnan(fv):
        return "--"
    if math.isinf(fv):
        return "inf" if fv > 0 else "-inf"
    if fv == int(fv) and abs(fv) < 1e12:
        return str(int(fv))
    return f"{fv:.{digits}g}"


def write_csv(df: pd.DataFrame, path: str | Path) -> Path:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    # fixed float format keeps reruns byte-identical across platforms
    df.to_csv(out_path, index=False, float_format="%.10g")
    logger.info("wrote %s (%d rows)", out_path, len(df))
    return out_path


def write_excel(df: pd.DataFrame, path: str | Path, sheet_name: str = "summary") -> Path:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    df.to_excel(out_path, sheet_name=sheet_name, index=False, engine="openpyxl")
    logger.info("wrote %s", out_path)
    return out_path


def latex_escape(text: str) -> str:
    replacements = {
        "\\": r"\textbackslash{}",
        "&": r"\&",
        "%": r"\%",
        "$": r"\$",
        "#": r"\#",
        "_": r"\_",
        "{": r"\{",
        "}": r"\}",
        "~": r"\textasciitilde{}",
        "^": r"\textasciicircum{}",
    }
    # one pass, so the braces of \textbackslash{} are not escaped again
    return "".join(replacements.get(ch, ch) for ch in str(text))


def dataframe_to_latex(
    df: pd.DataFrame,
    columns: Optional[Sequence[str]] = None,
    digits: int = 6,
    highlight_column: Optional[str] = None,
) -> str:
    """booktabs tabular; rows whose ``highlight_column`` is False are colored red."""
    cols = list(columns) if columns is not None else list(df.columns)
    column_format = "l" + "r" * (len(cols) - 1)

    latex_lines: List[str] = []
    latex_lines.append(f"\\begin{{tabular}}{{{column_format}}}")
    latex_lines.append("\\toprule")
    latex_lines.append(" & ".join(r"\textbf{" + latex_escape(c) + "}" for c in cols) + r" \\")
    latex_lines.append("\\midrule")

    for _, row in df.iterrows():
        cells = [latex_escape(format_number(row[c], digits)) for c in cols]
        if highlight_column is not None and bool(row[highlight_column]) is False:
            cells = [r"\textcolor{red}{" + cell + "}" for cell in cells]
        latex_lines.append(" & ".join(cells) + r" \\")

    latex_lines.append("\\bottomrule")
    latex_lines.append("\\end{tabular}")
    return "\n".join(latex_lines)


def to_markdown(df: pd.DataFrame, digits: int = 6) -> str:
    """Summary table for the terminal (tabulate via DataFrame.to_markdown)."""
    shown = df.copy()
    for col in shown.columns:
        if pd.api.types.is_float_dtype(shown[col]):
            shown[col] = shown[col].map(lambda v: format_number(v, digits))
    return shown.to_markdown(index=False)
