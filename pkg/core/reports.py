"""
Report Writer

Builds versioned, machine-readable reports for every stage. JSON output is
deterministic (sorted keys, fixed indentation, trailing newline, no
timestamps) so reports can be compared byte-for-byte.
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd
import yaml

from core.errors import ToolkitIOError

SCHEMA_VERSION = "1.0"
TOOL_VERSION = "0.1.0"


def build_report(kind: str, body: Dict[str, Any], seed: Optional[int] = None) -> Dict[str, Any]:
    """
    Wrap a report body with the common header

    Args:
        kind: Report type, e.g. "filter-stage" or "wer"
        body: Report payload
        seed: Seed used when the stage involved randomness

    Returns:
        Report dictionary
    """
    report: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "kind": kind,
    }
    if seed is not None:
        report["seed"] = seed
    report.update(body)
    return report


def dumps_report(report: Dict[str, Any]) -> str:
    """Canonical JSON text of a report, newline-terminated"""
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_report(
    report: Dict[str, Any],
    output_path: Union[str, Path],
    format: str = "json"
) -> Path:
    """
    Save report to file

    Args:
        report: Report dictionary
        output_path: Path to save report
        format: Output format ('json' or 'yaml')

    Returns:
        Path to saved report file
    """
    output_path = Path(output_path)
    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        if format == "json":
            with open(output_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(dumps_report(report))
        elif format == "yaml":
            with open(output_path, "w", encoding="utf-8", newline="\n") as f:
                yaml.safe_dump(report, f, allow_unicode=True, default_flow_style=False, sort_keys=True)
        else:
            raise ValueError(f"Unsupported report format: {format}")
    except OSError as e:
        raise ToolkitIOError(output_path, e.strerror or str(e))

    return output_path


def load_report(report_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load report from file

    Args:
        report_path: Path to report file

    Returns:
        Report dictionary
    """
    report_path = Path(report_path)
    if not report_path.exists():
        raise ToolkitIOError(report_path, "report file not found")

    suffix = report_path.suffix.lower()

    if suffix == ".json":
        with open(report_path, "r", encoding="utf-8") as f:
            return json.load(f)
    elif suffix in [".yaml", ".yml"]:
        with open(report_path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f)
    else:
        raise ValueError(f"Unsupported report format: {suffix}")


def table_frame(rows: Iterable[Sequence[Any]], columns: List[str]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=columns)


def table_to_csv(frame: pd.DataFrame, float_format: str = "%.4f") -> str:
    """CSV text with LF line endings and fixed float precision"""
    return frame.to_csv(index=False, float_format=float_format, lineterminator="\n")


def save_table(
    frame: pd.DataFrame,
    output_path: Union[str, Path],
    float_format: str = "%.4f",
) -> Path:
    """Write a CSV table (factor,wer / lang,f1 / perplexities)"""
    output_path = Path(output_path)
    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(table_to_csv(frame, float_format), encoding="utf-8")
    except OSError as e:
        raise ToolkitIOError(output_path, e.strerror or str(e))
    return output_path


def format_report_summary(report: Dict[str, Any]) -> str:
    """
    Format a stage report as a human-readable summary

    Args:
        report: Report dictionary

    Returns:
        Formatted summary string
    """
    lines = [f"Report: {report.get('kind', 'unknown')} (schema {report.get('schema_version', '?')})"]
    if "seed" in report:
        lines.append(f"Seed: {report['seed']}")

    languages = report.get("languages")
    if isinstance(languages, dict):
        lines.append("")
        for lang, stats in languages.items():
            if not isinstance(stats, dict):
                continue
            parts = [f"{key}={value}" for key, value in stats.items() if value not in (0, 0.0, None)]
            if parts:
                lines.append(f"  {lang}: {', '.join(parts)}")

    for key in ("total_kept", "total_hours", "wer", "micro_f1"):
        if key in report:
            lines.append(f"{key}: {report[key]}")

    return "\n".join(lines)
