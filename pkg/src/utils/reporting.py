"""
Check results, report aggregation and file writers for horolab.
"""

import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, Field


FLOAT_FORMAT = "%.12g"


def format_value(value: Any) -> str:
    """Render a scalar the way every report and CSV renders it."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return FLOAT_FORMAT % value
    return str(value)


class CheckResult(BaseModel):
    """Outcome of a single numerical check."""
    check: str
    passed: bool
    metric: float
    tolerance: float
    details: Dict[str, Any] = Field(default_factory=dict)
    offending_nodes: List[int] = Field(default_factory=list)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_text(self) -> str:
        """Render as a structured key = value block."""
        lines = [
            f"check = {self.check}",
            f"status = {self.status}",
            f"metric = {format_value(float(self.metric))}",
            f"tolerance = {format_value(float(self.tolerance))}",
        ]
        for key in sorted(self.details):
            value = self.details[key]
            if isinstance(value, (list, tuple)):
                value = ",".join(format_value(v) for v in value)
            else:
                value = format_value(value)
            lines.append(f"{key} = {value}")
        if self.offending_nodes:
            lines.append(f"offending_count = {len(self.offending_nodes)}")
        return "\n".join(lines)


class ReportAggregator:
    """Aggregates check results from one or more verification runs."""

    def aggregate(self, name: str, results: List[CheckResult]) -> Dict:
        """
        Aggregate the checks of one verification run.

        Args:
            name: Verification name (e.g. "theorem1/cylinder")
            results: CheckResult objects in execution order

        Returns:
            Dictionary with:
                - name: the verification name
                - passed: whether every check passed
                - checks_run / checks_failed: counts
                - failed_checks: names of failing checks
                - results: the CheckResult objects
        """
        failed = [result.check for result in results if not result.passed]
        return {
            "name": name,
            "passed": not failed,
            "checks_run": len(results),
            "checks_failed": len(failed),
            "failed_checks": failed,
            "results": results,
        }

    def format_report(self, run: Dict) -> str:
        """Render one aggregated run as structured text."""
        blocks = [
            "\n".join([
                f"verification = {run['name']}",
                f"status = {'pass' if run['passed'] else 'fail'}",
                f"checks_run = {run['checks_run']}",
                f"checks_failed = {run['checks_failed']}",
            ])
        ]
        blocks.extend(result.to_text() for result in run["results"])
        return "\n\n".join(blocks) + "\n"


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def write_frame(path: Path, frame: pd.DataFrame) -> Path:
    """Write a DataFrame as CSV with the fixed float format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_offending_nodes(path: Path, manifold, nodes: Iterable[int]) -> Optional[Path]:
    """Write the offending-node CSV of a failed check (node_id,u,v)."""
    nodes = sorted(set(int(n) for n in nodes))
    if not nodes:
        return None
    coords = manifold.coords[nodes]
    frame = pd.DataFrame({"node_id": nodes, "u": coords[:, 0], "v": coords[:, 1]})
    return write_frame(path, frame)


def matrix_frame(matrix, labels: Sequence[str]) -> pd.DataFrame:
    """Labelled square matrix with a leading label column."""
    frame = pd.DataFrame(matrix, columns=list(labels))
    frame.insert(0, "label", list(labels))
    return frame
