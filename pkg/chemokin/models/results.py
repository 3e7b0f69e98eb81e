"""Columnar result tables and run reports."""

import json
import math
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel, Field

CSV_FLOAT_FORMAT = "%.12g"


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats with None and numpy scalars with Python ones."""
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class ResultTable(BaseModel):
    """Named columns with units plus a JSON summary."""

    name: str = Field(description="File stem for the CSV and JSON outputs")
    columns: dict[str, list[Any]] = Field(default_factory=dict, description="Column data in output order")
    units: dict[str, str] = Field(default_factory=dict, description="Unit label per column")
    summary: dict[str, Any] = Field(default_factory=dict, description="Scalar results for the JSON sidecar")

    def to_frame(self) -> pd.DataFrame:
        """Columns as a DataFrame with unit-annotated headers."""
        frame = pd.DataFrame(self.columns)
        return frame.rename(columns={c: self.header(c) for c in frame.columns})

    def header(self, column: str) -> str:
        """Column header carrying its unit, e.g. ``G [1/um]``."""
        unit = self.units.get(column)
        return f"{column} [{unit}]" if unit else column

    def write(self, directory: Path, config_hash: str) -> list[Path]:
        """Write ``<name>.csv`` and ``<name>.json`` into ``directory``.

        The CSV starts with a ``# config_hash=`` comment line; the JSON
        carries the same hash. Output is byte-identical for identical input.
        """
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        if self.columns:
            csv_path = directory / f"{self.name}.csv"
            with csv_path.open("w", encoding="utf-8", newline="") as handle:
                handle.write(f"# config_hash={config_hash}\n")
                self.to_frame().to_csv(
                    handle, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
                )
            paths.append(csv_path)
        json_path = directory / f"{self.name}.json"
        payload = {
            "name": self.name,
            "config_hash": config_hash,
            "units": self.units,
            "summary": _json_safe(self.summary),
        }
        json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        paths.append(json_path)
        return paths


def read_table(path: Path) -> pd.DataFrame:
    """Load a CSV written by ``ResultTable.write``."""
    return pd.read_csv(path, comment="#")


class RunReport(BaseModel):
    """What a harness command produced and whether its checks passed."""

    tier: str
    config_hash: str
    files: list[Path] = Field(default_factory=list)
    checks: dict[str, bool] = Field(default_factory=dict)
    summary: dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """True when every acceptance check passed."""
        return all(self.checks.values())

    @property
    def failed_checks(self) -> list[str]:
        """Names of failing checks in insertion order."""
        return [name for name, ok in self.checks.items() if not ok]
