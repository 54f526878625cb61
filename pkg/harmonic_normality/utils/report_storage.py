"""
Report storage utilities for deterministic JSON reports and CSV exports.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union


def _clean(value: Any) -> Any:
    """Recursively make a report JSON-safe; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if hasattr(value, 'item') and not isinstance(value, (str, bytes)):
        # numpy scalars
        return _clean(value.item())
    return value


class ReportStorage:
    """Writes analysis reports next to the requested output path."""

    def __init__(self, output_path: Union[str, Path]):
        """Initialize report storage."""
        self.output_path = Path(output_path)

    def _ensure_dir(self, path: Path) -> None:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)

    @property
    def report_path(self) -> Path:
        """JSON report path; a .csv output path keeps the CSV and moves the report to .json."""
        if self.output_path.suffix.lower() == '.csv':
            return self.output_path.with_suffix('.json')
        return self.output_path

    def save_report(self, report: Dict[str, Any]) -> Path:
        """Write the JSON report; identical inputs give identical bytes."""
        path = self.report_path
        self._ensure_dir(path)
        text = json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False)
        path.write_text(text + "\n", encoding='utf-8')
        return path

    def load_report(self) -> Dict[str, Any]:
        """Read a previously written report."""
        return json.loads(self.report_path.read_text(encoding='utf-8'))

    def csv_path(self, suffix: str) -> Path:
        """CSV export path beside the report, e.g. report_trace.csv."""
        return self.output_path.with_name(f"{self.output_path.stem}_{suffix}.csv")

    def write_csv(self, suffix: str, header: Sequence[str],
                  rows: Iterable[Sequence[Any]]) -> Path:
        """Write one CSV export beside the report."""
        path = self.csv_path(suffix)
        self._ensure_dir(path)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
        return path

    def write_field_csv(self, rows: Iterable[Sequence[Any]]) -> Path:
        """Field grid export; written to the output path itself when it ends in .csv."""
        header = ['x', 'y', 're_f', 'im_f', 'fsharp', 'ratio']
        if self.output_path.suffix.lower() == '.csv':
            self._ensure_dir(self.output_path)
            with open(self.output_path, 'w', newline='', encoding='utf-8') as f:
                writer = csv.writer(f, lineterminator='\n')
                writer.writerow(header)
                writer.writerows(rows)
            return self.output_path
        return self.write_csv('field', header, rows)

    @staticmethod
    def read_csv(path: Union[str, Path]) -> List[List[str]]:
        with open(path, newline='', encoding='utf-8') as f:
            return list(csv.reader(f))
