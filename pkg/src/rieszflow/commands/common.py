"""Common options and output helpers shared by the subcommands."""

import csv
import io
import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np

from rieszflow.errors import DimensionError, RieszFlowError
from rieszflow.measures import DiscreteMeasure, cloud_from_rows
from rieszflow.processing import resolve_workers

FORMATS = ("csv", "json")
STDOUT = "-"

Record = Dict[str, Any]


@dataclass(frozen=True)
class GlobalOptions:
    seed: int = 0
    out: str = STDOUT
    format: Optional[str] = None
    threads: int = 0
    verbose: bool = False

    @property
    def workers(self) -> int:
        return resolve_workers(self.threads)

    def output_format(self, default: str = "csv") -> str:
        return self.format or default

    def override(self, **values: Any) -> "GlobalOptions":
        """Copy with the given fields replaced; ``None`` keeps the current value."""
        return replace(self, **{k: v for k, v in values.items() if v is not None})


def format_value(value: Any) -> str:
    """17 significant digits for floats, plain text for everything else."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def render_csv(fieldnames: Sequence[str], rows: Sequence[Record]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([format_value(row[name]) for name in fieldnames])
    return buffer.getvalue()


def render_json(fieldnames: Sequence[str], rows: Sequence[Record]) -> str:
    records = [{name: _json_value(row[name]) for name in fieldnames} for row in rows]
    return json.dumps(records, indent=2) + "\n"


def write_text(text: str, dest: str) -> None:
    """Write ``text`` to ``dest`` (``-`` = standard output)."""
    if dest == STDOUT:
        click.echo(text, nl=False)
        return
    output_dir = os.path.dirname(dest)
    if output_dir and not os.path.exists(output_dir):
        os.makedirs(output_dir)
    with open(dest, "w", newline="", encoding="utf-8") as f:
        f.write(text)


def emit_records(
    fieldnames: Sequence[str],
    rows: Sequence[Record],
    options: GlobalOptions,
    dest: Optional[str] = None,
) -> None:
    """Emit a row set as CSV or as a JSON array of records."""
    dest = options.out if dest is None else dest
    if options.output_format() == "json":
        text = render_json(fieldnames, rows)
    else:
        text = render_csv(fieldnames, rows)
    write_text(text, dest)
    if dest != STDOUT:
        click.echo(f"✅ Wrote {len(rows)} rows to {dest}", err=True)


def parse_vector(text: str, name: str) -> np.ndarray:
    """Comma-separated numbers, e.g. ``-1,0``."""
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated numbers: {e}", param_hint=name)
    if not values:
        raise click.BadParameter("expected at least one number", param_hint=name)
    return np.array(values)


def _measure_from_json(data: Any) -> DiscreteMeasure:
    if isinstance(data, dict):
        points = np.array(data["points"], dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if "weights" in data:
            return DiscreteMeasure(points, data["weights"])
        return DiscreteMeasure.uniform(points)
    if isinstance(data, list) and data and isinstance(data[0], dict):
        return cloud_from_rows(data)
    points = np.array(data, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    return DiscreteMeasure.uniform(points)


def read_measure(source: str, dim: Optional[int] = None, name: str = "measure") -> DiscreteMeasure:
    """Load a point cloud from inline JSON or a ``.csv``/``.json`` file.

    Inline forms: ``{"points": [[...], ...], "weights": [...]}``, a list of
    points, or a list of ``x1..xd,w`` records.
    """
    path = Path(source)
    try:
        if path.suffix == ".csv" and path.exists():
            with open(path, newline="", encoding="utf-8") as f:
                measure = cloud_from_rows(list(csv.DictReader(f)))
        elif path.suffix == ".json" and path.exists():
            with open(path, encoding="utf-8") as f:
                measure = _measure_from_json(json.load(f))
        else:
            measure = _measure_from_json(json.loads(source))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        if isinstance(e, RieszFlowError):
            raise
        raise click.BadParameter(f"cannot read a measure from {source!r}: {e}", param_hint=name)
    if dim is not None and measure.dim != dim:
        raise DimensionError(f"{name} has dimension {measure.dim}, expected {dim}")
    return measure


def time_grid(t_max: float, samples: int) -> List[float]:
    if t_max < 0:
        raise click.BadParameter("must be nonnegative", param_hint="--t-max")
    if samples < 1:
        raise click.BadParameter("must be >= 1", param_hint="--samples")
    if samples == 1:
        return [float(t_max)]
    return [float(t) for t in np.linspace(0.0, t_max, samples)]
