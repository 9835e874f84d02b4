"""Machine-readable run reports: assembly, JSON/CSV serialization, validation.

A report is a plain ``dict``. Everything except the ``runtime`` section is a
pure function of the echoed ``config`` (and the library versions), which is
what ``replay`` relies on.

Floats are written with ``repr``, the shortest string that parses back to the
same double, so a JSON round trip is lossless. Non-finite floats become the
strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from importlib import resources
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Iterable

import numpy as np

SCHEMA_VERSION = "1.0"
NONDETERMINISTIC_SECTIONS = ("runtime",)

UNITS = {
    "passage_time": "time of a unit-intensity Poisson clock",
    "jump_count": "number of jumps",
    "ci_level": "probability (two-sided normal interval)",
    "std_error": "same unit as the estimated mean",
    "wall_clock_s": "seconds",
    "master_seed": "unsigned 64-bit integer (taken mod 2^64)",
}


def package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover - source checkout without install
        return "0+unknown"


def versions() -> dict:
    return {
        "novikov": package_version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def plain(obj: Any) -> Any:
    """Convert to JSON-safe builtins; NumPy scalars unwrap, non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def build_report(command: str, config: dict, **sections: Any) -> dict:
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "versions": versions(),
        "config": dict(config, command=command),
        "units": UNITS,
    }
    for key, value in sections.items():
        if value is not None:
            report[key] = value
    return plain(report)


def to_json(report: dict) -> str:
    return json.dumps(plain(report), indent=2, allow_nan=False) + "\n"


def deterministic_view(report: dict) -> dict:
    return {k: v for k, v in report.items() if k not in NONDETERMINISTIC_SECTIONS}


def _flatten(prefix: str, value: Any) -> Iterable[tuple[str, Any]]:
    if isinstance(value, dict):
        for k, v in value.items():
            yield from _flatten(f"{prefix}.{k}" if prefix else str(k), v)
    elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        for i, v in enumerate(value):
            yield from _flatten(f"{prefix}[{i}]", v)
    elif isinstance(value, list):
        yield prefix, ";".join(_scalar(v) for v in value)
    else:
        yield prefix, value


def _scalar(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(report: dict) -> str:
    """Long format ``section,key,value``; keys inside a section are dotted paths."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["section", "key", "value"])
    for section, body in plain(report).items():
        if isinstance(body, dict):
            for key, value in _flatten("", body):
                writer.writerow([section, key, _scalar(value)])
        else:
            writer.writerow([section, "", _scalar(body)])
    return out.getvalue()


CONSTANTS_COLUMNS = (
    "a",
    "alpha",
    "beta",
    "alpha_prime",
    "h",
    "g",
    "alpha_decreasing",
    "beta_decreasing",
)


def constants_csv(rows: list[dict]) -> str:
    """Wide table, one row per grid point, columns in ``CONSTANTS_COLUMNS`` order."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CONSTANTS_COLUMNS)
    for row in rows:
        writer.writerow([_scalar(plain(row.get(col))) for col in CONSTANTS_COLUMNS])
    return out.getvalue()


def load_schema() -> dict:
    text = resources.files("novikov").joinpath("schemas/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``report`` does not match the published schema."""
    import jsonschema

    jsonschema.validate(plain(report), load_schema())
