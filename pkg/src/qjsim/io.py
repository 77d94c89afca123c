"""CSV schemas shared by the command-line surface.

Floats are serialized with 17 significant digits so that write-then-read
reproduces the in-memory values exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import SchemaError
from .optics import Profile

THEORY_COLUMNS = (
    "p21",
    "p31",
    "p32",
    "rho11",
    "rho22",
    "rho33",
    "abs_sigma12",
    "abs_sigma13",
    "abs_sigma23",
)

ESTIMATE_COLUMNS = THEORY_COLUMNS[:3] + tuple(
    name
    for q in THEORY_COLUMNS[3:]
    for name in (q, q + "_err")
)

PROFILE_COLUMNS = ("position", "value")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, columns, rows) -> Path:
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(
                f"row has {len(row)} fields, schema needs {len(columns)}"
            )
        lines.append(",".join(fmt(x) for x in row))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def _read_csv(path: Path, columns) -> np.ndarray:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = tuple(tok.strip() for tok in lines[0].split(","))
    if header != tuple(columns):
        for i, (got, want) in enumerate(zip(header, columns)):
            if got != want:
                raise SchemaError(
                    f"{path}: column {i + 1} is {got!r}, expected {want!r}"
                )
        raise SchemaError(
            f"{path}: expected {len(columns)} columns, found {len(header)}"
        )
    rows = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        toks = line.split(",")
        if len(toks) != len(columns):
            raise SchemaError(
                f"{path}: row {n} has {len(toks)} fields, expected {len(columns)}"
            )
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            raise SchemaError(f"{path}: row {n} holds a non-numeric field")
    return np.array(rows, dtype=np.float64).reshape(len(rows), len(columns))


def write_theory_csv(path, rows) -> Path:
    return _write_csv(Path(path), THEORY_COLUMNS, rows)


def read_theory_csv(path) -> np.ndarray:
    return _read_csv(Path(path), THEORY_COLUMNS)


def write_estimates_csv(path, rows) -> Path:
    return _write_csv(Path(path), ESTIMATE_COLUMNS, rows)


def read_estimates_csv(path) -> np.ndarray:
    return _read_csv(Path(path), ESTIMATE_COLUMNS)


def write_profile_csv(path, profile: Profile) -> Path:
    rows = np.column_stack([profile.positions, profile.values])
    return _write_csv(Path(path), PROFILE_COLUMNS, rows)


def read_profile_csv(path) -> Profile:
    data = _read_csv(Path(path), PROFILE_COLUMNS)
    if data.shape[0] == 0:
        raise SchemaError(f"{path}: profile holds no rows")
    positions = data[:, 0]
    values = data[:, 1]
    if np.any(np.diff(positions) <= 0):
        raise SchemaError(f"{path}: positions must be strictly increasing")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise SchemaError(f"{path}: profile values must be finite and nonnegative")
    total = float(values.sum())
    return Profile(positions, values, total=total, is_empty=total <= 0)
