"""CSV loading with schema validation. This package only reads the simulator's
output files; it never recomputes physics."""

import csv

import numpy as np


class SchemaError(ValueError):
    pass


def load_columns(path, required):
    """Read a CSV into {column: float array}; missing columns raise SchemaError."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing} (found {header})")
        rows = list(reader)
    data = {}
    for col in required:
        j = header.index(col)
        try:
            data[col] = np.array([float(r[j]) for r in rows])
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"{path}: non-numeric data in column {col!r}: {exc}")
    return data


PROFILE_COLUMNS = ("x", "n", "p", "D")
LIMIT_COLUMNS = ("eps", "l1_distance", "slope")
IV_COLUMNS = ("t", "voltage_UT", "voltage_volts", "current_scaled", "current_Acm2")
