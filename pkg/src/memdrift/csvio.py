"""CSV emission with lossless float formatting."""

import csv
import os

from .errors import SchemaError


def format_value(v):
    """17 significant digits: round-trips any double exactly."""
    if isinstance(v, str):
        return v
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    return f"{float(v):.17g}"


def write_csv(records, schema, path):
    """Write rows (time order preserved) under a header of column names."""
    schema = list(schema)
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema)
        for row in records:
            row = list(row)
            if len(row) != len(schema):
                raise SchemaError(
                    f"row has {len(row)} fields, schema has {len(schema)}")
            writer.writerow([format_value(v) for v in row])
    return path


def read_csv(path):
    """Header plus float rows (non-numeric cells kept as strings)."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for row in reader:
            parsed = []
            for cell in row:
                try:
                    parsed.append(float(cell))
                except ValueError:
                    parsed.append(cell)
            rows.append(parsed)
    return header, rows
