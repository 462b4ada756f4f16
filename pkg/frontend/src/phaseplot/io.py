"""CSV ingestion with strict schema checks.

Input columns must match the harness schemas exactly: missing required
columns are fatal, unknown columns are ignored.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

SCHEMAS = {
    "sweep": ["model", "lambda", "alpha", "rho", "survived_freq", "stderr",
              "mean_I", "censored_frac", "replicates", "seed"],
    "alpha_c": ["model", "lambda", "rho", "q", "alpha_lo", "alpha_hi",
                "alpha_c"],
    "bounds": ["model", "method", "lambda", "alpha", "rho", "value", "stderr",
               "certified"],
    "sausage": ["t", "estimate", "stderr", "replicates", "diffusion", "d"],
}

KIND_SCHEMA = {
    "phase_heatmap": "sweep",
    "alpha_curve": "sweep",
    "bound_comparison": "bounds",
    "sausage_growth": "sausage",
}

NUMERIC = {
    "sweep": ["lambda", "alpha", "survived_freq", "stderr", "mean_I",
              "censored_frac"],
    "alpha_c": ["lambda", "q", "alpha_lo", "alpha_hi", "alpha_c"],
    "bounds": ["lambda", "alpha", "value", "stderr"],
    "sausage": ["t", "estimate", "stderr"],
}


class SchemaError(Exception):
    pass


@dataclass
class Table:
    schema: str
    columns: list
    rows: list            # list of dicts, numeric fields parsed to float

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]


def load_table(path: str, schema: str) -> Table:
    required = SCHEMAS[schema]
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{path}: empty input")
            missing = [c for c in required if c not in reader.fieldnames]
            if missing:
                raise SchemaError(
                    f"{path}: missing required columns {missing} for schema "
                    f"{schema!r}")
            rows = []
            for raw in reader:
                row = {k: raw[k] for k in required}
                for field in NUMERIC[schema]:
                    try:
                        row[field] = float(row[field])
                    except ValueError as exc:
                        raise SchemaError(
                            f"{path}: column {field!r} is not numeric "
                            f"({row[field]!r})") from exc
                rows.append(row)
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return Table(schema=schema, columns=required, rows=rows)
