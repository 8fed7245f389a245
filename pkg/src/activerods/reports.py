"""CSV writers with reproducible float formatting.

Floats are written with 17 significant digits, which round-trips any
double exactly, so repeated runs of a deterministic experiment produce
byte-identical files.
"""

from __future__ import annotations

import os

import numpy as np


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: str, header, rows) -> str:
    """Write rows (iterables of cells) under a header; returns the path."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    lines = [",".join(str(h) for h in header)]
    for row in rows:
        lines.append(",".join(format_value(c) for c in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def field_rows(t: float, field) -> list:
    """Flatten a phase-space field into (t, y, phi, value) rows."""
    rows = []
    yc = field.y_grid.centers
    ph = field.phi_grid.nodes
    for i in range(field.y_grid.n_y):
        for j in range(field.phi_grid.n_phi):
            rows.append((t, yc[i], ph[j], field.values[i, j]))
    return rows


def profile_rows(t: float, phi_nodes, values) -> list:
    return [(t, phi_nodes[j], values[j]) for j in range(len(phi_nodes))]
