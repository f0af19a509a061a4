"""Bundled array geometries and geometry CSV input/output.

Two 41-element origin-symmetric fixtures: a half-wavelength uniform line
and a non-uniform line whose positive positions span 0.6215 to 10
wavelengths.  Geometry files are CSV with header
``position_lambda,efficiency``.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .arraymodel import ArrayGeometry
from .errors import IngestionError

__all__ = ["FIXTURES", "load_geometry_csv", "nonuniform41", "ula41", "write_geometry_csv"]

_NONUNIFORM41_POSITIVE = (
    0.6215, 1.0414, 1.4743, 1.9572, 2.5043, 2.9870, 3.4492, 4.0155, 4.4617,
    4.9544, 5.3895, 5.8762, 6.3107, 6.8955, 7.4536, 7.9957, 8.4196, 8.9315,
    9.4274, 10.0,
)


def ula41() -> ArrayGeometry:
    """41-element half-wavelength uniform line, unit efficiency."""
    positions = 0.5 * (np.arange(41) - 20)
    return ArrayGeometry(positions=positions, efficiencies=np.ones(41))


def nonuniform41() -> ArrayGeometry:
    """41-element origin-symmetric non-uniform line, unit efficiency."""
    positive = np.asarray(_NONUNIFORM41_POSITIVE)
    positions = np.concatenate((-positive[::-1], [0.0], positive))
    return ArrayGeometry(positions=positions, efficiencies=np.ones(41))


FIXTURES = {"ula41": ula41, "nonuniform41": nonuniform41}


def write_geometry_csv(path, geometry: ArrayGeometry) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["position_lambda", "efficiency"])
        for pos, eff in zip(geometry.positions, geometry.efficiencies):
            writer.writerow([f"{pos:.12g}", f"{eff:.12g}"])


def load_geometry_csv(path) -> ArrayGeometry:
    path = Path(path)
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != ["position_lambda", "efficiency"]:
                raise IngestionError(
                    f"{path}: expected header 'position_lambda,efficiency'"
                )
            rows = [row for row in reader if row]
    except OSError as exc:
        raise IngestionError(f"cannot read geometry file {path}: {exc}") from exc
    positions, efficiencies = [], []
    for i, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise IngestionError(f"{path}:{i}: expected two columns")
        try:
            positions.append(float(row[0]))
            efficiencies.append(float(row[1]))
        except ValueError as exc:
            raise IngestionError(f"{path}:{i}: {exc}") from exc
    return ArrayGeometry(
        positions=np.asarray(positions), efficiencies=np.asarray(efficiencies)
    )
