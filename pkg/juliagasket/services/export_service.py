"""
Export service for writing level data, reports and images to disk.
"""
import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np
from PIL import Image

from juliagasket.core.exceptions import DomainError
from juliagasket.services.cell_complex import LevelGraph, format_address


def _word(word) -> str:
    return "".join(str(letter) for letter in word)


class ExportService:
    """Service for exporting gasket levels, functions and spectra to CSV, JSON and PPM."""

    @staticmethod
    def _writer(path: Path, header: Sequence[str]):
        path.parent.mkdir(parents=True, exist_ok=True)
        handle = path.open("w", newline="")
        writer = csv.writer(handle)
        writer.writerow(header)
        return handle, writer

    @staticmethod
    def write_graph(graph: LevelGraph, out_dir: Path) -> Dict[str, str]:
        """
        Write vertices.csv, edges.csv and cells.csv for one level.

        Returns:
            Mapping from artifact name to file path
        """
        out_dir = Path(out_dir)
        paths = {
            "vertices": out_dir / "vertices.csv",
            "edges": out_dir / "edges.csv",
            "cells": out_dir / "cells.csv",
        }

        handle, writer = ExportService._writer(paths["vertices"], ["id", "address"])
        with handle:
            for v, address in enumerate(graph.vertices):
                writer.writerow([v, format_address(address)])

        handle, writer = ExportService._writer(paths["edges"], ["id_a", "id_b", "word", "base_edge"])
        with handle:
            for edge in graph.edges:
                writer.writerow([edge.head, edge.tail, _word(edge.word), edge.base])

        handle, writer = ExportService._writer(paths["cells"], ["word", "vertices"])
        with handle:
            for cell in graph.cells:
                writer.writerow([_word(cell.word), " ".join(str(v) for v in cell.vertices)])

        return {name: str(path) for name, path in paths.items()}

    @staticmethod
    def write_coords(coords: np.ndarray, path: Path) -> str:
        """coords.csv: id, re, im with 17 significant digits."""
        path = Path(path)
        handle, writer = ExportService._writer(path, ["id", "re", "im"])
        with handle:
            for v, z in enumerate(coords):
                writer.writerow([v, f"{z.real:.17g}", f"{z.imag:.17g}"])
        return str(path)

    @staticmethod
    def write_function(values: Sequence, path: Path) -> str:
        """A function on a level as id, value (Fractions keep their exact form)."""
        path = Path(path)
        handle, writer = ExportService._writer(path, ["id", "value"])
        with handle:
            for v, x in enumerate(values):
                writer.writerow([v, x if not isinstance(x, float) else f"{x:.17g}"])
        return str(path)

    @staticmethod
    def read_function(path: Path, exact: bool = False) -> np.ndarray:
        """
        Read an id, value CSV written by write_function.

        Values come back as Fractions (object array) when `exact` is set or
        any entry is written as a ratio, and as floats otherwise.

        Raises:
            DomainError: missing header, or ids not 0, 1, 2, ... in order
        """
        path = Path(path)
        with path.open(newline="") as handle:
            rows = list(csv.reader(handle))
        if not rows or [cell.strip() for cell in rows[0]] != ["id", "value"]:
            raise DomainError("function file needs an 'id,value' header", {"path": str(path)})

        entries = [row for row in rows[1:] if row]
        for expected, row in enumerate(entries):
            if len(row) != 2 or row[0].strip() != str(expected):
                raise DomainError("function ids must run 0, 1, 2, ... in order",
                                  {"path": str(path), "row": expected + 1})
        texts = [row[1].strip() for row in entries]
        if exact or any("/" in text for text in texts):
            return np.array([Fraction(text) for text in texts], dtype=object)
        return np.array([float(text) for text in texts])

    @staticmethod
    def write_eigenvalues(
        path: Path,
        level: int,
        kind: str,
        eigenvalues: Sequence[float],
        map_residuals: Optional[Sequence[float]] = None,
        spectrum_distances: Optional[Sequence[float]] = None,
    ) -> str:
        """eigenvalues.csv: level, kind, index, eigenvalue, map_residual, spectrum_distance."""
        path = Path(path)
        handle, writer = ExportService._writer(
            path, ["level", "kind", "index", "eigenvalue", "map_residual", "spectrum_distance"]
        )
        with handle:
            for j, value in enumerate(eigenvalues):
                residual = map_residuals[j] if map_residuals else ""
                distance = spectrum_distances[j] if spectrum_distances else ""
                writer.writerow([level, kind, j, f"{value:.17g}", residual, distance])
        return str(path)

    @staticmethod
    def write_report(report: Dict[str, Any], path: Path) -> str:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report, sort_keys=True, indent=2))
        return str(path)

    @staticmethod
    def write_ppm(image: Image.Image, path: Path) -> str:
        """Binary greyscale PPM (P5) via Pillow."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        image.save(path, format="PPM")
        return str(path)


# Create a global instance
export_service = ExportService()
