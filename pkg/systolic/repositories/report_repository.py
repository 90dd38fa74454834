import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
import sympy as sp
from pydantic import BaseModel, ValidationError

from systolic.config import get_settings
from systolic.models.errors import InputError
from systolic.models.schemas import GramDocument, GramMatrix, LatticeDocument, NormTable, TorusMesh
from systolic.utils.helpers import format_float

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class ReportRepository:
    """Reads lattice inputs and writes JSON, CSV and OFF artifacts"""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(ReportRepository, cls).__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if not self._initialized:
            self.settings = get_settings()
            self._initialized = True

    # ------------------------------------------------------------------
    # Inputs
    # ------------------------------------------------------------------

    @staticmethod
    def _read_json(path: PathLike, exact: bool) -> Any:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise InputError(f"Cannot read {path}: {e.strerror}")
        try:
            # decimal literals stay strings on the exact path so they convert to rationals unrounded
            return json.loads(text, parse_float=str if exact else float)
        except json.JSONDecodeError as e:
            raise InputError(f"Malformed JSON in {path}: {e.msg}", line=e.lineno, column=e.colno)

    def load_gram(self, path: PathLike, exact: bool = False) -> GramMatrix:
        """Gram matrix from ``{"dim": b, "gram": [[...], ...]}``; entries may be decimal strings"""
        data = self._read_json(path, exact)
        try:
            document = GramDocument.model_validate(data)
        except ValidationError as e:
            raise InputError(f"Invalid Gram document {path}: {e.errors()[0]['msg']}")
        try:
            gram = GramMatrix.from_rows(document.gram, exact=exact)
        except (ValueError, TypeError, sp.SympifyError) as e:
            raise InputError(f"Gram entries in {path} are not numbers: {e}")
        logger.info("Loaded %d-dimensional Gram matrix from %s (%s)", gram.dim, path, "exact" if exact else "float")
        return gram

    def load_lattice(self, path: PathLike) -> np.ndarray:
        """2×2 deck lattice basis (columns) from ``{"basis": [v1, v2]}`` or a Gram document"""
        data = self._read_json(path, exact=False)
        try:
            document = LatticeDocument.model_validate(data)
        except ValidationError as e:
            raise InputError(f"Invalid lattice document {path}: {e.errors()[0]['msg']}")
        if document.basis is not None:
            columns = np.array(document.basis, dtype=float).T
        else:
            columns = GramMatrix.from_rows(document.gram).cholesky_upper()
        if columns.shape != (2, 2):
            raise InputError(f"Deck lattice in {path} must be two-dimensional, got shape {columns.shape}")
        return columns

    # ------------------------------------------------------------------
    # Outputs
    # ------------------------------------------------------------------

    def render(self, value: Any, indent: int = 0) -> str:
        """Deterministic JSON with floats at a fixed number of significant digits"""
        pad = "  " * (indent + 1)
        close = "  " * indent
        if isinstance(value, BaseModel):
            value = value.model_dump()
        if isinstance(value, np.ndarray):
            value = value.tolist()
        if isinstance(value, (np.integer,)):
            value = int(value)
        if isinstance(value, (np.floating,)):
            value = float(value)
        if isinstance(value, sp.Basic):
            value = str(value)

        if value is None:
            return "null"
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, int):
            return str(value)
        if isinstance(value, float):
            return format_float(value, self.settings.FLOAT_DIGITS)
        if isinstance(value, str):
            return json.dumps(value, ensure_ascii=False)
        if isinstance(value, dict):
            if not value:
                return "{}"
            items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {self.render(v, indent + 1)}"
                     for k, v in value.items()]
            return "{\n" + ",\n".join(items) + f"\n{close}}}"
        if isinstance(value, (list, tuple)):
            if not value:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple, BaseModel, np.ndarray)) for v in value):
                return "[" + ", ".join(self.render(v, indent + 1) for v in value) + "]"
            return "[\n" + ",\n".join(pad + self.render(v, indent + 1) for v in value) + f"\n{close}]"
        raise TypeError(f"Cannot serialize {type(value).__name__}")

    def save_report(self, report: Dict[str, Any], path: Optional[PathLike] = None) -> str:
        """Write the report to path, or to stdout when path is None"""
        text = self.render(report) + "\n"
        if path is None:
            sys.stdout.write(text)
        else:
            Path(path).write_text(text)
            logger.info("Report written to %s", path)
        return text

    def save_norm_tables_csv(self, tables: Dict[str, NormTable], path: PathLike) -> pd.DataFrame:
        """One row per (class, exponent) with the upper-bound and minimized flags"""
        rows: List[Dict[str, Any]] = []
        for klass, table in tables.items():
            for label, value in table.entries.items():
                rows.append({
                    "class": klass,
                    "p": label,
                    "normalized_norm": value,
                    "upper_bound": label in table.upper_bound_labels,
                    "minimized": label in table.minimized_labels,
                })
        frame = pd.DataFrame(rows, columns=["class", "p", "normalized_norm", "upper_bound", "minimized"])
        frame.to_csv(path, index=False, float_format=f"%.{self.settings.FLOAT_DIGITS}g")
        logger.info("Norm table written to %s", path)
        return frame

    @staticmethod
    def export_off(mesh: TorusMesh, path: PathLike) -> None:
        """Vertices of the fundamental domain and faces by vertex index; faces along the seams wrap around"""
        with open(path, "w") as handle:
            handle.write("OFF\n")
            handle.write(f"{mesh.n_vertices} {mesh.n_faces} 0\n")
            points = np.column_stack([mesh.vertices, np.zeros(mesh.n_vertices)])
            np.savetxt(handle, points, fmt="%.17g")
            faces = np.column_stack([np.full(mesh.n_faces, 3), mesh.triangles])
            np.savetxt(handle, faces, fmt="%d")
        logger.info("Mesh with %d faces exported to %s", mesh.n_faces, path)
