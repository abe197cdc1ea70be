#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
JSON and CSV artifacts

Every float is written with 12 significant digits and non-finite values as the strings
"inf", "-inf" and "nan", so reruns with the same configuration give identical bytes.
Field order follows insertion order of the producing ``to_dict``.
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from ..core.config import EstimatorParams
from ..core.exceptions import SetRegError
from ..core.moduli import ModulusEstimate
from ..core.projections import Trajectory
from ..utils.logger import get_logger

logger = get_logger(__name__)

SIGNIFICANT_DIGITS = 12
ESTIMATE_COLUMNS = ("kind", "rho", "ratio", "samples", "excluded", "empty")


def format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def normalize(obj: Any) -> Any:
    """Plain JSON tree with rounded floats"""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return format_float(value)
        return float(format_float(value))
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if isinstance(obj, Mapping):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return normalize(obj.to_dict())
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(normalize(obj), indent=2, ensure_ascii=False) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(float(v)) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buffer.getvalue()


def estimate_rows(estimates: Mapping[str, ModulusEstimate]) -> List[List[Any]]:
    """kind, rho, ratio, samples, excluded, empty for every estimate"""
    return [[est.kind, row.rho, row.ratio, row.samples, row.excluded, row.empty]
            for est in estimates.values() for row in est.per_rho]


def trajectory_header(dim: int) -> List[str]:
    return ["iter"] + [f"x{i + 1}" for i in range(dim)] + ["residual"]


def envelope(command: str, subject: str, params: Optional[EstimatorParams],
             result: Any, **extra: Any) -> Dict[str, Any]:
    """Common artifact header: command, subject, seed and discretization"""
    doc: Dict[str, Any] = {"command": command, "subject": subject}
    if params is not None:
        doc["seed"] = params.seed
        doc["params"] = params.to_dict()
    doc.update(extra)
    doc["result"] = result
    return doc


class ReportWriter:
    """Writes artifacts below one output directory"""

    def __init__(self, output_dir, fmt: str = "json"):
        self.output_dir = Path(output_dir)
        self.fmt = fmt
        self.written: List[Path] = []

    def _write(self, name: str, text: str) -> Path:
        path = self.output_dir / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise SetRegError(f"写入结果文件失败 {path}: {e}") from e
        self.written.append(path)
        logger.debug(f"已写入 {path}")
        return path

    def write_json(self, name: str, doc: Any) -> Path:
        return self._write(f"{name}.json", dumps(doc))

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return self._write(f"{name}.csv", csv_text(header, rows))

    def write_estimates(self, name: str, doc: Dict[str, Any],
                        estimates: Mapping[str, ModulusEstimate]) -> List[Path]:
        return [
            self.write_json(name, doc),
            self.write_csv(f"{name}_per_rho", ESTIMATE_COLUMNS, estimate_rows(estimates)),
        ]

    def write_trajectories(self, name: str, doc: Dict[str, Any],
                           trajectories: Sequence[Trajectory]) -> List[Path]:
        paths = [self.write_json(name, doc)]
        for k, traj in enumerate(trajectories, start=1):
            dim = traj.points.shape[1]
            paths.append(self.write_csv(f"{name}_trajectory_{k}", trajectory_header(dim),
                                        traj.rows()))
        return paths

    def render(self, doc: Any, header: Sequence[str] = (),
               rows: Iterable[Sequence[Any]] = ()) -> str:
        """Text for stdout in the configured format"""
        if self.fmt == "csv" and header:
            return csv_text(header, rows)
        return dumps(doc)
