"""
Result store: method/certificate JSON documents and CSV tables
"""
import sys
import os

# 添加父目录到路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union
import csv
import json
import logging

import numpy as np

from config import RESULTS_DIR
from .models import (
    CertifyResult,
    LowerBoundSpec,
    LyapunovCertificate,
    MethodRepresentation,
    RatePoint,
    RegionCell,
    Trajectory,
)
from .utils import fmt6

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RATE_HEADER = ["param", "rho", "status"]
RATE_MAP_HEADER = ["p1", "p2", "rho", "status"]
REGION_HEADER = ["p1", "p2", "feasible"]
REGION_VERBOSE_HEADER = ["p1", "p2", "feasible", "status"]


def _write_json(path: PathLike, data: Dict[str, Any]) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
    return str(path)


def _read_json(path: PathLike) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def load_method(path: PathLike) -> MethodRepresentation:
    """
    读取方法描述 JSON：{n, m, A, B, C, D, classes:[{sigma, beta}]}

    Raises:
        FileNotFoundError: 文件不存在
        ValueError: JSON 格式或维数不合法
    """
    try:
        data = _read_json(path)
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: invalid JSON ({e})")
    rep = MethodRepresentation(**data)
    logger.info(f"Loaded method from: {path} (n={rep.n}, m={rep.m})")
    return rep


def save_method(rep: MethodRepresentation, path: PathLike) -> str:
    filepath = _write_json(path, rep.to_document())
    logger.info(f"Saved method to: {filepath}")
    return filepath


def save_certificate(
    cert: LyapunovCertificate,
    path: PathLike,
    lb: Optional[LowerBoundSpec] = None,
    method: Optional[MethodRepresentation] = None,
) -> str:
    """
    保存证书（可附带下界与方法描述，便于之后独立复核）

    Returns:
        保存的文件路径
    """
    document: Dict[str, Any] = {"certificate": cert.model_dump(mode="json")}
    if lb is not None:
        document["lower_bound"] = lb.model_dump(mode="json")
    if method is not None:
        document["method"] = method.to_document()
    filepath = _write_json(path, document)
    logger.info(f"Saved certificate (rho={cert.rho:.6g}) to: {filepath}")
    return filepath


def load_certificate(path: PathLike) -> Dict[str, Any]:
    """
    读取证书文件

    Returns:
        {"certificate": LyapunovCertificate, "lower_bound": LowerBoundSpec 或 None,
         "method": MethodRepresentation 或 None}
    """
    data = _read_json(path)
    if "certificate" not in data:
        # 也接受只含证书本身的文件
        data = {"certificate": data}
    result = {
        "certificate": LyapunovCertificate(**data["certificate"]),
        "lower_bound": LowerBoundSpec(**data["lower_bound"]) if data.get("lower_bound") else None,
        "method": MethodRepresentation(**data["method"]) if data.get("method") else None,
    }
    logger.info(f"Loaded certificate from: {path}")
    return result


def save_certify_result(result: CertifyResult, path: PathLike) -> str:
    return _write_json(path, result.model_dump(mode="json"))


def _open_csv(path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="", encoding="utf-8")


def write_rate_csv(points: Sequence[RatePoint], path: PathLike) -> str:
    """速率曲线：param,rho,status"""
    with _open_csv(path) as f:
        writer = csv.writer(f)
        writer.writerow(RATE_HEADER)
        for p in points:
            writer.writerow([fmt6(p.param), fmt6(p.rho), p.status])
    logger.info(f"Wrote {len(points)} rate rows to: {path}")
    return str(path)


def write_rate_map_csv(points: Sequence[RatePoint], path: PathLike) -> str:
    """二维速率图：p1,p2,rho,status"""
    with _open_csv(path) as f:
        writer = csv.writer(f)
        writer.writerow(RATE_MAP_HEADER)
        for p in points:
            writer.writerow([fmt6(p.param), fmt6(p.param2), fmt6(p.rho), p.status])
    logger.info(f"Wrote {len(points)} rate-map rows to: {path}")
    return str(path)


class RegionWriter:
    """
    逐行写出区域扫描结果（p1,p2,feasible），可作为 sweep_region 的 sink
    """

    def __init__(self, path: PathLike, verbose: bool = False):
        self.path = Path(path)
        self.verbose = verbose
        self.rows = 0
        self._file = _open_csv(self.path)
        self._writer = csv.writer(self._file)
        self._writer.writerow(REGION_VERBOSE_HEADER if verbose else REGION_HEADER)

    def __call__(self, cell: RegionCell) -> None:
        row = [fmt6(cell.p1), fmt6(cell.p2), int(cell.feasible)]
        if self.verbose:
            row.append(cell.status)
        self._writer.writerow(row)
        self._file.flush()
        self.rows += 1

    def close(self) -> None:
        self._file.close()
        logger.info(f"Wrote {self.rows} region rows to: {self.path}")

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_region_csv(cells: Iterable[RegionCell], path: PathLike, verbose: bool = False) -> str:
    with RegionWriter(path, verbose) as writer:
        for cell in cells:
            writer(cell)
    return str(path)


def read_region_csv(path: PathLike) -> List[Dict[str, Any]]:
    """读取区域表：[{p1, p2, feasible(bool), status?}]"""
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            entry: Dict[str, Any] = {
                "p1": float(row["p1"]),
                "p2": float(row["p2"]),
                "feasible": row["feasible"] == "1",
            }
            if "status" in row:
                entry["status"] = row["status"]
            rows.append(entry)
    return rows


def read_rate_csv(path: PathLike) -> List[Dict[str, Any]]:
    """读取速率表（一维或二维），rho 为 nan 时返回 None"""
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            entry: Dict[str, Any] = {k: v for k, v in row.items()}
            for key in ("param", "p1", "p2", "rho"):
                if key in entry:
                    value = float(entry[key])
                    entry[key] = None if np.isnan(value) else value
            rows.append(entry)
    return rows


def write_trajectory_csv(
    trajectory: Trajectory,
    path: PathLike,
    V: Optional[Sequence[float]] = None,
    R: Optional[Sequence[float]] = None,
) -> str:
    """
    轨迹表：k, x..., y..., u..., F..., V, R（向量按行优先展开）
    """
    points = trajectory.points
    if not points:
        raise ValueError("trajectory has no points")
    first = points[0]
    header = ["k"]
    header += [f"x{i}_{j}" for i in range(first.x.shape[0]) for j in range(first.x.shape[1])]
    header += [f"y{i}_{j}" for i in range(first.y.shape[0]) for j in range(first.y.shape[1])]
    header += [f"u{i}_{j}" for i in range(first.u.shape[0]) for j in range(first.u.shape[1])]
    header += [f"F{i}" for i in range(first.F.shape[0])]
    header += ["V", "R"]
    with _open_csv(path) as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for k, p in enumerate(points):
            row: List[Any] = [k]
            row += [repr(float(v)) for v in np.ravel(p.x)]
            row += [repr(float(v)) for v in np.ravel(p.y)]
            row += [repr(float(v)) for v in np.ravel(p.u)]
            row += [repr(float(v)) for v in np.ravel(p.F)]
            row.append(repr(float(V[k])) if V is not None and k < len(V) else "")
            row.append(repr(float(R[k])) if R is not None and k < len(R) else "")
            writer.writerow(row)
    logger.info(f"Wrote trajectory with {len(points)} points to: {path}")
    return str(path)


def results_path(name: str, results_dir: Optional[PathLike] = None) -> Path:
    """结果目录下的文件路径（默认 RESULTS_DIR）"""
    base = Path(results_dir) if results_dir else Path(RESULTS_DIR)
    base.mkdir(parents=True, exist_ok=True)
    return base / name
