"""
Drivers: bisection for the smallest certifiable rate and parameter-region sweeps
"""
import sys
import os

# 添加父目录到路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from multiprocessing import Pool
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union
import logging
import time

import numpy as np

from config import BISECTION_TOL, LYAPCERT_JOBS
from .certify import certify, default_kind, lower_bound_from_name, named_mask
from .method_registry import METHOD_REGISTRY, expand_template
from .models import (
    BisectionStep,
    FunctionClass,
    LowerBoundSpec,
    MethodRepresentation,
    RatePoint,
    RateResult,
    RegionCell,
    StructureMask,
)
from .sdp import SolverBackend

logger = logging.getLogger(__name__)

INCONCLUSIVE = ("Marginal", "MaxIterations")


def grid_axis(start: float, stop: float, step: float) -> np.ndarray:
    """
    闭区间网格 start + i*step（含端点，按 10 位小数取整以消除累积误差）

    Raises:
        ValueError: step <= 0 或 stop < start
    """
    if not step > 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"grid range is empty: {start} > {stop}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 10)


def resolve_jobs(jobs: Optional[int] = None) -> int:
    """LYAPCERT_JOBS（非零时）优先于参数"""
    if LYAPCERT_JOBS > 0:
        return LYAPCERT_JOBS
    return max(1, int(jobs or 1))


def _parallel_map(func: Callable, tasks: Sequence, jobs: int) -> Iterable:
    """按输入顺序产出结果；jobs=1 时在当前进程内执行"""
    if jobs <= 1 or len(tasks) <= 1:
        for task in tasks:
            yield func(task)
        return
    chunksize = max(1, len(tasks) // (jobs * 8))
    with Pool(processes=jobs) as pool:
        for result in pool.imap(func, tasks, chunksize=chunksize):
            yield result


def bisect_rho(
    rep: MethodRepresentation,
    lb: LowerBoundSpec,
    tol: float = BISECTION_TOL,
    mask: Optional[StructureMask] = None,
    backend: Optional[SolverBackend] = None,
) -> RateResult:
    """
    二分搜索最小可证收缩因子 ρ ∈ [0, 1 - tol]

    先检查 ρ = 1 - tol；不可行则不给出速率。之后保持 (lo 不可行, hi 可行) 直到 hi - lo <= tol。
    Marginal 与 MaxIterations 一律视为不可行。

    Args:
        rep: 状态空间表示
        lb: 下界预设
        tol: 二分精度
        mask: 可选的结构限制
        backend: 求解器后端

    Returns:
        RateResult；status 为 certified 时 rho 附带已复核的证书
    """
    if not 0 < tol < 1:
        raise ValueError(f"bisection tolerance must lie in (0, 1), got {tol}")
    steps: List[BisectionStep] = []
    name = rep.family or "custom method"

    def attempt(rho: float):
        start_time = time.time()
        result = certify(rep, lb, rho, mask, backend=backend)
        duration_ms = (time.time() - start_time) * 1000
        steps.append(BisectionStep(rho=rho, status=result.status, margin=result.margin, duration_ms=duration_ms))
        logger.info(f"[{name}] rho={rho:.6f}: {result.status} (margin={result.margin:.3e}, {duration_ms:.1f} ms)")
        return result

    top = attempt(1.0 - tol)
    if top.status != "Feasible":
        status = "inconclusive" if top.status in INCONCLUSIVE else "not_certified"
        diagnostics = [f"no certificate at rho = {1.0 - tol:.6g} ({top.status})"] + top.diagnostics
        return RateResult(status=status, steps=steps, diagnostics=diagnostics)

    bottom = attempt(0.0)
    if bottom.status == "Feasible":
        return RateResult(rho=0.0, status="certified", certificate=bottom.certificate, steps=steps)

    lo, hi, best = 0.0, 1.0 - tol, top.certificate
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        result = attempt(mid)
        if result.status == "Feasible":
            hi, best = mid, result.certificate
        else:
            lo = mid

    marginal = sum(1 for s in steps if s.status in INCONCLUSIVE)
    diagnostics = [f"{marginal} inconclusive solve(s) counted as infeasible"] if marginal else []
    logger.info(f"[{name}] certified rho={hi:.6f} after {len(steps)} solves")
    return RateResult(rho=hi, status="certified", certificate=best, steps=steps, diagnostics=diagnostics)


def _dump_classes(classes: Optional[Sequence[FunctionClass]]):
    return [c.model_dump() for c in classes] if classes is not None else None


def _load_classes(data) -> Optional[List[FunctionClass]]:
    return [FunctionClass(**c) for c in data] if data is not None else None


def _prepare(family: str, template: str, p1: float, p2: Optional[float], classes, kind: Optional[str], mask_name: Optional[str]):
    """按网格坐标构造方法、下界与结构限制"""
    params = expand_template(template, p1, p2)
    rep = METHOD_REGISTRY.build(family, params, _load_classes(classes))
    lb = lower_bound_from_name(kind or default_kind(rep), rep)
    mask, lb = named_mask(mask_name, rep, lb)
    return rep, lb, mask


def _region_cell(task: Tuple) -> RegionCell:
    """单个网格点 (工作进程入口)：失败记录在结果中，不抛出"""
    index, p1, p2, family, template, classes, kind, mask_name, rho = task
    start_time = time.time()
    try:
        rep, lb, mask = _prepare(family, template, p1, p2, classes, kind, mask_name)
    except ValueError as e:
        return RegionCell(index=index, p1=p1, p2=p2, feasible=False, status="invalid",
                          duration_ms=(time.time() - start_time) * 1000, error=str(e))
    try:
        result = certify(rep, lb, rho, mask)
    except Exception as e:
        return RegionCell(index=index, p1=p1, p2=p2, feasible=False, status="error",
                          duration_ms=(time.time() - start_time) * 1000, error=str(e))
    return RegionCell(
        index=index, p1=p1, p2=p2,
        feasible=result.status == "Feasible",
        status=result.status,
        margin=result.margin if np.isfinite(result.margin) else None,
        duration_ms=(time.time() - start_time) * 1000,
    )


def _rate_point(task: Tuple) -> RatePoint:
    index, p1, p2, family, template, classes, kind, mask_name, tol = task
    start_time = time.time()
    try:
        rep, lb, mask = _prepare(family, template, p1, p2, classes, kind, mask_name)
    except ValueError as e:
        logger.debug(f"Skipping ({p1}, {p2}): {e}")
        return RatePoint(param=p1, param2=p2, status="invalid")
    try:
        result = bisect_rho(rep, lb, tol, mask)
    except Exception as e:
        logger.error(f"Rate computation failed at ({p1}, {p2}): {e}")
        return RatePoint(param=p1, param2=p2, status="error")
    duration_ms = (time.time() - start_time) * 1000
    logger.info(f"Rate point #{index} ({p1}, {p2}): {result.status} rho={result.rho} ({duration_ms:.1f} ms)")
    return RatePoint(param=p1, param2=p2, rho=result.rho, status=result.status)


def sweep_region(
    family: str,
    p1_axis: Sequence[float],
    p2_axis: Sequence[float],
    template: Optional[str] = None,
    classes: Optional[Sequence[FunctionClass]] = None,
    kind: Optional[str] = None,
    mask_name: Optional[str] = None,
    rho: float = 1.0,
    jobs: Optional[int] = None,
    sink: Optional[Callable[[RegionCell], None]] = None,
) -> List[RegionCell]:
    """
    在 p1 × p2 网格上逐点判定 ρ（默认 1）处的可行性

    Args:
        family: 方法族名称
        p1_axis: 第一坐标取值（外层循环）
        p2_axis: 第二坐标取值
        template: 网格坐标到参数的模板（默认用方法族的模板）
        classes: 函数类（默认用方法族的默认函数类）
        kind: 预设名称（默认 m=1 用 function_value，否则 duality_gap）
        mask_name: 结构限制名称
        rho: 收缩因子
        jobs: 并行进程数
        sink: 每得到一个结果（按网格顺序）时的回调

    Returns:
        RegionCell 列表，按网格下标排序

    Raises:
        KeyError: 方法族不存在
    """
    fam = METHOD_REGISTRY.get(family)
    template = template or fam.sweep_template
    tasks = [
        (index, float(p1), float(p2), family, template, _dump_classes(classes), kind, mask_name, rho)
        for index, (p1, p2) in enumerate((a, b) for a in p1_axis for b in p2_axis)
    ]
    jobs = resolve_jobs(jobs)
    logger.info(f"Region sweep {family} [{template}]: {len(tasks)} cells, rho={rho}, jobs={jobs}")

    cells: List[RegionCell] = []
    for cell in _parallel_map(_region_cell, tasks, jobs):
        logger.debug(f"Cell #{cell.index} ({cell.p1:g}, {cell.p2:g}): {cell.status} ({cell.duration_ms:.1f} ms)")
        if cell.error:
            logger.warning(f"Cell #{cell.index} ({cell.p1:g}, {cell.p2:g}) {cell.status}: {cell.error}")
        cells.append(cell)
        if sink is not None:
            sink(cell)

    feasible = sum(1 for c in cells if c.feasible)
    logger.info(f"Region sweep {family} finished: {feasible}/{len(cells)} feasible")
    return cells


def rate_curve(
    family: str,
    values: Sequence[float],
    template: Optional[str] = None,
    classes: Union[Sequence[FunctionClass], Callable[[float], Sequence[FunctionClass]], None] = None,
    kind: str = "distance:1",
    p2: Optional[float] = None,
    tol: float = BISECTION_TOL,
    mask_name: Optional[str] = None,
    jobs: Optional[int] = None,
) -> List[RatePoint]:
    """
    对一维参数列表逐点二分求速率；classes 可以是参数值到函数类列表的映射

    Raises:
        KeyError: 方法族不存在
    """
    fam = METHOD_REGISTRY.get(family)
    template = template or fam.sweep_template
    tasks = [
        (index, float(v), p2, family, template, _dump_classes(classes(v) if callable(classes) else classes), kind, mask_name, tol)
        for index, v in enumerate(values)
    ]
    logger.info(f"Rate curve {family} [{template}]: {len(tasks)} points")
    return list(_parallel_map(_rate_point, tasks, resolve_jobs(jobs)))


def rate_map(
    family: str,
    p1_axis: Sequence[float],
    p2_axis: Sequence[float],
    template: Optional[str] = None,
    classes: Optional[Sequence[FunctionClass]] = None,
    kind: str = "distance:1",
    tol: float = BISECTION_TOL,
    mask_name: Optional[str] = None,
    jobs: Optional[int] = None,
) -> List[RatePoint]:
    """
    在二维网格上逐点二分求速率，结果按网格下标排序

    Raises:
        KeyError: 方法族不存在
    """
    fam = METHOD_REGISTRY.get(family)
    template = template or fam.sweep_template
    tasks = [
        (index, float(a), float(b), family, template, _dump_classes(classes), kind, mask_name, tol)
        for index, (a, b) in enumerate((a, b) for a in p1_axis for b in p2_axis)
    ]
    logger.info(f"Rate map {family} [{template}]: {len(tasks)} cells")
    return list(_parallel_map(_rate_point, tasks, resolve_jobs(jobs)))
