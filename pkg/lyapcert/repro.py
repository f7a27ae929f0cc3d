"""
Batch targets regenerating the rate curves, regions and rate maps as CSV
"""
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional
import logging
import time

from .analysis import grid_axis, rate_curve, rate_map, sweep_region
from .models import FunctionClass
from .result_store import RegionWriter, write_rate_csv, write_rate_map_csv

logger = logging.getLogger(__name__)

INF = float("inf")


class ReproTarget(NamedTuple):
    name: str
    description: str
    runner: Callable[[Path, Optional[float], Optional[int]], List[str]]


def _douglas_rachford_rates(out_dir: Path, step: Optional[float], jobs: Optional[int]) -> List[str]:
    values = grid_axis(0.1, 5.0, step or 0.1)
    points = rate_curve(
        "douglas_rachford", values, template="p1,1",
        classes=[FunctionClass(sigma=1, beta=2), FunctionClass(sigma=0, beta=INF)],
        kind="distance:1", jobs=jobs,
    )
    return [write_rate_csv(points, out_dir / "douglas_rachford_rates.csv")]


def _region(out_path: Path, **kwargs) -> str:
    with RegionWriter(out_path) as writer:
        sweep_region(sink=writer, **kwargs)
    return str(out_path)


def _heavy_ball_region(out_dir: Path, step: Optional[float], jobs: Optional[int]) -> List[str]:
    step = step or 0.025
    return [_region(
        out_dir / "heavy_ball_region.csv",
        family="heavy_ball",
        p1_axis=grid_axis(-1.0, 1.0, step),
        p2_axis=grid_axis(step, 2.0, step),
        template="p2,p1",
        classes=[FunctionClass(sigma=0, beta=1)],
        kind="function_value",
        jobs=jobs,
    )]


def _prox_heavy_ball_regions(out_dir: Path, step: Optional[float], jobs: Optional[int]) -> List[str]:
    step = step or 0.025
    common = dict(
        family="prox_heavy_ball",
        p1_axis=grid_axis(-1.0, 1.0, step),
        p2_axis=grid_axis(step, 2.0, step),
        classes=[FunctionClass(sigma=0, beta=1), FunctionClass(sigma=0, beta=INF)],
        kind="duality_gap",
        jobs=jobs,
    )
    return [
        _region(out_dir / "prox_heavy_ball_region_delta1.csv", template="p2,p1,0", **common),
        _region(out_dir / "prox_heavy_ball_region_delta2.csv", template="p2,0,p1", **common),
    ]


def _heavy_ball_rates(out_dir: Path, step: Optional[float], jobs: Optional[int]) -> List[str]:
    values = grid_axis(-0.6, 1.0, step or 0.02)
    points = rate_curve(
        "heavy_ball", values, template="0.1,p1",
        classes=[FunctionClass(sigma=1, beta=10)],
        kind="distance:1", jobs=jobs,
    )
    return [write_rate_csv(points, out_dir / "heavy_ball_rates.csv")]


def _dy_classes(beta1: float) -> List[FunctionClass]:
    return [FunctionClass(sigma=0, beta=beta1), FunctionClass(sigma=1, beta=2), FunctionClass(sigma=0, beta=INF)]


def _davis_yin_rates(out_dir: Path, step: Optional[float], jobs: Optional[int]) -> List[str]:
    values = grid_axis(1.0, 40.0, step or 1.0)
    points = rate_curve(
        "davis_yin", values, template="0.5,1",
        classes=_dy_classes,
        kind="distance:1", jobs=jobs,
    )
    return [write_rate_csv(points, out_dir / "davis_yin_rates.csv")]


def _chambolle_pock_regions(out_dir: Path, step: Optional[float], jobs: Optional[int]) -> List[str]:
    common = dict(
        family="chambolle_pock",
        p1_axis=grid_axis(0.5, 1.75, step or 0.025),
        p2_axis=grid_axis(-0.5, 8.0, step or 0.05),
        template="p1,p1,p2",
        classes=[FunctionClass(sigma=0, beta=INF), FunctionClass(sigma=0, beta=INF)],
        kind="duality_gap",
        jobs=jobs,
    )
    return [
        _region(out_dir / "chambolle_pock_region_unrestricted.csv", **common),
        _region(out_dir / "chambolle_pock_region_restricted.csv", mask_name="restricted", **common),
    ]


def _chambolle_pock_rate_map(out_dir: Path, step: Optional[float], jobs: Optional[int]) -> List[str]:
    points = rate_map(
        "chambolle_pock",
        grid_axis(0.5, 1.75, step or 0.05),
        grid_axis(0.0, 2.0, step or 0.05),
        template="p1,p1,p2",
        classes=[FunctionClass(sigma=0.05, beta=50), FunctionClass(sigma=0.05, beta=50)],
        kind="distance:1",
        jobs=jobs,
    )
    return [write_rate_map_csv(points, out_dir / "chambolle_pock_rate_map.csv")]


REPRO_TARGETS: Dict[str, ReproTarget] = {
    "fig1": ReproTarget("fig1", "Douglas-Rachford rates vs step size, F_{1,2} x F_{0,inf}, lambda=1", _douglas_rachford_rates),
    "fig2a": ReproTarget("fig2a", "heavy-ball region (delta, gamma), F_{0,1}, function value", _heavy_ball_region),
    "fig2b": ReproTarget("fig2b", "proximal heavy-ball regions, delta1 and delta2 sweeps, duality gap", _prox_heavy_ball_regions),
    "fig2c": ReproTarget("fig2c", "heavy-ball rates vs delta, F_{1,10}, gamma=0.1", _heavy_ball_rates),
    "fig3": ReproTarget("fig3", "Davis-Yin rates vs beta1, gamma=1/2, lambda=1", _davis_yin_rates),
    "fig4a": ReproTarget("fig4a", "Chambolle-Pock region (tau, theta), unrestricted and restricted", _chambolle_pock_regions),
    "fig4b": ReproTarget("fig4b", "Chambolle-Pock rate map, F_{0.05,50} x F_{0.05,50}", _chambolle_pock_rate_map),
}

# 按内容命名的别名
REPRO_ALIASES: Dict[str, str] = {
    "dr_rates": "fig1",
    "hb_region": "fig2a",
    "phb_regions": "fig2b",
    "hb_rates": "fig2c",
    "dy_rates": "fig3",
    "cp_region": "fig4a",
    "cp_rate_map": "fig4b",
}


def target_names() -> List[str]:
    """可接受的目标名称：图号在前，别名在后"""
    return list(REPRO_TARGETS) + list(REPRO_ALIASES)


def run_target(
    name: str,
    out_dir: Optional[str] = None,
    step: Optional[float] = None,
    jobs: Optional[int] = None,
) -> List[str]:
    """
    运行一个复现目标，返回写出的 CSV 路径

    Args:
        name: 目标名称（REPRO_TARGETS 的图号或 REPRO_ALIASES 的别名）
        out_dir: 输出目录（默认当前目录下的 repro/）
        step: 覆盖默认网格步长
        jobs: 并行进程数

    Raises:
        KeyError: 目标不存在
    """
    name = REPRO_ALIASES.get(name, name)
    if name not in REPRO_TARGETS:
        raise KeyError(f"Repro target '{name}' not found. Available: {target_names()}")
    target = REPRO_TARGETS[name]
    directory = Path(out_dir or "repro")
    directory.mkdir(parents=True, exist_ok=True)
    logger.info(f"Running {name}: {target.description}")
    start_time = time.time()
    paths = target.runner(directory, step, jobs)
    duration_ms = (time.time() - start_time) * 1000
    logger.info(f"{name} finished in {duration_ms:.1f} ms: {paths}")
    return paths
