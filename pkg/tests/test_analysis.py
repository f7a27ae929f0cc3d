"""
Tests for rate bisection and parameter-region sweeps
"""

import pytest
import sys
import os

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from lyapcert import analysis
from lyapcert.analysis import bisect_rho, grid_axis, rate_curve, rate_map, resolve_jobs, sweep_region
from lyapcert.certify import preset, verify_certificate
from lyapcert.method_registry import zoo_build
from lyapcert.models import FunctionClass
from lyapcert.oracles import Quadratic
from lyapcert.simulate import run

INF = float("inf")
CP_CLASSES = [FunctionClass(sigma=0.05, beta=50), FunctionClass(sigma=0.05, beta=50)]


def test_grid_axis():
    """测试闭区间网格"""
    np.testing.assert_allclose(grid_axis(0.0, 1.0, 0.25), [0.0, 0.25, 0.5, 0.75, 1.0])
    axis = grid_axis(-0.5, 8.0, 0.01)
    assert len(axis) == 851
    assert axis[-1] == 8.0
    assert grid_axis(0.3, 0.3, 0.1).tolist() == [0.3]

    with pytest.raises(ValueError):
        grid_axis(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        grid_axis(1.0, 0.0, 0.1)


def test_resolve_jobs(monkeypatch):
    """测试并行进程数解析"""
    monkeypatch.setattr(analysis, "LYAPCERT_JOBS", 0)
    assert resolve_jobs(None) == 1
    assert resolve_jobs(4) == 4
    monkeypatch.setattr(analysis, "LYAPCERT_JOBS", 3)
    assert resolve_jobs(8) == 3


def test_bisect_gradient_rate():
    """测试梯度法的紧收敛率 0.81"""
    rep = zoo_build("heavy_ball", [0.1, 0.0], [FunctionClass(sigma=1, beta=10)])
    lb = preset("distance", rep)
    result = bisect_rho(rep, lb, tol=1e-3)
    assert result.status == "certified"
    assert result.rho == pytest.approx(0.81, abs=3e-3)
    assert result.certificate.rho == result.rho
    assert verify_certificate(rep, lb, result.rho, result.certificate).passed

    # 先检查 1 - tol，再检查 0
    assert result.steps[0].rho == pytest.approx(1 - 1e-3)
    assert result.steps[1].rho == 0.0


def test_bisect_proximal_point_rate():
    """测试 F_{1,∞} 上步长 1 的近端点法，收敛率 1/(1+γσ)^2 = 0.25"""
    rep = zoo_build("proximal_point", [1.0], [FunctionClass(sigma=1, beta=INF)])
    result = bisect_rho(rep, preset("distance", rep), tol=1e-3)
    assert result.status == "certified"
    assert result.rho == pytest.approx(0.25, abs=5e-3)


def test_bisect_not_certified():
    """测试发散参数下不给出速率"""
    rep = zoo_build("heavy_ball", [3.0, 0.0], [FunctionClass(sigma=0, beta=1)])
    result = bisect_rho(rep, preset("distance", rep))
    assert result.status in ("not_certified", "inconclusive")
    assert result.rho is None
    assert result.certificate is None
    assert len(result.steps) == 1
    assert result.diagnostics

    with pytest.raises(ValueError):
        bisect_rho(rep, preset("distance", rep), tol=0.0)


def test_chambolle_pock_rates():
    """测试 Chambolle-Pock 在 F_{0.05,50} x F_{0.05,50} 上的收敛率"""
    cases = (([0.99, 0.99, 1.0], 0.9266), ([1.6, 1.6, 0.22], 0.8812), ([1.5, 1.5, 0.35], 0.8891))
    for params, expected in cases:
        rep = zoo_build("chambolle_pock", params, CP_CLASSES)
        result = bisect_rho(rep, preset("distance", rep), tol=1e-3)
        assert result.status == "certified", (params, result.diagnostics)
        assert result.rho == pytest.approx(expected, abs=3e-3), params


def region_verdict(family, p1, p2, expected, step=0.01, **kwargs):
    """网格点的结论；与期望不符时允许边界平移一个网格单元"""
    cells = sweep_region(family, [p1], [p2], **kwargs)
    if cells[0].feasible == expected:
        return True
    shifted = sweep_region(family, [p1 - step, p1 + step], [p2 - step, p2, p2 + step], **kwargs)
    return any(c.feasible == expected for c in shifted)


def test_chambolle_pock_region_cells():
    """测试 Chambolle-Pock 在 ρ = 1 处的区域边界"""
    for tau, theta in ((1.15, 1.0), (1.5, 0.35), (0.5, 7.5)):
        cell = sweep_region("chambolle_pock", [tau], [theta])[0]
        assert cell.feasible, (tau, theta, cell.status)
    for tau, theta in ((1.25, 1.0), (0.5, 8.0)):
        assert region_verdict("chambolle_pock", tau, theta, False), (tau, theta)


def test_heavy_ball_region_cells():
    """测试 heavy-ball 在 F_{0,1}、函数值下界、ρ = 1 处的可证点"""
    smooth = [FunctionClass(sigma=0, beta=1)]
    for delta, gamma in ((0.0, 1.0), (0.0, 0.9), (0.2, 0.8), (0.2, 0.7), (-0.5, 0.5)):
        cell = sweep_region("heavy_ball", [delta], [gamma], classes=smooth)[0]
        assert cell.feasible, (delta, gamma, cell.status)


def worst_contraction(rep, curvatures, count=200, seed=0):
    """在 count 个一维二次函数实例上取一步后 |x - x⋆|^2 的最大收缩比（x⋆ = 0）"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        instance = [Quadratic(cls, a=[draw(rng)]) for cls, draw in zip(rep.classes, curvatures)]
        trajectory = run(rep, instance, np.ones((rep.n, 1)), steps=1)
        x0, x1 = trajectory.points[0].x, trajectory.points[1].x
        worst = max(worst, float(np.sum(x1 ** 2) / np.sum(x0 ** 2)))
    return worst


def test_douglas_rachford_rates_bound_quadratics():
    """测试 Douglas-Rachford 的证书速率不小于二次函数实例上的经验收缩"""
    classes = [FunctionClass(sigma=1, beta=2), FunctionClass(sigma=0, beta=INF)]
    curvatures = (lambda rng: rng.uniform(1.0, 2.0), lambda rng: rng.uniform(0.0, 20.0))
    for gamma in (0.25, 0.5, 1.0, 2.0, 4.0):
        rep = zoo_build("douglas_rachford", [gamma, 1.0], classes)
        result = bisect_rho(rep, preset("distance", rep), tol=1e-3)
        assert result.status == "certified", (gamma, result.diagnostics)
        assert result.rho < 1.0
        assert worst_contraction(rep, curvatures) <= result.rho + 1e-6, gamma


def test_davis_yin_rates_bound_quadratics():
    """测试 Davis-Yin（γ = 1/2, λ = 1）的证书速率不小于二次函数实例上的经验收缩"""
    for beta1 in (5.0, 10.0, 20.0):
        classes = [FunctionClass(sigma=0, beta=beta1), FunctionClass(sigma=1, beta=2),
                   FunctionClass(sigma=0, beta=INF)]
        curvatures = (
            lambda rng, b=beta1: rng.uniform(0.0, b),
            lambda rng: rng.uniform(1.0, 2.0),
            lambda rng: rng.uniform(0.0, 20.0),
        )
        rep = zoo_build("davis_yin", [0.5, 1.0], classes)
        result = bisect_rho(rep, preset("distance", rep), tol=1e-3)
        assert result.status == "certified", (beta1, result.diagnostics)
        assert result.rho < 1.0
        assert worst_contraction(rep, curvatures) <= result.rho + 1e-6, beta1


def test_restricted_region_is_classical():
    """测试受限结构只恢复经典区域 τ1τ2 < 1"""
    inside = sweep_region("chambolle_pock", [0.9], [1.0], mask_name="restricted")
    assert inside[0].feasible
    outside = sweep_region("chambolle_pock", [1.1], [1.0], mask_name="restricted")
    assert not outside[0].feasible
    # 不加限制时同一点可行
    assert sweep_region("chambolle_pock", [1.1], [1.0])[0].feasible


def test_sweep_region_order_and_failures():
    """测试扫描顺序、流式回调与无效网格点"""
    streamed = []
    cells = sweep_region(
        "heavy_ball", [0.0, 0.5], [0.0, 1.0],
        classes=[FunctionClass(sigma=0, beta=1)],
        sink=streamed.append,
    )
    assert [c.index for c in cells] == [0, 1, 2, 3]
    assert [(c.p1, c.p2) for c in cells] == [(0.0, 0.0), (0.0, 1.0), (0.5, 0.0), (0.5, 1.0)]
    assert streamed == cells

    # γ = p2 = 0 不是合法参数，记录后继续
    assert cells[0].status == "invalid" and not cells[0].feasible
    assert "gamma" in cells[0].error
    assert cells[1].feasible

    with pytest.raises(KeyError):
        sweep_region("newton", [0.0], [1.0])


def test_sweep_region_parallel_matches_serial():
    """测试并行与串行扫描结论一致"""
    kwargs = dict(classes=[FunctionClass(sigma=0, beta=1)])
    serial = sweep_region("heavy_ball", [0.0, 0.5], [0.5, 1.9], jobs=1, **kwargs)
    parallel = sweep_region("heavy_ball", [0.0, 0.5], [0.5, 1.9], jobs=2, **kwargs)
    assert [(c.p1, c.p2, c.feasible) for c in serial] == [(c.p1, c.p2, c.feasible) for c in parallel]


def test_rate_curve():
    """测试一维速率曲线"""
    points = rate_curve(
        "heavy_ball", [0.0], template="0.1,p1",
        classes=lambda delta: [FunctionClass(sigma=1, beta=10)],
    )
    assert len(points) == 1
    assert points[0].param == 0.0
    assert points[0].status == "certified"
    assert points[0].rho == pytest.approx(0.81, abs=3e-3)

    invalid = rate_curve("heavy_ball", [0.0], template="-1,p1", classes=[FunctionClass(sigma=1, beta=10)])
    assert invalid[0].status == "invalid" and invalid[0].rho is None


def test_rate_map():
    """测试二维速率图"""
    points = rate_map("heavy_ball", [0.0], [0.1, 0.0], classes=[FunctionClass(sigma=1, beta=10)])
    assert [(p.param, p.param2) for p in points] == [(0.0, 0.1), (0.0, 0.0)]
    assert points[0].status == "certified"
    assert points[0].rho == pytest.approx(0.81, abs=3e-3)
    assert points[1].status == "invalid" and points[1].rho is None


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
