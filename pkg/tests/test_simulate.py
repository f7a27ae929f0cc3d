"""
Tests for component oracles, trajectory simulation and certificate audits
"""

import pytest
import sys
import os

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from lyapcert.certify import certify, preset
from lyapcert.interpolation import Triplet, check_interpolation
from lyapcert.method_registry import zoo_build
from lyapcert.models import FunctionClass, LowerBoundSpec, LyapunovCertificate
from lyapcert.oracles import (
    AbsQuadratic,
    IntervalIndicator,
    Quadratic,
    random_instance,
    soft_threshold,
)
from lyapcert.simulate import (
    DivergenceError,
    FixedPointError,
    Simulator,
    audit_certificate,
    audit_method,
    find_fixed_point,
    run,
)

INF = float("inf")
SMOOTH = FunctionClass(sigma=0, beta=1)
LSC = FunctionClass(sigma=0, beta=INF)


def zero_pair(rep, rho):
    d, m = rep.state_dim, rep.m
    cert = LyapunovCertificate(
        rho=rho, Q=np.zeros((d, d)), q=np.zeros(m), S=np.zeros((d, d)), s=np.zeros(m),
        lambda_C1=np.zeros(6 * m), lambda_C2=np.zeros(2 * m), lambda_C3=np.zeros(2 * m),
    )
    lb = LowerBoundSpec(kind="zero", P=np.zeros((d, d)), p=np.zeros(m), T=np.zeros((d, d)), t=np.zeros(m))
    return cert, lb


def test_soft_threshold():
    """测试软阈值"""
    np.testing.assert_allclose(soft_threshold(np.array([-2.0, 0.5, 3.0]), 1.0), [-1.0, 0.0, 2.0])


def test_oracle_prox_optimality():
    """测试 prox 输出满足 (v - y)/γ ∈ ∂f(y)"""
    gamma = 0.7
    v = np.array([1.5, -0.2])

    quad = Quadratic(FunctionClass(sigma=1, beta=3), a=[1.0, 3.0], c=[0.5, -1.0], b=[0.1, 0.0])
    y = quad.prox(v, gamma)
    np.testing.assert_allclose((v - y) / gamma, quad.grad(y))

    absq = AbsQuadratic(LSC, w=[1.0, 1.0], sigma=0.5)
    y = absq.prox(v, gamma)
    u = (v - y) / gamma
    # 与任意一点组成的三元组族可由 F_{0,∞} 插值
    probe = np.array([0.3, -0.4])
    probe_u = np.sign(probe) + 0.5 * probe
    family = [Triplet(y=y, F=absq.value(y), u=u), Triplet(y=probe, F=absq.value(probe), u=probe_u)]
    assert check_interpolation(family, LSC)

    box = IntervalIndicator(LSC, lo=[-1.0, -1.0], hi=[1.0, 1.0])
    np.testing.assert_allclose(box.prox(np.array([2.0, 0.5]), gamma), [1.0, 0.5])
    assert box.value(np.array([2.0, 0.0])) == INF

    with pytest.raises(ValueError):
        Quadratic(FunctionClass(sigma=1, beta=2), a=[3.0])
    with pytest.raises(ValueError):
        IntervalIndicator(FunctionClass(sigma=1, beta=INF), lo=[0.0], hi=[1.0])
    with pytest.raises(ValueError):
        quad.prox(v, 0.0)


def test_random_instance_membership():
    """测试随机实例属于声明的函数类"""
    classes = [FunctionClass(sigma=1, beta=2), LSC, FunctionClass(sigma=0, beta=10)]
    rng = np.random.default_rng(7)
    for _ in range(20):
        instance = random_instance(classes, rng, dim=3)
        assert [o.cls for o in instance] == classes
        assert all(o.dim == 3 for o in instance)
        assert instance[0].differentiable and instance[2].differentiable


def test_gradient_exact_step():
    """测试 f(x) = x^2/2、γ = 1 时一步到达极小点"""
    rep = zoo_build("gradient", [1.0])
    trajectory = run(rep, [Quadratic(SMOOTH, a=[1.0])], np.array([[1.0]]), steps=3)
    assert trajectory.status == "completed"
    assert len(trajectory.points) == 4
    np.testing.assert_allclose(trajectory.points[1].x, [[0.0]])
    np.testing.assert_allclose(trajectory.points[0].u, [[1.0]])


def test_heavy_ball_divergence():
    """测试 γ = 3 时 |x_k| = 2^k 发散"""
    rep = zoo_build("heavy_ball", [3.0, 0.0])
    trajectory = run(rep, [Quadratic(SMOOTH, a=[1.0])], np.array([[1.0], [1.0]]), steps=100)
    assert trajectory.status == "diverged"
    assert 25 <= trajectory.divergence_iteration <= 28
    assert len(trajectory.points) == trajectory.divergence_iteration

    with pytest.raises(DivergenceError):
        find_fixed_point(rep, [Quadratic(SMOOTH, a=[1.0])], np.array([[1.0], [1.0]]))


def test_douglas_rachford_converges():
    """测试 f1 = x^2/2、f2 = |x| 上 Douglas-Rachford 收敛"""
    rep = zoo_build("douglas_rachford", [1.0, 1.0])
    instance = [Quadratic(FunctionClass(sigma=1, beta=2), a=[1.0]), AbsQuadratic(LSC, w=[1.0])]
    trajectory = run(rep, instance, np.array([[3.0]]), steps=500)
    assert trajectory.status == "completed"
    x = [p.x for p in trajectory.points]
    assert float(np.linalg.norm(x[-1] - x[-2])) < 1e-8
    np.testing.assert_allclose(trajectory.points[-1].y, [[0.0], [0.0]], atol=1e-8)

    # y = Cx + Du 在每个点都成立
    for p in trajectory.points:
        np.testing.assert_allclose(rep.C @ p.x + rep.D @ p.u, p.y, atol=1e-12)


def test_find_fixed_point():
    """测试不动点的一致性条件"""
    star = find_fixed_point(zoo_build("gradient", [1.0]), [Quadratic(SMOOTH, a=[1.0], c=[3.0])])
    np.testing.assert_allclose(star.y, [[3.0]])
    np.testing.assert_allclose(star.u, [[0.0]], atol=1e-12)

    rep = zoo_build("douglas_rachford", [1.0, 1.0])
    instance = [Quadratic(FunctionClass(sigma=1, beta=2), a=[1.0], c=[1.0]), Quadratic(LSC, a=[1.0], c=[-1.0])]
    star = find_fixed_point(rep, instance)
    np.testing.assert_allclose(star.y, [[0.0], [0.0]], atol=1e-8)
    np.testing.assert_allclose(star.u, [[-1.0], [1.0]], atol=1e-8)

    with pytest.raises(FixedPointError):
        find_fixed_point(rep, instance, max_iter=2)


def test_chambolle_pock_fixed_point():
    """测试 Chambolle-Pock 在强凸二次函数上的不动点"""
    rep = zoo_build("chambolle_pock", [0.5, 0.5, 1.0])
    cls = FunctionClass(sigma=1, beta=INF)
    instance = [Quadratic(cls, a=[1.0, 2.0], c=[1.0, 0.0]), Quadratic(cls, a=[3.0, 1.0], c=[-1.0, 2.0])]
    star = find_fixed_point(rep, instance)
    assert float(np.max(np.abs(star.y[0] - star.y[1]))) <= 1e-8
    # 0 = ∇f1(y⋆) + ∇f2(y⋆)
    np.testing.assert_allclose(instance[0].grad(star.y[0]) + instance[1].grad(star.y[1]), 0.0, atol=1e-8)


def test_simulator_checks():
    """测试模拟器的输入检查"""
    rep = zoo_build("douglas_rachford", [1.0, 1.0])
    with pytest.raises(ValueError):
        Simulator(rep, [Quadratic(FunctionClass(sigma=1, beta=2), a=[1.0])])
    with pytest.raises(ValueError):
        Simulator(rep, [Quadratic(FunctionClass(sigma=1, beta=2), a=[1.0]), AbsQuadratic(LSC, w=[1.0, 1.0])])
    # 梯度分支需要可微函数
    pg = zoo_build("proximal_gradient", [0.5])
    with pytest.raises(ValueError):
        Simulator(pg, [AbsQuadratic(LSC, w=[1.0]), AbsQuadratic(LSC, w=[1.0])])


def test_zero_certificate_audit():
    """测试零证书的审计恒通过"""
    rep = zoo_build("gradient", [0.5])
    instance = [Quadratic(SMOOTH, a=[1.0])]
    star = find_fixed_point(rep, instance)
    trajectory = run(rep, instance, np.array([[2.0]]), steps=20)
    cert, lb = zero_pair(rep, 0.5)
    report = audit_certificate(trajectory, star, cert, lb, 0.5, rep)
    assert report.passed
    assert report.max_violation == 0.0
    assert report.steps == 21


def test_gradient_certificate_audit():
    """测试证书沿轨迹满足 Lyapunov 不等式与 ρ^k 衰减"""
    rep = zoo_build("heavy_ball", [0.1, 0.0], [FunctionClass(sigma=1, beta=10)])
    lb = preset("distance", rep)
    result = certify(rep, lb, 0.82)
    assert result.status == "Feasible"
    cert = result.certificate

    instance = [Quadratic(FunctionClass(sigma=1, beta=10), a=[1.0])]
    star = find_fixed_point(rep, instance)
    trajectory = run(rep, instance, np.array([[1.0], [0.5]]), steps=30)
    report = audit_certificate(trajectory, star, cert, lb, 0.82, rep)
    assert report.passed, report.violations[:3]
    V = np.array(report.V)
    assert np.all(V[1:] <= 0.82 * V[:-1] + 1e-7 * (1 + np.abs(V[:-1])))

    # 错误的 ρ 使 Lyapunov 不等式失效
    broken = audit_certificate(trajectory, star, cert, lb, 0.2, rep)
    assert not broken.passed
    assert any(v.check == "lyapunov" for v in broken.violations)


def test_audit_detects_inconsistent_trajectory():
    """测试审计发现不满足 y = Cx + Du 的轨迹"""
    rep = zoo_build("gradient", [0.5])
    instance = [Quadratic(SMOOTH, a=[1.0])]
    star = find_fixed_point(rep, instance)
    trajectory = run(rep, instance, np.array([[2.0]]), steps=3)
    shifted = trajectory.model_copy(update={"points": [
        p.model_copy(update={"y": np.asarray(p.y) + 1.0}) for p in trajectory.points
    ]})
    cert, lb = zero_pair(rep, 0.5)
    report = audit_certificate(shifted, star, cert, lb, 0.5, rep)
    assert not report.passed
    assert any(v.check == "consistency" for v in report.violations)


def test_audit_method():
    """测试随机实例批量审计"""
    rep = zoo_build("douglas_rachford", [1.0, 1.0])
    lb = preset("duality_gap", rep)
    result = certify(rep, lb, 1.0)
    assert result.status == "Feasible", result.diagnostics
    summary = audit_method(rep, result.certificate, lb, 1.0, instances=5, seed=1, steps=40, dim=2)
    assert summary.instances == 5
    assert summary.all_passed, [r.error for r in summary.results]
    assert [r.index for r in summary.results] == list(range(5))

    again = audit_method(rep, result.certificate, lb, 1.0, instances=5, seed=1, steps=40, dim=2)
    assert [r.max_violation for r in again.results] == [r.max_violation for r in summary.results]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
