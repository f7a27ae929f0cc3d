"""
Trajectory simulation, fixed-point search and empirical certificate audits
"""
import sys
import os

# 添加父目录到路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from multiprocessing import Pool
from typing import List, Optional, Sequence, Tuple
import logging
import time

import numpy as np

from config import SIM_CONFIG
from .interpolation import Triplet, worst_interpolation_violation
from .method_validator import validate
from .models import (
    AuditReport,
    AuditSummary,
    AuditViolation,
    InstanceAudit,
    LowerBoundSpec,
    LyapunovCertificate,
    MethodRepresentation,
    Trajectory,
    TrajectoryPoint,
)
from .oracles import ComponentOracle, random_instance

logger = logging.getLogger(__name__)

FIXED_POINT_RTOL = 1e-12
CONSENSUS_TOL = 1e-8
AUDIT_RTOL = 1e-7


class DivergenceError(RuntimeError):
    """迭代发散（非有限值或超出界限）"""

    def __init__(self, iteration: int, norm: float):
        super().__init__(f"iterates diverged at iteration {iteration} (|x| = {norm:.3e})")
        self.iteration = iteration
        self.norm = norm


class FixedPointError(RuntimeError):
    """未能找到满足一致性条件的不动点"""

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class Simulator:
    """
    按因果顺序执行 x+ = A x + B u, y = C x + D u, u ∈ ∂f(y)

    点的维数为 d：x 为 n×d，u/y 为 m×d。
    """

    def __init__(self, rep: MethodRepresentation, instance: Sequence[ComponentOracle]):
        if len(instance) != rep.m:
            raise ValueError(f"expected {rep.m} component oracles, got {len(instance)}")
        report = validate(rep)
        if not report.well_posed:
            raise ValueError(f"method is not well posed: {[d for d in report.diagnostics if d.startswith('✗')]}")
        dims = {o.dim for o in instance}
        if len(dims) != 1:
            raise ValueError(f"component oracles disagree on the point dimension: {sorted(dims)}")
        for i, oracle in enumerate(instance):
            if i not in report.indices_D and not oracle.differentiable:
                raise ValueError(f"component {i + 1} is evaluated through its gradient but the oracle has none")
        self.rep = rep
        self.instance = list(instance)
        self.dim = dims.pop()
        self.order = report.permutation
        self.A, self.B = np.asarray(rep.A), np.asarray(rep.B)
        self.C, self.D = np.asarray(rep.C), np.asarray(rep.D)

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        由状态 x 计算 (u, y, F)

        [D]_ii < 0 的分量走 prox 分支（步长 -[D]_ii），其余分量走梯度分支
        """
        m = self.rep.m
        u = np.zeros((m, self.dim))
        y = np.zeros((m, self.dim))
        F = np.zeros(m)
        for i in self.order:
            v = self.C[i] @ x + self.D[i] @ u
            oracle = self.instance[i]
            step = -self.D[i, i]
            if step > 0:
                y[i] = oracle.prox(v, step)
                u[i] = (v - y[i]) / step
            else:
                y[i] = v
                u[i] = oracle.grad(v)
            F[i] = oracle.value(y[i])
        return u, y, F

    def step(self, x: np.ndarray) -> Tuple[TrajectoryPoint, np.ndarray]:
        u, y, F = self.evaluate(x)
        point = TrajectoryPoint(x=x, u=u, y=y, F=F)
        return point, self.A @ x + self.B @ u


def run(
    rep: MethodRepresentation,
    instance: Sequence[ComponentOracle],
    x0: np.ndarray,
    steps: int,
    divergence_bound: float = SIM_CONFIG["divergence_bound"],
) -> Trajectory:
    """
    执行 steps 次迭代，产出 steps + 1 个点 ξ_0, ..., ξ_K

    Args:
        rep: 状态空间表示（须适定）
        instance: 每个分量的函数
        x0: 初始状态，形状 n×d（d = 1 时也接受长度 n 的向量）
        steps: 迭代次数 K
        divergence_bound: 状态范数上限

    Returns:
        Trajectory；发散时 status = "diverged" 并给出迭代下标

    Raises:
        ValueError: 方法不适定或实例不匹配
    """
    sim = Simulator(rep, instance)
    x = np.asarray(x0, dtype=float).reshape(rep.n, sim.dim)
    points: List[TrajectoryPoint] = []
    for k in range(steps + 1):
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > divergence_bound:
            logger.warning(f"Trajectory diverged at iteration {k}")
            return Trajectory(points=points, status="diverged", divergence_iteration=k,
                              diagnostics=[f"|x_{k}| exceeded {divergence_bound:g}"])
        point, x = sim.step(x)
        if not (np.all(np.isfinite(point.u)) and np.all(np.isfinite(point.y))):
            return Trajectory(points=points, status="diverged", divergence_iteration=k,
                              diagnostics=[f"non-finite oracle output at iteration {k}"])
        points.append(point)
    return Trajectory(points=points)


def find_fixed_point(
    rep: MethodRepresentation,
    instance: Sequence[ComponentOracle],
    x0: Optional[np.ndarray] = None,
    max_iter: int = SIM_CONFIG["fixed_point_max_iter"],
    divergence_bound: float = SIM_CONFIG["divergence_bound"],
) -> TrajectoryPoint:
    """
    迭代至 |x_{k+1} - x_k| <= 1e-12 (1 + |x_k|)，再检查 y⋆ 各分量一致且 Σ u⋆ = 0

    Returns:
        不动点 ξ⋆ = (x⋆, u⋆, y⋆, F⋆)

    Raises:
        DivergenceError: 迭代发散
        FixedPointError: 未收敛或一致性条件不成立
    """
    sim = Simulator(rep, instance)
    x = np.zeros((rep.n, sim.dim)) if x0 is None else np.asarray(x0, dtype=float).reshape(rep.n, sim.dim)
    residual = np.inf
    for k in range(int(max_iter)):
        _, x_next = sim.step(x)
        norm = float(np.linalg.norm(x_next))
        if not np.isfinite(norm) or norm > divergence_bound:
            raise DivergenceError(k + 1, norm)
        residual = float(np.linalg.norm(x_next - x))
        x = x_next
        if residual <= FIXED_POINT_RTOL * (1.0 + norm):
            break
    else:
        raise FixedPointError("fixed-point iteration did not converge", int(max_iter), residual)

    point, _ = sim.step(x)
    spread = float(np.max(np.linalg.norm(point.y - point.y[-1], axis=1)))
    balance = float(np.linalg.norm(point.u.sum(axis=0)))
    if spread > CONSENSUS_TOL or balance > CONSENSUS_TOL:
        raise FixedPointError(
            f"limit is not a solution: max |y_i - y_m| = {spread:.3e}, |sum u_i| = {balance:.3e}",
            k + 1, residual,
        )
    logger.debug(f"Fixed point found after {k + 1} iterations (residual {residual:.3e})")
    return point


def _lift(point: TrajectoryPoint, star: TrajectoryPoint) -> np.ndarray:
    """ξ - ξ⋆ 的坐标 (x - x⋆, u, u⋆)，形状 (n+2m)×d"""
    return np.vstack([np.asarray(point.x) - np.asarray(star.x), point.u, star.u])


def _form(M: np.ndarray, c: np.ndarray, Z: np.ndarray, dF: np.ndarray) -> float:
    return float(np.sum(Z * (M @ Z)) + np.dot(c, dF))


def audit_certificate(
    trajectory: Trajectory,
    fixed_point: TrajectoryPoint,
    cert: LyapunovCertificate,
    lb: LowerBoundSpec,
    rho: float,
    rep: Optional[MethodRepresentation] = None,
) -> AuditReport:
    """
    沿轨迹检查 Lyapunov 不等式、两个下界、ρ^k 衰减与 Σ R_k <= V_0，
    duality_gap 预设下还核对 T、t 与对偶间隙的一致性；给出 rep 时检查 y = Cx + Du
    与每个分量相对于 ⋆ 的插值不等式

    Returns:
        AuditReport（不抛出异常）
    """
    points = trajectory.points
    violations: List[AuditViolation] = []

    def record(check: str, k: int, amount: float) -> None:
        if amount > 0:
            violations.append(AuditViolation(check=check, k=k, amount=amount))

    F_star = np.asarray(fixed_point.F)
    V, R, Pf, Tf = [], [], [], []
    for point in points:
        Z = _lift(point, fixed_point)
        dF = np.asarray(point.F) - F_star
        V.append(_form(cert.Q, cert.q, Z, dF))
        R.append(_form(cert.S, cert.s, Z, dF))
        Pf.append(_form(lb.P, lb.p, Z, dF))
        Tf.append(_form(lb.T, lb.t, Z, dF))

    for k in range(len(points)):
        record("lower_bound_V", k, Pf[k] - V[k] - AUDIT_RTOL * (1.0 + abs(V[k])))
        record("lower_bound_R", k, Tf[k] - R[k] - AUDIT_RTOL * (1.0 + abs(R[k])))
        if k + 1 < len(points):
            record("lyapunov", k, V[k + 1] - rho * V[k] + R[k] - AUDIT_RTOL * (1.0 + abs(V[k])))

    # V_k <= ρ^k V_0 - Σ_{j<k} ρ^{k-1-j} R_j
    scale = 1.0 + max((abs(v) for v in V), default=0.0)
    bound = V[0] if V else 0.0
    for k in range(1, len(points)):
        bound = rho * bound - R[k - 1]
        record("decay", k, V[k] - bound - AUDIT_RTOL * (k + 1) * scale)

    if rho <= 1.0 and all(v >= -AUDIT_RTOL * scale for v in V):
        partial = 0.0
        for k in range(len(points) - 1):
            partial += R[k]
            record("telescoping", k, partial - V[0] - AUDIT_RTOL * (k + 1) * scale)

    if lb.kind.startswith("duality_gap"):
        y_star = np.asarray(fixed_point.y)
        u_star = np.asarray(fixed_point.u)
        for k, point in enumerate(points):
            gap = float(np.sum(np.asarray(point.F) - F_star) - np.sum(u_star * (np.asarray(point.y) - y_star)))
            record("duality_gap", k, abs(Tf[k] - gap) - AUDIT_RTOL * (1.0 + abs(gap)))
            record("duality_gap_sign", k, -gap - AUDIT_RTOL * (1.0 + abs(gap)))

    if rep is not None:
        C, D = np.asarray(rep.C), np.asarray(rep.D)
        for k, point in enumerate(points):
            x, u, y = np.asarray(point.x), np.asarray(point.u), np.asarray(point.y)
            mismatch = float(np.max(np.abs(C @ x + D @ u - y)))
            record("consistency", k, mismatch - 1e-9 * (1.0 + float(np.max(np.abs(y)))))
            for i, cls in enumerate(rep.classes):
                family = [
                    Triplet(y=y[i], F=float(point.F[i]), u=u[i]),
                    Triplet(y=fixed_point.y[i], F=float(fixed_point.F[i]), u=fixed_point.u[i]),
                ]
                record(f"inclusion[{i + 1}]", k, worst_interpolation_violation(family, cls))

    max_violation = max((v.amount for v in violations), default=0.0)
    return AuditReport(
        passed=not violations,
        max_violation=max_violation,
        steps=len(points),
        violations=violations,
        V=V,
        R=R,
    )


def _audit_instance(task: Tuple) -> InstanceAudit:
    """单个随机实例的审计（工作进程入口）：失败记录在结果中"""
    rep, cert, lb, rho, seed, index, steps, dim = task
    start_time = time.time()
    rng = np.random.default_rng([seed, index])
    try:
        instance = random_instance(rep.classes, rng, dim)
        star = find_fixed_point(rep, instance)
    except (DivergenceError, FixedPointError) as e:
        return InstanceAudit(seed=seed, index=index, status="skipped", error=str(e),
                             duration_ms=(time.time() - start_time) * 1000)

    x0 = np.asarray(star.x) + rng.normal(size=star.x.shape)
    trajectory = run(rep, instance, x0, steps)
    report = audit_certificate(trajectory, star, cert, lb, rho, rep)
    duration_ms = (time.time() - start_time) * 1000
    if trajectory.status == "diverged":
        return InstanceAudit(seed=seed, index=index, status="failure", max_violation=report.max_violation,
                             error=f"trajectory diverged at iteration {trajectory.divergence_iteration}",
                             duration_ms=duration_ms)
    if not report.passed:
        worst = max(report.violations, key=lambda v: v.amount)
        return InstanceAudit(seed=seed, index=index, status="failure", max_violation=report.max_violation,
                             error=f"{worst.check} violated at k={worst.k} by {worst.amount:.3e}",
                             duration_ms=duration_ms)
    return InstanceAudit(seed=seed, index=index, status="success", max_violation=report.max_violation,
                         duration_ms=duration_ms)


def audit_method(
    rep: MethodRepresentation,
    cert: LyapunovCertificate,
    lb: LowerBoundSpec,
    rho: float,
    instances: int = SIM_CONFIG["instances"],
    seed: int = SIM_CONFIG["seed"],
    steps: int = SIM_CONFIG["steps"],
    dim: int = SIM_CONFIG["dim"],
    jobs: int = 1,
) -> AuditSummary:
    """
    在 instances 个随机实例上审计证书；实例 i 使用种子 (seed, i)

    Args:
        rep: 状态空间表示
        cert: 已复核的证书
        lb: 证书对应的下界
        rho: 收缩因子
        instances: 实例个数
        seed: 随机种子
        steps: 每条轨迹的迭代次数
        dim: 点的维数 d
        jobs: 并行进程数

    Returns:
        AuditSummary 对象
    """
    tasks = [(rep, cert, lb, rho, seed, index, steps, dim) for index in range(instances)]
    logger.info(f"Auditing {rep.family or 'custom method'} at rho={rho:.6g} on {instances} instances (jobs={jobs})")
    if jobs > 1 and instances > 1:
        with Pool(processes=jobs) as pool:
            results = pool.map(_audit_instance, tasks)
    else:
        results = [_audit_instance(task) for task in tasks]

    for result in results:
        if result.status == "failure":
            logger.error(f"Instance {result.index} failed: {result.error}")
        elif result.status == "skipped":
            logger.warning(f"Instance {result.index} skipped: {result.error}")

    passed = sum(1 for r in results if r.status == "success")
    failed = sum(1 for r in results if r.status == "failure")
    skipped = sum(1 for r in results if r.status == "skipped")
    max_violation = max((r.max_violation or 0.0 for r in results), default=0.0)
    logger.info(f"Audit finished: {passed} passed, {failed} failed, {skipped} skipped")
    return AuditSummary(instances=instances, passed=passed, failed=failed, skipped=skipped,
                        max_violation=max_violation, results=results)
