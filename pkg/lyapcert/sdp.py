"""
Dense semidefinite programming layer: problem container, phase-I
feasibility, linear maximization and a pluggable conic backend
"""
import sys
import os

# 添加父目录到路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from abc import ABC, abstractmethod
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy import linalg

from config import FACIAL_REDUCTION, FEAS_EPS, LYAPCERT_BACKEND, SOLVER_OPTIONS, VAR_BOUND
from .matkit import lstsq, min_eig, null_space, orth, sym
from .models import MaxOutcome, SdpOutcome

logger = logging.getLogger(__name__)

# 尝试导入 cvxpy，如果没有安装则备用后端不可用
try:
    import cvxpy as cp
    CVXPY_AVAILABLE = True
except ImportError:
    CVXPY_AVAILABLE = False

ZERO_TOL = 1e-14


class SolverError(RuntimeError):
    """后端求解失败"""


class SymAffine:
    """对称矩阵值仿射映射 x -> F0 + Σ x_i F_i"""

    def __init__(self, label: str, const: np.ndarray, coeffs: np.ndarray):
        self.label = label
        self.const = np.asarray(const, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)
        k = self.const.shape[0]
        if self.const.shape != (k, k) or self.coeffs.shape[1:] != (k, k):
            raise ValueError(f"block '{label}': inconsistent shapes {self.const.shape} / {self.coeffs.shape}")

    @property
    def size(self) -> int:
        return self.const.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return sym(self.const + np.tensordot(x, self.coeffs, axes=1))


class VecAffine:
    """向量值仿射映射 x -> b + A x"""

    def __init__(self, label: str, const: np.ndarray, coeffs: np.ndarray):
        self.label = label
        self.const = np.asarray(const, dtype=float).ravel()
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        if self.coeffs.shape[0] != self.const.size:
            raise ValueError(f"map '{label}': {self.coeffs.shape[0]} rows vs {self.const.size} constants")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.const + self.coeffs @ x


class SdpProblem:
    """
    稠密 LMI 问题：PSD 块、等式约束、非负变量、线性不等式（>= 0）与线性目标
    """

    def __init__(self, var_count: int, var_names: Optional[Sequence[str]] = None):
        self.var_count = int(var_count)
        self.var_names = list(var_names) if var_names is not None else [f"x{i}" for i in range(var_count)]
        if len(self.var_names) != self.var_count:
            raise ValueError("var_names length must match var_count")
        self.psd_blocks: List[SymAffine] = []
        self.eq_constraints: List[VecAffine] = []
        self.lin_ineqs: List[VecAffine] = []
        self.nonneg_vars: List[int] = []
        self.objective = np.zeros(self.var_count)
        self.objective_const = 0.0
        self.metadata: Dict[str, object] = {}

    def _check_label(self, label: str) -> None:
        labels = [c.label for c in self.psd_blocks + self.eq_constraints + self.lin_ineqs]
        if label in labels:
            raise ValueError(f"duplicate constraint label '{label}'")

    def add_psd(self, label: str, const: np.ndarray, coeffs: np.ndarray) -> SymAffine:
        self._check_label(label)
        block = SymAffine(label, const, coeffs)
        if block.coeffs.shape[0] != self.var_count:
            raise ValueError(f"block '{label}': expected {self.var_count} coefficient matrices")
        self.psd_blocks.append(block)
        return block

    def add_eq(self, label: str, const: np.ndarray, coeffs: np.ndarray) -> VecAffine:
        self._check_label(label)
        eq = VecAffine(label, const, coeffs)
        if eq.coeffs.shape[1] != self.var_count:
            raise ValueError(f"equality '{label}': expected {self.var_count} columns")
        self.eq_constraints.append(eq)
        return eq

    def add_ineq(self, label: str, const: np.ndarray, coeffs: np.ndarray) -> VecAffine:
        self._check_label(label)
        ineq = VecAffine(label, const, coeffs)
        if ineq.coeffs.shape[1] != self.var_count:
            raise ValueError(f"inequality '{label}': expected {self.var_count} columns")
        self.lin_ineqs.append(ineq)
        return ineq

    def set_nonneg(self, indices: Sequence[int]) -> None:
        self.nonneg_vars = sorted(set(self.nonneg_vars) | {int(i) for i in indices})

    def set_objective(self, coeffs: np.ndarray, const: float = 0.0) -> None:
        coeffs = np.asarray(coeffs, dtype=float).ravel()
        if coeffs.size != self.var_count:
            raise ValueError("objective length must match var_count")
        self.objective = coeffs
        self.objective_const = float(const)

    def residuals(self, x: np.ndarray) -> Dict[str, float]:
        """各约束在 x 处的检查量：PSD 块最小特征值、等式残差、不等式最小值"""
        out: Dict[str, float] = {}
        for block in self.psd_blocks:
            out[block.label] = min_eig(block.evaluate(x)) if block.size else 0.0
        for eq in self.eq_constraints:
            r = eq.evaluate(x)
            out[eq.label] = float(np.max(np.abs(r))) if r.size else 0.0
        for ineq in self.lin_ineqs:
            r = ineq.evaluate(x)
            out[ineq.label] = float(np.min(r)) if r.size else 0.0
        if self.nonneg_vars:
            out["nonneg"] = float(np.min(x[self.nonneg_vars]))
        return out

    def margin(self, x: np.ndarray) -> float:
        """min(PSD 块最小特征值, 非负变量, 不等式)，即 x 处的 phase-I 间隔"""
        values = [np.inf]
        for block in self.psd_blocks:
            if block.size:
                values.append(min_eig(block.evaluate(x)))
        for ineq in self.lin_ineqs:
            r = ineq.evaluate(x)
            if r.size:
                values.append(float(np.min(r)))
        if self.nonneg_vars:
            values.append(float(np.min(x[self.nonneg_vars])))
        return float(min(values))

    def __repr__(self) -> str:
        blocks = ", ".join(f"{b.label}:{b.size}" for b in self.psd_blocks)
        return f"SdpProblem(vars={self.var_count}, blocks=[{blocks}], eqs={len(self.eq_constraints)})"


class ConicProgram:
    """
    后端接口的标准形式：minimize c^T v s.t. hl - Gl v >= 0, hs_k - mat(Gs_k v) ⪰ 0
    """

    def __init__(self, c: np.ndarray, Gl: np.ndarray, hl: np.ndarray, Gs: List[np.ndarray], hs: List[np.ndarray]):
        self.c = np.asarray(c, dtype=float)
        self.Gl = np.asarray(Gl, dtype=float).reshape(-1, self.c.size)
        self.hl = np.asarray(hl, dtype=float).ravel()
        self.Gs = Gs
        self.hs = hs


class ConicSolution:
    def __init__(
        self,
        status: str,
        v: Optional[np.ndarray],
        iterations: int,
        primal_objective: Optional[float] = None,
        dual_objective: Optional[float] = None,
        message: str = "",
        zl: Optional[np.ndarray] = None,
        zs: Optional[List[np.ndarray]] = None,
    ):
        self.status = status
        self.v = v
        self.iterations = iterations
        self.primal_objective = primal_objective
        self.dual_objective = dual_objective
        self.message = message
        # 对偶变量：线性不等式与各 PSD 块，与 ConicProgram 的行/块一一对应
        self.zl = zl
        self.zs = zs


class SolverBackend(ABC):
    """求解器后端接口"""

    name = "abstract"

    @abstractmethod
    def solve(self, program: ConicProgram, options: Dict[str, float]) -> ConicSolution:
        ...


class CvxoptBackend(SolverBackend):
    """
    cvxopt.solvers.sdp：带 Nesterov-Todd 缩放的原始-对偶内点法
    """

    name = "cvxopt"

    def solve(self, program: ConicProgram, options: Dict[str, float]) -> ConicSolution:
        from cvxopt import matrix, solvers

        opts = {"show_progress": False}
        opts.update(options)
        c = matrix(program.c)
        Gl = matrix(np.ascontiguousarray(program.Gl)) if program.Gl.shape[0] else None
        hl = matrix(program.hl) if program.Gl.shape[0] else None
        Gs = [matrix(np.ascontiguousarray(G)) for G in program.Gs] or None
        hs = [matrix(np.ascontiguousarray(h)) for h in program.hs] or None
        try:
            sol = solvers.sdp(c, Gl=Gl, hl=hl, Gs=Gs, hs=hs, options=opts)
        except (ValueError, ArithmeticError) as e:
            raise SolverError(f"cvxopt failed: {e}")

        v = np.array(sol["x"]).ravel() if sol["x"] is not None else None
        zl = np.array(sol["zl"]).ravel() if sol.get("zl") is not None else None
        zs = [np.array(Z) for Z in sol["zs"]] if sol.get("zs") is not None else None
        return ConicSolution(
            status=sol["status"],
            v=v,
            iterations=int(sol.get("iterations", 0) or 0),
            primal_objective=sol.get("primal objective"),
            dual_objective=sol.get("dual objective"),
            zl=zl,
            zs=zs,
        )


class CvxpyBackend(SolverBackend):
    """cvxpy 建模的备用后端（使用 cvxpy 默认 SDP 求解器）"""

    name = "cvxpy"

    _STATUS = {
        "optimal": "optimal",
        "optimal_inaccurate": "unknown",
        "infeasible": "primal infeasible",
        "unbounded": "dual infeasible",
    }

    def solve(self, program: ConicProgram, options: Dict[str, float]) -> ConicSolution:
        if not CVXPY_AVAILABLE:
            raise SolverError("cvxpy is not installed. Use the cvxopt backend.")
        v = cp.Variable(program.c.size)
        constraints = []
        if program.Gl.shape[0]:
            constraints.append(program.Gl @ v <= program.hl)
        for G, h in zip(program.Gs, program.hs):
            k = h.shape[0]
            S = h - cp.reshape(G @ v, (k, k), order="F")
            constraints.append((S + S.T) / 2 >> 0)
        problem = cp.Problem(cp.Minimize(program.c @ v), constraints)
        try:
            problem.solve(max_iters=int(options.get("maxiters", 100)))
        except cp.error.SolverError as e:
            raise SolverError(f"cvxpy failed: {e}")
        status = self._STATUS.get(problem.status, "unknown")
        value = None if problem.value is None or not np.isfinite(problem.value) else float(problem.value)
        duals = [con.dual_value for con in constraints]
        zl = None
        if program.Gl.shape[0]:
            zl = None if duals[0] is None else np.asarray(duals[0], dtype=float).ravel()
            duals = duals[1:]
        zs = None if any(Z is None for Z in duals) else [np.asarray(Z, dtype=float) for Z in duals]
        return ConicSolution(
            status=status,
            v=None if v.value is None else np.asarray(v.value).ravel(),
            iterations=int(problem.solver_stats.num_iters or 0) if problem.solver_stats else 0,
            primal_objective=value,
            dual_objective=value,
            zl=zl,
            zs=zs,
        )


_BACKENDS: Dict[str, Callable[[], SolverBackend]] = {
    "cvxopt": CvxoptBackend,
    "cvxpy": CvxpyBackend,
}


def register_backend(name: str, factory: Callable[[], SolverBackend]) -> None:
    if name in _BACKENDS:
        logger.warning(f"Backend '{name}' already registered. Overwriting.")
    _BACKENDS[name] = factory


def get_backend(name: Optional[str] = None) -> SolverBackend:
    """
    Raises:
        KeyError: 后端不存在
    """
    name = name or LYAPCERT_BACKEND
    if name not in _BACKENDS:
        raise KeyError(f"SDP backend '{name}' not found. Available: {list(_BACKENDS)}")
    return _BACKENDS[name]()


class _Reduction:
    """消去等式约束后的参数化 x = x0 + Z y，以及化简后的各约束"""

    def __init__(self, problem: SdpProblem):
        nv = problem.var_count
        if problem.eq_constraints:
            Aeq = np.vstack([eq.coeffs for eq in problem.eq_constraints])
            beq = -np.concatenate([eq.const for eq in problem.eq_constraints])
            x0, residual = lstsq(Aeq, beq)
            scale = 1.0 + (float(np.max(np.abs(beq))) if beq.size else 0.0)
            self.consistent = residual <= 1e-9 * scale
            self.eq_residual = residual
            Z = null_space(Aeq)
        else:
            x0 = np.zeros(nv)
            self.consistent = True
            self.eq_residual = 0.0
            Z = np.eye(nv)
        self.x0 = x0
        self.Z = Z

        # 化简 PSD 块并剔除结构性零行/列
        self.blocks: List[Tuple[np.ndarray, np.ndarray]] = []
        for block in problem.psd_blocks:
            if block.size == 0:
                continue
            F0 = block.const + np.tensordot(x0, block.coeffs, axes=1)
            Fy = np.tensordot(Z.T, block.coeffs, axes=1)
            scale = 1.0 + float(np.max(np.abs(block.coeffs))) + float(np.max(np.abs(block.const)))
            row_mass = np.max(np.abs(F0), axis=1)
            if Fy.shape[0]:
                row_mass = np.maximum(row_mass, np.max(np.abs(Fy), axis=(0, 2)))
            keep = np.where(row_mass > ZERO_TOL * scale)[0]
            if keep.size == 0:
                continue
            self.blocks.append((sym(F0[np.ix_(keep, keep)]), Fy[:, keep][:, :, keep]))

        # 非负变量与线性不等式统一为 b + A y >= 0
        rows_A, rows_b = [], []
        if problem.nonneg_vars:
            idx = problem.nonneg_vars
            rows_A.append(Z[idx, :])
            rows_b.append(x0[idx])
        for ineq in problem.lin_ineqs:
            rows_A.append(ineq.coeffs @ Z)
            rows_b.append(ineq.const + ineq.coeffs @ x0)
        self.ineq_A = np.vstack(rows_A) if rows_A else np.zeros((0, Z.shape[1]))
        self.ineq_b = np.concatenate(rows_b) if rows_b else np.zeros(0)
        self.faces = 0

    def restricted(
        self,
        kernels: Dict[int, np.ndarray],
        rows: Sequence[int],
        null_rtol: float,
    ) -> Optional["_Reduction"]:
        """
        限制到面 {F_k(y) V_k = 0, (b + A y)_j = 0 (j ∈ rows)}，块 k 缩到 V_k 的正交补

        Returns:
            新的化简；等式不相容时返回 None
        """
        r = self.dim
        L_parts, c_parts = [], []
        for k, V in kernels.items():
            F0, Fy = self.blocks[k]
            c_parts.append((F0 @ V).ravel())
            L_parts.append((Fy @ V).reshape(r, -1).T)
        if len(rows):
            L_parts.append(self.ineq_A[list(rows)])
            c_parts.append(self.ineq_b[list(rows)])
        L = np.vstack(L_parts)
        c = np.concatenate(c_parts)
        scale = 1.0 + float(np.max(np.abs(c))) + (float(np.max(np.abs(L))) if L.size else 0.0)
        y0, residual = lstsq(L, -c)
        if residual > null_rtol * scale:
            return None
        Zn = null_space(L, rcond=null_rtol)

        out = object.__new__(_Reduction)
        out.consistent = True
        out.eq_residual = residual
        out.x0 = self.x0 + self.Z @ y0
        out.Z = self.Z @ Zn
        out.blocks = []
        for k, (F0, Fy) in enumerate(self.blocks):
            F0 = F0 + np.tensordot(y0, Fy, axes=1)
            Fy = np.tensordot(Zn.T, Fy, axes=1)
            if k in kernels:
                W = null_space(kernels[k].T)
                if W.shape[1] == 0:
                    continue
                F0 = W.T @ F0 @ W
                Fy = np.einsum("ia,vij,jb->vab", W, Fy, W)
            out.blocks.append((sym(F0), Fy))
        keep = [j for j in range(self.ineq_b.size) if j not in set(rows)]
        out.ineq_b = (self.ineq_b + self.ineq_A @ y0)[keep]
        out.ineq_A = (self.ineq_A @ Zn)[keep]
        out.faces = self.faces + 1
        return out

    @property
    def dim(self) -> int:
        return self.Z.shape[1]

    def point(self, y: np.ndarray) -> np.ndarray:
        return self.x0 + self.Z @ y

    def margin(self, y: np.ndarray) -> float:
        """化简后约束在 y 处的间隔（等式已由参数化精确满足）"""
        values = [np.inf]
        for F0, Fy in self.blocks:
            F = F0 + np.tensordot(y, Fy, axes=1) if Fy.shape[0] else F0
            values.append(min_eig(sym(F)))
        if self.ineq_b.size:
            values.append(float(np.min(self.ineq_b + self.ineq_A @ y)))
        return float(min(values))


def _block_columns(Fy: np.ndarray) -> np.ndarray:
    """把系数矩阵堆叠为 k^2 × r 的列（按列展开）"""
    r, k, _ = Fy.shape
    return Fy.reshape(r, k * k).T


def solve_feasibility(
    problem: SdpProblem,
    backend: Optional[SolverBackend] = None,
    feas_eps: float = FEAS_EPS,
    var_bound: float = VAR_BOUND,
    options: Optional[Dict[str, float]] = None,
) -> SdpOutcome:
    """
    Phase-I：maximize t s.t. 每个 PSD 块 ⪰ tI，等式精确成立，非负变量与不等式 >= t

    Args:
        problem: SdpProblem
        backend: 求解器后端（默认由配置决定）
        feas_eps: 判定带宽，t >= feas_eps 可行，t <= -feas_eps 不可行
        var_bound: 原变量的盒约束 |x_i| <= var_bound
        options: 覆盖默认求解器选项

    Returns:
        SdpOutcome 对象

    Raises:
        ValueError: 问题没有变量
    """
    if problem.var_count == 0:
        raise ValueError("solve_feasibility: problem has no decision variables")
    backend = backend or get_backend()
    opts = dict(SOLVER_OPTIONS)
    opts.update(options or {})

    red = _Reduction(problem)
    if not red.consistent:
        logger.info(f"Equality constraints inconsistent (residual {red.eq_residual:.3e})")
        return SdpOutcome(status="Infeasible", margin=-np.inf, diagnostics=[
            f"equality constraints are inconsistent (residual {red.eq_residual:.3e})"
        ])

    diagnostics = [f"backend={backend.name}"]
    outcome, sol = _phase_one(red, backend, opts, feas_eps, var_bound, diagnostics)
    for _ in range(FACIAL_REDUCTION["rounds"]):
        if outcome.status in ("Feasible", "Infeasible") or sol is None:
            break
        face = _dual_face(red, sol)
        if face is None:
            break
        kernels, rows = face
        reduced = red.restricted(kernels, rows, FACIAL_REDUCTION["null_rtol"])
        if reduced is None:
            diagnostics.append("facial reduction: face equalities are inconsistent")
            break
        dims = sum(V.shape[1] for V in kernels.values())
        diagnostics.append(
            f"facial reduction {reduced.faces}: {dims} kernel directions, {len(rows)} tight rows, "
            f"{reduced.dim} free variables left"
        )
        logger.debug(diagnostics[-1])
        red = reduced
        retry, sol = _phase_one(red, backend, opts, feas_eps, var_bound, diagnostics)
        if retry.status == "Infeasible":
            # 面由数值对偶读出，面上不可行时不改变原来的带内结论
            diagnostics.append("facial reduction: reduced face has no interior")
            break
        outcome = retry

    return outcome.model_copy(update={"diagnostics": diagnostics})


def _phase_one(
    red: _Reduction,
    backend: SolverBackend,
    opts: Dict[str, float],
    feas_eps: float,
    var_bound: float,
    diagnostics: List[str],
) -> Tuple[SdpOutcome, Optional[ConicSolution]]:
    """在当前化简上求解一次 phase-I，返回结论与求解器原始解"""
    r = red.dim
    if r == 0:
        measured = red.margin(np.zeros(0))
        if measured >= feas_eps:
            status = "Feasible"
        elif measured <= -feas_eps:
            status = "Infeasible"
        else:
            status = "Marginal"
        point = red.point(np.zeros(0)) if status == "Feasible" else None
        return SdpOutcome(status=status, point=point, margin=measured), None

    nvar = r + 1
    t_col = np.zeros((1, nvar))
    t_col[0, -1] = 1.0

    Gs, hs = [], []
    for F0, Fy in red.blocks:
        k = F0.shape[0]
        G = np.zeros((k * k, nvar))
        G[:, :r] = -_block_columns(Fy)
        G[:, -1] = np.eye(k).ravel()
        Gs.append(G)
        hs.append(F0)

    Gl_rows = [np.hstack([-red.ineq_A, np.ones((red.ineq_A.shape[0], 1))])]
    hl_rows = [red.ineq_b]
    # t <= 1
    Gl_rows.append(t_col)
    hl_rows.append(np.ones(1))
    # |x_i| <= var_bound
    Zpad = np.hstack([red.Z, np.zeros((red.Z.shape[0], 1))])
    Gl_rows += [Zpad, -Zpad]
    hl_rows += [var_bound - red.x0, var_bound + red.x0]

    c = np.zeros(nvar)
    c[-1] = -1.0
    program = ConicProgram(c, np.vstack(Gl_rows), np.concatenate(hl_rows), Gs, hs)

    try:
        sol = backend.solve(program, opts)
    except SolverError as e:
        logger.warning(f"Phase-I solve failed: {e}")
        diagnostics.append(str(e))
        return SdpOutcome(status="Marginal", margin=0.0), None

    diagnostics.append(f"solver status={sol.status}")
    if sol.v is None:
        return SdpOutcome(status="Marginal", margin=0.0, iterations=sol.iterations), None

    y = sol.v[:r]
    measured = red.margin(y)
    t_solver = float(sol.v[-1])
    if measured >= feas_eps:
        return SdpOutcome(status="Feasible", point=red.point(y), margin=measured,
                          iterations=sol.iterations), sol

    if sol.status == "optimal":
        # 对偶目标给出 t 的上界
        t_upper = -float(sol.dual_objective) if sol.dual_objective is not None else t_solver
        if t_upper <= -feas_eps:
            return SdpOutcome(status="Infeasible", margin=t_upper, iterations=sol.iterations), sol
        return SdpOutcome(status="Marginal", margin=t_solver, iterations=sol.iterations), sol

    status = "MaxIterations" if sol.iterations >= int(opts.get("maxiters", 100)) else "Marginal"
    return SdpOutcome(status=status, margin=t_solver, iterations=sol.iterations), sol


def _dual_face(red: _Reduction, sol: ConicSolution) -> Optional[Tuple[Dict[int, np.ndarray], List[int]]]:
    """
    从 phase-I 对偶解读出约化证书

    若 Z_k ⪰ 0、μ >= 0 使 Σ<F_k(y), Z_k> + μ^T(b + A y) 对所有 y 恒为零，
    则每个可行点都满足 F_k(y) Z_k = 0，且 μ_j > 0 的不等式取等。
    盒约束的乘子不可忽略时该解不构成证书。

    Returns:
        ({块下标: 核方向的正交基}, 取等的不等式行)；读不出证书时返回 None
    """
    if sol.zs is None or sol.zl is None or len(sol.zs) != len(red.blocks):
        return None
    cert_tol = FACIAL_REDUCTION["certificate_tol"]
    rank_rtol = FACIAL_REDUCTION["rank_rtol"]

    n_ineq = red.ineq_b.size
    mu = np.maximum(sol.zl[:n_ineq], 0.0)
    box = sol.zl[n_ineq + 1:]
    Zs = [sym(Z) for Z in sol.zs]
    mass = float(sum(np.trace(Z) for Z in Zs) + np.sum(mu))
    if not mass > 0.0:
        return None
    if box.size and float(np.max(np.abs(box))) > cert_tol * mass:
        return None

    scale = 1.0
    value = float(mu @ red.ineq_b)
    grad = red.ineq_A.T @ mu
    for (F0, Fy), Z in zip(red.blocks, Zs):
        value += float(np.sum(F0 * Z))
        grad = grad + np.tensordot(Fy, Z, axes=([1, 2], [0, 1]))
        scale = max(scale, float(np.max(np.abs(F0))), float(np.max(np.abs(Fy))) if Fy.size else 0.0)
    if red.ineq_A.size:
        scale = max(scale, float(np.max(np.abs(red.ineq_A))), float(np.max(np.abs(red.ineq_b))))
    bound = cert_tol * mass * scale
    if abs(value) > bound or (grad.size and float(np.max(np.abs(grad))) > bound):
        return None

    spectra = [linalg.eigh(Z) for Z in Zs]
    top = max([float(np.max(w)) for w, _ in spectra if w.size] + [float(np.max(mu)) if mu.size else 0.0])
    kernels: Dict[int, np.ndarray] = {}
    for k, (w, U) in enumerate(spectra):
        keep = w > rank_rtol * top
        if np.any(keep):
            kernels[k] = U[:, keep]
    rows = [int(j) for j in np.where(mu > rank_rtol * top)[0]]
    if not kernels and not rows:
        return None
    return kernels, rows


def solve_max(
    problem: SdpProblem,
    backend: Optional[SolverBackend] = None,
    options: Optional[Dict[str, float]] = None,
) -> MaxOutcome:
    """
    maximize c^T x + c0 s.t. PSD 块 ⪰ 0、等式、非负变量与线性不等式 >= 0

    Returns:
        MaxOutcome 对象；无界时 status = "Unbounded"
    """
    if problem.var_count == 0:
        raise ValueError("solve_max: problem has no decision variables")
    if not np.any(problem.objective):
        logger.debug("solve_max called with a zero objective")
    backend = backend or get_backend()
    opts = dict(SOLVER_OPTIONS)
    opts.update(options or {})

    red = _Reduction(problem)
    if not red.consistent:
        return MaxOutcome(status="Infeasible", diagnostics=["equality constraints are inconsistent"])

    c_y = red.Z.T @ problem.objective
    const = float(problem.objective @ red.x0) + problem.objective_const

    G_parts = [-red.ineq_A] + [-_block_columns(Fy) for _, Fy in red.blocks]
    G_all = np.vstack(G_parts) if G_parts else np.zeros((0, red.dim))
    # 只在约束涉及的方向上求解；目标在自由方向上非零即无界
    R = orth(G_all.T) if G_all.size else np.zeros((red.dim, 0))
    free_part = c_y - R @ (R.T @ c_y)
    if np.max(np.abs(free_part), initial=0.0) > 1e-10 * (1.0 + np.max(np.abs(c_y), initial=0.0)):
        return MaxOutcome(status="Unbounded", diagnostics=["objective increases along an unconstrained direction"])
    if R.shape[1] == 0:
        return MaxOutcome(status="Optimal", value=const, point=red.x0)

    Gs = [-_block_columns(Fy) @ R for _, Fy in red.blocks]
    hs = [F0 for F0, _ in red.blocks]
    Gl = -red.ineq_A @ R
    program = ConicProgram(-(R.T @ c_y), Gl, red.ineq_b, Gs, hs)

    try:
        sol = backend.solve(program, opts)
    except SolverError as e:
        logger.warning(f"Maximization failed: {e}")
        return MaxOutcome(status="Marginal", diagnostics=[str(e)])

    diagnostics = [f"backend={backend.name}", f"solver status={sol.status}"]
    point = red.point(R @ sol.v) if sol.v is not None else None
    if sol.status == "optimal":
        value = float(problem.objective @ point) + problem.objective_const
        return MaxOutcome(status="Optimal", value=value, point=point, iterations=sol.iterations, diagnostics=diagnostics)
    if sol.status == "dual infeasible":
        return MaxOutcome(status="Unbounded", iterations=sol.iterations, diagnostics=diagnostics)
    if sol.status == "primal infeasible":
        return MaxOutcome(status="Infeasible", iterations=sol.iterations, diagnostics=diagnostics)
    status = "MaxIterations" if sol.iterations >= int(opts.get("maxiters", 100)) else "Marginal"
    value = float(problem.objective @ point) + problem.objective_const if point is not None else None
    return MaxOutcome(status=status, value=value, point=point, iterations=sol.iterations, diagnostics=diagnostics)
