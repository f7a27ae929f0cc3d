"""
Lyapunov certificate synthesis: lower-bound presets, assembly of the
C1-C3 feasibility system, Slater check, independent verification and the
primal worst-case (PEP) cross-check
"""
import sys
import os

# 添加父目录到路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import time

import numpy as np

from config import PEP_TRACE_CAP, SLATER_EPS
from .interpolation import PAIRS, STAR_PAIRS, StructureMatrices, build_structure
from .matkit import is_symmetric, min_eig, null_space, orth, spectral_radius, sym_index_pairs
from .models import (
    CertificateCheck,
    CertifyResult,
    LowerBoundSpec,
    LyapunovCertificate,
    MethodRepresentation,
    PepCheck,
    SlaterReport,
    StructureMask,
)
from .sdp import SdpProblem, SolverBackend, solve_feasibility, solve_max

logger = logging.getLogger(__name__)

PRESET_KINDS = ("distance", "function_value", "duality_gap")

# 复核容差
EIG_RTOL = 1e-7
EQ_TOL = 1e-7
LAMBDA_TOL = 1e-10


def _zeros(rep: MethodRepresentation) -> Tuple[np.ndarray, np.ndarray]:
    d = rep.state_dim
    return np.zeros((d, d)), np.zeros(rep.m)


def preset(kind: str, rep: MethodRepresentation, index: int = 1) -> LowerBoundSpec:
    """
    构造下界预设 (P, p, T, t)（不含 ρ）

    Args:
        kind: "distance"（到解的距离，分量 index）、"function_value"（仅 m=1）或 "duality_gap"
        rep: 状态空间表示
        index: distance 预设使用的分量（1 起始）

    Returns:
        LowerBoundSpec 对象

    Raises:
        ValueError: 预设名称未知或与 m 不匹配
    """
    m = rep.m
    C, D = np.asarray(rep.C), np.asarray(rep.D)
    Z, z = _zeros(rep)

    if kind == "distance":
        if not 1 <= index <= m:
            raise ValueError(f"distance preset index must be in 1..{m}, got {index}")
        # [C D -D] 的第 i 行给出 y^(i) - y⋆
        row = np.hstack([C, D, -D])[index - 1]
        return LowerBoundSpec(kind=f"distance:{index}", P=np.outer(row, row), p=z, T=Z, t=z)

    if kind == "function_value":
        if m != 1:
            raise ValueError(f"function_value preset requires m = 1, got m = {m}")
        return LowerBoundSpec(kind=kind, P=Z, p=z, T=Z, t=np.ones(1))

    if kind == "duality_gap":
        n = rep.n
        K = np.vstack([
            np.hstack([C, D, -D]),
            np.hstack([np.zeros((m, n)), np.zeros((m, m)), np.eye(m)]),
        ])
        W = np.block([[np.zeros((m, m)), -0.5 * np.eye(m)], [-0.5 * np.eye(m), np.zeros((m, m))]])
        return LowerBoundSpec(kind=kind, P=Z, p=z, T=K.T @ W @ K, t=np.ones(m))

    raise ValueError(f"unknown preset '{kind}'; expected one of {PRESET_KINDS}")


def default_kind(rep: MethodRepresentation) -> str:
    """区域扫描的默认预设：m=1 用函数值次优性，否则用对偶间隙"""
    return "function_value" if rep.m == 1 else "duality_gap"


def restricted_state_mask(n: int, m: int) -> StructureMask:
    """Q = blkdiag(Q_xx, 0)、q = 0 的结构限制"""
    d = n + 2 * m
    Q_zero = np.ones((d, d))
    Q_zero[:n, :n] = 0.0
    return StructureMask(name="restricted", Q_zero=Q_zero, q_zero=np.ones(m))


def state_distance_bound(lb: LowerBoundSpec, n: int, m: int) -> LowerBoundSpec:
    """把 P 替换为 blkdiag(I_n, 0)，其余保持不变"""
    d = n + 2 * m
    P = np.zeros((d, d))
    P[:n, :n] = np.eye(n)
    return LowerBoundSpec(kind=f"{lb.kind}+state", P=P, p=lb.p, T=lb.T, t=lb.t, rho=lb.rho)


def lower_bound_from_name(name: str, rep: MethodRepresentation) -> LowerBoundSpec:
    """
    解析预设名称，如 "distance:1"、"distance"、"function_value"、"duality_gap"

    Raises:
        ValueError: 名称无法解析
    """
    kind, _, index = name.strip().partition(":")
    kind = {"distance_to_solution": "distance", "function_value_suboptimality": "function_value"}.get(kind, kind)
    if index and kind != "distance":
        raise ValueError(f"preset '{kind}' takes no component index, got '{name}'")
    try:
        i = int(index) if index else 1
    except ValueError:
        raise ValueError(f"invalid component index in preset '{name}'")
    return preset(kind, rep, i)


MASK_NAMES = ("none", "restricted")


def named_mask(
    name: Optional[str],
    rep: MethodRepresentation,
    lb: LowerBoundSpec,
) -> Tuple[Optional[StructureMask], LowerBoundSpec]:
    """
    按名称返回结构限制以及相应调整后的下界

    "restricted" 仅用于 chambolle_pock：Q = blkdiag(Q_xx, 0)、q = 0，P = blkdiag(I_n, 0)

    Raises:
        ValueError: 名称未知或方法族不支持
    """
    if name is None or name == "none":
        return None, lb
    if name != "restricted":
        raise ValueError(f"unknown mask '{name}'; expected one of {MASK_NAMES}")
    if rep.family != "chambolle_pock":
        raise ValueError(f"mask 'restricted' is defined for chambolle_pock only, got {rep.family or 'custom method'}")
    return restricted_state_mask(rep.n, rep.m), state_distance_bound(lb, rep.n, rep.m)


class CertificateLayout:
    """
    决策变量布局：Q、q、S、s 的未屏蔽元素以及三组乘子
    """

    def __init__(self, rep: MethodRepresentation, mask: Optional[StructureMask] = None):
        self.n, self.m = rep.n, rep.m
        self.d = rep.state_dim
        mask = mask or StructureMask()
        self.names: List[str] = []
        self.Q_vars: List[Tuple[int, int, int]] = []
        self.S_vars: List[Tuple[int, int, int]] = []
        self.q_vars: List[Tuple[int, int]] = []
        self.s_vars: List[Tuple[int, int]] = []

        for (i, j) in sym_index_pairs(self.d):
            if mask.Q_zero is None or mask.Q_zero[i, j] == 0:
                self.Q_vars.append((self._new(f"Q[{i},{j}]"), i, j))
        for k in range(self.m):
            if mask.q_zero is None or mask.q_zero[k] == 0:
                self.q_vars.append((self._new(f"q[{k}]"), k))
        for (i, j) in sym_index_pairs(self.d):
            if mask.S_zero is None or mask.S_zero[i, j] == 0:
                self.S_vars.append((self._new(f"S[{i},{j}]"), i, j))
        for k in range(self.m):
            if mask.s_zero is None or mask.s_zero[k] == 0:
                self.s_vars.append((self._new(f"s[{k}]"), k))

        self.lambda_vars: Dict[str, List[Tuple[int, Tuple[int, Tuple[str, str]]]]] = {}
        for label, pairs in (("C1", PAIRS), ("C2", STAR_PAIRS), ("C3", STAR_PAIRS)):
            entries = []
            for pair in pairs:
                for l in range(self.m):
                    entries.append((self._new(f"lambda_{label}[{pair[0]}{pair[1]},{l}]"), (l, pair)))
            self.lambda_vars[label] = entries

    def _new(self, name: str) -> int:
        self.names.append(name)
        return len(self.names) - 1

    @property
    def var_count(self) -> int:
        return len(self.names)

    @property
    def nonneg(self) -> List[int]:
        return [idx for entries in self.lambda_vars.values() for idx, _ in entries]

    def unpack(self, x: np.ndarray, rho: float) -> LyapunovCertificate:
        """由决策向量恢复证书，屏蔽元素精确为零"""
        Q = np.zeros((self.d, self.d))
        S = np.zeros((self.d, self.d))
        q = np.zeros(self.m)
        s = np.zeros(self.m)
        for idx, i, j in self.Q_vars:
            Q[i, j] = Q[j, i] = x[idx]
        for idx, i, j in self.S_vars:
            S[i, j] = S[j, i] = x[idx]
        for idx, k in self.q_vars:
            q[k] = x[idx]
        for idx, k in self.s_vars:
            s[k] = x[idx]
        lambdas = {
            label: np.array([max(x[idx], 0.0) for idx, _ in entries])
            for label, entries in self.lambda_vars.items()
        }
        return LyapunovCertificate(
            rho=rho, Q=Q, q=q, S=S, s=s,
            lambda_C1=lambdas["C1"], lambda_C2=lambdas["C2"], lambda_C3=lambdas["C3"],
        )


def _congruence(Sigma: np.ndarray, i: int, j: int) -> np.ndarray:
    """Σ^T B_ij Σ，B_ij 为对称基矩阵"""
    a, b = Sigma[i], Sigma[j]
    if i == j:
        return np.outer(a, a)
    return np.outer(a, b) + np.outer(b, a)


def _form_vanishes(st: StructureMatrices, form: np.ndarray, V: np.ndarray) -> bool:
    lifted = st.Sigma_o.T @ form @ st.Sigma_o
    scale = 1.0 + float(np.max(np.abs(lifted)))
    return float(np.max(np.abs(V.T @ lifted @ V))) <= 1e-10 * scale


def _face_basis(
    st: StructureMatrices,
    lb: LowerBoundSpec,
    rho: float,
) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """
    迫使落入核内的子空间，返回 (C1/C3 的面, C2 的面)

    迭代不变且插值项为零的方向 z 上，C1 + C3 的二次型等于
    (ρ-1) ξ^T Q ξ - ξ^T T ξ。ρ = 1 时只要 T 形式为零，C1 与 C3 便都以 z 为核；
    ρ < 1 时还需 P 形式为零，此时 C2 也以 z 为核。
    """
    candidates = st.stationary_faces()
    if st.m >= 2:
        # 平移族整体未通过形式检查时仍可退回到 u 与 u⋆ 同步平移的子空间
        candidates.append(st.fixed_point_subspace())
    forms = (lb.T,) if rho >= 1.0 else (lb.T, lb.P)
    kept = [V for V in candidates
            if V.shape[1] and all(_form_vanishes(st, form, V) for form in forms)]
    if not kept:
        return None, None
    face = orth(np.hstack(kept))
    return face, (face if rho < 1.0 else None)


def _add_reduced_block(
    problem: SdpProblem,
    label: str,
    const: np.ndarray,
    coeffs: np.ndarray,
    face: Optional[np.ndarray],
) -> None:
    """
    剔除结构性零行/列；若给出子空间 face，则加入 F(x) V = 0 并把块限制到其正交补
    """
    scale = 1.0 + float(np.max(np.abs(coeffs))) + float(np.max(np.abs(const)))
    mass = np.maximum(np.max(np.abs(const), axis=1), np.max(np.abs(coeffs), axis=(0, 2)))
    support = np.where(mass > 1e-14 * scale)[0]
    const = const[np.ix_(support, support)]
    coeffs = coeffs[:, support][:, :, support]

    if face is not None:
        V = orth(face[support])
        if V.shape[1]:
            nv = coeffs.shape[0]
            problem.add_eq(
                f"{label}:face",
                (const @ V).ravel(),
                (coeffs @ V).reshape(nv, -1).T,
            )
            W = null_space(V.T)
            const = W.T @ const @ W
            coeffs = np.einsum("ia,vij,jb->vab", W, coeffs, W)
    problem.add_psd(label, const, coeffs)


def assemble(
    rep: MethodRepresentation,
    lb: LowerBoundSpec,
    rho: float,
    mask: Optional[StructureMask] = None,
    reduce: bool = True,
) -> SdpProblem:
    """
    组装 C1-C3 可行性系统

    Args:
        rep: 状态空间表示（应已通过 validate）
        lb: 下界预设
        rho: 收缩因子，取值 [0, 1]
        mask: 可选的结构限制
        reduce: 是否按迭代不变的面约化 C1/C3（以及 ρ<1 时的 C2）

    Returns:
        SdpProblem，metadata 中带有 "layout" 与 "structure"

    Raises:
        ValueError: 维数不匹配或 ρ 越界
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    d, m = rep.state_dim, rep.m
    for key in ("P", "T"):
        if getattr(lb, key).shape != (d, d):
            raise ValueError(f"lower bound {key} must be {d}x{d}, got {getattr(lb, key).shape}")
    for key in ("p", "t"):
        if getattr(lb, key).shape != (m,):
            raise ValueError(f"lower bound {key} must have length {m}, got {getattr(lb, key).shape}")

    st = build_structure(rep)
    layout = CertificateLayout(rep, mask)
    nv, dz = layout.var_count, st.dim
    So, Sp = st.Sigma_o, st.Sigma_p
    problem = SdpProblem(nv, layout.names)
    problem.metadata.update({"layout": layout, "structure": st, "rho": rho, "kind": lb.kind})

    face, face_C2 = _face_basis(st, lb, rho) if reduce else (None, None)
    if reduce and face is not None:
        logger.debug(f"Reducing C1/C3 by a {face.shape[1]}-dimensional stationary face")

    # C1：Σ_o^T(ρQ - S)Σ_o - Σ_+^T Q Σ_+ + Σ λ M ⪰ 0
    F1 = np.zeros((nv, dz, dz))
    e1 = np.zeros((2 * m, nv))
    for idx, i, j in layout.Q_vars:
        F1[idx] = rho * _congruence(So, i, j) - _congruence(Sp, i, j)
    for idx, i, j in layout.S_vars:
        F1[idx] = -_congruence(So, i, j)
    for idx, k in layout.q_vars:
        e1[k, idx] = rho
        e1[m + k, idx] = -1.0
    for idx, k in layout.s_vars:
        e1[k, idx] = -1.0
    for idx, term in layout.lambda_vars["C1"]:
        F1[idx] = st.Mlij[term]
        e1[:, idx] = st.alij[term]
    _add_reduced_block(problem, "C1", np.zeros((dz, dz)), F1, face)
    problem.add_eq("C1:eq", np.zeros(2 * m), e1)

    # C2：Σ_o^T(Q - P)Σ_o + Σ λ M ⪰ 0
    F2 = np.zeros((nv, dz, dz))
    e2 = np.zeros((2 * m, nv))
    for idx, i, j in layout.Q_vars:
        F2[idx] = _congruence(So, i, j)
    for idx, k in layout.q_vars:
        e2[k, idx] = 1.0
    for idx, term in layout.lambda_vars["C2"]:
        F2[idx] = st.Mlij[term]
        e2[:, idx] = st.alij[term]
    _add_reduced_block(problem, "C2", -So.T @ lb.P @ So, F2, face_C2)
    problem.add_eq("C2:eq", np.concatenate([-lb.p, np.zeros(m)]), e2)

    # C3：Σ_o^T(S - T)Σ_o + Σ λ M ⪰ 0
    F3 = np.zeros((nv, dz, dz))
    e3 = np.zeros((2 * m, nv))
    for idx, i, j in layout.S_vars:
        F3[idx] = _congruence(So, i, j)
    for idx, k in layout.s_vars:
        e3[k, idx] = 1.0
    for idx, term in layout.lambda_vars["C3"]:
        F3[idx] = st.Mlij[term]
        e3[:, idx] = st.alij[term]
    _add_reduced_block(problem, "C3", -So.T @ lb.T @ So, F3, face)
    problem.add_eq("C3:eq", np.concatenate([-lb.t, np.zeros(m)]), e3)

    problem.set_nonneg(layout.nonneg)
    logger.debug(f"Assembled {problem} at rho={rho:.6g} ({lb.kind})")
    return problem


def certificate_blocks(
    st: StructureMatrices,
    lb: LowerBoundSpec,
    rho: float,
    cert: LyapunovCertificate,
) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """从证书重新计算三个 LMI 矩阵与等式残差（不做任何约化）"""
    m = st.m
    So, Sp = st.Sigma_o, st.Sigma_p
    Q, S, q, s = cert.Q, cert.S, cert.q, cert.s

    C1 = So.T @ (rho * Q - S) @ So - Sp.T @ Q @ Sp
    r1 = np.concatenate([rho * q - s, -q])
    for value, term in zip(cert.lambda_C1, st.terms(PAIRS)):
        C1 = C1 + value * st.Mlij[term]
        r1 = r1 + value * st.alij[term]

    C2 = So.T @ (Q - lb.P) @ So
    r2 = np.concatenate([q - lb.p, np.zeros(m)])
    for value, term in zip(cert.lambda_C2, st.terms(STAR_PAIRS)):
        C2 = C2 + value * st.Mlij[term]
        r2 = r2 + value * st.alij[term]

    C3 = So.T @ (S - lb.T) @ So
    r3 = np.concatenate([s - lb.t, np.zeros(m)])
    for value, term in zip(cert.lambda_C3, st.terms(STAR_PAIRS)):
        C3 = C3 + value * st.Mlij[term]
        r3 = r3 + value * st.alij[term]

    return {"C1": (C1, r1), "C2": (C2, r2), "C3": (C3, r3)}


def verify_certificate(
    rep: MethodRepresentation,
    lb: LowerBoundSpec,
    rho: float,
    cert: LyapunovCertificate,
    mask: Optional[StructureMask] = None,
) -> CertificateCheck:
    """
    独立复核证书：重新计算 LMI、等式残差、乘子符号与屏蔽元素

    Returns:
        CertificateCheck，违反的约束按名称列出
    """
    d, m = rep.state_dim, rep.m
    violations: List[str] = []
    expected = {"Q": (d, d), "S": (d, d), "q": (m,), "s": (m,),
                "lambda_C1": (6 * m,), "lambda_C2": (2 * m,), "lambda_C3": (2 * m,)}
    for key, shape in expected.items():
        if getattr(cert, key).shape != shape:
            violations.append(f"{key}: expected shape {shape}, got {getattr(cert, key).shape}")
    for key in ("Q", "S"):
        if not is_symmetric(getattr(cert, key)):
            violations.append(f"{key}: matrix is not symmetric")
    if violations:
        return CertificateCheck(passed=False, violations=violations)

    st = build_structure(rep)
    min_eigs: Dict[str, float] = {}
    residuals: Dict[str, float] = {}
    for label, (F, r) in certificate_blocks(st, lb, rho, cert).items():
        eig = min_eig(F)
        res = float(np.max(np.abs(r)))
        min_eigs[label] = eig
        residuals[label] = res
        if eig < -EIG_RTOL * (1.0 + spectral_radius(F)):
            violations.append(f"{label}: LMI violated (min eigenvalue {eig:.3e})")
        if res > EQ_TOL:
            violations.append(f"{label}: equality residual {res:.3e}")

    min_lambda = float(min(np.min(cert.lambda_C1), np.min(cert.lambda_C2), np.min(cert.lambda_C3)))
    for key in ("lambda_C1", "lambda_C2", "lambda_C3"):
        values = getattr(cert, key)
        bad = np.where(values < -LAMBDA_TOL)[0]
        if bad.size:
            violations.append(f"{key}: negative multiplier at positions {bad.tolist()}")

    if mask is not None:
        for key, pattern in (("Q", mask.Q_zero), ("q", mask.q_zero), ("S", mask.S_zero), ("s", mask.s_zero)):
            if pattern is None:
                continue
            values = getattr(cert, key)[pattern == 1]
            if values.size and float(np.max(np.abs(values))) > 0.0:
                violations.append(f"{key}: masked entries are not zero")

    return CertificateCheck(
        passed=not violations,
        violations=violations,
        min_eigs=min_eigs,
        eq_residuals=residuals,
        min_lambda=min_lambda,
    )


def _gram_layout(dz: int, m: int, with_margin: bool) -> Tuple[List[str], List[Tuple[int, int, int]]]:
    names, g_vars = [], []
    for i, j in sym_index_pairs(dz):
        g_vars.append((len(names), i, j))
        names.append(f"G[{i},{j}]")
    names += [f"chi[{k}]" for k in range(2 * m)]
    if with_margin:
        names.append("s")
    return names, g_vars


def _interpolation_rows(st: StructureMatrices, g_vars, nv: int) -> np.ndarray:
    """每个 (l, i, j) 的 a^T χ + tr(M G) 的系数行"""
    m, n_g = st.m, len(g_vars)
    terms = st.terms(PAIRS)
    rows = np.zeros((len(terms), nv))
    for r, term in enumerate(terms):
        M = st.Mlij[term]
        for idx, i, j in g_vars:
            rows[r, idx] = M[i, i] if i == j else 2.0 * M[i, j]
        rows[r, n_g:n_g + 2 * m] = st.alij[term]
    return rows


def _gram_block(g_vars, dz: int, nv: int) -> np.ndarray:
    coeffs = np.zeros((nv, dz, dz))
    for idx, i, j in g_vars:
        coeffs[idx, i, j] = 1.0
        coeffs[idx, j, i] = 1.0
    return coeffs


def check_slater(rep: MethodRepresentation, backend: Optional[SolverBackend] = None) -> SlaterReport:
    """
    Slater 条件：maximize s s.t. a^T χ + tr(M G) <= -s，G ⪰ sI，tr(G) <= n+3m-1

    Returns:
        SlaterReport；margin 为最优 s，holds 当且仅当 s > SLATER_EPS
    """
    st = build_structure(rep)
    dz, m = st.dim, st.m
    names, g_vars = _gram_layout(dz, m, with_margin=True)
    nv = len(names)
    s_idx = nv - 1
    problem = SdpProblem(nv, names)

    coeffs = _gram_block(g_vars, dz, nv)
    coeffs[s_idx] = -np.eye(dz)
    problem.add_psd("G", np.zeros((dz, dz)), coeffs)

    rows = _interpolation_rows(st, g_vars, nv)
    rows[:, s_idx] = 1.0
    problem.add_ineq("interpolation", np.zeros(rows.shape[0]), -rows)
    trace_row = np.zeros((1, nv))
    for idx, i, j in g_vars:
        if i == j:
            trace_row[0, idx] = -1.0
    problem.add_ineq("trace", np.array([float(dz)]), trace_row)

    objective = np.zeros(nv)
    objective[s_idx] = 1.0
    problem.set_objective(objective)

    outcome = solve_max(problem, backend=backend)
    margin = float(outcome.value) if outcome.value is not None else float("nan")
    holds = outcome.status == "Optimal" and margin > SLATER_EPS
    logger.info(f"Slater check for {rep.family or 'custom method'}: margin={margin:.3e}, holds={holds}")
    return SlaterReport(holds=holds, margin=margin, dim_requirement=dz, status=outcome.status)


def assemble_primal_pep(
    rep: MethodRepresentation,
    Q_o: np.ndarray,
    q_o: np.ndarray,
    Q_p: np.ndarray,
    q_p: np.ndarray,
    trace_cap: float = PEP_TRACE_CAP,
) -> SdpProblem:
    """
    Gram 提升后的最坏情形问题：
    maximize tr(𝐐 G) + 𝐪^T χ s.t. G ⪰ 0，tr(G) <= trace_cap，a^T χ + tr(M G) <= 0

    其中 𝐐 = Σ_o^T Q_o Σ_o + Σ_+^T Q_+ Σ_+，𝐪 = (q_o, q_+)

    Raises:
        ValueError: trace_cap 非正
    """
    if not trace_cap > 0:
        raise ValueError(f"trace_cap must be positive, got {trace_cap}")
    st = build_structure(rep)
    dz, m = st.dim, st.m
    names, g_vars = _gram_layout(dz, m, with_margin=False)
    nv = len(names)
    problem = SdpProblem(nv, names)

    problem.add_psd("G", np.zeros((dz, dz)), _gram_block(g_vars, dz, nv))
    rows = _interpolation_rows(st, g_vars, nv)
    problem.add_ineq("interpolation", np.zeros(rows.shape[0]), -rows)
    trace_row = np.zeros((1, nv))
    for idx, i, j in g_vars:
        if i == j:
            trace_row[0, idx] = -1.0
    problem.add_ineq("trace", np.array([float(trace_cap)]), trace_row)

    bigQ = st.Sigma_o.T @ np.asarray(Q_o, dtype=float) @ st.Sigma_o + st.Sigma_p.T @ np.asarray(Q_p, dtype=float) @ st.Sigma_p
    objective = np.zeros(nv)
    for idx, i, j in g_vars:
        objective[idx] = bigQ[i, i] if i == j else 2.0 * bigQ[i, j]
    objective[len(g_vars):] = np.concatenate([np.asarray(q_o, dtype=float), np.asarray(q_p, dtype=float)])
    problem.set_objective(objective)
    problem.metadata.update({"trace_cap": trace_cap})
    return problem


def pep_objectives(
    lb: LowerBoundSpec,
    rho: float,
    cert: LyapunovCertificate,
) -> Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """与 C1、C2、C3 对应的原始目标 (Q_o, q_o, Q_+, q_+)"""
    Z = np.zeros_like(cert.Q)
    z = np.zeros_like(cert.q)
    return {
        "C1": (cert.S - rho * cert.Q, cert.s - rho * cert.q, cert.Q, cert.q),
        "C2": (lb.P - cert.Q, lb.p - cert.q, Z, z),
        "C3": (lb.T - cert.S, lb.t - cert.s, Z, z),
    }


def pep_crosscheck(
    rep: MethodRepresentation,
    lb: LowerBoundSpec,
    rho: float,
    cert: LyapunovCertificate,
    trace_cap: float = PEP_TRACE_CAP,
    backend: Optional[SolverBackend] = None,
) -> PepCheck:
    """
    弱对偶交叉验证：三个匹配的原始 PEP 最优值都应 <= 1e-6 * trace_cap
    """
    values: Dict[str, Optional[float]] = {}
    statuses: Dict[str, str] = {}
    for label, (Q_o, q_o, Q_p, q_p) in pep_objectives(lb, rho, cert).items():
        outcome = solve_max(assemble_primal_pep(rep, Q_o, q_o, Q_p, q_p, trace_cap), backend=backend)
        values[label] = outcome.value
        statuses[label] = outcome.status
    passed = all(
        statuses[k] == "Optimal" and values[k] is not None and values[k] <= 1e-6 * trace_cap
        for k in values
    )
    logger.info(f"PEP cross-check at rho={rho:.6g}: {values} -> {'pass' if passed else 'FAIL'}")
    return PepCheck(values=values, statuses=statuses, trace_cap=trace_cap, passed=passed)


def certify(
    rep: MethodRepresentation,
    lb: LowerBoundSpec,
    rho: float,
    mask: Optional[StructureMask] = None,
    backend: Optional[SolverBackend] = None,
    with_slater: bool = False,
) -> CertifyResult:
    """
    组装、求解并复核：可行解若未通过复核则降级为 Marginal

    Args:
        rep: 状态空间表示
        lb: 下界预设
        rho: 收缩因子
        mask: 可选的结构限制
        backend: 求解器后端
        with_slater: 不可行时是否附带 Slater 检查

    Returns:
        CertifyResult 对象
    """
    start_time = time.time()
    problem = assemble(rep, lb, rho, mask)
    outcome = solve_feasibility(problem, backend=backend)
    diagnostics = list(outcome.diagnostics)
    layout: CertificateLayout = problem.metadata["layout"]

    result = CertifyResult(status=outcome.status, rho=rho, margin=outcome.margin, diagnostics=diagnostics)
    if outcome.status == "Feasible":
        cert = layout.unpack(outcome.point, rho)
        check = verify_certificate(rep, lb, rho, cert, mask)
        if check.passed:
            result = CertifyResult(status="Feasible", rho=rho, margin=outcome.margin,
                                   certificate=cert, check=check, diagnostics=diagnostics)
        else:
            logger.warning(f"Solver point at rho={rho:.6g} failed verification: {check.violations}")
            result = CertifyResult(status="Marginal", rho=rho, margin=outcome.margin, check=check,
                                   diagnostics=diagnostics + check.violations)
    elif outcome.status == "Infeasible" and with_slater:
        slater = check_slater(rep, backend=backend)
        if not slater.holds:
            diagnostics.append("Slater condition not verified: infeasibility does not rule out a certificate")
        result = CertifyResult(status="Infeasible", rho=rho, margin=outcome.margin,
                               slater=slater, diagnostics=diagnostics)

    duration_ms = (time.time() - start_time) * 1000
    logger.debug(f"certify rho={rho:.6g}: {result.status} (margin={result.margin:.3e}, {duration_ms:.1f} ms)")
    return result
