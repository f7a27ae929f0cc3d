"""
Interpolation conditions for F_{σ,β} and the lifted structure matrices

Lifted coordinates are z = (Δx, u, u+, û⋆) with Δx = x - x⋆, u⋆ = N û⋆,
dimension n + 3m - 1. Index points are "o" (current iterate), "+" (next
iterate) and "*" (fixed point).
"""

from typing import Dict, List, NamedTuple, Sequence, Tuple
import math

import numpy as np

from .matkit import freeze, kron, null_space
from .method_validator import sum_to_zero_matrix
from .models import FunctionClass, MethodRepresentation

Pair = Tuple[str, str]

# 有序点对的固定顺序，乘子按此顺序序列化
PAIRS: List[Pair] = [("o", "+"), ("+", "o"), ("o", "*"), ("*", "o"), ("+", "*"), ("*", "+")]
STAR_PAIRS: List[Pair] = [("o", "*"), ("*", "o")]


def interpolation_matrix(cls: FunctionClass) -> np.ndarray:
    """单分量 3×3 插值矩阵，作用于 (y_i - y_j, u_i, u_j)"""
    sigma, beta = cls.sigma, cls.beta
    if math.isinf(beta):
        return 0.5 * np.array([[sigma, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    return np.array([
        [beta * sigma, -sigma, beta],
        [-sigma, 1.0, -1.0],
        [beta, -1.0, 1.0],
    ]) / (2.0 * (beta - sigma))


class InterpolationBlocks(NamedTuple):
    """M_l（3m×3m）与 a_l（R^m）"""
    M: List[np.ndarray]
    a: List[np.ndarray]


def build_blocks(classes: Sequence[FunctionClass]) -> InterpolationBlocks:
    """
    构造每个分量的插值矩阵 M_l = M(σ_l, β_l) ⊗ diag(e_l) 与 a_l = -e_l

    Raises:
        ValueError: 分量为空或 σ >= β
    """
    m = len(classes)
    if m < 1:
        raise ValueError("build_blocks: at least one function class is required")
    M, a = [], []
    for l, cls in enumerate(classes):
        if not cls.sigma < cls.beta:
            raise ValueError(f"component {l + 1}: sigma must be smaller than beta")
        e = np.zeros(m)
        e[l] = 1.0
        M.append(kron(interpolation_matrix(cls), np.diag(e)))
        a.append(freeze(-e))
    return InterpolationBlocks(M=M, a=a)


class Triplet(NamedTuple):
    """(y, F, u)：点、函数值与次梯度"""
    y: np.ndarray
    F: float
    u: np.ndarray


def interpolation_gap(ti: Triplet, tj: Triplet, cls: FunctionClass) -> float:
    """
    F_i - F_j - <u_j, y_i - y_j> - σ/2 |y_i - y_j|^2 - |u_i - u_j - σ(y_i - y_j)|^2 / (2(β - σ))

    非负即满足该有序对的插值不等式
    """
    yi, yj = np.asarray(ti.y, dtype=float), np.asarray(tj.y, dtype=float)
    ui, uj = np.asarray(ti.u, dtype=float), np.asarray(tj.u, dtype=float)
    dy = yi - yj
    gap = ti.F - tj.F - float(np.dot(uj.ravel(), dy.ravel())) - 0.5 * cls.sigma * float(np.dot(dy.ravel(), dy.ravel()))
    if not math.isinf(cls.beta):
        r = (ui - uj - cls.sigma * dy).ravel()
        gap -= float(np.dot(r, r)) / (2.0 * (cls.beta - cls.sigma))
    return gap


def worst_interpolation_violation(family: Sequence[Triplet], cls: FunctionClass) -> float:
    """所有有序对中最大的（相对容差缩放后的）违反量，<= 0 表示满足"""
    worst = -math.inf
    for i, ti in enumerate(family):
        for j, tj in enumerate(family):
            if i == j:
                continue
            tol = 1e-9 * (1.0 + abs(ti.F) + abs(tj.F))
            worst = max(worst, -interpolation_gap(ti, tj, cls) - tol)
    return worst if worst > -math.inf else 0.0


def check_interpolation(family: Sequence[Triplet], cls: FunctionClass) -> bool:
    """三元组族是否可由 F_{σ,β} 中的函数插值"""
    return worst_interpolation_violation(family, cls) <= 0.0


class StructureMatrices:
    """
    E_{i,j}、H_{i,j}、Σ_o、Σ_+ 以及 M_{(l,i,j)} = E^T M_l E、a_{(l,i,j)} = H^T a_l
    """

    def __init__(self, rep: MethodRepresentation, blocks: InterpolationBlocks):
        n, m = rep.n, rep.m
        A, B, C, D = (np.asarray(X) for X in (rep.A, rep.B, rep.C, rep.D))
        N = sum_to_zero_matrix(m)
        self.n, self.m = n, m
        self.dim = n + 3 * m - 1
        self.N = freeze(N)
        self.classes = list(rep.classes)

        Zn = np.zeros((m, n))
        Zm = np.zeros((m, m))
        Zw = np.zeros((m, m - 1))
        # 各点的 (y - y⋆) 与 u 在 z 上的线性表示
        y_map = {
            "o": np.hstack([C, D, Zm, -D @ N]),
            "+": np.hstack([C @ A, C @ B, D, -C @ B @ N - D @ N]),
            "*": np.zeros((m, self.dim)),
        }
        u_map = {
            "o": np.hstack([Zn, np.eye(m), Zm, Zw]),
            "+": np.hstack([Zn, Zm, np.eye(m), Zw]),
            "*": np.hstack([Zn, Zm, Zm, N]),
        }
        f_map = {
            "o": np.hstack([np.eye(m), Zm]),
            "+": np.hstack([Zm, np.eye(m)]),
            "*": np.zeros((m, 2 * m)),
        }

        self.E: Dict[Pair, np.ndarray] = {}
        self.H: Dict[Pair, np.ndarray] = {}
        for i, j in PAIRS:
            self.E[(i, j)] = freeze(np.vstack([y_map[i] - y_map[j], u_map[i], u_map[j]]))
            self.H[(i, j)] = freeze(f_map[i] - f_map[j])

        self.y_o = freeze(y_map["o"])
        self.u_o = freeze(u_map["o"])
        self.u_star = freeze(u_map["*"])

        self.Sigma_o = freeze(np.vstack([
            np.hstack([np.eye(n), np.zeros((n, m)), np.zeros((n, m)), np.zeros((n, m - 1))]),
            u_map["o"],
            u_map["*"],
        ]))
        self.Sigma_p = freeze(np.vstack([
            np.hstack([A, B, np.zeros((n, m)), -B @ N]),
            u_map["+"],
            u_map["*"],
        ]))

        self.Mlij: Dict[Tuple[int, Pair], np.ndarray] = {}
        self.alij: Dict[Tuple[int, Pair], np.ndarray] = {}
        for pair in PAIRS:
            E, H = self.E[pair], self.H[pair]
            for l in range(m):
                self.Mlij[(l, pair)] = freeze(E.T @ blocks.M[l] @ E)
                self.alij[(l, pair)] = freeze(H.T @ blocks.a[l])

    def terms(self, pairs: Sequence[Pair]) -> List[Tuple[int, Pair]]:
        """乘子下标 (l, pair)，点对优先、分量其次"""
        return [(l, pair) for pair in pairs for l in range(self.m)]

    def fixed_point_subspace(self) -> np.ndarray:
        """
        {Δx = 0, u = u+ = N w} 的基 (dim × (m-1))，该子空间上所有插值项为零
        """
        m = self.m
        return np.vstack([
            np.zeros((self.n, m - 1)),
            self.N,
            self.N,
            np.eye(m - 1),
        ])

    def stationary_faces(self) -> List[np.ndarray]:
        """
        满足 Σ_o z = Σ_+ z 且使全部插值项为零的两族子空间（列基，可能为 0 列）：

        - 解集平移：y - y⋆ = 0，只有 β = ∞ 的分量允许 u - u⋆ ≠ 0（包含 fixed_point_subspace）
        - 平坦方向：u = u⋆ = 0，σ > 0 的分量上 y - y⋆ = 0

        两族都只在 σ = 0 或 β = ∞ 的分量存在时才非平凡
        """
        still = self.Sigma_o - self.Sigma_p
        finite = [l for l, cls in enumerate(self.classes) if not math.isinf(cls.beta)]
        strong = [l for l, cls in enumerate(self.classes) if cls.sigma > 0]
        shift = null_space(np.vstack([still, self.y_o, (self.u_o - self.u_star)[finite]]))
        flat = null_space(np.vstack([still, self.u_o, self.u_star, self.y_o[strong]]))

        faces = []
        for V in (shift, flat):
            if V.shape[1] and self.max_term_on(V) > 1e-10:
                continue
            faces.append(V)
        return faces

    def max_term_on(self, V: np.ndarray) -> float:
        """插值项限制在 span(V) 上的最大绝对元素"""
        if V.shape[1] == 0:
            return 0.0
        return max(float(np.max(np.abs(V.T @ M @ V))) for M in self.Mlij.values())


def build_structure(rep: MethodRepresentation) -> StructureMatrices:
    """构造提升坐标下的全部结构矩阵"""
    return StructureMatrices(rep, build_blocks(rep.classes))
