"""
Dense linear-algebra kernel shared by every lyapcert module.

Matrices are plain float64 ``numpy.ndarray`` objects marked read-only, so a
matrix handed out by one module cannot be mutated by another.
"""

from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy import linalg

# 类型别名：只读的 float64 二维数组
Mat = np.ndarray
SymMat = np.ndarray

RANK_RTOL = 1e-9
SYM_RTOL = 1e-12


def freeze(array: np.ndarray) -> np.ndarray:
    """返回只读副本"""
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def as_matrix(
    value,
    rows: Optional[int] = None,
    cols: Optional[int] = None,
    name: str = "matrix",
) -> Mat:
    """
    把嵌套列表/标量/数组转换为只读二维矩阵

    Args:
        value: 输入数据
        rows: 期望行数（可选）
        cols: 期望列数（可选）
        name: 报错时使用的名称

    Returns:
        只读 float64 矩阵

    Raises:
        ValueError: 形状不符或含有非有限值
    """
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValueError(f"{name}: cannot convert to a real matrix ({e})")

    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        # 一维输入：按期望形状解释，默认行向量
        if rows is not None and cols is not None and arr.size == rows * cols:
            arr = arr.reshape(rows, cols)
        else:
            arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ValueError(f"{name}: expected a 2-D matrix, got {arr.ndim} dimensions")

    if rows is not None and cols is not None and arr.shape != (rows, cols):
        if arr.size == rows * cols and rows * cols == 0:
            arr = arr.reshape(rows, cols)
        else:
            raise ValueError(f"{name}: expected shape ({rows}, {cols}), got {arr.shape}")

    _require_finite(arr, name)
    return freeze(arr)


def _require_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: entries must be finite")


def rank_tol(M: Mat) -> int:
    """
    数值秩：奇异值大于 max(rows, cols) * sigma_max * 1e-9 的个数

    Raises:
        ValueError: 空矩阵或含非有限值
    """
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2:
        arr = np.atleast_2d(arr)
    if arr.size == 0:
        if 0 in arr.shape:
            return 0
        raise ValueError("rank_tol: matrix must be nonempty")
    _require_finite(arr, "rank_tol")

    sv = linalg.svdvals(arr)
    sigma_max = float(sv[0]) if sv.size else 0.0
    if sigma_max == 0.0:
        return 0
    tau = max(arr.shape) * sigma_max * RANK_RTOL
    return int(np.sum(sv > tau))


def is_symmetric(S: Mat) -> bool:
    arr = np.asarray(S, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        return False
    if arr.size == 0:
        return True
    scale = 1.0 + float(np.max(np.abs(arr)))
    return bool(np.max(np.abs(arr - arr.T)) <= SYM_RTOL * scale)


def sym(M: Mat) -> SymMat:
    """对称化 (M + M^T) / 2"""
    arr = np.asarray(M, dtype=float)
    return 0.5 * (arr + arr.T)


def min_eig(S: SymMat) -> float:
    """
    对称矩阵的最小特征值

    Raises:
        ValueError: 非对称或含非有限值
    """
    arr = np.asarray(S, dtype=float)
    _require_finite(arr, "min_eig")
    if not is_symmetric(arr):
        raise ValueError("min_eig: matrix is not symmetric")
    if arr.size == 0:
        return 0.0
    return float(linalg.eigvalsh(sym(arr))[0])


def spectral_radius(S: SymMat) -> float:
    arr = np.asarray(S, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(linalg.eigvalsh(sym(arr)))))


def kron(A: Mat, B: Mat) -> Mat:
    """标准 Kronecker 积"""
    a = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_2d(np.asarray(B, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("kron: both factors must be nonempty")
    _require_finite(a, "kron")
    _require_finite(b, "kron")
    return freeze(np.kron(a, b))


def lstsq(A: Mat, b: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    最小二乘求解 A x = b

    Returns:
        (x, 残差的无穷范数)
    """
    a = np.asarray(A, dtype=float)
    rhs = np.asarray(b, dtype=float)
    if a.shape[1] == 0:
        return np.zeros(0), float(np.max(np.abs(rhs))) if rhs.size else 0.0
    x, *_ = linalg.lstsq(a, rhs, lapack_driver="gelsd")
    residual = a @ x - rhs
    return x, float(np.max(np.abs(residual))) if residual.size else 0.0


def null_space(A: Mat, rcond: float = RANK_RTOL) -> Mat:
    """零空间的正交基（列），相对奇异值不超过 rcond 的方向视为零"""
    a = np.atleast_2d(np.asarray(A, dtype=float))
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    if a.shape[1] == 0:
        return np.zeros((0, 0))
    return linalg.null_space(a, rcond=rcond)


def orth(A: Mat) -> Mat:
    """值域的正交基（列）"""
    a = np.atleast_2d(np.asarray(A, dtype=float))
    if a.size == 0:
        return np.zeros((a.shape[0], 0))
    return linalg.orth(a, rcond=RANK_RTOL)


def quad_form(M: SymMat, Z: np.ndarray) -> float:
    """
    Q(M, z) = <z, (M ⊗ I) z>，z 以 (k, d) 的堆叠数组表示
    """
    z = np.asarray(Z, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    return float(np.sum(z * (np.asarray(M, dtype=float) @ z)))


def block_diag(*blocks: Mat) -> Mat:
    return freeze(linalg.block_diag(*blocks))


def sym_index_pairs(dim: int) -> List[Tuple[int, int]]:
    """对称矩阵上三角 (i <= j) 的坐标，按行优先"""
    return [(i, j) for i in range(dim) for j in range(i, dim)]


def sym_basis(dim: int) -> List[SymMat]:
    """上三角坐标对应的对称基矩阵 E_ij + E_ji（对角为 E_ii）"""
    basis = []
    for i, j in sym_index_pairs(dim):
        E = np.zeros((dim, dim))
        E[i, j] = 1.0
        E[j, i] = 1.0
        basis.append(E)
    return basis


def sym_from_entries(entries: Iterable[float], dim: int) -> SymMat:
    """由上三角坐标值重建对称矩阵"""
    S = np.zeros((dim, dim))
    for (i, j), value in zip(sym_index_pairs(dim), entries):
        S[i, j] = value
        S[j, i] = value
    return freeze(S)
