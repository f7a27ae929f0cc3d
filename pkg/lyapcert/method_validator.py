"""
Structural checks on method representations: fixed-point encoding,
well-posedness and minimality rank conditions
"""

from itertools import permutations
from typing import List, Optional, Tuple
import logging

import numpy as np

from .matkit import rank_tol
from .models import MethodRepresentation, ValidationReport

logger = logging.getLogger(__name__)

MAX_PERMUTATION_COMPONENTS = 6


def sum_to_zero_matrix(m: int) -> np.ndarray:
    """N = [I; -1^T]，m×(m-1)；m = 1 时为 1×0"""
    return np.vstack([np.eye(m - 1), -np.ones((1, m - 1))])


class MethodValidator:
    """
    方法验证器：检查状态空间表示是否满足结构性假设
    """

    def check_range_condition(self, rep: MethodRepresentation) -> Tuple[bool, str]:
        """
        值域条件：range([BN 0; DN -1]) ⊆ range([I-A; -C])

        Returns:
            (是否满足, 消息)
        """
        n, m = rep.n, rep.m
        N = sum_to_zero_matrix(m)
        Y = np.vstack([np.eye(n) - rep.A, -rep.C])
        X = np.block([
            [rep.B @ N, np.zeros((n, 1))],
            [rep.D @ N, -np.ones((m, 1))],
        ])
        r_y = rank_tol(Y)
        r_yx = rank_tol(np.hstack([Y, X]))
        ok = r_yx == r_y
        return ok, f"range condition: rank[Y X]={r_yx}, rank Y={r_y}"

    def check_null_condition(self, rep: MethodRepresentation) -> Tuple[bool, str]:
        """
        零空间条件：null([I-A, -B]) ⊆ null([N^T C, N^T D; 0, 1^T])
        """
        n, m = rep.n, rep.m
        N = sum_to_zero_matrix(m)
        X = np.hstack([np.eye(n) - rep.A, -rep.B])
        K = np.vstack([
            np.hstack([N.T @ rep.C, N.T @ rep.D]),
            np.hstack([np.zeros((1, n)), np.ones((1, m))]),
        ])
        r_x = rank_tol(X)
        r_xk = rank_tol(np.vstack([X, K]))
        ok = r_xk == r_x
        return ok, f"null condition: rank[X; K]={r_xk}, rank X={r_x}"

    def check_controllable(self, rep: MethodRepresentation) -> Tuple[bool, str]:
        r = rank_tol(np.hstack([np.eye(rep.n) - rep.A, -rep.B]))
        return r == rep.n, f"rank[I-A, -B]={r} (n={rep.n})"

    def check_observable(self, rep: MethodRepresentation) -> Tuple[bool, str]:
        r = rank_tol(np.vstack([np.eye(rep.n) - rep.A, -rep.C]))
        return r == rep.n, f"rank[I-A; -C]={r} (n={rep.n})"

    def find_lower_triangular_order(self, D: np.ndarray) -> Optional[List[int]]:
        """
        穷举分量重排，寻找使 D 下三角的顺序

        Returns:
            重排列表（新位置 k 对应原分量 order[k]），找不到时返回 None
        """
        m = D.shape[0]
        tol = 1e-12 * (1.0 + float(np.max(np.abs(D))))

        def lower(order: Tuple[int, ...]) -> bool:
            Dp = D[np.ix_(order, order)]
            return bool(np.all(np.abs(np.triu(Dp, k=1)) <= tol))

        identity = tuple(range(m))
        if lower(identity):
            return list(identity)
        if m > MAX_PERMUTATION_COMPONENTS:
            logger.warning(f"Permutation search skipped: m={m} > {MAX_PERMUTATION_COMPONENTS}")
            return None
        for order in permutations(range(m)):
            if lower(order):
                return list(order)
        return None

    def validate(self, rep: MethodRepresentation) -> ValidationReport:
        """
        执行全部检查，失败时记录诊断信息而不抛出异常

        Args:
            rep: 状态空间表示

        Returns:
            ValidationReport 对象
        """
        diagnostics: List[str] = []

        range_ok, msg = self.check_range_condition(rep)
        diagnostics.append(f"{'✓' if range_ok else '✗'} {msg}")
        null_ok, msg = self.check_null_condition(rep)
        diagnostics.append(f"{'✓' if null_ok else '✗'} {msg}")

        controllable, msg = self.check_controllable(rep)
        diagnostics.append(f"{'✓' if controllable else '✗'} {msg}")
        observable, msg = self.check_observable(rep)
        diagnostics.append(f"{'✓' if observable else '✗'} {msg}")

        D = np.asarray(rep.D)
        diag_tol = 1e-14 * (1.0 + float(np.max(np.abs(D))))
        indices_D = [i for i in range(rep.m) if D[i, i] < -diag_tol]
        indices_diff = [i for i, cls in enumerate(rep.classes) if cls.smooth]

        well_posed = True
        nonpositive = bool(np.all(np.diag(D) <= diag_tol))
        if not nonpositive:
            well_posed = False
            diagnostics.append("✗ D has a positive diagonal entry")

        order = self.find_lower_triangular_order(D)
        if order is None:
            well_posed = False
            diagnostics.append("✗ no component ordering makes D lower triangular")
        elif order != list(range(rep.m)):
            diagnostics.append(f"✓ D lower triangular after reordering components to {[i + 1 for i in order]}")

        missing = sorted(set(range(rep.m)) - set(indices_D) - set(indices_diff))
        if missing:
            well_posed = False
            diagnostics.append(
                f"✗ components {[i + 1 for i in missing]} have [D]_ii = 0 and beta = inf (no oracle available)"
            )

        report = ValidationReport(
            fixed_point_encoding=range_ok and null_ok,
            well_posed=well_posed,
            controllable=controllable,
            observable=observable,
            indices_D=indices_D,
            indices_differentiable=indices_diff,
            permutation=order,
            diagnostics=diagnostics,
        )
        logger.info(
            f"Validated {rep.family or 'custom method'}: encoding={report.fixed_point_encoding}, "
            f"well_posed={report.well_posed}, controllable={controllable}, observable={observable}"
        )
        return report


def validate(rep: MethodRepresentation) -> ValidationReport:
    """检查不动点编码、适定性与秩条件"""
    return MethodValidator().validate(rep)


def permute_components(rep: MethodRepresentation, order: List[int]) -> MethodRepresentation:
    """
    对分量同时重排：C、D 的行，B、D 的列以及函数类
    """
    order = list(order)
    return MethodRepresentation(
        n=rep.n,
        m=rep.m,
        A=rep.A,
        B=np.asarray(rep.B)[:, order],
        C=np.asarray(rep.C)[order, :],
        D=np.asarray(rep.D)[np.ix_(order, order)],
        classes=[rep.classes[i] for i in order],
        family=rep.family,
        params=rep.params,
    )


def format_validation_report(report: ValidationReport) -> List[str]:
    def flag(value: bool) -> str:
        return "PASS" if value else "FAIL"

    lines = [
        f"fixed-point encoding: {flag(report.fixed_point_encoding)}",
        f"well-posedness: {flag(report.well_posed)}",
        f"controllability: {flag(report.controllable)}",
        f"observability: {flag(report.observable)}",
        f"I_D: {[i + 1 for i in report.indices_D]}",
        f"I_differentiable: {[i + 1 for i in report.indices_differentiable]}",
    ]
    return lines + report.diagnostics


def print_validation_report(name: str, report: ValidationReport) -> None:
    """
    打印验证报告

    Args:
        name: 方法名称
        report: 验证报告
    """
    print(f"\n{'='*80}")
    print(f"Validation Report for: {name}")
    print(f"{'='*80}")

    for line in format_validation_report(report):
        print(line)

    print(f"{'='*80}\n")
