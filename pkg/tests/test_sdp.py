"""
Tests for the semidefinite programming layer
"""

import pytest
import sys
import os

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from lyapcert.sdp import SdpProblem, get_backend, solve_feasibility, solve_max


def interval_problem() -> SdpProblem:
    """[[x, 0], [0, 1 - x]] ⪰ 0"""
    problem = SdpProblem(1, ["x"])
    problem.add_psd("box", np.diag([0.0, 1.0]), np.array([np.diag([1.0, -1.0])]))
    return problem


def test_feasible_block():
    """测试可行的单块 LMI"""
    outcome = solve_feasibility(interval_problem())
    assert outcome.status == "Feasible"
    x = float(outcome.point[0])
    assert 0.0 <= x <= 1.0
    assert outcome.margin >= 1e-8
    assert outcome.margin <= 0.5 + 1e-6


def test_infeasible_block():
    """测试不可行的单块 LMI（行列式 -x^2 - 1 < 0）"""
    problem = SdpProblem(1, ["x"])
    problem.add_psd("impossible", np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([np.diag([1.0, -1.0])]))
    outcome = solve_feasibility(problem)
    assert outcome.status == "Infeasible"
    assert outcome.point is None
    assert outcome.margin < 0


def test_inconsistent_equalities():
    """测试矛盾的等式约束"""
    problem = interval_problem()
    problem.add_eq("first", np.array([-0.2]), np.array([[1.0]]))
    problem.add_eq("second", np.array([-0.8]), np.array([[1.0]]))
    outcome = solve_feasibility(problem)
    assert outcome.status == "Infeasible"
    assert "inconsistent" in outcome.diagnostics[0]


def test_equality_is_exact():
    """测试等式约束在可行点处精确成立"""
    problem = interval_problem()
    problem.add_eq("pin", np.array([-0.25]), np.array([[1.0]]))
    outcome = solve_feasibility(problem)
    assert outcome.status == "Feasible"
    assert float(outcome.point[0]) == pytest.approx(0.25, abs=1e-10)
    assert problem.residuals(outcome.point)["pin"] < 1e-10


def test_nonneg_and_inequalities():
    """测试非负变量与线性不等式"""
    problem = SdpProblem(2, ["a", "b"])
    problem.set_nonneg([0, 1])
    # a + b <= 1
    problem.add_ineq("budget", np.array([1.0]), np.array([[-1.0, -1.0]]))
    outcome = solve_feasibility(problem)
    assert outcome.status == "Feasible"
    a, b = outcome.point
    assert a > 0 and b > 0 and a + b < 1

    problem.add_ineq("too_much", np.array([-2.0]), np.array([[1.0, 1.0]]))
    assert solve_feasibility(problem).status == "Infeasible"


def test_facial_reduction_to_a_point():
    """测试没有内点的可行集：diag(x, -x) ⪰ 0 只含 x = 0"""
    problem = SdpProblem(1, ["x"])
    problem.add_psd("pinned", np.zeros((2, 2)), np.array([np.diag([1.0, -1.0])]))
    outcome = solve_feasibility(problem)
    assert outcome.status == "Feasible"
    assert float(outcome.point[0]) == pytest.approx(0.0, abs=1e-6)
    assert any(line.startswith("facial reduction") for line in outcome.diagnostics)


def test_facial_reduction_keeps_free_directions():
    """测试约化只去掉被迫为零的方向：[[x, 0, 0], [0, -x, 0], [0, 0, 1 - y]] ⪰ 0"""
    problem = SdpProblem(2, ["x", "y"])
    const = np.diag([0.0, 0.0, 1.0])
    coeffs = np.array([np.diag([1.0, -1.0, 0.0]), np.diag([0.0, 0.0, -1.0])])
    problem.add_psd("block", const, coeffs)
    problem.add_ineq("y_positive", np.zeros(1), np.array([[0.0, 1.0]]))
    outcome = solve_feasibility(problem)
    assert outcome.status == "Feasible"
    x, y = outcome.point
    assert x == pytest.approx(0.0, abs=1e-6)
    assert 0.0 < y < 1.0
    assert outcome.margin >= 1e-8


def test_solve_max():
    """测试线性目标最大化"""
    problem = interval_problem()
    problem.set_objective(np.array([1.0]))
    outcome = solve_max(problem)
    assert outcome.status == "Optimal"
    assert outcome.value == pytest.approx(1.0, abs=1e-6)

    # maximize tr(G) s.t. G ⪰ 0, tr(G) <= 5，变量为 G 的上三角
    trace = SdpProblem(3, ["g00", "g01", "g11"])
    basis = np.array([
        [[1.0, 0.0], [0.0, 0.0]],
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, 0.0], [0.0, 1.0]],
    ])
    trace.add_psd("G", np.zeros((2, 2)), basis)
    trace.add_ineq("cap", np.array([5.0]), np.array([[-1.0, 0.0, -1.0]]))
    trace.set_objective(np.array([1.0, 0.0, 1.0]))
    outcome = solve_max(trace)
    assert outcome.status == "Optimal"
    assert outcome.value == pytest.approx(5.0, abs=1e-6)


def test_solve_max_unbounded():
    """测试目标沿无约束方向增长"""
    problem = SdpProblem(2, ["x", "free"])
    problem.add_psd("x", np.array([[1.0]]), np.array([[[-1.0]], [[0.0]]]))
    problem.set_objective(np.array([0.0, 1.0]))
    outcome = solve_max(problem)
    assert outcome.status == "Unbounded"
    assert outcome.value is None


def test_problem_errors():
    """测试问题构造的输入检查"""
    with pytest.raises(ValueError):
        solve_feasibility(SdpProblem(0))

    problem = interval_problem()
    with pytest.raises(ValueError):
        problem.add_psd("box", np.eye(2), np.array([np.eye(2)]))
    with pytest.raises(ValueError):
        problem.add_eq("wide", np.zeros(1), np.zeros((1, 3)))
    with pytest.raises(ValueError):
        SdpProblem(2, ["only_one"])

    with pytest.raises(KeyError):
        get_backend("mosek")
    assert get_backend("cvxopt").name == "cvxopt"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
