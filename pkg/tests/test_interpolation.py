"""
Tests for interpolation conditions and the lifted structure matrices
"""

import pytest
import sys
import os

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from lyapcert.interpolation import (
    PAIRS,
    STAR_PAIRS,
    Triplet,
    build_blocks,
    build_structure,
    check_interpolation,
    interpolation_gap,
    interpolation_matrix,
)
from lyapcert.method_registry import zoo_build
from lyapcert.models import FunctionClass

INF = float("inf")


def point(y, F, u) -> Triplet:
    return Triplet(y=np.array([y], dtype=float), F=float(F), u=np.array([u], dtype=float))


def test_interpolation_matrix():
    """测试单分量插值矩阵"""
    np.testing.assert_allclose(
        interpolation_matrix(FunctionClass(sigma=0, beta=INF)),
        0.5 * np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]]),
    )
    np.testing.assert_allclose(
        interpolation_matrix(FunctionClass(sigma=0, beta=1)),
        0.5 * np.array([[0, 0, 1], [0, 1, -1], [1, -1, 1]]),
    )


def test_build_blocks():
    """测试按分量放置的插值块"""
    blocks = build_blocks([FunctionClass(sigma=0, beta=INF), FunctionClass(sigma=1, beta=INF)])
    assert len(blocks.M) == 2
    M2 = blocks.M[1]
    assert M2.shape == (6, 6)
    # 坐标顺序 (Δy_1, Δy_2, u_i1, u_i2, u_j1, u_j2)
    assert M2[1, 1] == pytest.approx(0.5)
    assert M2[1, 5] == M2[5, 1] == pytest.approx(0.5)
    assert not np.any(M2[0]) and not np.any(M2[2]) and not np.any(M2[4])
    np.testing.assert_allclose(blocks.a[0], [-1.0, 0.0])
    np.testing.assert_allclose(blocks.a[1], [0.0, -1.0])

    with pytest.raises(ValueError):
        build_blocks([])


def test_check_interpolation():
    """测试三元组族的可插值性"""
    smooth = FunctionClass(sigma=0, beta=1)
    assert check_interpolation([point(0, 0, 0)], smooth)

    # f(x) = x^2/2 上的两点：两个方向都取等号
    a, b = point(0, 0, 0), point(1, 0.5, 1)
    assert check_interpolation([a, b], smooth)
    assert interpolation_gap(a, b, smooth) == pytest.approx(0.0)
    assert interpolation_gap(b, a, smooth) == pytest.approx(0.0)

    # 常数数据不是强凸的
    assert not check_interpolation([point(0, 0, 0), point(1, 0, 0)], FunctionClass(sigma=1, beta=INF))

    # |x| 的数据属于 F_{0,∞}，但不属于 F_{0,1}（次梯度跳跃过大）
    abs_data = [point(-0.1, 0.1, -1), point(0.1, 0.1, 1)]
    assert check_interpolation(abs_data, FunctionClass(sigma=0, beta=INF))
    assert not check_interpolation(abs_data, smooth)


def test_gradient_structure():
    """测试梯度法的 E 与 Σ 矩阵"""
    gamma = 0.3
    st = build_structure(zoo_build("gradient", [gamma]))
    assert st.dim == 3
    np.testing.assert_allclose(st.E[("o", "+")], [[0, gamma, 0], [0, 1, 0], [0, 0, 1]])
    np.testing.assert_allclose(st.Sigma_o, [[1, 0, 0], [0, 1, 0], [0, 0, 0]])
    np.testing.assert_allclose(st.H[("o", "+")], [[1, -1]])
    assert len(st.terms(PAIRS)) == 6
    assert len(st.terms(STAR_PAIRS)) == 2


def test_two_component_structure():
    """测试 m = 2 时的 N 与 H 矩阵"""
    st = build_structure(zoo_build("douglas_rachford", [1.0, 1.0]))
    assert st.dim == 1 + 3 * 2 - 1
    np.testing.assert_allclose(st.N, [[1.0], [-1.0]])
    np.testing.assert_allclose(st.H[("o", "*")], np.hstack([np.eye(2), np.zeros((2, 2))]))
    np.testing.assert_allclose(st.H[("*", "o")], np.hstack([-np.eye(2), np.zeros((2, 2))]))
    assert st.Sigma_o.shape == (5, 6)
    assert st.Sigma_p.shape == (5, 6)
    assert len(st.Mlij) == 2 * len(PAIRS)


def test_fixed_point_subspace():
    """测试所有插值项在不动点子空间上为零"""
    for family, params in (("douglas_rachford", [1.0, 1.0]), ("chambolle_pock", [0.5, 0.5, 1.0])):
        st = build_structure(zoo_build(family, params))
        V0 = st.fixed_point_subspace()
        assert V0.shape == (st.dim, st.m - 1)
        for M in st.Mlij.values():
            np.testing.assert_allclose(V0.T @ M @ V0, 0.0, atol=1e-12)


def test_stationary_faces():
    """测试迭代不变且插值项为零的子空间"""
    # σ = 0：heavy-ball 的状态平移 (c, c) 是平坦方向
    st = build_structure(zoo_build("heavy_ball", [0.5, 0.2], [FunctionClass(sigma=0, beta=1)]))
    shift, flat = st.stationary_faces()
    assert shift.shape == (st.dim, 0)
    assert flat.shape == (st.dim, 1)
    np.testing.assert_allclose(np.abs(flat[:, 0]), [2 ** -0.5, 2 ** -0.5, 0.0, 0.0], atol=1e-12)

    # σ > 0 且 β 有限：两族都为空
    st = build_structure(zoo_build("heavy_ball", [0.5, 0.2], [FunctionClass(sigma=1, beta=10)]))
    assert all(V.shape[1] == 0 for V in st.stationary_faces())

    lsc = FunctionClass(sigma=0, beta=INF)
    for family, params in (("chambolle_pock", [1.15, 1.15, 1.0]), ("douglas_rachford", [1.0, 1.0])):
        st = build_structure(zoo_build(family, params, [lsc, lsc]))
        faces = st.stationary_faces()
        assert sum(V.shape[1] for V in faces) >= st.m - 1
        for V in faces:
            np.testing.assert_allclose(st.Sigma_o @ V, st.Sigma_p @ V, atol=1e-10)
            assert st.max_term_on(V) <= 1e-10
        # 解集平移包含 u 与 u⋆ 同步平移的子空间
        V0 = st.fixed_point_subspace()
        shift = faces[0]
        np.testing.assert_allclose(shift @ (shift.T @ V0), V0, atol=1e-10)


def test_structure_matches_iteration():
    """测试提升坐标与一次迭代的一致性"""
    gamma, delta = 0.2, 0.4
    rep = zoo_build("heavy_ball", [gamma, delta])
    st = build_structure(rep)
    rng = np.random.default_rng(0)
    dx, u, u_next = rng.normal(size=2), rng.normal(size=1), rng.normal(size=1)
    z = np.concatenate([dx, u, u_next])

    # y+ - y⋆ = C(A Δx + B u) + D u+
    y_next = rep.C @ (rep.A @ dx + rep.B @ u) + rep.D @ u_next
    y_now = rep.C @ dx + rep.D @ u
    E = st.E[("o", "+")]
    np.testing.assert_allclose(E @ z, np.concatenate([y_now - y_next, u, u_next]))
    np.testing.assert_allclose(st.Sigma_p @ z, np.concatenate([rep.A @ dx + rep.B @ u, u_next, [0.0]]))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
