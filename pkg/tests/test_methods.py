"""
Tests for method models, the method registry and the structural validator
"""

import pytest
import sys
import os
import math

import numpy as np
from pydantic import ValidationError

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from lyapcert.method_registry import METHOD_REGISTRY, ZOO_FAMILIES, expand_template, zoo_build
from lyapcert.method_validator import (
    MethodValidator,
    format_validation_report,
    permute_components,
    sum_to_zero_matrix,
    validate,
)
from lyapcert.models import FunctionClass, LyapunovCertificate, MethodRepresentation

ZOO_PARAMS = {
    "douglas_rachford": [1.0, 1.0],
    "heavy_ball": [0.1, 0.5],
    "prox_heavy_ball": [0.5, 0.2, 0.1],
    "davis_yin": [0.5, 1.0],
    "chambolle_pock": [0.5, 0.5, 1.0],
}


def identity_method() -> MethodRepresentation:
    return MethodRepresentation(n=1, m=1, A=[[1]], B=[[0]], C=[[1]], D=[[0]], classes=[FunctionClass()])


def test_function_class():
    """测试函数类解析与序列化"""
    cls = FunctionClass(sigma=0.5, beta="inf")
    assert math.isinf(cls.beta)
    assert not cls.smooth
    assert cls.model_dump()["beta"] == "inf"
    assert str(cls) == "F_{0.5,inf}"

    assert FunctionClass(sigma=1, beta=10).smooth

    with pytest.raises(ValidationError):
        FunctionClass(sigma=2, beta=1)
    with pytest.raises(ValidationError):
        FunctionClass(sigma=-1, beta=1)


def test_method_representation_shapes():
    """测试状态空间表示的维数检查"""
    rep = MethodRepresentation(n=1, m=2, A=1, B=[-1, -1], C=[1, 1], D=[[-1, 0], [-2, -1]],
                               classes=[FunctionClass(sigma=1, beta=2), FunctionClass()])
    assert rep.B.shape == (1, 2)
    assert rep.C.shape == (2, 1)
    assert rep.state_dim == 5
    assert rep.lifted_dim == 6

    # 矩阵元素个数不符
    with pytest.raises(ValidationError):
        MethodRepresentation(n=2, m=1, A=[[1, 0]], B=[[0], [0]], C=[[1, 0]], D=[[0]], classes=[FunctionClass()])
    # 函数类个数不符
    with pytest.raises(ValidationError):
        MethodRepresentation(n=1, m=1, A=[[1]], B=[[-1]], C=[[1]], D=[[-1]], classes=[])

    doc = rep.to_document()
    again = MethodRepresentation(**doc)
    np.testing.assert_array_equal(again.D, rep.D)
    assert again.classes == rep.classes


def test_certificate_rejects_negative_multipliers():
    """测试证书乘子非负校验"""
    zeros = dict(rho=0.5, Q=np.zeros((3, 3)), q=np.zeros(1), S=np.zeros((3, 3)), s=np.zeros(1),
                 lambda_C1=np.zeros(6), lambda_C2=np.zeros(2), lambda_C3=np.zeros(2))
    LyapunovCertificate(**zeros)
    with pytest.raises(ValidationError):
        LyapunovCertificate(**{**zeros, "lambda_C2": np.array([0.0, -1.0])})


def test_registry_build():
    """测试方法库构造"""
    rep = zoo_build("douglas_rachford", [2.0, 0.5])
    np.testing.assert_allclose(rep.A, [[1.0]])
    np.testing.assert_allclose(rep.B, [[-1.0, -1.0]])
    np.testing.assert_allclose(rep.D, [[-2.0, 0.0], [-4.0, -2.0]])

    hb = zoo_build("heavy_ball", [0.3, 0.0])
    np.testing.assert_allclose(hb.A, [[1.0, 0.0], [1.0, 0.0]])
    np.testing.assert_allclose(hb.B, [[-0.3], [0.0]])
    np.testing.assert_allclose(hb.C, [[1.0, 0.0]])

    cp = zoo_build("chambolle_pock", [0.5, 0.25, 1.0])
    np.testing.assert_allclose(cp.C, [[1.0, -0.5], [1.0, 4.0 - 1.0]])
    np.testing.assert_allclose(cp.D, [[-0.5, 0.0], [-1.0, -4.0]])

    assert set(ZOO_FAMILIES) <= set(METHOD_REGISTRY.list_families())
    assert METHOD_REGISTRY.has_family("nesterov")


def test_registry_errors():
    """测试方法库输入检查"""
    with pytest.raises(KeyError):
        METHOD_REGISTRY.get("newton")
    with pytest.raises(ValueError):
        METHOD_REGISTRY.build("heavy_ball", [0.1])
    with pytest.raises(ValueError):
        METHOD_REGISTRY.build("heavy_ball", [-0.1, 0.0])
    # 梯度分量必须光滑
    with pytest.raises(ValueError):
        METHOD_REGISTRY.build("davis_yin", [0.5, 1.0],
                              [FunctionClass(), FunctionClass(), FunctionClass()])


def test_expand_template():
    """测试网格坐标模板"""
    assert expand_template("p1,p1,p2", 0.5, 2.0) == [0.5, 0.5, 2.0]
    assert expand_template("p2, p1, 0", 0.1, 0.2) == [0.2, 0.1, 0.0]
    with pytest.raises(ValueError):
        expand_template("p1,p2", 0.5)
    with pytest.raises(ValueError):
        expand_template("p1,gamma", 0.5, 1.0)


def test_zoo_passes_validation():
    """测试方法库中的方法满足全部结构假设"""
    for family in ZOO_FAMILIES:
        report = validate(zoo_build(family, ZOO_PARAMS[family]))
        assert report.passed, (family, report.diagnostics)


def test_validate_douglas_rachford():
    """测试 Douglas-Rachford 的验证报告"""
    report = validate(zoo_build("douglas_rachford", [1.0, 1.0]))
    assert report.fixed_point_encoding and report.well_posed
    assert report.controllable and report.observable
    assert report.indices_D == [0, 1]
    assert report.indices_differentiable == [0]
    assert report.permutation == [0, 1]

    lines = format_validation_report(report)
    assert lines[0] == "fixed-point encoding: PASS"
    assert "I_D: [1, 2]" in lines


def test_validate_chambolle_pock():
    """测试 Chambolle-Pock 的适定性"""
    report = validate(zoo_build("chambolle_pock", [0.5, 0.5, 1.0]))
    assert report.well_posed
    assert report.indices_D == [0, 1]


def test_identity_dynamics_fail_encoding():
    """测试无输入恒等动态不满足不动点编码"""
    report = validate(identity_method())
    assert not report.fixed_point_encoding
    assert not report.controllable
    assert not report.passed
    assert format_validation_report(report)[0] == "fixed-point encoding: FAIL"


def test_lower_triangular_order():
    """测试分量重排"""
    validator = MethodValidator()
    assert validator.find_lower_triangular_order(np.array([[-1.0, 2.0], [0.0, -1.0]])) == [1, 0]
    assert validator.find_lower_triangular_order(np.array([[-1.0, 1.0], [1.0, -1.0]])) is None

    rep = MethodRepresentation(n=1, m=2, A=[[1]], B=[[-1, -1]], C=[[1], [1]], D=[[-1, -2], [0, -1]],
                               classes=[FunctionClass(), FunctionClass(sigma=1, beta=2)])
    report = validate(rep)
    assert report.permutation == [1, 0]

    permuted = permute_components(rep, report.permutation)
    np.testing.assert_allclose(permuted.D, [[-1.0, 0.0], [-2.0, -1.0]])
    assert permuted.classes[0] == FunctionClass(sigma=1, beta=2)
    assert validate(permuted).permutation == [0, 1]


def test_sum_to_zero_matrix():
    """测试 N = [I; -1^T]"""
    np.testing.assert_allclose(sum_to_zero_matrix(2), [[1.0], [-1.0]])
    assert sum_to_zero_matrix(1).shape == (1, 0)
    np.testing.assert_allclose(sum_to_zero_matrix(3).sum(axis=0), 0.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
