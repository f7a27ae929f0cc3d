"""
Method registry: the library of first-order methods in state-space form
"""
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from .models import FunctionClass, MethodRepresentation

logger = logging.getLogger(__name__)

Matrices = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


class MethodFamily:
    """方法族定义：参数名、维数 (n, m) 以及构造 (A, B, C, D) 的函数"""

    def __init__(
        self,
        name: str,
        param_names: Sequence[str],
        n: int,
        m: int,
        builder: Callable[..., Matrices],
        gradient_components: Sequence[int] = (),
        default_classes: Optional[Sequence[FunctionClass]] = None,
        sweep_template: str = "p1,p2",
        description: str = "",
    ):
        """
        Args:
            name: 方法族名称
            param_names: 参数名列表（决定参数个数）
            n: 状态维数
            m: 分量个数
            builder: 接收参数、返回 (A, B, C, D) 的函数
            gradient_components: 使用梯度（[D]_ii = 0）的分量，要求 β_i < inf
            default_classes: 默认函数类
            sweep_template: 区域扫描时网格坐标到参数的默认映射
            description: 说明
        """
        self.name = name
        self.param_names = list(param_names)
        self.n = n
        self.m = m
        self.builder = builder
        self.gradient_components = list(gradient_components)
        self.default_classes = list(default_classes) if default_classes else [FunctionClass() for _ in range(m)]
        self.sweep_template = sweep_template
        self.description = description

    @property
    def arity(self) -> int:
        return len(self.param_names)


def _require_positive(family: str, **values: float) -> None:
    for key, value in values.items():
        if not value > 0:
            raise ValueError(f"{family}: parameter {key} must be positive, got {value}")


def _douglas_rachford(gamma: float, lam: float) -> Matrices:
    _require_positive("douglas_rachford", gamma=gamma)
    if lam == 0:
        raise ValueError("douglas_rachford: parameter lambda must be nonzero")
    A = [[1.0]]
    B = [[-gamma * lam, -gamma * lam]]
    C = [[1.0], [1.0]]
    D = [[-gamma, 0.0], [-2 * gamma, -gamma]]
    return A, B, C, D


def _heavy_ball(gamma: float, delta: float) -> Matrices:
    _require_positive("heavy_ball", gamma=gamma)
    A = [[1 + delta, -delta], [1.0, 0.0]]
    B = [[-gamma], [0.0]]
    C = [[1.0, 0.0]]
    D = [[0.0]]
    return A, B, C, D


def _prox_heavy_ball(gamma: float, delta1: float, delta2: float) -> Matrices:
    _require_positive("prox_heavy_ball", gamma=gamma)
    A = [[1 + delta1 + delta2, -delta1 - delta2], [1.0, 0.0]]
    B = [[-gamma, -gamma], [0.0, 0.0]]
    C = [[1.0, 0.0], [1 + delta1, -delta1]]
    D = [[0.0, 0.0], [-gamma, -gamma]]
    return A, B, C, D


def _davis_yin(gamma: float, lam: float) -> Matrices:
    _require_positive("davis_yin", gamma=gamma, lam=lam)
    A = [[1.0]]
    B = [[-gamma * lam, -gamma * lam, -gamma * lam]]
    C = [[1.0], [1.0], [1.0]]
    D = [[-gamma, 0.0, 0.0], [-gamma, 0.0, 0.0], [-2 * gamma, -gamma, -gamma]]
    return A, B, C, D


def _chambolle_pock(tau1: float, tau2: float, theta: float) -> Matrices:
    _require_positive("chambolle_pock", tau1=tau1, tau2=tau2)
    A = [[1.0, -tau1], [0.0, 0.0]]
    B = [[-tau1, 0.0], [0.0, 1.0]]
    C = [[1.0, -tau1], [1.0, 1.0 / tau2 - tau1 * (1 + theta)]]
    D = [[-tau1, 0.0], [-tau1 * (1 + theta), -1.0 / tau2]]
    return A, B, C, D


def _gradient(gamma: float) -> Matrices:
    _require_positive("gradient", gamma=gamma)
    return [[1.0]], [[-gamma]], [[1.0]], [[0.0]]


def _proximal_point(gamma: float) -> Matrices:
    _require_positive("proximal_point", gamma=gamma)
    return [[1.0]], [[-gamma]], [[1.0]], [[-gamma]]


def _proximal_gradient(gamma: float) -> Matrices:
    _require_positive("proximal_gradient", gamma=gamma)
    A = [[1.0]]
    B = [[-gamma, -gamma]]
    C = [[1.0], [1.0]]
    D = [[0.0, 0.0], [-gamma, -gamma]]
    return A, B, C, D


def _nesterov(gamma: float, delta: float) -> Matrices:
    # 常数动量：y_k = x_k + δ(x_k - x_{k-1})，x_{k+1} = y_k - γ∇f(y_k)
    _require_positive("nesterov", gamma=gamma)
    A = [[1 + delta, -delta], [1.0, 0.0]]
    B = [[-gamma], [0.0]]
    C = [[1 + delta, -delta]]
    D = [[0.0]]
    return A, B, C, D


class MethodRegistry:
    """
    方法注册中心，负责存储方法族并按参数构造状态空间表示
    """

    def __init__(self):
        self._families: Dict[str, MethodFamily] = {}

    def register(self, family: MethodFamily) -> None:
        """
        注册一个方法族

        Args:
            family: 方法族定义
        """
        if family.name in self._families:
            logger.warning(f"Method family '{family.name}' already registered. Overwriting.")
        self._families[family.name] = family
        logger.debug(f"Registered method family: {family.name} (n={family.n}, m={family.m})")

    def get(self, name: str) -> MethodFamily:
        """
        Raises:
            KeyError: 如果方法族不存在
        """
        if name not in self._families:
            raise KeyError(f"Method family '{name}' not found in registry")
        return self._families[name]

    def has_family(self, name: str) -> bool:
        return name in self._families

    def list_families(self) -> List[str]:
        return list(self._families.keys())

    def build(
        self,
        name: str,
        params: Sequence[float],
        classes: Optional[Sequence[FunctionClass]] = None,
    ) -> MethodRepresentation:
        """
        构造指定方法族的状态空间表示

        Args:
            name: 方法族名称
            params: 参数列表（个数须与方法族一致）
            classes: 每个分量的函数类（默认使用方法族的默认函数类）

        Returns:
            MethodRepresentation 对象

        Raises:
            KeyError: 方法族不存在
            ValueError: 参数个数、取值或函数类不合法
        """
        family = self.get(name)
        params = [float(p) for p in params]
        if len(params) != family.arity:
            raise ValueError(
                f"{name} expects {family.arity} parameters {family.param_names}, got {len(params)}"
            )
        classes = list(classes) if classes is not None else list(family.default_classes)
        if len(classes) != family.m:
            raise ValueError(f"{name} expects {family.m} function classes, got {len(classes)}")
        for index in family.gradient_components:
            if not classes[index].smooth:
                raise ValueError(
                    f"{name}: component {index + 1} is evaluated through its gradient and needs beta < inf"
                )

        A, B, C, D = family.builder(*params)
        return MethodRepresentation(
            n=family.n,
            m=family.m,
            A=A,
            B=B,
            C=C,
            D=D,
            classes=classes,
            family=name,
            params=params,
        )


def _default_registry() -> MethodRegistry:
    smooth = FunctionClass(sigma=0.0, beta=1.0)
    lsc = FunctionClass(sigma=0.0, beta=float("inf"))
    registry = MethodRegistry()
    registry.register(MethodFamily(
        "douglas_rachford", ["gamma", "lambda"], 1, 2, _douglas_rachford,
        default_classes=[FunctionClass(sigma=1.0, beta=2.0), lsc],
        sweep_template="p1,p2",
        description="Douglas-Rachford splitting",
    ))
    registry.register(MethodFamily(
        "heavy_ball", ["gamma", "delta"], 2, 1, _heavy_ball,
        gradient_components=[0],
        default_classes=[smooth],
        sweep_template="p2,p1",
        description="gradient method with heavy-ball momentum",
    ))
    registry.register(MethodFamily(
        "prox_heavy_ball", ["gamma", "delta1", "delta2"], 2, 2, _prox_heavy_ball,
        gradient_components=[0],
        default_classes=[smooth, lsc],
        sweep_template="p2,p1,0",
        description="proximal gradient method with heavy-ball momentum terms",
    ))
    registry.register(MethodFamily(
        "davis_yin", ["gamma", "lambda"], 1, 3, _davis_yin,
        gradient_components=[1],
        default_classes=[FunctionClass(sigma=0.0, beta=10.0), FunctionClass(sigma=1.0, beta=2.0), lsc],
        sweep_template="p1,p2",
        description="Davis-Yin three-operator splitting",
    ))
    registry.register(MethodFamily(
        "chambolle_pock", ["tau1", "tau2", "theta"], 2, 2, _chambolle_pock,
        default_classes=[lsc, lsc],
        sweep_template="p1,p1,p2",
        description="Chambolle-Pock with identity linear operator",
    ))
    registry.register(MethodFamily(
        "gradient", ["gamma"], 1, 1, _gradient,
        gradient_components=[0],
        default_classes=[smooth],
        sweep_template="p1",
        description="gradient method",
    ))
    registry.register(MethodFamily(
        "proximal_point", ["gamma"], 1, 1, _proximal_point,
        default_classes=[lsc],
        sweep_template="p1",
        description="proximal point method",
    ))
    registry.register(MethodFamily(
        "proximal_gradient", ["gamma"], 1, 2, _proximal_gradient,
        gradient_components=[0],
        default_classes=[smooth, lsc],
        sweep_template="p1",
        description="proximal gradient method",
    ))
    registry.register(MethodFamily(
        "nesterov", ["gamma", "delta"], 2, 1, _nesterov,
        gradient_components=[0],
        default_classes=[FunctionClass(sigma=1.0, beta=10.0)],
        sweep_template="p2,p1",
        description="accelerated gradient method with constant momentum",
    ))
    return registry


METHOD_REGISTRY = _default_registry()

ZOO_FAMILIES = ["douglas_rachford", "heavy_ball", "prox_heavy_ball", "davis_yin", "chambolle_pock"]


def zoo_build(
    family: str,
    params: Sequence[float],
    classes: Optional[Sequence[FunctionClass]] = None,
) -> MethodRepresentation:
    """按方法族名称构造状态空间表示（使用默认注册中心）"""
    return METHOD_REGISTRY.build(family, params, classes)


def expand_template(template: str, p1: float, p2: Optional[float] = None) -> List[float]:
    """
    把网格坐标 (p1, p2) 按模板映射为方法参数

    模板为逗号分隔的列表，每一项为 "p1"、"p2" 或一个数，例如 "p1,p1,p2"。

    Raises:
        ValueError: 模板项无法解析，或引用了缺失的 p2
    """
    params = []
    for item in template.split(","):
        item = item.strip()
        if item == "p1":
            params.append(float(p1))
        elif item == "p2":
            if p2 is None:
                raise ValueError(f"template '{template}' references p2 but no second coordinate was given")
            params.append(float(p2))
        else:
            try:
                params.append(float(item))
            except ValueError:
                raise ValueError(f"invalid template entry '{item}' in '{template}'")
    return params
