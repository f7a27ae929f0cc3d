"""
Component oracles with closed-form proximal operators

Each oracle acts on points of R^d and belongs provably to its declared
function class F_{σ,β}.
"""
from abc import ABC, abstractmethod
from typing import List, Optional, Sequence
import math

import numpy as np

from .models import FunctionClass


def soft_threshold(x: np.ndarray, threshold) -> np.ndarray:
    """prox of threshold·|x|_1: sign(x)·max(|x| - threshold, 0)"""
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


class ComponentOracle(ABC):
    """
    单个分量函数 f_i：函数值、梯度（光滑时）与 prox
    """

    def __init__(self, cls: FunctionClass, dim: int):
        self.cls = cls
        self.dim = dim

    @abstractmethod
    def value(self, y: np.ndarray) -> float:
        pass

    def grad(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} is not differentiable")

    @abstractmethod
    def prox(self, v: np.ndarray, gamma: float) -> np.ndarray:
        """argmin_y f(y) + |y - v|^2 / (2γ)"""
        pass

    @property
    def differentiable(self) -> bool:
        return False

    def _check_step(self, gamma: float) -> None:
        if not gamma > 0:
            raise ValueError(f"prox step must be positive, got {gamma}")


class Quadratic(ComponentOracle):
    """f(y) = 1/2 Σ a_k (y_k - c_k)^2 + <b, y>，a_k ∈ [σ, β]"""

    def __init__(self, cls: FunctionClass, a, c=None, b=None):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        super().__init__(cls, a.size)
        lo, hi = cls.sigma, cls.beta
        if np.any(a < lo - 1e-12) or np.any(a > hi + 1e-12):
            raise ValueError(f"curvatures {a.tolist()} are outside [{lo}, {hi}] of {cls}")
        self.a = a
        self.c = np.zeros(self.dim) if c is None else np.asarray(c, dtype=float).reshape(self.dim)
        self.b = np.zeros(self.dim) if b is None else np.asarray(b, dtype=float).reshape(self.dim)

    @property
    def differentiable(self) -> bool:
        return True

    def value(self, y: np.ndarray) -> float:
        r = y - self.c
        return float(0.5 * np.dot(self.a * r, r) + np.dot(self.b, y))

    def grad(self, y: np.ndarray) -> np.ndarray:
        return self.a * (y - self.c) + self.b

    def prox(self, v: np.ndarray, gamma: float) -> np.ndarray:
        self._check_step(gamma)
        return (self.a * self.c - self.b + v / gamma) / (self.a + 1.0 / gamma)


class AbsQuadratic(ComponentOracle):
    """f(y) = w |y - c|_1 + σ/2 |y - c|^2，属于 F_{σ,∞}"""

    def __init__(self, cls: FunctionClass, w, sigma: float = 0.0, c=None):
        w = np.atleast_1d(np.asarray(w, dtype=float))
        super().__init__(cls, w.size)
        if np.any(w < 0):
            raise ValueError("absolute-value weights must be nonnegative")
        if sigma < cls.sigma - 1e-12:
            raise ValueError(f"strong convexity {sigma} is below {cls.sigma} required by {cls}")
        self.w = w
        self.sigma = float(sigma)
        self.c = np.zeros(self.dim) if c is None else np.asarray(c, dtype=float).reshape(self.dim)

    def value(self, y: np.ndarray) -> float:
        r = y - self.c
        return float(np.dot(self.w, np.abs(r)) + 0.5 * self.sigma * np.dot(r, r))

    def prox(self, v: np.ndarray, gamma: float) -> np.ndarray:
        self._check_step(gamma)
        return self.c + soft_threshold(v - self.c, gamma * self.w) / (1.0 + gamma * self.sigma)


class IntervalIndicator(ComponentOracle):
    """盒 [lo, hi] 的指示函数，属于 F_{0,∞}"""

    def __init__(self, cls: FunctionClass, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        super().__init__(cls, lo.size)
        hi = np.asarray(hi, dtype=float).reshape(self.dim)
        if cls.sigma > 0:
            raise ValueError(f"an indicator function is not in {cls}")
        if np.any(lo > hi):
            raise ValueError("interval bounds must satisfy lo <= hi")
        self.lo, self.hi = lo, hi

    def value(self, y: np.ndarray) -> float:
        inside = np.all(y >= self.lo - 1e-12) and np.all(y <= self.hi + 1e-12)
        return 0.0 if inside else math.inf

    def prox(self, v: np.ndarray, gamma: float) -> np.ndarray:
        self._check_step(gamma)
        return np.clip(v, self.lo, self.hi)


def random_oracle(
    cls: FunctionClass,
    rng: np.random.Generator,
    dim: int,
    strongly_convex: bool = False,
) -> ComponentOracle:
    """
    随机生成属于 cls 的分量函数

    Args:
        cls: 目标函数类
        rng: 随机数生成器
        dim: 点的维数 d
        strongly_convex: 为 True 时只生成曲率为正的函数
    """
    center = rng.normal(size=dim)
    if cls.smooth:
        low = cls.sigma if cls.sigma > 0 or not strongly_convex else 0.1 * cls.beta
        return Quadratic(cls, rng.uniform(low, cls.beta, size=dim), center, 0.1 * rng.normal(size=dim))

    choice = int(rng.integers(2 if strongly_convex or cls.sigma > 0 else 3))
    if choice == 0:
        low = max(cls.sigma, 0.1 if strongly_convex else 0.0)
        return Quadratic(cls, rng.uniform(low, low + 2.0, size=dim), center)
    if choice == 1:
        sigma = cls.sigma if cls.sigma > 0 or not strongly_convex else 0.5
        return AbsQuadratic(cls, rng.uniform(0.1, 1.0, size=dim), sigma, center)
    return IntervalIndicator(cls, -rng.uniform(0.5, 2.0, size=dim), rng.uniform(0.5, 2.0, size=dim))


def random_instance(
    classes: Sequence[FunctionClass],
    rng: np.random.Generator,
    dim: int = 2,
    strongly_convex: Optional[bool] = None,
) -> List[ComponentOracle]:
    """
    为每个分量生成一个属于其函数类的随机函数；结果的和是强制的（存在极小点）

    strongly_convex 默认在所有函数类均为 σ = 0 时取 True，使不动点唯一
    """
    if strongly_convex is None:
        strongly_convex = all(c.sigma == 0 for c in classes)
    return [random_oracle(cls, rng, dim, strongly_convex) for cls in classes]
