"""
Data models for lyapcert using Pydantic
"""

import math
from typing import Annotated, Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    field_serializer,
    field_validator,
    model_validator,
)


def _to_array(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("array entries must be finite")
    arr.setflags(write=False)
    return arr


# numpy 数组字段：读入时转为只读 float64，序列化为嵌套列表
Array = Annotated[
    np.ndarray,
    PlainValidator(_to_array),
    PlainSerializer(lambda a: np.asarray(a).tolist(), return_type=list),
]


class FunctionClass(BaseModel):
    """
    函数类 F_{σ,β}：σ-强凸且 β-光滑（β 可为 +inf）
    """
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(0.0, ge=0.0, description="强凸模 σ")
    beta: float = Field(math.inf, description="光滑常数 β，+inf 表示仅下半连续")

    @field_validator("beta", mode="before")
    @classmethod
    def _parse_beta(cls, value):
        if value is None:
            return math.inf
        if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        return value

    @model_validator(mode="after")
    def _check_order(self):
        if math.isnan(self.sigma) or math.isnan(self.beta):
            raise ValueError("sigma and beta must be numbers")
        if not self.sigma < self.beta:
            raise ValueError(f"function class requires 0 <= sigma < beta, got sigma={self.sigma}, beta={self.beta}")
        return self

    @field_serializer("beta")
    def _dump_beta(self, beta: float):
        return "inf" if math.isinf(beta) else beta

    @property
    def smooth(self) -> bool:
        return not math.isinf(self.beta)

    def __str__(self) -> str:
        beta = "inf" if math.isinf(self.beta) else f"{self.beta:g}"
        return f"F_{{{self.sigma:g},{beta}}}"


class MethodRepresentation(BaseModel):
    """
    状态空间表示 x+ = A x + B u, y = C x + D u, u ∈ ∂f(y)
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="状态维数")
    m: int = Field(..., ge=1, description="分量函数个数")
    A: Array = Field(..., description="n×n")
    B: Array = Field(..., description="n×m")
    C: Array = Field(..., description="m×n")
    D: Array = Field(..., description="m×m")
    classes: List[FunctionClass] = Field(..., description="每个分量的函数类")
    family: Optional[str] = Field(None, description="方法族名称（若由方法库构造）")
    params: Optional[List[float]] = Field(None, description="方法族参数")

    @model_validator(mode="before")
    @classmethod
    def _reshape(cls, data):
        if not isinstance(data, dict) or "n" not in data or "m" not in data:
            return data
        data = dict(data)
        n, m = int(data["n"]), int(data["m"])
        shapes = {"A": (n, n), "B": (n, m), "C": (m, n), "D": (m, m)}
        for key, shape in shapes.items():
            if key not in data:
                continue
            arr = np.array(data[key], dtype=float)
            if arr.size != shape[0] * shape[1]:
                raise ValueError(f"{key}: expected shape {shape}, got {arr.shape}")
            if arr.ndim != 2 or arr.shape != shape:
                # 标量或向量输入：只有在行/列为 1 时才允许重排
                if arr.ndim == 2 and 1 not in shape:
                    raise ValueError(f"{key}: expected shape {shape}, got {arr.shape}")
                arr = arr.reshape(shape)
            data[key] = arr
        return data

    @model_validator(mode="after")
    def _check_dims(self):
        if len(self.classes) != self.m:
            raise ValueError(f"expected {self.m} function classes, got {len(self.classes)}")
        return self

    @property
    def lifted_dim(self) -> int:
        """提升坐标 z = (Δx, u, u+, û⋆) 的维数 n+3m-1"""
        return self.n + 3 * self.m - 1

    @property
    def state_dim(self) -> int:
        """ξ = (x - x⋆, u, u⋆) 的维数 n+2m"""
        return self.n + 2 * self.m

    def to_document(self) -> Dict[str, Any]:
        """导出为方法描述 JSON 文档"""
        doc = self.model_dump(mode="json", exclude_none=True)
        return doc


class ValidationReport(BaseModel):
    """
    结构性假设检查结果（不动点编码、适定性、秩条件）
    """
    fixed_point_encoding: bool
    well_posed: bool
    controllable: bool
    observable: bool
    indices_D: List[int] = Field(default_factory=list, description="[D]_ii < 0 的分量（0 起始）")
    indices_differentiable: List[int] = Field(default_factory=list, description="β_i < inf 的分量（0 起始）")
    permutation: Optional[List[int]] = Field(None, description="使 D 下三角的分量重排")
    diagnostics: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.fixed_point_encoding and self.well_posed and self.controllable and self.observable


class LowerBoundSpec(BaseModel):
    """
    (P, p, T, t, ρ)：Lyapunov 不等式需要蕴含的下界
    """
    model_config = ConfigDict(frozen=True)

    kind: str = Field(..., description="预设名称")
    P: Array
    p: Array
    T: Array
    t: Array
    rho: Optional[float] = Field(None, ge=0.0, le=1.0)


class StructureMask(BaseModel):
    """
    强制为零的 Q/q/S/s 元素（1 表示固定为 0）
    """
    model_config = ConfigDict(frozen=True)

    name: str = "custom"
    Q_zero: Optional[Array] = None
    q_zero: Optional[Array] = None
    S_zero: Optional[Array] = None
    s_zero: Optional[Array] = None

    @model_validator(mode="after")
    def _check_symmetric(self):
        for key in ("Q_zero", "S_zero"):
            pattern = getattr(self, key)
            if pattern is not None and not np.array_equal(pattern, pattern.T):
                raise ValueError(f"{key} pattern must be symmetric")
        return self


class LyapunovCertificate(BaseModel):
    """
    (Q, q, S, s) 以及 C1/C2/C3 乘子，乘子按固定的点对顺序存储
    """
    model_config = ConfigDict(frozen=True)

    rho: float
    Q: Array
    q: Array
    S: Array
    s: Array
    lambda_C1: Array
    lambda_C2: Array
    lambda_C3: Array

    @model_validator(mode="after")
    def _check_lambdas(self):
        for key in ("lambda_C1", "lambda_C2", "lambda_C3"):
            values = getattr(self, key)
            if values.size and float(np.min(values)) < -1e-10:
                raise ValueError(f"{key} has a negative multiplier {float(np.min(values)):.3e}")
        return self


class CertificateCheck(BaseModel):
    """
    独立复核证书的结果
    """
    passed: bool
    violations: List[str] = Field(default_factory=list)
    min_eigs: Dict[str, float] = Field(default_factory=dict)
    eq_residuals: Dict[str, float] = Field(default_factory=dict)
    min_lambda: float = 0.0


class SlaterReport(BaseModel):
    holds: bool
    margin: float
    dim_requirement: int = Field(..., description="必要性要求 dim(H) >= n+3m-1")
    status: str = "Optimal"


class SdpOutcome(BaseModel):
    """
    可行性问题（phase-I）的求解结论
    """
    model_config = ConfigDict(frozen=True)

    status: Literal["Feasible", "Infeasible", "Marginal", "MaxIterations"]
    point: Optional[Array] = None
    margin: float
    iterations: int = 0
    diagnostics: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_point(self):
        if self.status == "Feasible" and self.point is None:
            raise ValueError("Feasible outcome requires a point")
        return self


class MaxOutcome(BaseModel):
    """
    线性目标最大化问题的求解结果
    """
    model_config = ConfigDict(frozen=True)

    status: Literal["Optimal", "Unbounded", "Infeasible", "Marginal", "MaxIterations"]
    value: Optional[float] = None
    point: Optional[Array] = None
    iterations: int = 0
    diagnostics: List[str] = Field(default_factory=list)


class CertifyResult(BaseModel):
    """
    在给定 ρ 下组装、求解、复核的完整结果
    """
    status: Literal["Feasible", "Infeasible", "Marginal", "MaxIterations"]
    rho: float
    margin: float
    certificate: Optional[LyapunovCertificate] = None
    check: Optional[CertificateCheck] = None
    slater: Optional[SlaterReport] = None
    diagnostics: List[str] = Field(default_factory=list)


class PepCheck(BaseModel):
    """
    原始 PEP 交叉验证：三个最优值都应不大于 0（相对 trace_cap）
    """
    values: Dict[str, Optional[float]]
    statuses: Dict[str, str]
    trace_cap: float
    passed: bool


class BisectionStep(BaseModel):
    rho: float
    status: str
    margin: float
    duration_ms: float


class RateResult(BaseModel):
    """
    二分搜索得到的最小可证线性收敛率
    """
    rho: Optional[float] = None
    status: Literal["certified", "not_certified", "inconclusive"]
    certificate: Optional[LyapunovCertificate] = None
    steps: List[BisectionStep] = Field(default_factory=list)
    diagnostics: List[str] = Field(default_factory=list)


class RatePoint(BaseModel):
    param: float
    param2: Optional[float] = None
    rho: Optional[float] = None
    status: str


class RegionCell(BaseModel):
    """
    参数区域扫描中单个网格点的结论
    """
    index: int
    p1: float
    p2: float
    feasible: bool
    status: Literal["Feasible", "Infeasible", "Marginal", "MaxIterations", "invalid", "error"]
    margin: Optional[float] = None
    duration_ms: float = 0.0
    error: Optional[str] = None


class TrajectoryPoint(BaseModel):
    """
    ξ_k = (x_k, u_k, y_k, F_k)，x 为 n×d，u/y 为 m×d
    """
    model_config = ConfigDict(frozen=True)

    x: Array
    u: Array
    y: Array
    F: Array


class Trajectory(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: List[TrajectoryPoint]
    status: Literal["completed", "diverged"] = "completed"
    divergence_iteration: Optional[int] = None
    diagnostics: List[str] = Field(default_factory=list)


class AuditViolation(BaseModel):
    check: str
    k: int
    amount: float


class AuditReport(BaseModel):
    """
    沿轨迹检验 Lyapunov 不等式与下界
    """
    passed: bool
    max_violation: float
    steps: int
    violations: List[AuditViolation] = Field(default_factory=list)
    V: List[float] = Field(default_factory=list)
    R: List[float] = Field(default_factory=list)


class InstanceAudit(BaseModel):
    seed: int
    index: int
    status: Literal["success", "failure", "skipped"]
    max_violation: Optional[float] = None
    error: Optional[str] = None
    duration_ms: float = 0.0


class AuditSummary(BaseModel):
    instances: int
    passed: int
    failed: int
    skipped: int
    max_violation: float
    results: List[InstanceAudit] = Field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return self.failed == 0 and self.passed > 0
