"""
Utility functions for lyapcert: logging setup and argument parsing helpers
"""

from typing import List, Optional, Tuple
import logging
import math

import colorlog

from .models import FunctionClass

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level: str = "INFO") -> None:
    """
    安装带颜色的控制台日志处理器（重复调用时替换已有处理器）

    Args:
        level: 日志级别名称
    """
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(
        "%(log_color)s" + LOG_FORMAT,
        log_colors={
            "DEBUG": "cyan",
            "INFO": "green",
            "WARNING": "yellow",
            "ERROR": "red",
            "CRITICAL": "red,bg_white",
        },
    ))
    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))


def parse_range(text: str) -> Tuple[float, float, float]:
    """
    解析 "a:b:step" 形式的范围

    Returns:
        (start, stop, step)

    Raises:
        ValueError: 格式错误或 step <= 0
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must look like start:stop:step, got '{text}'")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"range entries must be numbers, got '{text}'")
    if not step > 0:
        raise ValueError(f"range step must be positive, got '{text}'")
    if stop < start:
        raise ValueError(f"range stop must not be below start, got '{text}'")
    return start, stop, step


def parse_classes(text: str) -> List[FunctionClass]:
    """
    解析 "σ1,β1;σ2,β2" 形式的函数类列表，β 可写作 inf

    Raises:
        ValueError: 格式错误或 σ >= β
    """
    classes = []
    for item in text.split(";"):
        parts = [p.strip() for p in item.split(",")]
        if len(parts) != 2:
            raise ValueError(f"function class must look like sigma,beta, got '{item}'")
        classes.append(FunctionClass(sigma=float(parts[0]), beta=parts[1]))
    return classes


def parse_params(text: str) -> List[float]:
    """解析逗号分隔的参数列表"""
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValueError(f"parameters must be comma-separated numbers, got '{text}'")


def fmt6(value: Optional[float]) -> str:
    """6 位有效数字；None 与非有限值写为 nan"""
    if value is None or not math.isfinite(value):
        return "nan"
    return f"{value:.6g}"
