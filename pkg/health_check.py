#!/usr/bin/env python3
"""
Health check script: dependencies, configuration and a tiny reference LMI
"""

import os
import sys
import logging

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def check_dependencies():
    """检查数值计算依赖是否正常"""
    try:
        import numpy
        import scipy
        import cvxopt
        import pydantic
        import colorlog

        logger.info(f"numpy {numpy.__version__}, scipy {scipy.__version__}, pydantic {pydantic.VERSION}")
        return True
    except ImportError as e:
        logger.error(f"Missing core dependency: {e}")
        return False


def check_configuration():
    """检查配置是否可以读取，后端是否可用"""
    try:
        sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))
        from config import LYAPCERT_BACKEND
        from lyapcert.sdp import get_backend

        backend = get_backend(LYAPCERT_BACKEND)
        logger.info(f"SDP backend: {backend.name}")
        return True
    except (ImportError, KeyError) as e:
        logger.error(f"Configuration problem: {e}")
        return False


def check_reference_lmi():
    """[[x, 0], [0, 1 - x]] ⪰ 0 必须判定为可行"""
    try:
        import numpy as np
        from lyapcert.sdp import SdpProblem, solve_feasibility

        problem = SdpProblem(1, ["x"])
        problem.add_psd(
            "reference",
            np.array([[0.0, 0.0], [0.0, 1.0]]),
            np.array([[[1.0, 0.0], [0.0, -1.0]]]),
        )
        outcome = solve_feasibility(problem)
        logger.info(f"Reference LMI: {outcome.status} (margin={outcome.margin:.3e})")
        return outcome.status == "Feasible"
    except Exception as e:
        logger.error(f"Reference LMI failed: {e}")
        return False


def health_check():
    """综合健康检查"""
    checks = [
        ("Dependencies", check_dependencies()),
        ("Configuration", check_configuration()),
        ("Reference LMI", check_reference_lmi()),
    ]

    all_healthy = True
    for check_name, status in checks:
        if status:
            logger.info(f"✓ {check_name}: OK")
        else:
            logger.error(f"✗ {check_name}: FAILED")
            all_healthy = False

    return all_healthy


if __name__ == "__main__":
    sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))
    try:
        from lyapcert.utils import setup_logging
        setup_logging()
    except ImportError:
        # colorlog 缺失时保留 basicConfig，由依赖检查报告
        pass

    logger.info("Running lyapcert health check...")

    if health_check():
        logger.info("Health check PASSED")
        sys.exit(0)
    else:
        logger.error("Health check FAILED")
        sys.exit(1)
