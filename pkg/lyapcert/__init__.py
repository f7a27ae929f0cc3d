"""
lyapcert: Lyapunov certificates and linear-rate analysis for first-order methods
"""

from .models import (
    FunctionClass,
    MethodRepresentation,
    ValidationReport,
    LowerBoundSpec,
    StructureMask,
    LyapunovCertificate,
    CertificateCheck,
    CertifyResult,
    SdpOutcome,
    MaxOutcome,
    RateResult,
    RegionCell,
    Trajectory,
    TrajectoryPoint,
    AuditReport,
    AuditSummary,
)
from .method_registry import MethodRegistry, MethodFamily, METHOD_REGISTRY, zoo_build
from .method_validator import MethodValidator, validate, print_validation_report
from .interpolation import build_blocks, build_structure, check_interpolation
from .sdp import SdpProblem, SolverError, solve_feasibility, solve_max
from .certify import (
    preset,
    assemble,
    certify,
    check_slater,
    verify_certificate,
    assemble_primal_pep,
    pep_crosscheck,
)
from .analysis import bisect_rho, rate_curve, rate_map, sweep_region
from .simulate import run, find_fixed_point, audit_certificate, audit_method, DivergenceError, FixedPointError

__version__ = "0.1.0"
__all__ = [
    "FunctionClass",
    "MethodRepresentation",
    "ValidationReport",
    "LowerBoundSpec",
    "StructureMask",
    "LyapunovCertificate",
    "CertificateCheck",
    "CertifyResult",
    "SdpOutcome",
    "MaxOutcome",
    "RateResult",
    "RegionCell",
    "Trajectory",
    "TrajectoryPoint",
    "AuditReport",
    "AuditSummary",
    "MethodRegistry",
    "MethodFamily",
    "METHOD_REGISTRY",
    "zoo_build",
    "MethodValidator",
    "validate",
    "print_validation_report",
    "build_blocks",
    "build_structure",
    "check_interpolation",
    "SdpProblem",
    "SolverError",
    "solve_feasibility",
    "solve_max",
    "preset",
    "assemble",
    "certify",
    "check_slater",
    "verify_certificate",
    "assemble_primal_pep",
    "pep_crosscheck",
    "bisect_rho",
    "rate_curve",
    "rate_map",
    "sweep_region",
    "run",
    "find_fixed_point",
    "audit_certificate",
    "audit_method",
    "DivergenceError",
    "FixedPointError",
]
