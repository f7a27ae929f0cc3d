"""
Command-line front end: validate, rate, region, certify, audit and repro
"""
import sys
import os

# 添加父目录到路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from typing import List, Optional
import argparse
import logging

import numpy as np
from pydantic import ValidationError

from config import BISECTION_TOL, LOG_LEVEL, SIM_CONFIG
from .analysis import bisect_rho, grid_axis, resolve_jobs, sweep_region
from .certify import MASK_NAMES, certify, lower_bound_from_name, named_mask, pep_crosscheck
from .method_registry import METHOD_REGISTRY
from .method_validator import print_validation_report, validate
from .models import MethodRepresentation, RatePoint
from .repro import run_target, target_names
from .result_store import (
    RegionWriter,
    load_certificate,
    load_method,
    save_certificate,
    write_rate_csv,
    write_trajectory_csv,
)
from .simulate import audit_certificate, audit_method, find_fixed_point, run
from .oracles import random_instance
from .utils import parse_classes, parse_params, parse_range, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


def _add_method_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("method", nargs="?", help="方法描述 JSON 文件")
    parser.add_argument("--family", help="方法库中的方法族（替代 JSON 文件）")
    parser.add_argument("--params", help="方法族参数，逗号分隔")
    parser.add_argument("--classes", help="函数类，如 '1,2;0,inf'")


def _with_classes(rep: MethodRepresentation, classes) -> MethodRepresentation:
    """替换函数类并重新校验"""
    document = rep.to_document()
    document["classes"] = [c.model_dump() for c in classes]
    return MethodRepresentation(**document)


def _load_rep(args: argparse.Namespace) -> MethodRepresentation:
    classes = parse_classes(args.classes) if args.classes else None
    if args.family:
        params = parse_params(args.params or "")
        return METHOD_REGISTRY.build(args.family, params, classes)
    if not args.method:
        raise ValueError("either a method JSON file or --family is required")
    rep = load_method(args.method)
    if classes is not None:
        rep = _with_classes(rep, classes)
    return rep


def _require_valid(rep: MethodRepresentation) -> bool:
    report = validate(rep)
    if not report.passed:
        print_validation_report(rep.family or "method", report)
    return report.passed


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, help="并行进程数（LYAPCERT_JOBS 非零时优先）")
    common.add_argument("--seed", type=int, default=SIM_CONFIG["seed"], help="随机种子")
    common.add_argument("--log-level", default=LOG_LEVEL, help="日志级别")

    parser = argparse.ArgumentParser(prog="lyapcert", description="Lyapunov certificates for first-order methods")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="检查结构性假设")
    _add_method_args(p)

    p = sub.add_parser("rate", parents=[common], help="二分搜索最小可证收敛率")
    _add_method_args(p)
    p.add_argument("--preset", default="distance:1")
    p.add_argument("--tol", type=float, default=BISECTION_TOL)
    p.add_argument("--mask", choices=MASK_NAMES, default="none")
    p.add_argument("--out", help="速率 CSV 输出路径")
    p.add_argument("--cert-out", help="证书 JSON 输出路径")

    p = sub.add_parser("region", parents=[common], help="在 ρ=1 处扫描参数区域")
    p.add_argument("family")
    p.add_argument("--p1", required=True, help="start:stop:step")
    p.add_argument("--p2", required=True, help="start:stop:step")
    p.add_argument("--template", help="网格坐标到参数的模板，如 'p1,p1,p2'")
    p.add_argument("--classes", help="函数类，如 '0,inf;0,inf'")
    p.add_argument("--preset", help="默认 m=1 为 function_value，否则 duality_gap")
    p.add_argument("--mask", choices=MASK_NAMES, default="none")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.add_argument("--verbose-csv", action="store_true", help="额外写出 status 列")

    p = sub.add_parser("certify", parents=[common], help="在给定 ρ 下求解并输出证书")
    _add_method_args(p)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--preset", default="distance:1")
    p.add_argument("--mask", choices=MASK_NAMES, default="none")
    p.add_argument("--out", help="证书 JSON 输出路径")
    p.add_argument("--pep", action="store_true", help="附加原始 PEP 交叉验证")
    p.add_argument("--slater", action="store_true", help="不可行时检查 Slater 条件")

    p = sub.add_parser("audit", parents=[common], help="在随机实例上审计证书")
    p.add_argument("method")
    p.add_argument("certificate")
    p.add_argument("--classes", help="函数类，如 '1,2;0,inf'")
    p.add_argument("--preset", help="证书文件未包含下界时使用的预设")
    p.add_argument("--instances", type=int, default=SIM_CONFIG["instances"])
    p.add_argument("--steps", type=int, default=SIM_CONFIG["steps"])
    p.add_argument("--dim", type=int, default=SIM_CONFIG["dim"])
    p.add_argument("--trajectory-out", help="写出第一个实例的轨迹 CSV")

    p = sub.add_parser("repro", parents=[common], help="重新生成图表数据")
    p.add_argument("target", choices=target_names())
    p.add_argument("--out-dir", default="repro")
    p.add_argument("--step", type=float, help="覆盖默认网格步长")
    return parser


def cmd_validate(args: argparse.Namespace) -> int:
    rep = _load_rep(args)
    report = validate(rep)
    print_validation_report(rep.family or args.method or "method", report)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_rate(args: argparse.Namespace) -> int:
    rep = _load_rep(args)
    if not _require_valid(rep):
        return EXIT_FAILED
    lb = lower_bound_from_name(args.preset, rep)
    mask, lb = named_mask(args.mask, rep, lb)
    result = bisect_rho(rep, lb, args.tol, mask)

    if result.status == "certified":
        print(f"rho={result.rho:.3f}")
    else:
        print(f"rho=none ({result.status})")
        for line in result.diagnostics:
            print(f"  {line}")

    if args.out:
        param = rep.params[0] if rep.params else None
        write_rate_csv([RatePoint(param=param if param is not None else float("nan"),
                                  rho=result.rho, status=result.status)], args.out)
    if args.cert_out and result.certificate is not None:
        save_certificate(result.certificate, args.cert_out, lb, rep)

    return {"certified": EXIT_OK, "not_certified": EXIT_FAILED}.get(result.status, EXIT_INCONCLUSIVE)


def cmd_region(args: argparse.Namespace) -> int:
    METHOD_REGISTRY.get(args.family)
    p1 = grid_axis(*parse_range(args.p1))
    p2 = grid_axis(*parse_range(args.p2))
    classes = parse_classes(args.classes) if args.classes else None
    with RegionWriter(args.out, verbose=args.verbose_csv) as writer:
        cells = sweep_region(
            args.family, p1, p2,
            template=args.template,
            classes=classes,
            kind=args.preset,
            mask_name=args.mask,
            rho=args.rho,
            jobs=resolve_jobs(args.jobs),
            sink=writer,
        )
    feasible = sum(1 for c in cells if c.feasible)
    failed = sum(1 for c in cells if c.status in ("invalid", "error"))
    print(f"{feasible}/{len(cells)} cells feasible ({failed} invalid or failed) -> {args.out}")
    return EXIT_INCONCLUSIVE if failed else EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    rep = _load_rep(args)
    if not _require_valid(rep):
        return EXIT_FAILED
    lb = lower_bound_from_name(args.preset, rep)
    mask, lb = named_mask(args.mask, rep, lb)
    result = certify(rep, lb, args.rho, mask, with_slater=args.slater)
    print(f"status={result.status} rho={args.rho:.6g} margin={result.margin:.3e}")
    for line in result.diagnostics:
        print(f"  {line}")

    if result.status != "Feasible":
        return EXIT_FAILED if result.status == "Infeasible" else EXIT_INCONCLUSIVE

    if args.pep:
        pep = pep_crosscheck(rep, lb, args.rho, result.certificate)
        print(f"PEP cross-check: {'PASS' if pep.passed else 'FAIL'} {pep.values}")
        if not pep.passed:
            return EXIT_INCONCLUSIVE
    if args.out:
        print(f"certificate -> {save_certificate(result.certificate, args.out, lb, rep)}")
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    rep = load_method(args.method)
    if args.classes:
        rep = _with_classes(rep, parse_classes(args.classes))
    stored = load_certificate(args.certificate)
    cert = stored["certificate"]
    lb = stored["lower_bound"]
    if lb is None:
        if not args.preset:
            raise ValueError("certificate file carries no lower bound; pass --preset")
        lb = lower_bound_from_name(args.preset, rep)

    summary = audit_method(rep, cert, lb, cert.rho, instances=args.instances, seed=args.seed,
                           steps=args.steps, dim=args.dim, jobs=resolve_jobs(args.jobs))
    print(f"instances={summary.instances} passed={summary.passed} failed={summary.failed} "
          f"skipped={summary.skipped} max_violation={summary.max_violation:.3e}")

    if args.trajectory_out:
        rng = np.random.default_rng([args.seed, 0])
        instance = random_instance(rep.classes, rng, args.dim)
        star = find_fixed_point(rep, instance)
        trajectory = run(rep, instance, star.x + rng.normal(size=star.x.shape), args.steps)
        report = audit_certificate(trajectory, star, cert, lb, cert.rho, rep)
        write_trajectory_csv(trajectory, args.trajectory_out, report.V, report.R)

    return EXIT_OK if summary.all_passed else EXIT_FAILED


def cmd_repro(args: argparse.Namespace) -> int:
    paths = run_target(args.target, args.out_dir, args.step, resolve_jobs(args.jobs))
    for path in paths:
        print(path)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "rate": cmd_rate,
    "region": cmd_region,
    "certify": cmd_certify,
    "audit": cmd_audit,
    "repro": cmd_repro,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行入口

    Returns:
        退出码：0 成功，1 不可行或检查失败，2 用法错误，3 数值上无定论
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    setup_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, KeyError, FileNotFoundError, ValidationError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
