"""
Small FastAPI surface over validation, certification and rate bisection.

Endpoints:
 - GET  /families : list method families in the registry
 - POST /validate : structural checks for a method
 - POST /certify  : solve the certificate system at a given rho
 - POST /rate     : bisection for the smallest certifiable rho
"""
from typing import Any, Dict, List, Optional
import math
import sys
import os
import time
import logging

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, ValidationError

# 添加父目录到路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from config import BISECTION_TOL
from lyapcert.analysis import bisect_rho
from lyapcert.certify import certify, lower_bound_from_name, named_mask
from lyapcert.method_registry import METHOD_REGISTRY
from lyapcert.method_validator import format_validation_report, validate
from lyapcert.models import FunctionClass, MethodRepresentation

# 统一日志
logger = logging.getLogger("lyapcert.api")

app = FastAPI(title="lyapcert API")


# 请求中间件：记录请求体和路径
@app.middleware("http")
async def log_request(request: Request, call_next):
    start = time.time()
    body = await request.body()
    logger.info(f"[REQ] {request.method} {request.url.path} | body={body.decode('utf-8', errors='ignore')[:500]}")
    response = await call_next(request)
    duration = (time.time() - start) * 1000
    logger.info(f"[RESP] {response.status_code} | {request.url.path} | {duration:.2f} ms")
    return response


# 全局异常处理器：打印 400/422 细节
@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    logger.error(f"[422] {request.url.path} | detail={exc.errors()}")
    return JSONResponse(status_code=422, content={"detail": [str(e.get("msg")) for e in exc.errors()]})


@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    logger.error(f"[HTTP] {request.url.path} | status={exc.status_code} | detail={exc.detail}")
    return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})


class MethodRequest(BaseModel):
    """方法由 JSON 文档（method）或方法族 + 参数给出"""
    method: Optional[Dict[str, Any]] = Field(None, description="方法描述文档 {n, m, A, B, C, D, classes}")
    family: Optional[str] = None
    params: Optional[List[float]] = None
    classes: Optional[List[FunctionClass]] = None


class CertifyRequest(MethodRequest):
    rho: float = Field(..., ge=0.0, le=1.0)
    preset: str = "distance:1"
    mask: Optional[str] = None


class RateRequest(MethodRequest):
    preset: str = "distance:1"
    tol: float = Field(BISECTION_TOL, gt=0.0, lt=1.0)
    mask: Optional[str] = None


def _finite(value: Optional[float]) -> Optional[float]:
    return value if value is not None and math.isfinite(value) else None


def _resolve_method(req: MethodRequest) -> MethodRepresentation:
    """
    Raises:
        HTTPException: 400 输入不合法，404 方法族不存在
    """
    try:
        if req.family:
            return METHOD_REGISTRY.build(req.family, req.params or [], req.classes)
        if req.method is None:
            raise ValueError("either 'method' or 'family' is required")
        document = dict(req.method)
        if req.classes is not None:
            document["classes"] = [c.model_dump() for c in req.classes]
        return MethodRepresentation(**document)
    except KeyError as e:
        raise HTTPException(status_code=404, detail=str(e))
    except (ValueError, ValidationError) as e:
        raise HTTPException(status_code=400, detail=f"invalid method: {e}")


@app.get("/families")
def list_families():
    families = []
    for name in METHOD_REGISTRY.list_families():
        fam = METHOD_REGISTRY.get(name)
        families.append({
            "name": name,
            "params": fam.param_names,
            "n": fam.n,
            "m": fam.m,
            "sweep_template": fam.sweep_template,
            "description": fam.description,
        })
    return {"status": "success", "families": families, "count": len(families)}


@app.post("/validate")
def validate_method(req: MethodRequest):
    rep = _resolve_method(req)
    report = validate(rep)
    return {
        "status": "success",
        "passed": report.passed,
        "report": report.model_dump(mode="json"),
        "lines": format_validation_report(report),
    }


@app.post("/certify")
def certify_method(req: CertifyRequest):
    rep = _resolve_method(req)
    report = validate(rep)
    if not report.passed:
        raise HTTPException(status_code=400, detail=format_validation_report(report))
    try:
        lb = lower_bound_from_name(req.preset, rep)
        mask, lb = named_mask(req.mask, rep, lb)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))

    result = certify(rep, lb, req.rho, mask)
    return {
        "status": result.status,
        "rho": req.rho,
        "margin": _finite(result.margin),
        "certificate": result.certificate.model_dump(mode="json") if result.certificate else None,
        "diagnostics": result.diagnostics,
    }


@app.post("/rate")
def rate_method(req: RateRequest):
    rep = _resolve_method(req)
    report = validate(rep)
    if not report.passed:
        raise HTTPException(status_code=400, detail=format_validation_report(report))
    try:
        lb = lower_bound_from_name(req.preset, rep)
        mask, lb = named_mask(req.mask, rep, lb)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))

    result = bisect_rho(rep, lb, req.tol, mask)
    return {
        "status": result.status,
        "rho": result.rho,
        "steps": [
            {"rho": s.rho, "status": s.status, "margin": _finite(s.margin), "duration_ms": s.duration_ms}
            for s in result.steps
        ],
        "certificate": result.certificate.model_dump(mode="json") if result.certificate else None,
        "diagnostics": result.diagnostics,
    }


if __name__ == "__main__":
    import uvicorn

    # 从环境变量获取主机和端口
    host = os.getenv("HOST", "127.0.0.1")
    port = int(os.getenv("PORT", "8000"))

    uvicorn.run("lyapcert.api:app", host=host, port=port, reload=False)
