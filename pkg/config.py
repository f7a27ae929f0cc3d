import os

"""
Configuration for lyapcert - Environment Variables Based Configuration
"""

# Worker pool size for region sweeps and audits (overrides --jobs)
LYAPCERT_JOBS = int(os.getenv("LYAPCERT_JOBS", "0"))

# SDP backend: "cvxopt" (built-in reference) or "cvxpy"
LYAPCERT_BACKEND = os.getenv("LYAPCERT_BACKEND", "cvxopt")

# Interior-point options passed to the backend
SOLVER_OPTIONS = {
    "maxiters": int(os.getenv("LYAPCERT_SOLVER_MAXITERS", "100")),
    "abstol": float(os.getenv("LYAPCERT_SOLVER_ABSTOL", "1e-9")),
    "reltol": float(os.getenv("LYAPCERT_SOLVER_RELTOL", "1e-8")),
    "feastol": float(os.getenv("LYAPCERT_SOLVER_FEASTOL", "1e-9")),
}

# Phase-I verdict band and variable box
FEAS_EPS = float(os.getenv("LYAPCERT_FEAS_EPS", "1e-8"))
VAR_BOUND = float(os.getenv("LYAPCERT_VAR_BOUND", "1e4"))

# Facial reduction from the phase-I dual when the verdict lands in the band
FACIAL_REDUCTION = {
    "rounds": int(os.getenv("LYAPCERT_FR_ROUNDS", "3")),
    "certificate_tol": float(os.getenv("LYAPCERT_FR_CERT_TOL", "1e-6")),
    "rank_rtol": float(os.getenv("LYAPCERT_FR_RANK_RTOL", "1e-4")),
    "null_rtol": float(os.getenv("LYAPCERT_FR_NULL_RTOL", "1e-6")),
}

# Certificate checks
SLATER_EPS = float(os.getenv("LYAPCERT_SLATER_EPS", "1e-7"))
PEP_TRACE_CAP = float(os.getenv("LYAPCERT_PEP_TRACE_CAP", "1e4"))
BISECTION_TOL = float(os.getenv("LYAPCERT_BISECTION_TOL", "1e-3"))

# Simulation
SIM_CONFIG = {
    "dim": int(os.getenv("LYAPCERT_SIM_DIM", "2")),
    "seed": int(os.getenv("LYAPCERT_SIM_SEED", "0")),
    "steps": int(os.getenv("LYAPCERT_SIM_STEPS", "200")),
    "instances": int(os.getenv("LYAPCERT_SIM_INSTANCES", "100")),
    "fixed_point_max_iter": int(os.getenv("LYAPCERT_FIXED_POINT_MAX_ITER", "1000000")),
    "divergence_bound": float(os.getenv("LYAPCERT_DIVERGENCE_BOUND", "1e8")),
}

# Output and logging
RESULTS_DIR = os.getenv("LYAPCERT_RESULTS_DIR", "./data/results")
LOG_LEVEL = os.getenv("LYAPCERT_LOG_LEVEL", "INFO")
