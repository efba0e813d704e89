import asyncio
from concurrent.futures import ThreadPoolExecutor
from typing import Dict

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, ConfigDict

from config import ConfigError, load_experiment_config

app = FastAPI(title="NWS Convolution Laboratory API", version="0.1.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Thread pool for the synchronous numerics
executor = ThreadPoolExecutor(max_workers=2)


# Output locations belong to the operator, not to HTTP callers
SERVER_ONLY_KEYS = ("csv_dir", "report_path")


class ExperimentRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    params: Dict[str, str] = {}


class SweepRequest(ExperimentRequest):
    quantity: str = "F_of_s"


def _load(request: ExperimentRequest):
    blocked = sorted(set(request.params) & set(SERVER_ONLY_KEYS))
    if blocked:
        raise ConfigError(f"key(s) not settable over HTTP: {', '.join(blocked)}")
    return load_experiment_config(overrides=request.params)


async def _run(func, *args):
    """Run a blocking call in the pool, mapping errors to HTTP status codes."""
    try:
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(executor, func, *args)
    except (ConfigError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"{type(e).__name__}: {e}")


@app.get("/")
async def read_root():
    """Health document"""
    return {
        "status": "ok",
        "service": "nws-lab",
        "commands": ["claims", "sweep", "simulate", "kernel", "invert"],
    }


def run_claims(request: ExperimentRequest):
    from orchestrator import run_claim_suite
    reports = run_claim_suite(_load(request), write=False)
    return [report.model_dump(mode="json") for report in reports]


@app.post("/api/claims")
async def claims(request: ExperimentRequest):
    """Run the claim suite and return the ordered reports"""
    return await _run(run_claims, request)


def evaluate_kernels(x: float, t: float, s: float, nu: float, alpha: float):
    from kernels import NwsParams, heat_kernel, linear_propagator, spectral_kernel
    params = NwsParams(nu=nu, alpha=alpha)
    return {
        "heat_kernel": float(heat_kernel(x, t, params)),
        "spectral_kernel": float(spectral_kernel(s, t, params)),
        "linear_propagator": float(linear_propagator(x, t, params)),
    }


@app.get("/api/kernel")
async def kernel(x: float = 0.0, t: float = 1.0, s: float = 0.0, nu: float = 1.0, alpha: float = 1.0):
    """Heat kernel, spectral kernel and damped propagator at one point"""
    return await _run(evaluate_kernels, x, t, s, nu, alpha)


def run_sweep(request: SweepRequest):
    from orchestrator import export_sweep
    return {"quantity": request.quantity, "path": export_sweep(_load(request), request.quantity)}


@app.post("/api/sweep")
async def sweep(request: SweepRequest):
    """Write a plot-ready CSV and return its path"""
    return await _run(run_sweep, request)


def run_inversion(request: ExperimentRequest):
    from codomain import invert_solution
    config = _load(request)
    field, _, report = invert_solution(config.params, config.time.t_end, config.make_grid())
    return {"report": report.model_dump(mode="json"), "sup_norm": field.sup_norm()}


@app.post("/api/invert")
async def invert(request: ExperimentRequest):
    """Inverse transform of the codomain solution with its claim report"""
    return await _run(run_inversion, request)
