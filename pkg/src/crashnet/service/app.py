"""FastAPI service exposing the crashnet core.

Every capability of the package sits behind an endpoint so the CLI (and
any other client) can stay a thin shell.  ``/v1/sample`` speaks the plain
sampler wire protocol understood by :func:`crashnet.solver.remote_sample`.

Run with, e.g.::

    uvicorn crashnet.service.app:app --port 8000
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, equilibrium, hubo, network, reduction, solver
from ..errors import CrashnetError, NetworkInvariantError, ParameterError
from ..pipeline import PipelineConfig, run_pipeline
from . import schemas

# HTTP status per error category; the CLI maps these back to exit codes.
_STATUS = {"validation": 422, "numeric": 500, "resource": 507, "remote": 502}


def create_app() -> FastAPI:
    app = FastAPI(title="crashnet", version=__version__)

    @app.exception_handler(CrashnetError)
    async def crashnet_error_handler(request: Request, exc: CrashnetError):
        return JSONResponse(
            status_code=_STATUS.get(exc.category, 500),
            content={"detail": {"category": exc.category, "message": str(exc)}},
        )

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/network/generate", response_model=schemas.NetworkModel)
    def generate(req: schemas.GenerateRequest):
        net = network.generate_random_network(
            req.n, req.m, req.price_low, req.price_high, req.seed
        )
        return schemas.NetworkModel.from_core(net)

    @app.post("/v1/network/validate", response_model=schemas.ValidateResponse)
    def validate(req: schemas.NetworkModel):
        violations = network.validate(req.to_core())
        return schemas.ValidateResponse(valid=not violations, violations=violations)

    @app.post("/v1/equilibrium", response_model=schemas.EquilibriumResponse)
    def linear_equilibrium(req: schemas.EquilibriumRequest):
        net = req.network.to_core()
        _require_valid(net)
        state = equilibrium.linear_equilibrium(net)
        return schemas.EquilibriumResponse(
            market_values=state.market_values.tolist(),
            equity_values=state.equity_values.tolist(),
        )

    @app.post("/v1/hubo", response_model=schemas.HuboResponse)
    def build_hubo(req: schemas.HuboRequest):
        net = req.network.to_core()
        _require_valid(net)
        spec = hubo.BitSpec(req.alpha_min, req.alpha_max)
        fail = None
        if req.r is not None:
            if req.network.failure_spec is not None:
                fail = req.network.failure_spec.to_core()
            else:
                fail = equilibrium.default_failure_spec(
                    net, req.vc_fraction, req.beta_fraction
                )
        poly = hubo.build_hubo(net, fail, spec, req.r)
        return schemas.HuboResponse(
            polynomial=poly.to_text(),
            num_variables=poly.num_variables,
            degree=poly.degree,
            terms_by_order={
                str(k): v for k, v in sorted(poly.order_histogram().items())
            },
        )

    @app.post("/v1/reduce", response_model=schemas.ReduceResponse)
    def reduce(req: schemas.ReduceRequest):
        poly = hubo.BinaryPolynomial.from_text(req.polynomial)
        spin = reduction.boolean_to_spin(poly)
        q = reduction.quadratize(
            spin,
            reduction.GadgetParams(scale_factor=req.scale_factor),
            strategy=req.strategy,
        )
        return schemas.ReduceResponse(
            qubo=schemas.QuboModel.from_core(q),
            logical=q.num_logical,
            ancillas=q.size - q.num_logical,
            couplers=q.num_couplers,
        )

    @app.post("/v1/solve", response_model=schemas.SampleSetModel)
    def solve(req: schemas.SolveRequest):
        q = req.qubo.to_core()
        if req.solver == "exhaustive":
            result = solver.exhaustive_solve(q)
        elif req.solver == "sa":
            schedule = solver.default_schedule(q, sweeps=req.sweeps, reads=req.reads)
            result = solver.simulated_annealing(q, schedule, seed=req.seed)
        elif req.solver == "tabu":
            result = solver.tabu_solve(q, seed=req.seed)
        elif req.solver == "decompose":
            result = solver.decompose_solve(
                q,
                subproblem_size=req.subproblem_size,
                subsolver=req.subsolver,
                max_iterations=req.max_iterations,
                reads=req.reads,
                seed=req.seed,
            )
        else:
            raise ParameterError(f"unknown solver '{req.solver}'")
        return schemas.SampleSetModel(**result.to_dict())

    @app.post("/v1/sample", response_model=schemas.SampleResponse)
    def sample(req: schemas.SampleRequest):
        q = reduction.Qubo(
            size=req.size,
            linear=np.asarray(req.linear, dtype=float),
            quadratic={(int(i), int(j)): float(v) for i, j, v in req.quadratic},
            offset=req.offset,
        )
        schedule = solver.default_schedule(q, reads=req.reads)
        result = solver.simulated_annealing(
            q, schedule, seed=0 if req.seed is None else req.seed
        )
        return schemas.SampleResponse(
            samples=[list(s.assignment) for s in result.samples],
            energies=[s.energy for s in result.samples],
            occurrences=[s.num_occurrences for s in result.samples],
        )

    @app.post("/v1/estimate")
    def estimate(req: schemas.EstimateRequest) -> dict:
        return reduction.estimate_resources(req.n, req.bits, req.r).to_dict()

    @app.post("/v1/pipeline")
    def pipeline(req: schemas.PipelineRequest) -> dict:
        net = req.network.to_core() if req.network is not None else None
        if net is not None:
            _require_valid(net)
        cfg = PipelineConfig(
            generate=req.generate.model_dump() if req.generate else None,
            vc_fraction=req.vc_fraction,
            beta_fraction=req.beta_fraction,
            alpha_min=req.alpha_min,
            bits=req.bits,
            expansion_degree=req.expansion_degree,
            zero_assets=req.zero_assets,
            random_zero_count=req.random_zero_count,
            perturbation_seed=req.perturbation_seed,
            subsolver=req.subsolver,
            reads=req.reads,
            subproblem_size=req.subproblem_size,
            max_iterations=req.max_iterations,
            solver_seed=req.solver_seed,
            gadget_scale=req.gadget_scale,
            strategy=req.strategy,
            oracle_cap=req.oracle_cap,
            normalize=req.normalize,
        )
        return run_pipeline(cfg, net=net)

    return app


def _require_valid(net) -> None:
    violations = network.validate(net)
    if violations:
        raise NetworkInvariantError("; ".join(violations))


app = create_app()
