"""End-to-end orchestration: network -> equilibrium -> perturbation ->
smoothed objective -> quadratization -> decomposition solve -> crash report.

Produces a structured report plus flat per-institution rows suitable for
CSV emission and bar-chart plotting.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import __version__, equilibrium, hubo, network, reduction, solver
from .errors import ParameterError


@dataclass
class PipelineConfig:
    """Everything needed for a reproducible pipeline run.

    The network comes either from ``network_file`` / an in-memory network
    passed to :func:`run_pipeline`, or from ``generate`` parameters
    (n, m, price_low, price_high, seed).
    """

    network_file: Optional[str] = None
    generate: Optional[dict] = None
    vc_fraction: float = 0.8
    beta_fraction: float = 0.3
    alpha_min: int = 0
    bits: int = 5
    expansion_degree: int = 3
    zero_assets: Optional[list] = None
    random_zero_count: Optional[int] = None
    perturbation_seed: int = 0
    subsolver: str = "tabu"
    reads: int = 20
    subproblem_size: int = 50
    max_iterations: int = 100
    solver_seed: int = 0
    gadget_scale: float = 20.0
    strategy: str = "k-ancilla"
    oracle_cap: int = 2**25
    normalize: bool = False

    def validate(self, have_network: bool = False) -> list[str]:
        problems = []
        if not have_network and self.network_file is None and self.generate is None:
            problems.append("no network source: set network_file or generate")
        if self.expansion_degree is not None and (
            self.expansion_degree < 1 or self.expansion_degree % 2 == 0
        ):
            problems.append("expansion_degree must be a positive odd integer")
        for name in ("vc_fraction", "beta_fraction"):
            val = getattr(self, name)
            if not (0 <= val <= 1):
                problems.append(f"{name} must lie in [0, 1], got {val}")
        if self.bits < 1:
            problems.append("bits must be >= 1")
        if self.reads < 1:
            problems.append("reads must be >= 1")
        if self.subproblem_size < 2:
            problems.append("subproblem_size must be >= 2")
        if self.zero_assets is not None and self.random_zero_count is not None:
            problems.append("choose either zero_assets or random_zero_count, not both")
        if self.strategy not in ("k-ancilla", "single-ancilla-3body"):
            problems.append(f"unknown strategy '{self.strategy}'")
        if self.subsolver not in ("tabu", "sa", "exhaustive"):
            problems.append(f"unknown subsolver '{self.subsolver}'")
        return problems

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _resolve_network(config: PipelineConfig, net):
    if net is not None:
        return net
    if config.network_file is not None:
        return network.load_network(config.network_file)
    g = config.generate
    return network.generate_random_network(
        int(g["n"]), int(g["m"]),
        float(g.get("price_low", 10.0)), float(g.get("price_high", 40.0)),
        int(g.get("seed", 0)),
    )


def run_pipeline(
    config: PipelineConfig, net: Optional[network.FinancialNetwork] = None
) -> dict:
    """Run the full crash-prediction pipeline; returns the report document.

    Stages: resolve network -> pre-perturbation linear equilibrium ->
    derive failure spec (vc/beta fractions) -> zero asset prices ->
    build the smoothed objective -> quadratize -> decomposition solve ->
    decode (best-energy sample, majority vote as diagnostic) ->
    crash report; an exhaustive-oracle comparison is attached whenever
    the grid fits under ``oracle_cap``.
    """
    problems = config.validate(have_network=net is not None)
    if problems:
        raise ParameterError("invalid pipeline config: " + "; ".join(problems))

    net = _resolve_network(config, net)
    n = net.n_institutions

    pre = equilibrium.linear_equilibrium(net)
    fail = network.FailureSpec(
        config.vc_fraction * pre.market_values,
        config.beta_fraction * pre.equity_values,
    )

    if config.zero_assets is not None:
        zeroed = sorted(int(k) for k in config.zero_assets)
    elif config.random_zero_count:
        rng = np.random.default_rng(config.perturbation_seed)
        zeroed = sorted(
            int(k)
            for k in rng.choice(net.n_assets, size=config.random_zero_count,
                                replace=False)
        )
    else:
        zeroed = []
    perturbed = network.perturb_prices(net, zeroed)
    post_linear = equilibrium.linear_equilibrium(perturbed)

    spec = hubo.BitSpec(config.alpha_min, config.alpha_min + config.bits - 1)
    r = config.expansion_degree
    nonlinear = config.beta_fraction > 0
    poly = hubo.build_hubo(perturbed, fail if nonlinear else None, spec,
                           r if nonlinear else None)

    spin = reduction.boolean_to_spin(poly)
    qubo = reduction.quadratize(
        spin, reduction.GadgetParams(scale_factor=config.gadget_scale),
        strategy=config.strategy,
    )

    samples = solver.decompose_solve(
        qubo,
        subproblem_size=config.subproblem_size,
        subsolver=config.subsolver,
        max_iterations=config.max_iterations,
        reads=config.reads,
        seed=config.solver_seed,
    )
    best = samples.best_sample
    logical_bits = list(best.assignment[: qubo.num_logical])
    vote_bits = solver.majority_vote(samples, range(qubo.num_logical))

    def decode(bits):
        return [
            hubo.decode_bits(spec, list(bits[i * spec.num_bits:(i + 1) * spec.num_bits]))
            for i in range(n)
        ]

    v_best = decode(logical_bits)
    v_vote = decode(vote_bits)
    obj_best = (
        equilibrium.smoothed_objective(perturbed, fail, v_best, r, spec.v_max)
        if nonlinear
        else equilibrium.objective(perturbed, fail, v_best)
    )

    report_crash = equilibrium.crash_report(
        pre.market_values, v_best, fail, v_linear=post_linear.market_values
    )

    oracle_section = None
    v_oracle = None
    if (2**config.bits) ** n <= config.oracle_cap:
        oracle = equilibrium.exhaustive_equilibrium(
            perturbed, fail, config.bits,
            use_smoothed=nonlinear, r=r if nonlinear else None,
            eval_cap=config.oracle_cap,
        )
        v_oracle = list(oracle.best_values)
        oracle_section = {
            "best_objective": oracle.best_objective,
            "minimizers": [list(v) for v, _ in oracle.minimizers],
            "multiple_equilibria": len(oracle.minimizers) > 1,
            "solver_objective": obj_best,
            "objective_gap": obj_best - oracle.best_objective,
            "n_evaluations": oracle.n_evaluations,
        }

    solver_stats = dict(samples.metadata)
    if config.normalize:
        solver_stats.pop("wall_time", None)

    report = {
        "version": __version__,
        "config": asdict(config),
        "config_hash": config.config_hash(),
        "network": {
            "n": n,
            "m": net.n_assets,
            "prices": net.prices.tolist(),
            "perturbed_prices": perturbed.prices.tolist(),
            "zeroed_assets": zeroed,
        },
        "failure_spec": {
            "critical_values": fail.critical_values.tolist(),
            "failure_magnitudes": fail.failure_magnitudes.tolist(),
        },
        "pre_equilibrium": {
            "market_values": pre.market_values.tolist(),
            "equity_values": pre.equity_values.tolist(),
        },
        "post_linear_equilibrium": {
            "market_values": post_linear.market_values.tolist(),
        },
        "hubo_stats": {
            "num_variables": poly.num_variables,
            "degree": poly.degree,
            "terms_by_order": {str(k): v for k, v in
                               sorted(poly.order_histogram().items())},
        },
        "reduction_stats": {
            "size": qubo.size,
            "logical": qubo.num_logical,
            "ancillas": qubo.size - qubo.num_logical,
            "couplers": qubo.num_couplers,
        },
        "solver_stats": {
            **solver_stats,
            "best_energy": best.energy,
            "num_samples": len(samples.samples),
        },
        "decoded": {
            "market_values_best": v_best,
            "market_values_majority_vote": v_vote,
            "objective_best": obj_best,
        },
        "oracle": oracle_section,
        "crash_report": report_crash.to_dict(),
    }
    if not config.normalize:
        import datetime

        report["generated_at"] = datetime.datetime.now(
            datetime.timezone.utc
        ).isoformat()

    rows = []
    for i in range(n):
        rows.append({
            "institution": i,
            "market_value_pre": float(pre.market_values[i]),
            "equity_value_pre": float(pre.equity_values[i]),
            "critical_value": float(fail.critical_values[i]),
            "failure_magnitude": float(fail.failure_magnitudes[i]),
            "market_value_linear_post": float(post_linear.market_values[i]),
            "market_value_solver": float(v_best[i]),
            "market_value_vote": float(v_vote[i]),
            "market_value_oracle": float(v_oracle[i]) if v_oracle else None,
            "drop": float(report_crash.drops[i]),
            "relative_drop": float(report_crash.relative_drops[i]),
            "failed": i in report_crash.failed,
        })
    report["per_institution"] = rows
    return report
