"""Command-line interface.

A thin client over the HTTP service: by default the app is mounted
in-process, so no server needs to be running; point ``--endpoint`` (or
``CRASHNET_ENDPOINT``) at a deployed instance to go over the network.
File handling stays on the client side -- network documents, polynomial
dumps and ``.qubo`` files are parsed and written locally.

Exit codes: 0 success, 2 validation/parse, 3 numeric, 4 resource,
5 remote.
"""

from __future__ import annotations

import csv
import functools
import json
import os
import sys
from typing import Optional

import click
import httpx

from . import __version__, network, solver
from .errors import (
    CrashnetError,
    NumericError,
    ParameterError,
    ParseError,
    RemoteError,
    ResourceError,
    exit_code_for,
)

_CATEGORY_ERRORS = {
    "validation": ParameterError,
    "numeric": NumericError,
    "resource": ResourceError,
    "remote": RemoteError,
}


class ServiceClient:
    """POSTs JSON to the service; raises typed errors on failure."""

    def __init__(self, endpoint: Optional[str] = None):
        if endpoint:
            self._client = httpx.Client(
                base_url=endpoint.rstrip("/"), timeout=600.0
            )
        else:
            # in-process: mount the ASGI app directly
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> dict:
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise RemoteError(f"service unreachable: {exc}") from exc
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail")
            except ValueError:
                detail = None
            if isinstance(detail, dict) and "category" in detail:
                exc_type = _CATEGORY_ERRORS.get(detail["category"], ParameterError)
                raise exc_type(detail.get("message", "unspecified service error"))
            raise ParameterError(f"service rejected request: {detail}")
        return response.json()


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CrashnetError as exc:
            click.echo(f"error ({exc.category}): {exc}", err=True)
            sys.exit(exit_code_for(exc))
        except OSError as exc:
            click.echo(f"error (validation): {exc}", err=True)
            sys.exit(2)

    return wrapper


def _network_payload(path: str) -> dict:
    """Load a network document and reshape it for the wire."""
    net, fail = network.load_network_with_failure(path)
    payload = {
        "ownership": net.ownership.tolist(),
        "cross_holdings": net.cross_holdings.tolist(),
        "self_ownership": net.self_ownership.tolist(),
        "prices": net.prices.tolist(),
    }
    if fail is not None:
        payload["failure_spec"] = {
            "critical_values": fail.critical_values.tolist(),
            "failure_magnitudes": fail.failure_magnitudes.tolist(),
        }
    return payload


@click.group()
@click.version_option(version=__version__)
@click.option(
    "--endpoint",
    envvar="CRASHNET_ENDPOINT",
    default=None,
    help="Service base URL; omit to run the service in-process.",
)
@click.pass_context
def main(ctx, endpoint):
    """Financial crash prediction via binary optimization."""
    ctx.obj = ServiceClient(endpoint)


@main.command()
@click.option("-n", "n", type=int, required=True, help="Number of institutions.")
@click.option("-m", "m", type=int, required=True, help="Number of assets.")
@click.option("--price-min", type=float, default=10.0, show_default=True)
@click.option("--price-max", type=float, default=40.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.pass_obj
@_handle_errors
def generate(client, n, m, price_min, price_max, seed, output):
    """Generate a random valid network and write it as JSON."""
    doc = client.post(
        "/v1/network/generate",
        {"n": n, "m": m, "price_low": price_min, "price_high": price_max,
         "seed": seed},
    )
    doc.pop("failure_spec", None)
    doc = {"n": n, "m": m, **doc}
    with open(output, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    click.echo(f"wrote {output} (n={n}, m={m}, seed={seed})")


@main.command()
@click.option("--network", "network_file", type=click.Path(exists=True,
              dir_okay=False), required=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
@_handle_errors
def equilibrium(client, network_file, output):
    """Failure-free linear equilibrium of a network."""
    doc = client.post(
        "/v1/equilibrium", {"network": _network_payload(network_file)}
    )
    for i, (v, V) in enumerate(zip(doc["market_values"], doc["equity_values"])):
        click.echo(f"institution {i}: market value {v:.6f}  equity value {V:.6f}")
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")


@main.command()
@click.option("--network", "network_file", type=click.Path(exists=True,
              dir_okay=False), required=True)
@click.option("--bits", type=int, default=5, show_default=True,
              help="Bits per institution.")
@click.option("--alpha-min", type=int, default=0, show_default=True,
              help="Exponent of the least significant bit.")
@click.option("-r", "expansion_degree", type=int, default=None,
              help="Odd smoothing degree; omit for the failure-free objective.")
@click.option("--vc-fraction", type=float, default=0.8, show_default=True)
@click.option("--beta-fraction", type=float, default=0.3, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.pass_obj
@_handle_errors
def hubo(client, network_file, bits, alpha_min, expansion_degree, vc_fraction,
         beta_fraction, output):
    """Expand the (smoothed) equilibrium objective over encoded bits."""
    doc = client.post(
        "/v1/hubo",
        {
            "network": _network_payload(network_file),
            "alpha_min": alpha_min,
            "alpha_max": alpha_min + bits - 1,
            "r": expansion_degree,
            "vc_fraction": vc_fraction,
            "beta_fraction": beta_fraction,
        },
    )
    with open(output, "w", encoding="utf-8") as fh:
        fh.write(doc["polynomial"])
    click.echo(
        f"wrote {output}: {doc['num_variables']} variables, "
        f"degree {doc['degree']}, terms by order {doc['terms_by_order']}"
    )


@main.command()
@click.option("--hubo", "hubo_file", type=click.Path(exists=True,
              dir_okay=False), required=True)
@click.option("--scale", type=float, default=20.0, show_default=True,
              help="Gadget penalty scale factor.")
@click.option("--strategy", type=click.Choice(["k-ancilla",
              "single-ancilla-3body"]), default="k-ancilla", show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.pass_obj
@_handle_errors
def reduce(client, hubo_file, scale, strategy, output):
    """Quadratize a higher-order polynomial; writes a .qubo file."""
    with open(hubo_file, "r", encoding="utf-8") as fh:
        text = fh.read()
    doc = client.post(
        "/v1/reduce",
        {"polynomial": text, "scale_factor": scale, "strategy": strategy},
    )
    q = _qubo_from_wire(doc["qubo"])
    solver.write_qubo_file(q, output)
    click.echo(
        f"wrote {output}: {q.size} variables ({doc['logical']} logical, "
        f"{doc['ancillas']} ancilla), {doc['couplers']} couplers"
    )


def _qubo_from_wire(doc: dict):
    import numpy as np

    from .reduction import Qubo

    return Qubo(
        size=doc["size"],
        linear=np.asarray(doc["linear"], dtype=float),
        quadratic={(int(i), int(j)): float(v) for i, j, v in doc["quadratic"]},
        offset=doc.get("offset", 0.0),
        num_logical=doc.get("num_logical"),
        ancilla_registry={
            e["ancilla"]: (tuple(e["sources"]), e["kind"])
            for e in doc.get("ancilla_registry", [])
        },
    )


def _qubo_to_wire(q) -> dict:
    return {
        "size": q.size,
        "linear": q.linear.tolist(),
        "quadratic": [[i, j, v] for (i, j), v in sorted(q.quadratic.items())],
        "offset": q.offset,
        "num_logical": q.num_logical,
    }


@main.command()
@click.option("--qubo", "qubo_file", type=click.Path(exists=True,
              dir_okay=False), required=True)
@click.option("--solver", "solver_name", type=click.Choice(
    ["exhaustive", "sa", "tabu", "decompose", "remote"]), default="tabu",
    show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--reads", type=int, default=20, show_default=True)
@click.option("--subproblem-size", type=int, default=50, show_default=True)
@click.option("--sampler-endpoint", envvar="CRASHNET_SAMPLER_ENDPOINT",
              default=None, help="Remote sampler URL (solver=remote).")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
@_handle_errors
def solve(client, qubo_file, solver_name, seed, reads, subproblem_size,
          sampler_endpoint, output):
    """Minimize a .qubo file with a local solver or a remote sampler."""
    q = solver.read_qubo_file(qubo_file)
    if solver_name == "remote":
        if not sampler_endpoint:
            raise ParameterError(
                "solver=remote needs --sampler-endpoint or "
                "CRASHNET_SAMPLER_ENDPOINT"
            )
        result = solver.remote_sample(sampler_endpoint, q, reads=reads, seed=seed)
        doc = result.to_dict()
    else:
        doc = client.post(
            "/v1/solve",
            {
                "qubo": _qubo_to_wire(q),
                "solver": solver_name,
                "seed": seed,
                "reads": reads,
                "subproblem_size": subproblem_size,
            },
        )
    best = doc["samples"][doc["best"]]
    click.echo(
        f"best energy {best['energy']:.10g} "
        f"({len(doc['samples'])} distinct samples)"
    )
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")


@main.command()
@click.option("-n", "n", type=int, required=True)
@click.option("--bits", type=int, required=True)
@click.option("-r", "expansion_degree", type=int, required=True)
@click.pass_obj
@_handle_errors
def estimate(client, n, bits, expansion_degree):
    """Worst-case problem-size bounds before committing to a run."""
    doc = client.post(
        "/v1/estimate", {"n": n, "bits": bits, "r": expansion_degree}
    )
    click.echo(f"polynomial terms (bound): {doc['max_terms']}")
    click.echo(f"ancillas (bound):         {doc['max_ancillas_bound']}")
    click.echo(f"QUBO side (bound):        {doc['qubo_side_bound']}")
    click.echo(f"dense-matrix memory:      {doc['memory_bytes']} bytes")


@main.command()
@click.option("--network", "network_file", type=click.Path(exists=True,
              dir_okay=False), default=None)
@click.option("-n", "n", type=int, default=None, help="Generate: institutions.")
@click.option("-m", "m", type=int, default=None, help="Generate: assets.")
@click.option("--net-seed", type=int, default=0, show_default=True)
@click.option("--price-min", type=float, default=10.0, show_default=True)
@click.option("--price-max", type=float, default=40.0, show_default=True)
@click.option("--bits", type=int, default=5, show_default=True)
@click.option("-r", "expansion_degree", type=int, default=3, show_default=True)
@click.option("--vc-fraction", type=float, default=0.8, show_default=True)
@click.option("--beta-fraction", type=float, default=0.3, show_default=True)
@click.option("--zero-assets", default=None,
              help="Comma-separated asset indices to zero out.")
@click.option("--zero-count", type=int, default=None,
              help="Zero this many randomly chosen assets.")
@click.option("--perturb-seed", type=int, default=0, show_default=True)
@click.option("--reads", type=int, default=20, show_default=True)
@click.option("--subproblem-size", type=int, default=50, show_default=True)
@click.option("--solver-seed", type=int, default=0, show_default=True)
@click.option("--normalize", is_flag=True,
              help="Strip timestamps/wall-times for byte-identical reruns.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".",
              show_default=True)
@click.pass_obj
@_handle_errors
def pipeline(client, network_file, n, m, net_seed, price_min, price_max, bits,
             expansion_degree, vc_fraction, beta_fraction, zero_assets,
             zero_count, perturb_seed, reads, subproblem_size, solver_seed,
             normalize, out_dir):
    """Full run: network -> objective -> QUBO -> solve -> crash report.

    Writes report.json and per_institution.csv into --out-dir.
    """
    problems = []
    if network_file is None and (n is None or m is None):
        problems.append("give --network, or both -n and -m for generation")
    if network_file is not None and (n is not None or m is not None):
        problems.append("--network conflicts with -n/-m")
    zero_list = None
    if zero_assets is not None:
        try:
            zero_list = [int(tok) for tok in zero_assets.split(",") if tok.strip()]
        except ValueError:
            problems.append(f"--zero-assets: cannot parse '{zero_assets}'")
    if zero_list is not None and zero_count is not None:
        problems.append("--zero-assets conflicts with --zero-count")
    if problems:
        raise ParameterError("; ".join(problems))

    payload = {
        "vc_fraction": vc_fraction,
        "beta_fraction": beta_fraction,
        "bits": bits,
        "expansion_degree": expansion_degree,
        "zero_assets": zero_list,
        "random_zero_count": zero_count,
        "perturbation_seed": perturb_seed,
        "reads": reads,
        "subproblem_size": subproblem_size,
        "solver_seed": solver_seed,
        "normalize": normalize,
    }
    if network_file is not None:
        payload["network"] = _network_payload(network_file)
    else:
        payload["generate"] = {"n": n, "m": m, "price_low": price_min,
                               "price_high": price_max, "seed": net_seed}
    report = client.post("/v1/pipeline", payload)

    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")
    rows = report["per_institution"]
    csv_path = os.path.join(out_dir, "per_institution.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    crash = report["crash_report"]
    click.echo(f"wrote {report_path} and {csv_path}")
    click.echo(
        f"QUBO: {report['reduction_stats']['size']} variables "
        f"({report['reduction_stats']['logical']} logical), "
        f"{report['reduction_stats']['couplers']} couplers"
    )
    click.echo(
        f"decoded market values: "
        f"{[round(v, 4) for v in report['decoded']['market_values_best']]}"
    )
    if report["oracle"] is not None:
        click.echo(
            f"oracle gap: {report['oracle']['objective_gap']:.6g}"
            + ("  (multiple equilibria)" if
               report["oracle"]["multiple_equilibria"] else "")
        )
    click.echo(
        f"failed institutions: {crash['failed'] or 'none'}"
        + ("  [cascade]" if crash["cascade"] else "")
    )


if __name__ == "__main__":
    main()
