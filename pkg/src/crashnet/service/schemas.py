"""Pydantic wire models for the crashnet service.

These mirror the core dataclasses closely; `to_core` / `from_core`
helpers do the translation so the endpoints stay thin.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from .. import network as _network
from ..reduction import Qubo


class FailureSpecModel(BaseModel):
    critical_values: list[float]
    failure_magnitudes: list[float]

    def to_core(self) -> _network.FailureSpec:
        return _network.FailureSpec(
            np.asarray(self.critical_values, dtype=float),
            np.asarray(self.failure_magnitudes, dtype=float),
        )

    @classmethod
    def from_core(cls, fail: _network.FailureSpec) -> "FailureSpecModel":
        return cls(
            critical_values=fail.critical_values.tolist(),
            failure_magnitudes=fail.failure_magnitudes.tolist(),
        )


class NetworkModel(BaseModel):
    ownership: list[list[float]]
    cross_holdings: list[list[float]]
    self_ownership: list[float]
    prices: list[float]
    failure_spec: Optional[FailureSpecModel] = None

    def to_core(self) -> _network.FinancialNetwork:
        return _network.FinancialNetwork(
            np.asarray(self.ownership, dtype=float),
            np.asarray(self.cross_holdings, dtype=float),
            np.asarray(self.self_ownership, dtype=float),
            np.asarray(self.prices, dtype=float),
        )

    @classmethod
    def from_core(
        cls,
        net: _network.FinancialNetwork,
        fail: Optional[_network.FailureSpec] = None,
    ) -> "NetworkModel":
        return cls(
            ownership=net.ownership.tolist(),
            cross_holdings=net.cross_holdings.tolist(),
            self_ownership=net.self_ownership.tolist(),
            prices=net.prices.tolist(),
            failure_spec=FailureSpecModel.from_core(fail) if fail else None,
        )


class GenerateRequest(BaseModel):
    n: int
    m: int
    price_low: float = 10.0
    price_high: float = 40.0
    seed: int = 0


class ValidateResponse(BaseModel):
    valid: bool
    violations: list[str]


class EquilibriumRequest(BaseModel):
    network: NetworkModel


class EquilibriumResponse(BaseModel):
    market_values: list[float]
    equity_values: list[float]


class HuboRequest(BaseModel):
    network: NetworkModel
    alpha_min: int = 0
    alpha_max: int = 4
    # expansion degree of the smoothed step; omit for the failure-free
    # (purely quadratic) objective
    r: Optional[int] = None
    vc_fraction: float = 0.8
    beta_fraction: float = 0.3


class HuboResponse(BaseModel):
    polynomial: str
    num_variables: int
    degree: int
    terms_by_order: dict[str, int]


class ReduceRequest(BaseModel):
    polynomial: str
    scale_factor: float = 20.0
    strategy: str = "k-ancilla"


class AncillaEntry(BaseModel):
    ancilla: int
    sources: list[int]
    kind: str


class QuboModel(BaseModel):
    size: int
    linear: list[float]
    quadratic: list[list[float]] = Field(
        description="[i, j, value] triplets with i < j"
    )
    offset: float = 0.0
    num_logical: Optional[int] = None
    ancilla_registry: list[AncillaEntry] = Field(default_factory=list)

    def to_core(self) -> Qubo:
        return Qubo(
            size=self.size,
            linear=np.asarray(self.linear, dtype=float),
            quadratic={(int(i), int(j)): float(v) for i, j, v in self.quadratic},
            offset=self.offset,
            num_logical=self.num_logical,
            ancilla_registry={
                e.ancilla: (tuple(e.sources), e.kind) for e in self.ancilla_registry
            },
        )

    @classmethod
    def from_core(cls, q: Qubo) -> "QuboModel":
        return cls(
            size=q.size,
            linear=q.linear.tolist(),
            quadratic=[[i, j, v] for (i, j), v in sorted(q.quadratic.items())],
            offset=q.offset,
            num_logical=q.num_logical,
            ancilla_registry=[
                AncillaEntry(ancilla=a, sources=list(src), kind=kind)
                for a, (src, kind) in sorted(q.ancilla_registry.items())
            ],
        )


class ReduceResponse(BaseModel):
    qubo: QuboModel
    logical: int
    ancillas: int
    couplers: int


class SolveRequest(BaseModel):
    qubo: QuboModel
    solver: str = "tabu"  # exhaustive | sa | tabu | decompose
    seed: int = 0
    reads: int = 20
    sweeps: int = 1000
    subproblem_size: int = 50
    subsolver: str = "tabu"
    max_iterations: int = 100


class SampleModel(BaseModel):
    assignment: list[int]
    energy: float
    num_occurrences: int
    source: str


class SampleSetModel(BaseModel):
    samples: list[SampleModel]
    best: int
    metadata: dict


class EstimateRequest(BaseModel):
    n: int
    bits: int
    r: int


class SampleRequest(BaseModel):
    """Wire protocol of the plain sampler endpoint."""

    size: int
    linear: list[float]
    quadratic: list[list[float]]
    offset: float = 0.0
    reads: int = 20
    seed: Optional[int] = None


class SampleResponse(BaseModel):
    samples: list[list[int]]
    energies: list[float]
    occurrences: list[int]


class PipelineRequest(BaseModel):
    network: Optional[NetworkModel] = None
    generate: Optional[GenerateRequest] = None
    vc_fraction: float = 0.8
    beta_fraction: float = 0.3
    alpha_min: int = 0
    bits: int = 5
    expansion_degree: int = 3
    zero_assets: Optional[list[int]] = None
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


class ErrorBody(BaseModel):
    category: str
    message: str
