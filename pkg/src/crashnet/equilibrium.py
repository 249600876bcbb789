"""Classical reference computations on financial networks.

Linear equilibrium, the nonlinear (panic) objective, an exhaustive
grid-search oracle, fixed-point cascade iteration and crash reporting.
These are the ground truths that the binary-optimization pipeline is
checked against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NumericError, ParameterError, ResourceError
from .hubo import ThetaPolynomial, smoothed_theta_extended, theta_coefficients
from .network import COND_LIMIT, FailureSpec, FinancialNetwork

DEFAULT_EVAL_CAP = 2**25


@dataclass(frozen=True)
class MarketState:
    """Equilibrium values: market_values = self_ownership * equity_values."""

    market_values: np.ndarray
    equity_values: np.ndarray


@dataclass(frozen=True)
class CrashReport:
    """Summary of a perturbation: who failed and how far values dropped."""

    failed: frozenset
    drops: np.ndarray
    relative_drops: np.ndarray
    cascade: bool

    def to_dict(self) -> dict:
        return {
            "failed": sorted(self.failed),
            "drops": self.drops.tolist(),
            "relative_drops": self.relative_drops.tolist(),
            "cascade": self.cascade,
        }


def value_matrix(net: FinancialNetwork) -> np.ndarray:
    """M = C-tilde (I - C)^-1, the map from net income to market values."""
    n = net.n_institutions
    eye_minus_c = np.eye(n) - net.cross_holdings
    cond = np.linalg.cond(eye_minus_c)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericError(f"(I - C) numerically singular (condition {cond:.3g})")
    return np.diag(net.self_ownership) @ np.linalg.inv(eye_minus_c)


def linear_equilibrium(net: FinancialNetwork) -> MarketState:
    """Failure-free equilibrium: V = (I-C)^-1 D p, v = C-tilde V."""
    n = net.n_institutions
    eye_minus_c = np.eye(n) - net.cross_holdings
    cond = np.linalg.cond(eye_minus_c)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericError(f"(I - C) numerically singular (condition {cond:.3g})")
    income = net.asset_income()
    equity = np.linalg.solve(eye_minus_c, income)
    residual = np.max(np.abs(eye_minus_c @ equity - income))
    scale = max(np.max(np.abs(income)), 1e-300)
    if residual > 1e-8 * scale:
        raise NumericError(
            f"linear solve residual {residual:.3g} exceeds tolerance "
            f"(condition {cond:.3g})"
        )
    return MarketState(net.self_ownership * equity, equity)


def failure_vector(
    net: FinancialNetwork, fail: FailureSpec, v: Sequence[float]
) -> np.ndarray:
    """b_i = beta_i when v_i < v_c_i (strictly), else 0.

    Boundary convention: sitting exactly at the critical value is not a
    failure (Theta(0) = 1).
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (net.n_institutions,) or fail.n != net.n_institutions:
        raise ParameterError("value/failure-spec lengths inconsistent with network")
    return np.where(v < fail.critical_values, fail.failure_magnitudes, 0.0)


def objective(
    net: FinancialNetwork, fail: FailureSpec, v: Sequence[float]
) -> float:
    """Squared equilibrium residual with the exact step nonlinearity."""
    v = np.asarray(v, dtype=float)
    b = failure_vector(net, fail, v)
    m = value_matrix(net)
    residual = v - m @ (net.asset_income() - b)
    return float(residual @ residual)


def smoothed_objective(
    net: FinancialNetwork,
    fail: FailureSpec,
    v: Sequence[float],
    r: int,
    v_max: float,
) -> float:
    """Squared residual with the degree-r Legendre-smoothed step.

    This is the continuous function the HUBO encodes; the step argument
    (v_i - v_c_i)/v_max is evaluated by polynomial continuation when it
    leaves [-1, 1].
    """
    return float(
        _smoothed_objective_batch(
            net, fail, np.asarray(v, dtype=float)[None, :], theta_coefficients(r), v_max
        )[0]
    )


def _smoothed_objective_batch(
    net: FinancialNetwork,
    fail: FailureSpec,
    values: np.ndarray,
    tp: ThetaPolynomial,
    v_max: float,
) -> np.ndarray:
    m = value_matrix(net)
    income_term = m @ net.asset_income()
    x = (values - fail.critical_values) / v_max
    b = fail.failure_magnitudes * (1.0 - smoothed_theta_extended(tp, x))
    residual = values - (income_term - b @ m.T)
    return np.einsum("ij,ij->i", residual, residual)


def _exact_objective_batch(
    net: FinancialNetwork, fail: FailureSpec, values: np.ndarray
) -> np.ndarray:
    m = value_matrix(net)
    income_term = m @ net.asset_income()
    b = np.where(values < fail.critical_values, fail.failure_magnitudes, 0.0)
    residual = values - (income_term - b @ m.T)
    return np.einsum("ij,ij->i", residual, residual)


@dataclass(frozen=True)
class ExhaustiveResult:
    """Global minimizers of the grid scan plus scan metadata."""

    minimizers: tuple  # ((v tuple, objective), ...) sorted ascending
    n_evaluations: int
    best_objective: float

    @property
    def best_values(self) -> np.ndarray:
        return np.array(self.minimizers[0][0], dtype=float)


def exhaustive_equilibrium(
    net: FinancialNetwork,
    fail: FailureSpec,
    bits_per_institution: int,
    use_smoothed: bool = False,
    r: Optional[int] = None,
    eval_cap: int = DEFAULT_EVAL_CAP,
    tie_tol: float = 1e-9,
) -> ExhaustiveResult:
    """Scan every integer grid point v in {0..2^bits-1}^n.

    Returns all global minimizers (objective ties within ``tie_tol``),
    sorted by objective then lexicographically.  This is the oracle the
    solver pipeline is accepted against.
    """
    n = net.n_institutions
    levels = 2**bits_per_institution
    total = levels**n
    if total > eval_cap:
        raise ResourceError(
            f"exhaustive scan needs {total} evaluations, cap is {eval_cap}"
        )
    if use_smoothed:
        if r is None:
            raise ParameterError("smoothed scan requires the expansion degree r")
        tp = theta_coefficients(r)
        v_max = float(levels - 1)

    grid = np.arange(levels, dtype=float)
    chunk = max(1, min(total, 1 << 20) // levels) * levels

    best = np.inf
    candidates: list[tuple[tuple, float]] = []
    # enumerate configurations in mixed-radix order, chunked
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        values = np.empty((idx.size, n))
        rem = idx
        for i in range(n - 1, -1, -1):
            values[:, i] = grid[rem % levels]
            rem = rem // levels
        if use_smoothed:
            objs = _smoothed_objective_batch(net, fail, values, tp, v_max)
        else:
            objs = _exact_objective_batch(net, fail, values)
        chunk_best = float(objs.min())
        best = min(best, chunk_best)
        keep = objs <= best + tie_tol
        for row, obj in zip(values[keep], objs[keep]):
            candidates.append((tuple(row.tolist()), float(obj)))
        candidates = [c for c in candidates if c[1] <= best + tie_tol]

    minimizers = tuple(
        sorted(
            ((v, o) for v, o in candidates if o <= best + tie_tol),
            key=lambda item: (item[1], item[0]),
        )
    )
    return ExhaustiveResult(minimizers, total, best)


def cascade_iteration(
    net: FinancialNetwork,
    fail: FailureSpec,
    v0: Sequence[float],
    max_iter: int = 100,
) -> tuple[np.ndarray, bool, int]:
    """Iterate v <- M (D p - b(v)) until an exact fixed point or max_iter."""
    if max_iter < 1:
        raise ParameterError("max_iter must be >= 1")
    m = value_matrix(net)
    income = net.asset_income()
    v = np.asarray(v0, dtype=float)
    for step in range(1, max_iter + 1):
        v_next = m @ (income - failure_vector(net, fail, v))
        if np.array_equal(v_next, v):
            return v, True, step
        v = v_next
    return v, False, max_iter


def crash_report(
    v_before: Sequence[float],
    v_after: Sequence[float],
    fail: FailureSpec,
    v_linear: Optional[Sequence[float]] = None,
) -> CrashReport:
    """Compare pre/post-perturbation values.

    ``v_linear``, when given, is the failure-free equilibrium under the
    perturbed prices; an institution that fails despite a linear value at
    or above its threshold marks the crash as a cascade (it was dragged
    down by others, not by the price shock alone).
    """
    v_before = np.asarray(v_before, dtype=float)
    v_after = np.asarray(v_after, dtype=float)
    if v_before.shape != v_after.shape or v_before.shape != (fail.n,):
        raise ParameterError(
            "crash report vectors must match the failure-spec length"
        )
    failed = frozenset(int(i) for i in np.nonzero(v_after < fail.critical_values)[0])
    drops = v_after - v_before
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(v_before != 0, drops / v_before, 0.0)
    reference = np.asarray(v_linear, dtype=float) if v_linear is not None else v_before
    cascade = any(reference[i] >= fail.critical_values[i] for i in failed)
    return CrashReport(failed, drops, rel, cascade)


def default_failure_spec(
    net: FinancialNetwork,
    vc_fraction: float = 0.8,
    beta_fraction: float = 0.3,
) -> FailureSpec:
    """Thresholds at 80% of pre-perturbation market values, drops at 30%
    of pre-perturbation equity values (overridable fractions)."""
    state = linear_equilibrium(net)
    return FailureSpec(
        vc_fraction * state.market_values, beta_fraction * state.equity_values
    )
