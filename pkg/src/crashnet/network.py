"""Cross-holding financial networks: construction, random generation,
validation, price perturbation and JSON serialization.

A network couples n institutions and m assets.  Institution i owns a
fraction ``ownership[i, k]`` of asset k and a fraction
``cross_holdings[i, j]`` of institution j; ``self_ownership[j]`` is the
fraction of institution j it keeps for itself.  Every ownership column
sums to one, and for every institution the cross-holding column plus its
self-ownership sums to one as well.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import NetworkInvariantError, ParameterError, ParseError

COLUMN_TOL = 1e-9

# (I - C) is considered numerically singular above this condition estimate.
COND_LIMIT = 1e12


def _as_readonly(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FinancialNetwork:
    """Immutable cross-holding network.

    ownership       (n, m) matrix D, D[i, k] = fraction of asset k owned by i
    cross_holdings  (n, n) matrix C, zero diagonal
    self_ownership  (n,)   diagonal of C-tilde, each entry > 0.5
    prices          (m,)   nonnegative asset prices p
    """

    ownership: np.ndarray
    cross_holdings: np.ndarray
    self_ownership: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ownership", _as_readonly(self.ownership))
        object.__setattr__(self, "cross_holdings", _as_readonly(self.cross_holdings))
        object.__setattr__(self, "self_ownership", _as_readonly(self.self_ownership))
        object.__setattr__(self, "prices", _as_readonly(self.prices))
        if self.ownership.ndim != 2:
            raise ParameterError("ownership must be a 2-D matrix")
        n, m = self.ownership.shape
        if self.cross_holdings.shape != (n, n):
            raise ParameterError(
                f"cross_holdings must be {n}x{n}, got {self.cross_holdings.shape}"
            )
        if self.self_ownership.shape != (n,):
            raise ParameterError("self_ownership length must equal n_institutions")
        if self.prices.shape != (m,):
            raise ParameterError("prices length must equal n_assets")

    @property
    def n_institutions(self) -> int:
        return self.ownership.shape[0]

    @property
    def n_assets(self) -> int:
        return self.ownership.shape[1]

    def asset_income(self) -> np.ndarray:
        """D @ p, the direct asset income of each institution."""
        return self.ownership @ self.prices


@dataclass(frozen=True)
class FailureSpec:
    """Panic nonlinearity: institution i fails when its market value drops
    below ``critical_values[i]``, losing ``failure_magnitudes[i]`` of equity."""

    critical_values: np.ndarray
    failure_magnitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "critical_values", _as_readonly(self.critical_values))
        object.__setattr__(
            self, "failure_magnitudes", _as_readonly(self.failure_magnitudes)
        )
        if self.critical_values.shape != self.failure_magnitudes.shape:
            raise ParameterError("critical_values and failure_magnitudes lengths differ")
        if not (
            np.all(np.isfinite(self.critical_values))
            and np.all(np.isfinite(self.failure_magnitudes))
        ):
            raise ParameterError("failure spec entries must be finite")
        if np.any(self.critical_values < 0) or np.any(self.failure_magnitudes < 0):
            raise ParameterError("failure spec entries must be nonnegative")

    @property
    def n(self) -> int:
        return self.critical_values.shape[0]


def generate_random_network(
    n: int, m: int, price_low: float, price_high: float, seed: int
) -> FinancialNetwork:
    """Generate a random network with Dirichlet(1) ownership columns.

    Deterministic in ``seed`` (PCG64 generator); the draw order is fixed:
    ownership, self-ownership, cross-holdings, prices.  Each ownership
    column is n unit-rate exponentials normalized to sum 1; self-ownership
    is uniform in (0.5, 1); the remaining column mass is spread over the
    off-diagonal cross-holdings with a rescaled Dirichlet draw; prices are
    uniform in [price_low, price_high].
    """
    if n < 1 or m < 1:
        raise ParameterError("n and m must be >= 1")
    if not (0 <= price_low <= price_high):
        raise ParameterError("require 0 <= price_low <= price_high")

    rng = np.random.default_rng(np.random.PCG64(seed))

    e = rng.standard_exponential((n, m))
    ownership = e / e.sum(axis=0)

    if n == 1:
        # Single institution: the column constraint forces full self-ownership.
        self_own = np.array([1.0])
        cross = np.zeros((1, 1))
    else:
        self_own = rng.uniform(0.5, 1.0, n)
        while np.any(self_own <= 0.5):  # uniform() can return the left endpoint
            bad = self_own <= 0.5
            self_own[bad] = rng.uniform(0.5, 1.0, int(bad.sum()))
        cross = np.zeros((n, n))
        for j in range(n):
            draws = rng.standard_exponential(n - 1)
            alloc = draws / draws.sum() * (1.0 - self_own[j])
            rows = [i for i in range(n) if i != j]
            cross[rows, j] = alloc

    prices = rng.uniform(price_low, price_high, m)

    net = FinancialNetwork(ownership, cross, self_own, prices)
    # Column sums of C are 1 - self_ownership < 0.5, so this cannot trip.
    assert spectral_radius(net.cross_holdings) < 1.0
    return net


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


def validate(net: FinancialNetwork) -> list[str]:
    """Check all structural invariants; returns [] when the network is valid.

    Violations are data, not errors: each entry names the failed invariant
    and the offending (0-based) index.
    """
    issues: list[str] = []
    n, m = net.n_institutions, net.n_assets

    for name, arr in (
        ("ownership", net.ownership),
        ("cross_holdings", net.cross_holdings),
        ("self_ownership", net.self_ownership),
        ("prices", net.prices),
    ):
        if not np.all(np.isfinite(arr)):
            issues.append(f"{name}: non-finite entry at index "
                          f"{np.argwhere(~np.isfinite(arr))[0].tolist()}")
        elif np.any(arr < 0):
            issues.append(f"{name}: negative entry at index "
                          f"{np.argwhere(arr < 0)[0].tolist()}")

    col_sums = net.ownership.sum(axis=0)
    for j in range(m):
        if abs(col_sums[j] - 1.0) > COLUMN_TOL:
            issues.append(
                f"ownership: column {j} sums to {col_sums[j]:.12g}, expected 1"
            )

    diag = np.diag(net.cross_holdings)
    for j in range(n):
        if diag[j] != 0.0:
            issues.append(f"cross_holdings: diagonal entry {j} is {diag[j]:.12g}, expected 0")

    for j in range(n):
        if not net.self_ownership[j] > 0.5:
            issues.append(
                f"self_ownership: entry {j} is {net.self_ownership[j]:.12g}, "
                "must exceed 0.5"
            )

    cross_sums = net.cross_holdings.sum(axis=0) + net.self_ownership
    for j in range(n):
        if abs(cross_sums[j] - 1.0) > COLUMN_TOL:
            issues.append(
                f"cross_holdings: column {j} plus self-ownership sums to "
                f"{cross_sums[j]:.12g}, expected 1"
            )

    eye_minus_c = np.eye(n) - net.cross_holdings
    cond = np.linalg.cond(eye_minus_c)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        issues.append(f"(I - C) is numerically singular (condition {cond:.3g})")

    return issues


def perturb_prices(
    net: FinancialNetwork, zeroed_assets: Iterable[int]
) -> FinancialNetwork:
    """Copy of the network with the listed asset prices set to zero.

    Asset indices are 0-based.  Idempotent: re-applying the same set is a
    no-op.
    """
    zeroed = sorted(set(int(k) for k in zeroed_assets))
    for k in zeroed:
        if k < 0 or k >= net.n_assets:
            raise ParameterError(
                f"asset index {k} out of range for {net.n_assets} assets"
            )
    prices = np.array(net.prices)
    prices[zeroed] = 0.0
    return FinancialNetwork(
        net.ownership, net.cross_holdings, net.self_ownership, prices
    )


def network_to_dict(
    net: FinancialNetwork, fail: Optional[FailureSpec] = None
) -> dict:
    doc = {
        "n": net.n_institutions,
        "m": net.n_assets,
        "ownership": net.ownership.tolist(),
        "cross_holdings": net.cross_holdings.tolist(),
        "self_ownership": net.self_ownership.tolist(),
        "prices": net.prices.tolist(),
    }
    if fail is not None:
        doc["failure_spec"] = {
            "critical_values": fail.critical_values.tolist(),
            "failure_magnitudes": fail.failure_magnitudes.tolist(),
        }
    return doc


def network_from_dict(doc: dict) -> tuple[FinancialNetwork, Optional[FailureSpec]]:
    """Build a validated network (and optional failure spec) from a JSON doc."""
    for key in ("n", "m", "ownership", "cross_holdings", "self_ownership", "prices"):
        if key not in doc:
            raise ParseError(f"network document: missing field '{key}'")
    n, m = int(doc["n"]), int(doc["m"])

    def matrix(name, rows, cols):
        data = doc[name]
        if len(data) != rows:
            raise ParseError(f"{name}: expected {rows} rows, found {len(data)}")
        for i, row in enumerate(data):
            if not isinstance(row, list) or len(row) != cols:
                raise ParseError(f"{name}: row {i} must have {cols} entries")
        return np.array(data, dtype=float)

    def vector(name, length, source=doc):
        data = source[name]
        if len(data) != length:
            raise ParseError(f"{name}: expected {length} entries, found {len(data)}")
        return np.array(data, dtype=float)

    net = FinancialNetwork(
        matrix("ownership", n, m),
        matrix("cross_holdings", n, n),
        vector("self_ownership", n),
        vector("prices", m),
    )
    issues = validate(net)
    if issues:
        raise NetworkInvariantError(
            "network document violates invariants: " + "; ".join(issues)
        )

    fail = None
    if "failure_spec" in doc and doc["failure_spec"] is not None:
        fs = doc["failure_spec"]
        for key in ("critical_values", "failure_magnitudes"):
            if key not in fs:
                raise ParseError(f"failure_spec: missing field '{key}'")
        fail = FailureSpec(
            vector("critical_values", n, fs), vector("failure_magnitudes", n, fs)
        )
    return net, fail


def save_network(
    net: FinancialNetwork, destination, fail: Optional[FailureSpec] = None
) -> None:
    """Write the network as a UTF-8 JSON document (full double precision)."""
    with open(destination, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net, fail), fh, indent=1)
        fh.write("\n")


def load_network(source) -> FinancialNetwork:
    net, _ = load_network_with_failure(source)
    return net


def load_network_with_failure(
    source,
) -> tuple[FinancialNetwork, Optional[FailureSpec]]:
    with open(source, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{source}: invalid JSON at line {exc.lineno}") from exc
    return network_from_dict(doc)
