"""QUBO solvers and interchange.

Exhaustive enumeration (the oracle), single-flip simulated annealing,
steepest-descent tabu search, and a qbsolv-style decomposition meta-solver
that clamps most variables and optimizes impact-ranked subproblems.  Also
the ``.qubo`` text format and an HTTP client for a remote sampler.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import sparse

from .errors import ParameterError, ParseError, RemoteError, ResourceError
from .reduction import Qubo

EXHAUSTIVE_MAX_SIZE = 25

ENERGY_TOL = 1e-9


@dataclass(frozen=True)
class Sample:
    assignment: tuple
    energy: float
    num_occurrences: int = 1
    source: str = "local"


@dataclass
class SampleSet:
    """Solver output: samples sorted by (energy, assignment), best first."""

    samples: list
    best: int
    metadata: dict = field(default_factory=dict)

    @property
    def best_sample(self) -> Sample:
        return self.samples[self.best]

    def to_dict(self) -> dict:
        return {
            "samples": [
                {
                    "assignment": list(s.assignment),
                    "energy": s.energy,
                    "num_occurrences": s.num_occurrences,
                    "source": s.source,
                }
                for s in self.samples
            ],
            "best": self.best,
            "metadata": self.metadata,
        }


def make_sample_set(
    q: Qubo,
    assignments: Sequence[Sequence[int]],
    sources: Sequence[str],
    metadata: dict,
    occurrences: Optional[Sequence[int]] = None,
) -> SampleSet:
    """Aggregate assignments into a SampleSet with recomputed energies."""
    if occurrences is None:
        occurrences = [1] * len(assignments)
    merged: dict[tuple, list] = {}
    for x, src, occ in zip(assignments, sources, occurrences):
        key = tuple(int(b) for b in x)
        if key in merged:
            merged[key][1] += occ
        else:
            merged[key] = [q.energy(key), occ, src]
    samples = sorted(
        (Sample(key, e, occ, src) for key, (e, occ, src) in merged.items()),
        key=lambda s: (s.energy, s.assignment),
    )
    return SampleSet(samples=samples, best=0, metadata=metadata)


# ---------------------------------------------------------------------------
# Shared machinery

def _adjacency(q: Qubo) -> sparse.csr_matrix:
    """Symmetric coupler matrix (zero diagonal)."""
    if not q.quadratic:
        return sparse.csr_matrix((q.size, q.size))
    rows, cols, vals = [], [], []
    for (i, j), v in q.quadratic.items():
        rows += [i, j]
        cols += [j, i]
        vals += [v, v]
    return sparse.csr_matrix((vals, (rows, cols)), shape=(q.size, q.size))


class _FlipState:
    """Incremental single-flip bookkeeping: field f = linear + A x."""

    def __init__(self, q: Qubo, x: np.ndarray):
        self.adj = _adjacency(q)
        self.linear = q.linear
        self.x = x.astype(float)
        self.field = self.linear + self.adj.dot(self.x)
        self.energy = q.energy(self.x)

    def gains(self) -> np.ndarray:
        return (1.0 - 2.0 * self.x) * self.field

    def gain(self, i: int) -> float:
        return (1.0 - 2.0 * self.x[i]) * self.field[i]

    def flip(self, i: int) -> None:
        delta = self.gain(i)
        dx = 1.0 - 2.0 * self.x[i]
        self.x[i] += dx
        start, end = self.adj.indptr[i], self.adj.indptr[i + 1]
        cols = self.adj.indices[start:end]
        self.field[cols] += dx * self.adj.data[start:end]
        self.energy += delta

    def greedy_descent(self) -> None:
        while True:
            gains = self.gains()
            i = int(np.argmin(gains))
            if gains[i] >= -ENERGY_TOL:
                return
            self.flip(i)


# ---------------------------------------------------------------------------
# Solvers

def exhaustive_solve(q: Qubo, tie_tol: float = ENERGY_TOL) -> SampleSet:
    """Evaluate every assignment; returns all global minimizers."""
    if q.size > EXHAUSTIVE_MAX_SIZE:
        raise ResourceError(
            f"exhaustive solve limited to {EXHAUSTIVE_MAX_SIZE} variables, "
            f"got {q.size}"
        )
    t0 = time.perf_counter()
    total = 2**q.size
    upper = np.diag(q.linear.copy())
    for (i, j), v in q.quadratic.items():
        upper[i, j] = v
    best = np.inf
    winners: list[tuple] = []
    e_min, e_max = np.inf, -np.inf
    chunk = 1 << 18
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))[:, None]
        bits = ((codes >> np.arange(q.size - 1, -1, -1)) & 1).astype(float)
        energies = np.einsum("ij,ij->i", bits @ upper, bits) + q.offset
        e_min = min(e_min, float(energies.min()))
        e_max = max(e_max, float(energies.max()))
        best = min(best, float(energies.min()))
        keep = energies <= best + tie_tol
        winners += [tuple(int(b) for b in row) for row in bits[keep]]
        winners = [w for w in winners if q.energy(w) <= best + tie_tol]
    metadata = {
        "solver": "exhaustive",
        "n_evaluated": total,
        "energy_min": e_min,
        "energy_max": e_max,
        "wall_time": time.perf_counter() - t0,
    }
    return make_sample_set(q, winners, ["exhaustive"] * len(winners), metadata)


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric temperature schedule with multi-read restarts."""

    initial_temperature: float
    final_temperature: float
    sweeps: int = 1000
    reads: int = 20

    def __post_init__(self):
        if not (self.initial_temperature >= self.final_temperature > 0):
            raise ParameterError("require initial >= final > 0 temperature")
        if self.sweeps < 1 or self.reads < 1:
            raise ParameterError("sweeps and reads must be >= 1")

    def temperatures(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.final_temperature])
        ratio = self.final_temperature / self.initial_temperature
        return self.initial_temperature * ratio ** (
            np.arange(self.sweeps) / (self.sweeps - 1)
        )


def default_schedule(q: Qubo, sweeps: int = 1000, reads: int = 20) -> AnnealSchedule:
    """Hot start at the largest coefficient magnitude, cool to 1e-3 of it."""
    scale = max(
        float(np.max(np.abs(q.linear))) if q.size else 0.0,
        max((abs(v) for v in q.quadratic.values()), default=0.0),
        1e-9,
    )
    return AnnealSchedule(scale, 1e-3 * scale, sweeps=sweeps, reads=reads)


def simulated_annealing(
    q: Qubo, schedule: Optional[AnnealSchedule] = None, seed: int = 0
) -> SampleSet:
    """Independent single-flip Metropolis restarts; deterministic per seed."""
    if schedule is None:
        schedule = default_schedule(q)
    t0 = time.perf_counter()
    temps = schedule.temperatures()
    rng_streams = np.random.SeedSequence(seed).spawn(schedule.reads)
    finals = []
    for read, stream in enumerate(rng_streams):
        rng = np.random.default_rng(stream)
        state = _FlipState(q, rng.integers(0, 2, q.size).astype(float))
        best_x = state.x.copy()
        best_e = state.energy
        for temp in temps:
            order = rng.permutation(q.size)
            accept_draws = rng.random(q.size)
            for i, draw in zip(order, accept_draws):
                delta = state.gain(i)
                if delta < 0 or draw < math.exp(
                    -min(delta / temp, 700.0)
                ):
                    state.flip(i)
                    if state.energy < best_e - ENERGY_TOL:
                        best_e = state.energy
                        best_x = state.x.copy()
        finals.append(best_x)
    metadata = {
        "solver": "simulated_annealing",
        "seed": seed,
        "reads": schedule.reads,
        "sweeps": schedule.sweeps,
        "wall_time": time.perf_counter() - t0,
    }
    return make_sample_set(
        q, finals, [f"sa/read{r}" for r in range(len(finals))], metadata
    )


def tabu_solve(
    q: Qubo,
    tenure: int = 10,
    max_no_improve: int = 100,
    seed: int = 0,
    initial: Optional[Sequence[int]] = None,
    max_iterations: int = 1_000_000,
) -> SampleSet:
    """Steepest-descent single-flip tabu search with aspiration.

    Each iteration flips the best non-tabu variable (a tabu flip is
    allowed if it beats the incumbent); stops once ``max_no_improve``
    consecutive iterations fail to improve the incumbent.
    """
    if tenure < 1:
        raise ParameterError("tabu tenure must be >= 1")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    if initial is None:
        initial = rng.integers(0, 2, q.size)
    state = _FlipState(q, np.asarray(initial, dtype=float))
    best_x = state.x.copy()
    best_e = state.energy
    expiry = np.zeros(q.size, dtype=np.int64)
    no_improve = 0
    iteration = 0
    while iteration < max_iterations:
        iteration += 1
        gains = state.gains()
        allowed = expiry <= iteration
        # aspiration: tabu moves that would beat the incumbent are allowed
        allowed |= state.energy + gains < best_e - ENERGY_TOL
        if not allowed.any():
            allowed = np.ones(q.size, dtype=bool)
        masked = np.where(allowed, gains, np.inf)
        i = int(np.argmin(masked))
        state.flip(i)
        expiry[i] = iteration + tenure
        if state.energy < best_e - ENERGY_TOL:
            best_e = state.energy
            best_x = state.x.copy()
            no_improve = 0
        else:
            no_improve += 1
            if no_improve > max_no_improve:
                break
    metadata = {
        "solver": "tabu",
        "seed": seed,
        "tenure": tenure,
        "iterations": iteration,
        "wall_time": time.perf_counter() - t0,
    }
    return make_sample_set(q, [best_x], ["tabu"], metadata)


class _RelaxedLogicalLandscape:
    """Exact energy over logical bits with ancillas optimally relaxed.

    Gadget ancillas couple to logical variables but not to each other, so
    for a fixed logical assignment y each ancilla independently contributes
    min(0, field_a(y)) and the full minimum over ancillas is available in
    closed form.  Decomposition reads descend on this landscape instead of
    the raw one, where frozen ancillas heavily penalize logical moves.
    """

    def __init__(self, q: Qubo):
        self.q = q
        self.num_logical = q.num_logical

    @classmethod
    def build(cls, q: Qubo):
        """Returns None when the problem has no exploitable ancilla block."""
        num_l = q.num_logical
        if not q.ancilla_registry or num_l is None or num_l >= q.size:
            return None
        for (i, j) in q.quadratic:
            if i >= num_l and j >= num_l:
                return None  # ancilla-ancilla couplers: closed form unavailable
        self = cls(q)
        num_a = q.size - num_l
        self.lin_l = q.linear[:num_l].copy()
        self.lin_a = q.linear[num_l:].copy()
        self.quad_ll = np.zeros((num_l, num_l))
        self.a_al = np.zeros((num_a, num_l))
        for (i, j), v in q.quadratic.items():
            if j < num_l:
                self.quad_ll[i, j] += v
                self.quad_ll[j, i] += v
            else:
                self.a_al[j - num_l, i] += v
        return self

    def energy(self, y: np.ndarray) -> float:
        fields = self.lin_a + self.a_al @ y
        e = float(self.lin_l @ y) + 0.5 * float(y @ (self.quad_ll @ y))
        return e + float(np.minimum(0.0, fields).sum()) + self.q.offset

    def descend(self, y: np.ndarray) -> np.ndarray:
        """Steepest single-flip descent over logical bits (exact relaxation)."""
        y = y.astype(float)
        current = self.energy(y)
        while True:
            signs = 1.0 - 2.0 * y
            fields = self.lin_a + self.a_al @ y
            anc_now = np.minimum(0.0, fields).sum()
            anc_flipped = np.minimum(0.0, fields[:, None] + self.a_al * signs).sum(axis=0)
            logical_delta = signs * (self.lin_l + self.quad_ll @ y)
            deltas = logical_delta + (anc_flipped - anc_now)
            i = int(np.argmin(deltas))
            if deltas[i] >= -ENERGY_TOL:
                return y
            y[i] += signs[i]
            current += deltas[i]

    def _neighbor_deltas(self, y: np.ndarray) -> np.ndarray:
        signs = 1.0 - 2.0 * y
        fields = self.lin_a + self.a_al @ y
        anc_now = np.minimum(0.0, fields).sum()
        anc_flipped = np.minimum(0.0, fields[:, None] + self.a_al * signs).sum(axis=0)
        return signs * (self.lin_l + self.quad_ll @ y) + (anc_flipped - anc_now)

    def tabu_refine(
        self, y: np.ndarray, iterations: int, tenure: int, rng
    ) -> np.ndarray:
        """Short tabu walk over the logical bits on the relaxed landscape."""
        y = y.astype(float)
        num_l = y.size
        best_y = y.copy()
        best_e = self.energy(y)
        current = best_e
        expiry = np.zeros(num_l, dtype=np.int64)
        for it in range(1, iterations + 1):
            deltas = self._neighbor_deltas(y)
            allowed = expiry <= it
            allowed |= current + deltas < best_e - ENERGY_TOL
            if not allowed.any():
                allowed = np.ones(num_l, dtype=bool)
            i = int(np.argmin(np.where(allowed, deltas, np.inf)))
            current += deltas[i]
            y[i] = 1.0 - y[i]
            expiry[i] = it + tenure
            if current < best_e - ENERGY_TOL:
                best_e = current
                best_y = y.copy()
        return best_y

    def complete(self, y: np.ndarray) -> np.ndarray:
        """Full assignment with ancillas set to their relaxed values."""
        fields = self.lin_a + self.a_al @ y
        x = np.empty(self.q.size)
        x[: self.num_logical] = y
        x[self.num_logical:] = (fields < 0).astype(float)
        return x


def _solve_subproblem(
    sub: Qubo, subsolver: str, seed: int
) -> tuple:
    if subsolver == "exhaustive" and sub.size <= 20:
        result = exhaustive_solve(sub)
    elif subsolver == "sa":
        result = simulated_annealing(
            sub, default_schedule(sub, sweeps=200, reads=4), seed=seed
        )
    elif subsolver in ("tabu", "exhaustive"):
        result = tabu_solve(
            sub, tenure=max(4, sub.size // 4), max_no_improve=4 * sub.size, seed=seed
        )
    else:
        raise ParameterError(f"unknown subsolver '{subsolver}'")
    s = result.best_sample
    return np.array(s.assignment, dtype=float), s.energy


def decompose_solve(
    q: Qubo,
    subproblem_size: int = 50,
    subsolver: str = "tabu",
    max_iterations: int = 100,
    reads: int = 20,
    seed: int = 0,
    swap_fraction: float = 0.1,
) -> SampleSet:
    """Decomposition meta-solver for large QUBOs.

    Each read starts from a seeded random assignment relaxed by greedy
    descent, then repeatedly clamps all but an impact-ranked subset of
    ``subproblem_size`` variables (largest single-flip energy gains, ties
    by index, with a fraction of random swaps to escape rank lock-in),
    solves the induced sub-QUBO, and accepts only strict improvements.
    A read terminates after ``max_iterations`` or a full pass with no
    improvement.  Incumbent energy is non-increasing within each read.
    """
    if subproblem_size < 2:
        raise ParameterError("subproblem_size must be >= 2")
    t0 = time.perf_counter()
    streams = np.random.SeedSequence(seed).spawn(reads)
    landscape = _RelaxedLogicalLandscape.build(q)
    finals = []
    total_iterations = 0
    for read, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        x0 = rng.integers(0, 2, q.size).astype(float)
        if landscape is not None:
            y = landscape.descend(x0[: q.num_logical])
            num_l = q.num_logical
            y = landscape.tabu_refine(
                y, iterations=8 * num_l, tenure=max(3, num_l // 5), rng=rng
            )
            y = landscape.descend(y)
            x0 = landscape.complete(y)
        state = _FlipState(q, x0)
        state.greedy_descent()
        if subproblem_size >= q.size:
            x_sub, e_sub = _solve_subproblem(
                _induced_subqubo(q, state, list(range(q.size)))[0],
                subsolver,
                int(rng.integers(0, 2**31)),
            )
            if e_sub < state.energy - ENERGY_TOL:
                for i in np.nonzero(x_sub != state.x)[0]:
                    state.flip(int(i))
            finals.append(state.x.copy())
            total_iterations += 1
            continue
        # "full pass with no improvement": enough consecutive failures to
        # have covered the variable pool, capped so that rank-stable
        # selection on very large problems terminates promptly
        fails_allowed = max(2, math.ceil(min(q.size, 1000) / subproblem_size))
        fails = 0
        for _ in range(max_iterations):
            total_iterations += 1
            gains = state.gains()
            # largest single-flip impact first, ties broken by index
            ranked = np.lexsort((np.arange(q.size), -np.abs(gains)))
            chosen = list(ranked[:subproblem_size])
            rest = list(ranked[subproblem_size:])
            for _ in range(int(swap_fraction * subproblem_size)):
                if not rest:
                    break
                a = int(rng.integers(0, len(chosen)))
                b = int(rng.integers(0, len(rest)))
                chosen[a], rest[b] = rest[b], chosen[a]
            chosen = sorted(int(c) for c in chosen)
            sub, current_sub_energy = _induced_subqubo(q, state, chosen)
            x_sub, e_sub = _solve_subproblem(
                sub, subsolver, int(rng.integers(0, 2**31))
            )
            if e_sub < current_sub_energy - ENERGY_TOL:
                before = state.energy
                for t, i in enumerate(chosen):
                    if x_sub[t] != state.x[i]:
                        state.flip(i)
                assert state.energy <= before + ENERGY_TOL
                fails = 0
            else:
                fails += 1
                if fails >= fails_allowed:
                    break
        finals.append(state.x.copy())
    metadata = {
        "solver": "decompose",
        "subsolver": subsolver,
        "seed": seed,
        "reads": reads,
        "subproblem_size": subproblem_size,
        "iterations": total_iterations,
        "wall_time": time.perf_counter() - t0,
    }
    return make_sample_set(
        q, finals, [f"decompose/read{r}" for r in range(len(finals))], metadata
    )


def _induced_subqubo(
    q: Qubo, state: _FlipState, chosen: list
) -> tuple[Qubo, float]:
    """Sub-QUBO over ``chosen`` with the rest clamped at the current state.

    Clamped contributions outside the subset fold into the linear terms;
    the returned reference energy is the sub-energy of the current
    assignment (constant parts omitted, so only differences matter).
    """
    pos = {v: t for t, v in enumerate(chosen)}
    adj = state.adj
    sub_linear = np.empty(len(chosen))
    sub_quad: dict[tuple, float] = {}
    for t, i in enumerate(chosen):
        start, end = adj.indptr[i], adj.indptr[i + 1]
        cols = adj.indices[start:end]
        vals = adj.data[start:end]
        inside = 0.0
        for c, v in zip(cols, vals):
            tj = pos.get(int(c))
            if tj is None:
                continue
            inside += v * state.x[c]
            if tj > t:
                sub_quad[(t, tj)] = v
        sub_linear[t] = state.field[i] - inside
    sub = Qubo(size=len(chosen), linear=sub_linear, quadratic=sub_quad)
    x_cur = state.x[chosen]
    return sub, sub.energy(x_cur)


def majority_vote(
    samples: SampleSet, variables: Optional[Sequence[int]] = None
) -> tuple:
    """Per-variable majority across samples, weighted by read counts.

    Exact ties take the value from the lowest-energy sample.
    """
    if not samples.samples:
        raise ParameterError("majority vote requires at least one sample")
    size = len(samples.samples[0].assignment)
    if variables is None:
        variables = range(size)
    best = samples.best_sample.assignment
    votes = np.zeros(size)
    total = 0
    for s in samples.samples:
        votes += s.num_occurrences * np.asarray(s.assignment)
        total += s.num_occurrences
    out = []
    for v in variables:
        ones = votes[v]
        zeros = total - ones
        if ones > zeros:
            out.append(1)
        elif zeros > ones:
            out.append(0)
        else:
            out.append(int(best[v]))
    return tuple(out)


# ---------------------------------------------------------------------------
# .qubo interchange format

def write_qubo_file(q: Qubo, destination) -> None:
    """Emit the qbsolv-style text format.

    Layout: ``c offset <value>`` comment, ``p qubo 0 maxNodes nNodes
    nCouplers`` header, one ``i i v`` line per node, then ``i j v`` coupler
    lines with i < j.  Coefficients use 17 significant digits.
    """
    lines = [f"c offset {'%.17g' % q.offset}"]
    couplers = sorted(q.quadratic.items())
    lines.append(f"p qubo 0 {q.size} {q.size} {len(couplers)}")
    for i in range(q.size):
        lines.append(f"{i} {i} {'%.17g' % q.linear[i]}")
    for (i, j), v in couplers:
        lines.append(f"{i} {j} {'%.17g' % v}")
    with open(destination, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_qubo_file(source) -> Qubo:
    with open(source, "r", encoding="utf-8") as fh:
        raw_lines = fh.read().splitlines()
    offset = 0.0
    header = None
    body = []
    for lineno, line in enumerate(raw_lines, start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 3 and parts[1] == "offset":
                try:
                    offset = float(parts[2])
                except ValueError:
                    raise ParseError(f"line {lineno}: bad offset value")
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 6 or parts[1] != "qubo":
                raise ParseError(f"line {lineno}: malformed problem header")
            try:
                header = (int(parts[3]), int(parts[4]), int(parts[5]))
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer header field")
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'i j v'")
        try:
            body.append((lineno, int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError:
            raise ParseError(f"line {lineno}: bad entry '{line}'")
    if header is None:
        raise ParseError("missing 'p qubo' header line")
    max_nodes, n_nodes, n_couplers = header
    linear = np.zeros(max_nodes)
    quadratic: dict[tuple, float] = {}
    seen_nodes = 0
    for lineno, i, j, v in body:
        if not (0 <= i < max_nodes and 0 <= j < max_nodes):
            raise ParseError(f"line {lineno}: index out of range")
        if i == j:
            linear[i] = v
            seen_nodes += 1
        else:
            if i > j:
                raise ParseError(f"line {lineno}: couplers require i < j")
            quadratic[(i, j)] = v
    if seen_nodes != n_nodes:
        raise ParseError(
            f"header declares {n_nodes} nodes but {seen_nodes} diagonal lines found"
        )
    if len(quadratic) != n_couplers:
        raise ParseError(
            f"header declares {n_couplers} couplers but {len(quadratic)} found"
        )
    return Qubo(size=max_nodes, linear=linear, quadratic=quadratic, offset=offset)


# ---------------------------------------------------------------------------
# Remote sampler client

def remote_sample(
    endpoint: str,
    q: Qubo,
    reads: int = 20,
    seed: Optional[int] = None,
    timeout: float = 30.0,
    client=None,
) -> SampleSet:
    """POST the problem to a remote sampler and validate its response.

    ``endpoint`` is the service base URL; the request goes to
    ``/v1/sample``.  Returned energies are recomputed locally; any
    mismatch above 1e-6 is treated as data corruption.
    """
    import httpx

    payload = {
        "size": q.size,
        "linear": q.linear.tolist(),
        "quadratic": [[i, j, v] for (i, j), v in sorted(q.quadratic.items())],
        "offset": q.offset,
        "reads": reads,
    }
    if seed is not None:
        payload["seed"] = seed
    url = endpoint.rstrip("/") + "/v1/sample"
    try:
        if client is None:
            response = httpx.post(url, json=payload, timeout=timeout)
        else:
            response = client.post(url, json=payload, timeout=timeout)
        response.raise_for_status()
        doc = response.json()
    except httpx.HTTPError as exc:
        raise RemoteError(f"remote sampler transport failure: {exc}") from exc
    for key in ("samples", "energies", "occurrences"):
        if key not in doc:
            raise RemoteError(f"remote response missing field '{key}'")
    samples = doc["samples"]
    energies = doc["energies"]
    occurrences = doc["occurrences"]
    if not (len(samples) == len(energies) == len(occurrences)):
        raise RemoteError("remote response arrays have inconsistent lengths")
    for idx, (x, e) in enumerate(zip(samples, energies)):
        if len(x) != q.size:
            raise RemoteError(f"remote sample {idx} has wrong length")
        local = q.energy(x)
        if abs(local - e) > 1e-6:
            raise RemoteError(
                f"remote sample {idx} energy mismatch: reported {e}, "
                f"recomputed {local}"
            )
    metadata = {"solver": "remote", "endpoint": endpoint, "reads": reads}
    return make_sample_set(
        q,
        samples,
        ["remote"] * len(samples),
        metadata,
        occurrences=occurrences,
    )
