"""Spin-form conversion and quadratization of higher-order terms.

Boolean polynomials are mapped to +-1 spin variables, every k-body spin
term (k >= 3) is replaced by a two-body gadget over k logical plus k
ancilla spins (or a single ancilla for 3-body terms, when it certifies),
and the result is converted back to a boolean QUBO.  Every gadget is
certified by brute force: for each logical configuration the
ancilla-minimized energy must equal J_k * prod(sigma) plus a constant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import GadgetError, ParameterError, ResourceError
from .hubo import BinaryPolynomial

VERIFY_TOL = 1e-9

# Brute-force certification bound: logical + ancilla spins.
VERIFY_MAX_SPINS = 24


class SpinPolynomial:
    """Multilinear polynomial over +-1 spin variables (sigma^2 = 1)."""

    def __init__(self, terms=None, variable_index=None):
        self.terms: dict[frozenset, float] = dict(terms or {})
        self.variable_index: dict[int, tuple] = dict(variable_index or {})

    def variables(self) -> list[int]:
        seen = set()
        for key in self.terms:
            seen.update(key)
        return sorted(seen)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def evaluate(self, assignment) -> float:
        """Evaluate at a +-1 assignment (mapping or sequence by variable id)."""
        total = 0.0
        for key, coef in self.terms.items():
            prod = 1.0
            for v in key:
                prod *= assignment[v]
            total += coef * prod
        return total


def boolean_to_spin(bp: BinaryPolynomial) -> SpinPolynomial:
    """Exact change of variables x = (1 + sigma)/2 (x=1 maps to sigma=+1)."""
    out: dict[frozenset, float] = {}
    for key, coef in bp.terms.items():
        k = len(key)
        scale = coef / 2**k
        members = tuple(key)
        for size in range(k + 1):
            for subset in itertools.combinations(members, size):
                sk = frozenset(subset)
                out[sk] = out.get(sk, 0.0) + scale
    out = {k: c for k, c in out.items() if c != 0.0 or not k}
    return SpinPolynomial(out, bp.variable_index)


def spin_to_boolean(sp: SpinPolynomial) -> BinaryPolynomial:
    """Inverse map sigma = 2x - 1."""
    out: dict[frozenset, float] = {}
    for key, coef in sp.terms.items():
        k = len(key)
        members = tuple(key)
        for size in range(k + 1):
            for subset in itertools.combinations(members, size):
                sk = frozenset(subset)
                out[sk] = out.get(sk, 0.0) + coef * 2**size * (-1) ** (k - size)
    out = {k: c for k, c in out.items() if c != 0.0 or not k}
    return BinaryPolynomial(out, sp.variable_index)


@dataclass(frozen=True)
class GadgetParams:
    """Coupling scales for the k-ancilla gadget.

    By default each term gets J^a = scale_factor * |J_k| and
    q_0 = scale_factor/2 * |J_k|.  Explicit ``ja``/``q0`` override the
    per-term scaling (global-scale mode for limited dynamic range).
    """

    scale_factor: float = 20.0
    ja: Optional[float] = None
    q0: Optional[float] = None

    def for_term(self, jk: float) -> tuple[float, float]:
        """Concrete (J^a, q_0) for a term coefficient, invariants enforced."""
        if self.ja is not None and self.q0 is not None:
            ja, q0 = self.ja, self.q0
        else:
            ja = self.scale_factor * abs(jk)
            q0 = 0.5 * self.scale_factor * abs(jk)
        if not (abs(jk) < q0 < ja and abs(jk) < ja - q0 < ja):
            raise ParameterError(
                f"gadget scales violate |J_k| < q0 < J^a and |J_k| < J^a - q0: "
                f"|J_k|={abs(jk)}, q0={q0}, J^a={ja}"
            )
        return ja, q0


@dataclass
class Qubo:
    """Boolean two-body problem: minimize x^T Q x + offset.

    ``linear`` holds the diagonal, ``quadratic`` maps ordered pairs
    (i < j) to couplers.  Ancilla variables are appended after the logical
    ones; ``ancilla_registry`` maps each ancilla index to its source spin
    term and the gadget kind that introduced it.
    """

    size: int
    linear: np.ndarray
    quadratic: dict
    offset: float = 0.0
    ancilla_registry: dict = field(default_factory=dict)
    num_logical: Optional[int] = None

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=float)
        if self.linear.shape != (self.size,):
            raise ParameterError("linear vector length must equal size")
        for (i, j) in self.quadratic:
            if not (0 <= i < j < self.size):
                raise ParameterError(f"bad coupler indices ({i}, {j}) for size {self.size}")
        if self.num_logical is None:
            self.num_logical = self.size - len(self.ancilla_registry)
        for a, (source, kind) in self.ancilla_registry.items():
            if not source:
                raise ParameterError(f"ancilla {a} has empty source term")

    @property
    def num_couplers(self) -> int:
        return len(self.quadratic)

    def energy(self, x) -> float:
        x = np.asarray(x, dtype=float)
        e = float(self.linear @ x) + self.offset
        for (i, j), v in self.quadratic.items():
            e += v * x[i] * x[j]
        return e

    def dense(self) -> np.ndarray:
        """Upper-triangular dense matrix (diagonal = linear terms)."""
        q = np.diag(self.linear.copy())
        for (i, j), v in self.quadratic.items():
            q[i, j] = v
        return q


# ---------------------------------------------------------------------------
# Gadgets

def reduce_kbody_term(
    variables: Sequence[int],
    jk: float,
    params: GadgetParams,
    ancilla_ids: Optional[Sequence[int]] = None,
    certify: bool = True,
) -> dict[frozenset, float]:
    """Two-body gadget for J_k * prod(sigma_i) using k ancilla spins.

    Emits J = J^a on logical pairs, h = -J^a + q_0 on logicals, J^a on
    every logical-ancilla pair and h_i^a = -J^a (2i - k) + q_i on ancilla
    i, with q_i = (-1)^(k-i+1) J_k + q_0.  The gadget is certified by
    brute force unless ``certify`` is disabled by a caller that has
    already certified the same shape.
    """
    variables = sorted(variables)
    k = len(variables)
    if k < 3:
        raise ParameterError("k-body gadget requires k >= 3")
    if len(set(variables)) != k:
        raise ParameterError("gadget variables must be distinct")
    ja, q0 = params.for_term(jk)
    if ancilla_ids is None:
        base = max(variables) + 1
        ancilla_ids = list(range(base, base + k))
    elif len(ancilla_ids) != k:
        raise ParameterError(f"need {k} ancilla ids, got {len(ancilla_ids)}")

    terms: dict[frozenset, float] = {}

    def add(key, val):
        terms[key] = terms.get(key, 0.0) + val

    for a, b in itertools.combinations(variables, 2):
        add(frozenset({a, b}), ja)  # J = J^a
    h = -ja + q0
    for v in variables:
        add(frozenset({v}), h)
    for i, anc in enumerate(ancilla_ids, start=1):
        qi = (-1) ** (k - i + 1) * jk + q0
        add(frozenset({anc}), -ja * (2 * i - k) + qi)
        for v in variables:
            add(frozenset({v, anc}), ja)

    if certify:
        result = verify_gadget(variables, terms, jk)
        if not result.passed:
            raise GadgetError(
                f"k-ancilla gadget failed certification for k={k}, J_k={jk}",
                witness=result.witness,
            )
    return terms


def reduce_3body_single_ancilla(
    variables: Sequence[int],
    j3: float,
    ancilla_id: Optional[int] = None,
    certify: bool = True,
) -> dict[frozenset, float]:
    """One-ancilla gadget for J_3 sigma_1 sigma_2 sigma_3.

    Parameterization: h = J_3, h^a = 2 J_3, J = |J_3| and J^a = 2J.  The
    coupling strength J is a free parameter; |J_3| keeps J^a = 2J > h for
    positive J_3 and certifies for both signs.  A zero coefficient emits
    nothing.
    """
    variables = sorted(variables)
    if len(variables) != 3 or len(set(variables)) != 3:
        raise ParameterError("single-ancilla gadget requires 3 distinct variables")
    if j3 == 0.0:
        return {}
    if ancilla_id is None:
        ancilla_id = max(variables) + 1

    j = abs(j3)
    ja = 2.0 * j
    terms: dict[frozenset, float] = {}
    for a, b in itertools.combinations(variables, 2):
        terms[frozenset({a, b})] = j
    for v in variables:
        terms[frozenset({v})] = j3  # h = J_3
        terms[frozenset({v, ancilla_id})] = ja
    terms[frozenset({ancilla_id})] = 2.0 * j3  # h^a = 2h

    if certify:
        result = verify_gadget(variables, terms, j3)
        if not result.passed:
            raise GadgetError(
                f"single-ancilla 3-body gadget failed certification for J_3={j3}",
                energy_table=result.energy_table,
                witness=result.witness,
            )
    return terms


@dataclass(frozen=True)
class CertificationResult:
    passed: bool
    offset: float
    witness: Optional[tuple] = None
    energy_table: Optional[tuple] = None


def verify_gadget(
    logical_ids: Sequence[int],
    emitted: dict[frozenset, float],
    jk: float,
    tol: float = VERIFY_TOL,
) -> CertificationResult:
    """Brute-force certification of a two-body gadget.

    For every logical +-1 configuration, minimizes the emitted terms over
    all ancilla configurations and checks that the minimum equals
    J_k * prod(sigma) plus a configuration-independent constant.
    """
    logical = sorted(logical_ids)
    k = len(logical)
    ancillas = sorted({v for key in emitted for v in key} - set(logical))
    a = len(ancillas)
    if k + a > VERIFY_MAX_SPINS:
        raise ResourceError(
            f"gadget certification over {k + a} spins exceeds the "
            f"{VERIFY_MAX_SPINS}-spin brute-force bound"
        )

    # Vectorized enumeration: spins ordered logical-major so the energy
    # grid reshapes to (logical configs, ancilla configs).
    order = logical + ancillas
    pos = {v: i for i, v in enumerate(order)}
    total = k + a
    h = np.zeros(total)
    j_mat = np.zeros((total, total))
    const = 0.0
    for key, coef in emitted.items():
        ids = sorted(key)
        if len(ids) == 0:
            const += coef
        elif len(ids) == 1:
            h[pos[ids[0]]] += coef
        elif len(ids) == 2:
            j_mat[pos[ids[0]], pos[ids[1]]] += coef
        else:
            raise ParameterError("emitted gadget terms must be at most two-body")

    codes = np.arange(2**total)[:, None]
    bits = (codes >> np.arange(total - 1, -1, -1)) & 1
    spins = 2.0 * bits - 1.0
    energies = ((spins @ j_mat) * spins).sum(axis=1) + spins @ h + const
    mins = energies.reshape(2**k, max(2**a, 1)).min(axis=1)

    logical_codes = np.arange(2**k)[:, None]
    logical_spins = 2.0 * ((logical_codes >> np.arange(k - 1, -1, -1)) & 1) - 1.0
    targets = jk * logical_spins.prod(axis=1)
    offsets = mins - targets
    offset = float(offsets[0])
    table = tuple(
        (tuple(int(s) for s in row), float(e), float(t))
        for row, e, t in zip(logical_spins, mins, targets)
    )
    bad = np.nonzero(np.abs(offsets - offset) > tol)[0]
    if bad.size:
        witness = tuple(int(s) for s in logical_spins[bad[0]])
        return CertificationResult(False, offset, witness, table)
    return CertificationResult(True, offset, None, table)


# ---------------------------------------------------------------------------
# Quadratization

def quadratize(
    sp: SpinPolynomial,
    params: Optional[GadgetParams] = None,
    strategy: str = "k-ancilla",
) -> Qubo:
    """Replace every order >= 3 spin term with a two-body gadget and
    convert to a boolean QUBO.

    ``strategy`` is "k-ancilla" (always available) or "single-ancilla-3body"
    (one ancilla per 3-body term; falls back to the k-ancilla gadget for
    any term whose single-ancilla certification fails).  Ancilla indices
    are appended after all logical variables in source-term lexicographic
    order, so output is deterministic.
    """
    if params is None:
        params = GadgetParams()
    if strategy not in ("k-ancilla", "single-ancilla-3body"):
        raise ParameterError(f"unknown quadratization strategy '{strategy}'")

    logical_vars = sp.variables()
    index = {v: i for i, v in enumerate(logical_vars)}
    num_logical = len(logical_vars)

    two_body: dict[frozenset, float] = {}
    constant = 0.0
    high_terms = []
    for key, coef in sp.terms.items():
        if coef == 0.0:
            continue
        if len(key) == 0:
            constant += coef
        elif len(key) <= 2:
            mapped = frozenset(index[v] for v in key)
            two_body[mapped] = two_body.get(mapped, 0.0) + coef
        else:
            high_terms.append((tuple(sorted(index[v] for v in key)), coef))
    high_terms.sort()

    registry: dict[int, tuple] = {}
    next_ancilla = num_logical
    # Certification outcome is invariant under a joint rescaling of
    # (J_k, J^a, q_0), so identical shapes are certified once.
    cert_cache: dict[tuple, bool] = {}

    for term_vars, coef in high_terms:
        k = len(term_vars)
        kind = "k-ancilla"
        gadget = None
        if strategy == "single-ancilla-3body" and k == 3:
            shape = ("single3", coef > 0)
            cached = cert_cache.get(shape)
            if cached is not False:
                try:
                    gadget = reduce_3body_single_ancilla(
                        term_vars, coef, ancilla_id=next_ancilla,
                        certify=cached is None,
                    )
                    cert_cache[shape] = True
                    kind = "single-ancilla-3body"
                except GadgetError:
                    cert_cache[shape] = False
                    gadget = None
            if gadget is None:
                kind = "k-ancilla-fallback"
        if gadget is None:
            if params.ja is None:
                shape = ("kbody", k, coef > 0, params.scale_factor)
            else:
                shape = ("kbody", k, coef, params.ja, params.q0)
            cached = cert_cache.get(shape)
            ancilla_ids = list(range(next_ancilla, next_ancilla + k))
            gadget = reduce_kbody_term(
                term_vars, coef, params, ancilla_ids=ancilla_ids,
                certify=cached is None,
            )
            cert_cache[shape] = True
        used_ancillas = sorted(
            {v for key in gadget for v in key} - set(term_vars)
        )
        for anc in used_ancillas:
            registry[anc] = (term_vars, kind)
        next_ancilla += len(used_ancillas)
        for key, val in gadget.items():
            two_body[key] = two_body.get(key, 0.0) + val

    # Spin -> boolean: sigma = 2x - 1.
    size = next_ancilla
    linear = np.zeros(size)
    quadratic: dict[tuple, float] = {}
    offset = constant
    for key, coef in two_body.items():
        ids = sorted(key)
        if len(ids) == 1:
            linear[ids[0]] += 2.0 * coef
            offset -= coef
        else:
            i, j = ids
            quadratic[(i, j)] = quadratic.get((i, j), 0.0) + 4.0 * coef
            linear[i] -= 2.0 * coef
            linear[j] -= 2.0 * coef
            offset += coef
    quadratic = {k: v for k, v in quadratic.items() if v != 0.0}

    return Qubo(
        size=size,
        linear=linear,
        quadratic=quadratic,
        offset=offset,
        ancilla_registry=registry,
        num_logical=num_logical,
    )


# ---------------------------------------------------------------------------
# Resource estimation

@dataclass(frozen=True)
class ResourceEstimate:
    max_terms: int
    max_ancillas_bound: int
    qubo_side_bound: int
    memory_bytes: int

    def to_dict(self) -> dict:
        return {
            "max_terms": self.max_terms,
            "max_ancillas_bound": self.max_ancillas_bound,
            "qubo_side_bound": self.qubo_side_bound,
            "memory_bytes": self.memory_bytes,
        }


def qubo_memory_bytes(side: int) -> int:
    """Dense double-precision storage for a side x side QUBO matrix."""
    return 8 * side * side


def estimate_resources(n: int, bits: int, r: int) -> ResourceEstimate:
    """Worst-case term/ancilla/memory bounds for the degree-2r objective.

    Assumes the expansion contains every multilinear term up to order 2r
    over n*bits logical variables; each order-k term (k >= 3) is charged
    k ancillas.  Exact big-integer arithmetic throughout.
    """
    if n < 1 or bits < 1 or r < 0:
        raise ParameterError("n, bits must be >= 1 and r >= 0")
    nvars = n * bits
    max_order = min(2 * r, nvars)
    max_terms = sum(math.comb(nvars, k) for k in range(max_order + 1))
    ancillas = sum(k * math.comb(nvars, k) for k in range(3, max_order + 1))
    side = nvars + ancillas
    return ResourceEstimate(max_terms, ancillas, side, qubo_memory_bytes(side))
