"""Higher-order binary objective construction.

Pipeline: the discontinuous failure step is smoothed with a truncated
Legendre series, market values are encoded in fixed-point binary, and the
squared equilibrium residual is expanded symbolically into a multilinear
pseudo-Boolean polynomial (the HUBO).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ParameterError, ParseError, ResourceError
from .network import FailureSpec, FinancialNetwork

# Relative magnitude below which expansion terms are dropped as float dust.
PRUNE_TOL = 1e-12

DEFAULT_TERM_CAP = 5_000_000


# ---------------------------------------------------------------------------
# Legendre machinery

def legendre(l: int, x: float) -> float:
    """P_l(x) by the Bonnet recurrence; domain restricted to [-1, 1]."""
    if l < 0:
        raise ParameterError("Legendre order must be >= 0")
    if abs(x) > 1:
        raise ParameterError(f"Legendre argument {x} outside [-1, 1]")
    return _legendre_unchecked(l, x)


def _legendre_unchecked(l: int, x: float) -> float:
    if l == 0:
        return 1.0
    prev, cur = 1.0, x
    for k in range(1, l):
        prev, cur = cur, ((2 * k + 1) * x * cur - k * prev) / (k + 1)
    return cur


def legendre_at_zero(l: int) -> float:
    """P_l(0): zero for odd l, (-1)^(l/2) (l-1)!! / l!! for even l."""
    if l < 0:
        raise ParameterError("Legendre order must be >= 0")
    if l % 2 == 1:
        return 0.0
    half = l // 2
    val = math.comb(l, half) / 2.0**l
    return val if half % 2 == 0 else -val


@dataclass(frozen=True)
class ThetaPolynomial:
    """Truncated Legendre series for the Heaviside step on [-1, 1].

    Only odd orders carry weight; ``coefficients[l]`` holds
    P_{l-1}(0) + P_{l+1}(0) for odd l <= degree.
    """

    degree: int
    coefficients: Mapping[int, float]


def theta_coefficients(r: int) -> ThetaPolynomial:
    """Series weights of the smoothed step up to odd degree r."""
    if r < 1 or r % 2 == 0:
        raise ParameterError("smoothing degree r must be a positive odd integer")
    coeffs = {l: legendre_at_zero(l - 1) + legendre_at_zero(l + 1)
              for l in range(1, r + 1, 2)}
    return ThetaPolynomial(degree=r, coefficients=coeffs)


def smoothed_theta(tp: ThetaPolynomial, x: float) -> float:
    """Evaluate the smoothed step at x in [-1, 1]."""
    if abs(x) > 1:
        raise ParameterError(f"smoothed step argument {x} outside [-1, 1]")
    return smoothed_theta_extended(tp, x)


def smoothed_theta_extended(tp: ThetaPolynomial, x) -> float:
    """Polynomial continuation of the smoothed step, valid for any x.

    The binary encoding can push the normalized argument slightly outside
    [-1, 1]; during objective construction the series is simply evaluated
    as the polynomial it is.  Accepts scalars or numpy arrays.
    """
    total = 0.5 + np.zeros_like(np.asarray(x, dtype=float))
    for l, c in tp.coefficients.items():
        total = total + c * _legendre_poly_extended(l, x)
    if np.ndim(x) == 0:
        return float(total)
    return total


def _legendre_poly_extended(l: int, x):
    x = np.asarray(x, dtype=float)
    if l == 0:
        return np.ones_like(x)
    prev, cur = np.ones_like(x), x
    for k in range(1, l):
        prev, cur = cur, ((2 * k + 1) * x * cur - k * prev) / (k + 1)
    return cur


# ---------------------------------------------------------------------------
# Fixed-point binary encoding

@dataclass(frozen=True)
class BitSpec:
    """Fixed-point encoding v = sum_{a=alpha_min..alpha_max} 2^a x_a."""

    alpha_min: int = 0
    alpha_max: int = 4

    def __post_init__(self):
        if self.alpha_min > self.alpha_max:
            raise ParameterError("alpha_min must not exceed alpha_max")

    @property
    def num_bits(self) -> int:
        return self.alpha_max - self.alpha_min + 1

    @property
    def v_max(self) -> float:
        return float(sum(2.0**a for a in range(self.alpha_min, self.alpha_max + 1)))

    def weights(self) -> np.ndarray:
        """Bit weights 2^alpha, alpha ascending."""
        return np.array([2.0**a for a in range(self.alpha_min, self.alpha_max + 1)])


def encode_value(spec: BitSpec, v: float) -> np.ndarray:
    """Greedy most-significant-first encoding; bits returned alpha-ascending.

    Exact when v is representable, otherwise the nearest representable
    value not above v (to within one least-significant step).
    """
    if not (0 <= v <= spec.v_max):
        raise ParameterError(f"value {v} outside [0, {spec.v_max}]")
    bits = np.zeros(spec.num_bits, dtype=int)
    rem = float(v)
    for a in range(spec.alpha_max, spec.alpha_min - 1, -1):
        w = 2.0**a
        if rem >= w:
            bits[a - spec.alpha_min] = 1
            rem -= w
    return bits


def decode_bits(spec: BitSpec, bits: Sequence[int]) -> float:
    bits = np.asarray(bits)
    if bits.shape != (spec.num_bits,):
        raise ParameterError(f"expected {spec.num_bits} bits, got {bits.shape}")
    return float(bits @ spec.weights())


# ---------------------------------------------------------------------------
# Multilinear pseudo-Boolean polynomials

class BinaryPolynomial:
    """Multilinear polynomial over 0/1 variables.

    ``terms`` maps frozensets of integer variable ids to coefficients; the
    empty set is the constant.  ``variable_index`` maps each id back to its
    meaning, e.g. ("bit", institution, alpha) or ("ancilla", tag).
    """

    def __init__(self, terms=None, variable_index=None):
        self.terms: dict[frozenset, float] = dict(terms or {})
        self.variable_index: dict[int, tuple] = dict(variable_index or {})

    def variables(self) -> list[int]:
        seen = set()
        for key in self.terms:
            seen.update(key)
        return sorted(seen)

    @property
    def num_variables(self) -> int:
        return len(self.variables())

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def order_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for key in self.terms:
            hist[len(key)] = hist.get(len(key), 0) + 1
        return hist

    def evaluate(self, assignment) -> float:
        """Sum coefficients of terms whose variables are all 1.

        ``assignment`` is a mapping or sequence indexed by variable id and
        must cover every variable of the polynomial.
        """
        try:
            ones = {v for v in self.variables() if assignment[v]}
            covered = all(assignment[v] in (0, 1, True, False)
                          for v in self.variables())
        except (KeyError, IndexError) as exc:
            raise ParameterError(f"assignment missing variable {exc}") from exc
        if not covered:
            raise ParameterError("assignment entries must be 0/1")
        total = 0.0
        for key, coef in self.terms.items():
            if key <= ones:
                total += coef
        return total

    def pruned(self, rel_tol: float = PRUNE_TOL) -> "BinaryPolynomial":
        """Drop terms whose magnitude is below rel_tol of the largest."""
        if not self.terms:
            return BinaryPolynomial({}, self.variable_index)
        cutoff = rel_tol * max(abs(c) for c in self.terms.values())
        kept = {k: c for k, c in self.terms.items() if abs(c) >= cutoff}
        if frozenset() in self.terms and frozenset() not in kept:
            kept[frozenset()] = self.terms[frozenset()]
        return BinaryPolynomial(kept, self.variable_index)

    # -- text dump (one term per line, sorted; used for golden tests) -------

    def to_text(self) -> str:
        lines = []
        for key in sorted(self.terms, key=lambda k: tuple(sorted(k))):
            ids = " ".join(str(v) for v in sorted(key))
            coef = "%.17g" % self.terms[key]
            lines.append(f"{coef}  {ids}".rstrip())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BinaryPolynomial":
        terms: dict[frozenset, float] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                coef = float(parts[0])
                ids = frozenset(int(p) for p in parts[1:])
            except ValueError as exc:
                raise ParseError(f"polynomial dump line {lineno}: {exc}") from exc
            if len(ids) != len(parts) - 1:
                raise ParseError(f"polynomial dump line {lineno}: repeated variable")
            terms[ids] = terms.get(ids, 0.0) + coef
        poly = cls(terms)
        poly.variable_index = {v: ("var", v) for v in poly.variables()}
        return poly


def _poly_add(dst: dict, src: dict, scale: float = 1.0) -> None:
    for key, coef in src.items():
        dst[key] = dst.get(key, 0.0) + scale * coef


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict[frozenset, float] = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = ka | kb  # idempotence x^2 = x via set union
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def _poly_pow(base: dict, exponent: int) -> dict:
    out = {frozenset(): 1.0}
    for _ in range(exponent):
        out = _poly_mul(out, base)
    return out


# ---------------------------------------------------------------------------
# Objective construction

def bit_variable_id(institution: int, bit_index: int, num_bits: int) -> int:
    return institution * num_bits + bit_index


def build_hubo(
    net: FinancialNetwork,
    fail: Optional[FailureSpec],
    spec: BitSpec,
    r: Optional[int] = None,
    term_cap: int = DEFAULT_TERM_CAP,
) -> BinaryPolynomial:
    """Expand the squared equilibrium residual over binary-encoded values.

    Without a failure spec the result is sum_i (v_i - u_i)^2 with
    u = C-tilde (I-C)^-1 D p, purely quadratic.  With a failure spec the
    failure term is smoothed to degree r (odd), giving a multilinear
    polynomial of degree up to 2r.  The smoothed step argument is
    (v_j - v_c_j) / v_max with the global v_max of the bit spec.
    """
    n = net.n_institutions
    nbits = spec.num_bits
    weights = spec.weights()

    if fail is not None:
        if r is None:
            raise ParameterError("smoothing degree r required with a failure spec")
        tp = theta_coefficients(r)

    eye_minus_c = np.eye(n) - net.cross_holdings
    cond = np.linalg.cond(eye_minus_c)
    if not np.isfinite(cond) or cond > 1e12:
        from .errors import NumericError

        raise NumericError(f"(I - C) numerically singular (condition {cond:.3g})")
    m_matrix = np.diag(net.self_ownership) @ np.linalg.inv(eye_minus_c)
    u = m_matrix @ net.asset_income()

    variable_index = {}
    v_polys = []
    for i in range(n):
        poly = {}
        for a in range(nbits):
            vid = bit_variable_id(i, a, nbits)
            variable_index[vid] = ("bit", i, spec.alpha_min + a)
            poly[frozenset({vid})] = weights[a]
        v_polys.append(poly)

    # Smoothed failure contribution per institution j (univariate in j's bits).
    fail_polys = None
    if fail is not None:
        fail_polys = []
        inv_vmax = 1.0 / spec.v_max
        for j in range(n):
            arg = dict(v_polys[j])
            for key in arg:
                arg[key] *= inv_vmax
            arg[frozenset()] = arg.get(frozenset(), 0.0) - fail.critical_values[j] * inv_vmax
            # theta series evaluated on the argument polynomial
            theta_poly = {frozenset(): 0.5}
            prev = {frozenset(): 1.0}
            cur = dict(arg)
            for l in range(1, tp.degree + 1):
                if l >= 2:
                    # Bonnet recurrence on polynomials
                    nxt = {}
                    _poly_add(nxt, _poly_mul(arg, cur), (2 * l - 1) / l)
                    _poly_add(nxt, prev, -(l - 1) / l)
                    prev, cur = cur, nxt
                if l in tp.coefficients:
                    _poly_add(theta_poly, cur, tp.coefficients[l])
            # b~_j = beta_j (1 - theta(arg))
            b_poly = {frozenset(): fail.failure_magnitudes[j]}
            _poly_add(b_poly, theta_poly, -fail.failure_magnitudes[j])
            fail_polys.append(b_poly)

    total: dict[frozenset, float] = {}
    for i in range(n):
        residual = dict(v_polys[i])
        residual[frozenset()] = residual.get(frozenset(), 0.0) - u[i]
        if fail_polys is not None:
            for j in range(n):
                _poly_add(residual, fail_polys[j], m_matrix[i, j])
        _poly_add(total, _poly_mul(residual, residual))
        if len(total) > term_cap:
            raise ResourceError(
                f"objective expansion exceeded term cap ({len(total)} > {term_cap})"
            )

    poly = BinaryPolynomial(total, variable_index).pruned()
    return poly


def evaluate(polynomial: BinaryPolynomial, assignment) -> float:
    """Module-level alias for BinaryPolynomial.evaluate."""
    return polynomial.evaluate(assignment)
