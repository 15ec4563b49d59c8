"""Functional-equation route to the Bernstein polynomial.

A constant-coefficient operator P (by default h with its variables read as
partial derivatives) is applied symbolically to h^(s+1).  Intermediate
expressions are sums  sum_k q_k(x, s) h^(s+1-k)  with the q_k polynomial in
x and s; s is carried as one extra polynomial variable.  After applying an
order-N operator, the power h^(N-1-s) clears all symbolic exponents and the
polynomial identity

    sum_k q_k * h^(N-k)  =  B(s) * h^(N-1)

determines B exactly; the identity is verified term by term before B is
returned, so a wrong operator can never produce a wrong polynomial
silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NotProportionalError
from .exactalg import BPoly, MPoly, QPolyUnivariate


@dataclass(frozen=True)
class DualOperator:
    """Constant-coefficient differential operator; `symbol` is an MPoly in
    n variables whose i-th variable stands for d/dx_i."""

    symbol: MPoly

    @property
    def nvars(self):
        return self.symbol.nvars

    def order(self):
        return self.symbol.degree()


def default_dual(h):
    """The operator h(d): same coefficients, variables reinterpreted.

    This realizes the dual operator for rational-coefficient h whenever the
    given coordinates behave as unitary ones; extract_b detects any
    violation, in which case the caller must supply the operator.
    """
    return DualOperator(symbol=h)


class SExpr:
    """sum_k q_k(x, s) h^(s+1-k); q_k lives in n+1 variables with s last."""

    __slots__ = ("nvars", "parts")

    def __init__(self, nvars, parts=None):
        self.nvars = nvars
        self.parts = {}
        if parts:
            for k, q in parts.items():
                if not q.is_zero():
                    self.parts[k] = q

    @classmethod
    def power_of_h(cls, nvars):
        """The starting expression h^(s+1) itself (q_0 = 1)."""
        return cls(nvars, {0: MPoly.const(nvars + 1, 1)})

    def is_zero(self):
        return not self.parts

    def __add__(self, other):
        parts = dict(self.parts)
        for k, q in other.parts.items():
            if k in parts:
                s = parts[k] + q
                if s.is_zero():
                    del parts[k]
                else:
                    parts[k] = s
            else:
                parts[k] = q
        return SExpr(self.nvars, parts)

    def scale(self, c):
        if c == 0:
            return SExpr(self.nvars)
        return SExpr(self.nvars, {k: q.scale(c) for k, q in self.parts.items()})

    def max_shift(self):
        return max(self.parts) if self.parts else 0


def _s_plus(nvars, constant):
    """The polynomial s + constant in the lifted ring."""
    n1 = nvars + 1
    exp_s = (0,) * nvars + (1,)
    terms = {exp_s: Fraction(1)}
    if constant != 0:
        terms[(0,) * n1] = Fraction(constant)
    return MPoly(n1, terms)


def sexpr_diff(expr, i, h):
    """d/dx_i of the expression: the product and chain rule with symbolic
    exponent, (d q) h^(s+1-k) + (s+1-k) q (d h) h^(s-k)."""
    nvars = expr.nvars
    dh = h.derivative(i).lift(1)
    parts = {}

    def accumulate(k, q):
        if q.is_zero():
            return
        if k in parts:
            s = parts[k] + q
            if s.is_zero():
                del parts[k]
            else:
                parts[k] = s
        else:
            parts[k] = q

    for k, q in expr.parts.items():
        accumulate(k, q.derivative(i))
        accumulate(k + 1, q * dh * _s_plus(nvars, 1 - k))
    return SExpr(nvars, parts)


def apply_operator(op, h):
    """Apply each monomial of the operator to h^(s+1) and sum with the
    operator's coefficients.  Derivatives commute, so the application order
    inside a monomial is immaterial; ascending variable order is used."""
    nvars = h.nvars
    if op.nvars != nvars:
        raise ValueError("operator and polynomial have different variable counts")
    total = SExpr(nvars)
    for exp, coeff in sorted(op.symbol.terms.items()):
        expr = SExpr.power_of_h(nvars)
        for i, times in enumerate(exp):
            for _ in range(times):
                expr = sexpr_diff(expr, i, h)
        total = total + expr.scale(coeff)
    return total


def _split_off_s(poly, nvars):
    """Group a lifted polynomial by its x-monomial: {x-exponent: s-coeffs}."""
    grouped = {}
    for exp, coeff in poly.terms.items():
        xexp = exp[:nvars]
        sdeg = exp[nvars]
        bucket = grouped.setdefault(xexp, {})
        bucket[sdeg] = bucket.get(sdeg, 0) + coeff
    return grouped


def extract_b(expr, h):
    """Extract B(s) from an applied expression; exact and self-verifying.

    Raises NotProportionalError when the cleared identity is not a Q[s]
    multiple of h^(N-1), which signals that the supplied operator does not
    realize a functional equation for h (wrong coordinates, wrong operator).
    Returns (BPoly, leading_coefficient) where leading_coefficient is the
    lead of the unnormalized B.
    """
    nvars = h.nvars
    shift = expr.max_shift()
    if expr.is_zero():
        raise NotProportionalError("applying the operator annihilated h^(s+1)")
    order = shift
    h_lift = h.lift(1)
    h_powers = {0: MPoly.const(nvars + 1, 1)}
    for k in range(1, order + 1):
        h_powers[k] = h_powers[k - 1] * h_lift
    total = MPoly.zero(nvars + 1)
    for k, q in expr.parts.items():
        total = total + q * h_powers[order - k]
    reference = h_powers[order - 1] if order >= 1 else h_powers[0]

    grouped_total = _split_off_s(total, nvars)
    ref_lead = reference.leading_term()
    ref_exp = ref_lead[0][:nvars]
    if ref_exp not in grouped_total:
        raise NotProportionalError("cleared identity misses the reference monomial of h^(N-1)")
    b_coeffs_map = grouped_total[ref_exp]
    gamma = ref_lead[1]
    b_poly = QPolyUnivariate(
        [Fraction(b_coeffs_map.get(d, 0), 1) / gamma for d in range(max(b_coeffs_map) + 1)]
    )
    check = total - reference * _poly_in_s(b_poly, nvars)
    if not check.is_zero():
        raise NotProportionalError(
            "cleared identity is not a polynomial multiple of h^(N-1); "
            "supply the dual operator explicitly"
        )
    lead = b_poly.leading_coefficient()
    return BPoly.from_poly(b_poly), lead


def _poly_in_s(p, nvars):
    terms = {}
    for d, c in enumerate(p.coeffs):
        if c != 0:
            terms[(0,) * nvars + (d,)] = c
    return MPoly(nvars + 1, terms)


def bernstein_via_functional(h, operator=None):
    """Full functional route: returns (BPoly, leading_coefficient)."""
    op = operator if operator is not None else default_dual(h)
    return extract_b(apply_operator(op, h), h)
