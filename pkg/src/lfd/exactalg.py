"""Exact arithmetic foundation.

Sparse multivariate polynomials over arbitrary-precision rationals, exact
dense linear algebra over Q, univariate polynomials, and factored
rational-root polynomials.  No floating point appears anywhere; every
operation is a pure function on immutable values and results are
bit-identical regardless of evaluation order.

Coefficients are `fractions.Fraction` (or plain `int`, which Python mixes
exactly with Fraction); Fraction already maintains the canonical form
denominator > 0, gcd(|num|, den) = 1.

Monomial order is graded lexicographic in the declared variable order:
monomials compare first by total degree, then lexicographically on the
exponent vector.  All canonical choices (RREF pivots, kernel bases, the
zero-free-variable solution of underdetermined systems, printing) derive
from this single order so that outputs are reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, lcm

from .errors import (
    NonRationalSpectrumError,
    ParseError,
    UnknownVariableError,
)

Rational = Fraction

try:  # optional C-backed rationals; exact semantics are identical
    from gmpy2 import mpq as _fast_rational
except ImportError:  # pragma: no cover - gmpy2 is an optional accelerator
    _fast_rational = Fraction


def rational(numerator=0, denominator=1):
    """Exact rational constructor for arithmetic-heavy internal paths.

    Uses gmpy2.mpq when available and fractions.Fraction otherwise; the two
    interoperate (equal values compare and hash equal, mixed arithmetic is
    exact), so the choice never affects results, only speed.
    """
    return _fast_rational(numerator, denominator)


def to_fraction(value):
    """Normalize any exact rational value to an int-backed Fraction.

    Fraction(mpq) keeps gmpy2 integers in its slots, which gmpy2 then
    refuses in mixed arithmetic; every boundary into the Fraction-typed
    layer goes through here.
    """
    f = value if isinstance(value, Fraction) else Fraction(value)
    num, den = f.numerator, f.denominator
    if type(num) is int and type(den) is int:
        return f
    return Fraction(int(num), int(den))


_ZERO = Fraction(0)


def _is_zero(c):
    return c == 0


# ---------------------------------------------------------------------------
# sparse multivariate polynomials
# ---------------------------------------------------------------------------


class MPoly:
    """Sparse multivariate polynomial: map exponent tuple -> coefficient.

    Values are immutable by convention; no method mutates self.  Zero
    coefficients are never stored.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        clean = {}
        if terms:
            for exp, coeff in terms.items():
                if len(exp) != nvars:
                    raise ValueError("exponent length %d != nvars %d" % (len(exp), nvars))
                if not _is_zero(coeff):
                    clean[exp] = coeff
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, nvars):
        return cls(nvars, {})

    @classmethod
    def const(cls, nvars, value):
        return cls(nvars, {(0,) * nvars: Fraction(value)})

    @classmethod
    def variable(cls, nvars, index):
        if not 0 <= index < nvars:
            raise ValueError("variable index out of range")
        exp = [0] * nvars
        exp[index] = 1
        return cls(nvars, {tuple(exp): Fraction(1)})

    @classmethod
    def monomial(cls, nvars, exp, coeff=Fraction(1)):
        return cls(nvars, {tuple(exp): coeff})

    # -- basic queries ------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self):
        if not self.terms:
            return True
        degs = {sum(e) for e in self.terms}
        return len(degs) == 1

    def homogeneous_components(self):
        """Map degree -> homogeneous part, omitting zero parts."""
        parts = {}
        for exp, coeff in self.terms.items():
            parts.setdefault(sum(exp), {})[exp] = coeff
        return {d: MPoly(self.nvars, t) for d, t in sorted(parts.items())}

    def coefficient(self, exp):
        return self.terms.get(tuple(exp), _ZERO)

    def constant_value(self):
        if self.degree() > 0:
            raise ValueError("not a constant polynomial")
        return self.terms.get((0,) * self.nvars, _ZERO)

    # -- arithmetic ----------------------------------------------------------

    def _require_same_vars(self, other):
        if self.nvars != other.nvars:
            raise ValueError("mismatched variable counts: %d vs %d" % (self.nvars, other.nvars))

    def __add__(self, other):
        self._require_same_vars(other)
        terms = dict(self.terms)
        for exp, coeff in other.terms.items():
            new = terms.get(exp, 0) + coeff
            if _is_zero(new):
                terms.pop(exp, None)
            else:
                terms[exp] = new
        return MPoly(self.nvars, terms)

    def __neg__(self):
        return MPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._require_same_vars(other)
        if len(self.terms) > len(other.terms):
            big, small = self.terms, other.terms
        else:
            big, small = other.terms, self.terms
        result = {}
        for e1, c1 in small.items():
            for e2, c2 in big.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                new = result.get(exp, 0) + c1 * c2
                if _is_zero(new):
                    result.pop(exp, None)
                else:
                    result[exp] = new
        return MPoly(self.nvars, result)

    def scale(self, c):
        if _is_zero(c):
            return MPoly.zero(self.nvars)
        return MPoly(self.nvars, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power")
        result = MPoly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def derivative(self, i):
        """Exact partial derivative with respect to variable i."""
        if not 0 <= i < self.nvars:
            raise ValueError("variable index out of range")
        terms = {}
        for exp, coeff in self.terms.items():
            k = exp[i]
            if k == 0:
                continue
            new = list(exp)
            new[i] = k - 1
            terms[tuple(new)] = coeff * k
        return MPoly(self.nvars, terms)

    def evaluate(self, point):
        """Evaluate at a tuple of rationals (used by tests and oracles)."""
        if len(point) != self.nvars:
            raise ValueError("point length mismatch")
        total = Fraction(0)
        for exp, coeff in self.terms.items():
            val = coeff
            for x, e in zip(point, exp):
                if e:
                    val = val * x**e
            total += val
        return total

    def substitute_variable(self, i, replacement):
        """Substitute `replacement` (an MPoly) for variable i."""
        self._require_same_vars(replacement)
        result = MPoly.zero(self.nvars)
        powers = {0: MPoly.const(self.nvars, 1)}
        for exp, coeff in sorted(self.terms.items()):
            k = exp[i]
            if k not in powers:
                p = max(j for j in powers if j <= k)
                cur = powers[p]
                while p < k:
                    cur = cur * replacement
                    p += 1
                    powers[p] = cur
            rest = list(exp)
            rest[i] = 0
            result = result + powers[k] * MPoly.monomial(self.nvars, rest, coeff)
        return result

    def lift(self, extra):
        """Same polynomial viewed in nvars + extra variables (appended)."""
        pad = (0,) * extra
        return MPoly(self.nvars + extra, {e + pad: c for e, c in self.terms.items()})

    # -- ordering and equality ----------------------------------------------

    def sorted_terms(self):
        """Terms in canonical (graded-lex descending) order."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def leading_term(self):
        if not self.terms:
            return None
        return max(self.terms.items(), key=lambda t: (sum(t[0]), t[0]))

    def __eq__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset((e, Fraction(c)) for e, c in self.terms.items())))

    def __repr__(self):
        names = ["x%d" % (i + 1) for i in range(self.nvars)]
        return "MPoly(%s)" % poly_to_string(self, names)


def monomial_basis(nvars, d):
    """All exponent vectors of total degree d, graded-lex descending.

    Length is C(nvars + d - 1, d).
    """
    if d < 0:
        raise ValueError("degree must be nonnegative")
    if nvars == 0:
        return [()] if d == 0 else []
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for k in range(remaining, -1, -1):
            rec(prefix + (k,), remaining - k, slots - 1)

    rec((), d, nvars)
    return out


def poly_divmod_linear(p, var_index, replacement):
    """Divide p by (x_i - r): return (quotient, remainder_poly).

    p == (x_i - r) * quotient + remainder, where remainder has no x_i.
    Synthetic division in x_i with polynomial coefficients; exact.
    """
    n = p.nvars
    by_power = {}
    for exp, coeff in p.terms.items():
        k = exp[var_index]
        rest = list(exp)
        rest[var_index] = 0
        by_power.setdefault(k, {})[tuple(rest)] = coeff
    if not by_power:
        return MPoly.zero(n), MPoly.zero(n)
    maxk = max(by_power)
    coeffs = [MPoly(n, by_power.get(k, {})) for k in range(maxk + 1)]
    quotient = MPoly.zero(n)
    carry = MPoly.zero(n)
    xi = MPoly.variable(n, var_index)
    for k in range(maxk, 0, -1):
        carry = coeffs[k] + carry
        quotient = quotient + carry * xi ** (k - 1)
        carry = carry * replacement
    remainder = coeffs[0] + carry
    return quotient, remainder


# ---------------------------------------------------------------------------
# parsing and printing
# ---------------------------------------------------------------------------

_NUMERIC = frozenset("0123456789")
_NAME_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_NAME_CHARS = _NAME_START | _NUMERIC


def _tokenize(text):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in "+-*^()/":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch in _NUMERIC:
            j = i
            while j < len(text) and text[j] in _NUMERIC:
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch in _NAME_START:
            j = i
            while j < len(text) and text[j] in _NAME_CHARS:
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError("unexpected character %r" % ch, position=i)
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over: expr -> term (('+'|'-') term)*,
    term -> factor ('*' factor)*, factor -> ('-')* atom ('^' int)?,
    atom -> number | name | '(' expr ')', number -> int ('/' int)?.
    """

    def __init__(self, text, varnames):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.varnames = list(varnames)
        self.index = {name: i for i, name in enumerate(self.varnames)}
        self.nvars = len(self.varnames)

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError("expected %r, found %r" % (kind, tok[1] or "end of input"), position=tok[2])
        return tok

    def parse(self):
        result = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError("unexpected %r" % tok[1], position=tok[2])
        return result

    def expr(self):
        sign = 1
        while self.peek()[0] in ("+", "-"):
            if self.advance()[0] == "-":
                sign = -sign
        result = self.term()
        if sign < 0:
            result = -result
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def term(self):
        result = self.factor()
        while self.peek()[0] == "*":
            self.advance()
            result = result * self.factor()
        return result

    def factor(self):
        sign = 1
        while self.peek()[0] == "-":
            self.advance()
            sign = -sign
        base = self.atom()
        if self.peek()[0] == "^":
            caret = self.advance()
            tok = self.peek()
            if tok[0] != "int":
                raise ParseError("exponent must be a nonnegative integer", position=caret[2] + 1)
            self.advance()
            base = base ** int(tok[1])
        return base if sign > 0 else -base

    def atom(self):
        tok = self.advance()
        if tok[0] == "int":
            value = Fraction(int(tok[1]))
            if self.peek()[0] == "/":
                self.advance()
                den = self.expect("int")
                if int(den[1]) == 0:
                    raise ParseError("zero denominator", position=den[2])
                value = value / int(den[1])
            return MPoly.const(self.nvars, value)
        if tok[0] == "name":
            if tok[1] not in self.index:
                raise UnknownVariableError("unknown variable %r" % tok[1], position=tok[2])
            return MPoly.variable(self.nvars, self.index[tok[1]])
        if tok[0] == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError("unexpected %r" % (tok[1] or "end of input"), position=tok[2])


def parse_poly(text, varnames):
    """Parse polynomial text over the declared variables into an MPoly."""
    return _Parser(text, varnames).parse()


def _format_coeff(c):
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)


def poly_to_string(p, varnames):
    """Canonical rendering; parse_poly(poly_to_string(p, v), v) == p."""
    if len(varnames) != p.nvars:
        raise ValueError("need %d variable names" % p.nvars)
    if p.is_zero():
        return "0"
    pieces = []
    for exp, coeff in p.sorted_terms():
        factors = []
        for name, e in zip(varnames, exp):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append("%s^%d" % (name, e))
        mag = abs(Fraction(coeff))
        if not factors:
            body = _format_coeff(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_format_coeff(mag)] + factors)
        pieces.append(("-" if coeff < 0 else "+", body))
    sign, body = pieces[0]
    text = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        text += " %s %s" % (sign, body)
    return text


# ---------------------------------------------------------------------------
# exact dense linear algebra over Q
# ---------------------------------------------------------------------------


class QMatrix:
    """Dense matrix of rationals with deterministic row reduction.

    The pivot rule is fixed: scan columns left to right, take the first
    nonzero entry below the current row, normalize the pivot to 1 and clear
    the whole column.  Every canonical output of the library (kernel bases,
    underdetermined solves, relative field bases) inherits determinism from
    this rule.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data):
        self.data = [list(row) for row in data]
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.data else 0
        for row in self.data:
            if len(row) != self.cols:
                raise ValueError("ragged rows")

    @classmethod
    def zero(cls, rows, cols):
        return cls([[Fraction(0)] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n):
        return cls([[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, columns):
        if not columns:
            return cls.zero(0, 0)
        rows = len(columns[0])
        return cls([[columns[j][i] for j in range(len(columns))] for i in range(rows)])

    def column(self, j):
        return [self.data[i][j] for i in range(self.rows)]

    def copy(self):
        return QMatrix(self.data)

    def transpose(self):
        return QMatrix([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def __eq__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and all(self.data[i][j] == other.data[i][j] for i in range(self.rows) for j in range(self.cols))
        )

    def __mul__(self, other):
        if isinstance(other, QMatrix):
            if self.cols != other.rows:
                raise ValueError("dimension mismatch in product")
            return QMatrix(
                [
                    [
                        sum((self.data[i][k] * other.data[k][j] for k in range(self.cols)), Fraction(0))
                        for j in range(other.cols)
                    ]
                    for i in range(self.rows)
                ]
            )
        return QMatrix([[v * other for v in row] for row in self.data])

    def __add__(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("dimension mismatch in sum")
        return QMatrix(
            [[self.data[i][j] + other.data[i][j] for j in range(self.cols)] for i in range(self.rows)]
        )

    def __sub__(self, other):
        return self + other * Fraction(-1)

    def apply(self, vector):
        if len(vector) != self.cols:
            raise ValueError("vector length mismatch")
        return [sum((row[j] * vector[j] for j in range(self.cols)), Fraction(0)) for row in self.data]

    def trace(self):
        if self.rows != self.cols:
            raise ValueError("trace of non-square matrix")
        return sum((self.data[i][i] for i in range(self.rows)), Fraction(0))

    def rref(self):
        """Reduced row echelon form; returns (rref_matrix, pivot_columns)."""
        m = [row[:] for row in self.data]
        pivots = []
        r = 0
        for c in range(self.cols):
            pivot_row = None
            for i in range(r, self.rows):
                if m[i][c] != 0:
                    pivot_row = i
                    break
            if pivot_row is None:
                continue
            m[r], m[pivot_row] = m[pivot_row], m[r]
            pv = m[r][c]
            if pv != 1:
                m[r] = [v / pv for v in m[r]]
            for i in range(self.rows):
                if i != r and m[i][c] != 0:
                    factor = m[i][c]
                    m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return QMatrix(m), pivots

    def rref_with_transform(self):
        """RREF with row-operation tracking: returns (R, pivots, T), R = T*A."""
        aug = QMatrix([row[:] + [Fraction(1 if i == j else 0) for j in range(self.rows)] for i, row in enumerate(self.data)])
        red, pivots_all = aug.rref()
        pivots = [c for c in pivots_all if c < self.cols]
        r_part = QMatrix([row[: self.cols] for row in red.data])
        t_part = QMatrix([row[self.cols:] for row in red.data])
        return r_part, pivots, t_part

    def rank(self):
        return len(self.rref()[1])

    def kernel_basis(self):
        """RREF-canonical kernel basis, one vector per free column."""
        red, pivots = self.rref()
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        basis = []
        for f in free:
            vec = [Fraction(0)] * self.cols
            vec[f] = Fraction(1)
            for r, p in enumerate(pivots):
                vec[p] = -red.data[r][f]
            basis.append(vec)
        return basis

    def solve(self, rhs):
        """Canonical solution of A x = rhs (free variables zero), or None."""
        if len(rhs) != self.rows:
            raise ValueError("rhs length mismatch")
        aug = QMatrix([row[:] + [rhs[i]] for i, row in enumerate(self.data)])
        red, pivots = aug.rref()
        if self.cols in pivots:
            return None
        x = [Fraction(0)] * self.cols
        for r, p in enumerate(pivots):
            x[p] = red.data[r][self.cols]
        return x

    def det(self):
        if self.rows != self.cols:
            raise ValueError("determinant of non-square matrix")
        m = [row[:] for row in self.data]
        n = self.rows
        det = Fraction(1)
        for c in range(n):
            pivot_row = None
            for i in range(c, n):
                if m[i][c] != 0:
                    pivot_row = i
                    break
            if pivot_row is None:
                return Fraction(0)
            if pivot_row != c:
                m[c], m[pivot_row] = m[pivot_row], m[c]
                det = -det
            det *= m[c][c]
            inv = 1 / m[c][c]
            for i in range(c + 1, n):
                if m[i][c] != 0:
                    factor = m[i][c] * inv
                    m[i] = [a - factor * b for a, b in zip(m[i], m[c])]
        return det

    def inverse(self):
        if self.rows != self.cols:
            raise ValueError("inverse of non-square matrix")
        n = self.rows
        aug = QMatrix([row[:] + [Fraction(1 if i == j else 0) for j in range(n)] for i, row in enumerate(self.data)])
        red, pivots = aug.rref()
        if pivots != list(range(n)):
            raise ValueError("matrix is singular")
        return QMatrix([row[n:] for row in red.data])

    def __repr__(self):
        return "QMatrix(%r)" % self.data


def solve_linear(a, rhs):
    return a.solve(rhs)


def kernel_basis(a):
    return a.kernel_basis()


def rank(a):
    return a.rank()


def char_poly(a):
    """Monic characteristic polynomial det(s*I - A) by Faddeev-LeVerrier."""
    if a.rows != a.cols:
        raise ValueError("characteristic polynomial of non-square matrix")
    n = a.rows
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    m = QMatrix.identity(n)
    for k in range(1, n + 1):
        am = a * m
        c = -am.trace() / k
        coeffs[n - k] = c
        m = am + QMatrix.identity(n) * c
    return QPolyUnivariate(coeffs)


# ---------------------------------------------------------------------------
# univariate polynomials over Q
# ---------------------------------------------------------------------------


class QPolyUnivariate:
    """Dense univariate polynomial over Q, coefficients ascending."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    @classmethod
    def zero(cls):
        return cls([])

    @classmethod
    def const(cls, c):
        return cls([c])

    @classmethod
    def from_roots(cls, roots):
        p = cls([Fraction(1)])
        for r in roots:
            p = p * cls([-Fraction(r), Fraction(1)])
        return p

    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def leading_coefficient(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other):
        if not isinstance(other, QPolyUnivariate):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        cs = [Fraction(0)] * n
        for i, c in enumerate(self.coeffs):
            cs[i] += c
        for i, c in enumerate(other.coeffs):
            cs[i] += c
        return QPolyUnivariate(cs)

    def __neg__(self):
        return QPolyUnivariate([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if self.is_zero() or other.is_zero():
            return QPolyUnivariate.zero()
        cs = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                cs[i + j] += a * b
        return QPolyUnivariate(cs)

    def scale(self, c):
        return QPolyUnivariate([v * c for v in self.coeffs])

    def monic(self):
        if self.is_zero():
            raise ValueError("zero polynomial has no monic form")
        lead = self.coeffs[-1]
        return self if lead == 1 else QPolyUnivariate([c / lead for c in self.coeffs])

    def evaluate(self, x):
        total = Fraction(0)
        for c in reversed(self.coeffs):
            total = total * x + c
        return total

    def compose_affine(self, a, b):
        """p(a*s + b), exact."""
        arg = QPolyUnivariate([Fraction(b), Fraction(a)])
        result = QPolyUnivariate.zero()
        for c in reversed(self.coeffs):
            result = result * arg + QPolyUnivariate.const(c)
        return result

    def deflate_root(self, r):
        """Divide by (s - r); requires p(r) == 0."""
        out = []
        carry = Fraction(0)
        for c in reversed(self.coeffs):
            carry = carry * r + c
            out.append(carry)
        if out and out[-1] != 0:
            raise ValueError("not a root")
        return QPolyUnivariate(list(reversed(out[:-1])))

    def to_string(self, var="s"):
        if self.is_zero():
            return "0"
        pieces = []
        for e in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[e]
            if c == 0:
                continue
            if e == 0:
                body = _format_coeff(abs(c))
            else:
                v = var if e == 1 else "%s^%d" % (var, e)
                body = v if abs(c) == 1 else "%s*%s" % (_format_coeff(abs(c)), v)
            pieces.append(("-" if c < 0 else "+", body))
        sign, body = pieces[0]
        text = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            text += " %s %s" % (sign, body)
        return text

    def __repr__(self):
        return "QPolyUnivariate(%s)" % self.to_string()


def _divisors(n):
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def rational_roots(p):
    """All rational roots with multiplicity: returns (roots, remainder).

    roots is a list of (root, multiplicity) sorted ascending; remainder is
    the rootless cofactor (constant iff p splits over Q).
    """
    if p.is_zero():
        raise ValueError("zero polynomial")
    work = p
    roots = []
    mult_zero = 0
    while not work.is_zero() and work.coeffs[0] == 0:
        work = QPolyUnivariate(work.coeffs[1:])
        mult_zero += 1
    if mult_zero:
        roots.append((Fraction(0), mult_zero))
    if work.degree() >= 1:
        den = lcm(*[c.denominator for c in work.coeffs])
        ints = [c * den for c in work.coeffs]
        a0 = int(ints[0])
        an = int(ints[-1])
        candidates = set()
        for pnum in _divisors(a0):
            for qden in _divisors(an):
                candidates.add(Fraction(pnum, qden))
                candidates.add(Fraction(-pnum, qden))
        for r in sorted(candidates):
            mult = 0
            while work.degree() >= 1 and work.evaluate(r) == 0:
                work = work.deflate_root(r)
                mult += 1
            if mult:
                roots.append((r, mult))
            if work.degree() < 1:
                break
    roots.sort(key=lambda t: t[0])
    return roots, work


class BPoly:
    """Monic polynomial together with its complete rational factorization.

    The product of the factors reproduces the polynomial exactly; creation
    fails with NonRationalSpectrumError when a non-rational root exists.
    """

    __slots__ = ("poly", "factors")

    def __init__(self, poly, factors):
        self.poly = poly
        self.factors = list(factors)

    @classmethod
    def from_poly(cls, p):
        if p.is_zero():
            raise ValueError("zero polynomial")
        monic = p.monic()
        roots, remainder = rational_roots(monic)
        if remainder.degree() >= 1:
            raise NonRationalSpectrumError(
                "polynomial does not split over Q: remaining factor %s" % remainder.to_string(),
                remainder=remainder.coeffs,
            )
        rebuilt = QPolyUnivariate.from_roots([r for r, m in roots for _ in range(m)])
        if rebuilt != monic:
            raise AssertionError("factorization failed to reproduce the polynomial")
        return cls(monic, roots)

    @classmethod
    def from_factors(cls, factors):
        factors = sorted(((Fraction(r), m) for r, m in factors), key=lambda t: t[0])
        poly = QPolyUnivariate.from_roots([r for r, m in factors for _ in range(m)])
        return cls(poly, factors)

    def roots_multiset(self):
        return tuple(sorted(r for r, m in self.factors for _ in range(m)))

    def degree(self):
        return self.poly.degree()

    def __eq__(self, other):
        if not isinstance(other, BPoly):
            return NotImplemented
        return self.factors == other.factors

    def to_string(self, var="s"):
        if not self.factors:
            return "1"
        pieces = []
        for root, mult in sorted(self.factors, key=lambda t: t[0]):
            if root == 0:
                base = var
            else:
                sign = "-" if root > 0 else "+"
                base = "(%s %s %s)" % (var, sign, _format_coeff(abs(root)))
            if root == 0 and mult > 1:
                base = "(%s)" % base
            pieces.append(base if mult == 1 else "%s^%d" % (base, mult))
        return "".join(pieces)

    def __repr__(self):
        return "BPoly(%s)" % self.to_string()


# ---------------------------------------------------------------------------
# rational eigenstructure (Jordan chains over Q)
# ---------------------------------------------------------------------------


class EigenChain:
    """One Jordan chain: vectors[0] is the eigenvector, vectors[-1] the top;
    (A - lambda) vectors[k] == vectors[k-1] and (A - lambda) vectors[0] == 0.
    """

    __slots__ = ("eigenvalue", "vectors")

    def __init__(self, eigenvalue, vectors):
        self.eigenvalue = eigenvalue
        self.vectors = vectors

    def __len__(self):
        return len(self.vectors)

    def __repr__(self):
        return "EigenChain(%s, length=%d)" % (self.eigenvalue, len(self.vectors))


class _SpanTracker:
    """Incremental RREF span membership for deterministic basis extension."""

    def __init__(self, dim):
        self.dim = dim
        self.rows = []
        self.pivots = []

    def reduce(self, vec):
        v = list(vec)
        for row, p in zip(self.rows, self.pivots):
            if v[p] != 0:
                factor = v[p]
                v = [a - factor * b for a, b in zip(v, row)]
        return v

    def add(self, vec):
        """Add vec to the span; returns True if it was independent."""
        v = self.reduce(vec)
        for p in range(self.dim):
            if v[p] != 0:
                pv = v[p]
                v = [a / pv for a in v]
                self.rows.append(v)
                self.pivots.append(p)
                return True
        return False

    def contains(self, vec):
        return all(c == 0 for c in self.reduce(vec))


def rational_eigenstructure(a):
    """Generalized eigenvector chains of a square rational matrix.

    Requires the characteristic polynomial to split over Q; raises
    NonRationalSpectrumError otherwise.  Output is deterministic: eigenvalues
    ascending, chains per eigenvalue by descending length, each chain listed
    from eigenvector to top, each top vector canonicalized from the
    RREF-canonical kernel bases.
    """
    if a.rows != a.cols:
        raise ValueError("eigenstructure of non-square matrix")
    n = a.rows
    cp = char_poly(a)
    roots, remainder = rational_roots(cp)
    if remainder.degree() >= 1:
        raise NonRationalSpectrumError(
            "characteristic polynomial does not split over Q: %s" % remainder.to_string(),
            remainder=remainder.coeffs,
        )
    result = []
    for lam, mult in roots:
        nmat = a - QMatrix.identity(n) * lam
        power = QMatrix.identity(n)
        kernels = [[]]
        k = 0
        while len(kernels[k]) < mult:
            if k > n:
                raise AssertionError("generalized eigenspace never reached its multiplicity")
            k += 1
            power = power * nmat
            kernels.append(power.kernel_basis())
        chains = []
        for height in range(k, 0, -1):
            # New chain tops at this height must be independent of
            # ker(N^(height-1)) together with the height-level members of
            # the longer chains already built.
            marker = _SpanTracker(n)
            for v in kernels[height - 1]:
                marker.add(v)
            for ch in chains:
                marker.add(ch[height - 1])
            for v in kernels[height]:
                if marker.add(v):
                    chain = [list(v)]
                    for _ in range(height - 1):
                        chain.append(nmat.apply(chain[-1]))
                    chain.reverse()
                    chains.append(chain)
        total = sum(len(c) for c in chains)
        if total != mult:
            raise AssertionError("Jordan chain construction incomplete for eigenvalue %s" % lam)
        result.append((lam, [EigenChain(lam, ch) for ch in chains]))
    return result


def binomial(n, k):
    return comb(n, k)
