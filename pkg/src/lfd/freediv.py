"""Divisor analysis: linear logarithmic vector fields and freeness.

A linear vector field is encoded by its n x n rational matrix A, acting as
xi = sum_{i,j} A[i][j] * x_j * d/dx_i, so xi(x_i) is row i of A applied to
the coordinate vector.  The solution space of xi(h) = lambda * h over the
pairs (A, lambda) is computed by exact linear algebra on the monomial basis
of degree deg(h); the Euler field (A = identity, lambda = deg h) always
lies in it for homogeneous h.

Freeness is certified at the level of linear fields only: an n-variable
divisor is accepted exactly when n linear fields exist whose coefficient
matrix has determinant equal to a nonzero rational multiple of h (Saito's
criterion).  General free divisors with non-linear basis fields are
rejected by design.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import (
    DegreeMismatchError,
    NotClosedError,
    NotLinearFreeError,
    WrongCountError,
)
from .exactalg import MPoly, QMatrix, monomial_basis


@dataclass(frozen=True)
class LinearDerivation:
    """A linear vector field with certified action on h.

    matrix[i][j] is the coefficient of x_j in xi(x_i); h_eigenvalue is the
    rational lambda with xi(h) = lambda * h (re-verified on construction);
    trace is the divergence.
    """

    matrix: tuple
    h_eigenvalue: Fraction
    trace: Fraction

    @classmethod
    def from_matrix(cls, matrix, h, h_eigenvalue):
        # entries are kept in whatever exact rational type they arrive in;
        # gmpy2.mpq and Fraction mix transparently
        rows = tuple(tuple(row) for row in matrix)
        deriv = cls(rows, Fraction(h_eigenvalue), sum((rows[i][i] for i in range(len(rows))), Fraction(0)))
        applied = deriv.apply(h)
        if applied != h.scale(deriv.h_eigenvalue):
            raise ValueError("field does not satisfy xi(h) = lambda * h")
        return deriv

    @property
    def n(self):
        return len(self.matrix)

    @cached_property
    def _entries(self):
        return [
            (i, j, c)
            for i in range(self.n)
            for j, c in enumerate(self.matrix[i])
            if c != 0
        ]

    def apply(self, p):
        """xi(p) = sum over nonzero A[i][j] of x_j * dp/dx_i; preserves degree.

        Single term-level accumulation; each input term (exp, c) contributes
        c * exp[i] * A[i][j] at exponent exp - e_i + e_j.
        """
        n = self.n
        if p.nvars != n:
            raise ValueError("polynomial has %d variables, field has %d" % (p.nvars, n))
        entries = self._entries
        out = {}
        for exp, coeff in p.terms.items():
            for i, j, c in entries:
                k = exp[i]
                if k == 0:
                    continue
                new = list(exp)
                new[i] = k - 1
                new[j] += 1
                key = tuple(new)
                val = out.get(key, 0) + coeff * k * c
                if val == 0:
                    out.pop(key, None)
                else:
                    out[key] = val
        return MPoly(n, out)

    def coefficient_forms(self):
        """The linear forms xi(x_i), i = 1..n, as MPoly values."""
        n = self.n
        forms = []
        for i in range(n):
            terms = {}
            for j, c in enumerate(self.matrix[i]):
                if c != 0:
                    exp = [0] * n
                    exp[j] = 1
                    terms[tuple(exp)] = c
            forms.append(MPoly(n, terms))
        return forms

    def flat(self):
        return [self.matrix[i][j] for i in range(self.n) for j in range(self.n)]

    def commutator_matrix(self, other):
        """Matrix commutator [A, B] = AB - BA (spans match the field bracket)."""
        a = QMatrix([list(r) for r in self.matrix])
        b = QMatrix([list(r) for r in other.matrix])
        return a * b - b * a


@dataclass(frozen=True)
class DivisorData:
    """A certified linear free divisor.

    relative_fields annihilate h; together with the Euler field they form a
    Saito basis whose determinant is unit * h.
    """

    n: int
    h: MPoly
    euler: LinearDerivation
    relative_fields: tuple
    saito_unit: Fraction
    all_fields: tuple = field(repr=False, default=())


def _field_system(h):
    """Rows of the linear system xi(h) = lambda*h over (A flat, lambda)."""
    n = h.nvars
    deg = h.degree()
    columns = []
    for i in range(n):
        dp = h.derivative(i)
        for j in range(n):
            columns.append(dp * MPoly.variable(n, j))
    columns.append(-h)
    monomials = monomial_basis(n, deg)
    index = {m: r for r, m in enumerate(monomials)}
    rows = [[Fraction(0)] * (n * n + 1) for _ in monomials]
    for c, poly in enumerate(columns):
        for exp, coeff in poly.terms.items():
            rows[index[exp]][c] = Fraction(coeff)
    return QMatrix(rows)


def linear_log_fields(h):
    """Basis of the space of linear fields with xi(h) = lambda * h.

    The basis is RREF-canonical over the flattened (matrix, lambda)
    coordinates.  For homogeneous h the Euler field is always in the span.
    """
    if not h.is_homogeneous() or h.is_zero():
        raise ValueError("h must be homogeneous and nonzero")
    n = h.nvars
    system = _field_system(h)
    fields = []
    for vec in system.kernel_basis():
        matrix = [vec[i * n : (i + 1) * n] for i in range(n)]
        fields.append(LinearDerivation.from_matrix(matrix, h, vec[n * n]))
    return fields


def poly_matrix_det(entries):
    """Determinant of a square matrix of MPoly entries.

    Dynamic programming over column subsets (Laplace expansion along rows),
    which avoids the factorial blowup of naive expansion.
    """
    n = len(entries)
    if n == 0:
        raise ValueError("empty matrix")
    nvars = entries[0][0].nvars
    minors = {(): MPoly.const(nvars, 1)}
    for r in range(n):
        new_minors = {}
        for cols, minor in minors.items():
            if minor.is_zero():
                continue
            for c in range(n):
                if c in cols:
                    continue
                entry = entries[r][c]
                if entry.is_zero():
                    continue
                pos = sum(1 for x in cols if x < c)
                key = tuple(sorted(cols + (c,)))
                term = entry * minor
                if (r + pos) % 2:
                    term = -term
                if key in new_minors:
                    new_minors[key] = new_minors[key] + term
                else:
                    new_minors[key] = term
        minors = new_minors
        if not minors:
            return MPoly.zero(nvars)
    return minors.get(tuple(range(n)), MPoly.zero(nvars))


def saito_check(h, fields):
    """Saito's criterion for the supplied n fields.

    Returns {"ok": bool, "unit": Fraction or None, "determinant": MPoly}.
    The determinant is det of the matrix whose column k carries the
    coefficient linear forms of field k.
    """
    n = h.nvars
    if len(fields) != n:
        raise WrongCountError("Saito check needs exactly %d fields, got %d" % (n, len(fields)))
    entries = [[None] * n for _ in range(n)]
    for k, fld in enumerate(fields):
        forms = fld.coefficient_forms()
        for i in range(n):
            entries[i][k] = forms[i]
    det = poly_matrix_det(entries)
    if det.is_zero() or h.is_zero():
        return {"ok": False, "unit": None, "determinant": det}
    lead_h = h.leading_term()
    unit = det.coefficient(lead_h[0]) / lead_h[1]
    if unit != 0 and det == h.scale(unit):
        return {"ok": True, "unit": unit, "determinant": det}
    return {"ok": False, "unit": None, "determinant": det}


def build_divisor(h):
    """Analyze h and certify it as a linear free divisor.

    Pipeline: solve for all linear logarithmic fields, split off the Euler
    field, canonicalize an RREF basis of the lambda = 0 subspace, and run
    the Saito determinant check.  Dimension deficits are reported before
    degree mismatches so that inputs like x*y*(x+y) in two variables fail
    with the informative NotLinearFreeError.
    """
    if not h.is_homogeneous() or h.is_zero():
        raise NotLinearFreeError("h must be a nonzero homogeneous polynomial")
    n = h.nvars
    fields = linear_log_fields(h)
    if len(fields) < n:
        raise NotLinearFreeError(
            "space of linear logarithmic fields has dimension %d < %d" % (len(fields), n),
            dimension=len(fields),
        )
    if h.degree() != n:
        raise DegreeMismatchError(
            "deg h = %d but the ambient space has %d variables" % (h.degree(), n),
            degree=h.degree(),
            nvars=n,
        )
    if len(fields) > n:
        raise NotLinearFreeError(
            "space of linear logarithmic fields has dimension %d > %d" % (len(fields), n),
            dimension=len(fields),
        )
    # lambda = 0 subspace inside the solution span, RREF-canonical over the
    # flattened matrix coordinates.
    span_rows = [f.flat() + [f.h_eigenvalue] for f in fields]
    lam_col = QMatrix([[row[-1]] for row in span_rows]).transpose()
    combos = lam_col.kernel_basis()
    relative_rows = []
    for combo in combos:
        vec = [sum(combo[k] * span_rows[k][c] for k in range(len(fields))) for c in range(n * n)]
        relative_rows.append(vec)
    if relative_rows:
        reduced, _ = QMatrix(relative_rows).rref()
        relative_rows = [row for row in reduced.data if any(v != 0 for v in row)]
    if len(relative_rows) != n - 1:
        raise NotLinearFreeError(
            "relative field space has dimension %d, expected %d" % (len(relative_rows), n - 1),
            relative_dimension=len(relative_rows),
        )
    relative = tuple(
        LinearDerivation.from_matrix([row[i * n : (i + 1) * n] for i in range(n)], h, 0)
        for row in relative_rows
    )
    euler = LinearDerivation.from_matrix(QMatrix.identity(n).data, h, n)
    check = saito_check(h, [euler] + list(relative))
    if not check["ok"]:
        raise NotLinearFreeError("Saito determinant is not a unit multiple of h")
    return DivisorData(
        n=n,
        h=h,
        euler=euler,
        relative_fields=relative,
        saito_unit=check["unit"],
        all_fields=tuple(fields),
    )


@dataclass(frozen=True)
class ReductivityReport:
    bracket_closed: bool
    center_dimension: int
    derived_dimension: int
    decomposition_holds: bool
    trace_form_nondegenerate: bool
    reductive: bool
    caveat: str = (
        "Lie-algebra proxy: reductivity is certified for the span of the "
        "supplied linear fields only, not for the full symmetry group"
    )


def reductivity_probe(fields):
    """Reductive-or-not verdict for the Lie algebra spanned by the fields.

    Checks, in order: closure of the span under the matrix commutator
    (NotClosedError if violated), the decomposition g = center + [g, g]
    (direct and spanning), and nondegeneracy of the trace form on [g, g].
    """
    if not fields:
        raise ValueError("need at least one field")
    n = fields[0].n
    dim_amb = n * n
    basis = QMatrix([f.flat() for f in fields])
    reduced, pivots = basis.rref()
    basis_rows = [row for row in reduced.data if any(v != 0 for v in row)]
    g_dim = len(basis_rows)
    span = QMatrix(basis_rows)

    def in_span(flat_vec):
        return QMatrix(basis_rows + [flat_vec]).rank() == g_dim

    def flat(qm):
        return [qm.data[i][j] for i in range(n) for j in range(n)]

    mats = [QMatrix([list(r) for r in f.matrix]) for f in fields]
    commutators = []
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            c = mats[a] * mats[b] - mats[b] * mats[a]
            cf = flat(c)
            if any(v != 0 for v in cf):
                if not in_span(cf):
                    raise NotClosedError(
                        "commutator of fields %d and %d leaves the span" % (a + 1, b + 1)
                    )
                commutators.append(cf)

    if commutators:
        derived_reduced, _ = QMatrix(commutators).rref()
        derived_rows = [row for row in derived_reduced.data if any(v != 0 for v in row)]
    else:
        derived_rows = []
    derived_dim = len(derived_rows)

    # center: combinations of the span basis commuting with every basis element
    basis_mats = [QMatrix([row[i * n : (i + 1) * n] for i in range(n)]) for row in basis_rows]
    center_system = []
    for b in basis_mats:
        rows = [[Fraction(0)] * g_dim for _ in range(dim_amb)]
        for k, a in enumerate(basis_mats):
            cf = flat(a * b - b * a)
            for r in range(dim_amb):
                rows[r][k] = cf[r]
        center_system.extend(rows)
    center_combos = QMatrix(center_system).kernel_basis() if g_dim else []
    center_rows = []
    for combo in center_combos:
        vec = [sum(combo[k] * basis_rows[k][c] for k in range(g_dim)) for c in range(dim_amb)]
        center_rows.append(vec)
    center_dim = len(center_rows)

    joint = center_rows + derived_rows
    if g_dim == 0:
        decomposition = True
    elif center_dim + derived_dim != g_dim:
        decomposition = False
    else:
        decomposition = QMatrix(joint).rank() == g_dim

    if derived_dim:
        derived_mats = [QMatrix([row[i * n : (i + 1) * n] for i in range(n)]) for row in derived_rows]
        gram = QMatrix(
            [[(x * y).trace() for y in derived_mats] for x in derived_mats]
        )
        nondegenerate = gram.det() != 0
    else:
        nondegenerate = True

    return ReductivityReport(
        bracket_closed=True,
        center_dimension=center_dim,
        derived_dimension=derived_dim,
        decomposition_holds=decomposition,
        trace_form_nondegenerate=nondegenerate,
        reductive=decomposition and nondegenerate,
    )
