"""Brieskorn-lattice calculus for a generic pair (f, h).

Classes of the lattice are written over the cyclic basis e_j = [f^(j-1) w1],
j = 1..n, where w1 is the canonical volume-derived generator; t acts as
multiplication by h and theta carries the twist of the differential.  A
single rewriting rule powers the whole module: for a relative field xi and
homogeneous g,

    [g * xi(f) * w1]  =  theta * [(xi(g) + trace(xi) * g) * w1].

Together with the deformation-algebra decomposition this reduces every
class to a unique normal form  sum gamma * theta^a t^b e_{e+1}  with
a + n*b + e equal to the degree.  The rule is exercised by well-definedness
and graded-dimension certificates in the test suite; its consequences
(residue matrix, both Bernstein-polynomial normalizations, the spectra at
theta = 0 and infinity) are pinned by the A_1, A_n and star-3 calibration
values enforced in `cli.calibration_selftest`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .defalg import _decompose_any, _decompose_reduced, build_pair
from .errors import WindowUnstableError
from .exactalg import (
    BPoly,
    MPoly,
    QMatrix,
    char_poly,
    monomial_basis,
    rational_eigenstructure,
)


# ---------------------------------------------------------------------------
# lattice elements and reduced classes
# ---------------------------------------------------------------------------


class LatticeElement:
    """A class sum_a theta^a p_a(x) * w1 with polynomial coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms):
        self.n = n
        self.terms = {a: p for a, p in terms.items() if not p.is_zero()}
        for a, p in self.terms.items():
            if a < 0:
                raise ValueError("theta exponents must be nonnegative")
            if p.nvars != n:
                raise ValueError("coefficient has wrong variable count")

    @classmethod
    def from_poly(cls, p, theta_power=0):
        return cls(p.nvars, {theta_power: p})

    def degree(self):
        degs = {a + p.degree() for a, p in self.terms.items()}
        if not degs:
            return -1
        if len(degs) > 1 or any(not p.is_homogeneous() for p in self.terms.values()):
            raise ValueError("element is not homogeneous")
        return degs.pop()


class ReducedClass:
    """Normal form sum gamma * theta^a t^b e_{e+1}; keys are (a, b, e).

    Negative theta exponents are allowed (they occur transiently in the
    t-connection); reductions of lattice elements always have a >= 0.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {}
        if coeffs:
            for key, c in coeffs.items():
                if c != 0:
                    self.coeffs[key] = c

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            new = out.get(key, 0) + c
            if new == 0:
                out.pop(key, None)
            else:
                out[key] = new
        return ReducedClass(out)

    def __sub__(self, other):
        return self + other.scale(Fraction(-1))

    def scale(self, c):
        if c == 0:
            return ReducedClass()
        return ReducedClass({k: v * c for k, v in self.coeffs.items()})

    def shift_theta(self, delta):
        return ReducedClass({(a + delta, b, e): c for (a, b, e), c in self.coeffs.items()})

    def specialize_theta_one(self):
        """Collapse theta to 1: returns {(b, e): coefficient}."""
        out = {}
        for (a, b, e), c in self.coeffs.items():
            key = (b, e)
            new = out.get(key, 0) + c
            if new == 0:
                out.pop(key, None)
            else:
                out[key] = new
        return out

    def restrict_t0(self):
        return ReducedClass({k: c for k, c in self.coeffs.items() if k[1] == 0})

    def __eq__(self, other):
        if not isinstance(other, ReducedClass):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __repr__(self):
        if not self.coeffs:
            return "ReducedClass(0)"
        bits = []
        for (a, b, e), c in sorted(self.coeffs.items()):
            bits.append("%s*th^%d t^%d e%d" % (c, a, b, e + 1))
        return "ReducedClass(%s)" % " + ".join(bits)


def _apply_fields(fields, multipliers):
    """sum_i (xi_i(g_i) + trace(xi_i) * g_i) for the rewriting step."""
    total = None
    for xi, g in zip(fields, multipliers):
        if g.is_zero():
            continue
        term = xi.apply(g)
        if xi.trace != 0:
            term = term + g.scale(xi.trace)
        total = term if total is None else total + term
    if total is None:
        return MPoly.zero(fields[0].n if fields else 0)
    return total


def _reduce_poly(pair, p, theta_offset=0):
    """Reduce [theta^offset p w1] to normal form; degree drops by one per
    rewriting step, so this terminates after deg p steps.

    The recursion runs over the row-reduced generator basis, which yields
    the same class as recursing over the original generators because the
    basis change is constant and the rewriting rule is linear in the
    (field, multiplier) pair.
    """
    out = {}
    level = theta_offset
    work = p
    while not work.is_zero():
        lam_map, quotients = _decompose_reduced(pair, work)
        for (b, e), lam in lam_map.items():
            key = (level, b, e)
            new = out.get(key, 0) + lam
            if new == 0:
                out.pop(key, None)
            else:
                out[key] = new
        if pair.reduced_fields:
            work = _apply_fields(pair.reduced_fields, quotients)
        else:
            work = MPoly.zero(pair.n)
        level += 1
    return ReducedClass(out)


def reduce_class(pair, element):
    """Normal form of a homogeneous lattice element."""
    element.degree()  # homogeneity validation
    total = ReducedClass()
    for a, p in sorted(element.terms.items()):
        total = total + _reduce_poly(pair, p, a)
    return total


# ---------------------------------------------------------------------------
# the f-action (theta-connection) and the saturated residue
# ---------------------------------------------------------------------------


@dataclass
class ConnectionData:
    """Companion-shaped f-action on the cyclic basis.

    last_column[j-1] maps (a, b) -> coefficient of theta^a t^b in the entry
    (j, n) of the f-action matrix; the other columns are the canonical
    shifts e_j -> e_{j+1}.  alpha[j-1] is the theta^(n+1-j) coefficient of
    entry (j, n) at t = 0, and residue is the constant matrix of the
    saturated lattice at t = 0.
    """

    n: int
    last_column: tuple
    alpha: tuple
    c_from_f: Fraction
    residue: QMatrix = field(repr=False, default=None)


def f_action_matrix(pair):
    """Compute the f-action column [f^n w1] and derived residue data."""
    n = pair.n
    reduced = _reduce_poly(pair, pair.f_power(n))
    column = [dict() for _ in range(n)]
    for (a, b, e), c in reduced.coeffs.items():
        j = e + 1
        if a + n * b != n + 1 - j:
            raise AssertionError(
                "f-action entry (%d, n) violates weighted homogeneity" % j
            )
        column[j - 1][(a, b)] = c
    alpha = tuple(column[j - 1].get((n + 1 - j, 0), Fraction(0)) for j in range(1, n + 1))
    c_from_f = column[0].get((0, 1), Fraction(0))
    conn = ConnectionData(
        n=n,
        last_column=tuple(column),
        alpha=alpha,
        c_from_f=c_from_f,
    )
    conn.residue = saturation_residue(conn)
    return conn


def saturation_residue(conn):
    """Residue matrix on the saturation basis e~_j = theta^(1-j) e_j.

    Column j holds the coordinates of (theta nabla) e~_j:
    e~_{j+1} + (1-j) e~_j for j < n, and sum_j alpha_j e~_j + (1-n) e~_n
    in the last column.
    """
    n = conn.n
    data = [[Fraction(0)] * n for _ in range(n)]
    for jj in range(n - 1):
        data[jj][jj] = Fraction(-jj)
        data[jj + 1][jj] = Fraction(1)
    for i in range(n):
        data[i][n - 1] += conn.alpha[i]
    data[n - 1][n - 1] += Fraction(1 - n)
    return QMatrix(data)


def _connection(pair):
    if getattr(pair, "_conn", None) is None:
        pair._conn = f_action_matrix(pair)
    return pair._conn


def bernstein_via_spectral(pair):
    """b_h(s) = n^{-n} * chi_R(n(s+1)), factored over its rational roots."""
    conn = _connection(pair)
    n = pair.n
    chi = char_poly(conn.residue)
    return BPoly.from_poly(chi.compose_affine(n, n).scale(Fraction(1, n**n)))


def spectral_polynomial(pair):
    """The spectral polynomial n^{-n} * chi_R(n s); satisfies
    b_h(s) = (spectral polynomial)(s + 1) identically."""
    conn = _connection(pair)
    n = pair.n
    chi = char_poly(conn.residue)
    return BPoly.from_poly(chi.compose_affine(n, 0).scale(Fraction(1, n**n)))


# ---------------------------------------------------------------------------
# the t-connection and the cyclic functional equation
# ---------------------------------------------------------------------------


class TConnection:
    """Exact symbolic action of t * nabla_{d/dt} on reduced classes.

    On theta^a [g w1] the action is theta-linear and equals
    (1/n) (deg(g) [g w1] - theta^{-1} [f g w1]); Laurent theta exponents
    occur in intermediate results and are kept symbolic.
    """

    def __init__(self, pair):
        self.pair = pair
        self.conn = _connection(pair)

    def _multiply_by_f(self, key):
        a, b, e = key
        n = self.pair.n
        if e + 1 <= n - 1:
            return ReducedClass({(a, b, e + 1): Fraction(1)})
        out = {}
        for j in range(1, n + 1):
            for (aa, bb), c in self.conn.last_column[j - 1].items():
                out[(a + aa, b + bb, j - 1)] = out.get((a + aa, b + bb, j - 1), 0) + c
        return ReducedClass(out)

    def apply(self, rc):
        n = self.pair.n
        total = ReducedClass()
        for key, gamma in rc.coeffs.items():
            a, b, e = key
            deg = n * b + e
            if deg:
                total = total + ReducedClass({key: gamma * Fraction(deg, n)})
            fpart = self._multiply_by_f(key).shift_theta(-1)
            total = total + fpart.scale(-gamma / n)
        return total


def t_connection(pair):
    return TConnection(pair)


@dataclass(frozen=True)
class CyclicCheck:
    ok: bool
    kappa: Fraction
    residual: dict


def verify_cyclic_equation(pair):
    """Check the functional equation of w1 on the slice theta = 1.

    Applies the spectral polynomial in t*nabla to w1 and compares with
    kappa * t * e_1 where kappa = (-1)^(n+1) c / n^n; the parity factor
    converts the decomposition constant c into the corner entry of the
    connection normal form (they differ by (-1)^n).  Returns the residual
    on failure.
    """
    n = pair.n
    b_spec = spectral_polynomial(pair)
    tconn = TConnection(pair)
    omega1 = ReducedClass({(0, 0, 0): Fraction(1)})
    iterates = [omega1]
    for _ in range(b_spec.poly.degree()):
        iterates.append(tconn.apply(iterates[-1]))
    total = ReducedClass()
    for k, coeff in enumerate(b_spec.poly.coeffs):
        if coeff != 0:
            total = total + iterates[k].scale(coeff)
    collapsed = total.specialize_theta_one()
    kappa = Fraction((-1) ** (n + 1)) * pair.c / Fraction(n**n)
    expected = {(1, 0): kappa}
    residual = dict(collapsed)
    for key, val in expected.items():
        new = residual.get(key, 0) - val
        if new == 0:
            residual.pop(key, None)
        else:
            residual[key] = new
    return CyclicCheck(ok=not residual, kappa=kappa, residual=residual)


# ---------------------------------------------------------------------------
# elementary sections and spectra
# ---------------------------------------------------------------------------


@dataclass
class SaturationFrame:
    """Eigen-adapted frame of the saturated lattice.

    Column i of P is the i-th generalized eigenvector (in e~ coordinates),
    eigenvalues ascending, chains from eigenvector to top; every lattice
    question about the filtrations reduces to n-dimensional linear algebra
    per theta level because e_j = theta^(j-1) e~_j is level-homogeneous.
    """

    n: int
    eigen: list
    p: QMatrix
    p_inv: QMatrix
    eigenvalue_of_column: tuple

    @classmethod
    def build(cls, conn):
        eigen = rational_eigenstructure(conn.residue)
        columns = []
        lam_of = []
        for lam, chains in eigen:
            for chain in chains:
                for vec in chain.vectors:
                    columns.append(vec)
                    lam_of.append(lam)
        p = QMatrix.from_columns(columns)
        return cls(
            n=conn.n,
            eigen=eigen,
            p=p,
            p_inv=p.inverse(),
            eigenvalue_of_column=tuple(lam_of),
        )

    def lattice_level_basis(self, m):
        """Basis (in frame coordinates) of span{e~_1 .. e~_m}."""
        m = max(0, min(m, self.n))
        return [self.p_inv.column(j) for j in range(m)]


def _coordinate_restrict(vectors, allowed):
    """Basis of the intersection of span(vectors) with the coordinate
    subspace supported on `allowed` indices."""
    if not vectors:
        return []
    nrows = len(vectors[0])
    forbidden = [i for i in range(nrows) if i not in allowed]
    if not forbidden:
        return [list(v) for v in vectors]
    mat = QMatrix([[v[i] for v in vectors] for i in forbidden])
    combos = mat.kernel_basis()
    out = []
    for combo in combos:
        vec = [sum((combo[k] * vectors[k][i] for k in range(len(vectors))), Fraction(0)) for i in range(nrows)]
        out.append(vec)
    return out


def _dim_span(vectors):
    if not vectors:
        return 0
    return QMatrix(vectors).rank()


@dataclass(frozen=True)
class Spectrum:
    """Multiset of rationals of total multiplicity n, sorted non-decreasing."""

    values: tuple

    @classmethod
    def from_multiplicities(cls, mults):
        values = []
        for v in sorted(mults):
            values.extend([v] * mults[v])
        return cls(tuple(values))

    def multiplicities(self):
        out = {}
        for v in self.values:
            out[v] = out.get(v, 0) + 1
        return out

    def symmetric_about(self, center):
        mults = self.multiplicities()
        doubled = 2 * Fraction(center)
        return all(mults.get(doubled - v, 0) == m for v, m in mults.items())

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return "Spectrum(%s)" % ", ".join(str(v) for v in self.values)


def _candidate_exponents(frame, window):
    cands = set()
    for lam in {l for l, _ in frame.eigen}:
        for k in range(window + 1):
            cands.add(lam + k)
    return sorted(cands)


def _zero_spectrum_at_window(frame, window):
    n = frame.n
    lam = frame.eigenvalue_of_column
    candidates = _candidate_exponents(frame, window)
    mults = {}
    for idx, alpha in enumerate(candidates):
        total = 0
        for k in range(window + 1):
            at_least = [i for i in range(n) if lam[i] + k >= alpha]
            above = [i for i in range(n) if lam[i] + k > alpha]
            e_level = frame.lattice_level_basis(k + 1)
            theta_e_level = frame.lattice_level_basis(k)
            va_e = _coordinate_restrict(e_level, set(at_least))
            va_theta_e = _coordinate_restrict(theta_e_level, set(at_least))
            vabove_e = _coordinate_restrict(e_level, set(above))
            d1 = _dim_span(va_e)
            d2 = _dim_span(va_theta_e + vabove_e)
            total += d1 - d2
        if total:
            mults[alpha] = total
    return mults


def _infinity_spectrum_at_window(frame, window):
    n = frame.n
    lam = frame.eigenvalue_of_column
    candidates = _candidate_exponents(frame, window)
    jumps = {}
    previous = 0
    for beta in candidates:
        g_val = 0
        for k in range(window + 1):
            at_most = [i for i in range(n) if lam[i] + k <= beta]
            e_level = frame.lattice_level_basis(k + 1)
            theta_e_level = frame.lattice_level_basis(k)
            wb_e = _coordinate_restrict(e_level, set(at_most))
            g_val += _dim_span(wb_e + theta_e_level) - _dim_span(theta_e_level)
        if g_val > previous:
            jumps[beta] = g_val - previous
            previous = g_val
    return jumps


_MAX_WINDOW_WIDENINGS = 4


def _stable_window_value(frame, compute):
    """Run `compute` at the policy window and verify one-step stability,
    widening at most four times before raising WindowUnstableError."""
    eigs = [l for l, _ in frame.eigen]
    spread = max(eigs) - min(eigs) if eigs else Fraction(0)
    window = frame.n + ceil(spread) + 1
    current = compute(frame, window)
    for _ in range(_MAX_WINDOW_WIDENINGS):
        nxt = compute(frame, window + 1)
        if nxt == current:
            return current
        window += 1
        current = nxt
    raise WindowUnstableError(
        "filtration dimensions kept changing up to window %d" % (window + 1)
    )


def _frame(pair):
    if getattr(pair, "_sat_frame", None) is None:
        pair._sat_frame = SaturationFrame.build(_connection(pair))
    return pair._sat_frame


def spectrum_at_zero(pair):
    """V-filtration spectrum of the lattice at theta = 0."""
    frame = _frame(pair)
    mults = _stable_window_value(frame, _zero_spectrum_at_window)
    spec = Spectrum.from_multiplicities(mults)
    if len(spec) != pair.n:
        raise AssertionError("spectrum at zero has total multiplicity %d != n" % len(spec))
    return spec


def spectrum_at_infinity(pair):
    """Spectral numbers: jumps at theta = infinity on lattice generators."""
    frame = _frame(pair)
    mults = _stable_window_value(frame, _infinity_spectrum_at_window)
    spec = Spectrum.from_multiplicities(mults)
    if len(spec) != pair.n:
        raise AssertionError("spectrum at infinity has total multiplicity %d != n" % len(spec))
    return spec


@dataclass(frozen=True)
class ElementaryPiece:
    exponent: Fraction
    eigenvalue: Fraction
    theta_shift: int
    coordinates: tuple  # full frame-coordinate vector of the piece


def elementary_decomposition(pair):
    """Each generator e_j = theta^(j-1) e~_j split into elementary pieces.

    The piece of e_j at eigenvalue lambda is theta^(j-1) times the
    lambda-component of e~_j in the generalized eigenbasis; its exponent is
    lambda + j - 1.  Reconstruction is verified exactly.
    """
    frame = _frame(pair)
    n = frame.n
    decomposition = []
    for j in range(1, n + 1):
        coords = frame.p_inv.column(j - 1)
        pieces = []
        for lam in sorted({l for l, _ in frame.eigen}):
            component = [
                coords[i] if frame.eigenvalue_of_column[i] == lam else Fraction(0)
                for i in range(n)
            ]
            if any(c != 0 for c in component):
                pieces.append(
                    ElementaryPiece(
                        exponent=lam + j - 1,
                        eigenvalue=lam,
                        theta_shift=j - 1,
                        coordinates=tuple(component),
                    )
                )
        total = [sum((p.coordinates[i] for p in pieces), Fraction(0)) for i in range(n)]
        rebuilt = frame.p.apply(total)
        expected = [Fraction(1 if i == j - 1 else 0) for i in range(n)]
        if rebuilt != expected:
            raise AssertionError("elementary decomposition failed to reconstruct e_%d" % j)
        decomposition.append(tuple(pieces))
    return decomposition


# ---------------------------------------------------------------------------
# theorem-level checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremReport:
    roots_in_interval: bool
    symmetric_about_minus_one: bool
    minus_one_only_integer_root: bool
    infinity_symmetry: bool
    integer_block_present: bool
    integer_block_k: int
    residue_trace_zero: bool
    residue_roots_match: bool
    conjecture_zero_symmetric: bool

    def hard_checks_pass(self):
        return (
            self.roots_in_interval
            and self.symmetric_about_minus_one
            and self.minus_one_only_integer_root
            and self.infinity_symmetry
            and self.integer_block_present
            and self.residue_trace_zero
            and self.residue_roots_match
        )


def theorem_checks(pair):
    """All theorem-level booleans; the conjecture entry is reported, never
    asserted."""
    n = pair.n
    b = bernstein_via_spectral(pair)
    roots = b.roots_multiset()
    roots_in_interval = all(Fraction(-2) < r < 0 for r in roots)
    mults = {}
    for r in roots:
        mults[r] = mults.get(r, 0) + 1
    symmetric = all(mults.get(Fraction(-2) - r, 0) == m for r, m in mults.items())
    only_int = all(r == -1 for r in roots if r.denominator == 1)

    spec_inf = spectrum_at_infinity(pair)
    vals = spec_inf.values
    inf_symmetry = all(vals[i] + vals[n - 1 - i] == n - 1 for i in range(n))

    value_set = set(vals)
    block_k = None
    for k in range((n - 1) // 2 + 1):
        if all(Fraction(j) in value_set for j in range(k, n - k)):
            block_k = k
            break

    conn = _connection(pair)
    trace_zero = conn.residue.trace() == 0
    chi = char_poly(conn.residue)
    chi_roots = BPoly.from_poly(chi).roots_multiset()
    mapped = tuple(sorted(n * (r + 1) for r in roots))
    roots_match = chi_roots == mapped

    spec_zero = spectrum_at_zero(pair)
    conjecture = spec_zero.symmetric_about(Fraction(n - 1, 2))

    return TheoremReport(
        roots_in_interval=roots_in_interval,
        symmetric_about_minus_one=symmetric,
        minus_one_only_integer_root=only_int,
        infinity_symmetry=inf_symmetry,
        integer_block_present=block_k is not None,
        integer_block_k=block_k if block_k is not None else -1,
        residue_trace_zero=trace_zero,
        residue_roots_match=roots_match,
        conjecture_zero_symmetric=conjecture,
    )


def f_independence_check(divisor, f1, f2):
    """True iff the spectral numbers and the Bernstein polynomial agree for
    the two generic forms (the constant c may differ)."""
    p1 = build_pair(divisor, f1)
    p2 = build_pair(divisor, f2)
    if not (p1.generic and p2.generic):
        raise ValueError("both forms must be generic")
    return (
        spectrum_at_infinity(p1) == spectrum_at_infinity(p2)
        and bernstein_via_spectral(p1) == bernstein_via_spectral(p2)
    )


# ---------------------------------------------------------------------------
# graded-dimension certificate
# ---------------------------------------------------------------------------


def _target_count(n, d):
    """#{(a, b, e) : a + n*b + e = d, a, b >= 0, 0 <= e <= n - 1}."""
    total = 0
    for b in range(d // n + 1):
        total += min(n - 1, d - n * b) + 1
    return total


def _reduction_cache(pair, dmax):
    """Normal forms of all monomial classes of degree <= dmax, bottom-up.

    Accumulation is done on raw dictionaries; this loop touches every
    monomial up to degree n + 2 on the large catalog entries.
    """
    n = pair.n
    cache = {}
    for delta in range(dmax + 1):
        for mono in monomial_basis(n, delta):
            p = MPoly.monomial(n, mono)
            lam_map, quotients = _decompose_reduced(pair, p)
            out = {}
            for (b, e), lam in lam_map.items():
                out[(0, b, e)] = lam
            tail = (
                _apply_fields(pair.reduced_fields, quotients)
                if pair.reduced_fields
                else MPoly.zero(n)
            )
            if not tail.is_zero():
                for exp, coeff in tail.terms.items():
                    for (a, b, e), c in cache[exp].coeffs.items():
                        key = (a + 1, b, e)
                        val = out.get(key, 0) + c * coeff
                        if val == 0:
                            out.pop(key, None)
                        else:
                            out[key] = val
            cache[mono] = ReducedClass(out)
    return cache


def _cached_reduce(cache, p):
    out = {}
    for exp, coeff in p.terms.items():
        for key, c in cache[exp].coeffs.items():
            val = out.get(key, 0) + c * coeff
            if val == 0:
                out.pop(key, None)
            else:
                out[key] = val
    return ReducedClass(out)


def verify_graded_dimensions(pair, dmax=None):
    """Certify dim(degree-d classes) = #{(a,b,e) : a+nb+e = d} for d <= dmax.

    Two-sided certificate avoiding any large rank computation: the
    reduction map is (i) well defined on every relation generator (residual
    exactly zero, which bounds the dimension from below) and (ii) sends the
    spanning classes theta^a h^b f^e w1 to distinct normal forms while
    rewriting every monomial class (which bounds it from above, since each
    rewriting step is an explicit relation combination with verified
    reconstruction).  Relations at higher theta levels are theta shifts of
    level-zero ones, so level zero suffices.
    """
    n = pair.n
    if dmax is None:
        dmax = n + 2
    cache = _reduction_cache(pair, dmax)

    residual_checks = 0
    for gens_index, l_form in enumerate(pair.jacobian_gens):
        xi = pair.divisor.relative_fields[gens_index]
        for delta in range(dmax):
            for mono in monomial_basis(n, delta):
                g = MPoly.monomial(n, mono)
                left = _cached_reduce(cache, g * l_form)
                rewritten = xi.apply(g)
                if xi.trace != 0:
                    rewritten = rewritten + g.scale(xi.trace)
                right = _cached_reduce(cache, rewritten).shift_theta(1)
                if left != right:
                    return {
                        "certified": False,
                        "failure": {
                            "generator": gens_index,
                            "monomial": mono,
                        },
                    }
                residual_checks += 1

    surjective = True
    for d in range(dmax + 1):
        for b in range(d // n + 1):
            for e in range(min(n - 1, d - n * b) + 1):
                a = d - n * b - e
                target = ReducedClass({(0, b, e): Fraction(1)})
                got = _cached_reduce(cache, pair.h_power(b) * pair.f_power(e))
                if got != target:
                    surjective = False
                del a

    targets = {d: _target_count(n, d) for d in range(dmax + 1)}
    return {
        "certified": surjective,
        "residual_checks": residual_checks,
        "surjective": surjective,
        "targets": targets,
        "max_degree": dmax,
    }
