"""Shift operators and shift-structure tests on polynomials in x, y, z.

Shift equivalence is decided through the stabiliser of a polynomial under
translations: the set of complex vectors s with p(v + s) = p(v) is a linear
subspace, namely the kernel of the directional-derivative map.  The solution
set of p = q(v + s) is a coset of that subspace, so one rational base point
plus integer lattice arithmetic yields all integer witnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import sympy as sp

from .errors import FactorizationError, InputError
from .ratfun import (
    canonical_poly,
    deg,
    dispersion_set,
    int_primitive,
    monic_yz,
    prim_y,
    x,
    y,
    z,
)


def shift_expr(f, l=0, m=0, n=0):
    """Apply the shift x -> x+l, y -> y+m, z -> z+n."""
    f = sp.sympify(f)
    subs = {}
    if l:
        subs[x] = x + l
    if m:
        subs[y] = y + m
    if n:
        subs[z] = z + n
    if not subs:
        return f
    return sp.expand(f.subs(subs, simultaneous=True)) if f.is_polynomial(x, y, z) \
        else sp.cancel(f.subs(subs, simultaneous=True))


def apply_shift(f, sv):
    """Apply a shift vector (l, m, n)."""
    l, m, n = sv
    return shift_expr(f, l, m, n)


# ---------------------------------------------------------------------------
# integer linear algebra helpers


def _hnf_solve(A, c):
    """All integer solutions of A s = c.

    A: list of integer rows, c: list of integers.  Returns (particular, basis)
    where particular is an integer solution or None, and basis generates the
    integer kernel of A.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    rows = [list(map(int, r)) for r in A]
    rhs = list(map(int, c))
    U = [[1 if i == k else 0 for k in range(n)] for i in range(n)]

    def col_op(j1, j2, a, b, cc, d):
        # (col j1, col j2) <- (a*col j1 + b*col j2, cc*col j1 + d*col j2)
        for r in rows:
            v1, v2 = r[j1], r[j2]
            r[j1], r[j2] = a * v1 + b * v2, cc * v1 + d * v2
        for r in U:
            v1, v2 = r[j1], r[j2]
            r[j1], r[j2] = a * v1 + b * v2, cc * v1 + d * v2

    pivot_col = 0
    pivots = []
    for i in range(m):
        if pivot_col >= n:
            break
        # clear row i to a single pivot among columns pivot_col..n-1
        jnz = [j for j in range(pivot_col, n) if rows[i][j] != 0]
        if not jnz:
            continue
        j0 = jnz[0]
        for j in jnz[1:]:
            a, b = rows[i][j0], rows[i][j]
            g = math.gcd(a, b)
            # extended gcd: u*a + v*b = g
            u, v = _egcd(a, b)
            col_op(j0, j, u, v, -b // g, a // g)
        if j0 != pivot_col:
            col_op(pivot_col, j0, 0, 1, 1, 0)
        pivots.append((i, pivot_col))
        pivot_col += 1
    # solve triangular system for pivot variables
    t = [None] * n
    for i, j in pivots:
        s = rhs[i]
        for jj in range(j):
            if t[jj] is not None and rows[i][jj] != 0:
                s -= rows[i][jj] * t[jj]
        if rows[i][j] == 0 or s % rows[i][j] != 0:
            return None, _kernel_from(U, n, [j for _, j in pivots])
        t[j] = s // rows[i][j]
    # consistency of non-pivot rows
    piv_rows = {i for i, _ in pivots}
    free_cols = [j for j in range(n) if all(j != pj for _, pj in pivots)]
    for j in free_cols:
        t[j] = 0
    for i in range(m):
        if i in piv_rows:
            continue
        s = sum(rows[i][j] * t[j] for j in range(n))
        if s != rhs[i]:
            return None, _kernel_from(U, n, [j for _, j in pivots])
    part = [sum(U[k][j] * t[j] for j in range(n)) for k in range(n)]
    return part, _kernel_from(U, n, [j for _, j in pivots])


def _kernel_from(U, n, pivot_cols):
    free = [j for j in range(n) if j not in pivot_cols]
    return [tuple(U[k][j] for k in range(n)) for j in free]


def _egcd(a, b):
    """(u, v) with u*a + v*b = gcd(a, b)."""
    old_r, r = a, b
    old_u, u = 1, 0
    old_v, v = 0, 1
    while r:
        qq = old_r // r
        old_r, r = r, old_r - qq * r
        old_u, u = u, old_u - qq * u
        old_v, v = v, old_v - qq * v
    return old_u, old_v


def _minimize_coset(s, basis, key):
    """Deterministic small representative of s + lattice(basis) under key."""
    if not basis:
        return tuple(s)
    k = len(basis)
    # real least-squares projection, then search a small integer box around it
    B = sp.Matrix([list(b) for b in basis]).T
    sv = sp.Matrix(list(s))
    try:
        tstar = (B.T * B).solve(-(B.T * sv))
        center = [int(sp.floor(v + sp.Rational(1, 2))) for v in tstar]
    except Exception:
        center = [0] * k
    best = None
    for offs in product(range(-2, 3), repeat=k):
        tvec = [center[i] + offs[i] for i in range(k)]
        cand = tuple(s[i] + sum(tvec[j] * basis[j][i] for j in range(k))
                     for i in range(len(s)))
        kk = key(cand)
        if best is None or kk < best[0]:
            best = (kk, cand)
    return best[1]


# ---------------------------------------------------------------------------
# stabiliser cosets


def _coeff_matrix(polys, gens):
    """Integer matrix whose columns are the given polynomials' coefficients."""
    monos = set()
    Ps = []
    for p in polys:
        P = sp.Poly(sp.expand(p), *gens)
        Ps.append(P)
        monos |= set(P.monoms())
    monos = sorted(monos)
    rows = []
    for mono in monos:
        rows.append([int(P.coeff_monomial(mono) or 0) for P in Ps])
    return rows


def _stab_matrix(q, shift_vars):
    """Integer matrix M with M s = 0  iff  q is invariant under translation by s.

    q must be in canonical integer-coefficient form.
    """
    grads = [sp.expand(sp.diff(q, v)) for v in shift_vars]
    return _coeff_matrix(grads, (x, y, z))


def _shift_coset(p, q, shift_vars):
    """Solve p = q(shift by s) over the rationals.

    Returns (s0, M) where s0 is one rational solution vector and M the
    integer matrix whose kernel is the stabiliser subspace, or None.
    """
    p = sp.expand(p)
    q = sp.expand(q)
    nv = len(shift_vars)
    if p == q:
        s0 = tuple(sp.Integer(0) for _ in range(nv))
        return s0, _stab_matrix(q, shift_vars)
    # quick degree / top-form rejection
    for v in (x, y, z):
        if deg(p, v) != deg(q, v):
            return None
    M = _stab_matrix(q, shift_vars)
    Mm = sp.Matrix(M) if M else sp.zeros(1, nv)
    V = Mm.nullspace()
    # pivot columns of the basis matrix; unknowns live on the non-pivot coords
    if V:
        B = sp.Matrix([list(v.T) for v in V])
        _, piv = B.rref()
        piv = set(piv)
    else:
        piv = set()
    free_idx = [i for i in range(nv) if i not in piv]
    dummies = {i: sp.Dummy(f"s{i}") for i in free_idx}
    subs = {}
    for i, v in enumerate(shift_vars):
        if i in dummies:
            subs[v] = v + dummies[i]
    qs = sp.expand(q.subs(subs, simultaneous=True))
    diff = sp.expand(p - qs)
    if diff == 0 and not free_idx:
        return tuple(sp.Integer(0) for _ in range(nv)), M
    gens = [x, y, z]
    eqs = sp.Poly(diff, *gens).coeffs() if diff != 0 else []
    unknowns = [dummies[i] for i in free_idx]
    if not unknowns:
        return None if eqs else (tuple(sp.Integer(0) for _ in range(nv)), M)
    sols = sp.solve(eqs, unknowns, dict=True) if eqs else [{}]
    for sol in sols:
        vals = []
        ok = True
        for i in range(nv):
            if i in dummies:
                val = sp.nsimplify(sol.get(dummies[i], sp.Integer(0)))
                if val.free_symbols or not val.is_rational:
                    ok = False
                    break
                vals.append(sp.Rational(val))
            else:
                vals.append(sp.Integer(0))
        if not ok:
            continue
        # verify
        check = {v: v + vals[i] for i, v in enumerate(shift_vars) if vals[i] != 0}
        if sp.expand(p - q.subs(check, simultaneous=True)) == 0:
            return tuple(vals), M
    return None


def _integer_witnesses(p, q, shift_vars):
    """(particular integer witness, lattice basis) for p = q(v+s), or None."""
    coset = _shift_coset(p, q, shift_vars)
    if coset is None:
        return None
    s0, M = coset
    if not M:
        # no constraints: q constant in shift vars (cannot happen for nonconstant q)
        M = [[0] * len(shift_vars)]
    c = [sum(sp.Rational(M[i][j]) * s0[j] for j in range(len(s0))) for i in range(len(M))]
    if any(not v.is_integer for v in c):
        return None
    part, basis = _hnf_solve(M, [int(v) for v in c])
    if part is None:
        return None
    return tuple(part), basis


def shift_equiv_yz(p, q):
    """Witness (m, n) with p = sigma_y^m sigma_z^n (q), or None.

    When several witnesses exist the one with the smallest (|m|, |n|, m, n)
    is returned.
    """
    pc = canonical_poly(p)
    qc = canonical_poly(q)
    w = _integer_witnesses(pc, qc, (y, z))
    if w is None:
        return None
    part, basis = w
    key = lambda s: (abs(s[0]), abs(s[1]), s[0], s[1])
    m, n = _minimize_coset(part, basis, key)
    return int(m), int(n)


def shift_equiv_xyz(p, q):
    """Witness (l, m, n) with p = sigma_x^l sigma_y^m sigma_z^n (q), or None.

    Smallest nonnegative l is preferred, then small (m, n).
    """
    pc = canonical_poly(p)
    qc = canonical_poly(q)
    w = _integer_witnesses(pc, qc, (x, y, z))
    if w is None:
        return None
    part, basis = w
    key = lambda s: (0 if s[0] >= 0 else 1, abs(s[0]), abs(s[1]), abs(s[2]), s[1], s[2])
    l, m, n = _minimize_coset(part, basis, key)
    return int(l), int(m), int(n)


def min_x_period(d, certified=True):
    """Smallest xi >= 1 with sigma_x^xi(d) = sigma_y^zeta sigma_z^eta(d).

    Returns (xi, zeta, eta) or None when no positive x-period exists.
    Requires d to be certified irreducible.
    """
    if not certified:
        raise FactorizationError(
            "cannot compute the x-period of an uncertified factor; "
            "supply a factored denominator")
    dc = canonical_poly(d)
    M = _stab_matrix(dc, (x, y, z))
    if not M:
        return None
    _, basis = _hnf_solve(M, [0] * len(M))
    if not any(b[0] != 0 for b in basis):
        return None
    # combine basis vectors into one whose first component is the gcd
    acc = None
    cur = 0
    for b in basis:
        if b[0] == 0:
            continue
        if acc is None:
            acc, cur = b, b[0]
            continue
        u, v = _egcd(cur, b[0])
        acc = tuple(u * acc[i] + v * b[i] for i in range(3))
        cur = u * cur + v * b[0]
    if cur < 0:
        acc = tuple(-a for a in acc)
        cur = -cur
    xi = cur
    # reduce the tail modulo the sublattice with first component zero
    sub = [b for b in basis if b[0] == 0]
    for b in basis:
        if b[0] != 0:
            k = b[0] // xi
            e = tuple(b[i] - k * acc[i] for i in range(3))
            if any(e):
                sub.append(e)
    red = _minimize_coset(acc, sub, lambda s: (abs(s[1]), abs(s[2]), s[1], s[2]))
    # stabiliser vector (xi, a, b) means sigma_x^xi(d) = sigma_y^{-a} sigma_z^{-b}(d)
    return int(red[0]), -int(red[1]), -int(red[2])


def is_shift_free(p, step=1):
    """True if gcd(p, sigma_y^{step*l}(p)) = 1 for every integer l != 0."""
    p = sp.expand(sp.sympify(p))
    if step <= 0:
        raise InputError("shift step must be positive")
    if deg(p, y) <= 0:
        return True
    num, _ = sp.fraction(sp.cancel(sp.together(p)))
    disp = dispersion_set(num, num, y)
    return not any(s != 0 and s % step == 0 for s in disp)


# ---------------------------------------------------------------------------
# integer linearity


@dataclass(frozen=True)
class IntLinType:
    """d = profile(alpha*y + beta*z) with integers alpha, beta, beta > 0, gcd 1."""

    alpha: int
    beta: int
    profile: sp.Expr  # polynomial in Zsym (and x)


Zsym = sp.Symbol("Z")


def integer_linear_type_yz(d):
    """Detect d(x, y, z) = p(alpha*y + beta*z) and return its type, else None."""
    d = sp.expand(sp.sympify(d))
    dy = sp.expand(sp.diff(d, y))
    dz = sp.expand(sp.diff(d, z))
    if dz == 0:
        return None  # positive z-degree is required of remainder denominators
    if dy == 0:
        alpha, beta = 0, 1
    else:
        ratio = sp.cancel(dy / dz)
        if ratio.free_symbols & {y, z} or not ratio.is_rational:
            return None
        fr = sp.Rational(ratio)
        alpha, beta = int(fr.p), int(fr.q)
        if beta < 0:
            alpha, beta = -alpha, -beta
    if sp.expand(beta * dy - alpha * dz) != 0:
        return None
    profile = sp.expand(d.subs({y: 0, z: sp.Rational(1, beta) * Zsym}))
    if sp.expand(profile.subs(Zsym, alpha * y + beta * z) - d) != 0:
        return None
    return IntLinType(alpha=alpha, beta=beta, profile=profile)


def integer_linear_xy(b):
    """True if every irreducible factor of b in C[x,y] has the form P(l*x + m*y)."""
    b = sp.sympify(b)
    num, _ = sp.fraction(sp.cancel(sp.together(b)))
    num = sp.expand(num)
    if num.free_symbols & {z}:
        raise InputError("integer_linear_xy expects a polynomial in x and y")
    if deg(num, y) <= 0:
        return True
    for base, _m in sp.factor_list(num)[1]:
        if deg(base, x) <= 0 or deg(base, y) <= 0:
            continue  # univariate factors are trivially of this shape
        bx = sp.expand(sp.diff(base, x))
        by = sp.expand(sp.diff(base, y))
        ratio = sp.cancel(bx / by)
        if ratio.free_symbols or not ratio.is_rational:
            return False
        fr = sp.Rational(ratio)
        l, m = int(fr.p), int(fr.q)
        if sp.expand(m * bx - l * by) != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# the difference isomorphism phi


def phi_map(alpha, beta, f):
    """phi(y) = beta*y, phi(z) = z/beta - alpha*y; intertwines sigma_y with
    tau = sigma_y^beta sigma_z^(-alpha)."""
    if beta == 0:
        raise InputError("phi requires beta != 0")
    f = sp.sympify(f)
    return sp.cancel(f.subs({y: beta * y, z: sp.Rational(1, beta) * z - alpha * y},
                            simultaneous=True))


def phi_inverse(alpha, beta, f):
    """Inverse of phi_map: y -> y/beta, z -> beta*z + alpha*y."""
    if beta == 0:
        raise InputError("phi requires beta != 0")
    f = sp.sympify(f)
    return sp.cancel(f.subs({y: sp.Rational(1, beta) * y, z: beta * z + alpha * y},
                            simultaneous=True))


def coeffs_in_Z(a, alpha, beta):
    """Coefficients of a(y, z) written as a polynomial in Z = alpha*y + beta*z.

    Returns a list [c_0, c_1, ...] with a = sum c_i * (alpha*y+beta*z)**i and
    each c_i in F[y].
    """
    a = sp.expand(sp.sympify(a))
    if beta == 0:
        raise InputError("coeffs_in_Z requires beta != 0")
    rew = sp.expand(a.subs(z, sp.Rational(1, beta) * (Zsym - alpha * y)))
    P = sp.Poly(rew, Zsym)
    return [sp.expand(sp.cancel(P.nth(k))) for k in range(P.degree() + 1)]
