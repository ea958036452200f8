"""Exact arithmetic kernel for rational functions in y, z over F = Q(x).

All objects are carried by sympy expressions.  Polynomials are normalised to
primitive integer-coefficient form with a positive leading coefficient in the
pure lex order z > y > x; rational functions are kept cancelled with the
denominator in that normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp
from sympy.polys.matrices import DomainMatrix

from .errors import FactorizationError, InputError

x, y, z = sp.symbols("x y z")

_LEX_GENS = (y, z, x)


def normalized(f):
    """Canonical cancelled form of a rational function."""
    return sp.cancel(sp.together(sp.sympify(f)))


def eq(f, g):
    """Exact equality of rational functions."""
    return sp.cancel(sp.together(sp.sympify(f) - sp.sympify(g))) == 0


def _lead_sign(p):
    """Sign of the leading rational coefficient of p in lex order z > y > x."""
    syms = sorted(p.free_symbols, key=sp.default_sort_key)
    gens = [g for g in _LEX_GENS if g in syms] + [s for s in syms if s not in _LEX_GENS]
    if not gens:
        return 1 if p.is_positive else (-1 if p.is_negative else 1)
    P = sp.Poly(p, *gens)
    lc = P.LC(order="lex")
    if lc.free_symbols:
        return _lead_sign(lc)
    return 1 if lc > 0 else -1


def int_primitive(p):
    """Write polynomial p = c * P with P primitive over Z and positive lead.

    Returns (c, P) where c is a rational (or rational function of symbols not
    in x,y,z) unit and P has integer content 1 and positive leading
    coefficient in lex order z > y > x.
    """
    p = sp.expand(sp.sympify(p))
    if p == 0:
        return sp.Integer(1), sp.Integer(0)
    syms = sorted(p.free_symbols, key=sp.default_sort_key)
    gens = [g for g in _LEX_GENS if g in syms] + [s for s in syms if s not in _LEX_GENS]
    if not gens:
        return p, sp.Integer(1)
    P = sp.Poly(p, *gens)
    cont, prim = P.primitive()
    sign = _lead_sign(prim.as_expr())
    return sp.Rational(cont) * sign if not sp.sympify(cont).free_symbols else cont * sign, sp.expand(sign * prim.as_expr())


def canonical_poly(p):
    """Primitive positive-lead integer form of p (unit discarded)."""
    return int_primitive(p)[1]


def fraction(f):
    """Cancelled (num, den) with den primitive, integer, positive lead."""
    num, den = sp.fraction(sp.cancel(sp.together(sp.sympify(f))))
    c, dprim = int_primitive(den)
    return sp.expand(sp.cancel(num / c)), dprim


def deg(p, v):
    p = sp.expand(sp.sympify(p))
    if p == 0:
        return -sp.oo
    return sp.degree(p, v)


def _field_over(e, gen):
    """Coefficient field for Poly in gen: fractions of the other symbols."""
    others = sorted((sp.sympify(e).free_symbols | {x}) - {gen}, key=sp.default_sort_key)
    if not others:
        return sp.QQ
    return sp.QQ.frac_field(*others)


def poly_in(e, gen, extra=()):
    """Poly of e in the single generator gen over the fraction field of the rest."""
    e = sp.sympify(e)
    syms = e.free_symbols | set(extra) | {x}
    others = sorted(syms - {gen}, key=sp.default_sort_key)
    dom = sp.QQ.frac_field(*others) if others else sp.QQ
    return sp.Poly(e, gen, domain=dom)


def monic_in(p, gen):
    """(lc, monic) of p viewed in F(...)[gen]."""
    P = poly_in(p, gen)
    lc = P.LC()
    lc_expr = lc.as_expr() if hasattr(lc, "as_expr") else sp.sympify(lc)
    return lc_expr, sp.expand(sp.cancel(p / lc_expr))


def monic_yz(p):
    """(lc, monic) of p in F[y,z] under pure lex y < z (z most significant)."""
    expr = sp.expand(sp.sympify(p))
    others = sorted((expr.free_symbols | {x}) - {y, z}, key=sp.default_sort_key)
    dom = sp.QQ.frac_field(*others) if others else sp.QQ
    P = sp.Poly(expr, y, z, domain=dom)
    lc = P.LC(order="lex")
    lc_expr = lc.as_expr() if hasattr(lc, "as_expr") else sp.sympify(lc)
    return lc_expr, sp.expand(sp.cancel(expr / lc_expr))


def mpoly_gcd(p, q):
    """Gcd in F[y,z] (F = Q(x)), normalised monic under pure lex y < z."""
    p = sp.expand(sp.sympify(p))
    q = sp.expand(sp.sympify(q))
    if p == 0 and q == 0:
        return sp.Integer(0)
    if p == 0:
        return monic_yz(q)[1]
    if q == 0:
        return monic_yz(p)[1]
    g = sp.gcd(sp.together(p), sp.together(q))
    g = sp.expand(g)
    # strip factors free of y and z (units of F[y,z])
    num, _ = sp.fraction(sp.cancel(g))
    parts = sp.factor_list(num)
    kept = sp.Integer(1)
    for base, mult in parts[1]:
        if deg(base, y) > 0 or deg(base, z) > 0:
            kept *= base ** mult
    if kept == 1:
        return sp.Integer(1)
    return monic_yz(sp.expand(kept))[1]


def prim_y(p):
    """Primitive part of p in C[x][y]: divide out the C[x]-content of the y-coefficients."""
    p = sp.sympify(p)
    if p == 0:
        raise InputError("prim_y of the zero polynomial is undefined")
    num, _ = sp.fraction(sp.cancel(sp.together(p)))
    num = sp.expand(num)
    if deg(num, y) <= 0:
        return sp.Integer(1)
    P = sp.Poly(num, y)
    cont = sp.Integer(0)
    for c in P.all_coeffs():
        cont = sp.gcd(cont, c)
    res = sp.expand(sp.cancel(num / cont))
    return int_primitive(res)[1]


def antidiff_poly(p, v):
    """Polynomial G with G(v+1) - G(v) = p, for p polynomial in v.

    Coefficients of p may be arbitrary rational functions of the other
    variables.  G is normalised with zero constant term.
    """
    p = sp.sympify(p)
    if p == 0:
        return sp.Integer(0)
    P = sp.Poly(p, v)
    d = P.degree()
    pc = [P.nth(k) for k in range(d + 1)]  # ascending
    g = [sp.Integer(0)] * (d + 2)  # g[i] = coeff of v**i in G
    for k in range(d, -1, -1):
        s = sp.Integer(0)
        for i in range(k + 2, d + 2):
            s += g[i] * sp.binomial(i, k)
        g[k + 1] = sp.cancel((pc[k] - s) / (k + 1))
    return sp.Add(*[g[i] * v**i for i in range(1, d + 2)])


def dispersion_set(p, q, v=y):
    """All integers s with gcd(p(v), q(v+s)) of positive degree in v."""
    p = sp.expand(sp.sympify(p))
    q = sp.expand(sp.sympify(q))
    if deg(p, v) <= 0 or deg(q, v) <= 0:
        return set()
    t = sp.Dummy("t")
    R = sp.resultant(p, q.subs(v, v + t), v)
    R = sp.expand(R)
    if R == 0:
        # common factor free of v; dispersion is all of Z -- not meaningful here
        raise InputError("dispersion of polynomials with a common factor free of the variable")
    num, _ = sp.fraction(sp.cancel(sp.together(R)))
    shifts = set()
    for base, _m in sp.factor_list(sp.expand(num))[1]:
        base = sp.expand(base)
        if deg(base, t) != 1:
            continue
        b1 = base.coeff(t, 1)
        b0 = base.coeff(t, 0)
        if b1.free_symbols or b0.free_symbols:
            continue
        root = sp.cancel(-b0 / b1)
        if root.is_Integer:
            shifts.add(int(root))
    # verify: keep only shifts with a genuine common factor
    out = set()
    for s in shifts:
        if deg(sp.gcd(p, q.subs(v, v + s)), v) > 0:
            out.add(s)
    return out


# ---------------------------------------------------------------------------
# factored denominators


@dataclass(frozen=True)
class Factor:
    base: sp.Expr
    mult: int
    certified: bool = True


@dataclass(frozen=True)
class FactoredDen:
    """Denominator as unit * prod(base**mult); bases pairwise coprime, primitive,
    monic in the pure lex order y < z whenever they involve z."""

    unit: sp.Expr
    factors: tuple = ()

    def product(self):
        p = self.unit
        for f in self.factors:
            p *= f.base ** f.mult
        return sp.expand(p)

    def all_certified(self):
        return all(f.certified for f in self.factors)


def _sort_factors(factors):
    return tuple(sorted(factors, key=lambda f: (int(deg(f.base, z) if deg(f.base, z) != -sp.oo else 0),
                                                int(deg(f.base, y) if deg(f.base, y) != -sp.oo else 0),
                                                sp.default_sort_key(f.base))))


def factor_best_effort(p):
    """Factor a denominator polynomial over Q into certified irreducible factors.

    Factors free of both y and z are collected into the unit.  Factors with a
    positive z-degree are made monic under pure lex y < z; factors in y only
    are left primitive with positive lead.
    """
    p = sp.expand(sp.sympify(p))
    if p == 0:
        raise InputError("cannot factor the zero denominator")
    num, den_rest = sp.fraction(sp.cancel(sp.together(p)))
    if den_rest != 1:
        raise InputError("denominator must be a polynomial")
    coeff, parts = sp.factor_list(sp.expand(num))
    unit = sp.sympify(coeff)
    factors = []
    for base, mult in parts:
        base = sp.expand(base)
        if deg(base, y) <= 0 and deg(base, z) <= 0:
            unit *= base ** mult
            continue
        lc, base = int_primitive(base)
        unit *= lc ** mult
        factors.append(Factor(base=base, mult=int(mult), certified=True))
    return FactoredDen(unit=sp.cancel(unit), factors=_sort_factors(factors))


def factored_den_from_product(pairs, den=None, certified=True):
    """Build a FactoredDen from caller-supplied (base, mult) pairs.

    Validates square-freeness of each base and pairwise coprimality, and that
    the product matches ``den`` up to a unit free of y and z when given.
    """
    unit = sp.Integer(1)
    factors = []
    for base, mult in pairs:
        base = sp.expand(sp.sympify(base))
        if deg(base, y) <= 0 and deg(base, z) <= 0:
            unit *= base ** mult
            continue
        if sp.degree(sp.gcd(base, sp.diff(base, y)), y) > 0 or (
            deg(base, z) > 0 and sp.degree(sp.gcd(base, sp.diff(base, z)), z) > 0
        ):
            raise FactorizationError(f"factor {base} is not square-free")
        lc, base = int_primitive(base)
        unit *= lc ** mult
        factors.append(Factor(base=base, mult=int(mult), certified=certified))
    for i in range(len(factors)):
        for k in range(i + 1, len(factors)):
            if mpoly_gcd(factors[i].base, factors[k].base) != 1:
                raise FactorizationError(
                    f"factors {factors[i].base} and {factors[k].base} are not coprime")
    fd = FactoredDen(unit=sp.cancel(unit), factors=_sort_factors(factors))
    if den is not None:
        quot = sp.cancel(sp.expand(sp.sympify(den)) / fd.product())
        if deg(quot, y) > 0 or deg(quot, z) > 0 or sp.denom(quot).free_symbols & {y, z}:
            raise FactorizationError("product of supplied factors does not match the denominator")
        fd = FactoredDen(unit=sp.cancel(fd.unit * quot), factors=fd.factors)
    return fd


# ---------------------------------------------------------------------------
# partial fractions with respect to z


@dataclass(frozen=True)
class PFTerm:
    numer: sp.Expr          # in F[y,z]
    cof: sp.Expr            # extra denominator factor in F[y]
    base_index: int
    power: int

    @property
    def expr(self):
        return self.numer / self.cof


def _crt_split(num_poly, parts):
    """Split num/prod(parts) = sum c_i/parts[i] for pairwise coprime Polys."""
    total = parts[0]
    for P in parts[1:]:
        total = total * P
    out = []
    for P in parts:
        other = sp.div(total, P)[0]
        inv = sp.invert(other, P)
        ci = (num_poly * inv) % P
        out.append(ci)
    return out


def pf_z_terms(f, fd):
    """Partial fractions of f with respect to z over the field F(y).

    Returns (poly_part, terms) where poly_part is polynomial in z with
    coefficients in F(y), and terms is a list of (a, b, base_index, power)
    with a in F[y,z], deg_z(a) < deg_z(base), and b in F[y] monic.
    """
    f = sp.cancel(sp.together(sp.sympify(f)))
    if f == 0:
        return sp.Integer(0), []
    num, den = fraction(f)
    if not fd.all_certified():
        raise FactorizationError(
            "denominator factorization is not certified irreducible; "
            "supply a factored denominator")
    quot = sp.cancel(den / fd.product())
    if sp.simplify(quot).free_symbols & {z} or deg(sp.numer(quot), z) > 0:
        raise FactorizationError("supplied factorization does not match the denominator")
    zidx = [i for i, fac in enumerate(fd.factors) if deg(fac.base, z) > 0]
    syms = sorted((num.free_symbols | den.free_symbols | {x, y}) - {z}, key=sp.default_sort_key)
    dom = sp.QQ.frac_field(*syms)
    Pnum = sp.Poly(num, z, domain=dom)
    Pden = sp.Poly(den, z, domain=dom)
    q, r = sp.div(Pnum, Pden)
    poly_part = sp.cancel(q.as_expr())
    if r == 0:
        return poly_part, []
    if not zidx:
        # denominator free of z: proper part has z-degree < 0, impossible unless r=0
        return sp.cancel(poly_part + r.as_expr() / den), []
    cof_all = sp.cancel(den / sp.prod([fd.factors[i].base ** fd.factors[i].mult for i in zidx]))
    parts = [sp.Poly(sp.expand(fd.factors[i].base ** fd.factors[i].mult), z, domain=dom) for i in zidx]
    rnum = sp.Poly(sp.cancel(r.as_expr() / cof_all), z, domain=dom)
    pieces = _crt_split(rnum, parts) if len(parts) > 1 else [rnum % parts[0]]
    terms = []
    for idx, ci in zip(zidx, pieces):
        base = fd.factors[idx].base
        mult = fd.factors[idx].mult
        Pbase = sp.Poly(base, z, domain=dom)
        rem = ci
        stack = []
        for k in range(mult, 0, -1):
            rem, low = sp.div(rem, Pbase)
            stack.append((k, low))
        for k, cnum in stack:
            if cnum == 0:
                continue
            a_num, b_den = fraction(cnum.as_expr())
            lc, b_monic = monic_in(b_den, y) if deg(b_den, y) > 0 else (b_den, sp.Integer(1))
            a = sp.expand(sp.cancel(a_num / lc))
            terms.append((a, b_monic, idx, k))
    return poly_part, terms


def partial_fractions_z(f, fd):
    """Public partial-fraction decomposition against a factored denominator.

    The z-free factors of the denominator are additionally split by partial
    fractions in y, so each term carries a single z-free cofactor.
    """
    poly_part, raw = pf_z_terms(f, fd)
    terms = []
    for a, b, idx, k in raw:
        if deg(b, y) <= 0:
            terms.append(PFTerm(sp.expand(sp.cancel(a / b)), sp.Integer(1), idx, k))
            continue
        # split a/b across the irreducible factors of b in F[y]
        bfac = sp.factor_list(b)
        parts = [sp.Poly(base ** mult, y, domain=_field_over(base, y)) for base, mult in bfac[1]]
        unit = sp.sympify(bfac[0])
        dom = parts[0].domain
        anum = sp.Poly(sp.cancel(a / unit), y, domain=dom)
        bden = sp.Poly(sp.cancel(b / unit), y, domain=dom)
        q, r = sp.div(anum, bden)
        if q != 0:
            terms.append(PFTerm(sp.expand(sp.cancel(q.as_expr())), sp.Integer(1), idx, k))
        if r == 0:
            continue
        pieces = _crt_split(r, parts) if len(parts) > 1 else [r % parts[0]]
        for P, ci in zip(parts, pieces):
            if ci == 0:
                continue
            terms.append(PFTerm(sp.expand(ci.as_expr()), sp.expand(P.as_expr()), idx, k))
    return poly_part, terms


# ---------------------------------------------------------------------------
# exact linear algebra over F = Q(x)


def field_sum(terms):
    """Exact sum of rational expressions, computed in a fraction field (much
    faster than together/cancel on large sums).  Terms sharing a denominator
    are merged by polynomial addition first; the rest by balanced pairwise
    field addition.  Returns the sum in lowest terms as a sympy expression."""
    terms = [sp.sympify(t) for t in terms]
    syms = {x, y, z}
    for t in terms:
        syms |= t.free_symbols
    F = sp.QQ.frac_field(*sorted(syms, key=sp.default_sort_key))
    buckets = {}
    for t in terms:
        n, d = sp.fraction(sp.together(t))
        d = sp.expand(d)
        if d in buckets:
            buckets[d] += sp.expand(n)
        else:
            buckets[d] = sp.expand(n)
    items = sorted(((d, n) for d, n in buckets.items() if n != 0),
                   key=lambda dn: sp.default_sort_key(dn[0]))
    vals = [F.from_sympy(n) / F.from_sympy(d) for d, n in items]
    if not vals:
        return sp.Integer(0)
    while len(vals) > 1:
        vals = [vals[i] + vals[i + 1] if i + 1 < len(vals) else vals[i]
                for i in range(0, len(vals), 2)]
    return F.to_sympy(vals[0])


def sum_is_zero(terms):
    """Exact check that a sum of rational expressions vanishes.

    Summands are split at top-level additions, then partitioned into
    connected components linked by shared denominator factors; each component
    is summed independently and only the (much smaller) component values are
    combined for the final zero test."""
    flat = []
    for t in terms:
        flat.extend(sp.Add.make_args(sp.sympify(t)))
    supports = []
    for t in flat:
        _n, d = sp.fraction(sp.together(t))
        keys = frozenset(int_primitive(base)[1]
                         for base in d.as_powers_dict()
                         if base.free_symbols)
        supports.append(keys)
    parent = {}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for keys in supports:
        for k in keys:
            parent.setdefault(k, k)
        ks = list(keys)
        for k in ks[1:]:
            parent[find(ks[0])] = find(k)
    comps = {}
    polypart = []
    for t, keys in zip(flat, supports):
        if not keys:
            polypart.append(t)
        else:
            comps.setdefault(find(next(iter(keys))), []).append(t)
    partials = [field_sum(ts) for ts in comps.values()]
    return field_sum(partials + polypart) == 0


def _clear_vector(vec):
    """Scale a rational-function vector to content-free integer polynomials."""
    vec = [sp.together(sp.cancel(v)) for v in vec]
    dens = [sp.fraction(v)[1] for v in vec]
    L = dens[0]
    for d in dens[1:]:
        L = sp.lcm(L, d)
    cleared = [sp.expand(v * L) for v in vec]
    g = sp.Integer(0)
    for c in cleared:
        g = sp.gcd(g, c)
    if g != 0:
        cleared = [sp.expand(sp.cancel(c / g)) for c in cleared]
    lead = next((c for c in cleared if c != 0), None)
    if lead is not None and _lead_sign(lead) < 0:
        cleared = [sp.expand(-c) for c in cleared]
    return cleared


def nullspace_over_F(rows):
    """Nullspace basis of a matrix with entries in Q(x).

    Returns a list of vectors with denominator-cleared, content-free integer
    polynomial entries and positive leading coefficient.
    """
    mat = sp.Matrix(rows)
    if mat.rows == 0:
        return [[sp.Integer(1) if i == k else sp.Integer(0) for i in range(mat.cols)]
                for k in range(mat.cols)]
    try:
        dm = DomainMatrix.from_Matrix(mat)
        dm = dm.to_field()
        ns = dm.nullspace().to_Matrix()
        basis = [list(ns.row(i)) for i in range(ns.rows)]
    except Exception:
        basis = [list(v) for v in mat.nullspace()]
    return [_clear_vector(v) for v in basis if any(sp.cancel(c) != 0 for c in v)]
