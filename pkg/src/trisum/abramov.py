"""Reduction of univariate shift sums: write f = sigma_y(g) - g + a/b with b
shift-free in y, and its tau-twisted version via the substitution phi.

f is treated as a rational function of y whose coefficients may involve x and
z rationally.  The remainder a/b is unique modulo summable parts; f is
sigma_y-summable exactly when a = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from .errors import InputError
from .ratfun import antidiff_poly, deg, fraction, int_primitive, x, y, z
from .shifts import phi_inverse, phi_map, shift_expr


@dataclass(frozen=True)
class AbramovResult:
    """Decomposition f = sigma_y(g) - g + a/b."""

    g: sp.Expr
    a: sp.Expr
    b: sp.Expr

    @property
    def remainder(self):
        return sp.cancel(self.a / self.b)


@dataclass(frozen=True)
class TauResult:
    """Decomposition f = tau(g) - g + a/b with tau = sigma_y^beta sigma_z^(-alpha)."""

    g: sp.Expr
    a: sp.Expr
    b: sp.Expr
    alpha: int
    beta: int

    @property
    def remainder(self):
        return sp.cancel(self.a / self.b)


def _poly_y(e, dom):
    return sp.Poly(sp.expand(e), y, domain=dom)


def _shift_offset_y(p, q, dom):
    """Integer s with p = q(y+s) up to a unit, for polynomials in dom[y]."""
    Pp = _poly_y(p, dom)
    Pq = _poly_y(q, dom)
    n = Pp.degree()
    if n != Pq.degree() or n <= 0:
        return None
    Pp = Pp.monic()
    Pq = Pq.monic()
    a1 = dom.to_sympy(Pp.nth(n - 1)) if dom != sp.QQ else sp.sympify(Pp.nth(n - 1))
    b1 = dom.to_sympy(Pq.nth(n - 1)) if dom != sp.QQ else sp.sympify(Pq.nth(n - 1))
    s = sp.cancel((a1 - b1) / n)
    if s.free_symbols or not s.is_rational or not s.is_integer:
        return None
    s = int(s)
    if sp.expand(Pp.as_expr() - Pq.as_expr().subs(y, y + s)) == 0:
        return s
    return None


def _crt_split_y(num_poly, parts):
    """num/prod(parts) = sum c_i/parts[i] for pairwise coprime Polys in y."""
    if len(parts) == 1:
        return [num_poly % parts[0]]
    total = parts[0]
    for P in parts[1:]:
        total = total * P
    out = []
    for P in parts:
        other = sp.div(total, P)[0]
        inv = sp.invert(other, P)
        out.append((num_poly * inv) % P)
    return out


def abramov_reduce_y(f, track=True):
    """Decompose f = sigma_y(g) - g + a/b with b shift-free in y.

    The remainder is reduced to lowest terms; f is sigma_y-summable iff a = 0.
    When track is False the certificate g is not accumulated (returned as 0).
    """
    f = sp.cancel(sp.together(sp.sympify(f)))
    if f == 0:
        return AbramovResult(sp.Integer(0), sp.Integer(0), sp.Integer(1))
    num, den = fraction(f)
    others = sorted((num.free_symbols | den.free_symbols | {x, z}) - {y},
                    key=sp.default_sort_key)
    dom = sp.QQ.frac_field(*others) if others else sp.QQ
    Pnum = _poly_y(num, dom)
    Pden = _poly_y(den, dom)
    g_terms = []
    q, r = sp.div(Pnum, Pden)
    if q != 0 and track:
        g_terms.append(antidiff_poly(q.as_expr(), y))
    if r == 0:
        return AbramovResult(sp.Add(*g_terms), sp.Integer(0), sp.Integer(1))
    # factor the denominator; factors free of y join the unit
    unit = sp.Integer(1)
    coeff, fparts = sp.factor_list(den)
    unit *= coeff
    yfactors = []
    for base, mult in fparts:
        if deg(base, y) <= 0:
            unit *= base ** mult
        else:
            yfactors.append((int_primitive(base)[1], int(mult)))
            unit *= int_primitive(base)[0] ** mult
    # group factors into sigma_y-shift classes
    classes = []  # list of dict: rep, members [(shift, base, mult)]
    for base, mult in yfactors:
        placed = False
        for cl in classes:
            s = _shift_offset_y(base, cl["rep"], dom)
            if s is not None:
                cl["members"].append((s, base, mult))
                placed = True
                break
        if not placed:
            classes.append({"rep": base, "members": [(0, base, mult)]})
    # rebase every class on its member of smallest shift
    for cl in classes:
        smin = min(s for s, _b, _m in cl["members"])
        cl["rep"] = shift_expr(cl["rep"], m=smin)
        cl["members"] = [(s - smin, b, m) for s, b, m in cl["members"]]
    # partial fractions over the shifted factors
    parts = []
    meta = []  # (class index, shift, mult)
    for ci, cl in enumerate(classes):
        for s, base, mult in cl["members"]:
            parts.append(_poly_y(base ** mult, dom))
            meta.append((ci, s, mult))
    rnum = _poly_y(sp.cancel(r.as_expr() / unit), dom)
    pieces = _crt_split_y(rnum, parts)
    # expand each piece adically in its base and relocate onto the class rep
    collect = {}  # (class index, power) -> numerator expr
    for (ci, s, mult), piece, part in zip(meta, pieces, parts):
        if piece == 0:
            continue
        base = classes[ci]["rep"]
        base_s = shift_expr(base, m=s)
        Pbase = _poly_y(base_s, dom)
        rem = piece
        for k in range(mult, 0, -1):
            rem, low = sp.div(rem, Pbase)
            if low == 0:
                continue
            c = low.as_expr()
            w = sp.cancel(shift_expr(c, m=-s) / base**k)
            if track and s > 0:
                g_terms.append(sp.Add(*[shift_expr(w, m=j) for j in range(s)]))
            elif track and s < 0:
                g_terms.append(-sp.Add(*[shift_expr(w, m=-j) for j in range(1, -s + 1)]))
            key = (ci, k)
            collect[key] = sp.cancel(collect.get(key, sp.Integer(0)) + shift_expr(c, m=-s))
    # assemble the remainder over the shift-free denominator
    a_total = sp.Integer(0)
    b_total = sp.Integer(1)
    for ci, cl in enumerate(classes):
        ks = [k for (cj, k) in collect if cj == ci and collect[(cj, k)] != 0]
        if not ks:
            continue
        kmax = max(ks)
        rep = cl["rep"]
        num_cl = sp.Add(*[sp.expand(collect[(ci, k)] * rep ** (kmax - k)) for k in ks])
        a_total = sp.expand(a_total * rep**kmax + num_cl * b_total)
        b_total = sp.expand(b_total * rep**kmax)
    if a_total == 0:
        return AbramovResult(sp.Add(*g_terms) if track else sp.Integer(0),
                             sp.Integer(0), sp.Integer(1))
    rem_frac = sp.cancel(a_total / b_total)
    a_fin, b_fin = fraction(rem_frac)
    return AbramovResult(sp.Add(*g_terms) if track else sp.Integer(0), a_fin, b_fin)


def tau_decompose(f, alpha, beta, track=True):
    """Decompose f = tau(g) - g + a/b with tau = sigma_y^beta sigma_z^(-alpha).

    Conjugates by phi, reduces with respect to y, and pulls back.  The
    remainder numerator a, written as a polynomial in alpha*y + beta*z, has
    F[y]-coefficients of degree less than deg_y(b); b is sigma_y^beta-free.
    """
    if beta <= 0:
        raise InputError("tau decomposition requires beta > 0")
    ft = phi_map(alpha, beta, f)
    res = abramov_reduce_y(ft, track=track)
    g = sp.cancel(phi_inverse(alpha, beta, res.g)) if track else sp.Integer(0)
    if res.a == 0:
        return TauResult(g, sp.Integer(0), sp.Integer(1), alpha, beta)
    back = sp.cancel(phi_inverse(alpha, beta, res.a) / phi_inverse(alpha, beta, res.b))
    a_fin, b_fin = fraction(back)
    return TauResult(g, a_fin, b_fin, alpha, beta)
