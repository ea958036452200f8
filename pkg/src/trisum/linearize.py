"""Remainder linearization: rewrite one remainder form so that linear
combinations with another remainder form stay valid remainder forms.

The key step relocates each fraction of s onto the denominator class
representative used by r, and in the integer-linear case re-aligns the z-free
cofactor so that it is shift-coprime (in steps of beta) to the cofactor
already present in r.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .abramov import _crt_split_y, _poly_y, _shift_offset_y
from .bireduce import (
    Group,
    RemainderForm,
    RemainderFraction,
    _merge_term,
    _relocate_simple,
    split_tau_difference,
    validate_remainder_form,
)
from .errors import InputError
from .ratfun import antidiff_poly, deg, eq, fraction, x, y, z
from .shifts import (
    integer_linear_type_yz,
    is_shift_free,
    phi_inverse,
    phi_map,
    shift_equiv_yz,
    shift_expr,
)


def _shift_coprime_core(A, B, b_star_img, track):
    """Post-substitution core: A/B = sigma_y(q) - q + A'/B' with B' aligned so
    that gcd(b_star_img, sigma_y^l(B')) = 1 for every nonzero integer l.

    A is polynomial in y, z; B and b_star_img are sigma_y-free in F[y].
    """
    others = sorted((sp.sympify(A).free_symbols | sp.sympify(B).free_symbols
                     | {x, z}) - {y}, key=sp.default_sort_key)
    dom = sp.QQ.frac_field(*others) if others else sp.QQ
    PA = _poly_y(A, dom)
    PB = _poly_y(B, dom)
    q_terms = []
    quo, rem = sp.div(PA, PB)
    if quo != 0 and track:
        q_terms.append(antidiff_poly(quo.as_expr(), y))
    if rem == 0:
        return q_terms, sp.Integer(0), sp.Integer(1)
    # factors of the target cofactor, one per shift class
    star_factors = [base for base, _m in sp.factor_list(b_star_img)[1]
                    if deg(base, y) > 0]
    unit = sp.Integer(1)
    coeff, fparts = sp.factor_list(B)
    unit *= coeff
    pieces = []  # (Poly base power, shift s to apply)
    parts = []
    shifts = []
    for base, mult in fparts:
        if deg(base, y) <= 0:
            unit *= base ** mult
            continue
        s = 0
        for pstar in star_factors:
            off = _shift_offset_y(base, pstar, dom)
            if off is not None:
                s = -off  # sigma_y^s(base) is aligned with pstar
                break
        parts.append(_poly_y(base, dom) ** int(mult))
        shifts.append(s)
    nums = _crt_split_y(rem, parts)
    a_out, b_out = sp.Integer(0), sp.Integer(1)
    for npoly, ppoly, s in zip(nums, parts, shifts):
        a_pc = sp.cancel(npoly.as_expr() / unit)
        b_pc = ppoly.as_expr()
        if s != 0:
            w = a_pc / b_pc
            if track and s > 0:
                q_terms.append(-sp.Add(*[shift_expr(w, m=k) for k in range(s)]))
            elif track and s < 0:
                q_terms.append(sp.Add(*[shift_expr(w, m=-k) for k in range(1, -s + 1)]))
            a_pc = shift_expr(a_pc, m=s)
            b_pc = sp.expand(shift_expr(b_pc, m=s))
        a_out = sp.expand(a_out * b_pc + a_pc * b_out)
        b_out = sp.expand(b_out * b_pc)
    return q_terms, a_out, b_out


def shift_coprime_reduce(a, b, alpha, beta, b_star, track=True):
    """Rewrite a/b = (S_y^beta S_z^(-alpha) - 1)(q) + a'/b' where b' in F[y] is
    sigma_y^beta-free and satisfies gcd(b_star, sigma_y^(beta*l)(b')) = 1 for
    all nonzero integers l.

    Requires beta > 0 and b, b_star sigma_y^beta-free.  Returns (q, a', b').
    """
    beta = int(beta)
    alpha = int(alpha)
    if beta <= 0:
        raise InputError("shift_coprime_reduce requires beta > 0")
    b = sp.expand(sp.sympify(b))
    b_star = sp.expand(sp.sympify(b_star))
    for p, name in ((b, "b"), (b_star, "b_star")):
        if sp.sympify(p).free_symbols & {z}:
            raise InputError(f"{name} must be free of z")
        if deg(p, y) > 0 and not is_shift_free(p, beta):
            raise InputError(f"{name} is not sigma_y^{beta}-free")
    if a == 0:
        return sp.Integer(0), sp.Integer(0), sp.Integer(1)
    A = phi_map(alpha, beta, a)
    B = phi_map(alpha, beta, b)
    Bstar = phi_map(alpha, beta, b_star)
    Bn, Bd = fraction(sp.cancel(A / B))
    q_terms, a_img, b_img = _shift_coprime_core(Bn, Bd, sp.expand(Bstar), track)
    q = phi_inverse(alpha, beta, sp.Add(*q_terms)) if q_terms else sp.Integer(0)
    a_out, b_out = fraction(phi_inverse(alpha, beta, sp.cancel(a_img / b_img)))
    return q, a_out, b_out


def relocate_fraction(rf, lam, mu, b_star=None, track=True):
    """Move a remainder fraction onto the shifted denominator
    sigma_y^lam sigma_z^mu (d), with an exact correction

        a/(b d^j) = Delta_y(g) + Delta_z(h) + a'/(b' d'^j).

    For an integer-linear d a sigma_y^beta-free b_star must be supplied; the
    output cofactor b' is then shift-coprime (in steps of beta) to b_star.
    Returns (g_terms, h_terms, rf').
    """
    if rf.a == 0:
        raise InputError("zero numerator is not a remainder fraction")
    lam, mu = int(lam), int(mu)
    g_terms, h_terms, a2, b2, d2 = _relocate_simple(
        rf.a, rf.b, rf.d, rf.j, lam, mu, track)
    lin2 = integer_linear_type_yz(d2)
    if rf.lin is None and lin2 is None:
        return g_terms, h_terms, RemainderFraction(a2, b2, d2, rf.j, None)
    if lin2 is None or rf.lin is None:
        raise InputError("shifting cannot change integer linearity")
    if b_star is None:
        raise InputError("integer-linear case needs b_star")
    alpha, beta = lin2.alpha, lin2.beta
    q, a3, b3 = shift_coprime_reduce(a2, b2, alpha, beta, b_star, track)
    if q != 0 and track:
        gt, ht = split_tau_difference(q, d2, rf.j, alpha, beta, track)
        g_terms = g_terms + gt
        h_terms = h_terms + ht
    return g_terms, h_terms, RemainderFraction(a3, b3, d2, rf.j, lin2)


@dataclass
class LinearizeResult:
    """s = Delta_y(sum g_terms) + Delta_z(sum h_terms) + t."""

    g_terms: list
    h_terms: list
    t: RemainderForm

    @property
    def g(self):
        return sp.cancel(sp.together(sp.Add(*self.g_terms)))

    @property
    def h(self):
        return sp.cancel(sp.together(sp.Add(*self.h_terms)))

    def __iter__(self):
        return iter((self.g, self.h, self.t))


def linearize_remainder(r, s, track=True, validate=True):
    """Rewrite the remainder form s as Delta_y(g) + Delta_z(h) + t so that
    every linear combination c1*r + c2*t is again a valid remainder form.

    Each group of s that is shift-equivalent to a group of r is relocated onto
    r's representative; in the integer-linear case the new cofactors are made
    shift-coprime to r's cofactor of the same power."""
    if validate:
        validate_remainder_form(r)
        validate_remainder_form(s)
    g_terms, h_terms = [], []
    out_groups = []
    for gs in s.groups:
        target = None
        for gr in r.groups:
            w = shift_equiv_yz(gr.d, gs.d)
            if w is not None:
                target = (gr, w)
                break
        if target is None:
            out_groups.append(Group(d=gs.d, lin=gs.lin, terms=dict(gs.terms)))
            continue
        gr, (lam, mu) = target
        newterms = {}
        for j, (a, b) in sorted(gs.terms.items()):
            b_star = gr.terms[j][1] if j in gr.terms else sp.Integer(1)
            rf = RemainderFraction(a, b, gs.d, j, gs.lin)
            gt, ht, rf2 = relocate_fraction(rf, lam, mu, b_star=b_star,
                                            track=track)
            g_terms.extend(gt)
            h_terms.extend(ht)
            if rf2.a != 0:
                _merge_term(newterms, j, rf2.a, rf2.b)
        if newterms:
            out_groups.append(Group(d=gr.d, lin=integer_linear_type_yz(gr.d),
                                    terms=newterms))
    return LinearizeResult(g_terms, h_terms, RemainderForm(out_groups).sorted())


def combine_forms(pairs):
    """Linear combination sum(c * form) of remainder forms whose matching
    groups already share identical representatives.

    Coefficients c may be symbolic scalars in F.  Groups with shift-equivalent
    but unequal representatives raise InputError (linearize first)."""
    out_groups = []
    for c, form in pairs:
        for g in form.groups:
            dest = None
            for og in out_groups:
                if eq(og.d, g.d):
                    dest = og
                    break
                if shift_equiv_yz(og.d, g.d) is not None:
                    raise InputError(
                        "insuperposable forms: shift-equivalent but unequal "
                        "representatives (linearize first)")
            if dest is None:
                dest = Group(d=g.d, lin=g.lin, terms={})
                out_groups.append(dest)
            for j, (a, b) in g.terms.items():
                _merge_term(dest.terms, j, sp.expand(c * a), b)
    out_groups = [g for g in out_groups if g.terms]
    return RemainderForm(out_groups).sorted()
