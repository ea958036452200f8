"""Bivariate reduction: write f = Delta_y(g) + Delta_z(h) + r with r a sum of
remainder fractions a/(b*d^j), one denominator class per (y,z)-shift
equivalence class.  f is (sigma_y, sigma_z)-summable exactly when r = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .abramov import tau_decompose
from .errors import FactorizationError, InputError
from .ratfun import (
    FactoredDen,
    antidiff_poly,
    canonical_poly,
    deg,
    eq,
    factor_best_effort,
    fraction,
    monic_in,
    pf_z_terms,
    x,
    y,
    z,
)
from .shifts import (
    IntLinType,
    coeffs_in_Z,
    integer_linear_type_yz,
    is_shift_free,
    shift_equiv_yz,
    shift_expr,
)


@dataclass(frozen=True)
class RemainderFraction:
    """A fraction a/(b*d^j) with b in F[y], d irreducible of positive z-degree,
    deg_z(a) < deg_z(d); lin carries the integer-linear type of d if any."""

    a: sp.Expr
    b: sp.Expr
    d: sp.Expr
    j: int
    lin: IntLinType | None = None

    @property
    def expr(self):
        return self.a / (self.b * self.d**self.j)


@dataclass
class Group:
    """All fractions sharing one denominator class representative d."""

    d: sp.Expr
    lin: IntLinType | None
    terms: dict = field(default_factory=dict)  # j -> (a, b)

    def fractions(self):
        return [RemainderFraction(a, b, self.d, j, self.lin)
                for j, (a, b) in sorted(self.terms.items())]

    def to_expr(self):
        return sp.Add(*[self.terms[j][0] / (self.terms[j][1] * self.d**j)
                        for j in self.terms])


@dataclass
class RemainderForm:
    groups: list = field(default_factory=list)

    def to_expr(self):
        return sp.Add(*[g.to_expr() for g in self.groups])

    @property
    def is_zero(self):
        return not self.groups

    def sorted(self):
        return RemainderForm(sorted(self.groups, key=lambda g: sp.default_sort_key(g.d)))


@dataclass
class BiReduceResult:
    """f = Delta_y(sum g_terms) + Delta_z(sum h_terms) + r."""

    g_terms: list
    h_terms: list
    r: RemainderForm

    @property
    def g(self):
        return sp.cancel(sp.together(sp.Add(*self.g_terms)))

    @property
    def h(self):
        return sp.cancel(sp.together(sp.Add(*self.h_terms)))


def _lcm_y(b1, b2):
    if b1 == 1:
        return b2
    if b2 == 1:
        return b1
    return sp.expand(sp.lcm(b1, b2))


def _merge_term(terms, j, a, b):
    """Add a/b into the slot for power j, over a common denominator."""
    if j not in terms:
        terms[j] = (sp.expand(a), sp.expand(b))
        return
    a0, b0 = terms[j]
    bl = _lcm_y(b0, b)
    anew = sp.expand(a0 * sp.cancel(bl / b0) + a * sp.cancel(bl / b))
    # reduce to lowest terms over F[y]
    if anew == 0:
        del terms[j]
        return
    g = sp.gcd(anew, bl)
    if deg(g, y) > 0:
        anew = sp.expand(sp.cancel(anew / g))
        bl = sp.expand(sp.cancel(bl / g))
    lc, bl = monic_in(bl, y) if deg(bl, y) > 0 else (bl, sp.Integer(1))
    terms[j] = (sp.expand(sp.cancel(anew / lc)), bl)


def _normalize_pair(a, b):
    """Lowest terms and b primitive positive-lead."""
    fracv = sp.cancel(a / b)
    return fraction(fracv)


def _relocate_simple(a, b, d, j, lam, mu, track):
    """a/(b d^j) = Delta_y(g) + Delta_z(h) + a'/(b' d'^j) with
    d' = sigma_y^lam sigma_z^mu (d), a' and b' shifted accordingly."""
    g_terms, h_terms = [], []
    w = a / (b * d**j)
    if track and lam > 0:
        g_terms.extend(-shift_expr(w, m=k) for k in range(lam))
    elif track and lam < 0:
        g_terms.extend(shift_expr(w, m=-k) for k in range(1, -lam + 1))
    w = shift_expr(w, m=lam)
    if track and mu > 0:
        h_terms.extend(-shift_expr(w, n=k) for k in range(mu))
    elif track and mu < 0:
        h_terms.extend(shift_expr(w, n=-k) for k in range(1, -mu + 1))
    a2 = sp.expand(shift_expr(a, m=lam, n=mu))
    b2 = sp.expand(shift_expr(b, m=lam))
    d2 = sp.expand(shift_expr(d, m=lam, n=mu))
    return g_terms, h_terms, a2, b2, d2


def split_tau_difference(q, d, j, alpha, beta, track=True):
    """Express (tau(q) - q)/d^j as Delta_y(g) + Delta_z(h) for d of
    (alpha, beta)-type, tau = sigma_y^beta sigma_z^(-alpha).

    Returns (g_terms, h_terms).
    """
    if beta <= 0:
        raise InputError("split_tau_difference requires beta > 0")
    if not track:
        return [], []
    base = [u / d**j for u in sp.Add.make_args(sp.sympify(q))]
    g_terms, h_terms = [], []
    for w in base:
        g_terms.extend(shift_expr(w, m=k, n=-alpha) for k in range(beta))
        if alpha > 0:
            h_terms.extend(-shift_expr(w, n=-k) for k in range(1, alpha + 1))
        elif alpha < 0:
            h_terms.extend(shift_expr(w, n=k) for k in range(-alpha))
    return g_terms, h_terms


def _class_key(d):
    return (int(deg(d, z)), int(deg(d, y)) if deg(d, y) != -sp.oo else 0,
            sp.default_sort_key(d))


def primary_reduce(f, den=None, track=True):
    """Partial fractions in z, then merge (y,z)-shift-equivalent denominator
    classes onto one representative each.

    Returns a BiReduceResult whose remainder groups have deg_z-proper
    numerators and z-free cofactors b in F[y]; integer-linear structure is not
    yet imposed (lin is attached but numerators are reduced only later).
    """
    f = sp.cancel(sp.together(sp.sympify(f)))
    if f == 0:
        return BiReduceResult([], [], RemainderForm([]))
    num, dexpr = fraction(f)
    fd = den if den is not None else factor_best_effort(dexpr)
    if not fd.all_certified():
        raise FactorizationError(
            "denominator factorization is not certified irreducible")
    poly_part, terms = pf_z_terms(f, fd)
    g_terms, h_terms = [], []
    if poly_part != 0 and track:
        h_terms.append(antidiff_poly(poly_part, z))
    # group the z-positive bases into (y,z)-shift classes
    bases = [fac.base for fac in fd.factors]
    class_of = {}
    classes = []  # list of dict(rep=..., members={idx: (lam, mu)})
    seen = sorted({idx for _a, _b, idx, _k in terms})
    for idx in seen:
        base = bases[idx]
        placed = False
        for cl in classes:
            w = shift_equiv_yz(cl["rep"], base)
            if w is not None:
                cl["members"][idx] = w
                placed = True
                break
        if not placed:
            classes.append({"rep": base, "members": {idx: (0, 0)}})
    # pick the representative with the smallest canonical key in each class
    for cl in classes:
        best_idx = min(cl["members"], key=lambda i: _class_key(bases[i]))
        if sp.expand(bases[best_idx] - cl["rep"]) != 0:
            newrep = bases[best_idx]
            members = {}
            for idx in cl["members"]:
                w = shift_equiv_yz(newrep, bases[idx])
                members[idx] = w
            cl["rep"] = newrep
            cl["members"] = members
    for ci, cl in enumerate(classes):
        for idx in cl["members"]:
            class_of[idx] = ci
    groups = [Group(d=cl["rep"], lin=integer_linear_type_yz(cl["rep"]), terms={})
              for cl in classes]
    for a, b, idx, k in terms:
        ci = class_of[idx]
        cl = classes[ci]
        lam, mu = cl["members"][idx]
        # bases[idx] shifted by (lam, mu) gives the representative:
        # rep = sigma_y^lam sigma_z^mu(base)
        if (lam, mu) != (0, 0):
            gt, ht, a, b, _d2 = _relocate_simple(a, b, bases[idx], k, lam, mu, track)
            g_terms.extend(gt)
            h_terms.extend(ht)
        _merge_term(groups[ci].terms, k, a, b)
    groups = [g for g in groups if g.terms]
    return BiReduceResult(g_terms, h_terms,
                          RemainderForm(groups).sorted())


def bivariate_abramov(f, den=None, track=True):
    """Full reduction f = Delta_y(g) + Delta_z(h) + r with r in remainder form.

    After the primary reduction, fractions over integer-linear denominators
    are further reduced through the tau-twisted univariate reduction.
    """
    pr = primary_reduce(f, den=den, track=track)
    g_terms, h_terms = pr.g_terms, pr.h_terms
    out_groups = []
    for grp in pr.r.groups:
        if grp.lin is None:
            out_groups.append(grp)
            continue
        alpha, beta = grp.lin.alpha, grp.lin.beta
        newterms = {}
        for j, (a, b) in sorted(grp.terms.items()):
            td = tau_decompose(sp.cancel(a / b), alpha, beta, track=track)
            if track and td.g != 0:
                gt, ht = split_tau_difference(td.g, grp.d, j, alpha, beta, track)
                g_terms = g_terms + gt
                h_terms = h_terms + ht
            if td.a != 0:
                newterms[j] = (td.a, td.b)
        if newterms:
            out_groups.append(Group(d=grp.d, lin=grp.lin, terms=newterms))
    return BiReduceResult(g_terms, h_terms, RemainderForm(out_groups).sorted())


def is_summable_yz(f, den=None, witness=False):
    """Decide (sigma_y, sigma_z)-summability of f.

    With witness=True returns (bool, (g, h) or None).
    """
    red = bivariate_abramov(f, den=den, track=witness)
    ok = red.r.is_zero
    if witness:
        return ok, ((red.g, red.h) if ok else None)
    return ok


def validate_remainder_form(form, scalars=()):
    """Check the structural invariants of a remainder form.

    scalars: extra symbols to treat as constants (for linear-combination
    closure checks).  Returns True or raises InputError with the violated
    condition.
    """
    reps = [g.d for g in form.groups]
    for i in range(len(reps)):
        di = reps[i]
        if deg(di, z) <= 0:
            raise InputError(f"group denominator {di} has no z")
        if len(sp.factor_list(di)[1]) != 1 or sp.factor_list(di)[1][0][1] != 1:
            raise InputError(f"group denominator {di} is not irreducible")
        for k in range(i + 1, len(reps)):
            if shift_equiv_yz(di, reps[k]) is not None:
                raise InputError(f"groups {di} and {reps[k]} are shift equivalent")
    for g in form.groups:
        if not g.terms:
            raise InputError("empty group")
        for j, (a, b) in g.terms.items():
            if a == 0:
                raise InputError("zero numerator stored in remainder form")
            if deg(a, z) >= deg(g.d, z):
                raise InputError("numerator z-degree not below the denominator's")
            if sp.sympify(b).free_symbols & {z}:
                raise InputError("cofactor denominator involves z")
            if g.lin is not None:
                alpha, beta = g.lin.alpha, g.lin.beta
                for c in coeffs_in_Z(a, alpha, beta):
                    if deg(c, y) >= max(deg(b, y), 1) and deg(b, y) > 0:
                        raise InputError("Z-coefficient y-degree too large")
                    if deg(b, y) <= 0 and deg(c, y) > 0:
                        raise InputError("Z-coefficient involves y over trivial cofactor")
                if not is_shift_free(b, beta):
                    raise InputError(f"cofactor {b} is not sigma_y^{beta}-free")
    return True
