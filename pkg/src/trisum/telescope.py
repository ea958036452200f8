"""Telescoper construction: operators in Q(x)[S_x], the existence criterion,
the reduction-based creative-telescoping loop, and LCLM-based combination.

A telescoper for f is a nonzero L = sum c_i S_x^i with coefficients in Q(x)
such that L(f) is (sigma_y, sigma_z)-summable; a certificate is a pair (g, h)
with L(f) = Delta_y(g) + Delta_z(h).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import sympy as sp

from .bireduce import Group, RemainderForm, bivariate_abramov
from .errors import InputError, OrderLimitError
from .linearize import linearize_remainder
from .ratfun import (
    sum_is_zero,
    _clear_vector,
    deg,
    eq,
    field_sum,
    fraction,
    nullspace_over_F,
    prim_y,
    x,
    y,
    z,
)
from .shifts import (
    Zsym,
    coeffs_in_Z,
    integer_linear_type_yz,
    integer_linear_xy,
    min_x_period,
    shift_equiv_xyz,
    shift_expr,
)


# ---------------------------------------------------------------------------
# Operators in Q(x)[S_x]


@dataclass(frozen=True)
class OreOp:
    """Linear recurrence operator sum coeffs[i] * S_x^i over Q(x)."""

    coeffs: tuple

    def __init__(self, coeffs):
        coeffs = [sp.sympify(c) for c in coeffs]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs or all(c == 0 for c in coeffs):
            raise InputError("zero operator")
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @property
    def order(self):
        return len(self.coeffs) - 1

    def apply(self, f):
        f = sp.sympify(f)
        return sp.Add(*[c * shift_expr(f, l=i) for i, c in enumerate(self.coeffs)
                        if c != 0])

    def apply_terms(self, terms):
        """Termwise image of a list of rational summands (kept as a list)."""
        out = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            out.extend(c * shift_expr(t, l=i) for t in terms)
        return out

    def mul(self, other):
        """Operator composition self o other; S_x^i * a = sigma_x^i(a) S_x^i."""
        n = self.order + other.order
        out = [sp.Integer(0)] * (n + 1)
        for i, u in enumerate(self.coeffs):
            if u == 0:
                continue
            for j, v in enumerate(other.coeffs):
                if v == 0:
                    continue
                out[i + j] += u * shift_expr(v, l=i)
        return OreOp([sp.cancel(c) for c in out])

    def scale(self, c):
        return OreOp([sp.cancel(c * u) for u in self.coeffs])

    def canonical(self):
        """Denominator-free, content-free integer coefficients with positive
        leading coefficient of the lead term."""
        return OreOp(_clear_vector(list(reversed(self.coeffs)))[::-1])

    def monic(self):
        lead = self.coeffs[-1]
        return OreOp([sp.cancel(c / lead) for c in self.coeffs])

    def same_up_to_scalar(self, other):
        a = self.canonical().coeffs
        b = other.canonical().coeffs
        return len(a) == len(b) and all(eq(u, v) for u, v in zip(a, b))

    def __str__(self):
        parts = []
        for i in range(self.order, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            cs = f"({c})" if not c.is_number or c.could_extract_minus_sign() else f"{c}"
            parts.append(cs if i == 0 else (f"{cs}*S^{i}" if i > 1 else f"{cs}*S"))
        return " + ".join(parts) if parts else "0"


def op_apply(L, f):
    return L.apply(f)


def _pick_vector(basis):
    """Deterministic choice among nullspace vectors: lowest maximal coefficient
    degree in x, then canonical ordering."""
    def key(v):
        degs = [sp.Poly(c, x).degree() if c != 0 else -1 for c in v]
        return (max(degs), sum(d for d in degs if d >= 0),
                tuple(sp.default_sort_key(c) for c in v))
    return min(basis, key=key)


def _lclm2(A, B):
    """LCLM of two operators with cofactors: returns (L, U, V) with
    L = U o A = V o B of minimal order, L canonical."""
    da, db = A.order, B.order
    for rho in range(max(da, db), da + db + 1):
        nu, nv = rho - da + 1, rho - db + 1
        rows = []
        for t in range(rho + 1):
            row = []
            for i in range(nu):
                row.append(shift_expr(A.coeffs[t - i], l=i)
                           if 0 <= t - i <= da else sp.Integer(0))
            for j in range(nv):
                row.append(-shift_expr(B.coeffs[t - j], l=j)
                           if 0 <= t - j <= db else sp.Integer(0))
            rows.append(row)
        basis = nullspace_over_F(rows)
        if not basis:
            continue
        v = _pick_vector(basis)
        U = OreOp(v[:nu])
        V = OreOp(v[nu:])
        Lraw = U.mul(A)
        L = Lraw.canonical()
        # rescale cofactors so that L = U o A = V o B holds exactly
        i0 = max(i for i, c in enumerate(Lraw.coeffs) if c != 0)
        s = sp.cancel(L.coeffs[i0] / Lraw.coeffs[i0])
        return L, U.scale(s), V.scale(s)
    raise InputError("no common left multiple found")  # pragma: no cover


def op_lclm(ops):
    """Least common left multiple of a list of operators and the cofactors
    L'_i with L = L'_i o ops[i].  Returns (L, [L'_1, ...])."""
    if not ops:
        raise InputError("op_lclm of an empty list")
    L = ops[0]
    cofs = [OreOp([sp.Integer(1)])]
    for B in ops[1:]:
        L2, U, V = _lclm2(L, B)
        cofs = [U.mul(c) for c in cofs] + [V]
        L = L2
    Lc = L.canonical()
    s = sp.cancel(Lc.coeffs[-1] / L.coeffs[-1])
    if s != 1:
        cofs = [c.scale(s) for c in cofs]
    return Lc, cofs


# ---------------------------------------------------------------------------
# Existence criterion


@dataclass
class GroupReport:
    d: sp.Expr
    period: tuple | None          # (xi, zeta, eta) or None
    cofactors_ok: dict            # j -> bool
    ok: bool


@dataclass
class ExistenceReport:
    exists: bool
    groups: list


def _cofactor_ok(b, d_lin, period):
    """Condition (ii): b is (x,y)-integer linear; when d is not (y,z)-integer
    linear, additionally sigma_x^xi(prim_y(b)) = sigma_y^zeta(prim_y(b))."""
    b = sp.expand(sp.sympify(b))
    if deg(b, y) <= 0:
        return True
    if not integer_linear_xy(b):
        return False
    if d_lin is None and period is not None:
        xi, zeta, _eta = period
        p = prim_y(b)
        if not eq(shift_expr(p, l=xi), shift_expr(p, m=zeta)):
            return False
    return True


def existence_check(r0):
    """Decide whether telescopers exist for a rational function with remainder
    form r0: every group's d must return to its own (y,z)-shift class under
    some power of sigma_x, and every cofactor b must be (x,y)-integer linear
    (with the aligned-shift condition when d is not (y,z)-integer linear)."""
    reports = []
    exists = True
    for g in r0.groups:
        period = min_x_period(g.d)
        cof = {}
        for j, (_a, b) in sorted(g.terms.items()):
            cof[j] = period is not None and _cofactor_ok(b, g.lin, period)
        ok = period is not None and all(cof.values())
        exists = exists and ok
        reports.append(GroupReport(d=g.d, period=period, cofactors_ok=cof, ok=ok))
    return ExistenceReport(exists=exists, groups=reports)


# ---------------------------------------------------------------------------
# The reduction-based creative-telescoping loop


@dataclass
class Certificate:
    """Certificate pair kept as lists of rational summands; g and h normalize
    on demand."""

    g_terms: tuple
    h_terms: tuple

    @property
    def g(self):
        return field_sum(self.g_terms)

    @property
    def h(self):
        return field_sum(self.h_terms)


@dataclass
class TelescopeResult:
    status: str                       # "summable" | "ok" | "no_telescoper"
    L: OreOp | None
    order: int | None
    certificate: Certificate | None
    existence: ExistenceReport | None = None
    remainders: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)


def _shift_form_x(form, l=1):
    groups = []
    for g in form.groups:
        d2 = sp.expand(shift_expr(g.d, l=l))
        terms = {j: (sp.expand(shift_expr(a, l=l)), sp.expand(shift_expr(b, l=l)))
                 for j, (a, b) in g.terms.items()}
        groups.append(Group(d=d2, lin=integer_linear_type_yz(d2), terms=terms))
    return RemainderForm(groups)


def _dkey(d):
    P = sp.Poly(sp.expand(d), y, z, x, domain=sp.QQ)
    return tuple(sorted(P.terms()))


def _merge_reference(ref, form):
    """Extend the reference pool with form's groups: lcm the cofactors per
    power on identical representatives, add unseen representatives."""
    for g in form.groups:
        dest = None
        for og in ref.groups:
            if eq(og.d, g.d):
                dest = og
                break
        if dest is None:
            dest = Group(d=g.d, lin=g.lin, terms={})
            ref.groups.append(dest)
        for j, (_a, b) in g.terms.items():
            if j in dest.terms:
                bl = sp.expand(sp.lcm(dest.terms[j][1], b)) \
                    if deg(b, y) > 0 or deg(dest.terms[j][1], y) > 0 else b
                dest.terms[j] = (sp.Integer(1), bl)
            else:
                dest.terms[j] = (sp.Integer(1), b)
    return ref


def _monomial_rows(slots, ell):
    """Turn per-k numerators into linear-system rows over Q(x).

    slots: list of dicts monomial -> coefficient, index k = 0..ell."""
    monos = sorted({m for s in slots for m in s})
    rows = []
    for m in monos:
        rows.append([s.get(m, sp.Integer(0)) for s in slots])
    return rows


def _numerator_coeffs(N, lin):
    """Coefficient map of a numerator polynomial, in (y, Z) coordinates when
    the group is integer linear and in (y, z) otherwise."""
    out = {}
    if lin is not None:
        cz = coeffs_in_Z(N, lin.alpha, lin.beta)
        for i, c in enumerate(cz):
            P = sp.Poly(sp.expand(c), y, domain=sp.QQ.frac_field(x))
            for (py,), cc in P.terms():
                out[(i, py)] = cc.as_expr() if hasattr(cc, "as_expr") else sp.sympify(cc)
        return out
    P = sp.Poly(sp.expand(N), y, z, domain=sp.QQ.frac_field(x))
    for mono, cc in P.terms():
        out[mono] = cc.as_expr() if hasattr(cc, "as_expr") else sp.sympify(cc)
    return out


def _dependency(forms):
    """Nontrivial c_0..c_ell over Q(x) with sum c_k r_k = 0, or None.

    The system is assembled per (representative, power): numerators over the
    lcm of the cofactors, coefficients taken in (y, Z) coordinates for
    integer-linear groups."""
    ell = len(forms) - 1
    slots_by_key = {}
    lin_by_key = {}
    lcm_by_key = {}
    for k, form in enumerate(forms):
        for g in form.groups:
            for j, (_a, b) in g.terms.items():
                key = (_dkey(g.d), j)
                lin_by_key[key] = g.lin
                if key not in lcm_by_key:
                    lcm_by_key[key] = b
                else:
                    B = lcm_by_key[key]
                    lcm_by_key[key] = sp.expand(sp.lcm(B, b)) \
                        if deg(b, y) > 0 or deg(B, y) > 0 else sp.expand(B * b / sp.gcd(B, b))
    rows = []
    for key, B in lcm_by_key.items():
        dk, j = key
        slots = [{} for _ in range(ell + 1)]
        for k, form in enumerate(forms):
            for g in form.groups:
                if _dkey(g.d) != dk or j not in g.terms:
                    continue
                a, b = g.terms[j]
                N = sp.expand(a * sp.cancel(B / b))
                slots[k] = _numerator_coeffs(N, lin_by_key[key])
        rows.extend(_monomial_rows(slots, ell))
    basis = nullspace_over_F(rows)
    basis = [v for v in basis if any(c != 0 for c in v)]
    if not basis:
        return None
    with_top = [v for v in basis if v[-1] != 0]
    return _pick_vector(with_top if with_top else basis)


def _default_max_order(report):
    total = 0
    for g in report.groups:
        xi = g.period[0] if g.period else 1
        total += xi * sum(1 for _ in g.cofactors_ok)
    return max(32, 8 * total)


def reduction_ct(f, den=None, certificate_mode="normalized", enhancements=True,
                 max_order=None, _prereduced=None):
    """Minimal telescoper for f via iterated reduction.

    Returns a TelescopeResult; certificate_mode is one of "normalized",
    "deferred" (certificate kept as unsimplified term lists) or "none"."""
    if certificate_mode not in ("normalized", "deferred", "none"):
        raise InputError(f"unknown certificate mode: {certificate_mode}")
    track = certificate_mode != "none"
    if _prereduced is not None:
        red = _prereduced
    else:
        red = bivariate_abramov(f, den=den, track=track)
    r0 = red.r
    if r0.is_zero:
        cert = Certificate(tuple(red.g_terms), tuple(red.h_terms)) if track else None
        if cert is not None and certificate_mode == "normalized":
            cert = Certificate((cert.g,), (cert.h,))
        return TelescopeResult(status="summable", L=OreOp([1]), order=0,
                               certificate=cert, remainders=[r0],
                               stats={"iterations": 0})
    report = existence_check(r0)
    if not report.exists:
        return TelescopeResult(status="no_telescoper", L=None, order=None,
                               certificate=None, existence=report,
                               remainders=[r0], stats={"iterations": 0})
    if max_order is None:
        env = os.environ.get("TRISUM_MAX_ORDER")
        max_order = int(env) if env else _default_max_order(report)
    forms = [r0]
    # glocs[k] holds the fresh certificate terms of iteration k; the full
    # certificate of sigma_x^k(f) is sum_i sigma_x^i(glocs[k-i]), assembled
    # only for the iterations the telescoper actually uses
    glocs = [list(red.g_terms)]
    hlocs = [list(red.h_terms)]
    ref = RemainderForm([Group(d=g.d, lin=g.lin,
                               terms={j: (sp.Integer(1), b)
                                      for j, (_a, b) in g.terms.items()})
                         for g in r0.groups])
    ell = 0
    while True:
        cvec = _dependency(forms)
        if cvec is not None:
            L = OreOp(cvec).canonical()
            cert = None
            if track:
                gsum, hsum = [], []
                for k, c in enumerate(L.coeffs):
                    if c == 0:
                        continue
                    for i in range(k + 1):
                        gsum.extend(c * shift_expr(t, l=i) for t in glocs[k - i])
                        hsum.extend(c * shift_expr(t, l=i) for t in hlocs[k - i])
                cert = Certificate(tuple(gsum), tuple(hsum))
                if certificate_mode == "normalized":
                    cert = Certificate((cert.g,), (cert.h,))
            return TelescopeResult(status="ok", L=L, order=L.order,
                                   certificate=cert, existence=report,
                                   remainders=forms,
                                   stats={"iterations": ell})
        ell += 1
        if ell > max_order:
            raise OrderLimitError(
                f"no telescoper found up to order {max_order}; "
                "set TRISUM_MAX_ORDER to raise the limit")
        s = _shift_form_x(forms[-1], l=1)
        res = linearize_remainder(ref if not enhancements else r0, s,
                                  track=track, validate=False)
        forms.append(res.t)
        if not enhancements:
            ref = _merge_reference(ref, res.t)
        glocs.append(list(res.g_terms))
        hlocs.append(list(res.h_terms))


def telescope_by_lclm(f, den=None, certificate_mode="normalized",
                      enhancements=True, max_order=None):
    """Telescoper via per-class reduction and LCLM combination.

    The remainder of f is partitioned into (x,y,z)-shift equivalence classes
    of the group representatives; a minimal telescoper is computed per class
    and the results are combined by op_lclm, with the certificate assembled
    through the cofactors."""
    track = certificate_mode != "none"
    red = bivariate_abramov(f, den=den, track=track)
    r0 = red.r
    if r0.is_zero:
        return reduction_ct(f, den=den, certificate_mode=certificate_mode,
                            enhancements=enhancements, max_order=max_order,
                            _prereduced=red)
    # partition groups by (x,y,z)-shift equivalence of representatives
    parts = []
    for g in r0.groups:
        home = None
        for p in parts:
            if shift_equiv_xyz(p[0].d, g.d) is not None:
                home = p
                break
        if home is None:
            parts.append([g])
        else:
            home.append(g)
    results = []
    for p in parts:
        sub = RemainderForm(list(p))
        res = reduction_ct(sub.to_expr(), certificate_mode=certificate_mode,
                           enhancements=enhancements, max_order=max_order)
        if res.status == "no_telescoper":
            return TelescopeResult(status="no_telescoper", L=None, order=None,
                                   certificate=None, existence=res.existence,
                                   remainders=[r0], stats={"iterations": 0})
        results.append(res)
    L, cofs = op_lclm([res.L for res in results])
    cert = None
    if track:
        gsum = L.apply_terms(red.g_terms)
        hsum = L.apply_terms(red.h_terms)
        for cof, res in zip(cofs, results):
            gsum.extend(cof.apply_terms(res.certificate.g_terms))
            hsum.extend(cof.apply_terms(res.certificate.h_terms))
        cert = Certificate(tuple(gsum), tuple(hsum))
        if certificate_mode == "normalized":
            cert = Certificate((cert.g,), (cert.h,))
    iters = sum(res.stats.get("iterations", 0) for res in results)
    return TelescopeResult(status="ok", L=L, order=L.order, certificate=cert,
                           remainders=[r0], stats={"iterations": iters})


def verify_telescoper(L, f, cert=None):
    """Check that L is a telescoper for f.

    With a certificate the identity L(f) = Delta_y(g) + Delta_z(h) is checked
    exactly; without one, summability of L(f) is decided by reduction."""
    if cert is not None:
        f = sp.sympify(f)
        terms = [c * shift_expr(u, l=i) for i, c in enumerate(L.coeffs) if c != 0
                 for u in sp.Add.make_args(f)]
        for t in cert.g_terms:
            terms.append(-shift_expr(t, m=1))
            terms.append(t)
        for t in cert.h_terms:
            terms.append(-shift_expr(t, n=1))
            terms.append(t)
        return sum_is_zero(terms)
    from .bireduce import is_summable_yz
    return is_summable_yz(sp.cancel(sp.together(L.apply(f))))
