"""Command-line interface: expression parsing, command dispatch, JSON output
and the benchmark generator/harness.

Exit codes: 0 success, 1 no telescoper exists, 2 input error, 3 internal
error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time

import sympy as sp

from .bireduce import bivariate_abramov, is_summable_yz
from .errors import InputError, OrderLimitError, ParseError, TrisumError
from .ratfun import factored_den_from_product, fraction, x, y, z
from .telescope import OreOp, reduction_ct, telescope_by_lclm, verify_telescoper

_VARS = {"x": x, "y": y, "z": z}


# ---------------------------------------------------------------------------
# Expression parsing


class _Parser:
    """Recursive-descent parser for rational expressions in x, y, z.

    Grammar: integers; variables x, y, z; + - * / ^ with integer exponents
    >= 0; parentheses; '*' required between factors."""

    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message):
        raise ParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self):
        e = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.text[self.pos]!r}")
        return e

    def expr(self):
        e = self.term()
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                e = e + self.term()
            elif c == "-":
                self.pos += 1
                e = e - self.term()
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                e = e * self.factor()
            elif c == "/":
                self.pos += 1
                e = e / self.factor()
            else:
                return e

    def factor(self):
        if self.take("-"):
            return -self.factor()
        if self.take("+"):
            return self.factor()
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            neg = self.take("-")
            exp = self.integer()
            if neg:
                self.error("exponents must be nonnegative integers")
            return base ** exp
        return base

    def atom(self):
        c = self.peek()
        if c == "(":
            self.pos += 1
            e = self.expr()
            if not self.take(")"):
                self.error("expected ')'")
            return e
        if c.isdigit():
            return sp.Integer(self.integer())
        if c in _VARS:
            nxt = self.text[self.pos + 1: self.pos + 2]
            if nxt.isalnum():
                self.error(f"unknown name starting at {c!r}; "
                           "only variables x, y, z are allowed")
            self.pos += 1
            return _VARS[c]
        if c == "":
            self.error("unexpected end of input")
        self.error(f"unexpected character {c!r}")

    def integer(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start:self.pos])


def parse_expression(text, factored_den=None):
    """Parse a rational expression; optionally validate a claimed denominator
    factorization given as an explicit product expression.

    Returns (expr, FactoredDen or None)."""
    f = _Parser(text).parse()
    fd = None
    if factored_den is not None:
        claimed = _Parser(factored_den).parse()
        _num, den = fraction(f)
        pairs = []
        for base, k in sp.sympify(claimed).as_powers_dict().items():
            if not (sp.Integer(k).is_Integer and k > 0):
                raise InputError("factored denominator powers must be "
                                 "positive integers")
            if base.free_symbols:
                pairs.append((base, int(k)))
        fd = factored_den_from_product(pairs, den, certified=True)
    return f, fd


def format_expr(e):
    return sp.sstr(sp.nsimplify(e) if not isinstance(e, sp.Expr) else e,
                   order="lex")


# ---------------------------------------------------------------------------
# Commands


def _result_payload(res, elapsed_ms, want_cert, monic=False):
    payload = {
        "status": res.status,
        "order": res.order,
        "telescoper": None,
        "certificate": None,
        "stats": {"iterations": res.stats.get("iterations", 0),
                  "elapsed_ms": round(elapsed_ms, 3)},
    }
    if res.L is not None:
        L = res.L.monic() if monic else res.L.canonical()
        payload["telescoper"] = {"coeffs": [format_expr(c) for c in L.coeffs]}
    if want_cert and res.certificate is not None:
        payload["certificate"] = {"g": format_expr(res.certificate.g),
                                  "h": format_expr(res.certificate.h)}
    return payload


def _print_result(payload, as_json):
    if as_json:
        print(json.dumps(payload))
        return
    print(f"status: {payload['status']}")
    if payload["telescoper"] is not None:
        print(f"order: {payload['order']}")
        for i, c in enumerate(payload["telescoper"]["coeffs"]):
            print(f"  c[{i}] = {c}")
    if payload["certificate"] is not None:
        print(f"g = {payload['certificate']['g']}")
        print(f"h = {payload['certificate']['h']}")
    print(f"elapsed: {payload['stats']['elapsed_ms']} ms")


def cmd_telescope(args):
    f, fd = parse_expression(args.expr, args.factored_den)
    t0 = time.time()
    fn = telescope_by_lclm if args.lclm else reduction_ct
    res = fn(f, den=fd, certificate_mode=args.certificate,
             enhancements=not args.no_enhancements)
    elapsed = (time.time() - t0) * 1000
    payload = _result_payload(res, elapsed,
                              want_cert=args.certificate != "none",
                              monic=args.monic)
    _print_result(payload, args.json)
    return 0 if res.status in ("ok", "summable") else 1


def cmd_summable(args):
    f, fd = parse_expression(args.expr, args.factored_den)
    ok, wit = is_summable_yz(f, den=fd, witness=True)
    if args.json:
        out = {"summable": ok}
        if ok:
            out["g"] = format_expr(wit[0])
            out["h"] = format_expr(wit[1])
        print(json.dumps(out))
    else:
        print("summable" if ok else "not summable")
        if ok:
            print(f"g = {format_expr(wit[0])}")
            print(f"h = {format_expr(wit[1])}")
    return 0


def cmd_reduce(args):
    f, fd = parse_expression(args.expr, args.factored_den)
    red = bivariate_abramov(f, den=fd)
    r = red.r
    if args.json:
        groups = [{
            "d": format_expr(g.d),
            "integer_linear": [g.lin.alpha, g.lin.beta] if g.lin else None,
            "fractions": [{"j": j, "a": format_expr(a), "b": format_expr(b)}
                          for j, (a, b) in sorted(g.terms.items())],
        } for g in r.groups]
        print(json.dumps({"summable": r.is_zero,
                          "g": format_expr(red.g), "h": format_expr(red.h),
                          "remainder": groups}))
    else:
        print(f"g = {format_expr(red.g)}")
        print(f"h = {format_expr(red.h)}")
        if r.is_zero:
            print("remainder = 0 (summable)")
        else:
            for g in r.groups:
                for j, (a, b) in sorted(g.terms.items()):
                    print(f"remainder fraction: ({format_expr(a)}) / "
                          f"(({format_expr(b)}) * ({format_expr(g.d)})^{j})")
    return 0


def _read_operator(path):
    with open(path) as fh:
        text = fh.read()
    parts = [p.strip() for p in text.replace("\n", ",").split(",")
             if p.strip()]
    coeffs = [_Parser(p).parse() for p in parts]
    return OreOp(coeffs)


def cmd_verify(args):
    f, _fd = parse_expression(args.expr, None)
    L = _read_operator(args.operator)
    ok = verify_telescoper(L, f)
    print(json.dumps({"valid": bool(ok)}) if args.json
          else ("valid telescoper" if ok else "not a telescoper"))
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Benchmark generator (random instances of the test family)


def _rand_poly(rng, gens, degree):
    """Random polynomial of the given total degree, integer coefficients with
    max-norm <= 5 and a nonzero top-degree part."""
    while True:
        terms = []
        top = False
        from itertools import product as iproduct
        for powers in iproduct(range(degree + 1), repeat=len(gens)):
            if sum(powers) > degree:
                continue
            c = rng.randint(-5, 5)
            if c == 0:
                continue
            if sum(powers) == degree:
                top = True
            m = sp.Integer(c)
            for g, p in zip(gens, powers):
                m *= g ** p
            terms.append(m)
        if terms and top:
            return sp.Add(*terms)


def bench_instance(m, n, xi, zeta, rng):
    """One random instance f = a / (d1 * d2) with d_i = p_i * sigma_x^xi(p_i),
    p1 = P1(xi*y - zeta*x, xi*z + zeta*x), p2 = P2(zeta*x + xi*y + 2*xi*z)."""
    u, v = sp.symbols("u v")
    while True:
        P1 = _rand_poly(rng, (u, v), n)
        P2 = _rand_poly(rng, (u,), n)
        p1 = sp.expand(P1.subs({u: xi * y - zeta * x, v: xi * z + zeta * x},
                               simultaneous=True))
        p2 = sp.expand(P2.subs(u, zeta * x + xi * y + 2 * xi * z))
        d1 = sp.expand(p1 * p1.subs(x, x + xi))
        d2 = sp.expand(p2 * p2.subs(x, x + xi))
        if sp.degree(p1, z) <= 0 or sp.degree(p2, z) <= 0:
            continue
        if sp.gcd(d1, d2) != 1 or sp.sqf_part(d1) != d1 or sp.sqf_part(d2) != d2:
            continue  # degenerate draw: shared or repeated factors
        a = _rand_poly(rng, (x, y, z), m) if m > 0 else sp.Integer(rng.randint(1, 5))
        return sp.cancel(a / (d1 * d2))


_VARIANTS = {
    "rct1": (reduction_ct, "normalized"),
    "rct2": (reduction_ct, "deferred"),
    "rct3": (reduction_ct, "none"),
    "rctlm1": (telescope_by_lclm, "normalized"),
    "rctlm2": (telescope_by_lclm, "deferred"),
    "rctlm3": (telescope_by_lclm, "none"),
}


def cmd_bench(args):
    fn, mode = _VARIANTS[args.variant]
    rng = random.Random(args.seed)
    rows = []
    for rep in range(args.reps):
        f = bench_instance(args.m, args.n, args.xi, args.zeta, rng)
        t0 = time.time()
        res = fn(f, certificate_mode=mode)
        elapsed = time.time() - t0
        rows.append({"rep": rep, "status": res.status, "order": res.order,
                     "elapsed_s": round(elapsed, 3)})
        if not args.json:
            print(f"rep {rep}: status={res.status} order={res.order} "
                  f"time={elapsed:.3f}s")
    if args.json:
        print(json.dumps({"params": {"m": args.m, "n": args.n, "xi": args.xi,
                                     "zeta": args.zeta, "seed": args.seed,
                                     "variant": args.variant},
                          "runs": rows}))
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(
        prog="trisum",
        description="Exact summability and creative telescoping for "
                    "trivariate rational functions.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, factored=True):
        p.add_argument("expr", help="rational expression in x, y, z")
        if factored:
            p.add_argument("--factored-den", default=None,
                           help="denominator given as an explicit product; "
                                "validated and used as the factorization")
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("telescope", help="compute a minimal telescoper")
    add_common(p)
    p.add_argument("--certificate", default="normalized",
                   choices=["normalized", "deferred", "none"])
    p.add_argument("--no-enhancements", action="store_true")
    p.add_argument("--lclm", action="store_true",
                   help="combine per-class telescopers by LCLM")
    p.add_argument("--monic", action="store_true",
                   help="print the monic telescoper")
    p.set_defaults(fn=cmd_telescope)

    p = sub.add_parser("summable", help="decide (sigma_y, sigma_z)-summability")
    add_common(p)
    p.set_defaults(fn=cmd_summable)

    p = sub.add_parser("reduce", help="print the reduction f = Dy(g)+Dz(h)+r")
    add_common(p)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("verify", help="verify a telescoper from a file")
    add_common(p, factored=False)
    p.add_argument("--operator", required=True,
                   help="file with comma/newline separated coefficients "
                        "(ascending powers of S_x)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench", help="random benchmark instances")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--xi", type=int, required=True)
    p.add_argument("--zeta", type=int, required=True)
    p.add_argument("--variant", default="rct2", choices=sorted(_VARIANTS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except OrderLimitError as exc:
        print(f"order limit: {exc}", file=sys.stderr)
        return 3
    except TrisumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
