"""Command-line interface.  Every subcommand prints one JSON document."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import consistency, factor, forms, gowers, homogeneous
from .errors import DEFAULT_BUDGET, HofaError, VerificationError
from .experiments import FOUR_AP, run_gowers_wolf_experiment
from .polynomial import (FunctionTable, additive_derivative, derivative_poly_eval, format_poly,
                         interpolate, parse_poly)
from .torus import check_prime, format_torus, parse_torus


def _read_text(arg: str) -> str:
    """Inline text, or the contents of a file when given ``@path`` or an existing path."""
    if arg.startswith("@"):
        with open(arg[1:]) as fh:
            return fh.read()
    if os.path.isfile(arg):
        with open(arg) as fh:
            return fh.read()
    return arg


def _point(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _points(text: str) -> list[tuple[int, ...]]:
    return [_point(chunk) for chunk in text.split(";") if chunk.strip()]


def parse_lambda(text: str) -> list[list[int]]:
    """Lambda matrix: rows separated by ``;`` (or newlines), entries by ``,``."""
    rows = [r for r in text.replace("\n", ";").split(";") if r.strip()]
    return [[int(x) for x in r.split(",")] for r in rows]


def format_lambda(rows) -> str:
    return ";".join(",".join(str(int(x)) for x in r) for r in rows)


def parse_complex_table(text: str) -> np.ndarray:
    """Whitespace/comma separated complex numbers in Python syntax (``1``, ``0.5j``, ``1-2j``)."""
    tokens = text.replace(",", " ").split()
    return np.array([complex(t) for t in tokens], dtype=np.complex128)


def _factor(args) -> factor.PolyFactor:
    text = _read_text(args.factor)
    if "\n" not in text.strip():
        text = text.replace(";", "\n")
    return factor.parse_factor(text, args.p, getattr(args, "n", None))


def _emit(obj, args) -> None:
    if args.json:
        print(json.dumps(obj, sort_keys=True, separators=(",", ":")))
    else:
        print(json.dumps(obj, sort_keys=True, indent=2))


# ---------------------------------------------------------------------------
# handlers


def cmd_poly_eval(args):
    P = parse_poly(_read_text(args.poly), args.p, args.n)
    return {"poly": format_poly(P), "x": list(_point(args.x)), "value": format_torus(P(_point(args.x)))}


def cmd_poly_interp(args):
    vals = [parse_torus(v, args.p) for v in _read_text(args.values).replace(",", " ").split()]
    n = args.n
    if n is None:
        n = round(np.log(len(vals)) / np.log(args.p))
    P = interpolate(FunctionTable.from_values(args.p, n, vals))
    return {"poly": format_poly(P), "degree": P.degree, "depth": P.depth}


def cmd_poly_deriv(args):
    P = parse_poly(_read_text(args.poly), args.p, args.n)
    hs = _points(args.h)
    if args.x is not None:
        from .polynomial import partial_derivative_eval

        return {"value": format_torus(partial_derivative_eval(P, _point(args.x), hs))}
    if len(hs) == P.degree:
        return {"value": format_torus(derivative_poly_eval(P, hs)), "constant": True}
    D = P
    for h in hs:
        D = additive_derivative(D, h)
    return {"poly": format_poly(D), "degree": D.degree}


def cmd_poly_gowers(args):
    P = parse_poly(_read_text(args.poly), args.p, args.n)
    if args.samples:
        est, err = gowers.gowers_norm_mc(P, args.d, args.samples, args.seed)
        return {"method": "monte-carlo", "norm_pow_2d": est, "stderr": err, "samples": args.samples,
                "seed": args.seed}
    return gowers.gowers_norm_poly(P, args.d, args.budget).as_dict()


def cmd_poly_bias(args):
    P = parse_poly(_read_text(args.poly), args.p, args.n)
    return {"poly": format_poly(P), "bias": gowers.bias(P, args.budget)}


def cmd_homog_sigma(args):
    s = homogeneous.teichmuller_sigma(args.p, args.d, args.k)
    return {"p": args.p, "d": args.d, "k": args.k, "sigma": s.value, "modulus": s.modulus}


def cmd_homog_check(args):
    P = parse_poly(_read_text(args.poly), args.p, args.n)
    w = homogeneous.is_homogeneous(P)
    return {"poly": format_poly(P), "degree": P.degree, "depth": P.depth, **w.as_dict()}


def cmd_homog_basis(args):
    return homogeneous.univariate_basis(args.p, args.d).as_dict()


def cmd_homog_decompose(args):
    P = parse_poly(_read_text(args.poly), args.p, args.n)
    parts = homogeneous.homogeneous_decompose(P)
    return {"poly": format_poly(P), "verified": True,
            "components": [{"coeff": c, "poly": format_poly(H), "degree": H.degree, "depth": H.depth,
                            "sigma": homogeneous.is_homogeneous(H).sigma} for c, H in parts]}


def cmd_homog_sample(args):
    P = homogeneous.homogeneous_sample(args.p, args.d, args.k, args.n, seed=args.seed,
                                       budget=args.attempts)
    return {"poly": format_poly(P), "degree": P.degree, "depth": P.depth,
            **homogeneous.is_homogeneous(P).as_dict()}


def cmd_forms_tensor(args):
    L = forms.parse_form(args.form, args.p)
    return {"form": forms.format_form(L), "d": args.d,
            "monomials": [list(m) for m in forms.monomial_index(len(L), args.d)],
            "tensor": list(forms.tensor_power(L, args.d, args.p))}


def cmd_forms_cs(args):
    return forms.cs_complexity(forms.parse_system(args.system, args.p)).as_dict()


def cmd_forms_true(args):
    return forms.true_complexity(forms.parse_system(args.system, args.p)).as_dict()


def cmd_forms_expand(args):
    L = forms.parse_form(args.form, args.p)
    if args.leading:
        out = forms.normalize_leading(L, args.d, args.p)
        return {"form": forms.format_form(L), "d": args.d,
                "terms": [{"coeff": a, "scalar": c, "form": forms.format_form(M)} for a, c, M in out]}
    out = forms.expand_high_weight(L, args.d)
    return {"form": forms.format_form(L), "d": args.d,
            "terms": [{"coeff": a, "form": forms.format_form(M)} for a, M in out]}


def cmd_forms_rewrite(args):
    terms = forms.parse_terms(args.terms, args.p)
    out = forms.canonical_rewrite(forms.formal_sum(args.p, args.d, args.k, terms))
    return {"input": forms.format_terms(terms), "normal_form": str(out), **out.as_dict()}


def cmd_forms_count(args):
    S = forms.parse_system(args.system, args.p)
    polys = [parse_poly(t, args.p, args.n) for t in _read_text(args.polys).split("|")]
    value = forms.count_operator(polys, S, args.n, args.budget, seed=args.seed)
    return {"system": forms.format_system(S), "real": value.real, "imag": value.imag, "abs": abs(value)}


def cmd_consist_phi(args):
    S = forms.parse_system(args.system, args.p)
    G = consistency.phi_sampled(args.d, args.k, S, args.nmax, seed=args.seed, budget=args.budget)
    dual = consistency.phi_from_duality(consistency.phi_perp_symbolic(args.d, args.k, S))
    out = G.as_dict()
    out["matches_duality"] = G.elements == dual.elements
    out["dual_order"] = dual.order
    return out


def cmd_consist_phiperp(args):
    S = forms.parse_system(args.system, args.p)
    A = consistency.phi_perp_symbolic(args.d, args.k, S, args.budget)
    out = A.as_dict()
    out["phi_order"] = consistency.phi_from_duality(A).order
    return out


def cmd_consist_northo(args):
    B = _factor(args)
    S = forms.parse_system(args.system, args.p)
    Lam = parse_lambda(_read_text(args.lam))
    cert = None
    if args.eps is not None:
        cert = factor.certify(B, args.eps, args.budget)
    v = consistency.near_orthogonality_check(B, S, Lam, args.eps, cert, args.budget)
    out = v.as_dict()
    if cert is not None:
        out["certificate"] = cert.as_dict()
    return out


def cmd_consist_equidist(args):
    B = _factor(args)
    S = forms.parse_system(args.system, args.p)
    target = parse_lambda(args.target) if args.target else None
    rep = consistency.equidist_experiment(B, S, args.eps, target, args.budget)
    if not rep.ok:
        raise VerificationError("equidistribution bound violated", rep.as_dict())
    return rep.as_dict()


def cmd_factor_atoms(args):
    B = _factor(args)
    return {**B.as_dict(), **factor.atom_census(B, args.budget).as_dict()}


def cmd_factor_condexp(args):
    B = _factor(args)
    vals = parse_complex_table(_read_text(args.table))
    g = factor.conditional_expectation(vals, B, args.budget)
    return {"real": [float(v.real) for v in g.values], "imag": [float(v.imag) for v in g.values]}


def cmd_factor_search(args):
    sigs = [tuple(int(x) for x in s.split(",")) for s in args.signatures.split(";")]
    B = factor.uniform_factor_search(sigs, args.p, args.n, args.eps, seed=args.seed,
                                     budget=args.attempts)
    return B.as_dict()


def cmd_experiment_gw(args):
    rep = run_gowers_wolf_experiment(args.p, args.n, args.system, args.seed, args.cubics,
                                     args.steps, args.budget)
    out = rep.as_dict()
    if not rep.ok:
        raise VerificationError("Gowers-Wolf experiment assertions failed", out)
    return out


# ---------------------------------------------------------------------------
# parser


def _common(defaults: bool) -> argparse.ArgumentParser:
    sup = argparse.SUPPRESS
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--p", type=int, default=None if defaults else sup,
                   help="field characteristic (default 2; 5 for the experiment)")
    c.add_argument("--seed", type=int, default=0 if defaults else sup)
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET if defaults else sup,
                   help="maximum enumeration size")
    c.add_argument("--json", action="store_true", default=False if defaults else sup,
                   help="compact single-line JSON")
    return c


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hofa", parents=[_common(True)],
                                     description="Exact computations with non-classical polynomials over F_p^n.")
    common = _common(False)
    top = parser.add_subparsers(dest="group", required=True)

    def leaf(sub, name, func, help_=None):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    def poly_args(p, poly=True):
        if poly:
            p.add_argument("--poly", required=True)
        p.add_argument("--n", type=int, default=None)

    g = top.add_parser("poly").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "eval", cmd_poly_eval); poly_args(p); p.add_argument("--x", required=True)
    p = leaf(g, "interp", cmd_poly_interp); poly_args(p, False); p.add_argument("--values", required=True)
    p = leaf(g, "deriv", cmd_poly_deriv); poly_args(p)
    p.add_argument("--h", required=True, help="directions h1;h2;..."); p.add_argument("--x", default=None)
    for sub in (g, top):
        p = leaf(sub, "gowers", cmd_poly_gowers); poly_args(p)
        p.add_argument("--d", type=int, required=True); p.add_argument("--samples", type=int, default=0)
    p = leaf(g, "bias", cmd_poly_bias); poly_args(p)

    g = top.add_parser("homog").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "sigma", cmd_homog_sigma); p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p = leaf(g, "check", cmd_homog_check); poly_args(p)
    p = leaf(g, "basis", cmd_homog_basis); p.add_argument("--d", type=int, required=True)
    p = leaf(g, "decompose", cmd_homog_decompose); poly_args(p)
    p = leaf(g, "sample", cmd_homog_sample)
    for a in ("--d", "--k", "--n"):
        p.add_argument(a, type=int, required=True)
    p.add_argument("--attempts", type=int, default=10_000)

    g = top.add_parser("forms").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "tensor", cmd_forms_tensor); p.add_argument("--form", required=True)
    p.add_argument("--d", type=int, required=True)
    p = leaf(g, "cs-complexity", cmd_forms_cs); p.add_argument("--system", required=True)
    p = leaf(g, "true-complexity", cmd_forms_true); p.add_argument("--system", required=True)
    p = leaf(g, "expand", cmd_forms_expand); p.add_argument("--form", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--leading", action="store_true", help="normalize to leading coefficient 1")
    p = leaf(g, "rewrite", cmd_forms_rewrite); p.add_argument("--terms", required=True)
    p.add_argument("--d", type=int, required=True); p.add_argument("--k", type=int, required=True)
    p = leaf(g, "count", cmd_forms_count); p.add_argument("--system", required=True)
    p.add_argument("--polys", required=True, help="phases e(P_i), separated by |")
    p.add_argument("--n", type=int, required=True)

    g = top.add_parser("consist").add_subparsers(dest="cmd", required=True)
    for name, fn in (("phi", cmd_consist_phi), ("phiperp", cmd_consist_phiperp)):
        p = leaf(g, name, fn); p.add_argument("--system", required=True)
        p.add_argument("--d", type=int, required=True); p.add_argument("--k", type=int, required=True)
        if name == "phi":
            p.add_argument("--nmax", type=int, default=3)
    p = leaf(g, "northo", cmd_consist_northo); p.add_argument("--factor", required=True)
    p.add_argument("--system", required=True); p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--eps", type=float, default=None); p.add_argument("--n", type=int, default=None)
    p = leaf(g, "equidist", cmd_consist_equidist); p.add_argument("--factor", required=True)
    p.add_argument("--system", required=True); p.add_argument("--eps", type=float, required=True)
    p.add_argument("--target", default=None); p.add_argument("--n", type=int, default=None)

    g = top.add_parser("factor").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "atoms", cmd_factor_atoms); p.add_argument("--factor", required=True)
    p.add_argument("--n", type=int, default=None)
    p = leaf(g, "condexp", cmd_factor_condexp); p.add_argument("--factor", required=True)
    p.add_argument("--table", required=True); p.add_argument("--n", type=int, default=None)
    p = leaf(g, "search", cmd_factor_search); p.add_argument("--signatures", required=True)
    p.add_argument("--n", type=int, required=True); p.add_argument("--eps", type=float, required=True)
    p.add_argument("--attempts", type=int, default=200)

    g = top.add_parser("experiment").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "gowers-wolf", cmd_experiment_gw)
    p.set_defaults(default_p=5)
    p.add_argument("--system", default=FOUR_AP); p.add_argument("--n", type=int, default=2)
    p.add_argument("--cubics", type=int, default=4); p.add_argument("--steps", type=int, default=11)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.p is None:
        args.p = getattr(args, "default_p", 2)
    try:
        check_prime(args.p)
        result = args.func(args)
    except VerificationError as exc:
        _emit(exc.record, args)
        return 1
    except (HofaError, ValueError, OSError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)}, args)
        return 2
    _emit(result, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
