"""Command-line interface: ``solvflow <command> [options]``.

Every command prints one JSON document (``"schema": 1``) unless ``--format``
asks for csv or text. Exit status is 0 when all gated checks pass, 1 when a
check fails and 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import curvature, flow, killing, lie_core, soliton, subalgebras
from .group_atlas import GroupModel, g4_model, parse_model, s3_lambda, s3_lambda1_lambda2, s3p_lambda

SCHEMA = 1

TAG_ALIASES = {
    "k0": "K0", "ka": "K_a", "k_a": "K_a", "k1b": "K1_b", "k1_b": "K1_b", "k2a": "K2_a", "k2_a": "K2_a",
    "k3cd": "K3_cd", "k3_cd": "K3_cd", "k4ef": "K4_ef", "k4_ef": "K4_ef", "h3": "G4_H3", "g4_h3": "G4_H3",
    "sl2_k1": "SL2_K1", "sl2_k2": "SL2_K2", "sl2_k3_rho": "SL2_K3_rho", "rho": "SL2_K3_rho",
}
MODEL_KEYS = {"lambda": "lambda", "l": "lambda", "λ": "lambda", "l1": "l1", "λ1": "l1", "lambda1": "l1",
              "l2": "l2", "λ2": "l2", "lambda2": "l2"}


class UsageError(ValueError):
    pass


def parse_params(text: str | None) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"bad parameter {item!r}; expected key=value")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"bad value in {item!r}") from None
    return out


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def canonical_tag(tag: str) -> str:
    return TAG_ALIASES.get(tag.lower(), tag)


def resolve_model(args, tag: str | None = None) -> GroupModel:
    """Model from ``--model``, else inferred from the family tag and the model keys in ``--params``."""
    if args.model:
        return parse_model(args.model)
    params = {MODEL_KEYS[k]: v for k, v in parse_params(args.params).items() if k in MODEL_KEYS}
    if tag == "G4_H3":
        return g4_model()
    if {"l1", "l2"} <= set(params):
        return s3_lambda1_lambda2(params["l1"], params["l2"])
    if "lambda" in params and tag == "K_a":
        return s3_lambda(params["lambda"])
    if "lambda" in params and tag in ("K3_cd", "K4_ef"):
        return s3_lambda1_lambda2(params["lambda"], params["lambda"])
    raise UsageError("cannot infer the model; pass --model")


def family_params(model: GroupModel, tag: str, args) -> tuple:
    fam = subalgebras.family(model.algebra, tag)
    given = {k: v for k, v in parse_params(args.params).items() if k not in MODEL_KEYS}
    missing = [p for p in fam.param_names if p not in given]
    if missing:
        raise UsageError(f"{tag} needs parameters {fam.param_names}; missing {missing}")
    extra = set(given) - set(fam.param_names)
    if extra:
        raise UsageError(f"unknown parameters {sorted(extra)} for {tag}")
    return tuple(given[p] for p in fam.param_names)


def resolve_algebra(args) -> lie_core.LieAlgebra:
    spec = args.model
    if not spec:
        raise UsageError("--model is required")
    key = spec.strip()
    if key.lower() in ("sl2", "su2", "h3", "g4"):
        return lie_core.algebra(key.lower())
    try:
        return parse_model(spec).algebra
    except ValueError:
        pass
    params = parse_params(args.params)
    return lie_core.algebra(key, tuple(params.values()))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_algebra(args):
    A = resolve_algebra(args)
    info = {
        "algebra": A.name, "params": list(A.params), "dim": A.dim,
        "unimodular": lie_core.is_unimodular(A), "solvable": lie_core.is_solvable(A),
        "derived_series": lie_core.derived_series(A), "jacobi_residual": lie_core.jacobi_residual(A),
    }
    if args.query:
        q = args.query.replace("-", "_")
        if q not in info:
            raise UsageError(f"unknown query {args.query!r}; choose from {sorted(info)}")
        return {"query": q, "value": info[q]}, True, json.dumps(info[q], ensure_ascii=False)
    return info, True, None


def cmd_subgroups(args):
    A = resolve_algebra(args)
    if args.search:
        rep = subalgebras.random_search_verify(A, args.trials, args.seed)
        return {"search": rep.to_dict()}, rep.ok, None
    fams = subalgebras.catalogue_subalgebras(A)
    out = []
    for fam in fams:
        if args.family and canonical_tag(args.family) != fam.tag:
            continue
        row = {"family_tag": fam.tag, "param_names": list(fam.param_names)}
        if args.family:
            given = {k: v for k, v in parse_params(args.params).items() if k in fam.param_names}
            if len(given) == fam.nparams:
                K = fam.instantiate(tuple(given[p] for p in fam.param_names))
                row.update(K.to_dict())
        out.append(row)
    return {"algebra": A.name, "params": list(A.params), "families": out}, True, None


def cmd_curvature(args):
    if args.model and args.family:
        m = parse_model(args.model)
        tag = canonical_tag(args.family)
        K = subalgebras.subalgebra(m.algebra, tag, family_params(m, tag, args))
        rows = [curvature.curvature_row(tag, m.algebra, K)]
    else:
        rows = curvature.mean_curvature_table(draws=args.draws, seed=args.seed, tol=np.inf)
    ok = all(r.error < args.tol for r in rows)
    if args.format == "csv":
        return None, ok, curvature.table_to_csv(rows)
    return {"rows": [r.to_dict() for r in rows], "pass": ok}, ok, None


def cmd_killing(args):
    if not args.model:
        raise UsageError("--model is required")
    m = parse_model(args.model)
    rng = np.random.default_rng(args.seed)
    sample = rng.uniform(-1, 1, size=(args.samples, m.dim))
    rows = killing.residual_report(m, sample, literal=args.literal)
    ok = all(r["residual_sup"] < args.tol for r in rows)
    return {"model": m.spec, "literal": args.literal, "tol": args.tol, "generators": rows, "pass": ok}, ok, None


def cmd_soliton(args):
    if args.model and args.family:
        m = parse_model(args.model)
        tag = canonical_tag(args.family)
        K = subalgebras.subalgebra(m.algebra, tag, family_params(m, tag, args))
        rep = soliton.translator_solve(m, K, seed=args.seed)
        return {"reports": [rep.to_dict()]}, True, None
    rows = soliton.theorem_table(args.seed)
    ok = all(match for _, _, match in rows)
    check = soliton.abelian_iff_translator_check(args.seed)
    return {
        "cells": [dict(rep.to_dict(), expected_status=c.status, expected_direction=c.direction, match=match)
                  for c, rep, match in rows],
        "abelian_iff_translator": check.to_dict(),
        "pass": ok,
    }, ok, None


def _flow_solution(args):
    tag = canonical_tag(args.family) if args.family else None
    if not tag:
        raise UsageError("--family is required")
    m = resolve_model(args, tag)
    return m, flow.closed_form_solution(m, tag, family_params(m, tag, args), args.variant)


def cmd_flow_verify(args):
    m, sol = _flow_solution(args)
    grid = tuple(int(g) for g in parse_floats(args.grid))
    rep = flow.verify_flow(m, sol, parse_floats(args.times), args.tol, grid)
    return rep.to_dict(), rep.passed, None


def cmd_flow_integrate(args):
    m, sol = _flow_solution(args)
    grid = tuple(int(g) for g in parse_floats(args.grid))
    rep, traj = flow.integrate_against(sol, grid, args.dt, args.steps, tol=args.tol)
    if args.format == "csv":
        return None, rep.passed, flow.trajectory_csv(traj)
    return rep.to_dict(), rep.passed, None


def cmd_reproduce(args):
    rows = reproduce_paper(seed=args.seed, integrate=not args.skip_integration)
    ok = all(r["pass"] for r in rows if r.get("gated", True))
    if args.format == "text":
        lines = [f"{'PASS' if r['pass'] else 'FAIL'}{'' if r.get('gated', True) else ' (info)'}  {r['item']}: {r['detail']}"
                 for r in rows]
        return None, ok, "\n".join(lines) + "\n"
    return {"rows": rows, "pass": ok}, ok, None


# ---------------------------------------------------------------------------
# reproduction table
# ---------------------------------------------------------------------------

def _flow_draws(rng):
    """Five random parameter sets for every closed-form evolution family."""
    def nz(lo=-1.5, hi=1.5):
        while True:
            x = float(rng.uniform(lo, hi))
            if abs(x) > 0.2:
                return x

    draws = []
    for _ in range(5):
        lam = nz()
        l1, l2 = nz(), nz()
        l0 = nz()
        leq = nz()
        draws += [
            (s3_lambda(lam), "K0", ()), (s3_lambda(lam), "K_a", (nz(),)),
            (s3_lambda1_lambda2(l1, l2), "K0", ()), (s3_lambda1_lambda2(l1, l2), "K1_b", (nz(),)),
            (s3_lambda1_lambda2(l1, l2), "K2_a", (nz(),)),
            (s3_lambda1_lambda2(l0, 0.0), "K0", ()), (s3_lambda1_lambda2(l0, 0.0), "K1_b", (nz(),)),
            (s3_lambda1_lambda2(l0, 0.0), "K2_a", (nz(),)),
            (s3_lambda1_lambda2(leq, leq), "K0", ()), (s3_lambda1_lambda2(leq, leq), "K3_cd", (nz(), nz())),
            (s3_lambda1_lambda2(leq, leq), "K4_ef", (nz(), nz())),
            (s3p_lambda(lam), "K0", ()),
        ]
    draws.append((g4_model(), "G4_H3", ()))
    return draws


def reproduce_paper(seed: int = 0, integrate: bool = True) -> list[dict]:
    rows = []

    def add(item, passed, detail, gated=True):
        rows.append({"item": item, "pass": bool(passed), "detail": detail, "gated": gated})

    for r in curvature.mean_curvature_table(draws=5, seed=seed, tol=np.inf):
        add(f"H {r.regime} {list(r.family_params)} on {list(r.params)}", r.error < 1e-10,
            f"numeric {r.H_numeric:.12g} closed form {r.H_closed_form:.12g}")

    rng = np.random.default_rng(seed)
    worst = 0.0
    for A in (lie_core.heisenberg(), lie_core.r3_lambda1_lambda2(1.3, -1.3), lie_core.r3p_lambda(0.0), lie_core.sl2()):
        for fam in subalgebras.catalogue_subalgebras(A):
            for _ in range(5):
                K = fam.instantiate(rng.uniform(-3, 3, fam.nparams))
                worst = max(worst, abs(curvature.mean_curvature_trace(A, K)))
    add("unimodular subgroups are minimal (h3, r3[l,-l], r3p[0], sl2)", worst < 1e-12, f"max |H| {worst:.1e}")

    for A in (lie_core.r3_lambda(1.0), lie_core.heisenberg(), lie_core.r3_lambda1_lambda2(1.0, 2.0),
              lie_core.r3_lambda1_lambda2(1.0, 0.0), lie_core.r3_lambda1_lambda2(1.0, 1.0), lie_core.r3p_lambda(0.5),
              lie_core.sl2(), lie_core.su2()):
        rep = subalgebras.random_search_verify(A, trials=100_000, seed=seed)
        ok = rep.ok and (A.name != "su2" or rep.found == 0)
        add(f"random search {A.name}{list(A.params)}", ok, f"found {rep.found}, unmatched {len(rep.unmatched)}")

    for m in (s3_lambda(1.0), s3_lambda(0.0), s3_lambda1_lambda2(1.0, 2.0), s3_lambda1_lambda2(1.5, 0.0),
              s3_lambda1_lambda2(0.7, 0.7), s3p_lambda(0.5), g4_model()):
        P = rng.uniform(-1, 1, (50, m.dim))
        for r in killing.residual_report(m, P):
            add(f"Killing {r['generator_name']} in {m.spec}", r["residual_sup"] < killing.KILLING_TOL,
                f"residual {r['residual_sup']:.1e}")
    for m, names in ((s3_lambda1_lambda2(1.5, 0.0), ("T~",)), (s3_lambda1_lambda2(0.7, 0.7), ("T2~", "T3~"))):
        P = rng.uniform(-1, 1, (50, 3))
        for r in killing.residual_report(m, P, literal=True):
            if r["generator_name"] in names:
                add(f"Killing {r['generator_name']} in {m.spec} (printed form)", r["residual_sup"] < killing.KILLING_TOL,
                    f"residual {r['residual_sup']:.1e}", gated=False)
    m = s3_lambda1_lambda2(1.0, 2.0)
    control = killing.vector_field(m, lambda p: np.stack([p[..., 2], 0 * p[..., 0], 0 * p[..., 0]], -1), "z d_x")
    res = killing.killing_residual(m, control, rng.uniform(-1, 1, (50, 3)))
    add("Killing negative control z d_x rejected", res > 1e-2, f"residual {res:.2f}")

    gap = 0.0
    for _ in range(1000):
        _, A, K = curvature.sample_instance(rng)
        gap = max(gap, abs(curvature.mean_curvature_trace(A, K) - curvature.mean_curvature_direct(A, K)))
    add("trace and direct mean curvature agree (1000 instances)", gap < 1e-10, f"max gap {gap:.1e}")

    for cell, rep, match in soliton.theorem_table(seed):
        add(f"translator {cell.tag}{list(cell.params)} in {cell.model.spec}", match,
            f"{rep.status} {rep.direction} residual {max(rep.residual, rep.fresh_residual):.2e}")
    check = soliton.abelian_iff_translator_check(seed)
    for e in check.exceptions:
        add(f"abelian-or-minimal iff translator: {e['family_tag']}{e['family_params']} in {e['model']}",
            False, f"status {e['status']}, abelian {e['abelian']}", gated=False)

    rng = np.random.default_rng(seed)
    for m, tag, params in _flow_draws(rng):
        grid = (41,) * (m.dim - 1)
        for variant in ("corrected", "literal"):
            sol = flow.closed_form_solution(m, tag, params, variant)
            rep = flow.verify_flow(m, sol, (0.0, 0.1, 0.5), flow.FLOW_TOL, grid)
            add(f"flow {variant} {tag}{[round(float(x), 6) for x in params]} in {m.spec}", rep.passed,
                f"sup residual {rep.sup_residual:.2e}", gated=(variant == "corrected"))
        sol = flow.closed_form_solution(m, tag, params)
        gap = flow.initial_consistency(sol, (11,) * sol.k)
        add(f"patch H at t=0 {tag}{[round(float(x), 6) for x in params]} in {m.spec}", gap < 1e-6, f"gap {gap:.1e}")

    m = s3_lambda1_lambda2(1.0, 2.0)
    for variant in ("corrected", "literal"):
        sol = flow.closed_form_solution(m, "K1_b", (1.0,), variant)
        err = max(
            float(np.max(np.abs(sol.geometry(*flow._mesh(2, (41, 41), 1.0), t=t).H
                                - flow.worked_case_H(1.0, 2.0, 1.0, t, sol.kappa))))
            for t in (0.0, 0.1, 0.5)
        )
        add(f"worked case H^t formula ({variant} rate)", err < 1e-8, f"max deviation {err:.2e}")

    if integrate:
        sol = flow.closed_form_solution(m, "K1_b", (1.0,))
        rep, _ = flow.integrate_against(sol, (41, 41), 1e-4, 1000)
        add("integrate K1_b (1,2) b=1, 41x41, dt=1e-4, t=0.1", rep.passed, f"sup distance {rep.sup_distance:.2e}")
        coarse, _ = flow.integrate_against(sol, (21, 21), 1e-4, 1000)
        fine, _ = flow.integrate_against(sol, (41, 41), 5e-5, 2000)
        factor = coarse.sup_distance / fine.sup_distance
        add("integrator refinement (21x21, 1e-4) -> (41x41, 5e-5)", 1.7 <= factor <= 4.3, f"factor {factor:.3f}")
    return rows


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="solvflow", description="Subgroups, Killing fields and mean curvature flow in solvable Lie groups.")

    def common(sp, tol=1e-10):
        sp.add_argument("--model", help="model spec, e.g. s3ll:l1=1,l2=2, s3l:lambda=1, s3p:lambda=0.5, g4, h3, sl2")
        sp.add_argument("--family", help="family tag, e.g. K0, K_a, K1b, K2a, K3cd, K4ef, H3")
        sp.add_argument("--params", help="k=v,... for family (and model) parameters")
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--format", choices=("json", "csv", "text"), default="json")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--seed", type=int, default=0)

    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("algebra", help="structure of a catalogued algebra")
    common(s)
    s.add_argument("query", nargs="?", help="unimodular, solvable, derived_series, ...")
    s.set_defaults(func=cmd_algebra)

    s = sub.add_parser("subgroups", help="catalogued 2D subalgebras; --search runs the random search")
    common(s)
    s.add_argument("--search", action="store_true")
    s.add_argument("--trials", type=int, default=100_000)
    s.set_defaults(func=cmd_subgroups)

    s = sub.add_parser("curvature", help="mean curvature of a family, or the full table")
    common(s)
    s.add_argument("--draws", type=int, default=5)
    s.set_defaults(func=cmd_curvature)

    s = sub.add_parser("killing", help="Killing residuals of the generator basis")
    common(s, tol=killing.KILLING_TOL)
    s.add_argument("--samples", type=int, default=50)
    s.add_argument("--literal", action="store_true", help="use the printed rotational generators")
    s.set_defaults(func=cmd_killing)

    s = sub.add_parser("soliton", help="translator classification")
    common(s)
    s.set_defaults(func=cmd_soliton)

    def flow_opts(sp, integrate):
        common(sp, tol=5e-3 if integrate else flow.FLOW_TOL)
        sp.add_argument("--variant", choices=("corrected", "literal"), default="corrected")
        sp.add_argument("--grid", default="41,41")
        if integrate:
            sp.add_argument("--dt", type=float, default=1e-4)
            sp.add_argument("--steps", type=int, default=1000)
            sp.set_defaults(func=cmd_flow_integrate)
        else:
            sp.add_argument("--times", default="0,0.1,0.5")
            sp.set_defaults(func=cmd_flow_verify)

    s = sub.add_parser("flow", help="closed-form flow verification and integration")
    fsub = s.add_subparsers(dest="flow_command", required=True)
    flow_opts(fsub.add_parser("verify"), False)
    flow_opts(fsub.add_parser("integrate"), True)
    flow_opts(sub.add_parser("flow-verify"), False)
    flow_opts(sub.add_parser("flow-integrate"), True)

    s = sub.add_parser("reproduce-paper", help="every tabulated value with pass/fail")
    common(s)
    s.add_argument("--skip-integration", action="store_true")
    s.set_defaults(func=cmd_reproduce)
    return p


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, ok, text = args.func(args)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if text is None:
        doc = {"schema": SCHEMA, "command": args.command}
        doc.update(payload)
        text = json.dumps(doc, indent=2, ensure_ascii=False, default=_json_default) + "\n"
    elif args.format == "text" and not text.endswith("\n"):
        text += "\n"
    _emit(text, args.out)
    return 0 if ok else 1


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj))


if __name__ == "__main__":
    sys.exit(main())
