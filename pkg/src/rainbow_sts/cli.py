"""Command-line entry point.

Exit codes: 0 success, 2 Unsat/Infeasible, 3 timed out, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .designs import (FOUND, TIMED_OUT, UNSAT, Budget, construct_sts, count_decompositions,
                      exact_cover_k3, rainbow_exact_cover, verify_rainbow, verify_sts)
from .errors import DivisibilityViolation, RainbowSTSError, SearchTimeout, SpecViolation, StageFailure
from .hypercore import PairGraph, TripleSystem, dumps_h3, read_g2, read_h3

EXIT_OK, EXIT_UNSAT, EXIT_TIMEOUT, EXIT_INVARIANT = 0, 2, 3, 4


def _status_code(status: str) -> int:
    return {FOUND: EXIT_OK, UNSAT: EXIT_UNSAT, TIMED_OUT: EXIT_TIMEOUT}.get(status, EXIT_INVARIANT)


def _budget(args) -> Budget:
    return Budget(args.budget_nodes, args.budget_secs)


def _emit(args, report, kind: str, files: dict | None = None) -> None:
    from .pipeline import emit_report
    if files and args.out:
        report = {**report, "files": files}
    text_json, _ = emit_report(report, args.out + ".json" if args.out else None, seed=args.seed, kind=kind)
    if not args.out:
        print(text_json)


def _write_text(path: str, text: str) -> str:
    Path(path).write_text(text)
    return path


def _family(args):
    from .pipeline import generate_family
    params = {k: v for k, v in (("p", args.p), ("k", args.k), ("q", args.q), ("pool", args.pool)) if v is not None}
    return generate_family(args.n, args.model, params, args.seed)


def _add_family_args(p, n_required=True):
    p.add_argument("--n", type=int, required=n_required)
    p.add_argument("--model", default="complete", choices=["complete", "minus-p", "minus-k", "extremal"])
    p.add_argument("--p", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--q", type=Fraction)
    p.add_argument("--pool", type=int)


# ---------------------------------------------------------------------------
# subcommands

def cmd_sts(args) -> int:
    if args.action == "build":
        S = construct_sts(args.n)
        H = S.as_system(args.n)
        files = {}
        if args.out:
            files["h3"] = _write_text(args.out + ".h3", dumps_h3(H))
        _emit(args, {"n": args.n, "triples": len(S), "verified": verify_sts(S, args.n)}, "sts-build", files)
        return EXIT_OK
    if args.action == "verify":
        H = read_h3(args.file)
        ok = verify_sts(list(H.edges), H.n) and H.is_simple
        _emit(args, {"file": args.file, "n": H.n, "verified": ok}, "sts-verify")
        return EXIT_OK if ok else EXIT_INVARIANT
    try:
        count = count_decompositions(PairGraph.complete(args.n), budget=_budget(args))
    except SearchTimeout as exc:
        _emit(args, {"n": args.n, "status": TIMED_OUT, "reason": str(exc)}, "sts-count")
        return EXIT_TIMEOUT
    _emit(args, {"n": args.n, "count": count}, "sts-count")
    return EXIT_OK if count else EXIT_UNSAT


def cmd_cover(args) -> int:
    G = read_g2(args.graph) if args.graph else PairGraph.complete(args.n)
    allowed = read_h3(args.allowed) if args.allowed else None
    out = exact_cover_k3(G, allowed, _budget(args))
    files = {}
    if args.out and out.found:
        files["h3"] = _write_text(args.out + ".h3", dumps_h3(out.witness.as_system(G.n)))
    _emit(args, out.as_dict(), "cover", files)
    return _status_code(out.status)


def cmd_rainbow(args) -> int:
    fam, reports = _family(args)
    G = read_g2(args.graph) if args.graph else PairGraph.complete(args.n)
    out = rainbow_exact_cover(G, fam, budget=_budget(args))
    rep = out.as_dict()
    rep["family"] = reports
    if out.found:
        rep["checked"] = verify_rainbow(out.witness, G, fam)
    _emit(args, rep, "rainbow-cover")
    if out.found and not rep["checked"]:
        return EXIT_INVARIANT
    return _status_code(out.status)


def cmd_extremal(args) -> int:
    from .extremal import (ExtremalSpec, audit_extremal, build_extremal, codegree_bound, default_spec,
                           exact_min_codegree, kind_counts, parity_certificate)
    try:
        spec = ExtremalSpec(args.n, tuple(int(x) for x in args.sizes.split(","))) if args.sizes else default_spec(args.n)
    except SpecViolation as exc:
        _emit(args, {"error": str(exc)}, "extremal")
        return EXIT_INVARIANT
    rep = {"n": spec.n, "sizes": list(spec.sizes), "parity_certificate": parity_certificate(spec),
           "parity_odd": parity_certificate(spec) % 2 == 1}
    files = {}
    if args.action == "build":
        H = build_extremal(spec)
        rep["kinds"] = kind_counts(spec)
        if args.out:
            files["h3"] = _write_text(args.out + ".h3", dumps_h3(H))
    elif args.action == "audit":
        rep["audit"] = audit_extremal(spec).as_dict()
        rep["exact_min_codegree"] = exact_min_codegree(spec)
        rep["bound"] = codegree_bound(spec.n)
    else:
        out = exact_cover_k3(PairGraph.complete(spec.n), build_extremal(spec), _budget(args))
        rep["search"] = out.as_dict()
        _emit(args, rep, "extremal-certify")
        if out.status == FOUND:
            return EXIT_INVARIANT if rep["parity_odd"] else EXIT_OK
        return EXIT_UNSAT if out.status == UNSAT else EXIT_TIMEOUT
    _emit(args, rep, "extremal-" + args.action, files)
    return EXIT_OK


def cmd_frac(args) -> int:
    from . import fractional as fr
    if args.action == "constant":
        return cmd_constant(args)
    files = {}
    if args.action == "check":
        psi = fr.loads_w3(Path(args.weights).read_text())
        H = read_h3(args.h3) if args.h3 else TripleSystem(psi.n, psi.support())
        ok = fr.is_perfect_fstss(psi, H)
        _emit(args, {"perfect_fstss": ok, "support": len(psi.support()), "max_weight": psi.norm(),
                     "min_weight": psi.min_weight()}, "frac-check")
        return EXIT_OK if ok else EXIT_INVARIANT
    H = read_h3(args.h3)
    if args.action == "uniform":
        psi = fr.uniform_weight(H)
        rep = {"weight": next(iter(psi.weights.values()))}
    elif args.action == "flow-decompose":
        psi, net, res = fr.flow_fstss(H)
        rep = {"flow": res.value, "demand": net.demand,
               "perfect_fstss": fr.is_perfect_fstss(psi, H), "min_weight": psi.min_weight()}
        if not rep["perfect_fstss"]:
            _emit(args, rep, "frac-flow")
            return EXIT_UNSAT
    elif args.action == "regularize":
        try:
            psi = fr.regularize(H, args.C, Fraction(args.gamma))
        except RainbowSTSError as exc:
            _emit(args, {"error": str(exc)}, "frac-regularize")
            return EXIT_UNSAT
        rep = {"max_weight": psi.norm(), "bound": Fraction(args.gamma) + Fraction(1, 2 ** int(Fraction(args.gamma) * args.C)),
               "perfect": fr.is_perfect_matching(psi, H), "meta": psi.meta}
    else:  # discretize
        psi = fr.loads_w3(Path(args.weights).read_text())
        F, rep = fr.discretize(H, psi, args.D, Fraction(args.d))
        if args.out:
            files["h3"] = _write_text(args.out + ".h3", dumps_h3(F))
        _emit(args, rep, "frac-discretize", files)
        return EXIT_OK if rep["passed"] and rep["rounding_ok"] else EXIT_INVARIANT
    if args.out:
        files["w3"] = _write_text(args.out + ".w3", fr.dumps_w3(psi))
    elif args.print_weights:
        print(fr.dumps_w3(psi), end="")
    _emit(args, rep, "frac-" + args.action, files)
    return EXIT_OK


def cmd_gadget(args) -> int:
    from . import gadgets as gd
    if args.action == "degeneracy":
        H = read_h3(args.h3)
        roots = [int(x) for x in args.roots.split(",")] if args.roots else []
        d, order = gd.edge_degeneracy(H, roots)
        rep = {"degeneracy": d, "ordering": order}
        if len(set(range(H.n)) - set(roots)) <= 20:
            rep["bruteforce"] = gd.edge_degeneracy_bruteforce(H, roots)
        _emit(args, rep, "gadget-degeneracy")
        return EXIT_OK
    G = read_g2(args.graph)
    if args.action == "transformer":
        g = gd.build_subdivision_transformer(G)
        ok = gd.verify_transformer(g, g.S, g.S2, _budget(args))
    else:
        g = gd.build_absorber(G)
        ok = gd.verify_absorber(g, G, _budget(args))
    d, _ = gd.gadget_degeneracy(g)
    rep = {"kind": g.kind, "triples": g.gadget.size, "vertices": g.n, "verified": ok.ok,
           "reasons": ok.reasons, "degeneracy": d}
    files = {}
    if args.out:
        files["h3"] = _write_text(args.out + ".h3", dumps_h3(g.gadget))
        cert = {"kind": g.kind, "decompositions": [c.as_dict() for c in g.certified_decomps]}
        files["certificate"] = _write_text(args.out + ".cert.json", json.dumps(cert, sort_keys=True))
    _emit(args, rep, "gadget-" + args.action, files)
    return EXIT_OK if ok.ok else EXIT_INVARIANT


def cmd_vortex(args) -> int:
    from .vortex import VortexChain, sample_transversal_vortex, verify_vortex
    fam, _ = _family(args)
    if args.action == "verify":
        chain = VortexChain.loads(Path(args.chain).read_text())
        res = verify_vortex(chain, fam)
        _emit(args, res, "vortex-verify")
        return EXIT_OK if res["passed"] else EXIT_INVARIANT
    try:
        chain = sample_transversal_vortex(fam, Fraction(args.eps), args.m_prime, Fraction(args.alpha),
                                          seed=args.seed, retries=args.retries)
    except RainbowSTSError as exc:
        _emit(args, {"error": str(exc), **getattr(exc, "detail", {})}, "vortex-sample")
        return EXIT_UNSAT
    files = {}
    if args.out:
        files["chain"] = _write_text(args.out + ".chain.json", chain.dumps())
    _emit(args, chain.as_dict(), "vortex-sample", files)
    return EXIT_OK if chain.report["verification"]["passed"] else EXIT_INVARIANT


def _load_config(path: str) -> dict:
    text = Path(path).read_text()
    if path.endswith((".yaml", ".yml")):
        import yaml
        return yaml.safe_load(text)
    return json.loads(text)


def cmd_coverdown(args) -> int:
    from .coverdown import desk_instance, run_coverdown
    cfg = _load_config(args.config) if args.config else {}
    seed = cfg.pop("seed", args.seed)
    kw = {k: cfg[k] for k in ("n", "eps", "p", "pool", "mu", "y_size", "x_sizes") if k in cfg}
    for k in ("eps", "mu"):
        if k in kw:
            kw[k] = Fraction(str(kw[k]))
    inp = desk_instance(seed=seed, **kw)
    try:
        out = run_coverdown(inp, rng=seed)
    except StageFailure as exc:
        _emit(args, {"stage": exc.stage, "reason": exc.reason}, "coverdown")
        return EXIT_UNSAT
    rep = out.as_dict()
    files = {}
    if args.out:
        files["h3"] = _write_text(args.out + ".h3", dumps_h3(out.T))
    _emit(args, rep, "coverdown", files)
    concl = out.diagnostics.get("conclusions", {})
    ok = concl.get("2", {}).get("passed", True) and concl.get("5", {}).get("passed", True)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_pipeline(args) -> int:
    from .pipeline import PipelineConfig, run_pipeline
    cfg = _load_config(args.config) if args.config else {}
    if args.n is not None:
        cfg["n"] = args.n
    cfg.setdefault("model", args.model)
    params = cfg.setdefault("params", {})
    for k in ("p", "k", "q", "pool"):
        v = getattr(args, k)
        if v is not None:
            params[k] = v if not isinstance(v, Fraction) else str(v)
    cfg.setdefault("seed", args.seed)
    cfg.setdefault("max_nodes", args.budget_nodes)
    cfg.setdefault("max_seconds", args.budget_secs)
    try:
        rep = run_pipeline(PipelineConfig.from_dict(cfg))
    except DivisibilityViolation as exc:
        _emit(args, {"status": "Failed", "failure": {"stage": "input", "reason": str(exc)}}, "pipeline")
        return EXIT_UNSAT
    files = {}
    if args.out and rep["status"] == "Found":
        src = rep["result"] if "result" in rep and all(rep["result"]["check"].values()) else rep["fallback"]
        files["h3"] = _write_text(args.out + ".h3", dumps_h3(TripleSystem(cfg["n"], src["triples"])))
        files["colors"] = _write_text(args.out + ".colors.json", json.dumps(
            {"triples": src["triples"], "colors": src["colors"]}, sort_keys=True))
    _emit(args, rep, "pipeline", files)
    if rep["status"] == "Found":
        return EXIT_OK
    stage = rep.get("failure", {}).get("stage", "")
    return EXIT_INVARIANT if stage.startswith("invariant") or stage == "verify" else EXIT_UNSAT


def cmd_constant(args) -> int:
    from .fractional import threshold_constant
    _emit(args, threshold_constant(), "constant")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget-nodes", type=int, default=10**8)
    common.add_argument("--budget-secs", type=float, default=300.0)
    common.add_argument("--out", help="output prefix; files get .json/.h3/... suffixes")

    ap = argparse.ArgumentParser(prog="rainbow-sts", parents=[common],
                                 description="Rainbow Steiner triple systems at desk scale.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sts", parents=[common], help="construct, verify or count Steiner triple systems")
    p.add_argument("action", choices=["build", "verify", "count"])
    p.add_argument("--n", type=int)
    p.add_argument("--file")
    p.set_defaults(func=cmd_sts)

    p = sub.add_parser("cover", parents=[common], help="K_3-decomposition by exact cover")
    p.add_argument("--graph", help="G2 file (default K_n)")
    p.add_argument("--n", type=int)
    p.add_argument("--allowed", help="H3 file of allowed triples")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("rainbow-cover", parents=[common], help="rainbow K_3-decomposition for a generated family")
    _add_family_args(p)
    p.add_argument("--graph")
    p.set_defaults(func=cmd_rainbow)

    p = sub.add_parser("extremal", parents=[common], help="parity-obstructed constructions")
    p.add_argument("action", choices=["build", "audit", "certify"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sizes")
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("frac", parents=[common], help="fractional decompositions")
    p.add_argument("action", choices=["uniform", "flow-decompose", "regularize", "discretize", "check", "constant"])
    p.add_argument("--h3")
    p.add_argument("--weights", help="W3 file")
    p.add_argument("--C", type=int, default=16)
    p.add_argument("--gamma", default="1/4")
    p.add_argument("--D", type=int, default=10**4)
    p.add_argument("--d", default="1")
    p.add_argument("--print-weights", action="store_true")
    p.set_defaults(func=cmd_frac)

    p = sub.add_parser("gadget", parents=[common], help="transformers and absorbers")
    p.add_argument("action", choices=["transformer", "absorber", "degeneracy"])
    p.add_argument("--graph", help="G2 file of the rooted graph")
    p.add_argument("--h3")
    p.add_argument("--roots", help="comma-separated root vertices")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("vortex", parents=[common], help="sample or verify a transversal vortex")
    p.add_argument("action", choices=["sample", "verify"])
    _add_family_args(p)
    p.add_argument("--eps", default="3/10")
    p.add_argument("--m-prime", type=int, default=20)
    p.add_argument("--alpha", default="1/2")
    p.add_argument("--retries", type=int, default=100)
    p.add_argument("--chain", help="chain JSON for verify")
    p.set_defaults(func=cmd_vortex)

    p = sub.add_parser("coverdown", parents=[common], help="one cover-down step on a generated instance")
    p.add_argument("action", choices=["run"])
    p.add_argument("--config")
    p.set_defaults(func=cmd_coverdown)

    p = sub.add_parser("pipeline", parents=[common], help="end-to-end toy run")
    _add_family_args(p, n_required=False)
    p.add_argument("--config")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("constant", parents=[common], help="the minimum-codegree threshold constant")
    p.set_defaults(func=cmd_constant)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DivisibilityViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSAT
    except (StageFailure, AssertionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
