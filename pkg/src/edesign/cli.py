"""Command line entry point: ``edesign <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import io
from .elfving import elfving_prune
from .model import ModelConfig, generate_grid, grid_candidates
from .pipeline import PipelineConfig, PipelineError, PruneOptions, plot, run
from .prune import prune
from .solver import SolverConfig, certify, solve_eoptimal

log = logging.getLogger("edesign")

LARGE_SPACE = 2000


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def _load_cuts(path):
    if not path:
        return None
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    cuts = data.get("cuts")
    return None if not cuts else np.array(cuts, dtype=float).T


def cmd_generate(args) -> int:
    cfg = ModelConfig(args.family, args.density, args.a, args.b)
    space = generate_grid(cfg)
    io.write_space(space, args.output)
    print(f"{grid_candidates(cfg.density)} candidates, {len(space)} retained, m={space.m} -> {args.output}")
    return 0


def cmd_solve(args) -> int:
    space = io.read_space(args.space)
    if len(space) > LARGE_SPACE:
        log.warning("%d points: the cutting-plane LP grows with n; consider `prune` first", len(space))
    res = solve_eoptimal(space, SolverConfig(args.tol, args.max_iters))
    io.write_design(res.design, args.output, os.path.relpath(args.space, os.path.dirname(os.path.abspath(args.output))))
    if args.log:
        io.write_json({"iterations": res.log_rows(), "converged": res.converged,
                       "lambda1": res.lambda1, "upper_bound": res.upper_bound,
                       "cuts": res.cuts.T.tolist()}, args.log)
    status = "converged" if res.converged else "NOT converged"
    print(f"lambda1={res.lambda1:.12g} upper={res.upper_bound:.12g} iterations={res.iterations} {status}; "
          f"support {len(res.design)} points -> {args.output}")
    return 0 if res.converged else 1


def cmd_prune(args) -> int:
    space = io.read_space(args.space)
    design, _ = io.read_design(args.design, space)
    rep = prune(space, design, augment=args.augment, extra_vectors=_load_cuts(args.cuts),
                delete_margin=args.delete_margin, threads=_threads(args))
    if args.output:
        io.write_json(rep.to_dict(), args.output)
    if args.kept:
        io.write_space(rep.kept_space(space), args.kept)
    print(f"{rep.mode}: deleted {len(rep.deleted)} of {len(space)} points, "
          f"h={rep.witness.h:.12g}, lambda1={rep.witness.lambda1:.12g}, efficiency >= {rep.efficiency_bound:.9f}")
    return 0


def cmd_elfving(args) -> int:
    space = io.read_space(args.space)
    removed = elfving_prune(space, threads=_threads(args))
    gone = set(removed)
    report = {
        "points": [{"id": i, "verdict": "delete" if i in gone else "keep"} for i in space.ids],
        "summary": {"mode": "elfving", "n_before": len(space), "n_deleted": len(removed),
                    "n_kept": len(space) - len(removed)},
    }
    if args.output:
        io.write_json(report, args.output)
    print(f"elfving: {len(removed)} of {len(space)} points removable")
    return 0


def cmd_certify(args) -> int:
    space = io.read_space(args.space)
    design, _ = io.read_design(args.design, space)
    cert = certify(space, design, extra_vectors=_load_cuts(args.cuts))
    if args.output:
        io.write_json(cert.to_dict(), args.output)
    ok = cert.efficiency >= 1.0 - args.tol
    print(f"lambda1={cert.lambda1:.12g} h={cert.h:.12g} gap={cert.gap:.3e} efficiency >= {cert.efficiency:.12f} "
          f"({'certified' if ok else 'not certified'} at tol {args.tol:g})")
    return 0 if ok else 1


def cmd_pipeline(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        raw = json.load(fh)
    base = os.path.dirname(os.path.abspath(args.config))
    space_path = raw.get("space")
    for key, val in (("output_dir", args.out_dir), ("threads", args.threads), ("certify_tol", args.certify_tol)):
        if val is not None:
            raw[key] = val
    strat = raw.get("strategy", {"kind": "direct"})
    strat = {"kind": strat} if isinstance(strat, str) else dict(strat)
    for key, val in (("kind", args.strategy), ("size", args.subset_size), ("seed", args.seed),
                     ("density", args.coarse_density)):
        if val is not None:
            strat[key] = val
    raw["strategy"] = strat
    if args.density is not None:
        raw.setdefault("model", {})["density"] = args.density
    solver = dict(raw.get("solver", {}))
    if args.tol is not None:
        solver["tol"] = args.tol
    if args.max_iters is not None:
        solver["max_iters"] = args.max_iters
    raw["solver"] = solver
    prune_opts = dict(raw.get("prune", {}))
    if args.augment:
        prune_opts["augment"] = True
    if args.repeat:
        prune_opts["repeat"] = True
    if args.no_seed_cuts:
        prune_opts["seed_cuts"] = False
    raw["prune"] = prune_opts
    if raw.get("threads") is None:
        raw["threads"] = os.cpu_count() or 1
    cfg = PipelineConfig.from_dict(raw)

    if space_path:
        space = io.read_space(space_path if os.path.isabs(space_path) else os.path.join(base, space_path))
    elif cfg.model is not None:
        space = generate_grid(cfg.model)
    else:
        print("pipeline config needs either 'space' or 'model'", file=sys.stderr)
        return 2
    if cfg.output_dir:
        os.makedirs(cfg.output_dir, exist_ok=True)
        io.write_space(space, os.path.join(cfg.output_dir, "space.txt"))
    try:
        rep = run(space, cfg)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.report.to_dict(), indent=2))
        return 1
    print(json.dumps(rep.to_dict(), indent=2))
    return 0 if rep.certified else 1


def cmd_plot(args) -> int:
    space = io.read_space(args.space, check_nonsingular=False)
    with open(args.report, encoding="utf-8") as fh:
        report = json.load(fh)
    design = io.read_design(args.design, space)[0] if args.design else None
    constraint = (args.a, args.b) if args.a is not None and args.b is not None else None
    plot(space, report, design, args.output, constraint)
    print(f"figure -> {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edesign", description="E-optimal designs and design-space pruning")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--threads", type=int, default=None, help="parallelism cap (default: all cores)")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="grid model -> design-space file")
    g.add_argument("--family", default="quadratic2d", choices=["quadratic2d", "quadratic2d_interaction"])
    g.add_argument("--density", "-d", type=int, default=80)
    g.add_argument("--a", type=float, default=-4.5117)
    g.add_argument("--b", type=float, default=0.6091)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="E-optimal design on a space")
    s.add_argument("space")
    s.add_argument("-o", "--output", required=True, help="design file")
    s.add_argument("--log", help="JSON solve log (iterations and cut directions)")
    s.add_argument("--tol", type=float, default=1e-7)
    s.add_argument("--max-iters", type=int, default=500)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("prune", help="screen a space with a reference design")
    r.add_argument("space")
    r.add_argument("design")
    r.add_argument("-o", "--output", help="JSON prune report")
    r.add_argument("--kept", help="write the surviving points as a design-space file")
    r.add_argument("--augment", action="store_true", help="add rotations inside the lambda1 eigencluster")
    r.add_argument("--cuts", help="solve log whose cut directions join the eigenvectors")
    r.add_argument("--delete-margin", type=float, default=1e-7)
    r.set_defaults(func=cmd_prune)

    e = sub.add_parser("elfving", help="criterion-free Elfving-set deletion")
    e.add_argument("space")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_elfving)

    c = sub.add_parser("certify", help="equivalence-theorem certificate for a design")
    c.add_argument("space")
    c.add_argument("design")
    c.add_argument("-o", "--output")
    c.add_argument("--cuts", help="solve log whose cut directions enlarge the certificate search")
    c.add_argument("--tol", type=float, default=1e-6, help="required 1 - efficiency bound")
    c.set_defaults(func=cmd_certify)

    q = sub.add_parser("pipeline", help="seed -> prune -> solve -> certify from a JSON config")
    q.add_argument("config")
    q.add_argument("--out-dir")
    q.add_argument("--strategy", choices=["random_subset", "coarse_grid", "direct"])
    q.add_argument("--subset-size", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--coarse-density", type=int)
    q.add_argument("--density", type=int, help="override the model grid density")
    q.add_argument("--tol", type=float)
    q.add_argument("--max-iters", type=int)
    q.add_argument("--certify-tol", type=float)
    q.add_argument("--augment", action="store_true")
    q.add_argument("--repeat", action="store_true", help="re-prune with the improved design (max 5 rounds)")
    q.add_argument("--no-seed-cuts", action="store_true", help="screen with eigenvectors only")
    q.set_defaults(func=cmd_pipeline)

    f = sub.add_parser("plot", help="SVG of kept/deleted points and the design")
    f.add_argument("space")
    f.add_argument("report")
    f.add_argument("design", nargs="?")
    f.add_argument("-o", "--output", required=True)
    f.add_argument("--a", type=float, help="constraint slope for region shading")
    f.add_argument("--b", type=float, help="constraint intercept for region shading")
    f.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
