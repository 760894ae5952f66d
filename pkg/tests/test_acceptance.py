"""Exit criteria. Each test prints one PASS/FAIL line (also summarised at the end of the run)."""

import time

import numpy as np
import pytest

from edesign import (
    Design,
    DesignSpace,
    ModelConfig,
    PipelineConfig,
    certify,
    elfving_prune,
    generate_grid,
    prune,
    run,
    solve_eoptimal,
)
from edesign.linalg import sym_eigen
from edesign.model import grid_candidates, info_matrix
from edesign.prune import _g, compute_h, minimize_h_lp, projections, screen
from edesign.solver import SolverConfig
from oracles import brute_min_g, elfving_extreme_m2, eoptimal_m2_grid, eoptimal_three_point_grid

pytestmark = pytest.mark.acceptance


def test_criterion_1_grid_fixture(verdict):
    t0 = time.perf_counter()
    cfg = ModelConfig("quadratic2d", 80, -4.5117, 0.6091)
    space = generate_grid(cfg)
    elapsed = time.perf_counter() - t0
    ok = grid_candidates(80) == 25921 and len(space) == 14701 and elapsed < 1.0
    verdict(1, ok, f"candidates={grid_candidates(80)} retained={len(space)} in {elapsed:.2f}s (limit 1s)")


def test_criterion_2_micro_instance(verdict, micro_space):
    # frozen by evaluating the screening formulas by hand (see tests/oracles.py for the brute force)
    expected_G = {"f1": 1.25, "f2": 2.5, "f3": 0.45}
    rep = prune(micro_space, Design({"f1": 0.6, "f2": 0.4}))
    w = rep.witness
    G = {s.id: s.G for s in rep.scores}
    eig = w.eigen
    brute = {p.id: brute_min_g(p.elementary(), eig.eigenvectors, eig.eigenvalues, w.h)[0] for p in micro_space}
    checks = [
        rep.mode == "screening",
        abs(w.h - 0.5) <= 1e-9,
        np.allclose(w.alpha, [0.5, 0.5], atol=1e-9, rtol=0),
        all(abs(G[k] - v) <= 1e-6 for k, v in expected_G.items()),
        all(abs(brute[k] - v) <= 1e-6 for k, v in expected_G.items()),
        rep.deleted == ("f3",),
        abs(rep.efficiency_bound - 0.8) <= 1e-12,
    ]
    rep2 = prune(micro_space, Design({"f1": 0.5, "f2": 0.5}))
    checks += [rep2.mode == "optimal_certificate", rep2.deleted == ("f3",), abs(rep2.witness.h - 0.5) <= 1e-9]
    verdict(2, all(checks),
            f"h={w.h:.12g} alpha={np.round(w.alpha, 12).tolist()} G={[round(G[k], 9) for k in ('f1', 'f2', 'f3')]} "
            f"deleted={list(rep.deleted)} bound={rep.efficiency_bound:.12g}; uniform: {rep2.mode} "
            f"deleted={list(rep2.deleted)}")


def test_criterion_3_soundness(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    tight = SolverConfig(tol=1e-9)
    lost_support, worst, n_deleted, runs = [], 0.0, 0, 0
    for inst in range(100):
        m = int(rng.choice([2, 3]))
        n = int(rng.integers(10, 41))
        space = DesignSpace.from_regressors(rng.normal(size=(n, m)))
        ref = solve_eoptimal(space, tight)
        support = set(ref.design.weights)
        w0 = ref.design.to_vector(space)
        refs = [(ref.design, None), (ref.design, ref.cuts)]
        for t in (1e-3, 0.05, 0.3):
            mix = (1 - t) * w0 + t * rng.dirichlet(np.ones(n))
            refs.append((Design.from_vector(space, mix), None))
        for design, extra in refs:
            rep = prune(space, design, extra_vectors=extra)
            runs += 1
            n_deleted += len(rep.deleted)
            if support - set(rep.kept):
                lost_support.append(inst)
            kept_opt = solve_eoptimal(rep.kept_space(space), tight)
            worst = max(worst, abs(kept_opt.lambda1 - ref.lambda1) / ref.lambda1)
    elapsed = time.perf_counter() - t0
    ok = not lost_support and worst <= 1e-6 and elapsed < 120
    verdict(3, ok, f"{runs} prunes on 100 instances, support lost in {len(lost_support)}, "
                   f"worst kept-vs-full lambda1 rel diff {worst:.2e}, mean deleted {n_deleted / runs:.1f}, "
                   f"{elapsed:.1f}s (limit 120s)")


def test_criterion_4_theorem_invariants(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(44)
    checks = failures = 0
    worst = {"h>=lam1": 0.0, "convexity": 0.0, "monotone": 0.0, "lp<=uniform": 0.0}
    for _ in range(250):
        m = int(rng.integers(2, 5))
        n = int(rng.integers(m + 2, 25))
        space = DesignSpace.from_regressors(rng.normal(size=(n, m)) * rng.uniform(0.2, 3.0))
        w = rng.dirichlet(np.full(n, rng.uniform(0.2, 2.0)))
        eig = sym_eigen(info_matrix(space, w))
        lam = eig.eigenvalues
        lam1 = lam[0]
        V = eig.eigenvectors
        h_lp, _ = minimize_h_lp(space, V)
        h_uni, _ = compute_h(space, V, np.full(m, 1.0 / m))
        for key, viol in (("h>=lam1", lam1 - h_lp - 1e-12 * lam1), ("lp<=uniform", h_lp - h_uni - 1e-9)):
            checks += 1
            worst[key] = max(worst[key], viol)
            failures += viol > 0
        if h_lp <= lam1 * (1 + 1e-9):
            continue
        P = projections(space, eig)
        y_max = lam1 / (h_lp - lam1)
        for _ in range(10):
            y1, y2 = np.sort(rng.uniform(0, y_max * (1 - 1e-6), 2))
            g1, g2, gm = (_g(P, lam, h_lp, np.full(n, y)) for y in (y1, y2, 0.5 * (y1 + y2)))
            viol = np.max(gm - 0.5 * (g1 + g2) - 1e-10 * np.maximum(1.0, np.abs(gm)))
            checks += n
            failures += int(np.sum(gm - 0.5 * (g1 + g2) > 1e-10 * np.maximum(1.0, np.abs(gm))))
            worst["convexity"] = max(worst["convexity"], viol)
        h1, h2 = np.sort(h_lp + rng.exponential(lam1, 2))
        G1 = screen(P, lam, h1)[0]
        G2 = screen(P, lam, h2)[0]
        checks += n
        failures += int(np.sum(G1 > G2 + 1e-10))
        worst["monotone"] = max(worst["monotone"], float(np.max(G1 - G2)))
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and checks >= 10_000 and elapsed < 60
    verdict(4, ok, f"{checks} checks, {failures} violations, worst {({k: float(f'{v:.2e}') for k, v in worst.items()})}, "
                   f"{elapsed:.1f}s (limit 60s)")


def test_criterion_5_solver_oracle(verdict, quad5_space):
    t0 = time.perf_counter()
    rng = np.random.default_rng(55)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 11))
        F = rng.normal(size=(n, 2))
        oracle, _ = eoptimal_m2_grid(F)
        got = solve_eoptimal(DesignSpace.from_regressors(F)).lambda1
        worst = max(worst, abs(got - oracle) / oracle)
    res = solve_eoptimal(quad5_space)
    support = set(res.design.weights)
    lam_o, w_o = eoptimal_three_point_grid(quad5_space.regressors[[0, 2, 4]])
    w = res.design.to_vector(quad5_space)[[0, 2, 4]]
    elapsed = time.perf_counter() - t0
    ok = (worst <= 1e-4 and support <= {"x-1", "x0", "x1"} and np.max(np.abs(w - w_o)) <= 1e-3
          and abs(res.lambda1 - lam_o) <= 1e-6 and elapsed < 60)
    verdict(5, ok, f"m=2 worst rel diff {worst:.2e}; quadratic support {sorted(support)} weights "
                   f"{np.round(w, 5).tolist()} vs oracle {np.round(w_o, 5).tolist()}, "
                   f"lambda1 {res.lambda1:.9f} vs {lam_o:.9f}, {elapsed:.1f}s (limit 60s)")


def test_criterion_6_certificates(verdict):
    rng = np.random.default_rng(7)
    worst_gap = worst_eq = 0.0
    declared = failures = 0
    for _ in range(100):
        m = int(rng.choice([2, 3, 4]))
        n = int(rng.integers(8, 41))
        space = DesignSpace.from_regressors(rng.normal(size=(n, m)))
        res = solve_eoptimal(space)
        if not res.converged:
            continue
        declared += 1
        cert = certify(space, res.design, extra_vectors=res.cuts)
        traces = space.trace_with(cert.E)
        eq = max(abs(traces[space.index[k]] - cert.lambda1) for k in res.design.weights) / cert.lambda1
        gap = cert.gap / cert.lambda1
        worst_gap, worst_eq = max(worst_gap, gap), max(worst_eq, eq)
        failures += gap > 1e-6 or eq > 1e-6
    verdict(6, failures == 0 and declared > 0,
            f"{declared} converged designs certified, {failures} failures, worst gap/lambda1 {worst_gap:.2e}, "
            f"worst support equality {worst_eq:.2e} (limit 1e-6)")


def test_criterion_7_pipeline(verdict):
    t0 = time.perf_counter()
    model = ModelConfig("quadratic2d", 20, -4.5117, 0.6091)
    space = generate_grid(model)
    direct = solve_eoptimal(space)
    cfg = PipelineConfig(strategy="coarse_grid", coarse_density=10, model=model)
    rep = run(space, cfg)
    elapsed = time.perf_counter() - t0
    rel = abs(rep.final_lambda1 - direct.lambda1) / direct.lambda1
    ok = rel <= 1e-6 and rep.n_deleted > 0 and rep.final_efficiency >= 1 - 1e-4 and elapsed < 300
    verdict(7, ok, f"n={rep.n_original} deleted={rep.n_deleted} final lambda1={rep.final_lambda1:.10g} "
                   f"direct={direct.lambda1:.10g} (rel {rel:.1e}) efficiency>={rep.final_efficiency:.9f}, "
                   f"{elapsed:.1f}s (limit 300s)")


def test_criterion_8_elfving(verdict):
    t0 = time.perf_counter()
    S = DesignSpace.from_regressors(np.array([[1.0, 0.0], [0.0, 1.0], [0.4, 0.4]]), ids=["e1", "e2", "p"])
    interior = elfving_prune(S) == ["p"]
    rng = np.random.default_rng(88)
    mismatches = extreme_removed = 0
    for _ in range(50):
        n = int(rng.integers(3, 30))
        F = rng.normal(size=(n, 2)) * rng.uniform(0.5, 2.0, size=(n, 1))
        space = DesignSpace.from_regressors(F)
        removed = set(elfving_prune(space))
        extreme = elfving_extreme_m2(F)
        got = np.array([pid in removed for pid in space.ids])
        mismatches += int(np.any(got == extreme))
        extreme_removed += int(np.sum(got & extreme))
    elapsed = time.perf_counter() - t0
    ok = interior and mismatches == 0 and extreme_removed == 0 and elapsed < 30
    verdict(8, ok, f"(0.4,0.4) removable={interior}; 50 m=2 instances, {mismatches} disagreements with the "
                   f"angular hull, {extreme_removed} extreme points removed, {elapsed:.1f}s (limit 30s)")
