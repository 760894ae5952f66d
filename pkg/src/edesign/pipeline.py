"""Seed, prune, re-solve, certify.

A cheap seed design (on a random subset, on a coarser grid, or on the
whole space) is used to discard points of the full space; the E-optimal
design is then computed on the survivors and certified on the full space.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import io
from .model import Design, DesignError, DesignSpace, ModelConfig, generate_grid
from .prune import CERT_MARGIN, DELETE_MARGIN, OPT_TOL, PruneReport, prune
from .solver import SolverConfig, certify, solve_eoptimal

log = logging.getLogger(__name__)

STRATEGIES = ("random_subset", "coarse_grid", "direct")
MAX_REPEAT_ROUNDS = 5


class PipelineError(RuntimeError):
    def __init__(self, message, report: "PipelineReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class PruneOptions:
    augment: bool = False
    delete_margin: float = DELETE_MARGIN
    cert_margin: float = CERT_MARGIN
    opt_tol: float = OPT_TOL
    seed_cuts: bool = True
    repeat: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    strategy: str = "coarse_grid"
    subset_size: int | None = None
    seed: int | None = None
    coarse_density: int | None = None
    model: ModelConfig | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    prune: PruneOptions = field(default_factory=PruneOptions)
    certify_tol: float = 1e-6
    output_dir: str | None = None
    threads: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if self.strategy == "random_subset":
            if self.subset_size is None or self.seed is None:
                raise ValueError("random_subset needs an explicit subset_size and seed")
            if not 0 <= int(self.seed) < 2 ** 64:
                raise ValueError("seed must be a 64-bit unsigned integer")
        if self.strategy == "coarse_grid":
            if self.coarse_density is None or self.model is None:
                raise ValueError("coarse_grid needs a model config and a coarse density")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        strat = d.pop("strategy", {"kind": "direct"})
        if isinstance(strat, str):
            strat = {"kind": strat}
        kw = {"strategy": strat.get("kind", "direct"),
              "subset_size": strat.get("size"),
              "seed": strat.get("seed"),
              "coarse_density": strat.get("density")}
        if d.get("model") is not None:
            kw["model"] = ModelConfig(**d.pop("model"))
        else:
            d.pop("model", None)
        if "solver" in d:
            kw["solver"] = SolverConfig(**d.pop("solver"))
        if "prune" in d:
            kw["prune"] = PruneOptions(**d.pop("prune"))
        for key in ("certify_tol", "output_dir", "threads"):
            if key in d:
                kw[key] = d.pop(key)
        d.pop("space", None)
        if d:
            raise ValueError(f"unknown pipeline config keys: {sorted(d)}")
        return cls(**kw)

    def to_dict(self) -> dict:
        out = asdict(self)
        strat = {"kind": out.pop("strategy")}
        for src, dst in (("subset_size", "size"), ("seed", "seed"), ("coarse_density", "density")):
            v = out.pop(src)
            if v is not None:
                strat[dst] = v
        out["strategy"] = strat
        return out


@dataclass
class PipelineReport:
    strategy: str
    n_original: int = 0
    n_seed_space: int = 0
    n_deleted: int = 0
    n_kept: int = 0
    seed_lambda1: float = float("nan")
    final_lambda1: float = float("nan")
    final_efficiency: float = float("nan")
    prune_mode: str = ""
    prune_rounds: int = 0
    seed_converged: bool = False
    final_converged: bool = False
    certified: bool = False
    stage: str = "init"
    error: str | None = None
    timings: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    # in-memory results, not serialised
    final_design: Design | None = field(default=None, repr=False, metadata={"transient": True})
    prune_report: PruneReport | None = field(default=None, repr=False, metadata={"transient": True})

    def to_dict(self, timings: bool = True) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if not f.metadata.get("transient")}
        d["timings"] = dict(d["timings"])
        d["artifacts"] = dict(d["artifacts"])
        if not timings:
            d.pop("timings")
        return d


def sample_subset(n: int, k: int, seed: int) -> np.ndarray:
    """k distinct indices out of range(n), sorted, from numpy's PCG64 stream."""
    if not 1 <= k <= n:
        raise ValueError(f"subset size {k} outside [1, {n}]")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    return np.sort(rng.permutation(n)[:k])


def _payload_key(p) -> bytes:
    return p.kind.encode() + (p.payload + 0.0).tobytes()


def embed(coarse: DesignSpace, full: DesignSpace, design: Design) -> Design:
    """Re-key a design on `coarse` to the ids of the matching points of `full`."""
    by_payload = {_payload_key(p): p.id for p in full}
    out = {}
    for pid, w in design.weights.items():
        key = _payload_key(coarse[pid])
        if key not in by_payload:
            raise DesignError(f"seed point {pid} has no counterpart in the full space")
        out[by_payload[key]] = w
    return Design(out)


def check_subset(coarse: DesignSpace, full: DesignSpace) -> None:
    keys = {_payload_key(p) for p in full}
    missing = [p.id for p in coarse if _payload_key(p) not in keys]
    if missing:
        raise DesignError(f"coarse space is not a subset of the full space; e.g. {missing[:5]}")


def _seed_space(space: DesignSpace, cfg: PipelineConfig) -> DesignSpace:
    if cfg.strategy == "direct":
        return space
    if cfg.strategy == "random_subset":
        k = int(cfg.subset_size)
        if k < space.m:
            raise ValueError(f"subset size {k} below parameter dimension {space.m}")
        idx = sample_subset(len(space), k, cfg.seed)
        return DesignSpace([space[int(i)] for i in idx])
    coarse = generate_grid(replace(cfg.model, density=int(cfg.coarse_density)))
    check_subset(coarse, space)
    return coarse


def run(space: DesignSpace, cfg: PipelineConfig) -> PipelineReport:
    """Run the staged workflow; on failure the partial report rides on the exception."""
    rep = PipelineReport(strategy=cfg.strategy, n_original=len(space))
    out = Path(cfg.output_dir) if cfg.output_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    def stage(name):
        rep.stage = name
        return time.perf_counter()

    try:
        t0 = stage("seed_solve")
        seed_space = _seed_space(space, cfg)
        rep.n_seed_space = len(seed_space)
        seed = solve_eoptimal(seed_space, cfg.solver)
        rep.seed_lambda1 = seed.lambda1
        rep.seed_converged = seed.converged
        seed_design = seed.design if cfg.strategy != "coarse_grid" else embed(seed_space, space, seed.design)
        rep.timings["seed_solve"] = time.perf_counter() - t0

        t0 = stage("prune")
        po = cfg.prune
        extra = seed.cuts if po.seed_cuts else None
        kw = dict(augment=po.augment, delete_margin=po.delete_margin, cert_margin=po.cert_margin,
                  opt_tol=po.opt_tol, threads=cfg.threads)
        report: PruneReport = prune(space, seed_design, extra_vectors=extra, **kw)
        rep.prune_rounds = 1
        rep.timings["prune"] = time.perf_counter() - t0

        t0 = stage("final_solve")
        kept = report.kept_space(space)
        final = solve_eoptimal(kept, cfg.solver)
        rounds_cuts = [seed.cuts, final.cuts] if po.seed_cuts else [final.cuts]
        while po.repeat and rep.prune_rounds < MAX_REPEAT_ROUNDS:
            again = prune(space, final.design, extra_vectors=np.hstack(rounds_cuts), **kw)
            rep.prune_rounds += 1
            if len(again.deleted) <= len(report.deleted):
                break
            report = again
            kept = report.kept_space(space)
            final = solve_eoptimal(kept, cfg.solver)
            rounds_cuts.append(final.cuts)
        rep.n_deleted = len(report.deleted)
        rep.n_kept = len(report.kept)
        rep.prune_mode = report.mode
        rep.final_lambda1 = final.lambda1
        rep.final_converged = final.converged
        rep.timings["final_solve"] = time.perf_counter() - t0

        t0 = stage("certify")
        cert = certify(space, final.design, extra_vectors=np.hstack(rounds_cuts))
        rep.final_efficiency = cert.efficiency
        rep.certified = bool(seed.converged and final.converged and cert.efficiency >= 1.0 - cfg.certify_tol)
        rep.timings["certify"] = time.perf_counter() - t0
        rep.stage = "done"

        if out:
            io.write_design(seed_design, out / "seed_design.txt", "space.txt")
            io.write_json(report.to_dict(), out / "prune_report.json")
            io.write_space(kept, out / "kept_space.txt")
            io.write_design(final.design, out / "final_design.txt", "space.txt")
            io.write_json(cert.to_dict(), out / "certificate.json")
            io.write_json({"seed": seed.log_rows(), "final": final.log_rows()}, out / "solve_log.json")
            rep.artifacts = {k: str(out / f) for k, f in (
                ("seed_design", "seed_design.txt"), ("prune_report", "prune_report.json"),
                ("kept_space", "kept_space.txt"), ("final_design", "final_design.txt"),
                ("certificate", "certificate.json"), ("solve_log", "solve_log.json"),
                ("report", "pipeline_report.json"))}
            io.write_json(rep.to_dict(), out / "pipeline_report.json")
    except Exception as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
        if out:
            io.write_json(rep.to_dict(), out / "pipeline_report.json")
        raise PipelineError(f"pipeline failed during {rep.stage}: {exc}", rep) from exc
    log.info("pipeline: %d -> %d points, lambda1 %.10g, efficiency %.10g",
             rep.n_original, rep.n_kept, rep.final_lambda1, rep.final_efficiency)
    rep.final_design = final.design
    rep.prune_report = report
    return rep


# ---------------------------------------------------------------------------
# plotting


def _halfplane_polygon(a: float, b: float, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """Square [lo, hi]^2 clipped to x2 <= a x1 + b (one Sutherland-Hodgman pass)."""
    square = [(lo, lo), (hi, lo), (hi, hi), (lo, hi)]
    inside = lambda p: p[1] <= a * p[0] + b  # noqa: E731
    out = []
    for i, p in enumerate(square):
        q = square[(i + 1) % 4]
        if inside(p):
            out.append(p)
        if inside(p) != inside(q):
            # intersection of segment pq with x2 = a x1 + b
            dx, dy = q[0] - p[0], q[1] - p[1]
            t = (a * p[0] + b - p[1]) / (dy - a * dx)
            out.append((p[0] + t * dx, p[1] + t * dy))
    return np.array(out)


def plot(space: DesignSpace, report: PruneReport | dict, design: Design | None, path,
         constraint: tuple[float, float] | None = None):
    """Scatter of kept/deleted points with support circles sized by weight."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Polygon

    missing = [p.id for p in space if p.coords is None or len(p.coords) != 2]
    if missing:
        raise DesignError(f"points without 2-D coordinates: {missing[:10]}")
    if isinstance(report, PruneReport):
        deleted = set(report.deleted)
    else:
        deleted = {p["id"] for p in report["points"] if p["verdict"] == "delete"}
    xy = np.array([p.coords for p in space])
    dmask = np.array([pid in deleted for pid in space.ids])

    fig, ax = plt.subplots(figsize=(5, 5))
    if constraint is not None:
        poly = _halfplane_polygon(*constraint)
        if len(poly) >= 3:
            ax.add_patch(Polygon(poly, closed=True, facecolor="0.92", edgecolor="none", zorder=0))
    ax.scatter(xy[dmask, 0], xy[dmask, 1], s=4, c="0.8", marker="s", linewidths=0, label="deleted", zorder=1)
    ax.scatter(xy[~dmask, 0], xy[~dmask, 1], s=4, c="0.45", marker="s", linewidths=0, label="kept", zorder=2)
    if design is not None:
        sup = [space[k].coords for k in design.weights]
        w = np.array(list(design.weights.values()))
        sup = np.array(sup)
        ax.scatter(sup[:, 0], sup[:, 1], s=1500 * w, facecolors="none", edgecolors="k", zorder=3,
                   label="design support")
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    ax.set_aspect("equal")
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.legend(loc="upper right", fontsize=7, markerscale=2)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
