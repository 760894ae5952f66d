"""E-optimal designs by cutting planes, and equivalence-theorem certificates.

lambda_1(M(w)) = min over unit u of u' M(w) u, so the E-optimal value is

    max_{w in simplex} min_u sum_x w_x u' H(x) u.

Replacing "all unit u" by a finite set of cuts gives an LP whose value
upper-bounds the optimum. Each round solves the LP, evaluates lambda_1 at
the LP weights (a lower bound) and adds the minimising eigenvector as a new
cut, until the two bounds meet.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .linalg import sym_eigen
from .lp import maximin_simplex
from .model import Design, DesignSpace, check_design, info_matrix
from .prune import CLUSTER_RTOL, candidate_vectors, cluster_augmentation, compute_h, minimize_h_lp

log = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-12
GAP_EPS = 1e-300


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-7
    max_iters: int = 500
    weight_floor: float = WEIGHT_FLOOR

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")


@dataclass
class SolveResult:
    design: Design
    lambda1: float
    iterations: int
    converged: bool
    upper_bound: float
    history: list[tuple[float, float, float]] = field(default_factory=list)
    cuts: np.ndarray | None = None  # (m, k) unit columns
    cut_weights: np.ndarray | None = None  # LP duals on the cuts

    def __iter__(self):
        yield from (self.design, self.lambda1, self.iterations)

    @property
    def gap(self) -> float:
        return (self.upper_bound - self.lambda1) / max(self.upper_bound, GAP_EPS)

    def log_rows(self) -> list[dict]:
        return [{"iteration": k + 1, "t_lp": t, "lambda1": lam, "gap": g}
                for k, (t, lam, g) in enumerate(self.history)]


def solve_eoptimal(space: DesignSpace, config: SolverConfig | None = None) -> SolveResult:
    """Approximate E-optimal design on `space`.

    On exit with `converged` set, lambda1 >= (1 - tol) * optimum. When the
    iteration cap is hit the best iterate is returned unconverged.
    """
    cfg = config or SolverConfig()
    m = space.m
    cuts = [np.eye(m)[:, j] for j in range(m)]
    Q = space.quad_forms(np.eye(m))
    best_lam, best_w = -np.inf, None
    history = []
    converged = False
    t_lp, alpha = np.inf, None
    it = 0
    for it in range(1, cfg.max_iters + 1):
        t_lp, w, alpha = maximin_simplex(Q)
        eig = sym_eigen(info_matrix(space, w))
        lam = eig.lambda1
        if lam > best_lam:
            best_lam, best_w = lam, w
        gap = (t_lp - best_lam) / max(t_lp, GAP_EPS)
        history.append((t_lp, lam, gap))
        log.debug("cut %d: t_lp=%.12g lambda1=%.12g gap=%.3e", it, t_lp, lam, gap)
        if gap <= cfg.tol:
            converged = True
            break
        u = eig.vector(0)
        cuts.append(u)
        Q = np.hstack([Q, space.quad_forms(u[:, None])])
    design = Design.from_vector(space, best_w, floor=cfg.weight_floor)
    lam_out = sym_eigen(info_matrix(space, design)).lambda1
    if not converged:
        log.warning("cutting plane stopped after %d iterations, gap %.3e", it, history[-1][2])
    return SolveResult(design, lam_out, it, converged, t_lp, history,
                       np.array(cuts).T[:, : alpha.size], alpha)


@dataclass(frozen=True)
class OptimalityCertificate:
    E: np.ndarray
    lambda1: float
    gap: float
    efficiency: float
    h: float
    vectors: np.ndarray
    alpha: np.ndarray

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "h": self.h, "gap": self.gap,
                "efficiency": self.efficiency, "E": self.E.tolist(),
                "alpha": self.alpha.tolist(), "vectors": self.vectors.T.tolist()}


def certify(
    space: DesignSpace,
    design: Design,
    *,
    extra_vectors=None,
    augment: bool = True,
    cluster_rtol: float = CLUSTER_RTOL,
) -> OptimalityCertificate:
    """Trace-one PSD E with max_x tr(H(x) E) as close to lambda_1 as the LP allows.

    E is a convex combination of eigenvectors of M(design), pairwise
    rotations inside the lambda_1 cluster, and any `extra_vectors`. The gap
    max_x tr(H(x) E) - lambda_1 is zero exactly for an E-optimal design with
    a matching E; efficiency = lambda_1 / h lower-bounds E-efficiency.
    """
    check_design(space, design)
    eig = sym_eigen(info_matrix(space, design))
    lam1 = eig.lambda1
    if not lam1 > 1e-9 * eig.eigenvalues[-1]:
        raise SolverError(f"information matrix is singular (lambda1={lam1:.3e})")
    V = candidate_vectors(eig, augment=False, extra=extra_vectors)
    if augment:
        V = np.hstack([V, cluster_augmentation(eig, cluster_rtol)])
    h, alpha = minimize_h_lp(space, V)
    E = (V * alpha) @ V.T
    E = (E + E.T) / 2.0 / np.trace(E)
    h, _ = compute_h(space, V, alpha / alpha.sum())
    return OptimalityCertificate(E, lam1, h - lam1, lam1 / max(lam1, h), h, V, alpha)
