"""Screening of design points that cannot support any E-optimal design.

Given a reference design xi with information matrix M (eigenvalues
lam_1 <= ... <= lam_m, eigenvectors u_i), pick unit vectors v_j and simplex
weights alpha, put Z = sum_j alpha_j v_j v_j' and h = max_x tr(H(x) Z).
Then h >= lam_1, and when h > lam_1 every support point x of an E-optimal
design satisfies

    g_h(x, y) = sum_i u_i' H(x) u_i / ((lam_i - h) y + lam_1) >= 1

for all y in [0, lam_1 / (h - lam_1)). A point whose minimum over y falls
below one can be discarded. When h == lam_1 the reference design is itself
E-optimal and Z is an equivalence-theorem certificate.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import SpectralData, sym_eigen
from .lp import maximin_simplex
from .model import Design, DesignPoint, DesignSpace, check_design, info_matrix

log = logging.getLogger(__name__)

OPT_TOL = 1e-9
CERT_MARGIN = 1e-7
DELETE_MARGIN = 1e-7
CLUSTER_RTOL = 1e-7
ENDPOINT_SHRINK = 1e-9
BISECT_ITERS = 200
BISECT_RWIDTH = 1e-12
SLOPE_RTOL = 1e-12

BOUNDARY_ZERO = "boundary_zero"
INTERIOR_ROOT = "interior_root"
BOUNDARY_SUP = "boundary_sup"

SCREENING = "screening"
CERTIFICATE = "optimal_certificate"


class PruneError(RuntimeError):
    pass


@dataclass(frozen=True)
class PruningWitness:
    eigen: SpectralData
    lambda1: float
    vectors: np.ndarray  # (m, s), unit columns
    alpha: np.ndarray  # (s,), on the simplex
    h: float

    @property
    def Z(self) -> np.ndarray:
        return (self.vectors * self.alpha) @ self.vectors.T

    @property
    def y_max(self) -> float:
        return admissible_y_max(self.lambda1, self.h)


@dataclass(frozen=True)
class ScreeningScore:
    id: str
    G: float
    y_star: float
    branch: str


@dataclass
class PruneReport:
    witness: PruningWitness
    mode: str
    deleted: tuple[str, ...]
    kept: tuple[str, ...]
    efficiency_bound: float
    scores: list[ScreeningScore] | None = None
    traces: np.ndarray | None = None
    ids: tuple[str, ...] = field(default=())

    @property
    def optimal(self) -> bool:
        return self.mode == CERTIFICATE

    @property
    def keep_mask(self) -> np.ndarray:
        kept = set(self.kept)
        return np.array([i in kept for i in self.ids])

    def kept_space(self, space: DesignSpace) -> DesignSpace:
        return space.subset(list(self.kept))

    def to_dict(self) -> dict:
        w = self.witness
        deleted = set(self.deleted)
        if self.mode == SCREENING:
            points = [
                {"id": s.id, "G": s.G, "y_star": s.y_star, "branch": s.branch,
                 "verdict": "delete" if s.id in deleted else "keep"}
                for s in self.scores
            ]
        else:
            points = [
                {"id": i, "trace": float(t), "verdict": "delete" if i in deleted else "keep"}
                for i, t in zip(self.ids, self.traces)
            ]
        return {
            "witness": {
                "eigenvalues": w.eigen.eigenvalues.tolist(),
                "lambda1": w.lambda1,
                "h": w.h,
                "alpha": w.alpha.tolist(),
                "vectors": w.vectors.T.tolist(),
            },
            "points": points,
            "summary": {
                "mode": self.mode,
                "n_before": len(self.ids),
                "n_deleted": len(self.deleted),
                "n_kept": len(self.kept),
                "efficiency_bound": self.efficiency_bound,
            },
        }


def admissible_y_max(lambda1: float, h: float) -> float:
    if h <= lambda1:
        return np.inf
    return lambda1 / (h - lambda1)


def _unit_columns(V) -> np.ndarray:
    V = np.atleast_2d(np.asarray(V, dtype=float))
    norms = np.linalg.norm(V, axis=0)
    if np.any(norms == 0):
        raise PruneError("zero vector among candidate directions")
    return V / norms


def compute_h(space: DesignSpace, V, alpha) -> tuple[float, str]:
    """h = max_x sum_j alpha_j v_j' H(x) v_j, with the first maximiser's id."""
    V = np.asarray(V, dtype=float).reshape(space.m, -1)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (V.shape[1],):
        raise PruneError(f"{alpha.size} weights for {V.shape[1]} vectors")
    vals = space.quad_forms(V) @ alpha
    i = int(np.argmax(vals))
    return float(vals[i]), space.ids[i]


def minimize_h_lp(space: DesignSpace, V) -> tuple[float, np.ndarray]:
    """Weights alpha on the simplex minimising h for a fixed vector set V.

    Solved as the dual of max_{w in simplex} min_j sum_x w_x v_j' H(x) v_j,
    which has only |V| + 1 rows.
    """
    V = _unit_columns(np.asarray(V, dtype=float).reshape(space.m, -1))
    if V.shape[1] == 1:
        return compute_h(space, V, [1.0])[0], np.ones(1)
    _, _, alpha = maximin_simplex(space.quad_forms(V))
    h, _ = compute_h(space, V, alpha)
    return h, alpha


def cluster_augmentation(eigen: SpectralData, rtol: float = CLUSTER_RTOL) -> np.ndarray:
    """(u_i +- u_j)/sqrt(2) for every pair inside the lam_1 cluster; (m, k) array."""
    lam = eigen.eigenvalues
    scale = max(abs(lam[-1]), np.finfo(float).tiny)
    idx = np.flatnonzero((lam - lam[0]) / scale <= rtol)
    cols = []
    for a in range(idx.size):
        for b in range(a + 1, idx.size):
            ui, uj = eigen.vector(idx[a]), eigen.vector(idx[b])
            cols.append((ui + uj) / np.sqrt(2.0))
            cols.append((ui - uj) / np.sqrt(2.0))
    return np.array(cols).T if cols else np.zeros((eigen.dim, 0))


def candidate_vectors(eigen: SpectralData, augment: bool = False, extra=None) -> np.ndarray:
    parts = [eigen.eigenvectors]
    if augment:
        parts.append(cluster_augmentation(eigen))
    if extra is not None and np.size(extra):
        parts.append(_unit_columns(np.asarray(extra, dtype=float).reshape(eigen.dim, -1)))
    return np.hstack(parts)


# ---------------------------------------------------------------------------
# the deletion function


def _g(P: np.ndarray, lam: np.ndarray, h: float, y: np.ndarray) -> np.ndarray:
    d = (lam[None, :] - h) * y[:, None] + lam[0]
    return np.sum(P / d, axis=1)


def _dg(P: np.ndarray, lam: np.ndarray, h: float, y: np.ndarray) -> np.ndarray:
    d = (lam[None, :] - h) * y[:, None] + lam[0]
    return np.sum(P * (h - lam[None, :]) / (d * d), axis=1)


def projections(space: DesignSpace, eigen: SpectralData) -> np.ndarray:
    """(n, m) array of u_i' H(x) u_i."""
    return space.quad_forms(eigen.eigenvectors)


def _point_projections(point: DesignPoint, eigen: SpectralData) -> np.ndarray:
    U = eigen.eigenvectors
    if point.kind == "rank_one":
        return (point.payload @ U) ** 2
    return np.einsum("is,ij,js->s", U, point.payload, U)


def g_value(point: DesignPoint, eigen: SpectralData, h: float, y: float) -> float:
    """g_h(x, y) for one point."""
    lam1 = eigen.lambda1
    if not h > lam1:
        raise PruneError(f"g_h needs h > lambda1 (h={h!r}, lambda1={lam1!r})")
    if not 0.0 <= y < admissible_y_max(lam1, h):
        raise PruneError(f"y={y!r} outside [0, {admissible_y_max(lam1, h)!r})")
    P = _point_projections(point, eigen)[None, :]
    return float(_g(P, eigen.eigenvalues, h, np.array([float(y)]))[0])


def screen(P: np.ndarray, lam: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised min over y of g_h for each row of projections P.

    g is convex in y, so its derivative is nondecreasing: a nonnegative
    derivative at y = 0 means y* = 0; otherwise bisect on the sign of the
    derivative over [0, y_max (1 - 1e-9)]. Returns (G, y_star, branch codes
    0/1/2 for boundary_zero/interior_root/boundary_sup).
    """
    n = P.shape[0]
    lam1 = lam[0]
    y_hi = admissible_y_max(lam1, h) * (1.0 - ENDPOINT_SHRINK)
    G = np.sum(P, axis=1) / lam1
    y_star = np.zeros(n)
    branch = np.zeros(n, dtype=np.int8)
    # derivative at zero, times lam1^2: sum_i p_i (h - lam_i) = h tr(H) - tr(HM)
    slope0 = P @ (h - lam)
    # a slope that vanishes in exact arithmetic may come out as -1e-17
    todo = np.flatnonzero(slope0 < -SLOPE_RTOL * (P @ np.abs(h - lam)))
    if todo.size == 0:
        return G, y_star, branch
    Pt = P[todo]
    right = np.full(todo.size, y_hi)
    d_right = _dg(Pt, lam, h, right)
    sup = d_right < 0
    if np.any(sup):
        idx = todo[sup]
        y_star[idx] = y_hi
        G[idx] = _g(Pt[sup], lam, h, right[sup])
        branch[idx] = 2
    inner = ~sup
    if np.any(inner):
        Pi = Pt[inner]
        lo = np.zeros(Pi.shape[0])
        hi = np.full(Pi.shape[0], y_hi)
        width = BISECT_RWIDTH * y_hi
        for _ in range(BISECT_ITERS):
            if np.all(hi - lo < width):
                break
            mid = 0.5 * (lo + hi)
            neg = _dg(Pi, lam, h, mid) < 0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
        g_lo = _g(Pi, lam, h, lo)
        g_hi = _g(Pi, lam, h, hi)
        take_hi = g_hi < g_lo
        idx = todo[inner]
        y_star[idx] = np.where(take_hi, hi, lo)
        G[idx] = np.where(take_hi, g_hi, g_lo)
        branch[idx] = 1
    return G, y_star, branch


_BRANCHES = (BOUNDARY_ZERO, INTERIOR_ROOT, BOUNDARY_SUP)


def minimize_g(point: DesignPoint, eigen: SpectralData, h: float) -> ScreeningScore:
    """G(x, h) = min over admissible y of g_h(x, y), with its minimiser."""
    lam1 = eigen.lambda1
    if not h > lam1 * (1.0 + OPT_TOL):
        raise PruneError(f"screening needs h > lambda1 (1 + {OPT_TOL}); got h={h!r}, lambda1={lam1!r}")
    P = _point_projections(point, eigen)[None, :]
    G, y, b = screen(P, eigen.eigenvalues, h)
    return ScreeningScore(point.id, float(G[0]), float(y[0]), _BRANCHES[b[0]])


def _parallel_screen(P, lam, h, threads):
    n = P.shape[0]
    if not threads or threads <= 1 or n < 2048:
        return screen(P, lam, h)
    chunks = np.array_split(np.arange(n), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: screen(P[c], lam, h), chunks))
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(3))


def prune(
    space: DesignSpace,
    design: Design,
    *,
    augment: bool = False,
    extra_vectors=None,
    opt_tol: float = OPT_TOL,
    cert_margin: float = CERT_MARGIN,
    delete_margin: float = DELETE_MARGIN,
    threads: int | None = None,
) -> PruneReport:
    """Delete points of `space` that cannot support an E-optimal design.

    The candidate directions are the eigenvectors of M(design), optionally
    extended by pairwise rotations inside the lam_1 cluster (`augment`) and
    by caller-supplied unit vectors (`extra_vectors`, columns). Any
    trace-one Z built from unit vectors bounds the optimum from above, so
    extra directions can only lower h and keep the test valid.
    """
    check_design(space, design)
    M = info_matrix(space, design)
    eigen = sym_eigen(M)
    lam = eigen.eigenvalues
    lam1 = float(lam[0])
    if not lam1 > 1e-9 * lam[-1]:
        raise PruneError(f"reference design is singular (lambda1={lam1:.3e}, lambda_m={lam[-1]:.3e})")

    V = candidate_vectors(eigen, augment=augment, extra=extra_vectors)
    h, alpha = minimize_h_lp(space, V)
    witness = PruningWitness(eigen, lam1, V, alpha, h)
    if h < lam1 * (1.0 - 1e-12):
        raise PruneError(f"internal error: h={h!r} below lambda1={lam1!r}")

    if (h - lam1) / lam1 <= opt_tol:
        mode = CERTIFICATE
        traces = space.trace_with(witness.Z)
        drop = traces < lam1 - cert_margin * lam1
        scores = None
    else:
        mode = SCREENING
        traces = None
        G, y_star, br = _parallel_screen(projections(space, eigen), lam, h, threads)
        drop = G < 1.0 - delete_margin
        scores = [ScreeningScore(i, float(g), float(y), _BRANCHES[b])
                  for i, g, y, b in zip(space.ids, G, y_star, br)]

    deleted = tuple(i for i, d in zip(space.ids, drop) if d)
    kept = tuple(i for i, d in zip(space.ids, drop) if not d)
    if not kept:
        raise PruneError(
            f"internal error: every point deleted (mode={mode}, lambda1={lam1!r}, h={h!r}, "
            f"eigenvalues={lam.tolist()})"
        )
    log.info("prune: %s mode, %d of %d points deleted, h=%.6g, lambda1=%.6g",
             mode, len(deleted), len(space), h, lam1)
    return PruneReport(witness, mode, deleted, kept, lam1 / h, scores, traces, space.ids)

