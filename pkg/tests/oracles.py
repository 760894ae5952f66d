"""Brute-force reference computations for the test-suite.

Nothing here imports edesign. Every quantity is recomputed from its
definition with numpy and scipy, usually by exhaustive search.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog, minimize_scalar


def random_regressors(rng, m, n, scale=1.0):
    return scale * rng.normal(size=(n, m))


def charpoly_eigenvalues(a):
    """Eigenvalues as roots of det(tI - A), sorted ascending."""
    roots = np.roots(np.poly(np.asarray(a, dtype=float)))
    return np.sort(roots.real)


# --- screening function -----------------------------------------------------


def g_direct(H, U, lam, h, y):
    """sum_i u_i' H u_i / ((lam_i - h) y + lam_1) evaluated term by term."""
    lam1 = lam[0]
    total = 0.0
    for i in range(len(lam)):
        u = U[:, i]
        total += float(u @ H @ u) / ((lam[i] - h) * y + lam1)
    return total


def brute_min_g(H, U, lam, h, grid=1000):
    """Minimum of g over a y-grid on [0, y_max), polished by a bounded 1-D search."""
    lam1 = lam[0]
    y_max = lam1 / (h - lam1)
    ys = np.linspace(0.0, y_max * (1.0 - 1e-9), grid)
    vals = np.array([g_direct(H, U, lam, h, y) for y in ys])
    k = int(np.argmin(vals))
    lo, hi = ys[max(k - 1, 0)], ys[min(k + 1, grid - 1)]
    best = vals[k]
    if hi > lo:
        res = minimize_scalar(lambda y: g_direct(H, U, lam, h, y), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * max(1.0, y_max)})
        best = min(best, float(res.fun))
    return best, vals


# --- linear programming -------------------------------------------------------


def lp_vertex_min(c, A_ub, b_ub):
    """min c x s.t. A_ub x <= b_ub, x >= 0 by enumerating basic solutions.

    Only for tiny bounded problems. Returns (value, x) or (None, None)
    when nothing is feasible.
    """
    c = np.asarray(c, float)
    A_ub = np.asarray(A_ub, float)
    b_ub = np.asarray(b_ub, float)
    n = c.size
    rows = np.vstack([A_ub, -np.eye(n)])
    rhs = np.r_[b_ub, np.zeros(n)]
    best, arg = None, None
    for idx in itertools.combinations(range(rows.shape[0]), n):
        B = rows[list(idx)]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        x = np.linalg.solve(B, rhs[list(idx)])
        if np.all(rows @ x <= rhs + 1e-9):
            v = float(c @ x)
            if best is None or v < best - 1e-12:
                best, arg = v, x
    return best, arg


def minimax_h_scipy(Q):
    """min over alpha in the simplex of max_x (Q alpha)_x, solved by HiGHS."""
    n, k = Q.shape
    res = linprog(np.r_[1.0, np.zeros(k)], A_ub=np.c_[-np.ones(n), Q], b_ub=np.zeros(n),
                  A_eq=np.r_[0.0, np.ones(k)][None], b_eq=[1.0],
                  bounds=[(None, None)] + [(0, None)] * k, method="highs")
    assert res.status == 0
    return float(res.fun), res.x[1:]


# --- E-optimal designs ------------------------------------------------------


def _simplex_grid(step):
    k = int(round(1.0 / step))
    i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    keep = i + j <= k
    w1 = i[keep] * step
    w2 = j[keep] * step
    return np.c_[w1, w2, 1.0 - w1 - w2]


def _lam1_2x2(W, H):
    """Smallest eigenvalue of sum_k W[:, k] H[k] for 2x2 H, closed form."""
    M = np.einsum("pk,kij->pij", W, H)
    a, b, c = M[:, 0, 0], M[:, 0, 1], M[:, 1, 1]
    return 0.5 * (a + c) - np.sqrt(0.25 * (a - c) ** 2 + b * b)


def _lam1_general(W, H):
    return np.linalg.eigvalsh(np.einsum("pk,kij->pij", W, H))[:, 0]


def _zoom(H, lam_fn, w0, step, final_step):
    """Nested-grid refinement of a concave function on the 2-simplex."""
    best_w = w0
    best = lam_fn(best_w[None], H)[0]
    offs = np.arange(-20, 21)
    while step > final_step:
        step /= 2.0
        d1, d2 = np.meshgrid(offs * step, offs * step, indexing="ij")
        w1 = best_w[0] + d1.ravel()
        w2 = best_w[1] + d2.ravel()
        W = np.c_[w1, w2, 1.0 - w1 - w2]
        W = W[np.all(W >= -1e-15, axis=1)]
        W = np.clip(W, 0.0, None)
        vals = lam_fn(W, H)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_w = vals[k], W[k]
    return best, best_w


def eoptimal_m2_grid(F, step=1e-2, final_step=1e-7):
    """Exhaustive E-optimal search for m = 2.

    Some optimal design has at most m(m+1)/2 = 3 support points, so every
    triple of points is searched on a simplex grid and then refined.
    Returns (lambda1, weights over all n points).
    """
    F = np.asarray(F, float)
    n = F.shape[0]
    Hs = F[:, :, None] * F[:, None, :]
    grid = _simplex_grid(step)
    best, best_w = -np.inf, None
    triples = itertools.combinations(range(n), 3) if n >= 3 else [tuple(range(n)) + (0,) * (3 - n)]
    for tri in triples:
        H = Hs[list(tri)]
        vals = _lam1_2x2(grid, H)
        k = int(np.argmax(vals))
        val, w = _zoom(H, _lam1_2x2, grid[k], step, final_step)
        if val > best:
            best = val
            best_w = np.zeros(n)
            for idx, wi in zip(tri, w):
                best_w[idx] += wi
    return float(best), best_w


def eoptimal_three_point_grid(F, resolution=1e-4, final_step=1e-9):
    """E-optimal weights on exactly three points.

    Coarse pass over the whole 2-simplex, a pass at `resolution` around the
    best coarse cell, then nested-grid refinement of the concave objective.
    """
    H = np.asarray(F, float)
    H = H[:, :, None] * H[:, None, :]
    coarse = _simplex_grid(1e-2)
    w0 = coarse[int(np.argmax(_lam1_general(coarse, H)))]
    offs = np.arange(-200, 201) * resolution
    d1, d2 = np.meshgrid(offs, offs, indexing="ij")
    W = np.c_[w0[0] + d1.ravel(), w0[1] + d2.ravel()]
    W = np.c_[W, 1.0 - W.sum(axis=1)]
    W = np.clip(W[np.all(W >= -1e-15, axis=1)], 0.0, None)
    vals = _lam1_general(W, H)
    w1 = W[int(np.argmax(vals))]
    return _zoom(H, _lam1_general, w1, resolution, final_step)


# --- Elfving set ---------------------------------------------------------------


def elfving_extreme_m2(F, tol=1e-12):
    """Boolean mask of regressors that are extreme points of conv{+-f}.

    Graham scan around the origin (the set is centrally symmetric, so the
    origin is interior whenever the regressors span the plane).
    """
    F = np.asarray(F, float)
    n = F.shape[0]
    pts = np.vstack([F, -F])
    owner = np.r_[np.arange(n), np.arange(n)]
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    rad = np.hypot(pts[:, 0], pts[:, 1])
    order = np.lexsort((-rad, ang))
    hull: list[int] = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    # the farthest point from the origin is always extreme: start there
    start = int(np.argmax(rad[order]))
    seq = list(order[start:]) + list(order[:start]) + [order[start]]
    for k in seq:
        while len(hull) >= 2 and cross(pts[hull[-2]], pts[hull[-1]], pts[k]) <= tol:
            hull.pop()
        hull.append(k)
    hull.pop()
    extreme = np.zeros(n, dtype=bool)
    extreme[owner[hull]] = True
    return extreme
