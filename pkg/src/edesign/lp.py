"""Two-phase dense simplex for small and wide linear programs.

The tableau is kept as one numpy array, so a pivot costs one rank-one
update. Pricing is Dantzig's rule until a run of degenerate pivots is seen,
after which Bland's rule takes over for the rest of the solve; both choices
are deterministic, so identical input gives bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-9
COST_TOL = 1e-11
DEGENERATE_RUN = 50
HARRIS_TOL = 1e-12

_REL = {"<=": "<=", "≤": "<=", "le": "<=", ">=": ">=", "≥": ">=", "ge": ">=", "=": "=", "==": "=", "eq": "="}


class LPStalled(RuntimeError):
    """Raised when the simplex hits its iteration cap."""


@dataclass(frozen=True)
class LinearProgram:
    """minimize c @ x  subject to  A[i] @ x (senses[i]) b[i],  x >= lower.

    A lower bound of -inf marks a free variable.
    """

    c: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    b: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        if n < 1:
            raise ValueError("a linear program needs at least one variable")
        A = np.asarray(self.A, dtype=float).reshape(-1, n) if np.size(self.A) else np.zeros((0, n))
        b = np.asarray(self.b, dtype=float).ravel()
        senses = tuple(_REL[s] for s in self.senses)
        if A.shape[0] != b.size or len(senses) != b.size:
            raise ValueError("constraint rows, senses and rhs must have equal length")
        lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        if lower.size != n:
            raise ValueError(f"expected {n} lower bounds, got {lower.size}")
        for arr, name in ((c, "objective"), (A, "constraints"), (b, "rhs")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite {name} coefficient")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "lower", lower)

    @classmethod
    def from_rows(
        cls,
        objective: Sequence[float],
        constraints: Iterable[tuple[Sequence[float], str, float]],
        lower: Sequence[float | None] | None = None,
    ) -> "LinearProgram":
        rows = list(constraints)
        n = len(objective)
        for coef, _, _ in rows:
            if len(coef) != n:
                raise ValueError(f"constraint row of length {len(coef)} for {n} variables")
        A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), n)
        lb = None if lower is None else [-np.inf if v is None else v for v in lower]
        return cls(np.asarray(objective, float), A, tuple(r[1] for r in rows),
                   np.array([r[2] for r in rows], dtype=float), lb)

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray
    objective: float
    duals: np.ndarray = field(default=None)  # d(objective)/d(b), optimal only
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    def __init__(self, T: np.ndarray, basis: np.ndarray, cap: int):
        self.T = T
        self.basis = basis
        self.cap = cap
        self.iterations = 0

    def run(self, ncols: int) -> str:
        """Minimise the objective held in the last row over columns [0, ncols)."""
        T = self.T
        r = T.shape[0] - 1
        bland = False
        degenerate = 0
        while True:
            cost = T[-1, :ncols]
            if bland:
                cand = np.flatnonzero(cost < -COST_TOL)
                if cand.size == 0:
                    return "optimal"
                j = int(cand[0])
            else:
                j = int(np.argmin(cost))
                if cost[j] >= -COST_TOL:
                    return "optimal"
            col = T[:r, j]
            pos = col > PIVOT_TOL
            if not np.any(pos):
                return "unbounded"
            rhs = T[:r, -1]
            ratios = np.full(r, np.inf)
            ratios[pos] = rhs[pos] / col[pos]
            best = ratios.min()
            # Harris-style: among near-minimal ratios, avoid small pivots
            relaxed = np.full(r, np.inf)
            relaxed[pos] = (rhs[pos] + HARRIS_TOL) / col[pos]
            ties = np.flatnonzero(ratios <= relaxed.min())
            if bland:
                big = ties[col[ties] >= 0.1 * col[ties].max()]
                i = int(big[np.argmin(self.basis[big])])
            else:
                i = int(ties[np.argmax(col[ties])])
            if best <= 1e-12:
                degenerate += 1
                if degenerate >= DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
            self.pivot(i, j)
            self.iterations += 1
            if self.iterations > self.cap:
                raise LPStalled(f"simplex exceeded {self.cap} pivots")

    def pivot(self, i: int, j: int) -> None:
        T = self.T
        T[i] /= T[i, j]
        col = T[:, j].copy()
        col[i] = 0.0
        T -= np.outer(col, T[i])
        rhs = T[:-1, -1]
        rhs[(rhs < 0.0) & (rhs > -HARRIS_TOL * 10)] = 0.0
        self.basis[i] = j


def solve(lp: LinearProgram, max_iter: int | None = None) -> LPSolution:
    """Solve `lp` by the two-phase simplex method.

    Raises LPStalled when the pivot count exceeds 50 * (variables + rows)
    unless `max_iter` overrides it.
    """
    n = lp.n_vars
    finite = np.isfinite(lp.lower)
    # x = lower + x'  for bounded variables, x = x+ - x-  for free ones
    free = np.flatnonzero(~finite)
    shift = np.where(finite, lp.lower, 0.0)
    A = np.hstack([lp.A, -lp.A[:, free]]) if free.size else lp.A.copy()
    c = np.concatenate([lp.c, -lp.c[free]]) if free.size else lp.c.copy()
    b = lp.b - lp.A @ shift
    n_std = A.shape[1]
    m_rows = A.shape[0]
    cap = max_iter if max_iter is not None else 50 * (n + max(m_rows, 1))

    # row scaling, sign normalisation, exact duplicate removal
    senses = list(lp.senses)
    scale = np.ones(m_rows)
    keep_rows: list[int] = []
    seen: dict[bytes, int] = {}
    for i in range(m_rows):
        amax = np.max(np.abs(A[i])) if n_std else 0.0
        if amax == 0.0:
            ok = {"<=": b[i] >= -FEAS_TOL, ">=": b[i] <= FEAS_TOL, "=": abs(b[i]) <= FEAS_TOL}[senses[i]]
            if not ok:
                return LPSolution("infeasible", np.full(n, np.nan), np.nan, iterations=0)
            continue
        scale[i] = amax
        key = A[i].tobytes() + senses[i].encode() + b[i].tobytes()
        if key in seen:
            continue
        seen[key] = i
        keep_rows.append(i)
    rows = np.array(keep_rows, dtype=int)
    As = A[rows] / scale[rows, None]
    bs = b[rows] / scale[rows]
    sn = [senses[i] for i in rows]
    sign = np.where(bs < 0, -1.0, 1.0)
    As *= sign[:, None]
    bs *= sign
    flip = {"<=": ">=", ">=": "<=", "=": "="}
    sn = [flip[s] if g < 0 else s for s, g in zip(sn, sign)]
    r = rows.size

    n_slack = sum(s != "=" for s in sn)
    n_art = sum(s != "<=" for s in sn)
    ncols = n_std + n_slack + n_art
    T = np.zeros((r + 1, ncols + 1))
    T[:r, :n_std] = As
    T[:r, -1] = bs
    basis = np.empty(r, dtype=int)
    slack_of = np.full(r, -1)
    k_s, k_a = n_std, n_std + n_slack
    for i, s in enumerate(sn):
        if s == "<=":
            T[i, k_s] = 1.0
            basis[i] = k_s
            slack_of[i] = k_s
            k_s += 1
        else:
            if s == ">=":
                T[i, k_s] = -1.0
                slack_of[i] = k_s
                k_s += 1
            T[i, k_a] = 1.0
            basis[i] = k_a
            k_a += 1
    art0 = n_std + n_slack
    tab = _Tableau(T, basis, cap)
    live = np.arange(r)  # local rows still present in the tableau

    if n_art:
        art_rows = basis >= art0
        T[-1, :] = -T[:r][art_rows].sum(axis=0)
        T[-1, art0:ncols] = 0.0
        tab.run(ncols)
        if -T[-1, -1] > FEAS_TOL * max(1.0, float(np.max(np.abs(bs), initial=0.0))):
            return LPSolution("infeasible", np.full(n, np.nan), np.nan, iterations=tab.iterations)
        # drive artificials out of the basis; rows where that fails are redundant
        redundant = []
        for i in range(r):
            if tab.basis[i] >= art0:
                cand = np.flatnonzero(np.abs(T[i, :art0]) > 1e-9)
                if cand.size:
                    tab.pivot(i, int(cand[np.argmax(np.abs(T[i, cand]))]))
                else:
                    redundant.append(i)
        if redundant:
            live = np.setdiff1d(live, redundant)
            tab.T = np.vstack([T[live], T[-1:]])
            tab.basis = tab.basis[live]
        tab.T[:, art0:ncols] = 0.0
    T = tab.T
    basis = tab.basis
    r_live = live.size

    # phase two objective row: reduced costs c - c_B B^-1 A
    cfull = np.zeros(ncols)
    cfull[:n_std] = c
    T[-1, :] = 0.0
    T[-1, :n_std] = c
    T[-1, :] -= cfull[basis] @ T[:r_live, :]
    status = tab.run(art0)
    T = tab.T
    if status == "unbounded":
        return LPSolution("unbounded", np.full(n, np.nan), -np.inf, iterations=tab.iterations)

    xs = np.zeros(ncols)
    xs[basis] = T[:r_live, -1]
    xp = xs[:n_std]
    x = xp[:n] + shift
    if free.size:
        x[free] -= xp[n:]
    objective = float(lp.c @ x)
    _check_primal(lp, x)

    # duals from B^T y = c_B on the scaled, sign-normalised rows
    duals = np.zeros(m_rows)
    if r_live:
        Bfull = np.zeros((r_live, ncols))
        Bfull[:, :n_std] = As[live]
        for k, i in enumerate(live):
            if slack_of[i] >= 0:
                Bfull[k, slack_of[i]] = 1.0 if sn[i] == "<=" else -1.0
        B = Bfull[:, basis]
        try:
            y = np.linalg.solve(B.T, cfull[basis])
        except np.linalg.LinAlgError:
            y = np.linalg.lstsq(B.T, cfull[basis], rcond=None)[0]
        orig = rows[live]
        duals[orig] = y * sign[live] / scale[orig]
    return LPSolution("optimal", x, objective, duals, tab.iterations)


def _check_primal(lp: LinearProgram, x: np.ndarray) -> None:
    resid = lp.A @ x - lp.b
    size = 1.0 + np.abs(lp.A) @ np.abs(x) + np.abs(lp.b)
    viol = np.zeros_like(resid)
    for k, s in enumerate(lp.senses):
        viol[k] = {"<=": max(resid[k], 0.0), ">=": max(-resid[k], 0.0), "=": abs(resid[k])}[s]
    bad = np.max(viol / size, initial=0.0)
    low = np.max(np.where(np.isfinite(lp.lower), lp.lower - x, 0.0), initial=0.0)
    if bad > 1e-6 or low > 1e-6:
        raise LPStalled(f"simplex lost feasibility (residual {max(bad, low):.2e})")


def feasible(A, senses, b, lower=None) -> bool:
    """True iff the constraint system admits a point (zero objective)."""
    A = np.asarray(A, dtype=float)
    lp = LinearProgram(np.zeros(A.shape[1]), A, tuple(senses), np.asarray(b, float), lower)
    return solve(lp).status != "infeasible"


def maximin_simplex(Q: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """max_{w in simplex} min_k (w @ Q)[k], with its dual weights.

    Q has one row per design point and one column per direction. Returns
    (value, w, alpha) where alpha is the dual probability vector over
    columns, so that value == min_alpha max_x (Q @ alpha)[x] at optimum.
    """
    Q = np.asarray(Q, dtype=float)
    n, k = Q.shape
    # variables: w (n), t (free); rows: t - w @ Q[:, j] <= 0, sum w = 1
    A = np.zeros((k + 1, n + 1))
    A[:k, :n] = -Q.T
    A[:k, n] = 1.0
    A[k, :n] = 1.0
    c = np.zeros(n + 1)
    c[n] = -1.0
    lower = np.zeros(n + 1)
    lower[n] = -np.inf
    sol = solve(LinearProgram(c, A, ("<=",) * k + ("=",), np.r_[np.zeros(k), 1.0], lower))
    if not sol.optimal:
        raise LPStalled(f"maximin LP returned status {sol.status}")
    w = np.clip(sol.x[:n], 0.0, None)
    w /= w.sum()
    alpha = np.clip(-sol.duals[:k], 0.0, None)
    total = alpha.sum()
    alpha = alpha / total if total > 0 else np.full(k, 1.0 / k)
    return float(sol.x[n]), w, alpha
