"""Criterion-free deletion via the Elfving set conv({f(x)} u {-f(x)}).

A regressor that is not an extreme point of the Elfving set can be removed
without losing any optimal design, whatever the criterion. Removability of
x is an LP feasibility question:

    f(x) = sum_{y != x} a_y f(y) - sum_y b_y f(y),  a, b >= 0,  sum a + sum b = 1.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .lp import LinearProgram, solve
from .model import DesignSpace


class UnsupportedInput(ValueError):
    pass


def _system(F: np.ndarray, i: int) -> LinearProgram:
    n, m = F.shape
    others = np.delete(F, i, axis=0)
    A = np.zeros((m + 1, 2 * n - 1))
    A[:m, : n - 1] = others.T
    A[:m, n - 1:] = -F.T
    A[m, :] = 1.0
    b = np.r_[F[i], 1.0]
    return LinearProgram(np.zeros(2 * n - 1), A, ("=",) * (m + 1), b, None)


def _regressors(space: DesignSpace) -> np.ndarray:
    if not space.all_rank_one:
        bad = [p.id for p in space if p.kind != "rank_one"]
        raise UnsupportedInput(f"Elfving deletion needs regressors; general-kind points: {bad[:5]}")
    return space.regressors


def elfving_removable(space: DesignSpace, point_id: str) -> bool:
    F = _regressors(space)
    return solve(_system(F, space.index[point_id])).status != "infeasible"


def elfving_prune(space: DesignSpace, threads: int | None = None, cascade: bool = False) -> list[str]:
    """Ids whose regressors are not extreme points of the Elfving set.

    Each point is tested against the full space. With `cascade`, the test
    is repeated on the survivors until nothing more is removed; since
    interior points never define the hull this must not change the answer.
    """
    F = _regressors(space)
    n = F.shape[0]

    def check(i):
        return solve(_system(F, i)).status != "infeasible"

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            flags = list(pool.map(check, range(n)))
    else:
        flags = [check(i) for i in range(n)]
    removed = [pid for pid, f in zip(space.ids, flags) if f]
    if cascade and removed and len(removed) < n:
        rest = space.subset([pid for pid, f in zip(space.ids, flags) if not f])
        more = elfving_prune(rest, threads=threads, cascade=True)
        removed = [pid for pid in space.ids if pid in set(removed) | set(more)]
    return removed
