"""Design spaces, designs, and information matrices."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .linalg import as_sym, sym_eigen

WEIGHT_SUM_TOL = 1e-10
NONSINGULAR_RTOL = 1e-9
PSD_TOL = 1e-10

RANK_ONE = "rank_one"
GENERAL = "general"


class DesignError(ValueError):
    """Invalid design space or design."""


@dataclass(frozen=True, eq=False)
class DesignPoint:
    """One candidate trial.

    `payload` is the regressor f(x) for rank-one points, or the elementary
    information matrix H(x) for general points.
    """

    id: str
    kind: str
    payload: np.ndarray
    coords: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.id or any(ch.isspace() for ch in self.id):
            raise DesignError(f"point id {self.id!r} must be non-empty without whitespace")
        if self.kind == RANK_ONE:
            p = np.asarray(self.payload, dtype=float).ravel()
        elif self.kind == GENERAL:
            p = as_sym(self.payload)
            lam = np.linalg.eigvalsh(p)
            if lam[0] < -PSD_TOL * max(1.0, lam[-1]):
                raise DesignError(f"point {self.id}: elementary matrix is not PSD (min eig {lam[0]:.3e})")
        else:
            raise DesignError(f"point {self.id}: unknown kind {self.kind!r}")
        if not np.all(np.isfinite(p)):
            raise DesignError(f"point {self.id}: non-finite payload")
        p.setflags(write=False)
        object.__setattr__(self, "payload", p)
        if self.coords is not None:
            object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return self.payload.shape[0]

    def elementary(self) -> np.ndarray:
        if self.kind == RANK_ONE:
            return np.outer(self.payload, self.payload)
        return self.payload

    def __eq__(self, other):
        if not isinstance(other, DesignPoint):
            return NotImplemented
        return (self.id == other.id and self.kind == other.kind
                and np.array_equal(self.payload, other.payload) and self.coords == other.coords)

    __hash__ = object.__hash__


class DesignSpace:
    """Ordered finite set of design points sharing a parameter dimension m.

    Point order fixes every tie-break downstream. Vectorised views
    (`regressors`, `elementary`) are built lazily.
    """

    def __init__(self, points: Iterable[DesignPoint], check_nonsingular: bool = True):
        self.points: tuple[DesignPoint, ...] = tuple(points)
        if not self.points:
            raise DesignError("design space is empty")
        self.m = self.points[0].dim
        for p in self.points:
            if p.dim != self.m:
                raise DesignError(f"point {p.id} has dimension {p.dim}, expected {self.m}")
        self.ids: tuple[str, ...] = tuple(p.id for p in self.points)
        self.index: dict[str, int] = {}
        for i, pid in enumerate(self.ids):
            if pid in self.index:
                raise DesignError(f"duplicate point id {pid}")
            self.index[pid] = i
        self._regressors: np.ndarray | None = None
        self._elementary: np.ndarray | None = None
        if check_nonsingular:
            lam = np.linalg.eigvalsh(self.elementary.sum(axis=0))
            if lam[0] <= NONSINGULAR_RTOL * lam[-1]:
                raise DesignError(
                    "no nonsingular design exists on this space "
                    f"(sum of elementary matrices has eigenvalues {lam[0]:.3e} .. {lam[-1]:.3e})"
                )

    @classmethod
    def from_regressors(cls, F, ids: Sequence[str] | None = None, coords=None, **kw) -> "DesignSpace":
        F = np.atleast_2d(np.asarray(F, dtype=float))
        ids = ids if ids is not None else [f"x{i}" for i in range(F.shape[0])]
        cs = coords if coords is not None else [None] * F.shape[0]
        return cls((DesignPoint(i, RANK_ONE, f, c) for i, f, c in zip(ids, F, cs)), **kw)

    @classmethod
    def from_matrices(cls, H, ids: Sequence[str] | None = None, **kw) -> "DesignSpace":
        H = np.asarray(H, dtype=float)
        ids = ids if ids is not None else [f"x{i}" for i in range(H.shape[0])]
        return cls((DesignPoint(i, GENERAL, h) for i, h in zip(ids, H)), **kw)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, key) -> DesignPoint:
        if isinstance(key, str):
            return self.points[self.index[key]]
        return self.points[key]

    def __eq__(self, other):
        return isinstance(other, DesignSpace) and self.points == other.points

    __hash__ = None

    @property
    def all_rank_one(self) -> bool:
        return all(p.kind == RANK_ONE for p in self.points)

    @property
    def regressors(self) -> np.ndarray:
        """(n, m) regressor matrix; only defined for all-rank-one spaces."""
        if self._regressors is None:
            if not self.all_rank_one:
                raise DesignError("space contains general-kind points; no regressor matrix")
            self._regressors = np.array([p.payload for p in self.points])
        return self._regressors

    @property
    def elementary(self) -> np.ndarray:
        """(n, m, m) stack of elementary information matrices."""
        if self._elementary is None:
            if self.all_rank_one:
                F = self.regressors
                self._elementary = F[:, :, None] * F[:, None, :]
            else:
                self._elementary = np.array([p.elementary() for p in self.points])
        return self._elementary

    def quad_forms(self, V) -> np.ndarray:
        """(n, s) array of v_j' H(x) v_j for the unit vectors in the columns of V."""
        V = np.asarray(V, dtype=float).reshape(self.m, -1)
        if self.all_rank_one:
            return (self.regressors @ V) ** 2
        return np.einsum("is,nij,js->ns", V, self.elementary, V)

    def traces(self) -> np.ndarray:
        if self.all_rank_one:
            return np.sum(self.regressors ** 2, axis=1)
        return np.trace(self.elementary, axis1=1, axis2=2)

    def trace_with(self, Z) -> np.ndarray:
        """tr(H(x) Z) for every point."""
        Z = as_sym(Z)
        if self.all_rank_one:
            F = self.regressors
            return np.einsum("ni,ij,nj->n", F, Z, F)
        return np.einsum("nij,ij->n", self.elementary, Z)

    def subset(self, ids_or_mask) -> "DesignSpace":
        if isinstance(ids_or_mask, np.ndarray) and ids_or_mask.dtype == bool:
            pts = [p for p, keep in zip(self.points, ids_or_mask) if keep]
        else:
            pts = [self[i] for i in ids_or_mask]
        return DesignSpace(pts, check_nonsingular=False)


@dataclass(frozen=True)
class Design:
    """Approximate design: strictly positive weights summing to one.

    Zero weights are not representable; the support is the key set.
    """

    weights: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        w = {str(k): float(v) for k, v in dict(self.weights).items()}
        if not w:
            raise DesignError("design has no support points")
        for k, v in w.items():
            if not (v > 0.0 and v <= 1.0 + WEIGHT_SUM_TOL):
                raise DesignError(f"weight of {k} is {v}, expected a value in (0, 1]")
        total = sum(w.values())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise DesignError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "weights", w)

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    @classmethod
    def from_vector(cls, space: DesignSpace, w, floor: float = 0.0) -> "Design":
        """Build from a dense weight vector, dropping entries <= floor and renormalising."""
        w = np.asarray(w, dtype=float)
        if w.shape != (len(space),):
            raise DesignError(f"weight vector of shape {w.shape} for {len(space)} points")
        keep = w > floor
        total = w[keep].sum()
        return cls({space.ids[i]: w[i] / total for i in np.flatnonzero(keep)})

    def to_vector(self, space: DesignSpace) -> np.ndarray:
        check_design(space, self)
        w = np.zeros(len(space))
        for k, v in self.weights.items():
            w[space.index[k]] = v
        return w


def check_design(space: DesignSpace, design: Design) -> None:
    missing = [k for k in design.weights if k not in space.index]
    if missing:
        raise DesignError(f"design references unknown point id {missing[0]!r}")


def info_matrix(space: DesignSpace, design: Design | np.ndarray) -> np.ndarray:
    """M(xi) = sum_x xi(x) H(x)."""
    w = design.to_vector(space) if isinstance(design, Design) else np.asarray(design, dtype=float)
    if space.all_rank_one:
        F = space.regressors
        M = (F * w[:, None]).T @ F
    else:
        M = np.tensordot(w, space.elementary, axes=1)
    return as_sym(M, check=False)


def lambda_min(space: DesignSpace, design) -> float:
    return sym_eigen(info_matrix(space, design)).lambda1


# ---------------------------------------------------------------------------
# grid models


FAMILIES = ("quadratic2d", "quadratic2d_interaction", "custom")


def regressor(family: str, x1: float, x2: float) -> np.ndarray:
    if family == "quadratic2d":
        return np.array([1.0, x1, x2, x1 * x1, x2 * x2])
    if family == "quadratic2d_interaction":
        return np.array([1.0, x1, x2, x1 * x1, x2 * x2, x1 * x2])
    raise DesignError(f"no built-in regressor for family {family!r}")


@dataclass(frozen=True)
class ModelConfig:
    """Square grid {k/d : k = -d..d}^2 restricted to x2 <= a*x1 + b."""

    family: str = "quadratic2d"
    density: int = 80
    a: float = -4.5117
    b: float = 0.6091

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DesignError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.family == "custom":
            raise DesignError("custom families are read from a design-space file, not generated")
        if int(self.density) != self.density or self.density < 1:
            raise DesignError(f"density must be a positive integer, got {self.density}")


_GRID_ID = re.compile(r"^\((-?\d+)/(\d+),(-?\d+)/(\d+)\)$")


def grid_id(k1: int, k2: int, d: int) -> str:
    return f"({k1}/{d},{k2}/{d})"


def parse_grid_id(pid: str) -> tuple[float, float]:
    """Coordinates encoded in a generated id, reproduced bit-exactly."""
    mt = _GRID_ID.match(pid)
    if not mt:
        raise DesignError(f"not a grid point id: {pid!r}")
    k1, d1, k2, d2 = map(int, mt.groups())
    return k1 / d1, k2 / d2


def grid_candidates(density: int) -> int:
    return (2 * density + 1) ** 2


def generate_grid(config: ModelConfig) -> DesignSpace:
    d = int(config.density)
    pts = []
    for k1 in range(-d, d + 1):
        x1 = k1 / d
        bound = config.a * x1 + config.b
        for k2 in range(-d, d + 1):
            x2 = k2 / d
            if x2 <= bound:
                pts.append(DesignPoint(grid_id(k1, k2, d), RANK_ONE, regressor(config.family, x1, x2), (x1, x2)))
    return DesignSpace(pts)


def dedup(space: DesignSpace) -> tuple[DesignSpace, dict[str, str]]:
    """Merge points with identical elementary matrices; the first id survives.

    Returns the reduced space and a log mapping each dropped id to the id
    that was kept in its place.
    """
    seen: dict[bytes, str] = {}
    kept, log = [], {}
    for p in space.points:
        key = (p.elementary() + 0.0).tobytes()  # + 0.0 folds -0.0 into 0.0
        if key in seen:
            log[p.id] = seen[key]
        else:
            seen[key] = p.id
            kept.append(p)
    if not log:
        return space, log
    return DesignSpace(kept, check_nonsingular=False), log
