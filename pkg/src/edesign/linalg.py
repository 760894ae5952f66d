"""Dense symmetric matrix helpers and a cyclic Jacobi eigensolver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OFFDIAG_RTOL = 1e-14
MAX_SWEEPS = 100


class EigenConvergenceError(RuntimeError):
    """Jacobi sweeps did not reduce the off-diagonal mass below tolerance."""


def as_sym(a, check: bool = True, atol: float = 1e-10) -> np.ndarray:
    """Return `a` as an exactly symmetric float array.

    When `check` is true, an input whose asymmetry exceeds `atol` (relative
    to its largest entry) is rejected instead of silently averaged.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if check:
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.T)) > atol * scale:
            raise ValueError("matrix is not symmetric")
    # (a + a.T) / 2 is bitwise symmetric because addition commutes
    return (a + a.T) / 2.0


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues ascending and matching orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    def vector(self, i: int) -> np.ndarray:
        return self.eigenvectors[:, i]

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.T


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            vecs[:, j] = -col
    return vecs


def _off_on(a: np.ndarray) -> tuple[float, float]:
    d = np.diag(a)
    return float(np.linalg.norm(a - np.diag(d))), float(np.linalg.norm(d))


def sym_eigen(m) -> SpectralData:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps visit pairs (p, q), p < q, in row order. Iteration stops once the
    Frobenius norm of the off-diagonal part is at most 1e-14 times the norm
    of the diagonal. Eigenvectors are normalised so that their first
    nonzero coordinate is positive.
    """
    a = as_sym(m)
    n = a.shape[0]
    v = np.eye(n)
    converged = n == 1
    for _ in range(MAX_SWEEPS):
        off, on = _off_on(a)
        if off <= OFFDIAG_RTOL * on or off == 0.0:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app, aqq = a[p, p], a[q, q]
                # below rounding level of both diagonal entries
                if abs(apq) <= 1e-18 * min(abs(app), abs(aqq)):
                    a[p, q] = a[q, p] = 0.0
                    continue
                with np.errstate(over="ignore"):
                    theta = (aqq - app) / (2.0 * apq)
                if not np.isfinite(theta):  # apq negligible against the diagonal gap
                    a[p, q] = a[q, p] = 0.0
                    continue
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:  # theta^2 would overflow
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        off, on = _off_on(a)
        converged = off <= OFFDIAG_RTOL * on
    if not converged:
        raise EigenConvergenceError(
            f"Jacobi did not converge in {MAX_SWEEPS} sweeps: off-diagonal norm "
            f"{off:.3e}, diagonal norm {on:.3e}, dim {n}"
        )
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return SpectralData(w[order], _fix_signs(v[:, order]))


def quad_form(m, v) -> float:
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    if m.ndim != 2 or v.ndim != 1 or m.shape != (v.size, v.size):
        raise ValueError(f"dimension mismatch: matrix {m.shape}, vector {v.shape}")
    return float(v @ (m @ v))


def trace_product(a, b) -> float:
    """tr(AB) for symmetric A, B, i.e. the entrywise inner product."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def rank_one(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return np.outer(f, f)
