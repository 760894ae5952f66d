"""scikit-learn style front end.

Rows of X are candidate design points: either regressors f(x) (shape
(n, m)) or elementary information matrices (shape (n, m, m)). The
screeners select *rows*, so `transform` returns the surviving candidates
and `get_support` gives their mask.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_design_space, check_reference_weights, n_points
from .elfving import elfving_prune
from .model import Design, info_matrix
from .prune import CERT_MARGIN, DELETE_MARGIN, OPT_TOL, prune
from .solver import SolverConfig, certify, solve_eoptimal


class EOptimalDesign(BaseEstimator):
    """Approximate E-optimal design computed by cutting planes.

    Parameters
    ----------
    tol : float
        Relative gap between the LP upper bound and the achieved minimum
        eigenvalue at which iteration stops.
    max_iter : int
        Maximum number of cuts.
    weight_floor : float
        Weights at or below this value are dropped from the fitted design.

    Attributes
    ----------
    weights_ : ndarray of shape (n,)
    support_ : ndarray of int, indices with positive weight
    lambda1_ : float, smallest eigenvalue of the information matrix
    upper_bound_ : float, LP bound on the optimal value
    info_matrix_ : ndarray of shape (m, m)
    n_iter_, converged_, cuts_
    """

    def __init__(self, tol=1e-7, max_iter=500, weight_floor=1e-12):
        self.tol = tol
        self.max_iter = max_iter
        self.weight_floor = weight_floor

    def fit(self, X, y=None):
        space = check_design_space(X)
        res = solve_eoptimal(space, SolverConfig(self.tol, self.max_iter, self.weight_floor))
        self.space_ = space
        self.result_ = res
        self.design_ = res.design
        self.weights_ = res.design.to_vector(space)
        self.support_ = np.flatnonzero(self.weights_ > 0)
        self.lambda1_ = res.lambda1
        self.upper_bound_ = res.upper_bound
        self.info_matrix_ = info_matrix(space, self.weights_)
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        self.cuts_ = res.cuts
        self.n_features_in_ = space.m
        return self

    def certificate(self):
        """Equivalence-theorem certificate for the fitted design."""
        check_is_fitted(self, "weights_")
        return certify(self.space_, self.design_, extra_vectors=self.cuts_)

    def score(self, X, y=None):
        """Smallest eigenvalue of the fitted weights' information matrix on X."""
        check_is_fitted(self, "weights_")
        space = check_design_space(X)
        if len(space) != self.weights_.size:
            raise ValueError(f"X has {len(space)} points, the design was fitted on {self.weights_.size}")
        return float(np.linalg.eigvalsh(info_matrix(space, self.weights_))[0])


class _RowSelector(TransformerMixin, BaseEstimator):
    def get_support(self, indices=False):
        check_is_fitted(self, "support_mask_")
        return np.flatnonzero(self.support_mask_) if indices else self.support_mask_.copy()

    def transform(self, X):
        check_is_fitted(self, "support_mask_")
        n = n_points(X)
        if n != self.support_mask_.size:
            raise ValueError(f"X has {n} points, the screener was fitted on {self.support_mask_.size}")
        if hasattr(X, "subset"):
            return X.subset(self.support_mask_)
        return np.asarray(X)[self.support_mask_]


class EOptimalScreener(_RowSelector):
    """Discard candidate points that cannot support any E-optimal design.

    The reference design is passed as `sample_weight` to `fit` (any
    nonnegative weights, rescaled to sum to one; uniform when omitted). The
    closer it is to E-optimal, the more points are discarded.

    Attributes
    ----------
    support_mask_ : boolean mask of kept rows
    scores_ : screening values G per row (NaN in certificate mode)
    traces_ : tr(H(x) Z) per row (certificate mode only, else None)
    h_, alpha_, lambda1_, efficiency_bound_, mode_, report_
    """

    def __init__(self, augment=False, extra_vectors=None, delete_margin=DELETE_MARGIN,
                 cert_margin=CERT_MARGIN, opt_tol=OPT_TOL, threads=None):
        self.augment = augment
        self.extra_vectors = extra_vectors
        self.delete_margin = delete_margin
        self.cert_margin = cert_margin
        self.opt_tol = opt_tol
        self.threads = threads

    def fit(self, X, y=None, sample_weight=None):
        space = check_design_space(X)
        w = check_reference_weights(sample_weight, len(space))
        rep = prune(space, Design.from_vector(space, w), augment=self.augment,
                    extra_vectors=self.extra_vectors, opt_tol=self.opt_tol,
                    cert_margin=self.cert_margin, delete_margin=self.delete_margin,
                    threads=self.threads)
        self.report_ = rep
        self.support_mask_ = rep.keep_mask
        self.mode_ = rep.mode
        self.h_ = rep.witness.h
        self.alpha_ = rep.witness.alpha
        self.lambda1_ = rep.witness.lambda1
        self.efficiency_bound_ = rep.efficiency_bound
        if rep.scores is not None:
            self.scores_ = np.array([s.G for s in rep.scores])
            self.traces_ = None
        else:
            self.scores_ = np.full(len(space), np.nan)
            self.traces_ = rep.traces
        self.n_features_in_ = space.m
        return self


class ElfvingScreener(_RowSelector):
    """Discard regressors that are not extreme points of the Elfving set."""

    def __init__(self, threads=None):
        self.threads = threads

    def fit(self, X, y=None):
        space = check_design_space(X)
        removed = set(elfving_prune(space, threads=self.threads))
        self.support_mask_ = np.array([pid not in removed for pid in space.ids])
        self.n_features_in_ = space.m
        return self
