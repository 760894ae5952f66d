import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edesign import DesignSpace, elfving_prune, elfving_removable, solve_eoptimal
from edesign.elfving import UnsupportedInput
from edesign.model import DesignPoint
from oracles import elfving_extreme_m2


def three(p):
    return DesignSpace.from_regressors(np.array([[1.0, 0.0], [0.0, 1.0], p]), ids=["e1", "e2", "p"])


def test_interior_point_removable():
    assert elfving_removable(three([0.4, 0.4]), "p")


def test_outside_point_kept():
    assert not elfving_removable(three([0.6, 0.6]), "p")


def test_vertex_kept():
    assert not elfving_removable(DesignSpace.from_regressors(np.eye(2)), "x0")


def test_prune_three_points():
    assert elfving_prune(three([0.4, 0.4])) == ["p"]
    assert elfving_prune(DesignSpace.from_regressors(np.eye(3))) == []


def test_scaled_copy_removed():
    S = DesignSpace.from_regressors([[1.0, 2.0], [0.5, 1.0], [-1.0, 1.0]], ids=["f", "half", "g"])
    assert elfving_prune(S) == ["half"]


def test_general_points_unsupported():
    S = DesignSpace([DesignPoint("a", "rank_one", [1.0, 0.0]), DesignPoint("b", "general", np.eye(2))])
    with pytest.raises(UnsupportedInput, match="b"):
        elfving_prune(S)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_matches_angular_hull(seed):
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(int(rng.integers(3, 25)), 2))
    S = DesignSpace.from_regressors(F)
    removed = set(elfving_prune(S))
    extreme = elfving_extreme_m2(F)
    assert [pid in removed for pid in S.ids] == (~extreme).tolist()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_optimal_support_never_removed(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 4))
    S = DesignSpace.from_regressors(rng.normal(size=(int(rng.integers(m + 2, 25)), m)))
    removed = set(elfving_prune(S))
    assert not removed & set(solve_eoptimal(S).design.weights)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_cascade_and_threads_agree(seed):
    rng = np.random.default_rng(seed)
    S = DesignSpace.from_regressors(rng.normal(size=(int(rng.integers(4, 30)), 3)))
    base = elfving_prune(S)
    assert elfving_prune(S, cascade=True) == base
    assert elfving_prune(S, threads=3) == base
