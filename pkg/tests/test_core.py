import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpsdoe.core import (
    Action,
    DataSequence,
    DiscreteOutcome,
    FiniteEnvironment,
    RealOutcome,
    concat,
    is_prefix,
    make_grid_actions,
    prefix,
)
from mpsdoe.penalties import TableLookupPenalty, constant_rule

A0 = Action(0, (0.0,))
A1 = Action(1, (1.0,))
Y0 = DiscreteOutcome(0)
Y1 = DiscreteOutcome(1)


def seq(*pairs):
    return DataSequence(tuple(pairs))


def test_concat_on_empty():
    d = concat(DataSequence.empty(), (A0, Y0))
    assert len(d) == 1 and d.pairs == ((A0, Y0),)


def test_concat_appends():
    d = concat(seq((A0, Y0)), (A1, Y1))
    assert d.pairs == ((A0, Y0), (A1, Y1))


def test_prefix_trivial_cases():
    d = seq((A0, Y0), (A1, Y1), (A0, Y1))
    assert prefix(d, 0) == DataSequence.empty()
    assert prefix(d, len(d)) == d
    assert prefix(d, 2) == seq((A0, Y0), (A1, Y1))


def test_prefix_out_of_range():
    with pytest.raises(IndexError):
        prefix(seq((A0, Y0)), 2)


def test_is_prefix_basic():
    assert is_prefix(DataSequence.empty(), seq((A0, Y0)))
    d = seq((A0, Y0), (A1, Y1))
    assert is_prefix(d, d)
    assert not is_prefix(seq((A0, Y0)), seq((A1, Y0), (A0, Y0)))


pair_strategy = st.tuples(
    st.sampled_from([A0, A1]),
    st.one_of(st.sampled_from([Y0, Y1]), st.builds(lambda v: RealOutcome((v,)), st.floats(-5, 5))),
)
seq_strategy = st.lists(pair_strategy, max_size=8).map(lambda ps: DataSequence(tuple(ps)))


@settings(max_examples=100, deadline=None)
@given(seq_strategy, pair_strategy)
def test_prefix_concat_roundtrip(d, p):
    assert prefix(concat(d, p), len(d)) == d
    assert len(concat(d, p)) == len(d) + 1


@settings(max_examples=100, deadline=None)
@given(seq_strategy, seq_strategy, seq_strategy)
def test_is_prefix_partial_order(a, b, c):
    assert is_prefix(a, a)
    if is_prefix(a, b) and is_prefix(b, a):
        assert a == b
    if is_prefix(a, b) and is_prefix(b, c):
        assert is_prefix(a, c)


def test_json_roundtrip():
    actions = [A0, A1]
    d = seq((A0, Y1), (A1, Y0))
    assert DataSequence.from_json(d.to_json(), actions) == d
    d2 = seq((A0, RealOutcome((0.5, -1.25))))
    assert DataSequence.from_json(d2.to_json(), actions) == d2


def _finite_env(likelihood, prior=(0.5, 0.5)):
    actions = (A0, A1)
    return FiniteEnvironment(
        name="t",
        theta_labels=["a", "b"],
        prior=np.array(prior),
        actions=actions,
        likelihood=np.asarray(likelihood, dtype=float),
        penalty=TableLookupPenalty(None, constant_rule(0.0)),
    )


def test_environment_validates_rows():
    good = np.full((2, 2, 2), 0.5)
    _finite_env(good)
    bad = good.copy()
    bad[0, 0] = [0.5, 0.5 + 1e-9]
    with pytest.raises(ValueError):
        _finite_env(bad)


def test_environment_validates_prior():
    good = np.full((2, 2, 2), 0.5)
    with pytest.raises(ValueError):
        _finite_env(good, prior=(0.6, 0.6))


def test_grid_actions_shape_and_bounds():
    acts = make_grid_actions([(0.0, 10.0)], 100)
    assert len(acts) == 100
    assert acts[0].coords == (0.0,) and acts[-1].coords == (10.0,)
    acts2 = make_grid_actions([(0.0, 1.0), (0.0, 1.0)], 50)
    assert len(acts2) == 2500
    assert all(0.0 <= c <= 1.0 for a in acts2 for c in a.coords)
