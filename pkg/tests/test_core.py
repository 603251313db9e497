import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from streamlabel.core import (
    HeuristicFunction,
    Instance,
    LabelSpace,
    Prototype,
    covers,
    distance,
    nearest_prototype,
)
from streamlabel.errors import ContractError

coords = st.floats(-1e3, 1e3, allow_nan=False)


def proto(c, r=1.0, freqs=None, s=1):
    return Prototype(np.asarray(c, float), r, min(r, 0.5), s, freqs or {})


@pytest.mark.parametrize("a,b,want", [
    ((0, 0), (0, 0), 0.0),
    ((0, 0), (3, 4), 5.0),
    ((1, 1), (2, 3), math.sqrt(5)),
])
def test_distance_examples(a, b, want):
    assert distance(a, b) == pytest.approx(want, abs=1e-12)


def test_distance_dimension_mismatch():
    with pytest.raises(ContractError):
        distance((0, 0), (0, 0, 0))


@given(st.lists(coords, min_size=3, max_size=3), st.lists(coords, min_size=3, max_size=3))
def test_distance_symmetric_nonnegative(a, b):
    assert distance(a, b) == distance(b, a) >= 0


def test_nearest_prototype_examples():
    h = HeuristicFunction(0, [proto((0, 0)), proto((10, 0))])
    assert nearest_prototype(h, Instance(1, [1, 0])) == (0, 1.0)
    single = HeuristicFunction(0, [proto((5, 5))])
    assert nearest_prototype(single, Instance(1, [5, 5])) == (0, 0.0)
    tie = HeuristicFunction(0, [proto((-1, 0)), proto((1, 0))])
    assert nearest_prototype(tie, Instance(1, [0, 0])) == (0, 1.0)


def test_nearest_prototype_empty_hf():
    with pytest.raises(ContractError):
        nearest_prototype(HeuristicFunction(0, []), Instance(1, [0, 0]))


def test_covers_examples():
    p = proto((0, 0), r=2.0)
    assert covers(p, [1, 0], 0.0)
    assert not covers(p, [2.1, 0], 0.0)
    assert covers(p, [2.1, 0], 0.1)


def test_instance_rejects_nonfinite():
    with pytest.raises(ContractError):
        Instance(0, [0.0, float("nan")])


def test_prototype_majority_ties_to_smallest_label():
    assert proto((0, 0), freqs={3: 2, 1: 2, 5: 1}).majority() == (1, 2)
    assert proto((0, 0)).majority() is None


def test_labelspace_allocates_after_max():
    ls = LabelSpace({0, 4})
    assert ls.add(7) == 5
    assert ls.add(9) == 6
    assert ls.all_labels == [0, 4, 5, 6]
    assert ls.founding_chunk(6) == 9 and ls.founding_chunk(0) is None
