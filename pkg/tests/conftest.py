import numpy as np
import pytest
from hypothesis import strategies as st

from lapdp.core import DiscretePair


@st.composite
def discrete_pairs(draw, min_size=2, max_size=5, allow_zeros=True):
    """Random pairs on a shared support, optionally with zeroed coordinates."""
    n = draw(st.integers(min_size, max_size))
    weight = st.floats(1e-3, 1.0, allow_nan=False)
    vecs = []
    for _ in range(2):
        w = np.array(draw(st.lists(weight, min_size=n, max_size=n)))
        if allow_zeros:
            mask = np.array(draw(st.lists(st.booleans(), min_size=n, max_size=n)))
            if mask.all():
                mask[0] = False
            w = np.where(mask, 0.0, w)
        vecs.append(w / w.sum())
    return DiscretePair(vecs[0], vecs[1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
