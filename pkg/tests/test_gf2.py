import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rgtoric import gf2

mats = arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 8)), elements=st.integers(0, 1))


@given(mats)
def test_nullspace_and_rank(A):
    N = gf2.nullspace(A)
    assert len(N) == A.shape[1] - gf2.rank(A)
    assert not (A.astype(int) @ N.T.astype(int) % 2).any()


@given(mats, st.data())
def test_solve(A, data):
    x = data.draw(arrays(np.uint8, A.shape[1], elements=st.integers(0, 1)))
    b = A.astype(int) @ x % 2
    y = gf2.solve(A, b)
    assert y is not None
    assert np.array_equal(A.astype(int) @ y % 2, b)


def test_inconsistent():
    assert gf2.solve(np.array([[1, 1], [1, 1]]), np.array([0, 1])) is None


def test_span_size():
    rows = np.eye(3, dtype=np.uint8)
    assert len({tuple(r) for r in gf2.span(rows)}) == 8
