import numpy as np
import pytest

import pyblanket
from pyblanket import BlanketErrno, BlanketError, MultipartiteState, Region


def test_error_on_bad_state():
    with pytest.raises(BlanketError) as exc_info:
        MultipartiteState(np.eye(2), (2,))
    e = exc_info.value
    assert isinstance(e, ValueError)
    assert e.errcode == BlanketErrno.NOT_NORMALIZED


def test_error_str():
    with pytest.raises(BlanketError) as exc_info:
        MultipartiteState(np.eye(2), (2,))
    s = str(exc_info.value)
    assert s.startswith("[NOT_NORMALIZED] ")
    assert exc_info.value.message in s


def test_not_hermitian():
    with pytest.raises(BlanketError) as exc_info:
        MultipartiteState(np.array([[0.5, 0.1], [0.0, 0.5]]), (2,))
    assert exc_info.value.errcode == BlanketErrno.NOT_HERMITIAN


def test_negative_eigenvalue():
    with pytest.raises(BlanketError) as exc_info:
        MultipartiteState(np.diag([1.5, -0.5]), (2,))
    assert exc_info.value.errcode == BlanketErrno.NEGATIVE_EIGENVALUE


def test_dim_mismatch():
    with pytest.raises(BlanketError) as exc_info:
        MultipartiteState(np.eye(4) / 4, (2, 3))
    assert exc_info.value.errcode == BlanketErrno.DIM_MISMATCH


def test_not_square():
    with pytest.raises(BlanketError) as exc_info:
        pyblanket.linalg.trace_norm(np.zeros((2, 3)))
    assert exc_info.value.errcode == BlanketErrno.NOT_SQUARE


def test_region_errors():
    s = pyblanket.ghz_state(3)
    with pytest.raises(BlanketError) as exc_info:
        pyblanket.partial_trace(s, Region.of(3))
    assert exc_info.value.errcode == BlanketErrno.REGION_OUT_OF_RANGE

    with pytest.raises(BlanketError) as exc_info:
        pyblanket.partial_trace(s, Region())
    assert exc_info.value.errcode == BlanketErrno.EMPTY_REGION

    with pytest.raises(BlanketError) as exc_info:
        pyblanket.mutual_information(s, Region.of(0, 1), Region.of(1))
    assert exc_info.value.errcode == BlanketErrno.REGION_OVERLAP


def test_invariant_violation():
    e = pyblanket.InvariantViolation("sum too large")
    assert e.errcode == BlanketErrno.INVARIANT_VIOLATION
    assert e.message == "sum too large"
