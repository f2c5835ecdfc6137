import numpy as np
import pytest

from qisdp import _kernels
from qisdp.model import FacetIndex
from qisdp.oracle import dense_slack, random_feasible_point

from conftest import random_instance

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def _state(rng, n=5, width=6):
    inst = random_instance(rng, n, max_width=width)
    y = random_feasible_point(inst, rng, density=0.3)
    W = np.linalg.inv(dense_slack(inst, y))
    W = 0.5 * (W + W.T)
    index = FacetIndex(inst.domains)
    yf = y.to_flat(index)
    active = np.flatnonzero(yf < 0.0).astype(np.int64)
    return W, index, yf, active


@needs_numba
@pytest.mark.parametrize("i", [0, 1, 3])
def test_rank2_update_backends_agree(rng, i):
    for _ in range(20):
        W, *_ = _state(rng)
        n00, n01, n11 = rng.normal(size=3)
        a, b = W.copy(), W.copy()
        _kernels.numpy_rank2_update(a, i, n00, n01, n11)
        _kernels.numba_rank2_update(b, i, n00, n01, n11)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_numpy_rank2_update_matches_dense(rng):
    W, *_ = _state(rng)
    N = np.array([[0.3, -0.2], [-0.2, 0.7]])
    Z = W[:, [0, 2]]
    expect = W + Z @ N @ Z.T
    _kernels.numpy_rank2_update(W, 2, N[0, 0], N[0, 1], N[1, 1])
    np.testing.assert_allclose(W, expect, rtol=1e-13, atol=1e-13)


@needs_numba
def test_select_backends_agree(rng):
    for _ in range(300):
        W, index, yf, active = _state(rng, n=int(rng.integers(1, 7)))
        sigma = float(10 ** rng.uniform(-5, 0.5))
        a = _kernels.numpy_select(W, sigma, index.lo, index.hi, index.offsets, yf, active, 1e-7)
        b = _kernels.numba_select(W, sigma, index.lo, index.hi, index.offsets, yf, active, 1e-7)
        assert int(a[0]) == int(b[0])
        assert float(a[1]) == pytest.approx(float(b[1]), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("impl", ["numpy_select", "numba_select"])
def test_select_nothing_eligible(impl):
    fn = getattr(_kernels, impl)
    if fn is None:
        pytest.skip("numba not installed")
    index = FacetIndex([(-1, 1)])
    k, g = fn(np.eye(2), 1.0, index.lo, index.hi, index.offsets, np.zeros(index.m),
              np.zeros(0, dtype=np.int64), 1e-7)
    assert k == _kernels.NONE_SELECTED and g == 0.0


def test_backend_flag_is_consistent():
    assert _kernels.BACKEND in ("numba", "numpy")
    if _kernels.BACKEND == "numba":
        assert _kernels.select is _kernels.numba_select
    else:
        assert _kernels.select is _kernels.numpy_select
