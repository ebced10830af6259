import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homeledger import kernels

BACKENDS = kernels.backends()
pytestmark = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled core not built")


def test_compiled_core_is_selected_when_built(request):
    if request.config.getoption("--kernel-backend") == "python":
        pytest.skip("python backend forced")
    assert kernels.BACKEND == "cython"


@pytest.mark.parametrize("difficulty", [0, 1, 2, 3])
def test_mining_parity(difficulty):
    prefix, suffix = b'{"index":7,"nonce":', b',"payload":{},"prev_hash":"ab","timestamp":3}'
    a = BACKENDS["cython"].mine_nonce(prefix, suffix, difficulty, 10**7)
    b = BACKENDS["python"].mine_nonce(prefix, suffix, difficulty, 10**7)
    assert a == b
    assert a[1].startswith("0" * difficulty)


def test_mining_exhaustion_returns_none_in_both():
    for impl in BACKENDS.values():
        assert impl.mine_nonce(b"x", b"y", 6, 10) is None


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-100, 30), min_size=1, max_size=60),
    st.floats(0.0, 1.0),
    st.floats(0.0, 10.0),
    st.floats(0.5, 1.5),
)
def test_kalman_parity(samples, Q, R, A):
    args = (np.array(samples), A, 0.3, 1.0, Q, 1.0, R + 1e-6, samples[0], 1.0)
    out_c, x_c, P_c = BACKENDS["cython"].kalman_series(*args)
    out_p, x_p, P_p = BACKENDS["python"].kalman_series(*args)
    assert np.array_equal(out_c, out_p)
    assert (x_c, P_c) == (x_p, P_p)


def test_kalman_degenerate_raises_in_both():
    for impl in BACKENDS.values():
        with pytest.raises(ZeroDivisionError):
            impl.kalman_series(np.array([1.0]), 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 4), st.floats(0, 3), st.floats(0.05, 0.5))
def test_grid_parity(px, py, res):
    ax = np.array([0.0, 4.0, 0.0, 4.0])
    ay = np.array([0.0, 0.0, 3.0, 3.0])
    d = np.sqrt((ax - px) ** 2 + (ay - py) ** 2)
    nx, ny = int(np.ceil(4 / res)), int(np.ceil(3 / res))
    assert BACKENDS["cython"].grid_argmin(ax, ay, d, nx, ny, res) == BACKENDS["python"].grid_argmin(ax, ay, d, nx, ny, res)


def test_chain_dump_identical_across_backends():
    from homeledger.access import DeviceIdentity, request_admission
    from homeledger.config import Config
    from homeledger.ledger import ChainConfig, Mode, dump_chain, new_chain

    previous = kernels.BACKEND
    dumps = []
    try:
        for name in ("python", "cython"):
            kernels.use_backend(name)
            config = Config()
            dep = config.deployment(new_chain(ChainConfig(Mode.PUBLIC, 2)))
            rng = np.random.default_rng(5)
            for dev, pos in [("lock-01", (1.0, 2.0)), ("rogue", (3.0, 0.5)), ("camera-01", (8.0, 1.0))]:
                request_admission(dep, DeviceIdentity(dev, pos), rng)
            dumps.append(dump_chain(dep.chain))
    finally:
        kernels.use_backend(previous)
    assert dumps[0] == dumps[1]
