import numpy as np
import pytest

from lqnet import kernels
from lqnet._backend import NUMBA_AVAILABLE, default_backend
from lqnet.model import Network, get_treatment
from lqnet.verifier import verify_nash
from lqnet.equilibria import nash_efforts

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")


def random_inputs(rng, n):
    efforts = rng.uniform(0.0, 20.0, n)
    m = rng.random((n, n)) < 0.4
    np.fill_diagonal(m, False)
    own = ((m.astype(np.int64)) * (np.int64(1) << np.arange(n))).sum(axis=1)
    incoming = ((m.T.astype(np.int64)) * (np.int64(1) << np.arange(n))).sum(axis=1)
    return efforts, incoming.astype(np.int64), own.astype(np.int64)


class TestBackendSelection:
    def test_env_flag(self, monkeypatch):
        monkeypatch.setenv("LQNET_BACKEND", "numpy")
        assert default_backend() == "numpy"
        monkeypatch.setenv("LQNET_BACKEND", "auto")
        assert default_backend() in ("numba", "numpy")
        monkeypatch.setenv("LQNET_BACKEND", "bogus")
        with pytest.raises(RuntimeError):
            default_backend()

    def test_explicit_override(self):
        assert kernels.backend_name("numpy") == "numpy"
        with pytest.raises(ValueError):
            kernels.backend_name("fortran")


@needs_numba
class TestKernelAgreement:
    def test_deviation_scan_matches(self):
        rng = np.random.default_rng(12)
        p = get_treatment("N9_HighCost").params
        for _ in range(30):
            n = int(rng.integers(2, 10))
            efforts, incoming, own = random_inputs(rng, n)
            args = (efforts, incoming, own, p.theta, p.beta, p.lam, p.kappa,
                    p.effort_min, p.effort_max)
            g_nb, m_nb, e_nb, c_nb = kernels.deviation_scan(*args, backend="numba")
            g_np, m_np, e_np, c_np = kernels.deviation_scan(*args, backend="numpy")
            assert np.allclose(g_nb, g_np, atol=1e-10)
            assert np.allclose(c_nb, c_np, atol=1e-10)
            assert np.array_equal(m_nb, m_np)
            assert np.allclose(e_nb, e_np, atol=1e-10)

    def test_br_iteration_matches(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            n = int(rng.integers(2, 10))
            m = np.triu(rng.random((n, n)) < 0.5, 1)
            adj = m | m.T
            x0 = rng.uniform(0.0, 5.0, n)
            args = (adj, x0, 10.0, 4.0, 0.3, 0.0, 20.0)
            x_nb, it_nb, ch_nb = kernels.br_iteration(*args, backend="numba")
            x_np, it_np, ch_np = kernels.br_iteration(*args, backend="numpy")
            assert np.allclose(x_nb, x_np, atol=1e-10)

    def test_verdicts_agree_end_to_end(self):
        from lqnet.equilibria import balanced_sponsorship
        from lqnet.model import StrategyProfile

        rng = np.random.default_rng(14)
        p = get_treatment("N5_HighCost").params
        for _ in range(20):
            m = np.triu(rng.random((5, 5)) < 0.5, 1)
            net = Network(m | m.T)
            profile = StrategyProfile(
                nash_efforts(p, net).efforts, balanced_sponsorship(net)
            )
            a = verify_nash(p, profile, backend="numba")
            b = verify_nash(p, profile, backend="numpy")
            assert a.is_nash == b.is_nash
