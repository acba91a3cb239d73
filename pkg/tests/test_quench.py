import numpy as np
import pytest

from qbchain import model, quench
from qbchain.exceptions import BranchCutError, DomainError, ExceptionalPointError
from qbchain.model import derive_couplings


CI = derive_couplings(1, -0.9, 0.0)
CF5 = derive_couplings(1, -0.1, 0.4)   # chiral quench
CF4 = derive_couplings(1, 0.9, 0.4)    # double-sided quench


class TestLoschmidtAmplitude:
    def test_t_zero(self):
        ks = np.linspace(-3, 3, 17)
        assert np.abs(quench.loschmidt_gk(ks, CI, CF5, 0.0) - 1.0).max() < 1e-14

    def test_self_quench_pure_phase(self):
        # quenching onto itself: overlap 1, g = e^{iEt}
        c = derive_couplings(1, 0.5, 0.4)
        for k in (0.3, 1.7, -2.2):
            E = model.energy_nssh2(k, c)
            for t in (0.5, 2.0):
                g = complex(quench.loschmidt_gk(k, c, c, t))
                assert abs(g - np.exp(1j * E * t)) < 1e-12

    def test_hermitian_quench_bounded(self):
        ci = derive_couplings(1, -0.5, 0.0)
        cf = derive_couplings(1, 0.5, 0.0)
        ks = np.linspace(-3, 3, 41)
        ts = np.linspace(0, 10, 101)
        g = quench.loschmidt_gk(ks[:, None], ci, cf, ts[None, :])
        assert np.abs(g).max() <= 1.0 + 1e-12

    def test_ep_rejected(self):
        ci = derive_couplings(1, 0.0, 0.0)  # gapless at k = pi
        with pytest.raises(ExceptionalPointError):
            quench.loschmidt_gk(np.pi, ci, CF5, 1.0)

    def test_three_way_oracle(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(200):
            k = rng.uniform(-np.pi, np.pi)
            ci = derive_couplings(1, rng.uniform(-0.9, 0.9), rng.uniform(0.05, 1))
            cf = derive_couplings(1, rng.uniform(-0.9, 0.9), rng.uniform(0.05, 1))
            t = rng.uniform(0, 5)
            g0 = complex(quench.loschmidt_gk(k, ci, cf, t))
            for method in ("fq", "biortho"):
                g = quench.loschmidt_oracle(k, ci, cf, t, method)
                worst = max(worst, abs(g - g0))
        assert worst < 1e-9

    def test_fq_identity(self):
        # (Q2^2 - Q1^2)(F2^2 - F1^2) = 1
        rng = np.random.default_rng(8)
        for _ in range(100):
            k = rng.uniform(-np.pi, np.pi)
            ci = derive_couplings(1, rng.uniform(-0.9, 0.9), rng.uniform(0.05, 1))
            cf = derive_couplings(1, rng.uniform(-0.9, 0.9), rng.uniform(0.05, 1))
            ui, _ = quench._mode_parameter(model.hamiltonian_nssh2_k(k, ci))
            uf, _ = quench._mode_parameter(model.hamiltonian_nssh2_k(k, cf))
            rho = ui / uf
            F1, F2 = 0.5 * (1 + rho), 0.5 * (1 - rho)
            Q1, Q2 = 0.5 * (1 + 1 / rho), 0.5 * (1 - 1 / rho)
            assert abs((Q2**2 - Q1**2) * (F2**2 - F1**2) - 1) < 1e-12

    def test_unknown_method(self):
        with pytest.raises(DomainError):
            quench.loschmidt_oracle(1.0, CI, CF5, 1.0, method="magic")


class TestProtocol:
    def test_default_grids(self):
        p = quench.QuenchProtocol.default(CI, CF5)
        assert p.k_grid.size == 2000
        assert p.t_grid.size == 800
        assert p.t_grid[0] == 0.0 and p.t_grid[-1] == 12.0
        assert np.allclose(np.sort(-p.k_grid[p.k_grid < 0]),
                           p.k_grid[p.k_grid > 0])

    def test_unmatched_grid_rejected(self):
        with pytest.raises(DomainError):
            quench.QuenchProtocol(CI, CF5, np.array([-1.0, 0.5, 2.0]),
                                  np.array([0.0, 1.0]))

    def test_decreasing_t_rejected(self):
        with pytest.raises(DomainError):
            quench.QuenchProtocol(CI, CF5, np.array([-1.0, 1.0]),
                                  np.array([1.0, 0.5]))


class TestReturnRate:
    def test_zero_at_t0(self):
        p = quench.QuenchProtocol.default(CI, CF4, n_half=100, n_t=50)
        res = quench.return_rate(p)
        assert abs(res.return_rate[0]) < 1e-12
        assert res.gk.shape == (200, 50)

    def test_cusps_at_critical_times(self):
        p = quench.QuenchProtocol.default(CI, CF4, n_half=400, n_t=400)
        res = quench.return_rate(p)
        ct = quench.critical_set(p, range(4))
        rr = res.return_rate
        # second derivative spikes within one t step of each t_c
        curv = np.abs(np.diff(rr, 2))
        thresh = 10 * np.median(curv)
        dt = p.t_grid[1] - p.t_grid[0]
        for tc in ct.times():
            i = int(round(tc / dt))
            assert curv[max(0, i - 2):i + 2].max() > thresh


class TestFisherZeros:
    def test_substitution(self):
        for k in (0.7, 2.1):
            for w in quench.fisher_zeros(k, CI, CF4, range(5)):
                g = complex(quench.loschmidt_gk(k, CI, CF4, 1j * w))
                # the amplitude vanishes on the Fisher-zero line t = i omega
                assert abs(g) < 1e-10

    def test_branch_cut(self):
        # self-quench: overlap is exactly 1 -> atanh branch cut
        c = derive_couplings(1, 0.5, 0.0)
        with pytest.raises(BranchCutError):
            quench.fisher_zeros(1.0, c, c)


class TestCriticalSet:
    def test_residuals_and_zeros(self):
        p = quench.QuenchProtocol.default(CI, CF4, n_half=500, n_t=200)
        ct = quench.critical_set(p, range(6))
        assert ct.entries
        for n, side, kc, tc, resid in ct.entries:
            assert (kc > 0) == (side == "+")
            assert p.t_grid[0] <= tc <= p.t_grid[-1]
            assert abs(resid) < 1e-9
            g = complex(quench.loschmidt_gk(kc, CI, CF4, tc))
            assert abs(g) < 1e-10

    def test_sorted_by_time(self):
        p = quench.QuenchProtocol.default(CI, CF4, n_half=300, n_t=200)
        ct = quench.critical_set(p, range(5))
        ts = [e[3] for e in ct.entries]
        assert ts == sorted(ts)

    def test_chiral_quench_one_side(self):
        p = quench.QuenchProtocol.default(CI, CF5, n_half=500, n_t=200)
        ct = quench.critical_set(p, range(5))
        assert ct.entries
        assert all(e[1] == "+" for e in ct.entries)

    def test_hermitian_quench_evenly_spaced(self):
        # Hermitian final Hamiltonian: t_c = (n + 1/2) pi / E^f at fixed k_c
        ci = derive_couplings(1, -0.8, 0.0)
        cf = derive_couplings(1, 0.8, 0.0)
        p = quench.QuenchProtocol.default(ci, cf, t_max=20, n_half=400, n_t=100)
        ct = quench.critical_set(p, range(6))
        plus = ct.times("+")
        assert plus.size >= 3
        gaps = np.diff(plus)
        assert np.abs(gaps - gaps[0]).max() < 1e-8


class TestPgpAndDtop:
    def test_pgp_zero_at_t0(self):
        p = quench.QuenchProtocol.default(CI, CF5, n_half=200, n_t=60)
        f = quench.pgp_field(p)
        assert np.abs(f.phi_pgp[:, 0]).max() < 1e-12
        assert np.abs(f.phi_total - f.phi_dyn - f.phi_pgp).max() < 1e-12

    def test_dtop_chiral(self):
        p = quench.QuenchProtocol.default(CI, CF5, n_half=600, n_t=240)
        d = quench.dtop(p)
        ct = quench.critical_set(p, range(3))
        tcs = ct.times("+")
        # DTOP_+ jumps by ~1 at each critical time, DTOP_- stays near 0
        mid01 = (d.t > tcs[0] + 0.3) & (d.t < tcs[1] - 0.3)
        assert np.abs(d.dtop_plus[mid01] - 1.0).max() < 0.05
        assert np.abs(d.dtop_minus).max() < 0.1
        assert abs(d.dtop_plus[0]) < 1e-8

    def test_dtop_double_sided(self):
        p = quench.QuenchProtocol.default(CI, CF4, n_half=600, n_t=240)
        d = quench.dtop(p)
        assert np.abs(d.dtop_plus).max() > 0.5
        assert np.abs(d.dtop_minus).max() > 0.5

    def test_full_zone_is_sum(self):
        # winding over the whole zone = DTOP_+ + DTOP_- up to the two
        # boundary increments (k = 0 and zone edge), each bounded by 1/2
        p = quench.QuenchProtocol.default(CI, CF4, n_half=400, n_t=80)
        d = quench.dtop(p)
        f = quench.pgp_field(p)
        wrap = quench._wrap
        for it in range(0, p.t_grid.size, 16):
            phi = f.phi_pgp[:, it]
            full = wrap(np.diff(phi)).sum() / (2 * np.pi)
            assert abs(full - (d.dtop_plus[it] + d.dtop_minus[it])) < 0.5 + 1e-9
