import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from crwsim.config import SystemSpec, derive_geometry, with_window
from crwsim.minimal import (CouplingMatrix, MinimalModelError,
                            chirality_formulas, closed_form_amplitudes,
                            coupling_matrix, eigen_and_bic,
                            integrate_delay_equations, photon_amplitude)


def pair_spec(n=2, N=7, G1=0.0, G2=0.15, g=0.1):
    spec = SystemSpec(J=1.0, kappa=0.0, g=g, G1=G1, G2=G2, n=n, N=N,
                      N_T=1, N_C=1)
    return with_window(spec, 30.0, tight=True)


class TestCouplingMatrix:
    def test_small_ca_entries(self):
        spec = pair_spec(n=2, N=6, G1=0.0, G2=0.15)  # phi_R = 2*pi
        M = coupling_matrix(spec, derive_geometry(spec))
        assert M.m11 == pytest.approx(0.01)
        assert M.m12 == pytest.approx(0.1 * 0.15)  # e^{2i pi} = 1
        assert M.m12 == M.m21
        assert M.m22 == pytest.approx(0.15**2)

    def test_giant_ca_interference(self):
        # phi_L = phi_R = pi: both legs pick up a sign, cross terms add
        spec = pair_spec(n=2, N=4, G1=0.15, G2=0.15)
        M = coupling_matrix(spec, derive_geometry(spec))
        assert M.m12 == pytest.approx(0.1 * (-0.15 - 0.15))
        assert M.m22 == pytest.approx(2 * 0.15**2 + 2 * 0.15**2 * 1.0)

    def test_quarter_phase_is_complex(self):
        spec = pair_spec(n=2, N=7, G1=0.0, G2=0.15)  # phi_R = 5*pi/2
        M = coupling_matrix(spec, derive_geometry(spec))
        assert M.m12 == pytest.approx(0.1 * 0.15 * 1j)


class TestEigenAndBic:
    @pytest.mark.parametrize("dR,expect", [(0, True), (2, True), (4, True),
                                           (1, False), (5, False)])
    def test_small_ca_bic_phases(self, dR, expect):
        spec = pair_spec(n=2, N=2 + dR, G1=0.0, G2=0.1)
        M = coupling_matrix(spec, derive_geometry(spec))
        _, _, bic = eigen_and_bic(M)
        assert bic is expect

    def test_giant_pi_pi_bic(self):
        spec = pair_spec(n=2, N=4, G1=0.067, G2=0.15)
        M = coupling_matrix(spec, derive_geometry(spec))
        _, _, bic = eigen_and_bic(M)
        assert bic

    def test_trace_and_ordering(self):
        spec = pair_spec(n=2, N=7)
        M = coupling_matrix(spec, derive_geometry(spec))
        lp, lm, _ = eigen_and_bic(M)
        assert lp + lm == pytest.approx(M.m11 + M.m22)
        assert abs(lp) >= abs(lm)


def random_matrix(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=4) * 0.05 + 1j * rng.normal(size=4) * 0.05
    return CouplingMatrix(m11=a[0], m12=a[1], m21=a[1], m22=a[3])


class TestClosedForm:
    @given(seed=st.integers(0, 10_000))
    def test_matches_matrix_exponential(self, seed):
        M = random_matrix(seed)
        t = np.linspace(0.0, 30.0, 31)
        sol = closed_form_amplitudes(M, t)
        for k, tk in enumerate(t):
            vec = expm(-M.as_array() * tk / 2.0) @ np.array([1.0, 0.0])
            assert sol.eps_T[k] == pytest.approx(vec[0], abs=1e-10)
            assert sol.eps_C[k] == pytest.approx(vec[1], abs=1e-10)

    def test_degenerate_branch(self):
        # x_minus = 0 and m12 = 0 makes x_1 = 0: pure exponential decay
        M = CouplingMatrix(m11=0.01, m12=0.0, m21=0.0, m22=0.01)
        t = np.linspace(0.0, 50.0, 11)
        sol = closed_form_amplitudes(M, t)
        np.testing.assert_allclose(sol.eps_T, np.exp(-0.005 * t), atol=1e-12)
        np.testing.assert_allclose(sol.eps_C, 0.0, atol=1e-15)

    def test_initial_condition(self):
        sol = closed_form_amplitudes(random_matrix(7), np.array([0.0]))
        assert sol.eps_T[0] == pytest.approx(1.0)
        assert sol.eps_C[0] == pytest.approx(0.0)


class TestDelayIntegrator:
    def test_agrees_with_closed_form_when_delays_small(self):
        spec = pair_spec(n=2, N=7, G2=0.15)
        geom = derive_geometry(spec)
        M = coupling_matrix(spec, geom)
        sol_d = integrate_delay_equations(spec, geom, t_max=30.0, dt=0.005)
        sol_c = closed_form_amplitudes(M, sol_d.t_grid)
        # retardation over a few sites is a small correction
        assert np.max(np.abs(np.abs(sol_d.eps_T) - np.abs(sol_c.eps_T))) < 0.02

    def test_incommensurate_dt_rejected(self):
        spec = pair_spec(n=1, N=2)
        geom = derive_geometry(spec)
        with pytest.raises(MinimalModelError) as exc:
            integrate_delay_equations(spec, geom, t_max=9.0, dt=0.003)
        assert exc.value.code == "DT_INCOMMENSURATE"
        # the same call succeeds when interpolation is allowed
        integrate_delay_equations(spec, geom, t_max=9.0, dt=0.003,
                                  allow_interpolation=True)

    def test_initial_condition_and_norm_decay(self):
        spec = pair_spec()
        geom = derive_geometry(spec)
        sol = integrate_delay_equations(spec, geom, t_max=30.0, dt=0.005)
        assert sol.eps_T[0] == 1.0
        norm = np.abs(sol.eps_T) ** 2 + np.abs(sol.eps_C) ** 2
        assert norm[-1] < norm[0]


class TestPhotonAmplitude:
    def test_causality(self):
        spec = pair_spec()
        geom = derive_geometry(spec)
        sol = integrate_delay_equations(spec, geom, t_max=30.0, dt=0.005)
        # site 12 sites right of the TA: silent until t = distance / v_g
        m = spec.n + 12
        assert photon_amplitude(m, 1.0, sol, spec, geom) == 0.0
        assert abs(photon_amplitude(m, 10.0, sol, spec, geom)) > 0.0

    def test_out_of_history(self):
        spec = pair_spec()
        geom = derive_geometry(spec)
        sol = integrate_delay_equations(spec, geom, t_max=5.0, dt=0.005)
        with pytest.raises(MinimalModelError) as exc:
            photon_amplitude(spec.n, 10.0, sol, spec, geom)
        assert exc.value.code == "OUT_OF_HISTORY"


class TestChiralityFormulas:
    def test_left_bias_for_dr5(self):
        spec = pair_spec(n=2, N=7, G1=0.0, G2=0.1)
        geom = derive_geometry(spec)
        M = coupling_matrix(spec, geom)
        sol = closed_form_amplitudes(M, np.linspace(0.0, 30.0, 601))
        chi = chirality_formulas(sol, spec, geom)
        eta_15 = np.interp(15.0, chi.t_grid, chi.eta_exact)
        assert eta_15 > 0.1

    def test_approx_tracks_exact_at_weak_control(self):
        spec = pair_spec(n=2, N=7, G1=0.0, G2=0.02)
        geom = derive_geometry(spec)
        M = coupling_matrix(spec, geom)
        sol = closed_form_amplitudes(M, np.linspace(0.0, 30.0, 601))
        chi = chirality_formulas(sol, spec, geom)
        sel = chi.t_grid > 2.0
        assert np.nanmax(np.abs(chi.eta_exact[sel] - chi.eta_approx[sel])) < 0.05

    def test_eta_bounded(self):
        spec = pair_spec(n=2, N=7, G1=0.067, G2=0.15)
        geom = derive_geometry(spec)
        M = coupling_matrix(spec, geom)
        sol = closed_form_amplitudes(M, np.linspace(0.0, 30.0, 301))
        chi = chirality_formulas(sol, spec, geom)
        assert np.all(np.abs(chi.eta_exact) <= 1.0 + 1e-12)
