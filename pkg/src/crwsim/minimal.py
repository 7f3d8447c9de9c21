"""One target atom plus one control atom: analytic and delay-equation dynamics.

The pair of excitation amplitudes evolves under d(eps)/dt = -M eps / v_g
with a symmetric 2x2 coupling matrix built from the propagation phases.
The delay variant keeps the photon retardation between coupling sites
that the matrix description drops; photon amplitudes follow from the
amplitudes by causal propagation at the band-center wave vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import GeometryInfo, SystemSpec

DEGENERATE_TOL = 1e-8   # |x_1| below this (times ||M||) uses the analytic limit
BIC_TOL = 1e-10         # |lambda_-| below this (times ||M||) flags a BIC


class MinimalModelError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class CouplingMatrix:
    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


@dataclass
class MinimalModelSolution:
    t_grid: np.ndarray
    eps_T: np.ndarray
    eps_C: np.ndarray
    x_plus: complex | None = None
    x_minus: complex | None = None
    x_1: complex | None = None


def coupling_matrix(spec: SystemSpec, geom: GeometryInfo) -> CouplingMatrix:
    """Effective non-Hermitian coupling matrix of the TA/CA pair.

    Off-diagonal entries are written identically in both positions
    (symmetric, not conjugate-symmetric).
    """
    off = spec.g * (spec.G1 * np.exp(1j * geom.phi_L)
                    + spec.G2 * np.exp(1j * geom.phi_R))
    m22 = (spec.G1**2 + spec.G2**2
           + 2 * spec.G1 * spec.G2 * np.exp(1j * (geom.phi_L + geom.phi_R)))
    return CouplingMatrix(m11=complex(spec.g**2), m12=off, m21=off, m22=m22)


def eigen_and_bic(M: CouplingMatrix,
                  tol: float = BIC_TOL) -> tuple[complex, complex, bool]:
    """Eigenvalues ordered by magnitude, plus a dark-mode flag.

    A vanishing small eigenvalue means one collective mode does not decay:
    a bound state in the continuum.
    """
    lam = np.linalg.eigvals(M.as_array())
    lam = lam[np.argsort(np.abs(lam))]
    lam_minus, lam_plus = lam[0], lam[1]
    scale = max(M.norm, 1e-300)
    return complex(lam_plus), complex(lam_minus), bool(abs(lam_minus) < tol * scale)


def _sinhc(w: np.ndarray) -> np.ndarray:
    """sinh(w)/w, stable at w -> 0."""
    out = np.ones_like(w)
    small = np.abs(w) < 1e-8
    out[small] = 1.0 + w[small] ** 2 / 6.0
    ws = w[~small]
    out[~small] = np.sinh(ws) / ws
    return out


def closed_form_amplitudes(M: CouplingMatrix, t_grid: np.ndarray,
                           v_g: float = 2.0) -> MinimalModelSolution:
    """Retardation-free amplitudes for an initially excited TA.

    Equivalent to expm(-M t / v_g) applied to (1, 0); the degenerate
    point x_1 = 0 is handled by the analytic sinh(w)/w limit.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    s = t_grid / v_g
    x_plus = M.m11 + M.m22
    x_minus = M.m11 - M.m22
    x_1 = np.sqrt(x_minus**2 + 4.0 * M.m12**2 + 0j)
    w = 0.5 * x_1 * s
    envelope = np.exp(-0.5 * x_plus * s)
    shc = _sinhc(w.astype(complex))
    eps_t = envelope * (np.cosh(w) - 0.5 * x_minus * s * shc)
    eps_c = -M.m12 * s * envelope * shc
    return MinimalModelSolution(t_grid=t_grid, eps_T=eps_t, eps_C=eps_c,
                                x_plus=complex(x_plus), x_minus=complex(x_minus),
                                x_1=complex(x_1))


def _lag_steps(tau: float, dt: float, allow_interpolation: bool) -> float:
    k = tau / dt
    if abs(k - round(k)) < 1e-9 * max(1.0, k):
        return float(round(k))
    if not allow_interpolation:
        raise MinimalModelError(
            "DT_INCOMMENSURATE",
            f"retardation time {tau} is not a multiple of dt = {dt}; "
            "adjust dt or pass allow_interpolation=True")
    return k


def _read_history(hist: np.ndarray, idx: float, k_pred: int | None,
                  pred: complex) -> complex:
    """History value at fractional index idx; 0 before t=0."""
    if idx < 0:
        return 0.0 + 0.0j
    lo = int(np.floor(idx))
    frac = idx - lo
    def at(i: int) -> complex:
        if k_pred is not None and i == k_pred:
            return pred
        return hist[i]
    if frac == 0.0:
        return at(lo)
    return (1.0 - frac) * at(lo) + frac * at(lo + 1)


def integrate_delay_equations(spec: SystemSpec, geom: GeometryInfo,
                              t_max: float, dt: float = 0.005,
                              allow_interpolation: bool = False
                              ) -> MinimalModelSolution:
    """Method-of-steps integration of the retarded amplitude equations.

    Delayed arguments are read from the stored history (zero before t=0).
    Retardation times must be near-multiples of dt unless interpolation
    is explicitly allowed.
    """
    v = geom.v_g
    tau_l = geom.delta_L / v
    tau_r = geom.delta_R / v
    tau_n = spec.N / v
    kl = _lag_steps(tau_l, dt, allow_interpolation)
    kr = _lag_steps(tau_r, dt, allow_interpolation)
    kn = _lag_steps(tau_n, dt, allow_interpolation)

    pl = np.exp(1j * geom.phi_L)
    pr = np.exp(1j * geom.phi_R)
    pn = np.exp(1j * (geom.phi_L + geom.phi_R))
    g, G1, G2 = spec.g, spec.G1, spec.G2

    n_steps = round(t_max / dt)
    eT = np.zeros(n_steps + 1, dtype=complex)
    eC = np.zeros(n_steps + 1, dtype=complex)
    eT[0] = 1.0

    def rhs(yT, yC, k_at, k_pred=None, pT=0j, pC=0j):
        cT_l = _read_history(eC, k_at - kl, k_pred, pC)
        cT_r = _read_history(eC, k_at - kr, k_pred, pC)
        cC_n = _read_history(eC, k_at - kn, k_pred, pC)
        tT_l = _read_history(eT, k_at - kl, k_pred, pT)
        tT_r = _read_history(eT, k_at - kr, k_pred, pT)
        dT = -(g * g / v) * yT - (g * G2 / v) * pr * cT_r - (g * G1 / v) * pl * cT_l
        dC = (-((G1 * G1 + G2 * G2) / v) * yC
              - (2 * G1 * G2 / v) * pn * cC_n
              - (g * G1 / v) * pl * tT_l - (g * G2 / v) * pr * tT_r)
        return dT, dC

    for k in range(n_steps):
        k1T, k1C = rhs(eT[k], eC[k], k)
        pT = eT[k] + dt * k1T
        pC = eC[k] + dt * k1C
        k2T, k2C = rhs(pT, pC, k + 1, k_pred=k + 1, pT=pT, pC=pC)
        eT[k + 1] = eT[k] + 0.5 * dt * (k1T + k2T)
        eC[k + 1] = eC[k] + 0.5 * dt * (k1C + k2C)

    t_grid = np.arange(n_steps + 1) * dt
    return MinimalModelSolution(t_grid=t_grid, eps_T=eT, eps_C=eC)


def _delayed_amplitude(sol: MinimalModelSolution, arr: np.ndarray,
                       t: float) -> complex:
    if t < 0:
        return 0.0 + 0.0j
    if t > sol.t_grid[-1] + 1e-12:
        raise MinimalModelError(
            "OUT_OF_HISTORY", f"time {t} beyond stored history "
            f"[0, {sol.t_grid[-1]}]")
    re = np.interp(t, sol.t_grid, arr.real)
    im = np.interp(t, sol.t_grid, arr.imag)
    return complex(re + 1j * im)


def photon_amplitude(m: int, t: float, sol: MinimalModelSolution,
                     spec: SystemSpec, geom: GeometryInfo) -> complex:
    """Photon amplitude at site m and time t from causal propagation."""
    v = geom.v_g
    K = geom.K
    terms = 0.0 + 0.0j
    for site, coupling, arr in ((spec.n, spec.g, sol.eps_T),
                                (0, spec.G1, sol.eps_C),
                                (spec.N, spec.G2, sol.eps_C)):
        if coupling == 0:
            continue
        R = abs(m - site)
        terms += (coupling * np.exp(1j * K * R)
                  * _delayed_amplitude(sol, arr, t - R / v))
    return complex(-1j / v * terms)


@dataclass
class ChiralityCurves:
    t_grid: np.ndarray
    eta_exact: np.ndarray
    eta_approx: np.ndarray
    script_G: np.ndarray   # G2 * sin(Delta)
    delta: np.ndarray      # unwrapped phase difference Arg eps_T - Arg eps_C


def chirality_formulas(sol: MinimalModelSolution, spec: SystemSpec,
                       geom: GeometryInfo) -> ChiralityCurves:
    """Exact and approximate emission chirality of the minimal model.

    The exact value comes from the retardation-free photon amplitudes at
    the monitor sites -1 and N+1; the approximation holds for
    |eps_C| << |eps_T|.  Where eps_C = 0 the phase difference is
    undefined (NaN) and the approximate chirality is zero.
    """
    K = geom.K
    eT, eC = sol.eps_T, sol.eps_C
    g, G1, G2, N, n = spec.g, spec.G1, spec.G2, spec.N, spec.n

    c_left = (g * np.exp(1j * K * (n + 1)) * eT
              + (G1 * np.exp(1j * K) + G2 * np.exp(1j * K * (N + 1))) * eC)
    c_right = (g * np.exp(1j * K * (N + 1 - n)) * eT
               + (G1 * np.exp(1j * K * (N + 1)) + G2 * np.exp(1j * K)) * eC)
    il = np.abs(c_left) ** 2
    ir = np.abs(c_right) ** 2
    den = il + ir
    eta_exact = np.zeros_like(den)
    ok = den > 0
    eta_exact[ok] = (il[ok] - ir[ok]) / den[ok]

    defined = np.abs(eC) > 0
    raw = np.angle(eT) - np.angle(eC)
    delta = np.full(len(eT), np.nan)
    delta[defined] = np.unwrap(raw[defined])
    script_g = G2 * np.sin(delta)

    eta_approx = np.zeros(len(eT))
    abs_t = np.abs(eT)
    usable = defined & (abs_t > 0)
    eta_approx[usable] = (2.0 * script_g[usable] * np.abs(eC)[usable]
                          / (g * abs_t[usable]))
    return ChiralityCurves(t_grid=sol.t_grid, eta_exact=eta_exact,
                           eta_approx=eta_approx, script_G=script_g,
                           delta=delta)
