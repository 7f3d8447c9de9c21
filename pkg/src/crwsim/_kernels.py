"""Optional numba-compiled inner loop for the trajectory integrator.

The numpy implementation in dtwa.py is the reference; this module fuses
the drift evaluation, the Heun/Euler update and the noise increment into
one compiled loop over trajectories and lattice sites.  Both paths
consume identical random streams, so they agree to floating-point
reassociation accuracy.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    AVAILABLE = os.environ.get("CRWSIM_NO_NUMBA", "") == ""
except ImportError:  # pragma: no cover
    AVAILABLE = False

    def njit(*a, **k):
        def deco(f):
            return f
        return deco


@njit(cache=True, fastmath=True)
def _drift_into(spins, fld, ds, df, NT, NC, i_n, i_0, i_N,
                g, G1, G2, J, kappa, wT, wC, wf):
    B, NW = fld.shape
    hop = 1j * J
    damp = -1j * wf - kappa
    for b in range(B):
        for m in range(NW):
            acc = damp * fld[b, m]
            if m > 0:
                acc += hop * fld[b, m - 1]
            if m < NW - 1:
                acc += hop * fld[b, m + 1]
            df[b, m] = acc
        if NT > 0:
            a = fld[b, i_n]
            re = a.real
            im = a.imag
            sx = 0.0
            sy = 0.0
            for i in range(NT):
                x = spins[b, i, 0]
                y = spins[b, i, 1]
                z = spins[b, i, 2]
                ds[b, i, 0] = -wT * y - 2.0 * g * im * z
                ds[b, i, 1] = wT * x - 2.0 * g * re * z
                ds[b, i, 2] = 2.0 * g * (re * y + im * x)
                sx += x
                sy += y
            df[b, i_n] += -0.5j * g * (sx - 1j * sy)
        if NC > 0:
            a0 = fld[b, i_0]
            aN = fld[b, i_N]
            re = G1 * a0.real + G2 * aN.real
            im = G1 * a0.imag + G2 * aN.imag
            sx = 0.0
            sy = 0.0
            for i in range(NT, NT + NC):
                x = spins[b, i, 0]
                y = spins[b, i, 1]
                z = spins[b, i, 2]
                ds[b, i, 0] = -wC * y - 2.0 * im * z
                ds[b, i, 1] = wC * x - 2.0 * re * z
                ds[b, i, 2] = 2.0 * (re * y + im * x)
                sx += x
                sy += y
            sC = sx - 1j * sy
            df[b, i_0] += -0.5j * G1 * sC
            df[b, i_N] += -0.5j * G2 * sC


@njit(cache=True, fastmath=True)
def advance_segment(spins, fld, noise, use_noise, amp, dt, heun, n_steps,
                    NT, NC, i_n, i_0, i_N, g, G1, G2, J, kappa, wT, wC, wf):
    """Advance all trajectories by n_steps in place.

    noise has shape (B, >= n_steps, NW) when use_noise, else is ignored.
    """
    B, NW = fld.shape
    NA = NT + NC
    k1s = np.empty((B, NA, 3))
    k1f = np.empty((B, NW), dtype=np.complex128)
    if heun:
        ps = np.empty((B, NA, 3))
        pf = np.empty((B, NW), dtype=np.complex128)
        k2s = np.empty((B, NA, 3))
        k2f = np.empty((B, NW), dtype=np.complex128)
    for k in range(n_steps):
        _drift_into(spins, fld, k1s, k1f, NT, NC, i_n, i_0, i_N,
                    g, G1, G2, J, kappa, wT, wC, wf)
        if heun:
            for b in range(B):
                for i in range(NA):
                    for c in range(3):
                        ps[b, i, c] = spins[b, i, c] + dt * k1s[b, i, c]
                for m in range(NW):
                    pf[b, m] = fld[b, m] + dt * k1f[b, m]
            _drift_into(ps, pf, k2s, k2f, NT, NC, i_n, i_0, i_N,
                        g, G1, G2, J, kappa, wT, wC, wf)
            half = 0.5 * dt
            for b in range(B):
                for i in range(NA):
                    for c in range(3):
                        spins[b, i, c] += half * (k1s[b, i, c] + k2s[b, i, c])
                for m in range(NW):
                    fld[b, m] += half * (k1f[b, m] + k2f[b, m])
        else:
            for b in range(B):
                for i in range(NA):
                    for c in range(3):
                        spins[b, i, c] += dt * k1s[b, i, c]
                for m in range(NW):
                    fld[b, m] += dt * k1f[b, m]
        if use_noise:
            for b in range(B):
                for m in range(NW):
                    fld[b, m] += amp * noise[b, k, m]
