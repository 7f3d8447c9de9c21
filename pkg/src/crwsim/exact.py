"""Brute-force single-excitation propagation on the finite lattice.

The one-excitation sector of the full model is a linear system over the
atomic and field amplitudes; propagating it exactly validates both the
minimal model and the single-atom limit of the trajectory engine.
Basis order: N_T target-atom amplitudes, N_C control-atom amplitudes,
then the N_W field sites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .config import SystemSpec, validate_spec

BIC_ENERGY_TOL = 1e-6    # times J, eigenvalue window around resonance
BIC_SUPPORT_TOL = 1e-6   # edge field amplitude relative to the state peak


class OracleError(RuntimeError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass
class SingleExcitationSeries:
    """Amplitudes on the t_grid; columns ordered TA, CA, field."""

    t_grid: np.ndarray
    amp_ta: np.ndarray    # (S, N_T)
    amp_ca: np.ndarray    # (S, N_C)
    amp_field: np.ndarray  # (S, N_W)

    def norm2(self) -> np.ndarray:
        return (np.abs(self.amp_ta) ** 2).sum(axis=1) + \
               (np.abs(self.amp_ca) ** 2).sum(axis=1) + \
               (np.abs(self.amp_field) ** 2).sum(axis=1)


def _hamiltonian(spec: SystemSpec, rotating_frame: bool = True) -> sp.csr_matrix:
    """Hermitian single-excitation Hamiltonian (no damping)."""
    NT, NC, NW = spec.N_T, spec.N_C, spec.N_W
    dim = NT + NC + NW
    shift = spec.omega if rotating_frame else 0.0
    H = sp.lil_matrix((dim, dim), dtype=complex)

    f0 = NT + NC  # first field column
    for i in range(NT):
        H[i, i] = spec.omega_T - shift
    for j in range(NC):
        H[NT + j, NT + j] = spec.omega_C - shift
    for m in range(NW):
        H[f0 + m, f0 + m] = spec.omega - shift
        if m + 1 < NW:
            H[f0 + m, f0 + m + 1] = -spec.J
            H[f0 + m + 1, f0 + m] = -spec.J

    i_n = f0 + spec.site_index(spec.n)
    i_0 = f0 + spec.site_index(0)
    i_N = f0 + spec.site_index(spec.N)
    for i in range(NT):
        H[i, i_n] = spec.g
        H[i_n, i] = spec.g
    for j in range(NC):
        H[NT + j, i_0] += spec.G1
        H[i_0, NT + j] += spec.G1
        H[NT + j, i_N] += spec.G2
        H[i_N, NT + j] += spec.G2
    return H.tocsr()


def build_generator(spec: SystemSpec) -> sp.csr_matrix:
    """Linear generator -iH - kappa * (field projector) of the sector."""
    validate_spec(spec)
    H = _hamiltonian(spec)
    herm_defect = abs(H - H.conjugate().transpose()).max()
    if herm_defect > 1e-12:
        raise OracleError("NOT_HERMITIAN",
                          f"Hamiltonian defect {herm_defect}")
    NT, NC, NW = spec.N_T, spec.N_C, spec.N_W
    damp = np.zeros(NT + NC + NW)
    damp[NT + NC:] = spec.kappa
    return (-1j * H - sp.diags(damp)).tocsr()


def initial_ta_excited(spec: SystemSpec) -> np.ndarray:
    """Symmetric state with the excitation shared equally over the TAs."""
    if spec.N_T < 1:
        raise OracleError("NO_ATOMS", "needs at least one target atom")
    v = np.zeros(spec.N_T + spec.N_C + spec.N_W, dtype=complex)
    v[:spec.N_T] = 1.0 / np.sqrt(spec.N_T)
    return v


def propagate(spec: SystemSpec, initial: np.ndarray,
              t_grid: np.ndarray) -> SingleExcitationSeries:
    """Exact linear propagation on a uniform time grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    steps = np.diff(t_grid)
    if len(steps) and (steps.max() - steps.min()) > 1e-9 * steps.max():
        raise OracleError("NONUNIFORM_GRID", "t_grid must be uniform")
    A = build_generator(spec)
    if initial.shape != (A.shape[0],):
        raise OracleError("DIMENSION_MISMATCH",
                          f"initial has shape {initial.shape}")
    out = expm_multiply(A, initial.astype(complex),
                        start=t_grid[0], stop=t_grid[-1],
                        num=len(t_grid), endpoint=True)
    if not np.isfinite(out.view(np.float64)).all():
        raise OracleError("NONFINITE_STATE", "propagation diverged")
    NT, NC = spec.N_T, spec.N_C
    return SingleExcitationSeries(
        t_grid=t_grid, amp_ta=out[:, :NT], amp_ca=out[:, NT:NT + NC],
        amp_field=out[:, NT + NC:])


@dataclass
class BicProfile:
    exists: bool
    energy: float | None = None
    profile: np.ndarray | None = None  # |field amplitude|^2, normalized


def bic_profile(spec: SystemSpec,
                energy_tol: float = BIC_ENERGY_TOL,
                support_tol: float = BIC_SUPPORT_TOL) -> BicProfile:
    """Search the undamped spectrum for a photon-trapping bound state.

    Selects eigenstates at the resonance energy whose field support dies
    off outside the atomic region; extended band states fail the support
    test, compact dark states pass it (including purely atomic ones).
    """
    if spec.kappa != 0:
        raise OracleError("DAMPED", "BIC analysis requires kappa = 0")
    H = _hamiltonian(spec).toarray()
    energies, states = np.linalg.eigh(H)
    NT, NC = spec.N_T, spec.N_C

    sel = np.abs(energies) < energy_tol * spec.J
    if not sel.any():
        return BicProfile(exists=False)

    # Resonant eigenstates can be degenerate with extended band states, in
    # which case the solver returns arbitrary mixtures.  Search the whole
    # resonant subspace for the combination with the least field amplitude
    # outside the atomic region.
    sub = states[:, sel]
    f0 = NT + NC
    sites = np.arange(spec.m_min, spec.m_max + 1)
    outside_rows = f0 + np.nonzero((sites < 0) | (sites > spec.N))[0]
    _, svals, vh = np.linalg.svd(sub[outside_rows, :], full_matrices=True)
    leak = svals[-1] if len(svals) >= sub.shape[1] else 0.0
    vec = sub @ vh[-1].conj()
    peak = np.abs(vec).max()
    if leak > support_tol * peak:
        return BicProfile(exists=False)
    energy = float(np.real(vec.conj() @ H @ vec))
    fld = np.abs(vec[f0:]) ** 2
    total = fld.sum()
    if total > 0:
        fld = fld / total
    return BicProfile(exists=True, energy=energy, profile=fld)
