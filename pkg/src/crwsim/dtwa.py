"""Stochastic phase-space integration of the atom-waveguide equations.

Each Monte Carlo trajectory carries one Bloch vector per atom and one
complex amplitude per resonator.  Initial spin components are drawn from
discrete +/-1 configurations, initial field quadratures from a centered
Gaussian of vacuum width, and photon loss enters as additive complex
white noise on every resonator.  Trajectory averages of the stored
moments approximate symmetrically ordered expectation values.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .config import SystemSpec, validate_spec


class EngineError(RuntimeError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class IntegratorSettings:
    """Fixed-step integration parameters (times in units of 1/J)."""

    dt: float = 0.005
    t_max: float = 30.0
    sample_stride: int = 10
    scheme: str = "heun"  # "heun" or "euler_maruyama"
    rotating_frame: bool = True
    field_sigma: float = 0.5  # std of each initial field quadrature


def validate_settings(settings: IntegratorSettings) -> IntegratorSettings:
    if settings.dt <= 0:
        raise EngineError("BAD_SETTINGS", f"dt = {settings.dt} must be > 0")
    if settings.t_max <= 0:
        raise EngineError("BAD_SETTINGS", f"t_max = {settings.t_max} must be > 0")
    if settings.sample_stride < 1:
        raise EngineError("BAD_SETTINGS", "sample_stride must be >= 1")
    if settings.scheme not in ("heun", "euler_maruyama"):
        raise EngineError("BAD_SETTINGS", f"unknown scheme {settings.scheme!r}")
    n_steps = round(settings.t_max / settings.dt)
    if abs(n_steps * settings.dt - settings.t_max) > 1e-9 * max(1.0, settings.t_max):
        raise EngineError("BAD_SETTINGS", "t_max must be an integer multiple of dt")
    return settings


@dataclass
class TrajectoryState:
    """One Monte Carlo sample: spins (N_T + N_C, 3) and field (N_W,)."""

    spins: np.ndarray
    field: np.ndarray
    t: float = 0.0


@dataclass
class TrajectorySeries:
    """Single-trajectory state history stored at the sample times."""

    t_grid: np.ndarray
    spins: np.ndarray  # (n_samples, N_T + N_C, 3)
    field: np.ndarray  # (n_samples, N_W) complex
    seed: int | None = None


@dataclass
class EnsembleRecord:
    """Trajectory-averaged moments on the sample-time grid.

    All moments are plain arithmetic means over exactly n_traj
    trajectories and are symmetrically ordered; ordering corrections are
    applied downstream.  spin_pair holds the i != j pair sums of the TA
    ensemble (xx, yy, xy, yx), already summed over pairs.
    """

    spec: SystemSpec
    t_grid: np.ndarray
    mean_spin_ta: np.ndarray   # (S, N_T, 3)
    mean_spin_ca: np.ndarray   # (S, N_C, 3)
    pair_xx: np.ndarray        # (S,)
    pair_yy: np.ndarray
    pair_xy: np.ndarray
    pair_yx: np.ndarray
    field_abs2: np.ndarray     # (S, N_W)
    n_traj: int = 0
    master_seed: int | None = None

    def site_abs2(self, m: int) -> np.ndarray:
        return self.field_abs2[:, self.spec.site_index(m)]

    @property
    def edge_abs2(self) -> np.ndarray:
        """Mean |alpha|^2 at the emission-monitor sites -1 and N+1, (S, 2)."""
        return np.stack([self.site_abs2(-1), self.site_abs2(self.spec.N + 1)],
                        axis=1)


@dataclass(frozen=True)
class _Params:
    NT: int
    NC: int
    NW: int
    i_n: int
    i_0: int
    i_N: int
    g: float
    G1: float
    G2: float
    J: float
    kappa: float
    wT: float
    wC: float
    wf: float


def _make_params(spec: SystemSpec, settings: IntegratorSettings) -> _Params:
    shift = spec.omega if settings.rotating_frame else 0.0
    return _Params(
        NT=spec.N_T, NC=spec.N_C, NW=spec.N_W,
        i_n=spec.site_index(spec.n), i_0=spec.site_index(0),
        i_N=spec.site_index(spec.N),
        g=spec.g, G1=spec.G1, G2=spec.G2, J=spec.J, kappa=spec.kappa,
        wT=spec.omega_T - shift, wC=spec.omega_C - shift,
        wf=spec.omega - shift)


def _sample_batch(p: _Params, gens: list[np.random.Generator],
                  sigma: float) -> tuple[np.ndarray, np.ndarray]:
    B = len(gens)
    NA = p.NT + p.NC
    spins = np.empty((B, NA, 3), dtype=np.float64)
    fld = np.empty((B, p.NW), dtype=np.complex128)
    for b, rng in enumerate(gens):
        signs = rng.integers(0, 2, size=(NA, 2)) * 2 - 1
        spins[b, :, :2] = signs
        spins[b, :p.NT, 2] = 1.0
        spins[b, p.NT:, 2] = -1.0
        quad = rng.standard_normal((2, p.NW))
        fld[b] = sigma * (quad[0] + 1j * quad[1])
    return spins, fld


def _drift(spins: np.ndarray, fld: np.ndarray, p: _Params):
    ds = np.empty_like(spins)
    df = (-1j * p.wf - p.kappa) * fld
    df[:, 1:] += 1j * p.J * fld[:, :-1]
    df[:, :-1] += 1j * p.J * fld[:, 1:]

    if p.NT:
        T = spins[:, :p.NT]
        Tx, Ty, Tz = T[..., 0], T[..., 1], T[..., 2]
        a = fld[:, p.i_n]
        re = a.real[:, None]
        im = a.imag[:, None]
        dT = ds[:, :p.NT]
        dT[..., 0] = -p.wT * Ty - 2.0 * p.g * im * Tz
        dT[..., 1] = p.wT * Tx - 2.0 * p.g * re * Tz
        dT[..., 2] = 2.0 * p.g * (re * Ty + im * Tx)
        df[:, p.i_n] += -0.5j * p.g * (Tx.sum(axis=1) - 1j * Ty.sum(axis=1))

    if p.NC:
        C = spins[:, p.NT:]
        Cx, Cy, Cz = C[..., 0], C[..., 1], C[..., 2]
        a0 = fld[:, p.i_0]
        aN = fld[:, p.i_N]
        re = (p.G1 * a0.real + p.G2 * aN.real)[:, None]
        im = (p.G1 * a0.imag + p.G2 * aN.imag)[:, None]
        dC = ds[:, p.NT:]
        dC[..., 0] = -p.wC * Cy - 2.0 * im * Cz
        dC[..., 1] = p.wC * Cx - 2.0 * re * Cz
        dC[..., 2] = 2.0 * (re * Cy + im * Cx)
        sC = Cx.sum(axis=1) - 1j * Cy.sum(axis=1)
        df[:, p.i_0] += -0.5j * p.G1 * sC
        df[:, p.i_N] += -0.5j * p.G2 * sC

    return ds, df


def _advance(spins, fld, p, dt, scheme, noise):
    """One integration step in place; noise is (B, NW) complex or None."""
    k1s, k1f = _drift(spins, fld, p)
    if scheme == "heun":
        k2s, k2f = _drift(spins + dt * k1s, fld + dt * k1f, p)
        spins += (0.5 * dt) * (k1s + k2s)
        fld += (0.5 * dt) * (k1f + k2f)
    else:
        spins += dt * k1s
        fld += dt * k1f
    if noise is not None:
        fld += noise


@dataclass
class _ChunkMoments:
    count: int
    spin_sum: np.ndarray    # (S, NA, 3)
    pair_sum: np.ndarray    # (S, 4) xx, yy, xy, yx
    field2_sum: np.ndarray  # (S, NW)

    def add(self, other: "_ChunkMoments") -> None:
        self.count += other.count
        self.spin_sum += other.spin_sum
        self.pair_sum += other.pair_sum
        self.field2_sum += other.field2_sum


def _sample_indices(n_steps: int, stride: int) -> np.ndarray:
    idx = list(range(0, n_steps + 1, stride))
    if idx[-1] != n_steps:
        idx.append(n_steps)
    return np.asarray(idx)


def _accumulate(mom: _ChunkMoments, s: int, spins, fld, p: _Params) -> None:
    mom.spin_sum[s] += spins.sum(axis=0)
    mom.field2_sum[s] += (fld.real**2 + fld.imag**2).sum(axis=0)
    if p.NT >= 2:
        Tx = spins[:, :p.NT, 0]
        Ty = spins[:, :p.NT, 1]
        Sx = Tx.sum(axis=1)
        Sy = Ty.sum(axis=1)
        xx = (Sx * Sx - (Tx * Tx).sum(axis=1)).sum()
        yy = (Sy * Sy - (Ty * Ty).sum(axis=1)).sum()
        xy = (Sx * Sy - (Tx * Ty).sum(axis=1)).sum()
        mom.pair_sum[s, 0] += xx
        mom.pair_sum[s, 1] += yy
        mom.pair_sum[s, 2] += xy
        mom.pair_sum[s, 3] += xy  # yx pair sum is identical term by term


def _integrate_chunk(spec: SystemSpec, settings: IntegratorSettings,
                     seqs: list[np.random.SeedSequence],
                     record: bool = False):
    """Integrate a batch of trajectories with per-trajectory random streams.

    Returns accumulated moment sums, or the full state history of every
    trajectory when record=True.
    """
    p = _make_params(spec, settings)
    gens = [np.random.Generator(np.random.SFC64(s)) for s in seqs]
    B = len(gens)
    spins, fld = _sample_batch(p, gens, settings.field_sigma)

    dt = settings.dt
    n_steps = round(settings.t_max / dt)
    samp = _sample_indices(n_steps, settings.sample_stride)
    t_grid = samp * dt
    S = len(samp)

    noisy = spec.kappa > 0
    amp = np.sqrt(0.5 * spec.kappa * dt)
    heun = settings.scheme == "heun"
    use_numba = _kernels.AVAILABLE
    dummy = np.empty((B, 1, p.NW), dtype=np.complex128)

    if record:
        rec_spins = np.empty((B, S) + spins.shape[1:])
        rec_field = np.empty((B, S) + fld.shape[1:], dtype=np.complex128)
        rec_spins[:, 0] = spins
        rec_field[:, 0] = fld
    else:
        mom = _ChunkMoments(
            count=B,
            spin_sum=np.zeros((S,) + spins.shape[1:]),
            pair_sum=np.zeros((S, 4)),
            field2_sum=np.zeros((S, p.NW)))
        _accumulate(mom, 0, spins, fld, p)

    group = 8  # segments of pre-drawn noise per refill
    s = 1
    while s < S:
        s_end = min(s + group, S)
        if noisy:
            # float32 draws: the increment is O(sqrt(kappa dt)), so single
            # precision noise is far below every integration tolerance
            ns_tot = int(samp[s_end - 1] - samp[s - 1])
            buf = np.empty((B, ns_tot, p.NW), dtype=np.complex128)
            view = buf.view(np.float64).reshape(B, ns_tot, p.NW, 2)
            for b, rng in enumerate(gens):
                view[b] = rng.standard_normal((ns_tot, p.NW, 2),
                                              dtype=np.float32)
            pos = 0
        for si in range(s, s_end):
            ns = int(samp[si] - samp[si - 1])
            if noisy:
                noise = buf[:, pos:pos + ns]
                pos += ns
            else:
                noise = dummy
            if use_numba:
                _kernels.advance_segment(
                    spins, fld, noise, noisy, amp, dt, heun, ns,
                    p.NT, p.NC, p.i_n, p.i_0, p.i_N,
                    p.g, p.G1, p.G2, p.J, p.kappa, p.wT, p.wC, p.wf)
            else:
                for k in range(ns):
                    nk = amp * noise[:, k] if noisy else None
                    _advance(spins, fld, p, dt, settings.scheme, nk)
            if not np.isfinite(fld.view(np.float64)).all() or \
                    not np.isfinite(spins).all():
                raise EngineError(
                    "NONFINITE_STATE",
                    f"non-finite state at t = {t_grid[si]:.4g} "
                    f"(seeds {[s_.spawn_key for s_ in seqs]}); reduce dt")
            if record:
                rec_spins[:, si] = spins
                rec_field[:, si] = fld
            else:
                _accumulate(mom, si, spins, fld, p)
        s = s_end

    if record:
        return [TrajectorySeries(t_grid=t_grid, spins=rec_spins[b],
                                 field=rec_field[b]) for b in range(B)]
    return t_grid, mom


def trajectory_seeds(master_seed: int, n_traj: int) -> list[np.random.SeedSequence]:
    """Deterministic per-trajectory seed streams split from master_seed."""
    return np.random.SeedSequence(master_seed).spawn(n_traj)


def sample_initial(spec: SystemSpec, rng: np.random.Generator) -> TrajectoryState:
    """Draw one trajectory's initial condition.

    TA spins are (+-1, +-1, +1), CA spins (+-1, +-1, -1) with equiprobable
    independent signs; field amplitudes are centered complex Gaussians with
    vacuum quadrature width.
    """
    validate_spec(spec)
    p = _make_params(spec, IntegratorSettings())
    spins, fld = _sample_batch(p, [rng], 0.5)
    return TrajectoryState(spins=spins[0], field=fld[0], t=0.0)


def drift(state: TrajectoryState, spec: SystemSpec,
          settings: IntegratorSettings | None = None) -> TrajectoryState:
    """Deterministic right-hand side at the given state."""
    settings = settings or IntegratorSettings(rotating_frame=False)
    p = _make_params(spec, settings)
    if state.spins.shape != (p.NT + p.NC, 3) or state.field.shape != (p.NW,):
        raise EngineError("DIMENSION_MISMATCH",
                          "state dimensions do not match the spec")
    ds, df = _drift(state.spins[None], state.field[None], p)
    return TrajectoryState(spins=ds[0], field=df[0], t=state.t)


def step(state: TrajectoryState, spec: SystemSpec,
         settings: IntegratorSettings, rng: np.random.Generator) -> TrajectoryState:
    """Advance one step; additive field noise only when kappa > 0."""
    validate_settings(settings)
    p = _make_params(spec, settings)
    spins = state.spins[None].copy()
    fld = state.field[None].copy()
    noise = None
    if spec.kappa > 0:
        q = rng.standard_normal((2, p.NW))
        noise = np.sqrt(0.5 * spec.kappa * settings.dt) * (q[0] + 1j * q[1])
    _advance(spins, fld, p, settings.dt, settings.scheme, noise)
    if not np.isfinite(spins).all() or not np.isfinite(fld.view(np.float64)).all():
        raise EngineError("NONFINITE_STATE", "non-finite state; reduce dt")
    return TrajectoryState(spins=spins[0], field=fld[0], t=state.t + settings.dt)


def run_trajectory(spec: SystemSpec, settings: IntegratorSettings,
                   seed: int) -> TrajectorySeries:
    """Full state history of one trajectory; deterministic in (spec, settings, seed)."""
    validate_spec(spec, t_max=settings.t_max)
    validate_settings(settings)
    series = _integrate_chunk(spec, settings,
                              [np.random.SeedSequence(seed)], record=True)[0]
    series.seed = seed
    return series


def run_ensemble(spec: SystemSpec, settings: IntegratorSettings,
                 master_seed: int, n_traj: int,
                 n_workers: int | None = None,
                 chunk_size: int = 256) -> EnsembleRecord:
    """Average n_traj independent trajectories.

    Per-trajectory streams are spawned from master_seed, integrated in
    fixed-size chunks, and accumulated in chunk-index order, so the result
    is bit-identical for any worker count.
    """
    if n_traj < 1:
        raise EngineError("BAD_SETTINGS", "n_traj must be >= 1")
    validate_spec(spec, t_max=settings.t_max)
    validate_settings(settings)

    seqs = trajectory_seeds(master_seed, n_traj)
    chunks = [seqs[i:i + chunk_size] for i in range(0, n_traj, chunk_size)]
    if n_workers is None:
        n_workers = int(os.environ.get("CRWSIM_THREADS", "1"))
    n_workers = max(1, min(n_workers, len(chunks)))

    if n_workers == 1:
        results = [_integrate_chunk(spec, settings, ch) for ch in chunks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(_integrate_chunk, spec, settings, ch)
                       for ch in chunks]
            results = [f.result() for f in futures]

    t_grid, total = results[0]
    for _, mom in results[1:]:
        total.add(mom)

    inv = 1.0 / total.count
    NT = spec.N_T
    return EnsembleRecord(
        spec=spec, t_grid=t_grid,
        mean_spin_ta=total.spin_sum[:, :NT] * inv,
        mean_spin_ca=total.spin_sum[:, NT:] * inv,
        pair_xx=total.pair_sum[:, 0] * inv,
        pair_yy=total.pair_sum[:, 1] * inv,
        pair_xy=total.pair_sum[:, 2] * inv,
        pair_yx=total.pair_sum[:, 3] * inv,
        field_abs2=total.field2_sum * inv,
        n_traj=total.count, master_seed=master_seed)
