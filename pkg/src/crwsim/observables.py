"""Physical observables derived from trajectory-averaged moments.

Converts the symmetric-ordered moments of an EnsembleRecord into the
reported quantities: collective inversion, half-decay time, radiance
strength, pair correlations, chirality and photon intensity maps.
Photon numbers subtract the 1/2 vacuum offset of symmetric ordering and
are clamped at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .dtwa import EnsembleRecord

SMOOTH_WINDOW = 11  # samples; local quadratic fit for derivative estimates
SMOOTH_ORDER = 2
ETA_DENOM_EPS = 1e-6


class ObservableError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass
class RadianceResult:
    T_h: float
    I: float
    valid: bool = True


@dataclass
class ObservableSeries:
    """Bundle of the standard per-run observables on the sample grid."""

    t_grid: np.ndarray
    S_Tz: np.ndarray
    C_TT: np.ndarray | None
    eta: np.ndarray          # NaN where emission is too weak to define
    intensity: np.ndarray    # (S, N_W), ordering-corrected, clamped at 0


def _smooth(series: np.ndarray, window: int = SMOOTH_WINDOW) -> np.ndarray:
    window = min(window, len(series) if len(series) % 2 else len(series) - 1)
    if window < SMOOTH_ORDER + 2:
        return np.asarray(series, dtype=float)
    return savgol_filter(series, window, SMOOTH_ORDER)


def collective_inversion(rec: EnsembleRecord) -> np.ndarray:
    """S_Tz(t) = (1/2) sum_i <sigma_z^(i)> of the target ensemble."""
    return 0.5 * rec.mean_spin_ta[:, :, 2].sum(axis=1)


def half_decay_time(t_grid: np.ndarray, s_tz: np.ndarray,
                    smooth_window: int = SMOOTH_WINDOW) -> float:
    """First downward zero crossing of the (smoothed) collective inversion."""
    s = _smooth(s_tz, smooth_window)
    if s[0] <= 0:
        raise ObservableError("NO_CROSSING", "series must start positive")
    below = np.nonzero(s <= 0)[0]
    if len(below) == 0:
        raise ObservableError(
            "NO_CROSSING",
            "collective inversion never reaches zero (trapped dynamics?)")
    i = below[0]
    t0, t1 = t_grid[i - 1], t_grid[i]
    y0, y1 = s[i - 1], s[i]
    return float(t0 + (t1 - t0) * y0 / (y0 - y1))


def radiance_strength(t_grid: np.ndarray, s_tz: np.ndarray, T_h: float,
                      smooth_window: int = SMOOTH_WINDOW) -> float:
    """|d S_Tz / dt| at the half-decay time, from the smoothed series."""
    if not (t_grid[0] < T_h < t_grid[-1]):
        raise ObservableError("NO_CROSSING", f"T_h = {T_h} outside the grid")
    dt = float(t_grid[1] - t_grid[0])
    window = min(smooth_window, len(s_tz) if len(s_tz) % 2 else len(s_tz) - 1)
    deriv = savgol_filter(s_tz, window, SMOOTH_ORDER, deriv=1, delta=dt)
    return float(abs(np.interp(T_h, t_grid, deriv)))


def radiance(rec: EnsembleRecord) -> RadianceResult:
    """Half-decay time and radiance strength of a run; valid=False if trapped."""
    s_tz = collective_inversion(rec)
    try:
        T_h = half_decay_time(rec.t_grid, s_tz)
    except ObservableError:
        return RadianceResult(T_h=np.nan, I=np.nan, valid=False)
    return RadianceResult(T_h=T_h, I=radiance_strength(rec.t_grid, s_tz, T_h))


def pair_correlation(rec: EnsembleRecord, t: float | None = None):
    """Average two-atom coherence sum_{i!=j} <sig+_i sig-_j> / (N_T^2 - N_T).

    For commuting i != j operators, sig+_i sig-_j reduces to symmetric
    products of x and y components; the pair-summed xy and yx moments are
    identical, so the result is real.  Returns the full series, or the
    value interpolated at t.
    """
    n_t = rec.spec.N_T
    if n_t < 2:
        raise ObservableError("TOO_FEW_ATOMS", "pair correlation needs N_T >= 2")
    series = (rec.pair_xx + rec.pair_yy) / (4.0 * (n_t * n_t - n_t))
    if t is None:
        return series
    return float(np.interp(t, rec.t_grid, series))


def pair_correlation_imag(rec: EnsembleRecord) -> np.ndarray:
    """Diagnostic imaginary part; vanishes identically at the sampling level."""
    n_t = rec.spec.N_T
    if n_t < 2:
        raise ObservableError("TOO_FEW_ATOMS", "pair correlation needs N_T >= 2")
    return (rec.pair_yx - rec.pair_xy) / (4.0 * (n_t * n_t - n_t))


def photon_number(rec: EnsembleRecord, m: int,
                  smooth_window: int = 1) -> np.ndarray:
    """Ordering-corrected photon number at site m, clamped at zero."""
    raw = rec.site_abs2(m) - 0.5
    if smooth_window > 1:
        raw = _smooth(raw, smooth_window)
    return np.clip(raw, 0.0, None)


def chirality(rec: EnsembleRecord, t: float | None = None,
              smooth_window: int = SMOOTH_WINDOW,
              eps_den: float = ETA_DENOM_EPS):
    """Left-right emission asymmetry from the monitor sites -1 and N+1.

    NaN marks times where total edge emission is below eps_den.
    """
    n_left = photon_number(rec, -1, smooth_window)
    n_right = photon_number(rec, rec.spec.N + 1, smooth_window)
    den = n_left + n_right
    eta = np.full_like(den, np.nan)
    ok = den >= eps_den
    eta[ok] = (n_left[ok] - n_right[ok]) / den[ok]
    if t is None:
        return eta
    return float(np.interp(t, rec.t_grid, eta))


def integrated_chirality(rec: EnsembleRecord,
                         t_window: tuple[float, float] | None = None) -> float:
    """Left-right asymmetry of the time-integrated edge emission.

    Unlike the instantaneous ratio, this stays well defined after the
    emission burst has passed the monitor sites.
    """
    n_left = photon_number(rec, -1)
    n_right = photon_number(rec, rec.spec.N + 1)
    t = rec.t_grid
    if t_window is not None:
        sel = (t >= t_window[0]) & (t <= t_window[1])
        t, n_left, n_right = t[sel], n_left[sel], n_right[sel]
    il = np.trapezoid(n_left, t)
    ir = np.trapezoid(n_right, t)
    den = il + ir
    if den < ETA_DENOM_EPS:
        raise ObservableError("NO_EMISSION", "no edge emission to compare")
    return float((il - ir) / den)


def intensity_map(rec: EnsembleRecord) -> np.ndarray:
    """Per-site, per-time photon number map (S, N_W)."""
    return np.clip(rec.field_abs2 - 0.5, 0.0, None)


def compute_observables(rec: EnsembleRecord) -> ObservableSeries:
    c_tt = pair_correlation(rec) if rec.spec.N_T >= 2 else None
    return ObservableSeries(
        t_grid=rec.t_grid,
        S_Tz=collective_inversion(rec),
        C_TT=c_tt,
        eta=chirality(rec),
        intensity=intensity_map(rec))
