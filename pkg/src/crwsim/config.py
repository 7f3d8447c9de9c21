"""System parameters and derived geometry of the atoms-plus-waveguide model.

All rates are expressed in units of the inter-resonator tunneling J, and
times in units of 1/J.  The waveguide is a finite window of lattice sites
[m_min, m_max]; the target-atom ensemble sits at site n, the control-atom
ensemble couples to sites 0 and N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum


class SpecError(ValueError):
    """A system specification violates one of its invariants."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def group_velocity(J: float) -> float:
    """Group velocity at the band center, in lattice sites per unit time."""
    return 2.0 * J


@dataclass(frozen=True)
class SystemSpec:
    """Physical parameters and geometry of the atoms-plus-waveguide system.

    Attributes
    ----------
    J : inter-resonator tunneling rate (unit of frequency).
    omega, omega_T, omega_C : bare resonator / TA / CA transition frequencies.
    kappa : half photon decay rate per resonator (full rate is 2*kappa).
    g : TA-waveguide coupling at site n.
    G1, G2 : CA couplings to sites 0 and N.
    n, N : lattice sites of the TA ensemble and the right CA leg.
    N_T, N_C : atom counts per ensemble.
    m_min, m_max : site window; must contain {-1, 0, n, N, N+1}.
    """

    J: float = 1.0
    omega: float = 0.0
    omega_T: float = 0.0
    omega_C: float = 0.0
    kappa: float = 0.0
    g: float = 0.0
    G1: float = 0.0
    G2: float = 0.0
    n: int = 0
    N: int = 0
    N_T: int = 1
    N_C: int = 0
    m_min: int = -1
    m_max: int = 1

    @property
    def N_W(self) -> int:
        """Total number of resonators in the window."""
        return self.m_max - self.m_min + 1

    def site_index(self, m: int) -> int:
        """Array index of lattice site m."""
        if not (self.m_min <= m <= self.m_max):
            raise SpecError("SITE_OUT_OF_WINDOW",
                            f"site {m} outside [{self.m_min}, {self.m_max}]")
        return m - self.m_min


@dataclass(frozen=True)
class GeometryInfo:
    """Distances, propagation phases and group velocity derived from a spec."""

    delta_L: int
    delta_R: int
    K: float
    phi_L: float
    phi_R: float
    v_g: float


class ControlClass(Enum):
    NONE = "none"
    SMALL = "small"
    GIANT = "giant"


def default_window(n: int, N: int, t_max: float, J: float = 1.0) -> tuple[int, int]:
    """Window wide enough that edge reflections stay clear of the atoms.

    Pads each side of the atomic span [0, N] with ceil(2*v_g*t_max) + 10
    sites.
    """
    pad = math.ceil(2.0 * group_velocity(J) * t_max) + 10
    return (-pad, N + pad)


def tight_window(n: int, N: int, t_max: float, J: float = 1.0,
                 margin: int = 5) -> tuple[int, int]:
    """Smallest window (plus margin) keeping reflections out of the atoms.

    A wavefront launched at site n must travel to an edge and back to the
    nearest atomic site in more than t_max; this pads roughly half as much
    as default_window, which halves the cost of wide statistical runs.
    """
    v = group_velocity(J)
    m_min = math.floor((n - v * t_max) / 2.0) - margin
    m_max = math.ceil((n + N + v * t_max) / 2.0) + margin
    return (min(m_min, -1), max(m_max, N + 1))


def validate_spec(spec: SystemSpec, t_max: float | None = None) -> SystemSpec:
    """Check every spec invariant; returns the spec unchanged if all hold.

    With t_max given, additionally requires that a wavefront launched at
    site n cannot reach a window edge and return to the atomic region
    within t_max.
    """
    if spec.J <= 0:
        raise SpecError("NONPOSITIVE_J", f"J = {spec.J} must be > 0")
    for name in ("kappa", "g", "G1", "G2"):
        val = getattr(spec, name)
        if val < 0:
            raise SpecError("NEGATIVE_RATE", f"{name} = {val} must be >= 0")
    if spec.N_T < 0 or spec.N_C < 0:
        raise SpecError("NEGATIVE_COUNT",
                        f"N_T = {spec.N_T}, N_C = {spec.N_C} must be >= 0")
    if not (0 <= spec.n <= spec.N):
        raise SpecError("SITE_ORDER", f"need 0 <= n <= N, got n={spec.n}, N={spec.N}")
    if spec.m_min > -1 or spec.m_max < spec.N + 1:
        raise SpecError("WINDOW_TOO_SMALL",
                        f"window [{spec.m_min}, {spec.m_max}] must contain "
                        f"[-1, {spec.N + 1}]")
    if t_max is not None:
        v_g = group_velocity(spec.J)
        # round trip: n -> edge -> nearest atomic site on that side
        left = (spec.n - spec.m_min) + (0 - spec.m_min)
        right = (spec.m_max - spec.n) + (spec.m_max - spec.N)
        if left <= v_g * t_max or right <= v_g * t_max:
            raise SpecError(
                "WINDOW_TOO_SMALL",
                f"window [{spec.m_min}, {spec.m_max}] admits boundary "
                f"reflections before t_max = {t_max}")
    return spec


def derive_geometry(spec: SystemSpec) -> GeometryInfo:
    """Distances and propagation phases for the resonant regime.

    The resonant wave vector K = pi/2 only holds when both ensembles are
    resonant with the bare resonator.
    """
    if spec.omega_T != spec.omega or spec.omega_C != spec.omega:
        raise SpecError("DETUNED",
                        "K = pi/2 requires omega_T = omega_C = omega")
    K = math.pi / 2.0
    dL = spec.n
    dR = spec.N - spec.n
    return GeometryInfo(delta_L=dL, delta_R=dR, K=K,
                        phi_L=K * dL, phi_R=K * dR,
                        v_g=group_velocity(spec.J))


def classify_control(spec: SystemSpec) -> ControlClass:
    """NONE (decoupled), SMALL (one leg), or GIANT (both legs) control atoms."""
    if spec.N_C == 0 or (spec.G1 == 0 and spec.G2 == 0):
        return ControlClass.NONE
    if spec.G1 != 0 and spec.G2 != 0:
        return ControlClass.GIANT
    return ControlClass.SMALL


def with_window(spec: SystemSpec, t_max: float, tight: bool = False) -> SystemSpec:
    """Replace the spec window with one sized for the given t_max."""
    make = tight_window if tight else default_window
    m_min, m_max = make(spec.n, spec.N, t_max, spec.J)
    return replace(spec, m_min=m_min, m_max=m_max)
