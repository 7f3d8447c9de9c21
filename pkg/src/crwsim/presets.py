"""Named experiment presets with pinned parameters.

Each preset bundles a fully resolved system spec, integrator settings and
trajectory count for one of the standard experiments; variants hold the
per-curve overrides (e.g. the small/giant control-atom pair of the
chirality comparison).  Preset expansion is pure: the same name always
yields the same configuration.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .config import SystemSpec, with_window
from .dtwa import IntegratorSettings


class PresetError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class Preset:
    """A resolved experiment: base spec, settings, and variant overrides.

    kind selects the pipeline: "ensemble" runs trajectories per variant,
    "sweep" runs one ensemble per sweep value (per variant), "minimal"
    evaluates the two-amplitude analytics, "bic" computes bound-state
    profiles.
    """

    name: str
    description: str
    kind: str
    spec: SystemSpec
    settings: IntegratorSettings
    n_traj: int = 4000
    variants: tuple = (("default", {}),)
    sweep_axis: str | None = None
    sweep_values: tuple = ()


def _base(n: int, N: int, G1: float, G2: float, N_T: int = 30,
          N_C: int = 10, kappa: float = 0.01, t_max: float = 30.0,
          tight: bool = True) -> SystemSpec:
    spec = SystemSpec(J=1.0, omega=0.0, omega_T=0.0, omega_C=0.0,
                      kappa=kappa, g=0.1, G1=G1, G2=G2, n=n, N=N,
                      N_T=N_T, N_C=N_C)
    return with_window(spec, t_max, tight=tight)


_SETTINGS = IntegratorSettings(dt=0.005, t_max=30.0, sample_stride=20)


def _build() -> dict[str, Preset]:
    presets: dict[str, Preset] = {}

    def add(p: Preset) -> None:
        presets[p.name] = p

    add(Preset(
        name="fig2a-dicke",
        description="Uncontrolled collective decay of 30 target atoms",
        kind="ensemble",
        spec=_base(n=2, N=6, G1=0.0, G2=0.0),
        settings=_SETTINGS))
    add(Preset(
        name="fig2a-dr4",
        description="Small control atoms four sites to the right (trapping)",
        kind="ensemble",
        spec=_base(n=2, N=6, G1=0.0, G2=0.15),
        settings=_SETTINGS))
    add(Preset(
        name="fig2a-dr5",
        description="Small control atoms five sites to the right (chiral)",
        kind="ensemble",
        spec=_base(n=2, N=7, G1=0.0, G2=0.15),
        settings=_SETTINGS))
    add(Preset(
        name="fig2b-sweep",
        description="Radiance strength versus target-atom number",
        kind="sweep",
        spec=_base(n=2, N=6, G1=0.0, G2=0.15),
        settings=_SETTINGS,
        variants=(("dicke", {"G2": 0.0}),
                  ("dr4", {}),
                  ("dr5", {"N": 7})),
        sweep_axis="N_T",
        sweep_values=(10, 15, 20, 25, 30, 35, 40, 45, 50)))
    add(Preset(
        name="fig2cd-maps",
        description="Photon intensity maps for the two small-CA distances",
        kind="ensemble",
        spec=_base(n=2, N=6, G1=0.0, G2=0.15, tight=False),
        settings=_SETTINGS,
        variants=(("dr4", {}), ("dr5", {"N": 7}))))
    add(Preset(
        name="fig3ab-giant",
        description="Giant control atoms: G1 modulates the radiance",
        kind="ensemble",
        spec=_base(n=4, N=9, G1=0.0, G2=0.15),
        settings=_SETTINGS,
        variants=(("g1-0", {}),
                  ("g1-0.067", {"G1": 0.067}),
                  ("g1-0.15", {"G1": 0.15}))))
    add(Preset(
        name="fig3c-chirality",
        description="Emission chirality: matched small vs giant control atoms",
        kind="ensemble",
        spec=_base(n=2, N=7, G1=0.0, G2=0.1),
        settings=_SETTINGS,
        variants=(("small", {}),
                  ("giant", {"G1": 0.067, "G2": 0.15}))))
    add(Preset(
        name="fig3d-minimal",
        description="Single-pair amplitudes and chirality ingredients",
        kind="minimal",
        spec=_base(n=2, N=7, G1=0.0, G2=0.1, N_T=1, N_C=1, kappa=0.0),
        settings=_SETTINGS,
        variants=(("small", {}),
                  ("giant", {"G1": 0.06, "G2": 0.15}))))
    add(Preset(
        name="fig4-largeNT",
        description="Two hundred target atoms: recovery of uncontrolled decay",
        kind="ensemble",
        spec=_base(n=2, N=6, G1=0.0, G2=0.15, N_T=200),
        settings=_SETTINGS,
        variants=(("dr4", {}), ("dr5", {"N": 7}))))
    add(Preset(
        name="fig5-largeNC",
        description="Saturation of radiance and chirality with control-atom number",
        kind="sweep",
        spec=_base(n=2, N=7, G1=0.0, G2=0.15),
        settings=_SETTINGS,
        sweep_axis="N_C",
        sweep_values=(1, 5, 10, 20, 40)))
    add(Preset(
        name="sm-fig3-bic",
        description="Bound-state profiles for small and giant control atoms",
        kind="bic",
        spec=_base(n=2, N=6, G1=0.0, G2=0.15, N_T=1, N_C=1, kappa=0.0),
        settings=_SETTINGS,
        variants=(("small", {}),
                  ("giant", {"G1": 0.15, "N": 4}))))
    add(Preset(
        name="sm-fig4-amplitudes",
        description="Amplitude and phase evolution of the single pair",
        kind="minimal",
        spec=_base(n=2, N=7, G1=0.0, G2=0.15, N_T=1, N_C=1, kappa=0.0),
        settings=_SETTINGS,
        variants=(("small", {}),
                  ("giant", {"G1": 0.067}))))
    return presets


PRESETS: dict[str, Preset] = _build()


def preset_names() -> list[str]:
    return sorted(PRESETS)


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise PresetError(
            "UNKNOWN_PRESET",
            f"no preset {name!r}; available: {', '.join(preset_names())}"
        ) from None


def variant_spec(preset: Preset, label: str) -> SystemSpec:
    """Spec of a named variant, with the window re-derived after overrides."""
    for lab, overrides in preset.variants:
        if lab == label:
            spec = dataclasses.replace(preset.spec, **overrides)
            if "N" in overrides or "n" in overrides:
                tight = preset.name != "fig2cd-maps"
                spec = with_window(spec, preset.settings.t_max, tight=tight)
            return spec
    raise PresetError(
        "UNKNOWN_VARIANT",
        f"preset {preset.name!r} has no variant {label!r}; available: "
        f"{', '.join(lab for lab, _ in preset.variants)}")
