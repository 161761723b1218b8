"""Named benchmark configurations (CLI `bench <name>`)."""

from __future__ import annotations

from .config import AdaptSpec, Config, InitialSpec, MeshSpec, ModelSpec, StimulusSpec

# 100 m / 80 mV map: stimulus window 565..575 ms over tau = t / 12.9
_AP_T_ON = 565.0 / 12.9
_AP_T_OFF = 575.0 / 12.9
# S2 strength: 80 mV of depolarization delivered over the 10 ms window,
# expressed as a rate in the nondimensional time (0.8 / 0.775 tau)
_AP_STIM_RATE = 0.8 / (_AP_T_OFF - _AP_T_ON)


def smooth_mms(nx=5, k=2, adaptive=False) -> Config:
    cfg = Config(
        mesh=MeshSpec(nx=nx, ny=nx, bbox=(-1, -1, 1, 1)),
        model=ModelSpec(kind="manufactured", case="smooth", d=1.0, t_star=1.0),
        initial=InitialSpec(kind="exact"),
        gamma_n_tags=(0,),
        scheme="ark2", dt=0.1, t_end=10.0, k=k,
        out_cadence=10, name="smooth-mms",
    )
    cfg.adapt = AdaptSpec(enabled=adaptive)
    return cfg


def bump_mms(nx=8, k=1, adaptive=True) -> Config:
    cfg = Config(
        mesh=MeshSpec(nx=nx, ny=nx, bbox=(-1, -1, 1, 1), pattern="crossed"),
        model=ModelSpec(kind="manufactured", case="bump", d=1.0, t_star=1.0,
                        radius=0.75),
        initial=InitialSpec(kind="exact"),
        gamma_n_tags=(0,),
        scheme="ark2", dt=0.1, t_end=10.0, k=k,
        out_cadence=10, name="bump-mms",
    )
    cfg.adapt = AdaptSpec(enabled=adaptive, theta_min=0.02, theta_max=0.8,
                          order_max=6)
    return cfg


def checkerboard(nx=20, k=2, t_end=6.0, fisher=True) -> Config:
    """5x5 contrasting patches on [-1,1]^2, center seeded at 0.5."""
    return Config(
        mesh=MeshSpec(nx=nx, ny=nx, bbox=(-1, -1, 1, 1), layout="checkerboard",
                      patches=5),
        model=ModelSpec(kind="fisher" if fisher else "zero"),
        initial=InitialSpec(kind="center-square", values=(0.5,),
                            box=(-0.2, -0.2, 0.2, 0.2)),
        diffusivity={1: 0.1, 0: 0.001},
        gamma_e_tags=(0,), hbar=0.0,
        scheme="ark2", dt=0.1, t_end=t_end, k=k,
        out_cadence=10, name="checkerboard",
    )


def travelling_wave(nx=40, k=2, t_end=6.0) -> Config:
    """Fisher front over strips of doubling diffusivity, tracked at m=0.6."""
    widths = (0.6, 0.4, 0.4, 0.4, 2.2)
    dvals = (0.03125, 0.0625, 0.125, 0.25, 0.5)
    ny = max(2, round(nx * 0.8 / 4.0))
    return Config(
        mesh=MeshSpec(nx=nx, ny=ny, bbox=(0.0, 0.0, 4.0, 0.8), layout="strips",
                      strip_widths=widths, strip_d=dvals),
        model=ModelSpec(kind="fisher"),
        initial=InitialSpec(kind="strip", values=(1.0,), box=(0.0, 0.0, 0.2, 0.8)),
        diffusivity={i: d for i, d in enumerate(dvals)},
        gamma_e_tags=(0,), hbar=0.0,
        scheme="ark2", dt=0.05, t_end=t_end, k=k,
        out_cadence=4, track_front=True, front_level=0.6, front_axis="x",
        name="travelling-wave",
    )


def three_species_segregation(nx=12, t_end=40.0) -> Config:
    cfg = Config(
        mesh=MeshSpec(nx=nx, ny=nx, bbox=(-1, -1, 1, 1)),
        model=ModelSpec(kind="competition",
                        a_matrix=(1, 3, 3, 3, 1, 3, 3, 3, 1)),
        initial=InitialSpec(kind="random", values=(1.0, 1.0, 1.0), seed=2024),
        diffusivity={0: 0.01},
        gamma_e_tags=(0,), hbar=0.0,
        scheme="ark2", dt=0.2, t_end=t_end, k=2,
        out_cadence=25, name="three-species-segregation",
    )
    cfg.adapt = AdaptSpec(enabled=True, theta_min=0.1, theta_max=0.6,
                          order_min=2, order_max=6)
    return cfg


def three_species_cyclic(nx=12, t_end=40.0) -> Config:
    # bdf2: the damped implicit pair keeps the cyclic kinetics stable at
    # the benchmark step size; the undamped trapezoid pair rings
    cfg = Config(
        mesh=MeshSpec(nx=nx, ny=nx, bbox=(-1, -1, 1, 1)),
        model=ModelSpec(kind="competition",
                        a_matrix=(1, 2, 7, 7, 1, 2, 2, 7, 1)),
        initial=InitialSpec(kind="blobs", values=(0.5, 0.5, 0.5)),
        diffusivity={0: 0.01},
        gamma_e_tags=(0,), hbar=0.0,
        scheme="bdf2", dt=0.2, t_end=t_end, k=2,
        out_cadence=25, name="three-species-cyclic",
    )
    cfg.adapt = AdaptSpec(enabled=True, theta_min=0.1, theta_max=0.6,
                          order_min=2, order_max=6)
    return cfg


def aliev_panfilov(nx=40, dt=0.125, t_end=90.0) -> Config:
    """Planar wave plus S2 stimulus on a 100 mm square of tissue.

    Conductivity is calibrated to a physiological 0.46 m/s so the S2
    window at 565..575 ms lands just behind the repolarization tail of
    the stripe; the wavebreak then curls into a sustained rotor.
    """
    return Config(
        mesh=MeshSpec(nx=nx, ny=nx, bbox=(0.0, 0.0, 100.0, 100.0)),
        model=ModelSpec(kind="aliev-panfilov", ap_variant="standard"),
        initial=InitialSpec(kind="ap-strip", values=(0.4,), box=(0.0, 0.0, 100.0, 3.0)),
        diffusivity={0: 8.0},
        gamma_e_tags=(0,), hbar=0.0,
        scheme="bdf2", dt=dt, t_end=t_end, k=1,
        stimuli=[StimulusSpec(species=0, magnitude=_AP_STIM_RATE,
                              t_on=_AP_T_ON, t_off=_AP_T_OFF,
                              box=(50.0, 67.0, 100.0, 70.0))],
        out_cadence=20, name="aliev-panfilov",
    )


PRESETS = {
    "smooth-mms": smooth_mms,
    "bump-mms": bump_mms,
    "checkerboard": checkerboard,
    "travelling-wave": travelling_wave,
    "three-species-segregation": three_species_segregation,
    "three-species-cyclic": three_species_cyclic,
    "aliev-panfilov": aliev_panfilov,
}


def preset(name: str, **kwargs) -> Config:
    try:
        builder = PRESETS[name]
    except KeyError as exc:
        raise KeyError(
            f"unknown benchmark {name!r}; known: {', '.join(sorted(PRESETS))}"
        ) from exc
    return builder(**kwargs)
