"""Run configuration: dataclasses plus the INI-style text format.

Grammar: line-oriented text with [section] headers and key = value
pairs; '#' starts a comment. Lists are whitespace separated. Stimulus
blocks are repeated sections named [stimulus.<n>]. See README for the
full key reference.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field


class ConfigError(ValueError):
    pass


@dataclass
class MeshSpec:
    file: str | None = None
    fmt: str | None = None
    nx: int = 10
    ny: int = 10
    bbox: tuple = (-1.0, -1.0, 1.0, 1.0)
    pattern: str = "right"
    layout: str = "plain"         # plain | checkerboard | strips
    patches: int = 5              # checkerboard patches per side
    strip_widths: tuple = ()      # strips layout: widths left to right
    strip_d: tuple = ()           # diffusivity per strip


@dataclass
class ModelSpec:
    kind: str = "zero"            # zero|fisher|competition|aliev-panfilov|manufactured
    case: str = "smooth"          # manufactured case name
    d: float = 1.0
    t_star: float = 1.0
    radius: float = 0.75
    profile: str | None = None
    degree: int = 2
    a_matrix: tuple = ()
    ap_params: dict = field(default_factory=dict)
    ap_variant: str = "standard"  # standard | alt


@dataclass
class InitialSpec:
    kind: str = "exact"           # exact|constant|center-square|strip|random|blobs|ap-strip
    values: tuple = (0.0,)
    box: tuple = ()               # for center-square/strip style ICs
    seed: int = 1234


@dataclass
class StimulusSpec:
    species: int
    magnitude: float
    t_on: float
    t_off: float
    box: tuple


@dataclass
class AdaptSpec:
    enabled: bool = False
    theta_min: float = 0.02
    theta_max: float = 0.8
    order_min: int = 1
    order_max: int = 8
    cadence: int = 5


@dataclass
class Config:
    mesh: MeshSpec = field(default_factory=MeshSpec)
    model: ModelSpec = field(default_factory=ModelSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    adapt: AdaptSpec = field(default_factory=AdaptSpec)
    stimuli: list = field(default_factory=list)
    diffusivity: dict | None = None   # None: take the model's d on every region
    gamma_n_tags: tuple = ()
    gamma_e_tags: tuple = ()
    hbar: float = 0.0
    mbar: float | None = None     # None: exact solution (manufactured runs)
    scheme: str = "ark2"
    dt: float = 0.1
    t_end: float = 1.0
    k: int = 1
    solver_method: str = "direct"
    solver_tol: float = 1e-10
    out_dir: str | None = None
    out_cadence: int = 1
    write_vtk: bool = False
    track_front: bool = False
    front_level: float = 0.6
    front_axis: str = "x"
    name: str = "run"

    def validate(self):
        if self.t_end <= 0 or self.dt <= 0 or self.dt > self.t_end:
            raise ConfigError("need 0 < dt <= t_end")
        if self.adapt.enabled:
            from ..adaptivity import AdaptParams

            AdaptParams(self.adapt.theta_min, self.adapt.theta_max,
                        self.adapt.order_min, self.adapt.order_max,
                        self.adapt.cadence).validate()
        return self


def _floats(s):
    return tuple(float(v) for v in s.split())


def _ints(s):
    return tuple(int(v) for v in s.split())


def parse_config(text: str) -> Config:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc
    cfg = Config()

    if cp.has_section("mesh"):
        s = cp["mesh"]
        m = cfg.mesh
        m.file = s.get("file", m.file)
        m.fmt = s.get("format", m.fmt)
        if "structured" in s:
            m.nx, m.ny = _ints(s["structured"])
        if "bbox" in s:
            m.bbox = _floats(s["bbox"])
        m.pattern = s.get("pattern", m.pattern)
        m.layout = s.get("layout", m.layout)
        m.patches = s.getint("patches", m.patches)
        if "strip_widths" in s:
            m.strip_widths = _floats(s["strip_widths"])
        if "strip_d" in s:
            m.strip_d = _floats(s["strip_d"])

    if cp.has_section("diffusivity"):
        cfg.diffusivity = {}
        for key, val in cp["diffusivity"].items():
            if not key.startswith("region."):
                raise ConfigError(f"diffusivity keys look like region.<tag>, got {key}")
            cfg.diffusivity[int(key.split(".", 1)[1])] = float(val)

    if cp.has_section("model"):
        s = cp["model"]
        mo = cfg.model
        mo.kind = s.get("kind", mo.kind)
        mo.case = s.get("case", mo.case)
        mo.d = s.getfloat("d", mo.d)
        mo.t_star = s.getfloat("t_star", mo.t_star)
        mo.radius = s.getfloat("radius", mo.radius)
        mo.profile = s.get("profile", mo.profile)
        mo.degree = s.getint("degree", mo.degree)
        if "a_matrix" in s:
            mo.a_matrix = _floats(s["a_matrix"])
        mo.ap_variant = s.get("variant", mo.ap_variant)
        if "params" in s:
            mo.ap_params = {kv.split("=")[0]: float(kv.split("=")[1])
                            for kv in s["params"].split()}

    if cp.has_section("initial"):
        s = cp["initial"]
        cfg.initial.kind = s.get("kind", cfg.initial.kind)
        if "values" in s:
            cfg.initial.values = _floats(s["values"])
        if "box" in s:
            cfg.initial.box = _floats(s["box"])
        cfg.initial.seed = s.getint("seed", cfg.initial.seed)

    if cp.has_section("boundary"):
        s = cp["boundary"]
        if "gamma_n_tags" in s:
            cfg.gamma_n_tags = _ints(s["gamma_n_tags"])
        if "gamma_e_tags" in s:
            cfg.gamma_e_tags = _ints(s["gamma_e_tags"])
        cfg.hbar = s.getfloat("hbar", cfg.hbar)
        if "mbar" in s:
            cfg.mbar = s.getfloat("mbar")

    if cp.has_section("time"):
        s = cp["time"]
        cfg.scheme = s.get("scheme", cfg.scheme)
        cfg.dt = s.getfloat("dt", cfg.dt)
        cfg.t_end = s.getfloat("t_end", cfg.t_end)

    if cp.has_section("orders"):
        cfg.k = cp["orders"].getint("k", cfg.k)

    if cp.has_section("adapt"):
        s = cp["adapt"]
        a = cfg.adapt
        a.enabled = s.getboolean("enabled", a.enabled)
        a.theta_min = s.getfloat("theta_min", a.theta_min)
        a.theta_max = s.getfloat("theta_max", a.theta_max)
        a.order_min = s.getint("order_min", a.order_min)
        a.order_max = s.getint("order_max", a.order_max)
        a.cadence = s.getint("cadence", a.cadence)

    if cp.has_section("solver"):
        s = cp["solver"]
        cfg.solver_method = s.get("method", cfg.solver_method)
        cfg.solver_tol = s.getfloat("tol", cfg.solver_tol)

    if cp.has_section("output"):
        s = cp["output"]
        cfg.out_dir = s.get("dir", cfg.out_dir)
        cfg.out_cadence = s.getint("cadence", cfg.out_cadence)
        cfg.write_vtk = s.getboolean("vtk", cfg.write_vtk)
        cfg.track_front = s.getboolean("track_front", cfg.track_front)
        cfg.front_level = s.getfloat("front_level", cfg.front_level)
        cfg.front_axis = s.get("front_axis", cfg.front_axis)

    for sec in cp.sections():
        if sec.startswith("stimulus"):
            s = cp[sec]
            cfg.stimuli.append(StimulusSpec(
                species=s.getint("species", 0),
                magnitude=s.getfloat("magnitude"),
                t_on=s.getfloat("t_on"),
                t_off=s.getfloat("t_off"),
                box=_floats(s["box"]),
            ))
    return cfg.validate()


def load_config(path: str) -> Config:
    with open(path) as f:
        return parse_config(f.read())
