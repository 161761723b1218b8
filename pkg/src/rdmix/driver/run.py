"""Benchmark orchestration: single runs and convergence studies."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from ..adaptivity import (
    AdaptParams,
    adapt_orders,
    combine_error_fields,
    estimate_errors,
    transfer_state,
)
from ..assembly import Discretization, DiffusivityField
from ..fespace import build_dof_map, make_orders, uniform_orders
from ..imex import TimeStepper, scheme_coefficients
from ..mesh import Mesh, generate_structured, load_mesh, tag_boundary, with_regions
from ..models import (
    ALIEV_PANFILOV_ALT,
    AlievPanfilovModel,
    CompetitionModel,
    FisherModel,
    ManufacturedCase,
    StimulatedModel,
    Stimulus,
    ZeroKinetics,
    manufactured_case,
)
from .config import Config, ConfigError
from .output import write_csv, write_vtk
from .wavefront import FieldEvaluator, track_wavefront

CSV_FIELDS = ["step", "time", "dofs_flux", "dofs_mass", "k_min", "k_max",
              "eta_global", "eta_max", "err_m", "err_h", "err_divh",
              "err_h1", "err_energy", "front", "total_mass"]
ADAPT_FIELDS = ["step", "eta_global", "eta_max", "dofs_flux", "dofs_mass",
                "order_histogram"]


@dataclass
class RunReport:
    config: Config
    records: list = field(default_factory=list)
    adapt_records: list = field(default_factory=list)
    csv_path: str | None = None
    final: dict = field(default_factory=dict)   # state/discs/stepper for tests


def build_mesh_from_spec(spec) -> Mesh:
    if spec.file:
        mesh = load_mesh(spec.file, spec.fmt)
    else:
        mesh = generate_structured(spec.nx, spec.ny, spec.bbox, spec.pattern)
    if spec.layout == "checkerboard":
        x0, y0, x1, y1 = spec.bbox
        n = spec.patches
        wx, wy = (x1 - x0) / n, (y1 - y0) / n

        def region(c):
            i = min(int((c[0] - x0) / wx), n - 1)
            j = min(int((c[1] - y0) / wy), n - 1)
            return 1 if (i + j) % 2 == 0 else 0

        mesh = with_regions(mesh, region)
    elif spec.layout == "strips":
        x0 = spec.bbox[0]
        breaks = np.cumsum((x0,) + tuple(spec.strip_widths))

        def region(c):
            return int(np.searchsorted(breaks, c[0]) - 1)

        mesh = with_regions(mesh, region)
    return tag_boundary(mesh, lambda mid: 0)


def _build_model(cfg: Config):
    mo = cfg.model
    case = None
    if mo.kind == "manufactured":
        case = manufactured_case(mo.case, d=mo.d, t_star=mo.t_star,
                                 radius=mo.radius, profile=mo.profile,
                                 degree=mo.degree)
        model = case.model()
    elif mo.kind == "zero":
        model = ZeroKinetics(n_species=len(cfg.initial.values))
    elif mo.kind == "fisher":
        model = FisherModel()
    elif mo.kind == "competition":
        n = int(round(len(mo.a_matrix) ** 0.5))
        model = CompetitionModel(np.asarray(mo.a_matrix).reshape(n, n))
    elif mo.kind == "aliev-panfilov":
        params = dict(ALIEV_PANFILOV_ALT) if mo.ap_variant == "alt" else None
        if mo.ap_params:
            params = dict(params or {})
            params.update(mo.ap_params)
        model = AlievPanfilovModel(params)
    else:
        raise ConfigError(f"unknown model kind {mo.kind!r}")
    if cfg.stimuli:
        model = StimulatedModel(model, [
            Stimulus(s.species, s.magnitude, s.t_on, s.t_off, tuple(s.box))
            for s in cfg.stimuli
        ])
    return model, case


def _initial_functions(cfg: Config, mesh, model, case, rng):
    kind = cfg.initial.kind
    n = model.n_species
    vals = cfg.initial.values
    if kind == "exact":
        if case is None:
            raise ConfigError("exact initial data needs a manufactured model")
        return [lambda x, y, c=case: c.m(x, y, 0.0)], None
    if kind == "constant":
        return [lambda x, y, v=vals[i]: np.full_like(np.asarray(x, float), v)
                for i in range(n)], None
    if kind in ("center-square", "strip", "ap-strip"):
        x0, y0, x1, y1 = cfg.initial.box

        def box_fn(x, y, v=vals[0]):
            return v * ((x >= x0) & (x <= x1) & (y >= y0) & (y <= y1))

        fns = [box_fn] + [
            (lambda x, y: np.zeros_like(np.asarray(x, float))) for _ in range(n - 1)
        ]
        return fns, None
    if kind == "random":
        # per-element uniform draws, projected onto the mass basis later
        draws = [rng.random(mesh.n_elements) * vals[i % len(vals)] for i in range(n)]
        return draws, "per-element"
    if kind == "blobs":
        x0, y0, x1, y1 = (mesh.vertices[:, 0].min(), mesh.vertices[:, 1].min(),
                          mesh.vertices[:, 0].max(), mesh.vertices[:, 1].max())
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        rad = 0.25 * min(x1 - x0, y1 - y0)
        centers = [(cx + rad * np.cos(2 * np.pi * i / n + 0.5),
                    cy + rad * np.sin(2 * np.pi * i / n + 0.5)) for i in range(n)]
        w2 = (0.18 * min(x1 - x0, y1 - y0)) ** 2

        def blob(i):
            def fn(x, y):
                return vals[i % len(vals)] * np.exp(
                    -((x - centers[i][0]) ** 2 + (y - centers[i][1]) ** 2) / w2)
            return fn

        return [blob(i) for i in range(n)], None
    raise ConfigError(f"unknown initial kind {kind!r}")


class Problem:
    """Config materialized on a mesh; rebuilt on each order adaptation."""

    def __init__(self, cfg: Config):
        cfg.validate()
        self.cfg = cfg
        self.mesh = build_mesh_from_spec(cfg.mesh)
        self.model, self.case = _build_model(cfg)
        self.rng = np.random.default_rng(cfg.initial.seed)
        region_tags = set(int(r) for r in self.mesh.regions)
        if cfg.diffusivity is None:
            d = self.case.d if self.case is not None else cfg.model.d
            diffusivity = {t: d for t in region_tags}
        else:
            diffusivity = {int(t): float(v) for t, v in cfg.diffusivity.items()}
        self.D = DiffusivityField.isotropic(diffusivity)
        missing = region_tags - set(self.D.tensors)
        if missing:
            raise ConfigError(f"no diffusivity for region tags {sorted(missing)}")
        self.orders = uniform_orders(self.mesh, cfg.k,
                                     order_min=cfg.adapt.order_min,
                                     order_max=cfg.adapt.order_max)
        self.gamma_n = (self.mesh.edges_with_tag(cfg.gamma_n_tags)
                        if cfg.gamma_n_tags else np.empty(0, dtype=int))
        self.stepper = None
        self.discs = None
        self._rebuild(self.orders)

    def _mbar(self):
        cfg = self.cfg
        if not cfg.gamma_n_tags:
            return None
        if self.case is not None and cfg.mbar is None:
            return self.case.m
        value = cfg.mbar if cfg.mbar is not None else 0.0
        return lambda x, y, t, v=value: np.full_like(np.asarray(x, float), v)

    def _rebuild(self, orders):
        cfg = self.cfg
        dm = build_dof_map(self.mesh, orders)
        disc = Discretization(self.mesh, dm, self.D)
        self.orders = orders
        self.discs = [disc] * self.model.n_species
        hbar_by_tag = ({t: (lambda x, y, tt, v=cfg.hbar:
                            np.full_like(np.asarray(x, float), v))
                        for t in cfg.gamma_e_tags} if cfg.gamma_e_tags else {})
        self.stepper = TimeStepper(
            self.discs, self.model, cfg.scheme, cfg.dt,
            mbar=self._mbar(), gamma_n_edges=self.gamma_n,
            hbar_by_tag=hbar_by_tag, method=cfg.solver_method,
            tol=cfg.solver_tol)

    def initial_state(self):
        fns, special = _initial_functions(self.cfg, self.mesh, self.model,
                                          self.case, self.rng)
        disc = self.discs[0]
        if special == "per-element":
            vecs = []
            for draw in fns:
                qvals = [np.broadcast_to(draw[g.els][:, None],
                                         (len(g.els), len(g.rule.weights))).copy()
                         for g in disc.groups]
                vecs.append(disc.project_quad_values(qvals))
            return self.stepper.initial_state(vecs)
        internal0 = None
        return self.stepper.initial_state(fns, internal0=internal0)

    def estimate(self, state):
        coeffs = scheme_coefficients(self.cfg.scheme)
        fields = [estimate_errors(self.discs[0], coeffs, self.cfg.dt, state, i)
                  for i in range(self.model.n_species)]
        return combine_error_fields(self.mesh, fields)

    def adapt(self, state, errors):
        cfg = self.cfg
        params = AdaptParams(cfg.adapt.theta_min, cfg.adapt.theta_max,
                             cfg.adapt.order_min, cfg.adapt.order_max,
                             cfg.adapt.cadence)
        new_orders = adapt_orders(errors, params, self.orders, self.mesh)
        if np.array_equal(new_orders.k, self.orders.k):
            return state, False
        old_discs = self.discs
        self._rebuild(new_orders)
        return transfer_state(old_discs, self.discs, state), True


def _record(problem: Problem, state, step, errors=None, front=None):
    disc = problem.discs[0]
    dm = disc.dofmap
    rec = {
        "step": step,
        "time": state.time,
        "dofs_flux": dm.n_flux,
        "dofs_mass": dm.n_mass * problem.model.n_species,
        "k_min": int(dm.orders.k.min()),
        "k_max": int(dm.orders.k.max()),
        "total_mass": disc.total_mass(state.current.m[0]),
    }
    if errors is not None:
        rec["eta_global"] = errors.eta_global
        rec["eta_max"] = errors.eta_max
    if problem.case is not None:
        case = problem.case
        em, eh, ed = disc.error_norms(state.current.m[0], state.current.h[0],
                                      case.m, case.h, case.div_h, state.time)
        rec["err_m"] = em
        rec["err_h"] = eh
        rec["err_divh"] = ed
        rec["err_h1"] = float(np.sqrt(em ** 2 + eh ** 2))
        rec["err_energy"] = float(np.sqrt(eh ** 2 + ed ** 2) + em)
    if front is not None:
        rec["front"] = front
    return rec


def run(cfg: Config, on_adapt=None) -> RunReport:
    """Bootstrap, step to t_end, adapt on cadence, write outputs.

    on_adapt(problem, step) fires after every executed adaptation.
    """
    t_wall = time.perf_counter()
    problem = Problem(cfg)
    report = RunReport(cfg)
    state = problem.initial_state()

    def front_of(state):
        if not cfg.track_front:
            return None
        ev = FieldEvaluator(problem.mesh, problem.discs[0].dofmap,
                            state.current.m[0])
        return track_wavefront(ev, cfg.front_level, cfg.front_axis)

    errors = None
    if cfg.adapt.enabled:
        errors = problem.estimate(state)
        state, changed = problem.adapt(state, errors)
        if changed:
            errors = problem.estimate(state)
        report.adapt_records.append(_adapt_record(problem, errors, 0))
        if on_adapt is not None:
            on_adapt(problem, 0)
    state = problem.stepper.bootstrap(state)
    report.records.append(_record(problem, state, 0, errors, front_of(state)))

    n_steps = int(round(cfg.t_end / cfg.dt))
    start = len(state.levels) - 1
    for step in range(start, n_steps):
        state = problem.stepper.step(state)
        now = step + 1
        is_output = (now % cfg.out_cadence == 0) or now == n_steps
        do_adapt = (cfg.adapt.enabled and now % cfg.adapt.cadence == 0
                    and now < n_steps)
        errors = problem.estimate(state) if (is_output or do_adapt) else None
        if do_adapt:
            state, changed = problem.adapt(state, errors)
            report.adapt_records.append(_adapt_record(problem, errors, now))
            if on_adapt is not None:
                on_adapt(problem, now)
        if is_output:
            report.records.append(
                _record(problem, state, now, errors, front_of(state)))
            if cfg.out_dir and cfg.write_vtk:
                os.makedirs(cfg.out_dir, exist_ok=True)
                write_vtk(os.path.join(cfg.out_dir, f"{cfg.name}_{now:06d}.vtk"),
                          problem.mesh, problem.discs[0].dofmap,
                          state.current.m[0], state.current.h[0],
                          errors.eta_elem if errors is not None else None)

    report.final = dict(problem=problem, state=state,
                        wall_s=time.perf_counter() - t_wall)
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        report.csv_path = os.path.join(cfg.out_dir, f"{cfg.name}.csv")
        write_csv(report.csv_path, CSV_FIELDS, report.records)
        if report.adapt_records:
            write_csv(os.path.join(cfg.out_dir, f"{cfg.name}_adapt.csv"),
                      ADAPT_FIELDS, report.adapt_records)
    return report


def _adapt_record(problem: Problem, errors, step):
    ks = problem.orders.k
    hist = " ".join(f"{k}:{int((ks == k).sum())}" for k in np.unique(ks))
    dm = problem.discs[0].dofmap
    return {"step": step, "eta_global": errors.eta_global,
            "eta_max": errors.eta_max, "dofs_flux": dm.n_flux,
            "dofs_mass": dm.n_mass, "order_histogram": hist}


CONV_FIELDS = ["level", "parameter", "dofs", "err_m", "err_h", "err_h1",
               "err_energy", "eta_global", "slope_m", "slope_h1", "slope_energy"]


def convergence_study(cfg: Config, refinements: int, mode: str = "mesh",
                      out_path: str | None = None):
    """Self-convergence table; slopes are log-ratios between rows."""
    if refinements < 2:
        raise ConfigError("need at least 2 refinement levels")
    if cfg.model.kind != "manufactured":
        raise ConfigError("convergence studies need an exact solution")
    rows = []
    for lvl in range(refinements):
        import copy

        c = copy.deepcopy(cfg)
        if mode == "mesh":
            c.mesh.nx = cfg.mesh.nx * 2 ** lvl
            c.mesh.ny = cfg.mesh.ny * 2 ** lvl
            x0, _, x1, _ = c.mesh.bbox
            param = (x1 - x0) / c.mesh.nx
        elif mode == "dt":
            c.dt = cfg.dt / 2 ** lvl
            param = c.dt
        elif mode == "order":
            c.k = cfg.k + lvl
            param = c.k
        else:
            raise ConfigError(f"unknown refinement mode {mode!r}")
        c.out_dir = None
        rep = run(c)
        rec = rep.records[-1]
        rows.append({
            "level": lvl, "parameter": param,
            "dofs": rec["dofs_flux"] + rec["dofs_mass"],
            "err_m": rec["err_m"], "err_h": rec["err_h"],
            "err_h1": rec["err_h1"], "err_energy": rec["err_energy"],
            "eta_global": rec.get("eta_global"),
        })
    for i, row in enumerate(rows):
        if i == 0:
            row["slope_m"] = row["slope_h1"] = row["slope_energy"] = None
            continue
        prev = rows[i - 1]
        ratio = np.log(prev["parameter"] / row["parameter"])
        if mode == "order":
            ratio = np.log(row["parameter"] / prev["parameter"])
        for key, slope_key in (("err_m", "slope_m"), ("err_h1", "slope_h1"),
                               ("err_energy", "slope_energy")):
            row[slope_key] = float(np.log(prev[key] / row[key]) / ratio)
    if out_path:
        write_csv(out_path, CONV_FIELDS, rows)
    return rows
