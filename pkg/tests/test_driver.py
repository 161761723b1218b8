"""Config parsing, runs, wavefront tracking, outputs, CLI."""

import os
import subprocess
import sys

import numpy as np
import pytest

from rdmix.driver import (
    Config,
    ConfigError,
    FieldEvaluator,
    parse_config,
    preset,
    run,
    track_wavefront,
)
from rdmix.driver.config import load_config
from rdmix.driver.output import read_csv, write_csv, write_vtk
from rdmix.driver.run import build_mesh_from_spec, convergence_study
from rdmix.assembly import DiffusivityField, Discretization
from rdmix.fespace import build_dof_map, uniform_orders
from rdmix.mesh import generate_structured

CONFIG_TEXT = """
[mesh]
structured = 4 4
bbox = 0 0 1 1

[model]
kind = manufactured
case = poly
degree = 2
d = 0.5

[initial]
kind = exact

[boundary]
gamma_n_tags = 0

[time]
scheme = bdf2
dt = 0.05
t_end = 0.2

[orders]
k = 2

[output]
cadence = 2
"""


def test_parse_config_round_trip_fields():
    cfg = parse_config(CONFIG_TEXT)
    assert cfg.mesh.nx == 4
    assert cfg.model.kind == "manufactured"
    assert cfg.scheme == "bdf2"
    assert cfg.dt == 0.05
    assert cfg.k == 2
    assert cfg.gamma_n_tags == (0,)


def test_parse_config_rejects_bad_time():
    with pytest.raises(ConfigError):
        parse_config(CONFIG_TEXT.replace("t_end = 0.2", "t_end = 0.01"))


def test_run_exact_polynomial_stays_exact():
    cfg = parse_config(CONFIG_TEXT)
    rep = run(cfg)
    assert rep.records[-1]["err_m"] < 1e-9


def test_zero_model_constant_report():
    cfg = Config()
    cfg.model.kind = "zero"
    cfg.initial.kind = "constant"
    cfg.initial.values = (0.8,)
    cfg.mesh.nx = cfg.mesh.ny = 3
    cfg.mesh.bbox = (0, 0, 1, 1)
    cfg.gamma_e_tags = (0,)
    cfg.dt, cfg.t_end = 0.1, 0.5
    cfg.k = 1
    rep = run(cfg)
    masses = [r["total_mass"] for r in rep.records]
    assert max(masses) - min(masses) < 1e-12


def test_run_determinism_byte_identical(tmp_path):
    cfg = preset("checkerboard", nx=10, k=1, t_end=0.5)
    cfg.out_dir = str(tmp_path / "a")
    run(cfg)
    cfg2 = preset("checkerboard", nx=10, k=1, t_end=0.5)
    cfg2.out_dir = str(tmp_path / "b")
    run(cfg2)
    a = (tmp_path / "a" / "checkerboard.csv").read_bytes()
    b = (tmp_path / "b" / "checkerboard.csv").read_bytes()
    assert a == b


def test_adaptive_run_dof_changes_only_at_adaptation(tmp_path):
    cfg = preset("bump-mms", nx=5, k=1)
    cfg.t_end = 1.0
    cfg.out_cadence = 1
    cfg.adapt.cadence = 5
    rep = run(cfg)
    dofs = [r["dofs_flux"] for r in rep.records]
    for i in range(1, len(rep.records)):
        step = rep.records[i]["step"]
        if dofs[i] != dofs[i - 1]:
            assert step % 5 == 0 or step == 0


# -- wavefront ---------------------------------------------------------------

def test_wavefront_sharp_synthetic_front():
    mesh = generate_structured(20, 4, (0, 0, 4, 0.8))
    dm = build_dof_map(mesh, uniform_orders(mesh, 1))
    disc = Discretization(mesh, dm, DiffusivityField.isotropic({0: 1.0}))
    m = disc.project_mass(lambda x, y: 1.0 / (1.0 + np.exp(60 * (x - 2.0))))
    ev = FieldEvaluator(mesh, dm, m)
    pos = track_wavefront(ev, 0.5, "x")
    assert pos == pytest.approx(2.0, abs=0.05)


def test_wavefront_linear_profile():
    mesh = generate_structured(10, 2, (0, 0, 1, 1))
    dm = build_dof_map(mesh, uniform_orders(mesh, 1))
    disc = Discretization(mesh, dm, DiffusivityField.isotropic({0: 1.0}))
    m = disc.project_mass(lambda x, y: 1.0 - x)
    ev = FieldEvaluator(mesh, dm, m)
    pos = track_wavefront(ev, 0.6, "x")
    assert pos == pytest.approx(0.4, abs=1e-8)


def test_wavefront_level_not_attained():
    mesh = generate_structured(4, 4, (0, 0, 1, 1))
    dm = build_dof_map(mesh, uniform_orders(mesh, 1))
    disc = Discretization(mesh, dm, DiffusivityField.isotropic({0: 1.0}))
    m = disc.project_mass(lambda x, y: 0.1 * np.ones_like(x))
    ev = FieldEvaluator(mesh, dm, m)
    with pytest.raises(ValueError, match="level"):
        track_wavefront(ev, 0.6, "x")


# -- output files ------------------------------------------------------------

def test_vtk_single_element(tmp_path):
    from rdmix.mesh import build_mesh

    mesh = build_mesh([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])
    dm = build_dof_map(mesh, uniform_orders(mesh, 1))
    disc = Discretization(mesh, dm, DiffusivityField.isotropic({0: 1.0}))
    m = disc.project_mass(lambda x, y: np.full_like(x, 3.25))
    path = tmp_path / "one.vtk"
    write_vtk(str(path), mesh, dm, m)
    text = path.read_text()
    assert "POINTS 3 double" in text
    assert "CELLS 1 4" in text
    assert "SCALARS m double 1" in text
    vals = [float(v) for v in
            text.split("LOOKUP_TABLE default\n")[-1].strip().splitlines()]
    assert np.allclose(vals, 3.25)


def test_csv_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    recs = [{"a": 1, "b": 0.1, "c": "x,y"}, {"a": 2, "b": None, "c": 'q"t'}]
    write_csv(str(path), ["a", "b", "c"], recs)
    back = read_csv(str(path))
    assert back[0]["a"] == "1"
    assert float(back[0]["b"]) == 0.1
    assert back[0]["c"] == "x,y"
    assert back[1]["c"] == 'q"t'
    assert back[1]["b"] == ""


def test_mesh_layouts():
    cfg = preset("checkerboard", nx=10)
    mesh = build_mesh_from_spec(cfg.mesh)
    from rdmix.mesh import region_lookup

    assert region_lookup(mesh, (0.0, 0.0)) == 1     # centre patch: d = 0.1
    assert region_lookup(mesh, (0.4, 0.0)) == 0     # neighbour: d = 0.001
    cfg = preset("travelling-wave", nx=20)
    mesh = build_mesh_from_spec(cfg.mesh)
    assert region_lookup(mesh, (0.1, 0.4)) == 0
    assert region_lookup(mesh, (3.0, 0.4)) == 4


def test_convergence_study_errors():
    cfg = preset("smooth-mms", nx=5, k=1)
    with pytest.raises(ConfigError):
        convergence_study(cfg, 1, "mesh")
    cfg2 = preset("checkerboard")
    with pytest.raises(ConfigError):
        convergence_study(cfg2, 3, "mesh")


# -- CLI ---------------------------------------------------------------------

def _cli(*args):
    return subprocess.run([sys.executable, "-m", "rdmix.driver.cli", *args],
                          capture_output=True, text=True)


def test_cli_bench_runs(tmp_path):
    out = _cli("bench", "checkerboard", "--dt", "0.5", "--out",
               str(tmp_path / "o"))
    assert out.returncode == 0, out.stderr
    assert "completed checkerboard" in out.stdout
    assert (tmp_path / "o" / "checkerboard.csv").exists()


def test_cli_missing_config_is_machine_readable():
    out = _cli("run", "--config", "/nonexistent/path.cfg")
    assert out.returncode != 0
    assert "rdmix-error:" in out.stderr


def test_cli_config_file(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text(CONFIG_TEXT + f"\n[output]\ndir = {tmp_path}/out\n"
                    if "[output]" not in CONFIG_TEXT else
                    CONFIG_TEXT.replace("[output]\ncadence = 2",
                                        f"[output]\ncadence = 2\ndir = {tmp_path}/out"))
    out = _cli("run", "--config", str(path))
    assert out.returncode == 0, out.stderr
    assert "completed" in out.stdout
