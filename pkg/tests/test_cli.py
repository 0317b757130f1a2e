import csv
import json
import os

import numpy as np
import pytest

from curvedis import cli
from curvedis.config import BUILTIN_MEASURES, MeasureFactory, experiment_from_dict, load_experiment
from curvedis.curves import DiscreteCurve
from curvedis.errors import ConfigError, UnsupportedError
from curvedis.experiments import initial_curve
from curvedis.export import export_table, export_visualization, grass_pairs, so3_ball_points, torus_pieces, torus_svg
from curvedis.io import (atomic_write, curve_from_json, curve_to_json, load_curve, load_measure, rows_to_csv,
                         save_curve)
from curvedis.manifolds import SO3, Grass24, Sphere, Torus, matrix_from_quat
from curvedis.measures import uniform_measure, write_pgm

CONFIGS = os.path.join(os.path.dirname(__file__), "..", "configs")


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# --- io -------------------------------------------------------------------------------------

@pytest.mark.parametrize("m", [Torus(2), Torus(3), Sphere(2), SO3(), Grass24()], ids=lambda m: m.tag)
def test_curve_json_round_trip_is_exact(m, rng):
    c = DiscreteCurve(m, m.random_point(rng, 7))
    back, meta = curve_from_json(curve_to_json(c, {"L": np.float64(2.5), "r": np.int64(3)}))
    assert back.manifold == m
    assert np.array_equal(back.points, c.points)
    assert meta == {"L": 2.5, "r": 3}


def test_save_and_load_curve(tmp_path):
    c = initial_curve(Sphere(2), 12)
    p = tmp_path / "sub" / "c.json"
    save_curve(p, c)
    assert np.array_equal(load_curve(p)[0].points, c.points)
    assert not [f for f in os.listdir(p.parent) if f.startswith(".tmp-")]


def test_atomic_write_leaves_old_file_on_error(tmp_path):
    p = tmp_path / "a.txt"
    atomic_write(p, "old")

    class Boom:
        def __str__(self):
            raise RuntimeError

    with pytest.raises(TypeError):
        atomic_write(p, Boom())
    assert p.read_text() == "old"
    assert os.listdir(tmp_path) == ["a.txt"]


def test_rows_to_csv_keeps_floats_exact():
    text = rows_to_csv(("L", "disc_sq"), [[0.1, 1 / 3]])
    rows = list(csv.reader(text.splitlines()))
    assert rows[0] == ["L", "disc_sq"]
    assert float(rows[1][1]) == 1 / 3


# --- export ------------------------------------------------------------------------------------

def test_ball_point_of_identity():
    assert np.allclose(so3_ball_points(np.eye(3)[None]), 0.0)


def test_ball_point_of_half_turn():
    rot = np.diag([-1.0, -1.0, 1.0])
    p = so3_ball_points(rot[None])[0]
    assert np.allclose(np.abs(p), [0, 0, 1], atol=1e-15)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 2.5, 3.1])
def test_ball_point_radius(alpha):
    axis = np.array([1.0, 2.0, 2.0]) / 3
    q = np.concatenate([[np.cos(alpha / 2)], np.sin(alpha / 2) * axis])
    p = so3_ball_points(matrix_from_quat(q)[None])[0]
    assert np.allclose(p, np.tan(alpha / 4) * axis, atol=1e-12)


def test_grass_pairs_colors():
    e1 = np.eye(3)[0]
    z, rgb = grass_pairs(np.array([[e1, e1]]))
    assert np.allclose(z, [[2, 0, 0], [-2, 0, 0]])
    assert np.allclose(rgb, [[0, 0.5, 0.5], [1, 0.5, 0.5]])


def test_torus_pieces_split_at_boundary():
    pieces = torus_pieces(np.array([[0.9, 0.5], [0.1, 0.5]]))
    assert len(pieces) == 4
    for p in pieces:
        assert np.all((p >= 0) & (p <= 1))
        assert np.linalg.norm(p[1] - p[0]) <= 0.1 + 1e-12
    svg = torus_svg(np.array([[0.9, 0.5], [0.1, 0.5], [0.1, 0.6]]))
    assert svg.startswith("<svg") and svg.count("<polyline") >= 2


def test_export_tables(rng):
    for m, cols in ((Torus(3), 3), (Sphere(2), 3), (SO3(), 3), (Grass24(), 6)):
        c = DiscreteCurve(m, m.random_point(rng, 5))
        header, rows = export_table(c)
        assert len(header) == cols
        assert len(rows) == (10 if isinstance(m, Grass24) else 5)
    with pytest.raises(UnsupportedError):
        export_table(initial_curve(Torus(2), 5))


def test_export_visualization_formats(tmp_path):
    path = export_visualization(initial_curve(Torus(2), 30), tmp_path / "t.svg")
    assert open(path).read().startswith("<svg")
    with pytest.raises(UnsupportedError):
        export_visualization(initial_curve(Sphere(2), 30), tmp_path / "s.svg", "svg")
    with pytest.raises(UnsupportedError):
        export_visualization(initial_curve(Sphere(2), 30), tmp_path / "s.png", "png")
    c = initial_curve(Sphere(2), 30)
    export_visualization(c, tmp_path / "s.csv")
    data = np.loadtxt(tmp_path / "s.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data, c.points)


# --- config -------------------------------------------------------------------------------------

def test_shipped_configs_load():
    names = sorted(f for f in os.listdir(CONFIGS) if f.endswith(".toml"))
    assert len(names) >= 7
    for f in names:
        exp = load_experiment(os.path.join(CONFIGS, f))
        assert exp.x0.N == exp.schedule.stages[0].N
        assert exp.measure.manifold == exp.manifold


def test_config_overrides():
    exp = experiment_from_dict({"manifold": "torus2", "schedule": {"L0": 3.0, "stages": 4}},
                               {"L0": 5.0, "stages": 2, "seed": None})
    assert [s.L for s in exp.schedule.stages] == pytest.approx([5.0, 5.0 * np.sqrt(2)])


def test_ladder_config():
    doc = {"manifold": "sphere2", "schedule": {"ladder": [{"L": 5, "N": 20, "r": 3, "lam": 0.1},
                                                          {"L": 7, "N": 40, "r": 4, "lam": 0.01, "restarts": 1}],
                                               "polish": {"lam_factor": 10, "n_factor": 2}}}
    exp = experiment_from_dict(doc)
    assert exp.schedule.stages[1].restarts == 1
    assert exp.schedule.polish.lam_factor == 10


@pytest.mark.parametrize("doc", [
    {"schedule": {}},
    {"manifold": "klein"},
    {"manifold": "torus2", "schedule": {"preset": "sphere2"}},
    {"manifold": "torus2", "schedule": {"preset": "nope"}},
    {"manifold": "torus2", "measure": "polar"},
    {"manifold": "torus2", "cg": {"armijo_a": 0.7}},
])
def test_config_errors(doc):
    with pytest.raises(ConfigError):
        experiment_from_dict(doc)


def test_builtin_measures():
    assert set(BUILTIN_MEASURES) == {"uniform", "ring", "polar", "shell", "doughnut"}
    for m, name in ((Torus(2), "ring"), (Sphere(2), "polar"), (Torus(3), "shell"), (SO3(), "doughnut")):
        f = MeasureFactory(m, name)
        mu = f(2)
        assert mu.manifold == m and mu.degree == 2
        assert f(2) is mu


def test_measure_file(tmp_path):
    from curvedis.io import save_measure
    p = tmp_path / "mu.json"
    save_measure(p, uniform_measure(Torus(2), 5))
    f = MeasureFactory(Torus(2), str(p))
    assert f(3).degree == 3
    with pytest.raises(ConfigError):
        MeasureFactory(Sphere(2), str(p))
    with pytest.raises(ConfigError):
        MeasureFactory(Torus(2), str(tmp_path / "missing.json"))


def test_toml_syntax_error(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("manifold = \n")
    with pytest.raises(ConfigError):
        load_experiment(p)


# --- command line -------------------------------------------------------------------------------

def test_minimize(tmp_path, capsys):
    code, out, _ = run(["minimize", "--manifold", "torus2", "--L0", "2", "--stages", "2", "--out", str(tmp_path)],
                       capsys)
    assert code == 0
    summary = json.loads(out)
    assert len(summary["stages"]) == 2
    assert (tmp_path / "stage00.json").exists() and (tmp_path / "stage01-trace.csv").exists()
    rows = (tmp_path / "stages.csv").read_text().splitlines()
    assert rows[0] == "L,disc_sq,length,max_speed" and len(rows) == 3
    curve, meta = load_curve(tmp_path / "stage01.json")
    assert curve.N == meta["N"] and meta["disc_sq"] == summary["stages"][1]["disc_sq"]


def test_minimize_is_deterministic(tmp_path, capsys):
    for sub in ("a", "b"):
        run(["minimize", "--manifold", "sphere2", "--L0", "3", "--stages", "1", "--out", str(tmp_path / sub)], capsys)
    assert (tmp_path / "a" / "stage00.json").read_bytes() == (tmp_path / "b" / "stage00.json").read_bytes()


def test_decay(tmp_path, capsys):
    code, out, _ = run(["decay", "--manifold", "torus2", "--L0", "2", "--stages", "3", "--out", str(tmp_path)],
                       capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["theory"] == -3.0
    assert (tmp_path / "decay.csv").read_text().splitlines()[0] == "L,disc_sq,length,max_speed"
    assert json.loads((tmp_path / "decay.json").read_text()) == summary


@pytest.mark.parametrize("manifold", ["torus2", "sphere2", "so3"])
def test_construct(tmp_path, capsys, manifold):
    code, out, _ = run(["construct", "--manifold", manifold, "--degree", "2", "--points", "72", "--out",
                        str(tmp_path)], capsys)
    assert code == 0
    curve, meta = load_curve(tmp_path / f"quadrature-{manifold}-r2.json")
    assert curve.N == 72 and meta["degree"] == 2


def test_construct_unsupported(tmp_path, capsys):
    code, _, err = run(["construct", "--manifold", "grass24", "--out", str(tmp_path)], capsys)
    assert code == 2 and err.startswith("curvedis: error:")


@pytest.mark.parametrize("suite", ["quadrature", "gamma-proxy"])
def test_verify(tmp_path, capsys, suite):
    code, out, _ = run(["verify", suite, "--out", str(tmp_path)], capsys)
    report = json.loads(out)
    assert code == 0 and report["passed"] and report["suite"] == suite
    assert (tmp_path / f"verify-{suite}.json").exists()


def test_export_command(tmp_path, capsys):
    save_curve(tmp_path / "c.json", initial_curve(Torus(2), 40))
    code, out, _ = run(["export", str(tmp_path / "c.json"), "--out", str(tmp_path)], capsys)
    assert code == 0 and out.strip().endswith("c.svg")
    save_curve(tmp_path / "g.json", initial_curve(Grass24(), 10))
    code, out, _ = run(["export", str(tmp_path / "g.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    assert len((tmp_path / "g.csv").read_text().splitlines()) == 21


def test_ingest_image(tmp_path, capsys):
    pix = np.zeros((16, 16))
    pix[4:8, 4:8] = 200
    write_pgm(tmp_path / "img.pgm", pix)
    code, out, _ = run(["ingest", "--image", str(tmp_path / "img.pgm"), "--degree", "3", "--out", str(tmp_path)],
                       capsys)
    assert code == 0
    assert load_measure(out.strip()).degree == 3
    code, _, err = run(["minimize", "--manifold", "torus2", "--measure", out.strip(), "--L0", "2", "--stages", "1",
                        "--out", str(tmp_path / "run")], capsys)
    # the stage needs degree 4 but the file holds degree 3
    assert code == 2 and "degree 3" in err


def test_ingest_grid(tmp_path, capsys):
    np.savetxt(tmp_path / "g.txt", np.ones((180, 360)))
    code, out, _ = run(["ingest", "--grid", str(tmp_path / "g.txt"), "--degree", "2", "--out", str(tmp_path)], capsys)
    assert code == 0 and out.strip().endswith("g-r2.json")


def test_ingest_needs_one_source(tmp_path, capsys):
    code, _, err = run(["ingest", "--degree", "2", "--out", str(tmp_path)], capsys)
    assert code == 2 and "exactly one" in err


def test_missing_manifold(capsys):
    code, _, err = run(["minimize"], capsys)
    assert code == 2 and "--config or --manifold" in err


def test_threads_env(monkeypatch, capsys, tmp_path):
    monkeypatch.setenv("CURVEDIS_THREADS", "zero")
    code, _, err = run(["verify", "quadrature"], capsys)
    assert code == 2 and "CURVEDIS_THREADS" in err
    monkeypatch.setenv("CURVEDIS_THREADS", "1")
    monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
    code, _, _ = run(["verify", "quadrature"], capsys)
    assert code == 0 and os.environ["OMP_NUM_THREADS"] == "1"


def test_config_flag(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('manifold = "so3"\nmeasure = "doughnut"\n[schedule]\nL0 = 2.0\nstages = 1\n[cg]\nk_max = 5\n')
    code, out, _ = run(["minimize", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads(out)["stages"][0]["r"] >= 1
