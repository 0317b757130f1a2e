"""Experiment configuration files (TOML) and the builtin target measures."""

import math
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .cg import CgConfig
from .errors import ConfigError
from .experiments import PRESETS, ContinuationSchedule, Polish, Stage, default_schedule, initial_curve, preset_schedule
from .io import load_measure
from .manifolds import SO3, Sphere, Torus, from_tag
from .measures import (from_sphere_grid, from_torus_image, gaussian_mixture_torus, so3_doughnut,
                       sphere_grid_points, uniform_measure)

BUILTIN_MEASURES = ("uniform", "ring", "polar", "shell", "doughnut")


def ring_image(size=256, inner=0.2, outer=0.35):
    """Synthetic grayscale image: a bright annulus on a faint background."""
    y, x = np.mgrid[0:size, 0:size] / size
    rad = np.hypot(x - 0.5, y - 0.5)
    return np.where((rad >= inner) & (rad <= outer), 255.0, 16.0)


def polar_grid():
    """Synthetic 180 x 360 grid with density exp(2z) (mass gathered near the north pole)."""
    pts, _ = sphere_grid_points()
    return np.exp(2.0 * pts[..., 2])


def shell_centers(count=64, radius=0.25, seed=0):
    """Points on a sphere of the given radius around the origin of [-1/2, 1/2)³."""
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(count, 3))
    return radius * g / np.linalg.norm(g, axis=1, keepdims=True)


class MeasureFactory:
    """Callable r -> SpectralMeasure with a per degree cache."""

    def __init__(self, manifold, name, options=None):
        self.manifold = manifold
        self.name = name
        self.options = dict(options or {})
        self._cache = {}
        self._file = None
        if name not in BUILTIN_MEASURES:
            try:
                self._file = load_measure(name)
            except OSError as err:
                raise ConfigError(f"measure {name!r} is neither builtin {BUILTIN_MEASURES} nor a readable file") from err
            if self._file.manifold != manifold:
                raise ConfigError(f"measure file is on {self._file.manifold!r}, not {manifold!r}")
        else:
            self._check_builtin()

    def _check_builtin(self):
        m, name = self.manifold, self.name
        ok = {
            "uniform": True,
            "ring": isinstance(m, Torus) and m.d == 2,
            "polar": isinstance(m, Sphere) and m.n == 2,
            "shell": isinstance(m, Torus) and m.d == 3,
            "doughnut": isinstance(m, SO3),
        }[name]
        if not ok:
            raise ConfigError(f"builtin measure {name!r} is not defined on {m!r}")

    def _build(self, r):
        m, o = self.manifold, self.options
        if self._file is not None:
            return self._file.restrict(r)
        if self.name == "uniform":
            return uniform_measure(m, r)
        if self.name == "ring":
            size = int(o.get("size", max(256, 2 * r + 2)))
            return from_torus_image(ring_image(size), r)
        if self.name == "polar":
            return from_sphere_grid(polar_grid(), r)
        if self.name == "shell":
            centers = shell_centers(int(o.get("count", 64)), float(o.get("radius", 0.25)), int(o.get("seed", 0)))
            grid_n = int(o.get("grid_n", max(96, 2 * r + 2)))
            return gaussian_mixture_torus(centers, r, float(o.get("sharpness", 30000.0)), grid_n)
        return so3_doughnut(r, o.get("normalization", "legendre"))

    def __call__(self, r):
        if r not in self._cache:
            self._cache[r] = self._build(r)
        return self._cache[r]


@dataclass
class Experiment:
    name: str
    manifold: object
    measure: MeasureFactory
    schedule: ContinuationSchedule
    cg: CgConfig
    x0: object
    polish_all: bool = False
    support_dim: int = None
    raw: dict = field(default_factory=dict)


def _schedule(m, sec):
    kind = sec.get("preset")
    stages = int(sec.get("stages", 3))
    k_max = int(sec.get("k_max", 100))
    if kind is not None:
        if kind not in PRESETS:
            raise ConfigError(f"unknown preset {kind!r}; choose from {PRESETS}")
        if from_tag(kind) != m:
            raise ConfigError(f"preset {kind!r} does not match the manifold")
        sch = preset_schedule(kind, stages, int(sec.get("first", 0)), k_max)
        if not sec.get("polish", True):
            sch = ContinuationSchedule(sch.stages, sch.refine, None, k_max)
        return sch
    if "ladder" in sec:
        rows = sec["ladder"]
        st = tuple(Stage(float(r["L"]), int(r["N"]), int(r["r"]), float(r["lam"]), int(r.get("restarts", 0)))
                   for r in rows)
        polish = _polish(sec.get("polish"), len(st))
        return ContinuationSchedule(st, bool(sec.get("refine", True)), polish, k_max)
    return default_schedule(
        m, sec.get("support_dim"), sec.get("s"), float(sec.get("L0", 4.0)), stages,
        float(sec.get("ratio", math.sqrt(2.0))), sec.get("N0"), sec.get("r_factor"), int(sec.get("r_offset", 0)),
        float(sec.get("lam_factor", 100.0)), int(sec.get("restarts", 0)), _polish(sec.get("polish"), stages), k_max)


def _polish(p, n):
    if not p:
        return None
    if p is True:
        return Polish()
    return Polish(float(p.get("lam_factor", 100.0)), int(p.get("n_factor", 2)),
                  tuple(p["L"]) if "L" in p else None, tuple(p["restarts"]) if "restarts" in p else None)


def experiment_from_dict(doc, overrides=None):
    doc = dict(doc)
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k == "seed":
            doc["measure_options"] = dict(doc.get("measure_options", {}), seed=v)
        elif k in ("L0", "stages"):
            doc.setdefault("schedule", {})
            doc["schedule"] = dict(doc["schedule"], **{k: v})
        else:
            doc[k] = v
    try:
        m = from_tag(doc["manifold"])
    except (KeyError, ValueError) as err:
        raise ConfigError(f"config needs a valid manifold tag: {err}") from err
    measure = MeasureFactory(m, doc.get("measure", "uniform"), doc.get("measure_options"))
    schedule = _schedule(m, doc.get("schedule", {}))
    c = doc.get("cg", {})
    try:
        cg = CgConfig(k_max=int(c.get("k_max", schedule.k_max)), armijo_a=float(c.get("armijo_a", 0.05)),
                      armijo_b=float(c.get("armijo_b", 0.5)), armijo_k_max=int(c.get("armijo_k_max", 50)))
    except ValueError as err:
        raise ConfigError(str(err)) from err
    init = doc.get("initial", {})
    x0 = initial_curve(m, int(init.get("N", schedule.stages[0].N)))
    return Experiment(doc.get("name", doc["manifold"]), m, measure, schedule, cg, x0,
                      bool(doc.get("polish_all", False)), doc.get("schedule", {}).get("support_dim"), doc)


def load_experiment(path, overrides=None):
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: {err}") from err
    return experiment_from_dict(doc, overrides)
