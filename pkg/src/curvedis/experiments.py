"""Continuation ladders, decay tables and the initial curves of the experiments."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .cg import CgConfig, cg_minimize
from .curves import DiscreteCurve
from .errors import ConfigError, CurvedisError
from .manifolds import SO3, Grass24, Sphere, Torus, matrix_from_quat
from .measures import SpectralMeasure
from .objective import ObjectiveConfig, Problem
from .spectral import kernel_weights, smoothness


@dataclass(frozen=True)
class Stage:
    L: float
    N: int
    r: int
    lam: float
    restarts: int = 0


@dataclass(frozen=True)
class Polish:
    """Constant speed refinement of a stage: lam * lam_factor, N * n_factor, L replaced."""

    lam_factor: float = 100.0
    n_factor: int = 2
    L: tuple = None  # per stage override; None keeps L_i
    restarts: tuple = None  # per stage forced restarts; None means one


@dataclass(frozen=True)
class ContinuationSchedule:
    stages: tuple
    refine: bool = True
    polish: Polish = None
    k_max: int = 100

    def __post_init__(self):
        st = tuple(self.stages)
        if not st:
            raise ConfigError("schedule needs at least one stage")
        for s in st:
            if not (s.L > 0 and s.N >= 2 and s.r >= 0 and s.lam >= 0):
                raise ConfigError(f"invalid stage {s}")
        for a, b in zip(st, st[1:]):
            if not b.L > a.L:
                raise ConfigError("L must increase strictly along the ladder")
            if b.N < a.N:
                raise ConfigError("N must not decrease along the ladder")
        if self.polish is not None:
            for name in ("L", "restarts"):
                v = getattr(self.polish, name)
                if v is not None and len(v) != len(st):
                    raise ConfigError(f"polish.{name} needs one entry per stage")
        object.__setattr__(self, "stages", st)

    @property
    def max_degree(self):
        return max(s.r for s in self.stages)


def scaling_exponents(d, d_mu, s):
    """Exponents (N, r, lam) of N ~ L^a, r ~ L^b, lam ~ L^c."""
    if d_mu < 2 or d < d_mu:
        raise ConfigError("need 2 <= support dimension <= manifold dimension")
    a = d_mu / (d_mu - 1.0)
    b = 1.0 / (d_mu - 1.0)
    if d_mu == d:
        c = (-2.0 * s - 2.0 * (d - 1)) / (d - 1)
    else:
        c = (-2.0 * s - 3.0 * d_mu + d + 2.0) / (d_mu - 1)
    return a, b, c


def default_schedule(m, d_mu=None, s=None, L0=4.0, stages=5, ratio=math.sqrt(2.0), N0=None,
                     r_factor=None, r_offset=0, lam_factor=100.0, restarts=0, polish=None, k_max=100):
    """Geometric ladder L_i = L0 ratio^i with N, r, lam from the scaling laws.

    N_i = round(N0 (L_i / L0)^a), r_i = floor(r_factor L_i^b) + r_offset,
    lam_i = lam_factor L_i^c with (a, b, c) from :func:`scaling_exponents`.
    """
    d = m.dim
    d_mu = d if d_mu is None else d_mu
    s = smoothness(m) if s is None else s
    if stages < 1:
        raise ConfigError("stages must be >= 1")
    a, b, c = scaling_exponents(d, d_mu, s)
    if N0 is None:
        N0 = int(math.ceil(4 * L0 ** a))
    if r_factor is None:
        r_factor = 2.0
    out = []
    for i in range(stages):
        L = L0 * ratio ** i
        out.append(Stage(L, int(round(N0 * (L / L0) ** a)), int(math.floor(r_factor * L ** b)) + r_offset,
                         lam_factor * L ** c, restarts))
    return ContinuationSchedule(tuple(out), polish=polish, k_max=k_max)


def _preset_stage(name, i):
    if name == "torus2":
        L = 0.97 * 2 ** ((i + 5) / 2)
        return Stage(L, 96 * 2 ** i, int(math.floor(2 ** ((i + 11) / 2))), 100 * L ** -5), 2 ** ((i + 5) / 2), i
    if name == "torus3":
        L = 2 ** ((i + 5) / 2)
        return Stage(L, 100 * 2 ** i, int(math.floor(2 ** ((i + 5) / 2))), 10 * L ** -5), 2 ** ((i + 6) / 2), 1
    if name == "sphere2":
        L = 9.7 * 2 ** (i / 2)
        # the polish override L_0 2^(i/2) coincides with L_i for L_0 = 9.7
        return Stage(L, 100 * 2 ** i, int(math.floor(L)), 100 * L ** -5), 9.7 * 2 ** (i / 2), 1
    if name == "so3":
        L = 0.93 * 2 ** ((2 * i + 12) / 3)
        return Stage(L, 64 * 2 ** i, int(math.floor(2 ** ((i + 9) / 3))), 10 * L ** -4, 1), None, None
    if name == "grass24":
        L = 0.91 * 2 ** ((3 * i + 16) / 4)
        return Stage(L, 128 * 2 ** i, int(math.floor(2 ** ((3 * i + 16) / 12))) + 1, 100 * L ** (-11 / 3), 1), None, None
    raise ConfigError(f"unknown preset {name!r}")


PRESETS = ("torus2", "torus3", "sphere2", "so3", "grass24")


def preset_schedule(name, stages, first=0, k_max=100):
    """Parameter ladders of the five experiments, stages i = first .. first + stages - 1."""
    rows = [_preset_stage(name, i) for i in range(first, first + stages)]
    st = tuple(r[0] for r in rows)
    polish = None
    if rows[0][1] is not None:
        polish = Polish(100.0, 2, tuple(r[1] for r in rows), tuple(r[2] for r in rows))
    return ContinuationSchedule(st, polish=polish, k_max=k_max)


# --- initial curves ------------------------------------------------------

def initial_curve(m, n):
    """Starting curves, sampled at t = 2 pi k / n.

    T²: circle of radius 1/5. T³: (0.3 cos t, 0.3 sin t, 0.3 sin 2t).
    S²: the latitude circle at polar angle pi/3 with a small wobble
    0.1 sin 3t + 0.05 cos 2t of the polar angle. SO(3): the unit
    quaternion along (cos t/2, 0.3 sin 3t/2, 0.2 cos 5t/2, sin t/2), which
    closes up because q(t + 2 pi) = -q(t). G₂,₄: u along (cos t, sin t, 0.3 sin 2t)
    and v along (0.3 sin 2t, cos t, sin t + 0.2). The wobbles remove the
    symmetries that would otherwise pin the optimizer to a symmetric critical set.
    """
    t = 2 * np.pi * np.arange(n) / n
    if isinstance(m, Torus) and m.d == 2:
        pts = np.stack([0.2 * np.cos(t), 0.2 * np.sin(t)], axis=-1)
    elif isinstance(m, Torus) and m.d == 3:
        pts = np.stack([0.3 * np.cos(t), 0.3 * np.sin(t), 0.3 * np.sin(2 * t)], axis=-1)
    elif isinstance(m, Sphere) and m.n == 2:
        th = np.pi / 3 + 0.1 * np.sin(3 * t) + 0.05 * np.cos(2 * t)
        pts = np.stack([np.sin(th) * np.cos(t), np.sin(th) * np.sin(t), np.cos(th)], axis=-1)
    elif isinstance(m, SO3):
        q = np.stack([np.cos(t / 2), 0.3 * np.sin(1.5 * t), 0.2 * np.cos(2.5 * t), np.sin(t / 2)], axis=-1)
        pts = matrix_from_quat(q / np.linalg.norm(q, axis=-1, keepdims=True))
    elif isinstance(m, Grass24):
        u = np.stack([np.cos(t), np.sin(t), 0.3 * np.sin(2 * t)], axis=-1)
        v = np.stack([0.3 * np.sin(2 * t), np.cos(t), np.sin(t) + 0.2], axis=-1)
        pts = np.stack([u / np.linalg.norm(u, axis=-1, keepdims=True),
                        v / np.linalg.norm(v, axis=-1, keepdims=True)], axis=1)
    else:
        raise ConfigError(f"no initial curve for {m!r}")
    return DiscreteCurve(m, pts)


# --- continuation --------------------------------------------------------

def midpoint_refine(curve):
    """2N points: x_0, mid(x_0, x_1), x_1, mid(x_1, x_2), ..., x_{N-1}, mid(x_{N-1}, x_0)."""
    if curve.N < 2:
        raise ValueError("need at least two points to refine")
    m = curve.manifold
    x = np.asarray(curve.points)
    nxt = np.roll(x, -1, axis=0)
    mid = m.exp(x, 0.5 * m.log(x, nxt))
    out = np.empty((2 * x.shape[0],) + x.shape[1:])
    out[0::2] = x
    out[1::2] = mid
    return DiscreteCurve(m, out)


@dataclass
class ExperimentResult:
    stage: int
    params: Stage
    curve: DiscreteCurve
    disc_sq: float
    length: float
    max_speed: float
    objective: float
    trace: object = None
    polished: bool = False
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    def row(self):
        return [self.params.L, self.disc_sq, self.length, self.max_speed]


def _measure_at(mu, r):
    if callable(mu) and not isinstance(mu, SpectralMeasure):
        return mu(r)
    if r > mu.degree:
        raise ConfigError(f"target measure has degree {mu.degree}, stage needs {r}")
    return mu.restrict(r)


def _grow(curve, n, refine):
    while curve.N < n:
        if not refine:
            raise ConfigError("stage N grows but midpoint refinement is disabled")
        curve = midpoint_refine(curve)
    return curve


def run_stage(mu, stage, x, cg_cfg, eval_degree=None, index=0, polished=False):
    m = x.manifold
    cfg = ObjectiveConfig(_measure_at(mu, stage.r), kernel_weights(m, stage.r), stage.L, stage.lam)
    prob = Problem(cfg)
    cg_cfg = replace(cg_cfg, restart_extra=stage.restarts)
    curve, trace = cg_minimize(prob.value, prob.gradient, prob.hessian_vec, x, cg_cfg)
    pts = np.asarray(curve.points)
    if eval_degree is None or eval_degree == stage.r:
        disc = prob.data_term(pts)
    else:
        ecfg = ObjectiveConfig(_measure_at(mu, eval_degree), kernel_weights(m, eval_degree), stage.L, 0.0)
        disc = Problem(ecfg).data_term(pts)
    return ExperimentResult(index, stage, curve, float(disc), curve.length(), curve.max_speed(),
                            trace.value[-1], trace, polished, trace.status)


def run_continuation(mu, schedule, x0, cg_cfg=None, eval_degree=None, polish_all=False, log=None):
    """Run the ladder from ``x0``; returns the per stage results.

    With a polish rule, the constant speed refinement runs on the last
    stage (or on every stage with ``polish_all``); polished results follow
    their stage in the list and never feed the next stage.
    """
    cg_cfg = cg_cfg or CgConfig(k_max=schedule.k_max)
    if x0.N > schedule.stages[0].N:
        raise ConfigError("initial curve has more points than the first stage")
    results = []
    x = x0
    last = len(schedule.stages) - 1
    for i, st in enumerate(schedule.stages):
        try:
            x_in = _grow(x, st.N, schedule.refine)
            res = run_stage(mu, st, x_in, cg_cfg, eval_degree, i)
            x = res.curve
        except CurvedisError as err:
            res = ExperimentResult(i, st, x, float("nan"), x.length(), x.max_speed(), float("nan"),
                                   status=f"failed: {err}")
        results.append(res)
        if log:
            log(res)
        pol = schedule.polish
        if pol is not None and not res.status.startswith("failed") and (polish_all or i == last):
            p_stage = Stage(pol.L[i] if pol.L is not None else st.L, st.N * pol.n_factor, st.r,
                            st.lam * pol.lam_factor, pol.restarts[i] if pol.restarts is not None else 1)
            try:
                pres = run_stage(mu, p_stage, _grow(res.curve, p_stage.N, True), cg_cfg, eval_degree, i, True)
            except CurvedisError as err:
                pres = ExperimentResult(i, p_stage, res.curve, float("nan"), res.length, res.max_speed,
                                        float("nan"), polished=True, status=f"failed: {err}")
            results.append(pres)
            if log:
                log(pres)
    return results


# --- decay tables --------------------------------------------------------

def fit_slope(x, y):
    """Least squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ValueError("need at least two points for a slope")
    a = np.vstack([lx, np.ones_like(lx)]).T
    return float(np.linalg.lstsq(a, ly, rcond=None)[0][0])


@dataclass
class DecayTable:
    rows: list
    slope_L: float
    slope_length: float
    theory: float
    results: list = None

    header = ("L", "disc_sq", "length", "max_speed")


def decay_table(results, theory, use_polished=True):
    """One row per stage: the polished result when there is one."""
    by_stage = {}
    for res in results:
        if res.status.startswith("failed"):
            continue
        if res.stage not in by_stage or (use_polished and res.polished):
            by_stage[res.stage] = res
    picked = [by_stage[k] for k in sorted(by_stage)]
    rows = [r.row() for r in picked]
    if len(rows) < 3:
        raise ValueError("a decay table needs at least three successful stages")
    L = [r[0] for r in rows]
    d2 = [r[1] for r in rows]
    ell = [r[2] for r in rows]
    return DecayTable(rows, fit_slope(L, d2), fit_slope(ell, d2), theory, picked)


def decay_experiment(mu, schedule, x0, cg_cfg=None, d_mu=None, s=None, eval_degree=None, log=None):
    """Ladder plus polish on every stage, then slopes of log D² against log L and log length."""
    if len(schedule.stages) < 3:
        raise ConfigError("decay experiment needs at least three stages")
    m = x0.manifold
    s = smoothness(m) if s is None else s
    d_mu = m.dim if d_mu is None else d_mu
    results = run_continuation(mu, schedule, x0, cg_cfg, eval_degree, polish_all=True, log=log)
    return decay_table(results, -2.0 * s / (d_mu - 1), use_polished=True)
