"""Nonlinear conjugate gradients on a product of N copies of a manifold.

The search direction is moved along with the iterate by taking the velocity
of the step geodesic, beta comes from the (finite difference) Hessian, and
the step length from a backtracking Armijo search started at the minimizer
of the quadratic model.

Oracles act on raw point arrays of shape (N,) + point_shape:

``F(x)``            objective value
``grad(x)``         Riemannian gradient, same shape as x
``hessvec(x, d, g)``  Hessian applied to d; g is grad(x), passed to save work
"""

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import CurvedisError, CutLocusError, LineSearchFailedError, NotDescentDirectionError
from .manifolds import SO3, Grass24, Sphere, Torus


@dataclass(frozen=True)
class CgConfig:
    k_max: int = 100
    armijo_a: float = 0.05
    armijo_b: float = 0.5
    armijo_k_max: int = 50
    restart_extra: int = 0
    gtol: float = 1e-12

    def __post_init__(self):
        if not 0 < self.armijo_a < 0.5:
            raise ValueError("armijo_a must lie in (0, 1/2)")
        if not 0 < self.armijo_b < 1:
            raise ValueError("armijo_b must lie in (0, 1)")
        if self.k_max < 0 or self.armijo_k_max < 1 or self.restart_extra < 0:
            raise ValueError("iteration counts must be nonnegative (armijo_k_max >= 1)")
        if self.gtol < 0:
            raise ValueError("gtol must be nonnegative")

    def forced_restarts(self):
        """Iterations at which a steepest descent restart is forced."""
        i = self.restart_extra
        return {round(self.k_max * j / (i + 1)) for j in range(1, i + 1)}


@dataclass
class CgTrace:
    iteration: list = field(default_factory=list)
    value: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    tau: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    restart: list = field(default_factory=list)
    reprojected: list = field(default_factory=list)
    status: str = ""

    def record(self, k, f, gn, tau, beta, restart, reprojected=False):
        self.iteration.append(k)
        self.value.append(float(f))
        self.grad_norm.append(float(gn))
        self.tau.append(float(tau))
        self.beta.append(float(beta))
        self.restart.append(bool(restart))
        self.reprojected.append(bool(reprojected))

    def __len__(self):
        return len(self.iteration)

    def is_monotone(self):
        v = np.asarray(self.value)
        return bool(np.all(np.diff(v) <= 0))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "F", "grad_norm", "tau", "beta", "restart"])
        for row in zip(self.iteration, self.value, self.grad_norm, self.tau, self.beta, self.restart):
            w.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3]), repr(row[4]), int(row[5])])
        return buf.getvalue()


class ArmijoResult(NamedTuple):
    tau: float
    point: np.ndarray
    velocity: np.ndarray
    value: float
    backtracks: int


def _inner(m, x, a, b):
    return float(np.sum(m.inner(x, a, b)))


def armijo_step(F, m, x, d, g, cfg, f0=None, curvature=None, hessvec=None):
    """Backtracking from tau0 = |<d, g> / <d, H d>| (1 if the curvature vanishes).

    ``curvature`` is <d, H d>; if omitted it is computed with ``hessvec``.
    A step that runs into a cut locus counts as a failed Armijo test.
    """
    slope = _inner(m, x, g, d)
    if not slope < 0:
        raise NotDescentDirectionError()
    if curvature is None:
        curvature = _inner(m, x, d, hessvec(x, d, g))
    tau = abs(slope / curvature) if curvature != 0 else 1.0
    if not np.isfinite(tau) or tau == 0:
        tau = 1.0
    if f0 is None:
        f0 = F(x)
    for k in range(cfg.armijo_k_max + 1):
        try:
            y, vel = m.geodesic(x, d, tau)
            fy = F(y)
        except CutLocusError:
            fy = np.inf
        if fy - f0 < cfg.armijo_a * tau * slope:
            return ArmijoResult(tau, y, vel, float(fy), k)
        tau *= cfg.armijo_b
    raise LineSearchFailedError()


def _reproject(m, x):
    if isinstance(m, Torus):
        return Torus.wrap(x)
    if isinstance(m, (Sphere, Grass24)):
        return x / np.linalg.norm(x, axis=-1, keepdims=True)
    if isinstance(m, SO3):
        u, _, vt = np.linalg.svd(x)
        return u @ vt
    raise TypeError(repr(m))


def _with_context(err, k):
    try:
        return type(err)(f"{err} (at CG iteration {k})")
    except TypeError:
        return err


def cg_minimize(F, grad, hessvec, x0, cfg=None):
    """Minimize from ``x0`` (a DiscreteCurve). Returns (DiscreteCurve, CgTrace).

    Stops after cfg.k_max iterations, when the gradient norm drops below
    cfg.gtol, or when the line search fails (keeping the current iterate).
    """
    cfg = cfg or CgConfig()
    m = x0.manifold
    x = np.array(x0.points, dtype=float)
    n = x.shape[0]
    period = n * m.dim
    forced = cfg.forced_restarts()
    trace = CgTrace()

    k = 0
    try:
        f = F(x)
        g = grad(x)
        gn = np.sqrt(max(_inner(m, x, g, g), 0.0))
        trace.record(0, f, gn, 0.0, 0.0, True)
        if gn < cfg.gtol:
            trace.status = "stationary"
            return x0.with_points(x), trace
        d = -g
        hd = -hessvec(x, g, g)
        last_restart = 0
        for k in range(cfg.k_max):
            try:
                step = armijo_step(F, m, x, d, g, cfg, f0=f, curvature=_inner(m, x, d, hd))
            except LineSearchFailedError:
                trace.status = "line search failed"
                break
            x_new, dt = step.point, step.velocity
            f_new = step.value
            fixed = False
            if not m.check_point(x_new, tol=1e-9):
                x_new = _reproject(m, x_new)
                dt = m.proj(x_new, dt)
                f_new = F(x_new)
                fixed = True
            x, f = x_new, f_new
            g = grad(x)
            gn = np.sqrt(max(_inner(m, x, g, g), 0.0))
            if gn < cfg.gtol:
                trace.record(k + 1, f, gn, step.tau, 0.0, False, fixed)
                trace.status = "converged"
                break
            hg = hessvec(x, g, g)
            if np.any(dt):
                hdt = hessvec(x, dt, g)
                den = _inner(m, x, dt, hdt)
                beta = _inner(m, x, dt, hg) / den if den != 0 else 0.0
            else:
                hdt = np.zeros_like(dt)
                beta = 0.0
            if not np.isfinite(beta):
                beta = 0.0
            d = -g + beta * dt
            hd = -hg + beta * hdt
            restart = False
            if _inner(m, x, d, g) > 0 or (k + 1 - last_restart) % period == 0 or (k + 1) in forced:
                d, hd = -g, -hg
                last_restart = k + 1
                restart = True
            trace.record(k + 1, f, gn, step.tau, beta, restart, fixed)
        else:
            trace.status = "max iterations"
    except CurvedisError as err:  # attach the iteration number
        new = _with_context(err, k)
        if new is err:
            raise
        raise new from err
    return x0.with_points(x), trace


__all__ = ["CgConfig", "CgTrace", "ArmijoResult", "armijo_step", "cg_minimize"]
