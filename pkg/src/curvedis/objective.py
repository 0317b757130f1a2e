"""Truncated discrepancy plus speed penalty, with Riemannian gradients.

F(x) = sum_{k in I_r} alpha_k |mu_k - nu_k|^2 + (lam/N) sum_i (N dist(x_{i-1}, x_i) - L)_+^2
with nu_k = (1/N) sum_i conj(phi_k(x_i)).

:class:`Problem` works on raw coordinate arrays and is what the optimizer
calls; the module level functions take :class:`DiscreteCurve` objects.
"""

from dataclasses import dataclass

import numpy as np

from .curves import DiscreteCurve
from .errors import ManifoldMismatchError, NonsmoothPointError
from .manifolds import TangentVector
from .measures import SpectralMeasure, check_compatible
from .spectral import KernelWeights, basis_for, zero_position


@dataclass(frozen=True)
class ObjectiveConfig:
    target: SpectralMeasure
    kernel: KernelWeights
    L: float
    lam: float
    h: float = 1e-8

    def __post_init__(self):
        if self.kernel.manifold != self.target.manifold:
            raise ManifoldMismatchError("kernel and target live on different manifolds")
        if self.kernel.degree != self.target.degree:
            raise ManifoldMismatchError(f"kernel degree {self.kernel.degree} vs target degree {self.target.degree}")
        if not self.L > 0:
            raise ValueError("speed limit L must be positive")
        if not self.lam >= 0:
            raise ValueError("penalty weight must be nonnegative")
        if not 0 < self.h <= 1e-4:
            raise ValueError("finite difference step must lie in (0, 1e-4]")

    @property
    def manifold(self):
        return self.target.manifold

    @property
    def degree(self):
        return self.target.degree


class Problem:
    """Array-level oracles for one :class:`ObjectiveConfig`.

    Points are arrays of shape (N,) + point_shape, tangent fields likewise.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.m = cfg.manifold
        self.r = cfg.degree
        self.basis = basis_for(self.m)
        self.alpha = np.asarray(cfg.kernel.weights)
        self.mu = np.asarray(cfg.target.coefficients)
        self.zero = zero_position(self.m, self.r)

    def _axes(self):
        return tuple(range(1, 1 + self.m.point_ndim))

    def coefficients(self, x):
        nu = np.asarray(self.basis.analysis(x, self.r), dtype=complex)
        nu[self.zero] = 1.0
        return nu

    def data_term(self, x):
        return float(np.sum(self.alpha * np.abs(self.mu - self.coefficients(x)) ** 2))

    def segments(self, x):
        return self.m.dist(np.roll(x, 1, axis=0), x)

    def penalty(self, x):
        n = x.shape[0]
        if self.cfg.lam == 0 or n < 2:
            return 0.0
        excess = np.maximum(n * self.segments(x) - self.cfg.L, 0.0)
        return float(self.cfg.lam / n * np.sum(excess * excess))

    def value(self, x):
        return self.data_term(x) + self.penalty(x)

    def data_gradient(self, x):
        n = x.shape[0]
        c = (2.0 / n) * self.alpha * (self.coefficients(x) - self.mu)
        c[self.zero] = 0.0
        return self.basis.grad_contract(x, self.r, c).reshape(x.shape)

    def penalty_gradient(self, x):
        n = x.shape[0]
        g = np.zeros_like(x)
        if self.cfg.lam == 0 or n < 2:
            return g
        prev = np.roll(x, 1, axis=0)
        nxt = np.roll(x, -1, axis=0)
        d = self.m.dist(prev, x)  # d[i] = dist(x_{i-1}, x_i)
        excess = n * d - self.cfg.L
        active = excess >= 0
        if not np.any(active):
            return g
        if np.any(active & (d == 0)):
            raise NonsmoothPointError()
        # grad_x dist(x, y) = -log_x(y) / dist(x, y)
        coef = 2.0 * self.cfg.lam * np.where(active, excess, 0.0) / np.where(active, d, 1.0)
        ia = np.flatnonzero(active)
        ib = (ia - 1) % n  # segment ia joins x[ib] and x[ia]
        shape = (-1,) + (1,) * self.m.point_ndim
        np.add.at(g, ia, -coef[ia].reshape(shape) * self.m.log(x[ia], prev[ia]))
        np.add.at(g, ib, -coef[ia].reshape(shape) * self.m.log(x[ib], nxt[ib]))
        return g

    def gradient(self, x):
        return self.data_gradient(x) + self.penalty_gradient(x)

    def inner(self, x, a, b):
        return float(np.sum(self.m.inner(x, a, b)))

    def norm(self, x, a):
        return float(np.sqrt(max(self.inner(x, a, a), 0.0)))

    def step(self, x, d, t):
        """Point and velocity of the geodesic t -> exp_x(t d), pointwise."""
        return self.m.geodesic(x, d, t)

    def hessian_vec(self, x, d, g=None):
        """(|d|/h) (P(grad F(exp_x(h d/|d|))) - grad F(x)), P the transport back to x."""
        nd = self.norm(x, d)
        if nd == 0:
            raise ValueError("Hessian direction must be nonzero")
        h = self.cfg.h
        if g is None:
            g = self.gradient(x)
        y, vel = self.step(x, d * (h / nd), 1.0)
        back = self.m.transport(y, -vel, self.gradient(y))
        return (nd / h) * (back - g)


def _coords(curve, cfg):
    if curve.manifold != cfg.manifold:
        raise ManifoldMismatchError(f"curve is on {curve.manifold!r}, objective on {cfg.manifold!r}")
    return np.asarray(curve.points)


def discrepancy_sq(nu_hat, cfg):
    check_compatible(nu_hat, cfg.target)
    diff = np.asarray(cfg.target.coefficients) - np.asarray(nu_hat.coefficients)
    return float(np.sum(np.asarray(cfg.kernel.weights) * np.abs(diff) ** 2))


def penalty(curve, cfg):
    return Problem(cfg).penalty(_coords(curve, cfg))


def objective(curve, cfg):
    return Problem(cfg).value(_coords(curve, cfg))


def _tangents(curve, arr):
    return [TangentVector(curve[i], arr[i]) for i in range(curve.N)]


def _raw_tangents(curve, vecs):
    if len(vecs) != curve.N:
        raise ValueError("need one tangent vector per curve point")
    out = []
    for i, v in enumerate(vecs):
        comp = v.components if isinstance(v, TangentVector) else np.asarray(v, dtype=float)
        if isinstance(v, TangentVector) and not np.allclose(v.base.coords, curve[i].coords, atol=1e-12):
            raise ValueError(f"tangent vector {i} is not based at the curve point")
        out.append(comp)
    return np.stack(out)


def gradient(curve, cfg):
    """Riemannian gradient, one :class:`TangentVector` per point."""
    return _tangents(curve, Problem(cfg).gradient(_coords(curve, cfg)))


def hessian_vec(curve, direction, cfg):
    x = _coords(curve, cfg)
    d = _raw_tangents(curve, direction)
    return _tangents(curve, Problem(cfg).hessian_vec(x, d))


def kernel_double_sum(x, y, cfg):
    """D^2 between the empirical measures of two point arrays via the truncated kernel.

    Uses sum_{ij} K(x_i, x_j)/N^2 - 2 sum K(x_i, y_j)/(NM) + sum K(y_i, y_j)/M^2 with
    K(a, b) = sum_k alpha_k phi_k(a) conj(phi_k(b)).
    """
    b = basis_for(cfg.manifold)
    r = cfg.degree
    alpha = np.asarray(cfg.kernel.weights)
    fx = b.evaluate(np.asarray(x), r)
    fy = b.evaluate(np.asarray(y), r)
    kxx = np.real((fx * alpha) @ np.conj(fx).T)
    kyy = np.real((fy * alpha) @ np.conj(fy).T)
    kxy = np.real((fx * alpha) @ np.conj(fy).T)
    return float(kxx.mean() - 2 * kxy.mean() + kyy.mean())


__all__ = [
    "ObjectiveConfig", "Problem", "DiscreteCurve", "discrepancy_sq", "penalty",
    "objective", "gradient", "hessian_vec", "kernel_double_sum",
]
