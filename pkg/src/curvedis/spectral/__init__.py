"""Laplace-Beltrami eigenfunctions, kernel coefficients and quadrature helpers.

Each manifold has a basis object (see :func:`basis_for`) with a common
interface used by the objective:

``frequencies(r)``  ordered frequency indices of I_r
``evaluate(x, r)``  phi_k(x) for a batch of points, last axis = frequency
``gradient(x, r)``  Riemannian gradients (complex for Torus and SO3)
``analysis(x, r)``  (1/N) sum_i conj(phi_k(x_i)), or with given weights
``grad_contract(x, r, c)``  Re sum_k c_k grad phi_k(x_i)
``alpha(r)``  kernel coefficients aligned with ``frequencies(r)``
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import IndexMismatchError, ManifoldMismatchError, UnsupportedError
from ..manifolds import SO3, Grass24, Point, Sphere, TangentVector, Torus
from .grass import GrassBasis
from .quadrature import gauss_legendre, gauss_legendre_interval, legendre_p, legendre_table
from .so3 import SO3Basis
from .sphere import SphereBasis
from .torus import TorusBasis

__all__ = [
    "KernelWeights", "basis_for", "enumerate_frequencies", "eigenfunction",
    "eigenfunction_gradient", "eigenvalue", "kernel_weights", "kernel_closed_form",
    "kernel_series", "gauss_legendre", "gauss_legendre_interval", "legendre_p",
    "legendre_table", "smoothness", "zero_position",
]


@lru_cache(maxsize=None)
def basis_for(m):
    if isinstance(m, Torus):
        return TorusBasis(m)
    if isinstance(m, Sphere) and m.n == 2:
        return SphereBasis(m)
    if isinstance(m, SO3):
        return SO3Basis(m)
    if isinstance(m, Grass24):
        return GrassBasis(m)
    raise UnsupportedError(f"no spectral basis for {m!r}")


def zero_position(m, r):
    """Position of the constant eigenfunction in ``enumerate_frequencies(m, r)``."""
    return basis_for(m).zero_pos(r)


def smoothness(m):
    """Sobolev smoothness s of the fixed kernel on ``m``."""
    if isinstance(m, Torus):
        return (m.d + 1) / 2.0
    if isinstance(m, Sphere):
        return 1.5
    if isinstance(m, SO3):
        return 2.0
    if isinstance(m, Grass24):
        return 2.5
    raise UnsupportedError(repr(m))


def enumerate_frequencies(m, r):
    if r < 0:
        raise ValueError("degree must be nonnegative")
    return basis_for(m).frequencies(r)


def _check(m, idx):
    idx = tuple(int(i) for i in idx)
    if not basis_for(m).check_index(idx):
        raise IndexMismatchError(f"{idx} is not a frequency index of {m!r}")
    return idx


def _point_on(m, x):
    if isinstance(x, Point):
        if x.manifold != m:
            raise ManifoldMismatchError(f"point is on {x.manifold!r}, not {m!r}")
        return x.coords
    return np.asarray(x, dtype=float)


def _position(m, idx):
    b = basis_for(m)
    r = b.degree_of(idx)
    return r, b.frequencies(r).index(idx)


def eigenfunction(m, idx, x):
    """phi_idx(x) as a complex number (or array for a batch of raw coordinates)."""
    idx = _check(m, idx)
    r, pos = _position(m, idx)
    val = basis_for(m).evaluate(_point_on(m, x), r)[..., pos]
    return complex(val) if np.ndim(val) == 0 else val.astype(complex)


def eigenfunction_gradient(m, idx, x):
    """Riemannian gradient of phi_idx at x as a (real part, imaginary part) pair.

    With a :class:`Point` the parts are returned as :class:`TangentVector`.
    """
    idx = _check(m, idx)
    r, pos = _position(m, idx)
    coords = _point_on(m, x)
    npt = len(m.point_shape)
    g = basis_for(m).gradient(coords, r)
    g = np.take(g, pos, axis=g.ndim - npt - 1)
    re, im = np.real(g), np.imag(g) if np.iscomplexobj(g) else np.zeros_like(g)
    if isinstance(x, Point):
        return TangentVector(x, re), TangentVector(x, im)
    return re, im


def eigenvalue(m, idx):
    return basis_for(m).eigenvalue(_check(m, idx))


@dataclass(frozen=True)
class KernelWeights:
    """Kernel coefficients alpha_k on I_r, aligned with ``enumerate_frequencies``."""

    manifold: object
    s: float
    degree: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (basis_for(self.manifold).size(self.degree),):
            raise ValueError("weights must be indexed exactly by I_r")
        if np.any(w <= 0):
            raise ValueError("kernel weights must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def as_dict(self):
        return dict(zip(enumerate_frequencies(self.manifold, self.degree), self.weights))

    def __getitem__(self, idx):
        r, pos = _position(self.manifold, tuple(idx))
        if r > self.degree:
            raise KeyError(idx)
        return float(basis_for(self.manifold).alpha(r)[pos])


def kernel_weights(m, r):
    return KernelWeights(m, smoothness(m), int(r), basis_for(m).alpha(r))


def kernel_closed_form(m, x, y):
    """Closed form kernel values; available on Sphere(2) and SO3 only."""
    xc, yc = _point_on(m, x), _point_on(m, y)
    if isinstance(m, Sphere) and m.n == 2:
        val = 1.0 - 0.5 * np.linalg.norm(xc - yc, axis=-1)
    elif isinstance(m, SO3):
        val = np.pi / 8 - np.pi * np.sqrt(2) / 32 * np.linalg.norm(xc - yc, axis=(-2, -1))
    else:
        raise UnsupportedError(f"no closed form kernel on {m!r}")
    return float(val) if np.ndim(val) == 0 else val


def kernel_series(m, x, y, r):
    """Truncated kernel sum_{k in I_r} alpha_k phi_k(x) conj(phi_k(y)) by degree sums.

    Sphere: sum alpha_k (2k+1) P_k(<x, y>). SO3: characters
    chi_k = U_2k(cos(omega/2)) of the relative rotation. Other manifolds
    fall back to explicit evaluation of the basis.
    """
    xc, yc = _point_on(m, x), _point_on(m, y)
    if isinstance(m, Sphere) and m.n == 2:
        t = np.clip(np.sum(xc * yc, axis=-1), -1.0, 1.0)
        k = np.arange(r + 1)
        a = 2.0 * (2 * k + 1) / ((2 * k - 1.0) * (2 * k + 1) * (2 * k + 3))
        a[0] = 1.0 / 3.0
        return legendre_table(r, t) @ a
    if isinstance(m, SO3):
        tr = np.trace(np.swapaxes(xc, -1, -2) @ yc, axis1=-2, axis2=-1)
        c = np.clip(0.5 * np.sqrt(np.maximum(tr + 1.0, 0.0)), -1.0, 1.0)
        half = np.arccos(c)
        k = np.arange(r + 1)
        sh = np.sin(half)[..., None]
        chi = np.where(sh > 1e-12, np.sin((2 * k + 1) * half[..., None]) / np.where(sh > 1e-12, sh, 1.0),
                       (2 * k + 1.0))
        a = (2 * k + 1) / ((2 * k - 1.0) * (2 * k + 1) ** 2 * (2 * k + 3))
        a[0] = np.pi / 8 - 1.0 / 3.0
        return chi @ a
    b = basis_for(m)
    fx = b.evaluate(xc, r)
    fy = b.evaluate(yc, r)
    return np.real(np.sum(b.alpha(r) * fx * np.conj(fy), axis=-1))
