"""Riemannian geometry primitives for the torus, S², SO(3) and G₂,₄.

Each manifold class works on plain numpy arrays with arbitrary leading batch
axes, which is what the optimizer uses internally. Point shapes:

* ``Torus(d)``: ``(..., d)`` coordinates in [0, 1)
* ``Sphere(n)``: ``(..., n + 1)`` unit vectors (only ``n = 2`` is an
  optimization manifold, ``n = 3`` is used for the SO(3) lift)
* ``SO3``: ``(..., 3, 3)`` rotation matrices, tangents stored as ``x @ Omega``
* ``Grass24``: ``(..., 2, 3)`` pairs ``(u, v)`` of unit vectors on the double
  cover S² x S². The projector is available via :func:`projector_of`.

The thin :class:`Point` / :class:`TangentVector` wrappers and the module level
functions (``distance``, ``exp_map`` ...) validate inputs and delegate.

Metrics. The torus metric is Euclidean on [0,1)^d. SO(3) uses the
bi-invariant metric whose distance is half the rotation angle, so
``<x A, x B> = tr(A^T B) / 8``. G₂,₄ carries the product metric of the
double cover, whose distance equals ``sqrt(2) * |principal angles|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CutLocusError, InvalidPointError, ManifoldMismatchError

# how close to the cut locus log() is still willing to answer
CUT_TOL = 1e-12


def _norm(a, axis=-1):
    return np.sqrt(np.sum(a * a, axis=axis))


def _sphere_dist(x, y):
    # atan2 form, accurate for nearby and nearly antipodal points alike
    c = np.sum(x * y, axis=-1)
    s = _norm(y - c[..., None] * x)
    return np.arctan2(s, c)


def _sphere_exp(x, v):
    t = _norm(v)[..., None]
    sinc = np.sinc(t / np.pi)
    y = np.cos(t) * x + sinc * v
    return y / _norm(y)[..., None]


def _sphere_log(x, y):
    c = np.sum(x * y, axis=-1)
    u = y - c[..., None] * x
    s = _norm(u)
    theta = np.arctan2(s, c)
    if np.any(np.pi - theta < CUT_TOL):
        raise CutLocusError()
    scale = np.where(s > 0, theta / np.where(s > 0, s, 1.0), 1.0)
    return scale[..., None] * u


def _sphere_geodesic(x, v, t):
    speed = _norm(v)[..., None]
    a = t * speed
    safe = np.where(speed > 0, speed, 1.0)
    u = np.where(speed > 0, v / safe, 0.0)
    point = np.cos(a) * x + np.sin(a) * u
    point = point / _norm(point)[..., None]
    vel = speed * (-np.sin(a) * x + np.cos(a) * u)
    return point, vel


def _sphere_transport(x, v, w):
    theta = _norm(v)[..., None]
    safe = np.where(theta > 0, theta, 1.0)
    u = np.where(theta > 0, v / safe, 0.0)
    uw = np.sum(u * w, axis=-1)[..., None]
    return w + uw * ((np.cos(theta) - 1.0) * u - np.sin(theta) * x)


def _sphere_proj(x, a):
    return a - np.sum(x * a, axis=-1)[..., None] * x


# --- SO(3) helpers -------------------------------------------------------

def hat(w):
    """Skew matrix [w]_x with [w]_x y = w x y."""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def vee(m):
    """Inverse of :func:`hat` applied to the skew part of ``m``."""
    return 0.5 * np.stack(
        [m[..., 2, 1] - m[..., 1, 2], m[..., 0, 2] - m[..., 2, 0], m[..., 1, 0] - m[..., 0, 1]],
        axis=-1,
    )


def rodrigues(w):
    """Matrix exponential of ``hat(w)``."""
    w = np.asarray(w, dtype=float)
    t = _norm(w)[..., None, None]
    k = hat(w)
    a = np.sinc(t / np.pi)
    b = 0.5 * np.sinc(t / (2 * np.pi)) ** 2
    eye = np.broadcast_to(np.eye(3), k.shape)
    return eye + a * k + b * (k @ k)


def quat_from_matrix(r):
    """Unit quaternion (w, x, y, z) with w >= 0 for rotation matrices ``r``.

    Shepperd's method: pick the largest of the four diagonal combinations so
    the square root is taken of something well away from zero.
    """
    r = np.asarray(r, dtype=float)
    tr = r[..., 0, 0] + r[..., 1, 1] + r[..., 2, 2]
    cand = np.stack([tr, r[..., 0, 0], r[..., 1, 1], r[..., 2, 2]], axis=-1)
    pick = np.argmax(cand, axis=-1)
    q = np.empty(r.shape[:-2] + (4,))
    # case 0: w largest
    s0 = np.sqrt(np.maximum(1.0 + tr, 1e-300)) * 2
    q0 = np.stack(
        [0.25 * s0, (r[..., 2, 1] - r[..., 1, 2]) / s0, (r[..., 0, 2] - r[..., 2, 0]) / s0,
         (r[..., 1, 0] - r[..., 0, 1]) / s0], axis=-1)
    s1 = np.sqrt(np.maximum(1.0 + r[..., 0, 0] - r[..., 1, 1] - r[..., 2, 2], 1e-300)) * 2
    q1 = np.stack(
        [(r[..., 2, 1] - r[..., 1, 2]) / s1, 0.25 * s1, (r[..., 0, 1] + r[..., 1, 0]) / s1,
         (r[..., 0, 2] + r[..., 2, 0]) / s1], axis=-1)
    s2 = np.sqrt(np.maximum(1.0 + r[..., 1, 1] - r[..., 0, 0] - r[..., 2, 2], 1e-300)) * 2
    q2 = np.stack(
        [(r[..., 0, 2] - r[..., 2, 0]) / s2, (r[..., 0, 1] + r[..., 1, 0]) / s2, 0.25 * s2,
         (r[..., 1, 2] + r[..., 2, 1]) / s2], axis=-1)
    s3 = np.sqrt(np.maximum(1.0 + r[..., 2, 2] - r[..., 0, 0] - r[..., 1, 1], 1e-300)) * 2
    q3 = np.stack(
        [(r[..., 1, 0] - r[..., 0, 1]) / s3, (r[..., 0, 2] + r[..., 2, 0]) / s3,
         (r[..., 1, 2] + r[..., 2, 1]) / s3, 0.25 * s3], axis=-1)
    for i, qi in enumerate((q0, q1, q2, q3)):
        mask = pick == i
        q[mask] = qi[mask]
    q = q / _norm(q)[..., None]
    return np.where(q[..., :1] < 0, -q, q)


def matrix_from_quat(q):
    """Rotation matrix of a unit quaternion (w, x, y, z); q and -q agree."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = 1 - 2 * (y * y + z * z)
    out[..., 0, 1] = 2 * (x * y - w * z)
    out[..., 0, 2] = 2 * (x * z + w * y)
    out[..., 1, 0] = 2 * (x * y + w * z)
    out[..., 1, 1] = 1 - 2 * (x * x + z * z)
    out[..., 1, 2] = 2 * (y * z - w * x)
    out[..., 2, 0] = 2 * (x * z - w * y)
    out[..., 2, 1] = 2 * (y * z + w * x)
    out[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return out


def _so3_relative_log(r):
    """Axis-angle vector of r (rotation angle theta in [0, pi))."""
    q = quat_from_matrix(r)
    qv = q[..., 1:]
    s = _norm(qv)
    half = np.arctan2(s, q[..., 0])
    if np.any(q[..., 0] < CUT_TOL):
        raise CutLocusError()
    f = np.where(s > 0, 2 * half / np.where(s > 0, s, 1.0), 2.0 / q[..., 0])
    return f[..., None] * qv


# --- manifold classes ----------------------------------------------------

class Manifold:
    """Interface shared by the array-level manifold implementations."""

    tag: str
    dim: int
    point_shape: tuple

    def __repr__(self):
        return type(self).__name__ + "()"

    @property
    def point_ndim(self):
        return len(self.point_shape)

    def _sum(self, a):
        return np.sum(a, axis=tuple(range(-self.point_ndim, 0)))

    def inner(self, x, a, b):
        return self._sum(a * b)

    def norm(self, x, a):
        return np.sqrt(self.inner(x, a, a))

    def geodesic(self, x, v, t):
        raise NotImplementedError

    def exp(self, x, v):
        return self.geodesic(x, v, 1.0)[0]

    def midpoint(self, x, y):
        return self.exp(x, 0.5 * self.log(x, y))

    def canonical(self, x):
        return x

    def egrad_to_rgrad(self, x, g):
        """Riemannian gradient from the ambient (Euclidean) gradient."""
        return self.proj(x, g)


@dataclass(frozen=True, repr=False)
class Torus(Manifold):
    """Flat torus R^d / Z^d."""

    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("torus dimension must be a positive integer")

    def __repr__(self):
        return f"Torus({self.d})"

    @property
    def tag(self):
        return f"torus{self.d}"

    @property
    def dim(self):
        return self.d

    @property
    def point_shape(self):
        return (self.d,)

    @staticmethod
    def wrap(x):
        y = np.mod(x, 1.0)
        return np.where(y >= 1.0, 0.0, y)

    @staticmethod
    def delta(x, y):
        """Per coordinate representative of y - x in (-0.5, 0.5]."""
        return 0.5 - np.mod(0.5 - (np.asarray(y) - np.asarray(x)), 1.0)

    def check_point(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        return x.shape[-1:] == (self.d,) and bool(np.all((x >= 0) & (x < 1)))

    def canonical(self, x):
        return self.wrap(x)

    def dist(self, x, y):
        return _norm(self.delta(x, y))

    def log(self, x, y):
        dlt = self.delta(x, y)
        if np.any(np.abs(np.abs(dlt) - 0.5) < CUT_TOL):
            raise CutLocusError()
        return dlt

    def geodesic(self, x, v, t):
        return self.wrap(x + t * v), np.array(v, dtype=float, copy=True)

    def transport(self, x, v, w):
        return np.array(w, dtype=float, copy=True)

    def proj(self, x, a):
        return np.asarray(a, dtype=float)

    def random_point(self, rng, size=()):
        size = (size,) if np.isscalar(size) else tuple(size)
        return rng.random(size + (self.d,))

    def random_tangent(self, rng, x):
        return rng.normal(size=np.shape(x))


@dataclass(frozen=True, repr=False)
class Sphere(Manifold):
    """Unit sphere S^n in R^{n+1}."""

    n: int = 2

    def __repr__(self):
        return f"Sphere({self.n})"

    @property
    def tag(self):
        return f"sphere{self.n}"

    @property
    def dim(self):
        return self.n

    @property
    def point_shape(self):
        return (self.n + 1,)

    def check_point(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        return x.shape[-1:] == self.point_shape and bool(np.all(np.abs(_norm(x) - 1) <= tol))

    def canonical(self, x):
        x = np.asarray(x, dtype=float)
        return x / _norm(x)[..., None]

    def dist(self, x, y):
        return _sphere_dist(x, y)

    def log(self, x, y):
        return _sphere_log(x, y)

    def exp(self, x, v):
        return _sphere_exp(x, v)

    def geodesic(self, x, v, t):
        return _sphere_geodesic(x, v, t)

    def transport(self, x, v, w):
        return _sphere_transport(x, v, w)

    def proj(self, x, a):
        return _sphere_proj(x, a)

    def random_point(self, rng, size=()):
        size = (size,) if np.isscalar(size) else tuple(size)
        g = rng.normal(size=size + self.point_shape)
        return g / _norm(g)[..., None]

    def random_tangent(self, rng, x):
        return self.proj(x, rng.normal(size=np.shape(x)))


SPHERE2 = Sphere(2)


@dataclass(frozen=True, repr=False)
class SO3(Manifold):
    """Rotation group with distance arccos((tr(x^T y) - 1) / 2) / 2."""

    tag = "so3"
    dim = 3
    point_shape = (3, 3)
    # <x A, x B> = tr(A^T B) / 8 makes |log| equal to the distance above
    metric_scale = 0.125

    def check_point(self, x, tol=1e-10):
        x = np.asarray(x, dtype=float)
        if x.shape[-2:] != (3, 3):
            return False
        gram = np.swapaxes(x, -1, -2) @ x
        return bool(np.all(np.abs(gram - np.eye(3)) <= tol)
                    and np.all(np.abs(np.linalg.det(x) - 1) <= tol))

    def canonical(self, x):
        u, _, vt = np.linalg.svd(np.asarray(x, dtype=float))
        r = u @ vt
        return r

    def inner(self, x, a, b):
        return self.metric_scale * np.sum(a * b, axis=(-1, -2))

    def skew_of(self, x, v):
        """Omega with v = x @ Omega."""
        return np.swapaxes(x, -1, -2) @ v

    def dist(self, x, y):
        q = quat_from_matrix(np.swapaxes(x, -1, -2) @ y)
        return np.arctan2(_norm(q[..., 1:]), q[..., 0])

    def log(self, x, y):
        w = _so3_relative_log(np.swapaxes(x, -1, -2) @ y)
        return x @ hat(w)

    def geodesic(self, x, v, t):
        w = vee(self.skew_of(x, v))
        point = x @ rodrigues(t * w)
        return point, point @ hat(w)

    def transport(self, x, v, w):
        half = rodrigues(0.5 * vee(self.skew_of(x, v)))
        return x @ half @ self.skew_of(x, w) @ half

    def proj(self, x, a):
        m = self.skew_of(x, a)
        return x @ (0.5 * (m - np.swapaxes(m, -1, -2)))

    def egrad_to_rgrad(self, x, g):
        return self.proj(x, g) / self.metric_scale

    def random_point(self, rng, size=()):
        size = (size,) if np.isscalar(size) else tuple(size)
        q = rng.normal(size=size + (4,))
        return matrix_from_quat(q / _norm(q)[..., None])

    def random_tangent(self, rng, x):
        w = rng.normal(size=np.shape(x)[:-2] + (3,))
        return x @ hat(w)


@dataclass(frozen=True, repr=False)
class Grass24(Manifold):
    """Grassmannian of 2-planes in R^4, handled through the cover S² x S².

    A point is a pair ``(u, v)`` with ``(u, v) ~ (-u, -v)``. The distance is
    the product distance to the nearer representative, which coincides with
    ``sqrt(2) * sqrt(theta_1^2 + theta_2^2)`` for the principal angles.
    """

    tag = "grass24"
    dim = 4
    point_shape = (2, 3)

    def check_point(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        return x.shape[-2:] == (2, 3) and bool(np.all(np.abs(_norm(x) - 1) <= tol))

    def canonical(self, x):
        x = np.asarray(x, dtype=float)
        x = x / _norm(x)[..., None]
        u = x[..., 0, :]
        idx = np.argmax(np.abs(u) > 1e-15, axis=-1)
        lead = np.take_along_axis(u, idx[..., None], axis=-1)[..., 0]
        return np.where((lead < 0)[..., None, None], -x, x)

    def _reps(self, x, y):
        """y or -y, whichever is nearer to x on the cover; also returns the gap."""
        d_plus = _norm(_sphere_dist(x, y))
        d_minus = _norm(_sphere_dist(x, -y))
        flip = d_minus < d_plus
        return np.where(flip[..., None, None], -y, y), np.minimum(d_plus, d_minus), np.abs(d_plus - d_minus)

    def dist(self, x, y):
        return self._reps(x, y)[1]

    def log(self, x, y):
        yy, _, gap = self._reps(x, y)
        if np.any(gap < CUT_TOL):
            raise CutLocusError()
        return _sphere_log(x, yy)

    def exp(self, x, v):
        return _sphere_exp(x, v)

    def geodesic(self, x, v, t):
        return _sphere_geodesic(x, v, t)

    def transport(self, x, v, w):
        return _sphere_transport(x, v, w)

    def proj(self, x, a):
        return _sphere_proj(x, a)

    def random_point(self, rng, size=()):
        size = (size,) if np.isscalar(size) else tuple(size)
        g = rng.normal(size=size + (2, 3))
        return g / _norm(g)[..., None]

    def random_tangent(self, rng, x):
        return self.proj(x, rng.normal(size=np.shape(x)))


def from_tag(tag):
    """Manifold for a serialization tag such as ``"torus2"`` or ``"so3"``."""
    if tag.startswith("torus"):
        return Torus(int(tag[5:]))
    if tag.startswith("sphere"):
        return Sphere(int(tag[6:]))
    if tag == "so3":
        return SO3()
    if tag == "grass24":
        return Grass24()
    raise ValueError(f"unknown manifold tag {tag!r}")


# --- validated point API -------------------------------------------------

def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Point:
    """A single point on ``manifold``; coordinates are validated and canonicalized."""

    manifold: Manifold
    coords: np.ndarray = field(repr=True)

    def __post_init__(self):
        m = self.manifold
        c = np.asarray(self.coords, dtype=float)
        if c.shape != m.point_shape:
            raise InvalidPointError(f"{m!r} expects shape {m.point_shape}, got {c.shape}")
        if isinstance(m, Torus):
            c = m.wrap(c)
        elif not m.check_point(c, tol=1e-9):
            raise InvalidPointError(f"coordinates are not a point of {m!r}")
        else:
            c = m.canonical(c)
        object.__setattr__(self, "coords", _frozen(c))

    def __eq__(self, other):
        if not isinstance(other, Point) or other.manifold != self.manifold:
            return NotImplemented
        return bool(np.array_equal(self.coords, other.coords))

    def __hash__(self):
        return hash((self.manifold, self.coords.tobytes()))


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Tangent vector at ``base`` in the ambient representation of the manifold."""

    base: Point
    components: np.ndarray

    def __post_init__(self):
        m = self.base.manifold
        c = np.asarray(self.components, dtype=float)
        if c.shape != m.point_shape:
            raise InvalidPointError(f"tangent of {m!r} needs shape {m.point_shape}")
        x = self.base.coords
        if isinstance(m, Sphere) and abs(float(x @ c)) > 1e-9 * max(1.0, np.linalg.norm(c)):
            raise InvalidPointError("sphere tangent must be orthogonal to its base")
        if isinstance(m, SO3):
            om = x.T @ c
            if np.max(np.abs(om + om.T)) > 1e-9 * max(1.0, np.abs(c).max()):
                raise InvalidPointError("x^T v must be skew-symmetric")
        if isinstance(m, Grass24) and np.any(np.abs(np.sum(x * c, axis=-1)) > 1e-9 * max(1.0, np.abs(c).max())):
            raise InvalidPointError("each factor tangent must be orthogonal to its base factor")
        object.__setattr__(self, "components", _frozen(c))

    @property
    def norm(self):
        return float(self.base.manifold.norm(self.base.coords, self.components))


def _same(x, y):
    if x.manifold != y.manifold:
        raise ManifoldMismatchError(f"{x.manifold!r} vs {y.manifold!r}")
    return x.manifold


def _tangent_at(x, v):
    if v.base.manifold != x.manifold:
        raise ManifoldMismatchError("tangent vector lives on another manifold")
    if not np.allclose(v.base.coords, x.coords, atol=1e-12):
        raise InvalidPointError("tangent vector is not based at x")
    return v.components


def distance(x: Point, y: Point) -> float:
    return float(_same(x, y).dist(x.coords, y.coords))


def exp_map(x: Point, v: TangentVector) -> Point:
    m = x.manifold
    y = m.exp(x.coords, _tangent_at(x, v))
    return Point(m, y)


def log_map(x: Point, y: Point) -> TangentVector:
    m = _same(x, y)
    return TangentVector(x, m.log(x.coords, y.coords))


def parallel_transport(x: Point, v: TangentVector, w: TangentVector) -> TangentVector:
    m = x.manifold
    vc, wc = _tangent_at(x, v), _tangent_at(x, w)
    end = m.exp(x.coords, vc)
    moved = m.transport(x.coords, vc, wc)
    return _tangent_on_raw(m, end, moved)


def geodesic_with_velocity(x: Point, v: TangentVector, t: float):
    m = x.manifold
    p, vel = m.geodesic(x.coords, _tangent_at(x, v), t)
    return Point(m, p), _tangent_on_raw(m, p, vel)


def _tangent_on_raw(m, p, comp):
    # canonicalizing a Grass24 point may flip its sign; tangents flip along
    point = Point(m, p)
    if isinstance(m, Grass24) and not np.allclose(point.coords, p):
        comp = -comp
    return TangentVector(point, comp)


def covering_map_s3_to_so3(q) -> Point:
    """Rotation matrix of the unit quaternion ``q``; ``q`` and ``-q`` agree."""
    q = np.asarray(q, dtype=float)
    if q.shape != (4,) or abs(np.linalg.norm(q) - 1) > 1e-9:
        raise InvalidPointError("quaternion must be a unit 4-vector")
    return Point(SO3(), matrix_from_quat(q))


def grass_from_pair(u, v) -> Point:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (3,) or v.shape != (3,) or abs(np.linalg.norm(u) - 1) > 1e-9 or abs(np.linalg.norm(v) - 1) > 1e-9:
        raise InvalidPointError("grass_from_pair needs two unit 3-vectors")
    return Point(Grass24(), np.stack([u, v]))


def projector_pair(u, v):
    """4x4 projector P(u, v) of the 2-plane represented by (u, v)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    uv = np.sum(u * v, axis=-1)
    c = np.cross(u, v)
    out = np.zeros(u.shape[:-1] + (4, 4))
    out[..., 0, 0] = 1 + uv
    out[..., 0, 1:] = -c
    out[..., 1:, 0] = -c
    out[..., 1:, 1:] = (u[..., :, None] * v[..., None, :] + v[..., :, None] * u[..., None, :]
                        + (1 - uv)[..., None, None] * np.eye(3))
    return 0.5 * out


def projector_of(x: Point) -> np.ndarray:
    if not isinstance(x.manifold, Grass24):
        raise ManifoldMismatchError("projector_of needs a Grass24 point")
    return projector_pair(x.coords[0], x.coords[1])


def principal_angle_distance(p1, p2):
    """sqrt(2) * |principal angles| between the ranges of two rank-2 projectors."""
    def basis(p):
        _, vecs = np.linalg.eigh(p)
        return vecs[..., -2:]
    s = np.linalg.svd(np.swapaxes(basis(p1), -1, -2) @ basis(p2), compute_uv=False)
    th = np.arccos(np.clip(s, -1.0, 1.0))
    return np.sqrt(2.0) * _norm(th)
