"""Closed discrete curves x_1, ..., x_N on a manifold (x_0 = x_N)."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidPointError, ManifoldMismatchError
from .manifolds import Manifold, Point, Torus


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    manifold: Manifold
    points: np.ndarray

    def __post_init__(self):
        m = self.manifold
        pts = np.array(self.points, dtype=float)
        if pts.ndim == len(m.point_shape):
            pts = pts[None]
        if pts.shape[1:] != m.point_shape or pts.shape[0] < 1:
            raise InvalidPointError(f"expected (N,) + {m.point_shape} array, got {pts.shape}")
        if isinstance(m, Torus):
            pts = m.wrap(pts)
        elif not m.check_point(pts, tol=1e-9):
            raise InvalidPointError(f"curve points are not on {m!r}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points):
        points = list(points)
        m = points[0].manifold
        if any(p.manifold != m for p in points):
            raise ManifoldMismatchError("curve points live on different manifolds")
        return cls(m, np.stack([p.coords for p in points]))

    def __len__(self):
        return self.points.shape[0]

    @property
    def N(self):
        return self.points.shape[0]

    def __getitem__(self, i):
        return Point(self.manifold, self.points[i])

    def previous(self):
        """Array of x_{i-1} aligned with ``points`` (cyclic)."""
        return np.roll(self.points, 1, axis=0)

    def segment_lengths(self):
        """dist(x_{i-1}, x_i) for i = 1..N."""
        return self.manifold.dist(self.previous(), self.points)

    def length(self):
        return float(np.sum(self.segment_lengths()))

    def max_speed(self):
        return float(self.N * np.max(self.segment_lengths()))

    def with_points(self, points):
        return DiscreteCurve(self.manifold, points)
