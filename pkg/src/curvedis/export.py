"""Figure data for finished curves: SVG for T², CSV polylines otherwise."""

import numpy as np

from .errors import UnsupportedError
from .io import atomic_write, rows_to_csv
from .manifolds import SO3, Grass24, Sphere, Torus, quat_from_matrix


def so3_ball_points(rotations):
    """Stereographic image tan(alpha/4) r of rotations by alpha about the axis r.

    With the quaternion q = (cos(alpha/2), sin(alpha/2) r), q0 >= 0, this is
    q_v / (1 + q0), a point of the closed unit ball.
    """
    q = quat_from_matrix(rotations)
    return q[..., 1:] / (1.0 + q[..., :1])


def grass_pairs(points):
    """Antipodal pairs z = +-(u + v) with colors (1 -+ u_i) / 2.

    Returns ``(z, rgb)`` of shapes (2N, 3): rows 2i and 2i+1 hold the plus and
    minus copies of point i.
    """
    x = np.asarray(points, dtype=float)
    u, v = x[:, 0, :], x[:, 1, :]
    z = np.empty((2 * x.shape[0], 3))
    rgb = np.empty_like(z)
    z[0::2] = u + v
    z[1::2] = -(u + v)
    rgb[0::2] = (1 - u) / 2
    rgb[1::2] = (1 + u) / 2
    return z, rgb


def torus_pieces(points):
    """Split the closed polyline on [0,1)² into pieces that do not cross the boundary.

    Each consecutive pair is joined along its shortest displacement; where it
    leaves the square it is cut and continued from the opposite side.
    Returns a list of (2, 2) arrays (start, end) inside [0, 1]².
    """
    x = np.asarray(points, dtype=float)
    nxt = np.roll(x, -1, axis=0)
    delta = nxt - x
    delta -= np.round(delta)
    pieces = []
    for a, dlt in zip(x, delta):
        # parameters where a coordinate crosses an integer
        cuts = [0.0, 1.0]
        for j in range(2):
            if dlt[j] != 0:
                lo, hi = sorted((a[j], a[j] + dlt[j]))
                for c in range(int(np.ceil(lo)), int(np.floor(hi)) + 1):
                    t = (c - a[j]) / dlt[j]
                    if 0 < t < 1:
                        cuts.append(t)
        cuts = sorted(set(cuts))
        for t0, t1 in zip(cuts, cuts[1:]):
            mid = a + 0.5 * (t0 + t1) * dlt
            shift = np.floor(mid)
            p0 = a + t0 * dlt - shift
            p1 = a + t1 * dlt - shift
            pieces.append(np.clip(np.stack([p0, p1]), 0.0, 1.0))
    return pieces


def torus_svg(points, size=512, stroke=1.0):
    pieces = torus_pieces(points)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 1 1">',
        '<rect x="0" y="0" width="1" height="1" fill="white" stroke="black" stroke-width="0.002"/>',
    ]
    # merge consecutive pieces into polylines where they connect
    runs = []
    for p in pieces:
        if runs and np.allclose(runs[-1][-1], p[0], atol=1e-12):
            runs[-1].append(p[1])
        else:
            runs.append([p[0], p[1]])
    w = stroke / size
    for run in runs:
        # svg y axis points down; flip so the second coordinate goes up
        pts = " ".join(f"{px:.6f},{1 - py:.6f}" for px, py in run)
        lines.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="{w:.6f}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def export_table(curve):
    """(header, rows) of the CSV export of ``curve``."""
    m = curve.manifold
    x = np.asarray(curve.points)
    if isinstance(m, Torus) and m.d == 3:
        return ("x", "y", "z"), x.tolist()
    if isinstance(m, Sphere) and m.n == 2:
        return ("x", "y", "z"), x.tolist()
    if isinstance(m, SO3):
        return ("x", "y", "z"), so3_ball_points(x).tolist()
    if isinstance(m, Grass24):
        z, rgb = grass_pairs(x)
        return ("x", "y", "z", "r", "g", "b"), np.hstack([z, rgb]).tolist()
    raise UnsupportedError(f"no CSV export for {m!r}")


def export_visualization(curve, path, fmt=None):
    """Write the figure data of ``curve``; ``fmt`` is "svg" (T² only) or "csv"."""
    m = curve.manifold
    if fmt is None:
        fmt = "svg" if isinstance(m, Torus) and m.d == 2 else "csv"
    if fmt == "svg":
        if not (isinstance(m, Torus) and m.d == 2):
            raise UnsupportedError(f"SVG export needs a T² curve, got {m!r}")
        atomic_write(path, torus_svg(curve.points))
    elif fmt == "csv":
        header, rows = export_table(curve)
        atomic_write(path, rows_to_csv(header, rows))
    else:
        raise UnsupportedError(f"unknown export format {fmt!r}")
    return path
