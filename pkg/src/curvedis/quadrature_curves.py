"""Closed curves whose (weighted) trace integrates low degree eigenfunctions exactly.

Torus: axis parallel lines through the n^(d-1) grid nodes in every
direction, stitched into one closed curve by an Euler circuit of the grid.
S²: Gauss-Legendre latitude circles, plus the same family with x1 and x3
swapped, again stitched by an Euler circuit of their intersection graph.
S^d (d = 2, 3): great circles through e1 with a |sin|^(d-1) density.
SO(3): the S³ construction at twice the degree, pushed through the cover.
"""

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .curves import DiscreteCurve
from .errors import DegenerateInputError, NotInvertibleError, UnsupportedError
from .manifolds import SO3, Sphere, Torus, matrix_from_quat
from .measures import SpectralMeasure, torus_segment_coefficients
from .spectral import basis_for, gauss_legendre, zero_position


# --- segments and curves -------------------------------------------------

@dataclass(frozen=True, eq=False)
class Segment:
    """One piece of an analytic curve on the parameter interval [t0, t1].

    ``kind == "line"``: origin + s * axis_a for s in [0, 1] (wrapped on the torus).
    ``kind == "circle"``: origin + cos(phi) axis_a + sin(phi) axis_b with
    phi = phi0 + s * dphi.
    """

    kind: str
    t0: float
    t1: float
    origin: np.ndarray
    axis_a: np.ndarray
    axis_b: np.ndarray = None
    phi0: float = 0.0
    dphi: float = 0.0
    circle: object = None

    def local(self, s):
        s = np.asarray(s, dtype=float)[..., None]
        if self.kind == "line":
            return self.origin + s * self.axis_a
        phi = self.phi0 + s * self.dphi
        return self.origin + np.cos(phi) * self.axis_a + np.sin(phi) * self.axis_b

    @property
    def length(self):
        if self.kind == "line":
            return float(np.linalg.norm(self.axis_a))
        return float(np.linalg.norm(self.axis_a) * abs(self.dphi))

    @property
    def speed(self):
        return self.length / (self.t1 - self.t0)


@dataclass(frozen=True, eq=False)
class AnalyticCurve:
    """Closed curve on [0, 1] made of line or circle segments.

    ``cover == "quaternion"`` means the segments live on S³ and points are
    mapped to rotation matrices.
    """

    manifold: object
    segments: tuple
    cover: str = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise DegenerateInputError("curve has no segments")
        if abs(segs[0].t0) > 1e-12 or abs(segs[-1].t1 - 1) > 1e-12:
            raise ValueError("segment parameters must cover [0, 1]")
        for a, b in zip(segs, segs[1:]):
            if abs(a.t1 - b.t0) > 1e-12:
                raise ValueError("segment parameter intervals must be contiguous")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_breaks", np.array([s.t0 for s in segs] + [segs[-1].t1]))

    @property
    def breakpoints(self):
        return self._breaks

    def speeds(self):
        return np.array([s.speed for s in self.segments])

    @property
    def lipschitz(self):
        return float(self.speeds().max())

    @property
    def length(self):
        return float(sum(s.length for s in self.segments))

    def _finish(self, pts):
        if isinstance(self.manifold, Torus):
            return Torus.wrap(pts)
        if self.cover == "quaternion":
            return matrix_from_quat(pts)
        return pts

    def raw(self, t):
        """Coordinates before the covering map (S³ points for SO(3) curves)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self._breaks, t, side="right") - 1, 0, len(self.segments) - 1)
        out = np.empty(t.shape + (self.segments[0].origin.shape[-1],))
        for j in np.unique(idx):
            seg = self.segments[j]
            sel = idx == j
            out[sel] = seg.local((t[sel] - seg.t0) / (seg.t1 - seg.t0))
        return out

    def __call__(self, t):
        return self._finish(self.raw(t))

    def segment_points(self, j, s):
        """Manifold points of segment j at local parameters s in [0, 1]."""
        return self._finish(self.segments[j].local(s))

    def is_closed(self, tol=1e-12):
        ends = [(s.local(0.0), s.local(1.0)) for s in self.segments]
        gaps = [self._gap(ends[i][1], ends[(i + 1) % len(ends)][0]) for i in range(len(ends))]
        return max(gaps) < tol

    def _gap(self, a, b):
        if isinstance(self.manifold, Torus):
            return float(np.max(np.abs(Torus.delta(a, b))))
        if self.cover == "quaternion":
            return float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b))))
        return float(np.max(np.abs(a - b)))


@dataclass(frozen=True, eq=False)
class CurveDensity:
    """Density on [0, 1], smooth between ``pieces`` breakpoints."""

    func: object
    pieces: np.ndarray
    lipschitz: float = float("nan")

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    def integral(self, n=64):
        x, w = gauss_legendre(n)
        total = 0.0
        for a, b in zip(self.pieces[:-1], self.pieces[1:]):
            total += 0.5 * (b - a) * np.sum(w * self(a + 0.5 * (b - a) * (x + 1)))
        return float(total)


# --- Euler circuits ------------------------------------------------------

def euler_circuit(n_vertices, edges, start=0):
    """Hierholzer's algorithm on an undirected multigraph.

    ``edges`` is a list of (u, v) pairs (loops allowed). Returns the circuit as
    a list of (edge index, forward) where forward means u -> v. Raises if some
    vertex has odd degree or the edges are not connected.
    """
    adj = [[] for _ in range(n_vertices)]
    for i, (u, v) in enumerate(edges):
        adj[u].append((i, v, True))
        adj[v].append((i, u, False))
    for v in range(n_vertices):
        if len(adj[v]) % 2:
            raise DegenerateInputError(f"vertex {v} has odd degree {len(adj[v])}")
    used = [False] * len(edges)
    ptr = [0] * n_vertices
    # iterative Hierholzer: stack of (vertex, edge taken to reach it)
    stack = [(start, None)]
    circuit = []
    while stack:
        v, via = stack[-1]
        while ptr[v] < len(adj[v]) and used[adj[v][ptr[v]][0]]:
            ptr[v] += 1
        if ptr[v] == len(adj[v]):
            stack.pop()
            if via is not None:
                circuit.append(via)
        else:
            i, w, fwd = adj[v][ptr[v]]
            used[i] = True
            stack.append((w, (i, fwd)))
    if len(circuit) != len(edges):
        raise DegenerateInputError("edge graph is not connected")
    circuit.reverse()
    return circuit


# --- torus ---------------------------------------------------------------

def torus_quadrature_curve(d, r):
    """Closed constant speed curve on T^d whose trace integrates |k|_inf <= r exactly.

    Uses n = r + 1 lines per coordinate direction and node, d n^(d-1) lines
    in total, each of unit length; speed d n^(d-1).
    """
    if d < 1 or r < 0:
        raise ValueError("need d >= 1 and r >= 0")
    n = r + 1
    grid = list(np.ndindex(*(n,) * d))
    vid = {g: i for i, g in enumerate(grid)}
    edges, info = [], []
    for j in range(d):
        for g in grid:
            nxt = list(g)
            nxt[j] = (g[j] + 1) % n
            edges.append((vid[g], vid[tuple(nxt)]))
            info.append((np.array(g, dtype=float) / n, j))
    circuit = euler_circuit(len(grid), edges)
    dt = 1.0 / len(edges)
    segs = []
    for pos, (i, fwd) in enumerate(circuit):
        p, j = info[i]
        step = np.zeros(d)
        step[j] = 1.0 / n
        start, delta = (p, step) if fwd else (Torus.wrap(p + step), -step)
        segs.append(Segment("line", pos * dt, (pos + 1) * dt, start, delta, circle=(j, i)))
    segs[-1] = _with_t1(segs[-1], 1.0)
    return AnalyticCurve(Torus(d), tuple(segs), meta={"construction": "torus", "d": d, "r": r,
                                                    "n": n, "speed": float(d * n ** (d - 1))})


def _with_t1(seg, t1):
    return Segment(seg.kind, seg.t0, t1, seg.origin, seg.axis_a, seg.axis_b, seg.phi0, seg.dphi, seg.circle)


# --- S² Gauss-Legendre circles ------------------------------------------

def _circle_frame(family, u):
    s = np.sqrt(max(1.0 - u * u, 0.0))
    e = np.eye(3)
    if family == 0:  # x1 = u: (u, s cos phi, s sin phi)
        return u * e[0], s * e[1], s * e[2]
    # x3 = u: (s sin phi, s cos phi, u), the first family with x1 and x3 swapped
    return u * e[2], s * e[1], s * e[0]


def sphere2_quadrature_curve(r):
    """Closed curve on S² whose Lebesgue push-forward integrates degree <= r exactly.

    n = ceil((r + 1) / 2) Gauss-Legendre nodes u_j with weights 2 w_j. Circle
    x1 = u_j and circle x3 = u_j each get parameter share w_j / 2, so the
    speed on them is 4 pi sin(theta_j) / w_j.
    """
    if r < 0:
        raise ValueError("degree must be nonnegative")
    n = (r + 2) // 2
    u, w2 = gauss_legendre(n)
    omega = 0.5 * w2
    # vertices: circle (0, j) meets circle (1, l) at (u_j, +-y, u_l)
    verts, on_circle = [], defaultdict(list)
    for j in range(n):
        for l in range(n):
            y2 = 1.0 - u[j] ** 2 - u[l] ** 2
            if abs(y2) < 1e-14:
                raise DegenerateInputError("tangent circles in the Gauss-Legendre curve")
            if y2 < 0:
                continue
            for sgn in (1.0, -1.0):
                y = sgn * np.sqrt(y2)
                vi = len(verts)
                verts.append(np.array([u[j], y, u[l]]))
                sj, sl = np.sqrt(1 - u[j] ** 2), np.sqrt(1 - u[l] ** 2)
                on_circle[(0, j)].append((np.arctan2(u[l] / sj, y / sj) % (2 * np.pi), vi))
                on_circle[(1, l)].append((np.arctan2(u[j] / sl, y / sl) % (2 * np.pi), vi))
    edges, arcs = [], []
    for fam in (0, 1):
        for j in range(n):
            pts = sorted(on_circle[(fam, j)])
            if not pts:
                raise DegenerateInputError(f"circle {(fam, j)} meets no other circle")
            for a in range(len(pts)):
                p0, v0 = pts[a]
                p1, v1 = pts[(a + 1) % len(pts)]
                if a + 1 == len(pts):
                    p1 += 2 * np.pi
                edges.append((v0, v1))
                arcs.append((fam, j, p0, p1 - p0))
    circuit = euler_circuit(len(verts), edges)
    segs, t = [], 0.0
    for i, fwd in circuit:
        fam, j, p0, dp = arcs[i]
        share = 0.5 * omega[j] * dp / (2 * np.pi)
        c, a, b = _circle_frame(fam, u[j])
        phi0, dphi = (p0, dp) if fwd else (p0 + dp, -dp)
        segs.append(Segment("circle", t, t + share, c, a, b, phi0, dphi, circle=(fam, j)))
        t += share
    segs[-1] = _with_t1(segs[-1], 1.0)
    speeds = {j: float(4 * np.pi * np.sqrt(1 - u[j] ** 2) / omega[j]) for j in range(n)}
    return AnalyticCurve(Sphere(2), tuple(segs), meta={"construction": "sphere2_gauss_legendre", "r": r,
                                                       "n": n, "nodes": u.tolist(), "speeds": speeds,
                                                       "vertices": len(verts)})


# --- S^d curve with density and the SO(3) lift ---------------------------

def _sphere_nodes(dm1, r):
    """Nodes x~_i on S^(dm1) and weights a_i (sum 1), exact for degree <= r."""
    phi = 2 * np.pi * np.arange(2 * r + 1) / (2 * r + 1)
    if dm1 == 1:
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1), np.full(phi.size, 1.0 / phi.size)
    if dm1 == 2:
        u, w = gauss_legendre((r + 2) // 2)
        uu, pp = np.meshgrid(u, phi, indexing="ij")
        s = np.sqrt(1 - uu ** 2)
        nodes = np.stack([uu, s * np.cos(pp), s * np.sin(pp)], axis=-1).reshape(-1, 3)
        weights = (0.5 * w[:, None] / phi.size * np.ones_like(pp)).ravel()
        return nodes, weights
    raise UnsupportedError("only S² and S³ are supported")


def sphere_d_curve_with_density(d, r):
    """Great circles alpha -> (cos alpha, sin alpha x~_i) through e1, with density.

    Circle i occupies t in [(i-1)/M, i/M] at speed 2 pi M; the density there is
    a_i c_d pi M |sin(2 pi M t)|^(d-1), c_d = 1 / int_0^pi sin^(d-1).
    """
    if d not in (2, 3):
        raise UnsupportedError(f"S^{d} curve with density is only available for d = 2, 3")
    if r < 0:
        raise ValueError("degree must be nonnegative")
    nodes, a = _sphere_nodes(d - 1, r)
    big_m = len(a)
    c_d = 0.5 if d == 2 else 2.0 / np.pi
    segs = []
    e1 = np.zeros(d + 1)
    e1[0] = 1.0
    for i in range(big_m):
        b = np.concatenate([[0.0], nodes[i]])
        segs.append(Segment("circle", i / big_m, (i + 1) / big_m, np.zeros(d + 1), e1, b,
                            0.0, 2 * np.pi, circle=i))
    segs[-1] = _with_t1(segs[-1], 1.0)

    def rho(t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.floor(t * big_m).astype(int), 0, big_m - 1)
        alpha = 2 * np.pi * (big_m * t - i)
        return a[i] * c_d * np.pi * big_m * np.abs(np.sin(alpha)) ** (d - 1)

    pieces = np.unique(np.concatenate([np.arange(big_m + 1) / big_m, (np.arange(big_m) + 0.5) / big_m]))
    lip = float(np.max(a) * c_d * np.pi * big_m * 2 * np.pi * big_m * (d - 1))
    manifold = Sphere(d)
    curve = AnalyticCurve(manifold, tuple(segs), meta={"construction": f"sphere{d}_density", "d": d, "r": r,
                                                       "circles": big_m, "speed": float(2 * np.pi * big_m)})
    return curve, CurveDensity(rho, pieces, lip)


def so3_quadrature_curve(r):
    """The S³ curve with density at degree 2r, mapped to SO(3) by the quaternion cover."""
    base, dens = sphere_d_curve_with_density(3, 2 * r)
    meta = dict(base.meta, construction="so3_lift", r=r)
    return AnalyticCurve(SO3(), base.segments, cover="quaternion", meta=meta), dens


# --- reparametrization ---------------------------------------------------

class Reparametrized:
    """gamma o g^{-1} with g(t) = (1/beta) int_0^t rho, evaluated by root finding."""

    def __init__(self, curve, density, n_gl=64):
        self.base = curve
        self.manifold = curve.manifold
        self.density = density
        pieces = np.unique(np.concatenate([density.pieces, curve.breakpoints]))
        x, w = gauss_legendre(n_gl)
        self._x, self._w = x, w
        lo, hi = pieces[:-1], pieces[1:]
        mass = np.array([0.5 * (b - a) * np.sum(w * density(a + 0.5 * (b - a) * (x + 1))) for a, b in zip(lo, hi)])
        if np.any(mass <= 0):
            raise NotInvertibleError("not invertible: density vanishes on a parameter interval")
        self.beta = float(mass.sum())
        self.pieces = pieces
        self.cum = np.concatenate([[0.0], np.cumsum(mass)]) / self.beta
        self.cum[-1] = 1.0
        self.meta = dict(curve.meta, reparametrized=True)

    def g(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.clip(np.searchsorted(self.pieces, t, side="right") - 1, 0, len(self.pieces) - 2)
        a = self.pieces[k]
        nodes = a[:, None] + 0.5 * (t - a)[:, None] * (self._x + 1)
        part = 0.5 * (t - a) * np.sum(self._w * self.density(nodes), axis=-1)
        return self.cum[k] + part / self.beta

    def g_inverse(self, s, tol=1e-12):
        """Bisection safeguarded Newton on the piece that contains s."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k = np.clip(np.searchsorted(self.cum, s, side="right") - 1, 0, len(self.pieces) - 2)
        lo, hi = self.pieces[k].copy(), self.pieces[k + 1].copy()
        t = 0.5 * (lo + hi)
        for _ in range(200):
            f = self.g(t) - s
            lo = np.where(f < 0, t, lo)
            hi = np.where(f > 0, t, hi)
            slope = self.density(t) / self.beta
            newton = t - f / np.where(slope > 0, slope, 1.0)
            ok = (slope > 0) & (newton > lo) & (newton < hi)
            t_new = np.where(ok, newton, 0.5 * (lo + hi))
            done = np.abs(t_new - t) <= tol
            t = t_new
            if np.all(done | (hi - lo <= tol)):
                break
        return t

    def raw(self, s):
        return self.base.raw(self.g_inverse(s))

    def __call__(self, s):
        return self.base(self.g_inverse(s))

    @property
    def breakpoints(self):
        return self.cum


def reparametrize_constant_speed(curve, density):
    """Curve whose Lebesgue push-forward equals the density weighted push-forward of ``curve``.

    ``density`` is a :class:`CurveDensity` on [0, 1] or a callable on manifold
    points (then rho o gamma is used). Isolated zeros of the density are
    allowed, a density vanishing on a whole interval is not.
    """
    if not isinstance(density, CurveDensity):
        func = density
        density = CurveDensity(lambda t: np.asarray(func(curve(np.ravel(t))), dtype=float).reshape(np.shape(t)),
                               curve.breakpoints)
    return Reparametrized(curve, density)


# --- sampling and coefficients ------------------------------------------

def discretize(curve, n):
    """DiscreteCurve with x_i = gamma(i / N), i = 1..N."""
    if n < 2:
        raise ValueError("need N >= 2")
    t = np.arange(1, n + 1) / n
    t[-1] = 0.0  # gamma(1) = gamma(0); keeps t in the first segment
    pts = curve(t)
    return DiscreteCurve(curve.manifold, pts)


def _gl_nodes(lo, hi, n):
    x, w = gauss_legendre(n)
    return lo + 0.5 * (hi - lo) * (x + 1), 0.5 * (hi - lo) * w


def line_coefficients(curve, r, density=None, n_gl=None):
    """int_0^1 conj(phi_k(gamma(t))) rho(t) dt for k in I_r (rho = 1 by default).

    Torus line curves without density are integrated in closed form, all
    others with Gauss-Legendre on every smooth piece.
    """
    m = curve.manifold
    if isinstance(m, Torus) and density is None and isinstance(curve, AnalyticCurve):
        segs = curve.segments
        starts = np.array([s.origin for s in segs])
        deltas = np.array([s.axis_a for s in segs])
        weights = np.array([s.t1 - s.t0 for s in segs])
        c = torus_segment_coefficients(starts, deltas, weights, r)
    else:
        n_gl = n_gl or max(32, 2 * r + 16)
        breaks = curve.breakpoints if density is None else np.unique(np.concatenate([curve.breakpoints, density.pieces]))
        t, w = _gl_nodes(breaks[:-1, None], breaks[1:, None], n_gl)
        t, w = t.ravel(), w.ravel()
        if density is not None:
            w = w * density(t)
        c = np.asarray(basis_for(m).analysis(curve(t), r, weights=w), dtype=complex)
    return SpectralMeasure(m, r, c / c[zero_position(m, r)])


def smoothstep_coefficients(curve, r, n_gl=64):
    """Lebesgue coefficients of a curve with t = a + (b - a)(3w² - 2w³) on each piece.

    The substitution flattens the parametrization at piece ends, which tames
    the square root behaviour of g^{-1} near isolated zeros of a density.
    """
    breaks = np.asarray(curve.breakpoints)
    w, wt = _gl_nodes(0.0, 1.0, n_gl)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    t = lo + (hi - lo) * (3 * w ** 2 - 2 * w ** 3)
    jac = (hi - lo) * 6 * w * (1 - w) * wt
    pts = curve(t.ravel())
    c = np.asarray(basis_for(curve.manifold).analysis(pts, r, weights=jac.ravel()), dtype=complex)
    return SpectralMeasure(curve.manifold, r, c / c[zero_position(curve.manifold, r)])


def circle_coefficients(curve, r, nodes=None):
    """Coefficients of a circle curve, one equispaced rule per full circle.

    The arcs of every circle must cover it exactly once at a common speed;
    the circle's share of [0, 1] then weights a ``nodes``-point equispaced
    rule (default 4r + 2), which is exact for trigonometric degree < nodes.
    """
    nodes = nodes or 4 * r + 2
    groups = defaultdict(list)
    for s in curve.segments:
        if s.kind != "circle":
            raise UnsupportedError("circle_coefficients needs circle segments")
        groups[s.circle].append(s)
    phi = 2 * np.pi * np.arange(nodes) / nodes
    pts, wts = [], []
    for key, segs in groups.items():
        cover = sum(abs(s.dphi) for s in segs)
        if abs(cover - 2 * np.pi) > 1e-9:
            raise DegenerateInputError(f"arcs of circle {key} cover {cover}, not 2 pi")
        share = sum(s.t1 - s.t0 for s in segs)
        s0 = segs[0]
        pts.append(s0.origin + np.cos(phi)[:, None] * s0.axis_a + np.sin(phi)[:, None] * s0.axis_b)
        wts.append(np.full(nodes, share / nodes))
    pts = curve._finish(np.concatenate(pts))
    c = np.asarray(basis_for(curve.manifold).analysis(pts, r, weights=np.concatenate(wts)), dtype=complex)
    return SpectralMeasure(curve.manifold, r, c / c[zero_position(curve.manifold, r)])


__all__ = [
    "Segment", "AnalyticCurve", "CurveDensity", "Reparametrized", "euler_circuit",
    "torus_quadrature_curve", "sphere2_quadrature_curve", "sphere_d_curve_with_density",
    "so3_quadrature_curve", "reparametrize_constant_speed", "discretize", "line_coefficients",
    "smoothstep_coefficients", "circle_coefficients",
]
