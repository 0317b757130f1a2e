"""Target measures given by their Fourier coefficients on I_r."""

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AliasingError, DegenerateInputError, ManifoldMismatchError
from .manifolds import SO3, Sphere, Torus, from_tag
from .spectral import basis_for, enumerate_frequencies, gauss_legendre, zero_position
from .spectral.quadrature import legendre_table


@lru_cache(maxsize=64)
def _restriction(m, r_small, r_big):
    pos = {k: i for i, k in enumerate(enumerate_frequencies(m, r_big))}
    return np.array([pos[k] for k in enumerate_frequencies(m, r_small)])


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Fourier coefficients mu_k = int conj(phi_k) dmu for k in I_r (frequency order)."""

    manifold: object
    degree: int
    coefficients: np.ndarray

    def __post_init__(self):
        b = basis_for(self.manifold)
        c = np.array(self.coefficients, dtype=complex)
        if c.shape != (b.size(self.degree),):
            raise ValueError(f"need {b.size(self.degree)} coefficients for degree {self.degree}")
        z = zero_position(self.manifold, self.degree)
        if abs(c[z] - 1) > 1e-12:
            raise ValueError("zero frequency coefficient must be 1")
        c[z] = 1.0
        if np.any(np.abs(c) > b.sup_bound(self.degree) * (1 + 1e-9) + 1e-12):
            raise ValueError("coefficient exceeds sup |phi_k|")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def __len__(self):
        return self.coefficients.shape[0]

    def __getitem__(self, idx):
        return self.as_dict()[tuple(idx)]

    def as_dict(self):
        return dict(zip(enumerate_frequencies(self.manifold, self.degree), self.coefficients))

    def restrict(self, r):
        """Coefficients on I_r for r <= degree."""
        if r > self.degree:
            raise ValueError(f"cannot extend a degree {self.degree} measure to {r}")
        if r == self.degree:
            return self
        return SpectralMeasure(self.manifold, r, self.coefficients[_restriction(self.manifold, r, self.degree)])

    def to_json(self):
        entries = [[list(k), float(c.real), float(c.imag)]
                   for k, c in zip(enumerate_frequencies(self.manifold, self.degree), self.coefficients) if c != 0]
        return json.dumps({"manifold": self.manifold.tag, "degree": self.degree, "coefficients": entries})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        m = from_tag(d["manifold"])
        r = int(d["degree"])
        pos = {k: i for i, k in enumerate(enumerate_frequencies(m, r))}
        c = np.zeros(len(pos), dtype=complex)
        for k, re, im in d["coefficients"]:
            c[pos[tuple(k)]] = re + 1j * im
        return cls(m, r, c)


def _from_raw(m, r, coeffs):
    coeffs = np.asarray(coeffs, dtype=complex)
    mass = coeffs[zero_position(m, r)].real
    if mass == 0:
        raise DegenerateInputError("measure has zero total mass")
    return SpectralMeasure(m, r, coeffs / mass)


def uniform_measure(m, r):
    c = np.zeros(basis_for(m).size(r), dtype=complex)
    c[zero_position(m, r)] = 1.0
    return SpectralMeasure(m, r, c)


def _torus_grid_coefficients(grid, r):
    """DFT of a nonnegative grid sampled at x_m = m / n, kept for |k|_inf <= r."""
    f = np.fft.fftn(grid)
    ks = np.arange(-r, r + 1)
    d = grid.ndim
    sub = f
    for ax in range(d):
        sub = np.take(sub, ks % grid.shape[ax], axis=ax)
    c = sub.ravel()
    # frequencies are in lexicographic order, so reversal maps k to -k;
    # averaging makes c_{-k} = conj(c_k) hold exactly for the real grid
    return 0.5 * (c + np.conj(c[::-1]))


def from_torus_image(pixels, r, invert=False):
    """Measure on T² with density given by a grayscale image.

    Pixel (i, j) (row i, column j) of an H x W image sits at x = (j/W, i/H),
    so the first torus coordinate follows the column index. With ``invert`` the mass
    is ``max - value`` (dark pixels carry mass).
    """
    p = np.asarray(pixels, dtype=float)
    if p.ndim != 2:
        raise ValueError("image must be a 2-D array")
    if np.any(p < 0):
        raise ValueError("pixel values must be nonnegative")
    if invert:
        p = p.max() - p
    if not np.any(p > 0):
        raise DegenerateInputError("image carries no mass")
    h, w = p.shape
    if not 2 * r < min(h, w):
        raise AliasingError(f"degree {r} needs an image larger than {2 * r} pixels per side")
    # first coordinate x1 = j/W is the column index
    c = _torus_grid_coefficients(p.T, r)
    return _from_raw(Torus(2), r, c)


def sphere_grid_points():
    """The 180 x 360 grid (sin t sin p, sin t cos p, cos t), t = i deg, p = j deg, i, j >= 1."""
    th = np.arange(1, 181) * np.pi / 180
    ph = np.arange(1, 361) * np.pi / 180
    t, p = np.meshgrid(th, ph, indexing="ij")
    pts = np.stack([np.sin(t) * np.sin(p), np.sin(t) * np.cos(p), np.cos(t)], axis=-1)
    return pts, np.sin(t)


def from_sphere_grid(samples, r):
    """Coefficients by direct summation over the sampled degree grid with sin weights."""
    rho = np.asarray(samples, dtype=float)
    if rho.shape != (180, 360):
        raise ValueError("sphere grid must be 180 x 360")
    if r > 180:
        raise AliasingError("degree must not exceed 180 on a one degree grid")
    if np.any(rho < 0):
        raise ValueError("grid samples must be nonnegative")
    if not np.any(rho > 0):
        raise DegenerateInputError("grid carries no mass")
    pts, sin_t = sphere_grid_points()
    w = (rho * sin_t).ravel() / (180 * 360)
    c = basis_for(Sphere(2)).analysis(pts.reshape(-1, 3), r, weights=w)
    return _from_raw(Sphere(2), r, c)


def gaussian_mixture_torus(centers, r, sharpness=30000.0, grid_n=None):
    """Sum of wrapped Gaussians exp(-s |x - p|^2) sampled on a grid_n^d lattice."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.size == 0:
        raise DegenerateInputError("need at least one center")
    d = centers.shape[1]
    if grid_n is None:
        grid_n = 2 * r + 2
    if grid_n < 2 * r + 2:
        raise AliasingError("grid_n must be at least 2r + 2")
    axes = np.arange(grid_n) / grid_n
    mesh = np.stack(np.meshgrid(*([axes] * d), indexing="ij"), axis=-1)
    rho = np.zeros((grid_n,) * d)
    for p in centers:
        dlt = Torus.delta(p, mesh)
        rho += np.exp(-sharpness * np.sum(dlt * dlt, axis=-1))
    if not np.any(rho > 0):
        raise DegenerateInputError("mixture underflows on the grid; increase grid_n")
    return _from_raw(Torus(d), r, _torus_grid_coefficients(rho, r))


def so3_doughnut(r, normalization="legendre"):
    """Haar measure restricted to {x : beta(x) <= pi/2}, only (k, 0, 0) nonzero.

    ``"legendre"`` gives P_{k-1}(0) - P_{k+1}(0) (with P_{-1} = P_0).
    ``"orthonormal"`` divides by sqrt(2k+1), which is the integral of the
    conjugated sqrt(2k+1)-normalized basis functions used everywhere else.
    """
    if normalization not in ("legendre", "orthonormal"):
        raise ValueError("normalization is 'legendre' or 'orthonormal'")
    p0 = legendre_table(r + 1, 0.0)
    c = np.zeros(basis_for(SO3()).size(r), dtype=complex)
    for k in range(r + 1):
        val = (p0[k - 1] if k >= 1 else p0[0]) - p0[k + 1]
        if normalization == "orthonormal":
            val /= np.sqrt(2 * k + 1)
        # (k, 0, 0) sits in the middle of block k
        c[k * (2 * k - 1) * (2 * k + 1) // 3 + k * (2 * k + 1) + k] = val
    return SpectralMeasure(SO3(), r, c)


def empirical_coefficients(curve, r):
    """(1/N) sum_i conj(phi_k(x_i))."""
    b = basis_for(curve.manifold)
    c = np.asarray(b.analysis(curve.points, r), dtype=complex)
    c[zero_position(curve.manifold, r)] = 1.0
    return SpectralMeasure(curve.manifold, r, c)


def torus_segment_coefficients(starts, deltas, weights, r):
    """sum_s w_s int_0^1 exp(-2 pi i <k, p_s + t delta_s>) dt over |k|_inf <= r, in closed form."""
    starts = np.asarray(starts, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    d = starts.shape[1]
    ks = np.array(enumerate_frequencies(Torus(d), r), dtype=float)
    out = np.zeros(ks.shape[0], dtype=complex)
    for lo in range(0, starts.shape[0], 256):
        p = starts[lo:lo + 256]
        a = deltas[lo:lo + 256] @ ks.T
        ph = np.exp(-2j * np.pi * (p @ ks.T))
        # int_0^1 exp(-2 pi i a t) dt = exp(-i pi a) sinc(a)
        seg = np.exp(-1j * np.pi * a) * np.sinc(a)
        out += np.asarray(weights[lo:lo + 256]) @ (ph * seg)
    return out


def curve_line_coefficients(curve, r):
    """Coefficients of the closed piecewise geodesic through the curve points.

    The polyline is parametrized proportionally to arclength. Torus segments
    are integrated exactly, other manifolds use (4r+4)-point Gauss-Legendre
    per segment.
    """
    m = curve.manifold
    prev = curve.previous()
    lengths = curve.segment_lengths()
    if np.any(lengths == 0):
        raise DegenerateInputError("repeated consecutive points")
    w = lengths / lengths.sum()
    if isinstance(m, Torus):
        c = torus_segment_coefficients(prev, Torus.delta(prev, curve.points), w, r)
    else:
        logs = m.log(prev, curve.points)
        t, tw = gauss_legendre(4 * r + 4)
        t = 0.5 * (t + 1)
        tw = 0.5 * tw
        npt = len(m.point_shape)
        pts = m.exp(prev[:, None], t[(None, slice(None)) + (None,) * npt] * logs[:, None])
        pts = pts.reshape((-1,) + m.point_shape)
        weights = (w[:, None] * tw[None, :]).ravel()
        c = np.asarray(basis_for(m).analysis(pts, r, weights=weights), dtype=complex)
    c[zero_position(m, r)] = 1.0
    return SpectralMeasure(m, r, c)


def read_pgm(path):
    """Grayscale PGM (P2 ASCII or P5 binary) as a float array."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    # header: magic, width, height, maxval, skipping comments
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic == b"P2":
        vals = np.array(data[pos:].split(), dtype=float)
    elif magic == b"P5":
        pos += 1
        dtype = ">u2" if maxval > 255 else "u1"
        vals = np.frombuffer(data[pos:], dtype=dtype, count=w * h).astype(float)
    else:
        raise ValueError(f"not a grayscale PGM file: {magic!r}")
    if vals.size != w * h:
        raise ValueError("PGM pixel count does not match header")
    return vals.reshape(h, w)


def write_pgm(path, pixels, maxval=255):
    p = np.clip(np.rint(np.asarray(pixels, dtype=float)), 0, maxval).astype(int)
    h, w = p.shape
    lines = [f"P2\n{w} {h}\n{maxval}\n"] + [" ".join(map(str, row)) + "\n" for row in p]
    with open(path, "w") as fh:
        fh.writelines(lines)


def read_sphere_grid(path):
    grid = np.loadtxt(path, dtype=float)
    if grid.shape != (180, 360):
        raise ValueError(f"sphere grid file must hold 180 x 360 numbers, got {grid.shape}")
    return grid


def check_compatible(a, b):
    if a.manifold != b.manifold:
        raise ManifoldMismatchError(f"{a.manifold!r} vs {b.manifold!r}")
    if a.degree != b.degree:
        raise ManifoldMismatchError(f"degree {a.degree} vs {b.degree}")


__all__ = [
    "SpectralMeasure", "uniform_measure", "from_torus_image", "from_sphere_grid",
    "gaussian_mixture_torus", "so3_doughnut", "empirical_coefficients",
    "curve_line_coefficients", "read_pgm", "write_pgm", "read_sphere_grid",
    "sphere_grid_points", "torus_segment_coefficients",
]
