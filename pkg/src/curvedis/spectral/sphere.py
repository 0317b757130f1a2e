"""Real spherical harmonics on S², orthonormal for the normalized surface measure.

Index (k, l) with l = 1..2k+1 stands for the order m = l - k - 1:

* m < 0: sqrt(2) p_k^{|m|}(z) Im (x + i y)^{|m|}   (sine type)
* m = 0: p_k^0(z)                                   (zonal)
* m > 0: sqrt(2) p_k^m(z) Re (x + i y)^m            (cosine type)

where p_k^m = sqrt((2k+1)(k-m)!/(k+m)!) d^m P_k / dz^m is the normalized
associated Legendre function with the sin^m factor removed. Written this way
every harmonic is a polynomial in Cartesian coordinates, which gives a
gradient without pole singularities. Flat index: k^2 + l - 1.
"""

import numpy as np


def _legendre_columns(z, m, r, want_deriv):
    """p_k^m(z) for k = m..r as columns; optionally d/dz as well."""
    n = z.shape[0]
    cols = np.empty((n, r - m + 1))
    dcols = np.empty((n, r - m + 1)) if want_deriv else None
    # sectoral seed
    pmm = 1.0
    for j in range(1, m + 1):
        pmm *= np.sqrt((2 * j + 1) / (2.0 * j))
    cols[:, 0] = pmm
    if want_deriv:
        dcols[:, 0] = 0.0
    if r > m:
        f = np.sqrt(2 * m + 3.0)
        cols[:, 1] = f * z * pmm
        if want_deriv:
            dcols[:, 1] = f * pmm
    for k in range(m + 2, r + 1):
        a = np.sqrt((4.0 * k * k - 1) / (k * k - m * m))
        b = np.sqrt((2 * k + 1) * ((k - 1) ** 2 - m * m) / ((2 * k - 3.0) * (k * k - m * m)))
        j = k - m
        cols[:, j] = a * z * cols[:, j - 1] - b * cols[:, j - 2]
        if want_deriv:
            dcols[:, j] = a * (cols[:, j - 1] + z * dcols[:, j - 1]) - b * dcols[:, j - 2]
    return cols, dcols


def _trig_powers(x, y, r):
    """Re and Im of (x + i y)^m for m = 0..r."""
    w = x + 1j * y
    pw = np.empty((r + 1,) + x.shape, dtype=complex)
    pw[0] = 1.0
    for m in range(1, r + 1):
        pw[m] = pw[m - 1] * w
    return pw.real, pw.imag


def flat_index(k, m):
    return k * k + k + m


class SphereBasis:
    def __init__(self, manifold):
        self.manifold = manifold

    def frequencies(self, r):
        return [(k, l) for k in range(r + 1) for l in range(1, 2 * k + 2)]

    def size(self, r):
        return (r + 1) ** 2

    def degree_of(self, idx):
        return idx[0]

    def check_index(self, idx):
        return len(idx) == 2 and idx[0] >= 0 and 1 <= idx[1] <= 2 * idx[0] + 1

    def zero_index(self):
        return (0, 1)

    def zero_pos(self, r):
        return 0

    def eigenvalue(self, idx):
        k = idx[0]
        return float(k * (k + 1))

    def degrees(self, r):
        return np.repeat(np.arange(r + 1), 2 * np.arange(r + 1) + 1)

    def alpha(self, r):
        k = self.degrees(r).astype(float)
        a = 2.0 / ((2 * k - 1) * (2 * k + 1) * (2 * k + 3))
        a[0] = 1.0 / 3.0
        return a

    def sup_bound(self, r):
        return np.sqrt(2 * self.degrees(r) + 1.0)

    # -- core evaluation ------------------------------------------------
    def evaluate(self, x, r):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        pts = x.reshape(-1, 3)
        out = np.empty((pts.shape[0], self.size(r)))
        re, im = _trig_powers(pts[:, 0], pts[:, 1], r)
        ks = np.arange(r + 1)
        for m in range(r + 1):
            cols, _ = _legendre_columns(pts[:, 2], m, r, False)
            kk = ks[m:]
            if m == 0:
                out[:, flat_index(kk, 0)] = cols
            else:
                out[:, flat_index(kk, m)] = np.sqrt(2.0) * cols * re[m][:, None]
                out[:, flat_index(kk, -m)] = np.sqrt(2.0) * cols * im[m][:, None]
        return out.reshape(shape + (self.size(r),))

    def _ambient_grad_parts(self, pts, m, re, im):
        """(d/dx, d/dy) of Re and Im (x+iy)^m."""
        if m == 0:
            z = np.zeros(pts.shape[0])
            return (z, z), (z, z)
        dre = (m * re[m - 1], -m * im[m - 1])
        dim = (m * im[m - 1], m * re[m - 1])
        return dre, dim

    def gradient(self, x, r):
        """Riemannian gradients, shape (..., F, 3)."""
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        pts = x.reshape(-1, 3)
        n = pts.shape[0]
        g = np.zeros((n, self.size(r), 3))
        re, im = _trig_powers(pts[:, 0], pts[:, 1], r)
        ks = np.arange(r + 1)
        for m in range(r + 1):
            cols, dcols = _legendre_columns(pts[:, 2], m, r, True)
            kk = ks[m:]
            if m == 0:
                g[:, flat_index(kk, 0), 2] = dcols
                continue
            s2 = np.sqrt(2.0)
            dre, dim = self._ambient_grad_parts(pts, m, re, im)
            for sign, val, dv in ((1, re[m], dre), (-1, im[m], dim)):
                idx = flat_index(kk, sign * m)
                g[:, idx, 0] = s2 * cols * dv[0][:, None]
                g[:, idx, 1] = s2 * cols * dv[1][:, None]
                g[:, idx, 2] = s2 * dcols * val[:, None]
        g -= np.sum(g * pts[:, None, :], axis=-1)[..., None] * pts[:, None, :]
        return g.reshape(shape + (self.size(r), 3))

    def analysis(self, x, r, weights=None):
        pts = np.asarray(x, dtype=float).reshape(-1, 3)
        n = pts.shape[0]
        w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
        out = np.empty(self.size(r))
        re, im = _trig_powers(pts[:, 0], pts[:, 1], r)
        ks = np.arange(r + 1)
        for m in range(r + 1):
            cols, _ = _legendre_columns(pts[:, 2], m, r, False)
            kk = ks[m:]
            if m == 0:
                out[flat_index(kk, 0)] = w @ cols
            else:
                out[flat_index(kk, m)] = np.sqrt(2.0) * ((w * re[m]) @ cols)
                out[flat_index(kk, -m)] = np.sqrt(2.0) * ((w * im[m]) @ cols)
        return out

    def grad_contract(self, x, r, c):
        """Re sum_k c_k grad Y_k(x_i); ``c`` is (F,) or per point (N, F)."""
        pts = np.asarray(x, dtype=float).reshape(-1, 3)
        c = np.real(np.asarray(c))
        per_point = c.ndim == 2
        n = pts.shape[0]
        amb = np.zeros((n, 3))
        re, im = _trig_powers(pts[:, 0], pts[:, 1], r)
        ks = np.arange(r + 1)
        s2 = np.sqrt(2.0)
        for m in range(r + 1):
            cols, dcols = _legendre_columns(pts[:, 2], m, r, True)
            kk = ks[m:]
            if m == 0:
                cm = c[..., flat_index(kk, 0)]
                q1 = np.sum(dcols * cm, axis=1) if per_point else dcols @ cm
                amb[:, 2] += q1
                continue
            dre, dim = self._ambient_grad_parts(pts, m, re, im)
            for sign, val, dv in ((1, re[m], dre), (-1, im[m], dim)):
                cm = c[..., flat_index(kk, sign * m)]
                if per_point:
                    q0 = np.sum(cols * cm, axis=1)
                    q1 = np.sum(dcols * cm, axis=1)
                else:
                    q0 = cols @ cm
                    q1 = dcols @ cm
                amb[:, 0] += s2 * q0 * dv[0]
                amb[:, 1] += s2 * q0 * dv[1]
                amb[:, 2] += s2 * q1 * val
        amb -= np.sum(amb * pts, axis=1)[:, None] * pts
        return amb
