"""Wigner-D functions on SO(3), scaled by sqrt(2k+1) to be Haar-orthonormal.

Index (k, l, l') with l, l' in -k..k, ordered lexicographically. With the
ZYZ factorization x = R_z(a) R_y(b) R_z(g),

    phi_{k,l,l'}(x) = sqrt(2k+1) e^{-i l a} d^k_{l l'}(b) e^{-i l' g},

where d^k(b) = exp(-i b J_y) is computed from a one-off eigendecomposition
of J_y (exact phases, no factorial sums). Euler angles come from the
quaternion of x, which stays well conditioned at b = 0 and b = pi.

Gradients use left-invariant derivatives: d/dt D(x exp(t E_j)) = D(x) (-i J_j).
"""

from functools import lru_cache

import numpy as np

from ..manifolds import hat, quat_from_matrix


@lru_cache(maxsize=None)
def angular_momentum(k):
    """(J_x, J_y, J_z) for spin k in the basis m = -k..k."""
    m = np.arange(-k, k + 1, dtype=float)
    jp = np.zeros((2 * k + 1, 2 * k + 1))
    for a in range(2 * k):
        mm = m[a]
        jp[a + 1, a] = np.sqrt(k * (k + 1) - mm * (mm + 1))
    jm = jp.T
    jx = 0.5 * (jp + jm)
    jy = (jp - jm) / 2j
    jz = np.diag(m).astype(complex)
    return jx.astype(complex), jy, jz


@lru_cache(maxsize=None)
def _jy_eig(k):
    _, jy, _ = angular_momentum(k)
    mu, v = np.linalg.eigh(jy)
    return np.round(mu), v


def wigner_small_d(k, beta):
    """d^k(beta) for an array of angles, shape (..., 2k+1, 2k+1)."""
    beta = np.asarray(beta, dtype=float)
    mu, v = _jy_eig(k)
    ph = np.exp(-1j * beta[..., None] * mu)
    d = np.einsum("ab,...b,cb->...ac", v, ph, np.conj(v))
    return d.real


def euler_zyz(x):
    """Angles (alpha, beta, gamma) with x = R_z(alpha) R_y(beta) R_z(gamma)."""
    q = quat_from_matrix(x)
    w, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    s = 2 * np.arctan2(qz, w)
    t = 2 * np.arctan2(-qx, qy)
    beta = 2 * np.arctan2(np.hypot(qx, qy), np.hypot(w, qz))
    return 0.5 * (s + t), beta, 0.5 * (s - t)


def wigner_D(k, x):
    """Unnormalized D^k(x), shape (..., 2k+1, 2k+1)."""
    a, b, g = euler_zyz(np.asarray(x, dtype=float))
    m = np.arange(-k, k + 1)
    ea = np.exp(-1j * a[..., None] * m)
    eg = np.exp(-1j * g[..., None] * m)
    return ea[..., :, None] * wigner_small_d(k, b) * eg[..., None, :]


def block_offset(k):
    # sum_{j<k} (2j+1)^2
    return k * (2 * k - 1) * (2 * k + 1) // 3


class SO3Basis:
    # tangent metric <xA, xB> = tr(A^T B)/8 gives grad = x hat(4 c)
    grad_scale = 4.0

    def __init__(self, manifold):
        self.manifold = manifold

    def frequencies(self, r):
        return [(k, l, lp) for k in range(r + 1) for l in range(-k, k + 1) for lp in range(-k, k + 1)]

    def size(self, r):
        return (r + 1) * (2 * r + 1) * (2 * r + 3) // 3

    def degree_of(self, idx):
        return idx[0]

    def check_index(self, idx):
        return len(idx) == 3 and idx[0] >= 0 and abs(idx[1]) <= idx[0] and abs(idx[2]) <= idx[0]

    def zero_index(self):
        return (0, 0, 0)

    def zero_pos(self, r):
        return 0

    def eigenvalue(self, idx):
        k = idx[0]
        return float(k * (k + 1))

    def degrees(self, r):
        return np.repeat(np.arange(r + 1), (2 * np.arange(r + 1) + 1) ** 2)

    def alpha(self, r):
        k = self.degrees(r).astype(float)
        a = 1.0 / ((2 * k - 1) * (2 * k + 1) ** 2 * (2 * k + 3))
        a[0] = np.pi / 8 - 1.0 / 3.0
        return a

    def sup_bound(self, r):
        return np.sqrt(2 * self.degrees(r) + 1.0)

    def _blocks(self, x, r):
        x = np.asarray(x, dtype=float)
        a, b, g = euler_zyz(x)
        for k in range(r + 1):
            m = np.arange(-k, k + 1)
            ea = np.exp(-1j * a[..., None] * m)
            eg = np.exp(-1j * g[..., None] * m)
            dk = ea[..., :, None] * wigner_small_d(k, b) * eg[..., None, :]
            yield k, np.sqrt(2 * k + 1.0) * dk

    def evaluate(self, x, r):
        x = np.asarray(x, dtype=float)
        parts = [blk.reshape(x.shape[:-2] + (-1,)) for _, blk in self._blocks(x, r)]
        return np.concatenate(parts, axis=-1)

    def gradient(self, x, r):
        x = np.asarray(x, dtype=float)
        out = []
        for k, blk in self._blocks(x, r):
            gens = angular_momentum(k)
            c = np.stack([blk @ (-1j * jj) for jj in gens], axis=-1)  # (..., n, n, 3)
            c = c.reshape(x.shape[:-2] + (-1, 3))
            om = hat(self.grad_scale * c.real) + 1j * hat(self.grad_scale * c.imag)
            out.append(x[..., None, :, :] @ om)
        return np.concatenate(out, axis=-3)

    def analysis(self, x, r, weights=None):
        x = np.asarray(x, dtype=float).reshape(-1, 3, 3)
        n = x.shape[0]
        w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
        parts = [np.einsum("i,iab->ab", w, np.conj(blk)).ravel() for _, blk in self._blocks(x, r)]
        return np.concatenate(parts)

    def grad_contract(self, x, r, c):
        x = np.asarray(x, dtype=float).reshape(-1, 3, 3)
        c = np.asarray(c)
        om = np.zeros((x.shape[0], 3))
        for k, blk in self._blocks(x, r):
            n = 2 * k + 1
            ck = c[block_offset(k):block_offset(k) + n * n].reshape(n, n)
            if not np.any(ck):
                continue
            for j, jj in enumerate(angular_momentum(k)):
                b = (-1j * jj) @ ck.T
                om[:, j] += np.real(np.einsum("ilp,pl->i", blk, b))
        return x @ hat(self.grad_scale * om)
