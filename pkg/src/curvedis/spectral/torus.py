"""Fourier basis e^{2 pi i <k, x>} on the flat torus.

Frequencies are ordered lexicographically over k in [-r, r]^d (last axis
fastest), so the flat index of k is the row-major index of k + r.
All transforms exploit the tensor structure, costing O(N r^d) per call.
"""

import itertools

import numpy as np

TWO_PI = 2.0 * np.pi


class TorusBasis:
    def __init__(self, manifold):
        self.manifold = manifold
        self.d = manifold.d

    def frequencies(self, r):
        return [tuple(k) for k in itertools.product(range(-r, r + 1), repeat=self.d)]

    def size(self, r):
        return (2 * r + 1) ** self.d

    def degree_of(self, idx):
        return max(abs(k) for k in idx) if idx else 0

    def check_index(self, idx):
        return len(idx) == self.d and all(int(k) == k for k in idx)

    def zero_index(self):
        return (0,) * self.d

    def zero_pos(self, r):
        return (self.size(r) - 1) // 2

    def eigenvalue(self, idx):
        return 4 * np.pi ** 2 * float(sum(k * k for k in idx))

    def alpha(self, r):
        ks = np.arange(-r, r + 1)
        sq = np.zeros((2 * r + 1,) * self.d)
        for j in range(self.d):
            shape = [1] * self.d
            shape[j] = -1
            sq = sq + (ks ** 2).reshape(shape)
        return ((1.0 + sq) ** (-(self.d + 1) / 2.0)).ravel()

    def sup_bound(self, r):
        return np.ones(self.size(r))

    def _factors(self, x, r):
        ks = np.arange(-r, r + 1)
        return [np.exp(1j * TWO_PI * x[..., j, None] * ks) for j in range(self.d)]

    def _kron_rows(self, mats):
        out = mats[0]
        for m in mats[1:]:
            out = (out[..., :, None] * m[..., None, :]).reshape(out.shape[:-1] + (-1,))
        return out

    def evaluate(self, x, r):
        x = np.asarray(x, dtype=float)
        return self._kron_rows(self._factors(x, r))

    def gradient(self, x, r):
        vals = self.evaluate(x, r)
        k = np.array(self.frequencies(r), dtype=float)
        return 1j * TWO_PI * vals[..., None] * k

    def analysis(self, x, r, weights=None):
        """sum_i w_i conj(phi_k(x_i)) with w_i = 1/N by default."""
        x = np.asarray(x, dtype=float).reshape(-1, self.d)
        n = x.shape[0]
        w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
        facs = [np.conj(f) for f in self._factors(x, r)]
        if self.d == 1:
            return w @ facs[0]
        head = self._kron_rows(facs[:-1]) * w[:, None]
        return (head.T @ facs[-1]).ravel()

    def grad_contract(self, x, r, c):
        """Re sum_k c_k grad phi_k(x_i), one ambient vector per point."""
        x = np.asarray(x, dtype=float).reshape(-1, self.d)
        facs = self._factors(x, r)
        ks = np.arange(-r, r + 1)
        side = 2 * r + 1
        c = np.asarray(c).reshape((side,) * self.d)
        out = np.empty(x.shape)
        if self.d == 1:
            out[:, 0] = np.real(facs[0] @ (1j * TWO_PI * ks * c))
            return out
        head = self._kron_rows(facs[:-1])
        last = facs[-1]
        for j in range(self.d):
            shape = [1] * self.d
            shape[j] = -1
            cj = (c * (1j * TWO_PI * ks).reshape(shape)).reshape(-1, side)
            out[:, j] = np.real(np.sum((head @ cj) * last, axis=1))
        return out
