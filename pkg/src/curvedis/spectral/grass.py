"""Eigenfunctions of G₂,₄ lifted to the double cover S² x S².

For lambda = (l1, l2) with l1 >= l2 >= 0 the eigenspace is spanned by the
products Y_j^a(u) Y_j'^b(v) with (j, j') = (l1 + l2, l1 - l2), plus the
swapped pair (l1 - l2, l1 + l2) when l2 > 0. These have j + j' even, so they
are invariant under (u, v) -> (-u, -v), and products of orthonormal real
harmonics are already orthonormal, no Gram-Schmidt needed. The space
spanned for lambda_1 + lambda_2 <= r is Pi_r (max(j, j') <= r).

Index (l1, l2, l) with l = 1..mult(lambda) where
mult(lambda) = eta(l2) (2 l1 + 2 l2 + 1)(2 l1 - 2 l2 + 1); within an
eigenspace l runs over the first branch, then the swapped one, and inside a
branch over (a, b) row-major in the sphere index order.
"""

import numpy as np

from .sphere import SphereBasis


def multiplicity(l1, l2):
    eta = 1 if l2 == 0 else 2
    return eta * (2 * (l1 + l2) + 1) * (2 * (l1 - l2) + 1)


def z_count(l1, l2):
    """Z(lambda) = (1 + l1 + l2) eta(l2); smaller than :func:`multiplicity` whenever l1 > 0."""
    return (1 + l1 + l2) * (1 if l2 == 0 else 2)


def lambdas(r):
    return [(l1, l2) for l1 in range(r + 1) for l2 in range(0, min(l1, r - l1) + 1)]


def _branches(l1, l2):
    j, jp = l1 + l2, l1 - l2
    return [(j, jp)] if l2 == 0 else [(j, jp), (jp, j)]


class GrassBasis:
    def __init__(self, manifold):
        self.manifold = manifold
        self._sphere = SphereBasis(None)
        self._cache = {}

    def _tables(self, r):
        if r not in self._cache:
            idx, iu, iv, lam = [], [], [], []
            for l1, l2 in lambdas(r):
                l = 0
                for j, jp in _branches(l1, l2):
                    for a in range(2 * j + 1):
                        for b in range(2 * jp + 1):
                            l += 1
                            idx.append((l1, l2, l))
                            iu.append(j * j + a)
                            iv.append(jp * jp + b)
                            lam.append((l1, l2))
            self._cache[r] = (idx, np.array(iu), np.array(iv), np.array(lam, dtype=float))
        return self._cache[r]

    def frequencies(self, r):
        return list(self._tables(r)[0])

    def size(self, r):
        return len(self._tables(r)[0])

    def degree_of(self, idx):
        return idx[0] + idx[1]

    def check_index(self, idx):
        if len(idx) != 3:
            return False
        l1, l2, l = idx
        return l1 >= l2 >= 0 and 1 <= l <= multiplicity(l1, l2)

    def zero_index(self):
        return (0, 0, 1)

    def zero_pos(self, r):
        return 0

    def eigenvalue(self, idx):
        l1, l2 = idx[0], idx[1]
        return float(4 * (l1 * l1 + l2 * l2 + l1))

    def component_degrees(self, idx):
        """(j, j', a, b) of the tensor factor behind an index."""
        l1, l2, l = idx
        l -= 1
        for j, jp in _branches(l1, l2):
            size = (2 * j + 1) * (2 * jp + 1)
            if l < size:
                return j, jp, l // (2 * jp + 1), l % (2 * jp + 1)
            l -= size
        raise IndexError(idx)

    def alpha(self, r):
        lam = self._tables(r)[3]
        return (1.0 + lam[:, 0] ** 2 + lam[:, 1] ** 2) ** (-2.5)

    def sup_bound(self, r):
        _, iu, iv, _ = self._tables(r)
        ju = np.floor(np.sqrt(iu))
        jv = np.floor(np.sqrt(iv))
        return np.sqrt((2 * ju + 1) * (2 * jv + 1))

    def evaluate(self, x, r):
        x = np.asarray(x, dtype=float)
        _, iu, iv, _ = self._tables(r)
        yu = self._sphere.evaluate(x[..., 0, :], r)
        yv = self._sphere.evaluate(x[..., 1, :], r)
        return yu[..., iu] * yv[..., iv]

    def gradient(self, x, r):
        x = np.asarray(x, dtype=float)
        _, iu, iv, _ = self._tables(r)
        yu = self._sphere.evaluate(x[..., 0, :], r)
        yv = self._sphere.evaluate(x[..., 1, :], r)
        gu = self._sphere.gradient(x[..., 0, :], r)
        gv = self._sphere.gradient(x[..., 1, :], r)
        return np.stack([gu[..., iu, :] * yv[..., iv, None], yu[..., iu, None] * gv[..., iv, :]], axis=-2)

    def analysis(self, x, r, weights=None):
        x = np.asarray(x, dtype=float).reshape(-1, 2, 3)
        n = x.shape[0]
        w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
        _, iu, iv, _ = self._tables(r)
        yu = self._sphere.evaluate(x[:, 0], r)
        yv = self._sphere.evaluate(x[:, 1], r)
        full = (yu * w[:, None]).T @ yv
        return full[iu, iv]

    def grad_contract(self, x, r, c):
        x = np.asarray(x, dtype=float).reshape(-1, 2, 3)
        _, iu, iv, _ = self._tables(r)
        s = (r + 1) ** 2
        cm = np.zeros((s, s))
        np.add.at(cm, (iu, iv), np.real(c))
        yu = self._sphere.evaluate(x[:, 0], r)
        yv = self._sphere.evaluate(x[:, 1], r)
        gu = self._sphere.grad_contract(x[:, 0], r, yv @ cm.T)
        gv = self._sphere.grad_contract(x[:, 1], r, yu @ cm)
        return np.stack([gu, gv], axis=1)
