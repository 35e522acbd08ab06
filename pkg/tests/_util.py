"""Shared helpers for the test suite: independent oracles and instance builders."""

import numpy as np

from nmfkit import linalg
from nmfkit.solvers import FactorPair


def frobenius_oracle(V, W, H):
    """Triple-loop evaluation of ||V - W H||_F^2, independent of BLAS."""
    n, m = V.shape
    r = W.shape[1]
    total = 0.0
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(r):
                acc += W[i, k] * H[k, j]
            d = V[i, j] - acc
            total += d * d
    return total


def random_instance(seed, n=10, m=12, r=3, normalized=True):
    """Random nonnegative V plus a strictly positive starting pair."""
    rng = np.random.default_rng(seed)
    V = rng.uniform(0.5, 1.5, size=(n, m))
    if normalized:
        V = linalg.normalize_columns(V)
    W = linalg.normalize_columns(rng.uniform(0.1, 1.0, size=(n, r)))
    H = rng.uniform(0.1, 1.0, size=(r, m))
    return V, FactorPair(W, H)


def planted_instance(seed, n=4, m=6, r=2):
    """Exactly factorizable V = W* H* with strictly positive factors."""
    rng = np.random.default_rng(seed)
    W = linalg.normalize_columns(rng.uniform(0.5, 1.5, size=(n, r)))
    H = rng.uniform(0.5, 1.5, size=(r, m))
    return W @ H, FactorPair(W, H)


def fd_gradient_h(V, W, H, step=1e-5):
    """Central finite-difference gradient of the misfit with respect to H."""
    G = np.zeros_like(H)
    for i in range(H.shape[0]):
        for j in range(H.shape[1]):
            Hp = H.copy()
            Hp[i, j] += step
            Hm = H.copy()
            Hm[i, j] -= step
            G[i, j] = (
                linalg.frobenius_residual(V, W, Hp)
                - linalg.frobenius_residual(V, W, Hm)
            ) / (2.0 * step)
    return G
