"""Numba kernels for the 2-D graph layout.

Single-threaded on purpose: the stochastic attraction/repulsion loop must be
bit-reproducible for a fixed seed, so edges are visited in a fixed order and
the RNG is a self-contained xorshift64* driven from the caller's seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MULT = np.uint64(0x2545F4914F6CDD1D)
_SHIFT32 = np.uint64(32)


@njit(cache=True, inline="always")
def _rand_u32(state):
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    state[0] = x
    return np.uint32((x * _MULT) >> _SHIFT32)


@njit(cache=True, inline="always")
def _clip(val):
    if val > 4.0:
        return 4.0
    if val < -4.0:
        return -4.0
    return val


@njit(cache=True)
def smooth_knn(knn_dists, target, n_iter=64, tol=1e-5):
    """Per-point (sigma, rho) so that sum_j exp(-max(0, d_ij - rho_i)/sigma_i)
    equals ``target``. rho_i is the distance to the nearest neighbor (self
    already excluded from knn_dists rows, which are sorted ascending)."""
    m, k = knn_dists.shape
    sigmas = np.empty(m, dtype=np.float64)
    rhos = np.empty(m, dtype=np.float64)
    for i in range(m):
        rho = knn_dists[i, 0]
        rhos[i] = rho
        lo = 0.0
        hi = np.inf
        mid = 1.0
        for _ in range(n_iter):
            psum = 0.0
            for j in range(k):
                d = knn_dists[i, j] - rho
                if d > 0.0:
                    psum += np.exp(-d / mid)
                else:
                    psum += 1.0
            if abs(psum - target) < tol:
                break
            if psum > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                if hi == np.inf:
                    mid *= 2.0
                else:
                    mid = (lo + hi) / 2.0
        sigmas[i] = max(mid, 1e-12)
    return sigmas, rhos


def make_rng_state(seed: int) -> np.ndarray:
    """64-bit xorshift state from a user seed; never zero."""
    mixed = (int(seed) * 2654435761 + 0x9E3779B9) % (2**64)
    return np.array([mixed or 1], dtype=np.uint64)


@njit(cache=True)
def optimize_layout(emb, head, tail, n_epochs, epochs_per_sample, a, b,
                    state, gamma=1.0, initial_alpha=1.0, negative_sample_rate=5.0):
    """SGD over graph edges: attract endpoints of sampled edges, repulse
    against uniformly sampled negative vertices.

    Exactly coincident pairs get zero gradient in both branches, so duplicate
    points stay coincident through the whole layout (degenerate inputs map to
    a single dot instead of being scattered).
    """
    n_vertices = emb.shape[0]
    dim = emb.shape[1]
    alpha = initial_alpha

    eps_neg = epochs_per_sample / negative_sample_rate
    next_neg = eps_neg.copy()
    next_pos = epochs_per_sample.copy()

    for n in range(n_epochs):
        for i in range(epochs_per_sample.shape[0]):
            if next_pos[i] <= n:
                j = head[i]
                k = tail[i]
                dist2 = 0.0
                for d in range(dim):
                    diff = emb[j, d] - emb[k, d]
                    dist2 += diff * diff
                if dist2 > 0.0:
                    gc = (-2.0 * a * b * dist2 ** (b - 1.0)) / (a * dist2 ** b + 1.0)
                    for d in range(dim):
                        g = _clip(gc * (emb[j, d] - emb[k, d]))
                        emb[j, d] += g * alpha
                        emb[k, d] -= g * alpha
                next_pos[i] += epochs_per_sample[i]

                n_neg = int((n - next_neg[i]) / eps_neg[i])
                for _ in range(n_neg):
                    other = int(_rand_u32(state) % np.uint32(n_vertices))
                    if other == j:
                        continue
                    dist2 = 0.0
                    for d in range(dim):
                        diff = emb[j, d] - emb[other, d]
                        dist2 += diff * diff
                    if dist2 > 0.0:
                        gc = (2.0 * gamma * b) / ((0.001 + dist2) * (a * dist2 ** b + 1.0))
                        for d in range(dim):
                            g = _clip(gc * (emb[j, d] - emb[other, d]))
                            emb[j, d] += g * alpha
                next_neg[i] += n_neg * eps_neg[i]
        alpha = initial_alpha * (1.0 - (n + 1.0) / n_epochs)
    return emb
