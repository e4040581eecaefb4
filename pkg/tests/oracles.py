"""Independent reference computations used to freeze expected values.

Everything here works on dense state vectors over the full
``(cutoff+1)**M`` grid with explicit number-operator matrices, sharing no
code with the sparse implementation.
"""

import math

import numpy as np


def dense(state):
    """Dense vector over the full occupation grid (row-major in the modes)."""
    dim = state.cutoff + 1
    vec = np.zeros(dim**state.mode_count, dtype=complex)
    for occ, amp in state.as_dict().items():
        vec[np.ravel_multi_index(occ, (dim,) * state.mode_count)] += amp
    return vec


def number_op(mode, mode_count, cutoff):
    """Diagonal of n_mode as a Kronecker product of single-mode diagonals."""
    n = np.arange(cutoff + 1, dtype=float)
    one = np.ones(cutoff + 1)
    out = np.ones(1)
    for m in range(mode_count):
        out = np.kron(out, n if m == mode else one)
    return out


def dense_cov(vec, ops):
    """4 * Cov matrix of diagonal operators ``ops`` in the pure state ``vec``."""
    p = np.abs(vec) ** 2
    means = [np.sum(p * o) for o in ops]
    k = len(ops)
    f = np.empty((k, k))
    for a in range(k):
        for b in range(k):
            f[a, b] = 4 * (np.sum(p * ops[a] * ops[b]) - means[a] * means[b])
    return f


def generator_ops(gens, mode_count, cutoff):
    nops = [number_op(m, mode_count, cutoff) for m in range(mode_count)]
    return [sum(c * n for c, n in zip(g.coeffs, nops)) for g in gens]


def poisson_moments(alpha):
    """Mean and variance of n for a coherent state: both |alpha|^2."""
    x = abs(alpha) ** 2
    return x, x


def coherent_amplitudes(alpha, nmax):
    return np.array([math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n)) for n in range(nmax + 1)])


def random_sparse_state(rng, max_modes=4, max_cutoff=6, max_support=40):
    from multiphase.fock import SparseState

    m = int(rng.integers(1, max_modes + 1))
    c = int(rng.integers(1, max_cutoff + 1))
    grid = np.array(np.meshgrid(*[np.arange(c + 1)] * m, indexing="ij")).reshape(m, -1).T
    k = int(rng.integers(2, min(len(grid), max_support) + 1))
    idx = rng.choice(len(grid), k, replace=False)
    amps = rng.normal(size=k) + 1j * rng.normal(size=k)
    amps /= np.linalg.norm(amps)
    return SparseState.from_dict({tuple(int(v) for v in grid[i]): amps[j] for j, i in enumerate(idx)}, cutoff=c)
