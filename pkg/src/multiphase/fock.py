"""Sparse pure states of M bosonic modes in a truncated Fock space.

A state stores its support as an integer array of occupation vectors
(one row per basis element) next to a complex amplitude array. All
number operators are diagonal in this basis, so every expectation value
the package needs is a weighted sum over the stored rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import (
    CutoffError,
    DegenerateSuperpositionError,
    ModeMismatchError,
    NormalizationError,
    ResourceError,
)

PRUNE_THRESHOLD = 1e-15
NORM_TOL = 1e-12
DEGENERACY_THRESHOLD = 1e-10
DEFAULT_EPSILON = 1e-12
MAX_MODES = 16
MAX_SUPPORT = 10**7
MAX_CUTOFF = 4096

OCC_DTYPE = np.int32


@dataclass(frozen=True)
class TruncationReport:
    tail_mass: float
    cutoff_used: int


@dataclass(frozen=True, eq=False)
class SparseState:
    """Normalized multimode pure state with sparse support.

    ``occupations`` has shape ``(K, M)`` and ``amplitudes`` shape ``(K,)``.
    Rows are unique and every amplitude has magnitude at least
    ``PRUNE_THRESHOLD``. Both arrays are read-only.
    """

    occupations: np.ndarray
    amplitudes: np.ndarray
    cutoff: int

    def __post_init__(self):
        occ = self.occupations
        amps = self.amplitudes
        if occ.ndim != 2 or amps.ndim != 1 or occ.shape[0] != amps.shape[0]:
            raise ValueError("occupations must be (K, M) and amplitudes (K,)")
        if not 1 <= occ.shape[1] <= MAX_MODES:
            raise ResourceError(f"mode count {occ.shape[1]} outside [1, {MAX_MODES}]")
        if occ.shape[0] > MAX_SUPPORT:
            raise ResourceError(f"support {occ.shape[0]} exceeds {MAX_SUPPORT}")
        if occ.size and occ.min() < 0:
            raise ValueError("occupation numbers must be non-negative")
        if occ.size and occ.max() > self.cutoff:
            raise CutoffError(f"occupation {int(occ.max())} exceeds cutoff {self.cutoff}")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) >= NORM_TOL:
            raise NormalizationError(f"squared norm {norm2!r} differs from 1")
        occ.flags.writeable = False
        amps.flags.writeable = False

    @property
    def mode_count(self) -> int:
        return self.occupations.shape[1]

    @property
    def support_size(self) -> int:
        return self.occupations.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities)))

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {
            tuple(int(n) for n in row): complex(a)
            for row, a in zip(self.occupations, self.amplitudes)
        }

    def amplitude(self, occ: Sequence[int]) -> complex:
        """Amplitude at ``occ`` (zero off the support)."""
        occ = np.asarray(occ)
        if occ.shape != (self.mode_count,):
            raise ModeMismatchError(f"expected {self.mode_count} occupation entries")
        hit = np.flatnonzero(np.all(self.occupations == occ, axis=1))
        return complex(self.amplitudes[hit[0]]) if hit.size else 0j

    def marginal(self, mode: int) -> np.ndarray:
        """Photon-number distribution of one mode, indexed 0..cutoff."""
        _check_mode(self, mode)
        return np.bincount(
            self.occupations[:, mode], weights=self.probabilities, minlength=self.cutoff + 1
        )

    @classmethod
    def from_dict(cls, amplitudes: Mapping[Sequence[int], complex], cutoff: int | None = None) -> SparseState:
        if not amplitudes:
            raise ValueError("empty amplitude map")
        occ = np.array([tuple(k) for k in amplitudes], dtype=OCC_DTYPE)
        amps = np.array(list(amplitudes.values()), dtype=complex)
        if len({tuple(r) for r in occ.tolist()}) != len(occ):
            raise ValueError("duplicate occupation vectors")
        if cutoff is None:
            cutoff = int(occ.max())
        return _make(occ, amps, cutoff)


def _make(occ: np.ndarray, amps: np.ndarray, cutoff: int, renormalize: bool = False) -> SparseState:
    keep = np.abs(amps) >= PRUNE_THRESHOLD
    if not keep.all():
        occ, amps = occ[keep], amps[keep]
    if renormalize:
        amps = amps / np.sqrt(np.sum(np.abs(amps) ** 2))
    return SparseState(np.ascontiguousarray(occ, dtype=OCC_DTYPE), np.ascontiguousarray(amps), int(cutoff))


def _check_mode(state: SparseState, mode: int):
    if not 0 <= mode < state.mode_count:
        raise IndexError(f"mode {mode} out of range for {state.mode_count} modes")


def _merge(occ: np.ndarray, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum amplitudes that share an occupation vector."""
    uniq, inverse = np.unique(occ, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    merged = np.bincount(inverse, weights=amps.real, minlength=len(uniq)) + 1j * np.bincount(
        inverse, weights=amps.imag, minlength=len(uniq)
    )
    return uniq, merged


def fock_basis(occ: Sequence[int], cutoff: int | None = None) -> SparseState:
    """The basis state ``|occ>``; ``cutoff`` defaults to ``max(occ)``."""
    occ = np.asarray(occ, dtype=OCC_DTYPE).reshape(1, -1)
    if occ.shape[1] == 0:
        raise ValueError("an occupation vector needs at least one mode")
    if cutoff is None:
        cutoff = int(occ.max())
    if occ.max() > cutoff:
        raise CutoffError(f"occupation {occ.ravel().tolist()} exceeds cutoff {cutoff}")
    return SparseState(occ, np.ones(1, dtype=complex), int(cutoff))


def vacuum(mode_count: int = 1) -> SparseState:
    return fock_basis((0,) * mode_count)


def coherent_cutoff(mean: float, epsilon: float = DEFAULT_EPSILON) -> tuple[int, float]:
    """Smallest cutoff whose Poisson tail mass is at most ``epsilon``."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if mean == 0:
        return 0, 0.0
    lo = int(mean)
    # mean + 40 sigma + 60 covers any epsilon representable in double precision
    hi = int(mean + 40 * np.sqrt(mean) + 60)
    ns = np.arange(lo, hi + 1)
    tails = poisson.sf(ns, mean)
    ok = np.flatnonzero(tails <= epsilon)
    cutoff = int(ns[ok[0]]) if ok.size else hi
    if cutoff > MAX_CUTOFF:
        raise ResourceError(f"coherent amplitude needs cutoff {cutoff} > {MAX_CUTOFF}")
    return cutoff, float(poisson.sf(cutoff, mean))


def coherent_mode(alpha: complex, epsilon: float = DEFAULT_EPSILON) -> tuple[SparseState, TruncationReport]:
    """Truncated single-mode coherent state ``D(alpha)|0>``, renormalized."""
    alpha = complex(alpha)
    mean = abs(alpha) ** 2
    cutoff, tail = coherent_cutoff(mean, epsilon)
    if cutoff == 0:
        return vacuum(1), TruncationReport(0.0, 0)
    n = np.arange(cutoff + 1)
    log_mag = -mean / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    amps = np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n)
    state = _make(n.reshape(-1, 1), amps, cutoff, renormalize=True)
    return state, TruncationReport(tail, cutoff)


def superpose(terms: Iterable[tuple[complex, SparseState]]) -> tuple[SparseState, float]:
    """Normalized ``sum_k c_k |psi_k>``.

    Returns the state and the norm of the unnormalized sum, so that the
    normalization constant is ``1 / norm``. Terms with different cutoffs
    are embedded into the largest one.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("nothing to superpose")
    modes = {s.mode_count for _, s in terms}
    if len(modes) != 1:
        raise ModeMismatchError(f"terms have differing mode counts {sorted(modes)}")
    occ = np.concatenate([s.occupations for _, s in terms])
    amps = np.concatenate([complex(c) * s.amplitudes for c, s in terms])
    occ, amps = _merge(occ, amps)
    norm = float(np.sqrt(np.sum(np.abs(amps) ** 2)))
    if norm < DEGENERACY_THRESHOLD:
        raise DegenerateSuperpositionError(f"superposition norm {norm:.3g} is degenerate")
    cutoff = max(s.cutoff for _, s in terms)
    return _make(occ, amps / norm, cutoff, renormalize=True), norm


def tensor(states: Sequence[SparseState]) -> SparseState:
    """Tensor product; factor modes are concatenated in order."""
    states = list(states)
    if not states:
        raise ValueError("empty tensor product")
    total_modes = sum(s.mode_count for s in states)
    if total_modes > MAX_MODES:
        raise ResourceError(f"{total_modes} modes exceed the cap of {MAX_MODES}")
    occ, amps = states[0].occupations, states[0].amplitudes
    for s in states[1:]:
        size = occ.shape[0] * s.support_size
        if size > MAX_SUPPORT:
            raise ResourceError(f"product support {size} exceeds {MAX_SUPPORT}")
        amps = np.multiply.outer(amps, s.amplitudes).ravel()
        occ = np.concatenate(
            [np.repeat(occ, s.support_size, axis=0), np.tile(s.occupations, (occ.shape[0], 1))], axis=1
        )
        keep = np.abs(amps) >= PRUNE_THRESHOLD
        occ, amps = occ[keep], amps[keep]
    return _make(occ, amps, max(s.cutoff for s in states))


def overlap(a: SparseState, b: SparseState) -> complex:
    """Inner product ``<a|b>``."""
    if a.mode_count != b.mode_count:
        raise ModeMismatchError(f"{a.mode_count} vs {b.mode_count} modes")
    _, inverse = np.unique(np.concatenate([a.occupations, b.occupations]), axis=0, return_inverse=True)
    inverse = inverse.ravel()
    ia, ib = inverse[: a.support_size], inverse[a.support_size :]
    # indices are unique within each state, so a dense scatter is exact
    bra = np.zeros(inverse.max() + 1, dtype=complex)
    bra[ia] = a.amplitudes
    return complex(np.sum(np.conj(bra[ib]) * b.amplitudes))


def number_moments(state: SparseState, i: int, j: int) -> tuple[float, float, float, float]:
    """``(<n_i>, <n_j>, <n_i n_j>, Cov(n_i, n_j))``; ``i == j`` gives the variance."""
    _check_mode(state, i)
    _check_mode(state, j)
    p = state.probabilities
    ni = state.occupations[:, i].astype(float)
    nj = state.occupations[:, j].astype(float)
    mean_i = float(np.sum(p * ni))
    mean_j = float(np.sum(p * nj))
    product = float(np.sum(p * (ni * nj)))
    return mean_i, mean_j, product, product - mean_i * mean_j


def mean_numbers(state: SparseState) -> np.ndarray:
    return state.probabilities @ state.occupations.astype(float)


def covariance_matrix(state: SparseState) -> np.ndarray:
    """Matrix of ``Cov(n_i, n_j)`` assembled from :func:`number_moments`."""
    m = state.mode_count
    cov = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            cov[i, j] = cov[j, i] = number_moments(state, i, j)[3]
    return cov


def apply_phase(state: SparseState, theta: Sequence[float]) -> SparseState:
    """Apply ``exp(i sum_j theta_j n_j)``."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (state.mode_count,):
        raise ModeMismatchError(f"theta has length {theta.size}, state has {state.mode_count} modes")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    phase = np.exp(1j * (state.occupations @ theta))
    return SparseState(state.occupations, state.amplitudes * phase, state.cutoff)


def total_mean(state: SparseState) -> float:
    return float(np.sum(mean_numbers(state)))
