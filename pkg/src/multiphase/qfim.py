"""Phase generators and the quantum Fisher information matrix of pure probes.

Every generator is a real combination of number operators, so the set is
commuting by construction and the QFIM of ``U(phi)|psi>`` reduces to four
times the generator covariance matrix. :func:`qfim_fd_oracle` recomputes
the same matrix from finite-difference derivative states, without using
that reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AsymmetricStateError, ModeMismatchError, StepRangeError
from .fock import SparseState, apply_phase, covariance_matrix

OFF_BLOCK_TOL = 1e-8
SYMMETRY_TOL = 1e-12
PSD_FLOOR = 1e-10
DEFAULT_STEP = 1e-4

ANALYTIC = "analytic-covariance"
FD_ORACLE = "finite-difference-oracle"


@dataclass(frozen=True)
class Generator:
    """``sum_j coeffs[j] * n_j``."""

    coeffs: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs or not all(np.isfinite(coeffs)):
            raise ValueError("generator coefficients must be finite and non-empty")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def mode_count(self) -> int:
        return len(self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs)


@dataclass(frozen=True, eq=False)
class Qfim:
    matrix: np.ndarray
    labels: tuple[str, ...] = ()
    source: str = ANALYTIC

    def __post_init__(self):
        f = np.array(self.matrix, dtype=float)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValueError("QFIM must be square")
        scale = max(1.0, float(np.max(np.abs(f)))) if f.size else 1.0
        if np.max(np.abs(f - f.T), initial=0.0) > SYMMETRY_TOL * scale:
            raise ValueError("QFIM is not symmetric")
        if f.size and np.linalg.eigvalsh(f).min() < -PSD_FLOOR * scale:
            raise ValueError("QFIM is not positive semidefinite")
        f.flags.writeable = False
        object.__setattr__(self, "matrix", f)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"phi{i + 1}" for i in range(f.shape[0])))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def imaging_generators(d: int) -> list[Generator]:
    """``n_i`` for the d probe modes; the reference mode ``d + 1`` has zero phase."""
    if d < 1:
        raise ValueError("d must be at least 1")
    gens = []
    for i in range(d):
        c = np.zeros(d + 1)
        c[i] = 1.0
        gens.append(Generator(tuple(c), f"n{i + 1}"))
    return gens


def parallel_generators(d: int) -> list[Generator]:
    """Difference generators for each interferometer first, then sum generators.

    Interferometer ``i`` uses modes ``2i`` and ``2i + 1`` (0-based).
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    minus, plus = [], []
    for i in range(d):
        cm = np.zeros(2 * d)
        cp = np.zeros(2 * d)
        cm[2 * i], cm[2 * i + 1] = 0.5, -0.5
        cp[2 * i], cp[2 * i + 1] = 0.5, 0.5
        minus.append(Generator(tuple(cm), f"O{i + 1}-"))
        plus.append(Generator(tuple(cp), f"O{i + 1}+"))
    return minus + plus


def _coeff_matrix(state: SparseState, gens: Sequence[Generator]) -> np.ndarray:
    if not gens:
        raise ValueError("at least one generator is required")
    for g in gens:
        if g.mode_count != state.mode_count:
            raise ModeMismatchError(
                f"generator {g.label or g.coeffs} acts on {g.mode_count} modes, state has {state.mode_count}"
            )
    return np.array([g.coeffs for g in gens])


def qfim_covariance(state: SparseState, gens: Sequence[Generator]) -> Qfim:
    """``F_lm = 4 Cov(O_l, O_m)`` from the pairwise number covariances."""
    g = _coeff_matrix(state, gens)
    f = 4.0 * g @ covariance_matrix(state) @ g.T
    f = 0.5 * (f + f.T)
    return Qfim(f, tuple(x.label for x in gens), ANALYTIC)


def _derivative(state: SparseState, coeffs: np.ndarray, step: float) -> np.ndarray:
    fwd = apply_phase(state, step * coeffs).amplitudes
    bwd = apply_phase(state, -step * coeffs).amplitudes
    return (fwd - bwd) / (2 * step)


def qfim_fd_oracle(state: SparseState, gens: Sequence[Generator], step: float = DEFAULT_STEP) -> Qfim:
    """Pure-state QFIM from central-difference derivative states.

    ``F_lm = 4 Re[<d_l psi|d_m psi> - <d_l psi|psi><psi|d_m psi>]``, with
    ``|d_l psi>`` approximated by ``(U(+h O_l) - U(-h O_l))|psi> / 2h``.
    """
    if not 0 < step <= 1e-2:
        raise StepRangeError(f"step {step!r} outside (0, 1e-2]")
    g = _coeff_matrix(state, gens)
    psi = state.amplitudes
    derivs = np.array([_derivative(state, c, step) for c in g])
    gram = np.conj(derivs) @ derivs.T
    proj = np.conj(derivs) @ psi
    f = 4.0 * np.real(gram - np.outer(proj, np.conj(proj)))
    f = 0.5 * (f + f.T)
    return Qfim(f, tuple(x.label for x in gens), FD_ORACLE)


def extract_minus_block(qfim: Qfim, d: int, tol: float = OFF_BLOCK_TOL) -> Qfim:
    """Top-left ``d x d`` block of a parallel-scheme QFIM.

    Only valid when the difference/sum cross blocks vanish; otherwise the
    full matrix has to be inverted.
    """
    if qfim.dim != 2 * d:
        raise ValueError(f"expected a {2 * d}x{2 * d} QFIM, got {qfim.dim}x{qfim.dim}")
    cross = qfim.matrix[:d, d:]
    worst = float(np.max(np.abs(cross)))
    if worst > tol:
        i, j = np.unravel_index(np.argmax(np.abs(cross)), cross.shape)
        raise AsymmetricStateError(
            f"cross block entry ({qfim.labels[i]}, {qfim.labels[d + j]}) = {worst:.3g} exceeds {tol:g}"
        )
    return Qfim(qfim.matrix[:d, :d].copy(), qfim.labels[:d], qfim.source)
