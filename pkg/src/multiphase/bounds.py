"""Cramer-Rao phase bounds: generic QFIM inversion and the symmetric closed forms.

Two estimation schemes are supported:

* ``parallel`` -- d two-arm interferometers on modes ``(2i, 2i+1)``; the
  phases of interest are the arm differences.
* ``imaging`` -- d probe modes measured against one reference mode
  (the last mode), whose phase is fixed to zero.

Per-phase results are variances (``delta phi_i ** 2``); the aggregate
``delta Phi`` sums standard deviations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import (
    AsymmetricStateError,
    MandelQUndefinedError,
    NoInformationError,
    NonIdentifiableError,
    SingularStructuredMatrixError,
)
from .fock import SparseState, covariance_matrix, mean_numbers
from .qfim import Qfim, extract_minus_block, imaging_generators, parallel_generators, qfim_covariance

COND_LIMIT = 1e12
SYMMETRY_TOL = 1e-9
CS_SLACK = 1e-10

PARALLEL = "parallel"
IMAGING = "imaging"
CLOSED_FORM = "closed-form"
MATRIX_INVERSE = "matrix-inverse"


@dataclass(frozen=True)
class SymmetryParamsParallel:
    V: float
    C_intra: float
    C_inter: float
    d: int

    def __post_init__(self):
        _check_cs(self.V, self.C_intra, "C_intra")
        _check_cs(self.V, self.C_inter, "C_inter")
        if self.d < 1:
            raise ValueError("d must be at least 1")


@dataclass(frozen=True)
class SymmetryParamsImaging:
    V: float
    C: float
    d: int

    def __post_init__(self):
        _check_cs(self.V, self.C, "C")
        if self.d < 1:
            raise ValueError("d must be at least 1")


def _check_cs(v, c, name):
    if v < 0:
        raise ValueError(f"variance must be non-negative, got {v!r}")
    if abs(c) > v + CS_SLACK * max(1.0, v):
        raise ValueError(f"|{name}| = {abs(c)!r} exceeds the variance {v!r}")


@dataclass(frozen=True)
class PrecisionReport:
    per_phase: np.ndarray
    aggregate_phi: float
    mandel_q: float
    correlation_j: float
    mean_per_mode: float
    mean_total: float
    route: str

    def __post_init__(self):
        if np.any(np.asarray(self.per_phase) <= 0):
            raise ValueError("per-phase bounds must be positive")


@dataclass(frozen=True)
class Diagnostics:
    """Symmetry-averaged moments of a probe state."""

    scheme: str
    params: SymmetryParamsParallel | SymmetryParamsImaging
    mean_per_mode: float
    mean_total: float
    mean_probe_total: float
    mandel_q: float
    correlation_j: float


def crb_from_qfim(qfim: Qfim | np.ndarray, repetitions: int = 1) -> np.ndarray:
    """Diagonal of ``F^-1 / mu``."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    f = qfim.matrix if isinstance(qfim, Qfim) else np.asarray(qfim, dtype=float)
    if not np.any(f):
        raise NonIdentifiableError("the QFIM is zero: no parameter carries information")
    cond = np.linalg.cond(f)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NonIdentifiableError(f"QFIM condition number {cond:.3g} exceeds {COND_LIMIT:g}")
    return np.diag(np.linalg.inv(f)) / repetitions


def phase_crb(qfim: Qfim, scheme: str, d: int, repetitions: int = 1) -> np.ndarray:
    """CRB of the d phases of interest.

    For the parallel scheme the sum phases are nuisance parameters. When
    the difference/sum cross blocks vanish only the difference block is
    inverted, which stays finite for number-conserving probes whose sum
    block is singular (NOON pairs); otherwise the full matrix is inverted.
    """
    if scheme == PARALLEL:
        try:
            block = extract_minus_block(qfim, d)
        except AsymmetricStateError:
            return crb_from_qfim(qfim, repetitions)[:d]
        return crb_from_qfim(block, repetitions)
    return crb_from_qfim(qfim, repetitions)


def ones_structured_inverse(lam: float, omega: float, d: int) -> np.ndarray:
    """Inverse of ``lam * (I + omega * J)`` with J the all-ones d x d matrix."""
    if d < 1:
        raise ValueError("d must be at least 1")
    if lam == 0:
        raise SingularStructuredMatrixError("lambda is zero")
    denom = 1.0 + omega * d
    if abs(denom) <= 1e-12 * max(1.0, abs(omega) * d):
        raise SingularStructuredMatrixError(f"1 + omega*d = {denom!r} is singular")
    return (np.eye(d) - (omega / denom) * np.ones((d, d))) / lam


def parallel_bound(params: SymmetryParamsParallel) -> float:
    """``1 / (2 (V - C_intra))``; neither d nor C_inter enters."""
    gap = params.V - params.C_intra
    if gap <= 0:
        raise NoInformationError(f"V - C_intra = {gap!r} leaves no phase information")
    return 1.0 / (2.0 * gap)


def _check_mandel(n_bar, q, j):
    if n_bar <= 0:
        raise ValueError("n_bar must be positive")
    if q < -1:
        raise ValueError("Mandel Q cannot be below -1")
    if abs(j) > 1:
        raise ValueError("|J| cannot exceed 1")


def parallel_bound_mandel(n_bar: float, q: float, j: float) -> float:
    """``1 / (2 n (1 + Q)(1 - J))``."""
    _check_mandel(n_bar, q, j)
    denom = 2.0 * n_bar * (1.0 + q) * (1.0 - j)
    if denom <= 0:
        raise NoInformationError("zero variance gap (Q = -1 or J = 1)")
    return 1.0 / denom


def imaging_bound(params: SymmetryParamsImaging) -> float:
    v, c, d = params.V, params.C, params.d
    if d == 1:
        # a lone probe has no partner, so C drops out
        if v <= 0:
            raise NoInformationError("zero variance leaves no phase information")
        return 1.0 / (4.0 * v)
    if v - c <= 0 or v + (d - 1) * c <= 0:
        raise NonIdentifiableError(f"imaging QFIM singular for V={v!r}, C={c!r}, d={d}")
    return (v + (d - 2) * c) / (4.0 * (v - c) * (v + (d - 1) * c))


def correlation_factor(d: int, j: float) -> float:
    """``(1 + (d-2) J) / (1 + (d-1) J)``."""
    denom = 1.0 + (d - 1) * j
    if denom <= 0:
        raise NonIdentifiableError(f"1 + (d-1)J = {denom!r} must be positive")
    return (1.0 + (d - 2) * j) / denom


def imaging_bound_mandel(n_bar: float, q: float, j: float, d: int) -> float:
    _check_mandel(n_bar, q, j)
    if d == 1:
        # f(1, J) = 1 - J cancels the (1 - J) below
        if q <= -1:
            raise NoInformationError("Q = -1 leaves no phase information")
        return 1.0 / (4.0 * n_bar * (1.0 + q))
    f = correlation_factor(d, j)
    denom = 4.0 * n_bar * (1.0 + q) * (1.0 - j)
    if denom <= 0:
        raise NonIdentifiableError("zero variance gap (Q = -1 or J = 1)")
    return f / denom


def aggregate_phi(per_phase_variances: Sequence[float]) -> float:
    v = np.asarray(per_phase_variances, dtype=float)
    if v.size == 0 or np.any(v <= 0):
        raise ValueError("per-phase variances must be positive")
    return float(np.sum(np.sqrt(v)))


def _spread(values, what, tol):
    """Raise if the values disagree by more than tol; return their mean."""
    values = list(values)
    nums = np.array([v for _, v in values])
    if np.ptp(nums) > tol:
        lo, hi = values[int(np.argmin(nums))], values[int(np.argmax(nums))]
        raise AsymmetricStateError(
            f"{what} differ: {lo[0]} -> {lo[1]!r} vs {hi[0]} -> {hi[1]!r} (tol {tol:g})"
        )
    return float(np.mean(nums))


def _scheme_modes(scheme, d):
    if scheme == PARALLEL:
        return 2 * d
    if scheme == IMAGING:
        return d + 1
    raise ValueError(f"unknown scheme {scheme!r}")


def diagnostics(state: SparseState, scheme: str, d: int, tol: float = SYMMETRY_TOL) -> Diagnostics:
    """Measure variances and covariances, check the scheme's symmetry, average them.

    Parallel: all 2d modes share mean and variance, intra-interferometer
    covariances agree, inter-interferometer covariances agree. Imaging:
    the d probe modes share mean and variance and every probe pair has
    the same covariance; the reference mode is unconstrained.
    """
    if state.mode_count != _scheme_modes(scheme, d):
        raise ValueError(f"{scheme} scheme with d={d} needs {_scheme_modes(scheme, d)} modes")
    means = mean_numbers(state)
    cov = covariance_matrix(state)
    probes = range(2 * d) if scheme == PARALLEL else range(d)

    n_bar = _spread(((f"<n{i + 1}>", means[i]) for i in probes), "mean photon numbers", tol)
    v = _spread(((f"V{i + 1}", cov[i, i]) for i in probes), "variances", tol)
    for i in probes:
        if means[i] == 0:
            raise MandelQUndefinedError(f"mode {i + 1} has zero mean photon number")
    q = float(np.mean([(cov[i, i] - means[i]) / means[i] for i in probes]))

    if scheme == PARALLEL:
        c_intra = _spread(
            ((f"C({2 * i + 1},{2 * i + 2})", cov[2 * i, 2 * i + 1]) for i in range(d)),
            "intra-interferometer covariances",
            tol,
        )
        inter = [
            (f"C({a + 1},{b + 1})", cov[a, b]) for a, b in combinations(range(2 * d), 2) if a // 2 != b // 2
        ]
        c_inter = _spread(inter, "inter-interferometer covariances", tol) if inter else 0.0
        params = SymmetryParamsParallel(v, c_intra, c_inter, d)
        c_pair = c_intra
        probe_total = float(np.sum(means))
    else:
        pairs = [(f"C({a + 1},{b + 1})", cov[a, b]) for a, b in combinations(range(d), 2)]
        c = _spread(pairs, "probe-pair covariances", tol) if pairs else 0.0
        params = SymmetryParamsImaging(v, c, d)
        c_pair = c
        probe_total = float(np.sum(means[:d]))

    # rounding can push |C|/V a hair past 1
    j = float(np.clip(c_pair / v, -1.0, 1.0)) if v > 0 else 0.0
    return Diagnostics(scheme, params, n_bar, float(np.sum(means)), probe_total, q, j)


def scheme_generators(scheme: str, d: int):
    return parallel_generators(d) if scheme == PARALLEL else imaging_generators(d)


def analyze(state: SparseState, scheme: str, d: int, tol: float = SYMMETRY_TOL, repetitions: int = 1) -> PrecisionReport:
    """Per-phase bounds for ``state``, via the closed form when the symmetry holds.

    An asymmetric state falls back to inverting the full covariance QFIM.
    """
    try:
        diag = diagnostics(state, scheme, d, tol)
    except AsymmetricStateError:
        diag = None
    if diag is not None:
        if scheme == PARALLEL:
            per = np.full(d, parallel_bound(diag.params))
        else:
            per = np.full(d, imaging_bound(diag.params))
        per = per / repetitions
        return PrecisionReport(
            per, aggregate_phi(per), diag.mandel_q, diag.correlation_j, diag.mean_per_mode, diag.mean_total, CLOSED_FORM
        )
    per = phase_crb(qfim_covariance(state, scheme_generators(scheme, d)), scheme, d, repetitions)
    means = mean_numbers(state)
    cov = covariance_matrix(state)
    probes = list(range(2 * d)) if scheme == PARALLEL else list(range(d))
    n_bar = float(np.mean(means[probes]))
    with np.errstate(divide="ignore", invalid="ignore"):
        q = float(np.mean([(cov[i, i] - means[i]) / means[i] for i in probes]))
    partner = 1 if len(probes) > 1 else 0
    v0, v1 = cov[0, 0], cov[partner, partner]
    j = float(cov[0, partner] / np.sqrt(v0 * v1)) if partner and v0 * v1 > 0 else 0.0
    return PrecisionReport(per, aggregate_phi(per), q, j, n_bar, float(np.sum(means)), MATRIX_INVERSE)
