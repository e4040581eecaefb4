"""Probe-state families: closed-form analytics and Fock-space realizations.

Parallel-scheme families (2d modes): GECS, UCS, COHERENT, NOON_PAIR.
Imaging-scheme families (d probe modes + 1 reference): GNS, UNO.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import bisect

from .bounds import (
    IMAGING,
    PARALLEL,
    SymmetryParamsImaging,
    SymmetryParamsParallel,
    imaging_bound,
    parallel_bound,
)
from .errors import AsymmetricStateError, ConfigError, NoInformationError, UnreachableTargetError
from .fock import (
    DEFAULT_EPSILON,
    SparseState,
    coherent_mode,
    fock_basis,
    superpose,
    tensor,
    vacuum,
)

AUTO = "auto"
ALPHA_BRACKET = (0.0, 64.0)


class Family(str, Enum):
    GECS = "gecs"
    UCS = "ucs"
    GNS = "gns"
    UNO = "uno"
    NOON_PAIR = "noon_pair"
    COHERENT = "coherent"


PARAMETERS = {
    Family.GECS: {"alpha"},
    Family.UCS: {"alpha", "nu"},
    Family.COHERENT: {"alpha"},
    Family.GNS: {"gamma", "n_photons"},
    Family.UNO: {"nu", "n_photons"},
    Family.NOON_PAIR: {"n_photons"},
}
SCHEMES = {
    Family.GECS: PARALLEL,
    Family.UCS: PARALLEL,
    Family.COHERENT: PARALLEL,
    Family.NOON_PAIR: PARALLEL,
    Family.GNS: IMAGING,
    Family.UNO: IMAGING,
}


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    d: int = 1
    alpha: Optional[complex] = None
    nu: Optional[float] = None
    gamma: Union[float, str, None] = None
    n_photons: Optional[int] = None
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise ConfigError(f"unknown family {self.family!r}", "family") from None
        object.__setattr__(self, "family", family)
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise ConfigError(f"d must be a positive integer, got {self.d!r}", "d")
        object.__setattr__(self, "d", int(self.d))
        needed = PARAMETERS[family]
        for name in ("alpha", "nu", "gamma", "n_photons"):
            value = getattr(self, name)
            if name in needed and value is None:
                raise ConfigError(f"{family.value} requires parameter {name!r}", name)
            if name not in needed and value is not None:
                raise ConfigError(f"{family.value} does not take parameter {name!r}", name)
        if self.alpha is not None:
            object.__setattr__(self, "alpha", complex(self.alpha))
        if self.nu is not None:
            if not np.isreal(self.nu) or self.nu < 0:
                raise ConfigError(f"nu must be real and non-negative, got {self.nu!r}", "nu")
            object.__setattr__(self, "nu", float(self.nu))
        if self.gamma is not None:
            if isinstance(self.gamma, str):
                if self.gamma.lower() != AUTO:
                    raise ConfigError(f"gamma must be positive or 'auto', got {self.gamma!r}", "gamma")
                object.__setattr__(self, "gamma", AUTO)
            elif not self.gamma > 0:
                raise ConfigError(f"gamma must be positive, got {self.gamma!r}", "gamma")
            else:
                object.__setattr__(self, "gamma", float(self.gamma))
        if self.n_photons is not None:
            if int(self.n_photons) != self.n_photons or self.n_photons < 1:
                raise ConfigError(f"n_photons must be a positive integer, got {self.n_photons!r}", "n_photons")
            object.__setattr__(self, "n_photons", int(self.n_photons))
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon!r}", "epsilon")

    @property
    def scheme(self) -> str:
        return SCHEMES[self.family]

    @property
    def mode_count(self) -> int:
        return 2 * self.d if self.scheme == PARALLEL else self.d + 1

    @property
    def resolved_gamma(self) -> float:
        if self.gamma == AUTO:
            return self.d**0.25
        return self.gamma


@dataclass(frozen=True)
class FamilyAnalytics:
    """Closed-form figures for one family point.

    ``n_total`` counts every mode of the realization except, for UNO, the
    idle reference mode (which is vacuum). ``bound_approx`` is ``None``
    where no large-amplitude form exists.
    """

    scheme: str
    n_total: float
    n_per_mode: float
    bound_exact: float
    bound_approx: Optional[float]
    normalization: float
    mandel_q: float
    correlation_j: float

    def __post_init__(self):
        if not self.bound_exact > 0:
            raise ValueError("bound_exact must be positive")


def _require_family(spec, *families):
    if spec.family not in families:
        names = ", ".join(f.value for f in families)
        raise ConfigError(f"expected a {names} spec, got {spec.family.value}", "family")


# closed forms


def gecs_mean_total(alpha: float, d: int) -> float:
    x = abs(alpha) ** 2
    return x / (1.0 + (2 * d - 1) * math.exp(-x))


def ucs_mean_total(alpha: float, nu: float, d: int) -> float:
    x = abs(alpha) ** 2
    return 2 * d * x / (nu**2 + 1.0 + 2.0 * nu * math.exp(-x / 2))


def coherent_mean_total(alpha: float, d: int) -> float:
    return 2 * d * abs(alpha) ** 2


def _gecs_analytics(spec):
    d, x = spec.d, abs(spec.alpha) ** 2
    n_total = gecs_mean_total(spec.alpha, d)
    if n_total == 0:
        raise NoInformationError("alpha = 0 gives the vacuum")
    n_bar = n_total / (2 * d)
    var = n_bar * (x + 1) - n_bar**2
    return FamilyAnalytics(
        PARALLEL,
        n_total,
        n_bar,
        d / (n_total * (x + 1)),
        d / (n_total * (n_total + 1)),
        1.0 / math.sqrt(2 * d * (1.0 + (2 * d - 1) * math.exp(-x))),
        x - n_bar,
        -(n_bar**2) / var,
    )


def _ucs_analytics(spec):
    d, x, nu = spec.d, abs(spec.alpha) ** 2, spec.nu
    n_total = ucs_mean_total(spec.alpha, nu, d)
    if n_total == 0:
        raise NoInformationError("alpha = 0 gives the vacuum")
    n_bar = n_total / (2 * d)
    return FamilyAnalytics(
        PARALLEL,
        n_total,
        n_bar,
        d / (n_total * (x + 1 - n_total / (2 * d))),
        d / (n_total * (nu**2 / (2 * d) * n_total + 1)),
        (nu**2 + 1.0 + 2.0 * nu * math.exp(-x / 2)) ** (-d),
        x - n_bar,
        0.0,
    )


def _coherent_analytics(spec):
    x = abs(spec.alpha) ** 2
    if x == 0:
        raise NoInformationError("alpha = 0 gives the vacuum")
    bound = parallel_bound(SymmetryParamsParallel(x, 0.0, 0.0, spec.d))
    return FamilyAnalytics(PARALLEL, 2 * spec.d * x, x, bound, None, 1.0, 0.0, 0.0)


def _gns_analytics(spec):
    d, n = spec.d, spec.n_photons
    g2 = spec.resolved_gamma**2
    if spec.gamma == AUTO:
        bound = (1 + math.sqrt(d)) ** 2 / (4 * n**2)
    else:
        bound = (d + g2) * (1 + g2) / (4 * g2 * n**2)
    p = 1.0 / (d + g2)
    j = -1.0 / (d + g2 - 1) if d > 1 else 0.0
    return FamilyAnalytics(IMAGING, float(n), n * p, bound, None, math.sqrt(p), n * (1 - p) - 1, j)


def _uno_analytics(spec):
    n, nu, d = spec.n_photons, spec.nu, spec.d
    p = 1.0 / (1.0 + nu**2)
    var = n**2 * nu**2 / (1.0 + nu**2) ** 2
    if var == 0:
        raise NoInformationError("nu = 0 leaves every probe mode empty")
    bound = imaging_bound(SymmetryParamsImaging(var, 0.0, d))
    return FamilyAnalytics(IMAGING, d * n * p, n * p, bound, None, math.sqrt(p), n * (1 - p) - 1, 0.0)


def _noon_analytics(spec):
    n = spec.n_photons
    bound = parallel_bound(SymmetryParamsParallel(n**2 / 4, -(n**2) / 4, 0.0, spec.d))
    return FamilyAnalytics(PARALLEL, float(spec.d * n), n / 2, bound, None, 1 / math.sqrt(2), n / 2 - 1, -1.0)


_ANALYTICS = {
    Family.GECS: _gecs_analytics,
    Family.UCS: _ucs_analytics,
    Family.COHERENT: _coherent_analytics,
    Family.GNS: _gns_analytics,
    Family.UNO: _uno_analytics,
    Family.NOON_PAIR: _noon_analytics,
}


def family_analytics(spec: FamilySpec) -> FamilyAnalytics:
    """Closed-form analytics, no Fock-space construction."""
    return _ANALYTICS[spec.family](spec)


# Fock realizations


def _cat_mode(alpha, nu, epsilon):
    coh, _ = coherent_mode(alpha, epsilon)
    state, _ = superpose([(1.0, coh), (nu, vacuum(1))])
    return state


def build_gecs(spec: FamilySpec) -> tuple[SparseState, FamilyAnalytics]:
    """Normalized sum of a displacement on each of the 2d modes."""
    _require_family(spec, Family.GECS)
    analytics = family_analytics(spec)
    coh, _ = coherent_mode(spec.alpha, spec.epsilon)
    m = 2 * spec.d
    terms = []
    for a in range(m):
        factors = [coh if b == a else vacuum(1) for b in range(m)]
        terms.append((1.0, tensor(factors)))
    state, norm = superpose(terms)
    # truncation perturbs the overlaps at the level of the tail mass
    if not math.isclose(1.0 / norm, analytics.normalization, rel_tol=max(1e-9, 10 * spec.epsilon)):
        raise RuntimeError(f"GECS normalization {1 / norm!r} disagrees with {analytics.normalization!r}")
    return state, analytics


def build_ucs(spec: FamilySpec) -> tuple[SparseState, FamilyAnalytics]:
    """``(|alpha> + nu|0>)`` on every one of the 2d modes."""
    _require_family(spec, Family.UCS)
    analytics = family_analytics(spec)
    cat = _cat_mode(spec.alpha, spec.nu, spec.epsilon)
    return tensor([cat] * (2 * spec.d)), analytics


def build_coherent(spec: FamilySpec) -> tuple[SparseState, FamilyAnalytics]:
    _require_family(spec, Family.COHERENT)
    analytics = family_analytics(spec)
    coh, _ = coherent_mode(spec.alpha, spec.epsilon)
    return tensor([coh] * (2 * spec.d)), analytics


def build_gns(spec: FamilySpec) -> tuple[SparseState, FamilyAnalytics]:
    _require_family(spec, Family.GNS)
    analytics = family_analytics(spec)
    d, n = spec.d, spec.n_photons
    terms = []
    for i in range(d + 1):
        occ = [0] * (d + 1)
        occ[i] = n
        terms.append((spec.resolved_gamma if i == d else 1.0, fock_basis(occ)))
    state, _ = superpose(terms)
    return state, analytics


def build_uno(spec: FamilySpec) -> tuple[SparseState, FamilyAnalytics]:
    """Single-mode ``|N> + nu|0>``; see :func:`uno_array` for the d-probe layout."""
    _require_family(spec, Family.UNO)
    analytics = family_analytics(spec)
    state, _ = superpose([(1.0, fock_basis([spec.n_photons])), (spec.nu, vacuum(1))])
    return state, analytics


def uno_array(spec: FamilySpec) -> SparseState:
    """d UNO probe modes plus a vacuum reference mode."""
    single, _ = build_uno(spec)
    return tensor([single] * spec.d + [vacuum(1)])


def build_noon_pair(n_photons: int, d: int = 1) -> tuple[SparseState, FamilyAnalytics]:
    """``(|N,0> + |0,N>)/sqrt(2)``; ``d > 1`` tensors one pair per interferometer."""
    spec = FamilySpec(Family.NOON_PAIR, d=d, n_photons=n_photons)
    pair, _ = superpose([(1.0, fock_basis([n_photons, 0])), (1.0, fock_basis([0, n_photons]))])
    state = pair if d == 1 else tensor([pair] * d)
    return state, family_analytics(spec)


def realize(spec: FamilySpec) -> SparseState:
    """Fock realization of ``spec`` in its scheme's mode layout."""
    if spec.family is Family.GECS:
        return build_gecs(spec)[0]
    if spec.family is Family.UCS:
        return build_ucs(spec)[0]
    if spec.family is Family.COHERENT:
        return build_coherent(spec)[0]
    if spec.family is Family.GNS:
        return build_gns(spec)[0]
    if spec.family is Family.UNO:
        return uno_array(spec)
    return build_noon_pair(spec.n_photons, spec.d)[0]


def single_mode_analogue(state: SparseState, modes: Sequence[int] | None = None, tol: float = 1e-9) -> SparseState:
    """Single-mode state with amplitudes ``sqrt(P_1(n))`` from mode 1's marginal.

    ``modes`` lists the modes that must share that marginal (default: all),
    e.g. only the probe modes of an imaging state.
    """
    modes = list(range(state.mode_count)) if modes is None else list(modes)
    if 0 not in modes:
        raise ValueError("the reference marginal is mode 1, which must be among the symmetric modes")
    ref = state.marginal(0)
    for m in modes:
        other = state.marginal(m)
        if np.max(np.abs(other - ref)) > tol:
            raise AsymmetricStateError(f"photon-number marginals of modes 1 and {m + 1} differ")
    n = np.flatnonzero(ref > 0)
    amps = np.sqrt(ref[n] / ref.sum()).astype(complex)
    return SparseState.from_dict({(int(k),): a for k, a in zip(n, amps)}, cutoff=state.cutoff)


_MEAN_TOTAL = {
    Family.GECS: lambda spec, a: gecs_mean_total(a, spec.d),
    Family.UCS: lambda spec, a: ucs_mean_total(a, spec.nu, spec.d),
    Family.COHERENT: lambda spec, a: coherent_mean_total(a, spec.d),
}


def match_mean_photon(spec: FamilySpec, target_n_total: float) -> FamilySpec:
    """Copy of ``spec`` with ``|alpha|`` tuned so the closed-form mean total hits the target.

    The phase of alpha is kept.
    """
    if spec.family not in _MEAN_TOTAL:
        raise ConfigError(f"{spec.family.value} has no free amplitude to tune", "alpha")
    mean = _MEAN_TOTAL[spec.family]
    phase = np.exp(1j * np.angle(spec.alpha)) if spec.alpha else 1.0
    lo, hi = ALPHA_BRACKET
    if target_n_total == 0:
        return replace(spec, alpha=0j)
    top = mean(spec, hi)
    if not 0 < target_n_total <= top:
        raise UnreachableTargetError(
            f"target mean photon number {target_n_total!r} outside (0, {top!r}] for {spec.family.value}"
        )
    r = bisect(lambda a: mean(spec, a) - target_n_total, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(mean(spec, r) - target_n_total) >= 1e-10:
        raise UnreachableTargetError(f"bisection stalled at alpha={r!r}")
    return replace(spec, alpha=complex(r * phase))


def crossover_nu(d: int) -> float:
    """``nu`` above which the UCS beats the GECS at matched mean photon number."""
    if d < 1:
        raise ValueError("d must be at least 1")
    return math.sqrt(2 * d)
