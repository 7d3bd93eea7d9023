"""Constituent phase models and the closed-form step-response kernels.

Two model pairs carry closed-form kernels: a Maxwell phase 1 with an elastic
phase 2 (stress relaxation under a strain step) and a Kelvin-Voigt phase 1
with an elastic phase 2 (creep under a stress step).  Other pairs still get
Laplace-domain moduli and the ``s(lambda)`` map but are rejected by the kernels.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateContrastError, DomainError, ModelMismatchError


class Side(str, enum.Enum):
    STRESS = "stress"
    STRAIN = "strain"


def _positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be finite and strictly positive, got {value!r}")


@dataclass(frozen=True)
class Elastic:
    G: float

    def __post_init__(self):
        _positive("G", self.G)

    def laplace_modulus(self, lam: float) -> float:
        return self.G

    def laplace_compliance(self, lam: float) -> float:
        return 1.0 / self.G

    @property
    def instantaneous_modulus(self) -> float:
        return self.G

    @property
    def equilibrium_modulus(self) -> float:
        return self.G

    def relaxation_function(self, t):
        """Stress per unit strain step, t > 0."""
        return np.full_like(np.asarray(t, float), self.G)

    def creep_function(self, t):
        """Strain per unit stress step, t > 0."""
        return np.full_like(np.asarray(t, float), 1.0 / self.G)


@dataclass(frozen=True)
class Maxwell:
    """Spring ``G_M`` and dashpot ``eta_M`` in series."""

    G_M: float
    eta_M: float

    def __post_init__(self):
        _positive("G_M", self.G_M)
        _positive("eta_M", self.eta_M)

    @property
    def relaxation_time(self) -> float:
        return self.eta_M / self.G_M

    def laplace_modulus(self, lam: float) -> float:
        return self.G_M * self.eta_M * lam / (self.eta_M * lam + self.G_M)

    def laplace_compliance(self, lam: float) -> float:
        return 1.0 / self.G_M + 1.0 / (self.eta_M * lam)

    @property
    def instantaneous_modulus(self) -> float:
        return self.G_M

    @property
    def equilibrium_modulus(self) -> float:
        return 0.0

    def relaxation_function(self, t):
        return self.G_M * np.exp(-np.asarray(t, float) / self.relaxation_time)

    def creep_function(self, t):
        return 1.0 / self.G_M + np.asarray(t, float) / self.eta_M


@dataclass(frozen=True)
class KelvinVoigt:
    """Spring ``G_K`` and dashpot ``eta_K`` in parallel."""

    G_K: float
    eta_K: float

    def __post_init__(self):
        _positive("G_K", self.G_K)
        _positive("eta_K", self.eta_K)

    @property
    def retardation_time(self) -> float:
        return self.eta_K / self.G_K

    def laplace_modulus(self, lam: float) -> float:
        return self.G_K + self.eta_K * lam

    def laplace_compliance(self, lam: float) -> float:
        return 1.0 / (self.G_K + self.eta_K * lam)

    @property
    def instantaneous_modulus(self) -> float:
        return math.inf

    @property
    def equilibrium_modulus(self) -> float:
        return self.G_K

    def relaxation_function(self, t):
        # the dashpot contributes only a delta at t = 0
        return np.full_like(np.asarray(t, float), self.G_K)

    def creep_function(self, t):
        return (1.0 - np.exp(-np.asarray(t, float) / self.retardation_time)) / self.G_K


PhaseModel = Union[Elastic, Maxwell, KelvinVoigt]


def laplace_modulus(model: PhaseModel, lam: float) -> float:
    """Laplace-domain shear modulus; ``lam = inf`` gives the instantaneous modulus."""
    if not isinstance(model, (Elastic, Maxwell, KelvinVoigt)):
        raise ModelMismatchError(f"unsupported phase model {type(model).__name__}")
    if not lam > 0:
        raise DomainError(f"Laplace argument must be positive, got {lam!r}")
    if math.isinf(lam):
        return model.instantaneous_modulus
    return model.laplace_modulus(lam)


def laplace_compliance(model: PhaseModel, lam: float) -> float:
    mu = laplace_modulus(model, lam)
    return 0.0 if math.isinf(mu) else 1.0 / mu


# -- closed-form kernels -----------------------------------------------------
#
# All kernels are vectorised over (pole, t).  The "weighted" forms multiply by
# (1 - pole); that is the quantity the LP sees once residues are rewritten as
# weights w = B / (1 - s).  A pole exactly at 1 stands for pure phase 2 and its
# weighted kernel is 0 for every t (the limit is not uniform in t).


def _check_poles(x, allow_one: bool):
    x = np.asarray(x, float)
    hi_bad = x > 1.0 if allow_one else x >= 1.0
    if np.any(x < 0.0) or np.any(hi_bad) or np.any(np.isnan(x)):
        upper = "1]" if allow_one else "1)"
        raise DomainError(f"poles must lie in [0, {upper}")
    return x


def _check_times(t):
    t = np.asarray(t, float)
    if np.any(np.isnan(t)) or np.any(t < 0):
        raise DomainError("times must be nonnegative")
    return t


def stress_weighted_raw(r: float, rate: float, s, t):
    """``1 - exp(-rate (1-s) t / d) / d`` with ``d = r + s (1 - r)``; no checks."""
    d = r + s * (1.0 - r)
    with np.errstate(invalid="ignore"):
        out = 1.0 - np.exp(-rate * (1.0 - s) * t / d) / d
    return np.where(s >= 1.0, 0.0, out)


def strain_weighted_raw(GK: float, etaK: float, G2: float, u, t):
    den = GK - u * (GK - G2)
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = np.exp(-(GK * (1.0 - u) + u * G2) * t / (etaK * (1.0 - u)))
        out = ((1.0 - u) * (GK - G2) + G2 * expo) / den
    return np.where(u >= 1.0, 0.0, out)


@dataclass(frozen=True)
class CompositePair:
    phase1: PhaseModel
    phase2: PhaseModel
    side: Side = Side.STRESS

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        for p in (self.phase1, self.phase2):
            if not isinstance(p, (Elastic, Maxwell, KelvinVoigt)):
                raise ModelMismatchError(f"unsupported phase model {type(p).__name__}")

    # ---- classification ----
    @property
    def well_ordered(self) -> bool:
        """True when instantaneous and long-time modulus differences share a sign."""
        d0 = _signed_diff(self.phase1.instantaneous_modulus, self.phase2.instantaneous_modulus)
        d1 = _signed_diff(self.phase1.equilibrium_modulus, self.phase2.equilibrium_modulus)
        return d0 * d1 > 0

    @property
    def has_closed_form(self) -> bool:
        if not isinstance(self.phase2, Elastic):
            return False
        if self.side is Side.STRESS:
            return isinstance(self.phase1, Maxwell)
        return isinstance(self.phase1, KelvinVoigt)

    def _require_closed_form(self):
        if not self.has_closed_form:
            want = "Maxwell/Elastic" if self.side is Side.STRESS else "KelvinVoigt/Elastic"
            raise ModelMismatchError(
                f"{self.side.value}-side kernels need a {want} pair, got "
                f"{type(self.phase1).__name__}/{type(self.phase2).__name__}"
            )

    @property
    def G2(self) -> float:
        if not isinstance(self.phase2, Elastic):
            raise ModelMismatchError("phase 2 must be elastic")
        return self.phase2.G

    @property
    def response_scale(self) -> float:
        """Normalisation of the response per unit load: ``G2`` or ``1/(2 G2)``."""
        return self.G2 if self.side is Side.STRESS else 0.5 / self.G2

    # ---- kernels ----
    def weighted_kernel(self, s, t):
        """``(1 - s) K(s, t)`` (or the strain analogue); pole 1 means pure phase 2."""
        self._require_closed_form()
        s = _check_poles(s, allow_one=True)
        t = _check_times(t)
        return self._weighted_unchecked(s, t)

    def _weighted_unchecked(self, s, t):
        if self.side is Side.STRESS:
            p1 = self.phase1
            r = self.G2 / p1.G_M
            return stress_weighted_raw(r, self.G2 / p1.eta_M, s, t)
        p1 = self.phase1
        return strain_weighted_raw(p1.G_K, p1.eta_K, self.G2, s, t)

    def kernel(self, s, t):
        self._require_closed_form()
        s = _check_poles(s, allow_one=False)
        t = _check_times(t)
        return self._weighted_unchecked(s, t) / (1.0 - s)

    def s_parameter(self, lam: float) -> float:
        return s_parameter(self, lam)


def _signed_diff(a: float, b: float) -> float:
    if math.isinf(a) or math.isinf(b):
        if math.isinf(a) and math.isinf(b):
            return 0.0
        return 1.0 if math.isinf(a) else -1.0
    return a - b


def stress_kernel(pair: CompositePair, s, t):
    """Coefficient multiplying residue ``B`` in the normalised relaxation response."""
    if pair.side is not Side.STRESS:
        raise ModelMismatchError("stress_kernel needs a stress-side pair")
    return pair.kernel(s, t)


def strain_kernel(pair: CompositePair, u, t):
    """Coefficient multiplying residue ``P`` in the normalised creep response."""
    if pair.side is not Side.STRAIN:
        raise ModelMismatchError("strain_kernel needs a strain-side pair")
    return pair.kernel(u, t)


def s_parameter(pair: CompositePair, lam: float) -> float:
    """``mu2/(mu2-mu1)`` on the stress side, ``zeta2/(zeta2-zeta1)`` on the strain side."""
    if pair.side is Side.STRESS:
        a = laplace_modulus(pair.phase2, lam)
        b = laplace_modulus(pair.phase1, lam)
    else:
        a = laplace_compliance(pair.phase2, lam)
        b = laplace_compliance(pair.phase1, lam)
    if math.isinf(a) or math.isinf(b):
        if math.isinf(a) and math.isinf(b):
            raise DegenerateContrastError("both moduli infinite")
        return 1.0 if math.isinf(a) else 0.0
    if a == b:
        raise DegenerateContrastError(f"phases coincide at lambda={lam!r}")
    return a / (a - b)


def pure_phase_crossing(pair: CompositePair, t_max: float = 1e4) -> float:
    """Time at which the pure phase-1 and pure phase-2 step responses coincide."""
    pair._require_closed_form()
    f = lambda t: float(pair._weighted_unchecked(np.float64(0.0), np.float64(t)))
    if f(0.0) * f(t_max) > 0:
        raise DomainError("pure-phase responses do not cross")
    return brentq(f, 0.0, t_max, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def pure_phase_crossing_formula(pair: CompositePair) -> float:
    """Closed-form crossing; needs ``G_M > G2`` (stress) or ``G2 > G_K`` (strain)."""
    pair._require_closed_form()
    G2 = pair.G2
    if pair.side is Side.STRESS:
        p = pair.phase1
        if not p.G_M > G2:
            raise DomainError("closed-form crossing needs G_M > G2")
        return p.eta_M / p.G_M * math.log(p.G_M / G2)
    p = pair.phase1
    if not G2 > p.G_K:
        raise DomainError("closed-form crossing needs G2 > G_K")
    return p.eta_K / p.G_K * math.log(G2 / (G2 - p.G_K))


def default_stress_pair() -> CompositePair:
    """Maxwell/elastic example whose bound branches switch at t = 0.83, 1.15, 1.67."""
    return CompositePair(Maxwell(G_M=1.0, eta_M=5.0 / 3.0), Elastic(G=0.5), Side.STRESS)


def default_strain_pair() -> CompositePair:
    """Kelvin-Voigt/elastic example, not well ordered (G2 > G_K)."""
    return CompositePair(KelvinVoigt(G_K=0.5, eta_K=2.05), Elastic(G=1.0), Side.STRAIN)
