"""Linear constraints on residues generated by microstructural information."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .phases import CompositePair


class Symmetry(str, enum.Enum):
    REFLECTIVE = "reflective"
    NONREFLECTIVE = "nonreflective"


class SecondTrackReading(str, enum.Enum):
    """Right-hand side of the B-track volume rule under reflective symmetry.

    ``F1`` follows from ``sum B_i = f1 I``; ``F1F2`` is the alternative printed
    form ``sum b_B = f1 f2``.
    """

    F1 = "f1"
    F1F2 = "f1f2"


@dataclass(frozen=True)
class KnownValue:
    """A measured response value at time ``time`` (``math.inf`` allowed).

    ``value`` is in physical units; ``band`` > 0 turns the equality into the
    interval ``[value - band, value + band]``.
    """

    time: float
    value: float
    band: float = 0.0

    def __post_init__(self):
        if math.isnan(self.time) or self.time < 0:
            raise ConfigurationError("known-value time must be >= 0")
        if not math.isfinite(self.value):
            raise ConfigurationError("known value must be finite")
        if self.band < 0:
            raise ConfigurationError("band must be >= 0")


@dataclass(frozen=True)
class InfoSet:
    volume_fraction: Optional[float] = None
    transverse_isotropy: bool = False
    known_values: tuple = ()
    symmetry: Symmetry = Symmetry.REFLECTIVE
    fictitious_delta: float = 1e-6
    second_track: SecondTrackReading = SecondTrackReading.F1

    def __post_init__(self):
        object.__setattr__(self, "symmetry", Symmetry(self.symmetry))
        object.__setattr__(self, "second_track", SecondTrackReading(self.second_track))
        kv = tuple(k if isinstance(k, KnownValue) else KnownValue(*k) for k in self.known_values)
        object.__setattr__(self, "known_values", kv)
        f1 = self.volume_fraction
        if f1 is not None and not (0.0 < f1 < 1.0):
            raise ConfigurationError(f"volume fraction must lie in (0, 1), got {f1!r}")
        if self.transverse_isotropy and f1 is None:
            raise ConfigurationError("transverse isotropy needs a volume fraction")
        times = [k.time for k in kv]
        if len(set(times)) != len(times):
            raise ConfigurationError("known-value times must be distinct")
        if not (self.fictitious_delta > 0):
            raise ConfigurationError("fictitious_delta must be positive")

    @property
    def f1(self) -> float:
        return self.volume_fraction

    @property
    def f2(self) -> float:
        return 1.0 - self.volume_fraction

    def with_volume_fraction(self, f1: Optional[float]) -> "InfoSet":
        iso = self.transverse_isotropy and f1 is not None
        return InfoSet(f1, iso, self.known_values, self.symmetry,
                       self.fictitious_delta, self.second_track)

    def is_subset_of(self, other: "InfoSet") -> bool:
        """True when ``other`` carries at least the information in ``self``."""
        if self.volume_fraction is not None and self.volume_fraction != other.volume_fraction:
            return False
        if self.transverse_isotropy and not other.transverse_isotropy:
            return False
        return set(self.known_values) <= set(other.known_values)

    def label(self) -> str:
        parts = []
        if self.volume_fraction is not None:
            parts.append(f"vf={self.volume_fraction:g}")
        if self.transverse_isotropy:
            parts.append("iso")
        parts += [f"known@{k.time:g}" for k in self.known_values]
        return "+".join(parts) or "no-info"


@dataclass(frozen=True, eq=False)
class LinearProgramSpec:
    """``min/max objective.x + offset`` with ``A_eq x = b_eq``, ``A_ub x <= b_ub``, ``x >= 0``."""

    num_vars: int
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    objective: np.ndarray = None
    objective_offset: float = 0.0
    labels: tuple = ()

    def __post_init__(self):
        n = self.num_vars
        for name in ("A_eq", "A_ub"):
            a = np.asarray(getattr(self, name), float).reshape(-1, n)
            object.__setattr__(self, name, a)
        for name in ("b_eq", "b_ub"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), float).reshape(-1))
        if self.A_eq.shape[0] != self.b_eq.shape[0] or self.A_ub.shape[0] != self.b_ub.shape[0]:
            raise ConfigurationError("constraint rows and right-hand sides disagree")
        obj = np.zeros(n) if self.objective is None else np.asarray(self.objective, float)
        if obj.shape != (n,):
            raise ConfigurationError("objective length must equal num_vars")
        object.__setattr__(self, "objective", obj)
        if not (np.all(np.isfinite(self.b_eq)) and np.all(np.isfinite(self.b_ub))):
            raise ConfigurationError("right-hand sides must be finite")

    @property
    def n_eq(self) -> int:
        return self.A_eq.shape[0]

    @property
    def n_ub(self) -> int:
        return self.A_ub.shape[0]

    def with_objective(self, c, offset: float = 0.0) -> "LinearProgramSpec":
        return LinearProgramSpec(self.num_vars, self.A_eq, self.b_eq, self.A_ub, self.b_ub,
                                 np.asarray(c, float), offset, self.labels)

    def violation(self, x) -> float:
        x = np.asarray(x, float)
        v = [0.0, float(np.max(-x, initial=0.0))]
        if self.n_eq:
            v.append(float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        if self.n_ub:
            v.append(float(np.max(self.A_ub @ x - self.b_ub, initial=0.0)))
        return max(v)

    def feasible(self, x, tol: float = 1e-9) -> bool:
        return self.violation(x) <= tol


class _Rows:
    def __init__(self, n):
        self.n = n
        self.eq, self.beq, self.ub, self.bub = [], [], [], []

    def add_eq(self, row, rhs):
        self.eq.append(np.asarray(row, float))
        self.beq.append(float(rhs))

    def add_ub(self, row, rhs):
        self.ub.append(np.asarray(row, float))
        self.bub.append(float(rhs))

    def add_band(self, row, rhs, band):
        if band > 0:
            self.add_ub(row, rhs + band)
            self.add_ub(-np.asarray(row), -(rhs - band))
        else:
            self.add_eq(row, rhs)

    def spec(self, labels=()):
        n = self.n
        return LinearProgramSpec(
            n,
            np.array(self.eq).reshape(-1, n), np.array(self.beq),
            np.array(self.ub).reshape(-1, n), np.array(self.bub),
            labels=tuple(labels),
        )


def _check_poles(poles):
    p = np.asarray(poles, float).reshape(-1)
    if np.any(p < 0) or np.any(p >= 1) or np.any(~np.isfinite(p)):
        raise DomainError("poles must lie in [0, 1)")
    return p


def normalized_known_value(kv: KnownValue, pair: CompositePair, amplitude: float = 1.0) -> tuple[float, float]:
    """Known value and band divided by the pure-phase-2 response."""
    scale = pair.response_scale * amplitude
    return kv.value / scale, kv.band / abs(scale)


def screen_known_values(info: InfoSet, pair: CompositePair, amplitude: float = 1.0) -> list[KnownValue]:
    """Known values outside the pure-phase envelope (warned about, not rejected)."""
    bad = []
    for kv in info.known_values:
        v, band = normalized_known_value(kv, pair, amplitude)
        g1 = float(pair.weighted_kernel(0.0, kv.time))
        lo, hi = sorted((1.0 - g1, 1.0))
        # the no-info envelope can exceed the pure phases at intermediate times
        if math.isfinite(kv.time):
            grid = np.linspace(0.0, 1.0, 401)
            resp = 1.0 - pair.weighted_kernel(grid, kv.time)
            lo, hi = min(lo, resp.min()), max(hi, resp.max())
        if v + band < lo - 1e-12 or v - band > hi + 1e-12:
            bad.append(kv)
    if bad:
        warnings.warn(f"known values outside the no-information envelope: {bad}", stacklevel=2)
    return bad


def build_scalar_constraints(info: InfoSet, poles: Sequence[float], pair: CompositePair,
                             kernel: Optional[Callable] = None, amplitude: float = 1.0) -> LinearProgramSpec:
    """Constraints on the 11-residues ``x_i`` at fixed poles."""
    p = _check_poles(poles)
    n = p.size
    kernel = kernel or pair.kernel
    rows = _Rows(n)
    rows.add_ub(1.0 / (1.0 - p), 1.0)
    labels = ["unit"]
    if info.volume_fraction is not None:
        rows.add_eq(np.ones(n), info.f1)
        labels.append("volume")
    if info.transverse_isotropy:
        rows.add_eq(p, info.f1 * info.f2 / 2.0)
        labels.append("isotropy")
    for kv in info.known_values:
        v, band = normalized_known_value(kv, pair, amplitude)
        rows.add_band(kernel(p, kv.time), 1.0 - v, band)
        labels.append(f"known@{kv.time:g}")
    return rows.spec(labels)


def _interleave(a, b):
    out = np.empty(a.size * 2)
    out[0::2] = a
    out[1::2] = b
    return out


def build_reflective_constraints(info: InfoSet, poles: Sequence[float], pair: Optional[CompositePair] = None,
                                 theta: Optional[float] = None, amplitude: float = 1.0) -> LinearProgramSpec:
    """Constraints over interleaved ``(b_A0, b_B0, b_A1, b_B1, ...)`` with a common angle.

    Known values constrain the 11-response, which depends on ``theta``; they
    need ``pair`` and ``theta``.
    """
    if info.symmetry is not Symmetry.REFLECTIVE:
        raise ConfigurationError("reflective builder needs a reflective InfoSet")
    p = _check_poles(poles)
    n = p.size
    zero = np.zeros(n)
    rows = _Rows(2 * n)
    labels = ["unit_A", "unit_B"]
    rows.add_ub(_interleave(1.0 / (1.0 - p), zero), 1.0)
    rows.add_ub(_interleave(zero, 1.0 / (1.0 - p)), 1.0)
    if info.volume_fraction is not None:
        f1, f2 = info.f1, info.f2
        rows.add_eq(_interleave(np.ones(n), zero), f1)
        rhs_b = f1 if info.second_track is SecondTrackReading.F1 else f1 * f2
        rows.add_eq(_interleave(zero, np.ones(n)), rhs_b)
        rows.add_eq(_interleave(p, p), f1 * f2)
        labels += ["volume_A", "volume_B", "trace"]
    if info.transverse_isotropy:
        for i in range(n):
            row = np.zeros(2 * n)
            row[2 * i], row[2 * i + 1] = 1.0, -1.0
            rows.add_eq(row, 0.0)
            labels.append(f"iso_{i}")
    if info.known_values:
        if pair is None or theta is None:
            raise ConfigurationError("known values under reflective symmetry need pair and theta")
        c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
        for kv in info.known_values:
            v, band = normalized_known_value(kv, pair, amplitude)
            k = pair.kernel(p, kv.time)
            rows.add_band(_interleave(k * c2, k * s2), 1.0 - v, band)
            labels.append(f"known@{kv.time:g}")
    return rows.spec(labels)


def clock_discretization(m: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Evenly spaced poles ``i/(m+2)``, ``i = 0..m``, with angles cycling through ``k`` clock steps."""
    if m < 1 or k < 1:
        raise ConfigurationError("need m >= 1 and k >= 1")
    i = np.arange(m + 1)
    return i / (m + 2.0), 2.0 * np.pi * (i % k) / k


def tensor_discretization(n_poles: int, n_angles: int, top: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Every pole of an even grid paired with every angle of ``[0, pi/2)``."""
    if n_poles < 2 or n_angles < 1:
        raise ConfigurationError("need at least two poles and one angle")
    top = (n_poles - 1) / (n_poles + 1.0) if top is None else top
    poles = np.linspace(0.0, top, n_poles)
    angles = np.arange(n_angles) * (0.5 * np.pi / n_angles)
    P, A = np.meshgrid(poles, angles, indexing="ij")
    return P.ravel(), A.ravel()


def build_nonreflective_constraints(info: InfoSet, poles: Sequence[float], angles: Sequence[float],
                                    delta: Optional[float] = None) -> LinearProgramSpec:
    """Constraints over ``(b_A, b_B)`` per pole plus a fictitious pole at ``1 - delta``.

    Variables are interleaved per pole; the last two belong to the fictitious
    pole, whose angle is 0.  ``sum B_i/(1 - s_i) = I`` gives three equalities.
    """
    p = _check_poles(poles)
    th = np.asarray(angles, float).reshape(-1)
    if th.size != p.size:
        raise ConfigurationError("one angle per pole is required")
    delta = info.fictitious_delta if delta is None else delta
    if not (0.0 < delta < 1.0 - p.max()):
        raise DomainError(f"delta must lie in (0, 1 - max pole) = (0, {1 - p.max():.3g})")
    n = p.size
    c2, s2, cs = np.cos(th) ** 2, np.sin(th) ** 2, np.cos(th) * np.sin(th)
    inv = 1.0 / (1.0 - p)
    rows = _Rows(2 * n + 2)

    def row(a, b, fa=0.0, fb=0.0):
        return np.concatenate([_interleave(a, b), [fa, fb]])

    # the fictitious residue delta*D has weight D; its angle is 0
    rows.add_eq(row(c2 * inv, s2 * inv, 1.0, 0.0), 1.0)
    rows.add_eq(row(s2 * inv, c2 * inv, 0.0, 1.0), 1.0)
    rows.add_eq(row(cs * inv, -cs * inv), 0.0)
    labels = ["unit_11", "unit_22", "unit_12"]
    if info.volume_fraction is not None:
        f1, f2 = info.f1, info.f2
        rows.add_eq(row(c2, s2), f1)
        rows.add_eq(row(s2, c2), f1)
        rows.add_eq(row(cs, -cs), 0.0)
        rows.add_eq(row(p, p), f1 * f2)
        labels += ["volume_11", "volume_22", "volume_12", "trace"]
    if info.transverse_isotropy:
        for i in range(n + 1):
            r = np.zeros(2 * n + 2)
            r[2 * i], r[2 * i + 1] = 1.0, -1.0
            rows.add_eq(r, 0.0)
            labels.append(f"iso_{i}")
    if info.known_values:
        raise ConfigurationError("known values are only supported for scalar and reflective problems")
    return rows.spec(labels)


def fictitious_residues(x: np.ndarray, delta: float) -> tuple[float, float]:
    """Physical ``(b_A, b_B)`` of the fictitious pole from its weight variables."""
    return delta * x[-2], delta * x[-1]
