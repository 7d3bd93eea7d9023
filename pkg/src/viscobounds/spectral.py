"""Pole/residue configurations and the transient responses they produce."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, ModelMismatchError
from .phases import CompositePair, Side

# Feasibility slack used when validating configurations that come out of an
# optimiser; purely cosmetic rounding must not reject them.
FEAS_TOL = 1e-9


def rotation_vectors(theta):
    """Principal directions of ``R^T diag(a, b) R``: rows ``(c, -s)`` and ``(s, c)``."""
    c, s = np.cos(theta), np.sin(theta)
    u1 = np.stack([c, -s], axis=-1)
    u2 = np.stack([s, c], axis=-1)
    return u1, u2


def residue_matrices(rotated: np.ndarray) -> np.ndarray:
    """``(n, 3)`` rows of ``(theta, b_A, b_B)`` to ``(n, 2, 2)`` residue matrices."""
    theta, a, b = rotated[:, 0], rotated[:, 1], rotated[:, 2]
    u1, u2 = rotation_vectors(theta)
    return (a[:, None, None] * u1[:, :, None] * u1[:, None, :]
            + b[:, None, None] * u2[:, :, None] * u2[:, None, :])


@dataclass(frozen=True, eq=False)
class SpectralConfig:
    """Ordered poles in [0, 1) with scalar or rotated-diagonal residues.

    ``residues`` is either shape ``(n,)`` (the 11-components) or ``(n, 3)`` with
    rows ``(theta, b_A, b_B)``.  Poles are sorted on construction.
    """

    poles: np.ndarray
    residues: np.ndarray
    side: Side = Side.STRESS
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        poles = np.atleast_1d(np.asarray(self.poles, float)).copy()
        res = np.asarray(self.residues, float).copy()
        if res.ndim == 0:
            res = res[None]
        if poles.ndim != 1 or res.shape[0] != poles.shape[0] or res.ndim not in (1, 2):
            raise ConfigurationError("poles and residues must have matching leading length")
        if res.ndim == 2 and res.shape[1] != 3:
            raise ConfigurationError("rotated residues need rows (theta, b_A, b_B)")
        order = np.argsort(poles, kind="stable")
        poles, res = poles[order], res[order]
        poles.flags.writeable = False
        res.flags.writeable = False
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", res)
        object.__setattr__(self, "side", Side(self.side))
        if self.validate:
            self._check()

    @property
    def is_rotated(self) -> bool:
        return self.residues.ndim == 2

    @property
    def size(self) -> int:
        return self.poles.shape[0]

    def _check(self):
        p = self.poles
        if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p >= 1):
            raise DomainError("poles must lie in [0, 1)")
        if self.is_rotated:
            if np.any(self.residues[:, 1:] < -FEAS_TOL):
                raise DomainError("b_A and b_B must be nonnegative")
            total = self.weight_matrix()
            if np.linalg.eigvalsh(total)[-1] > 1 + FEAS_TOL:
                raise DomainError("sum of B_i/(1-s_i) exceeds the identity")
        else:
            if np.any(self.residues < -FEAS_TOL):
                raise DomainError("residues must be nonnegative")
            if self.weights().sum() > 1 + FEAS_TOL:
                raise DomainError("sum of B_i/(1-s_i) exceeds 1")

    def weights(self) -> np.ndarray:
        """Scalar residues divided by ``1 - s``."""
        if self.is_rotated:
            raise ConfigurationError("weights() is for scalar residues")
        return self.residues / (1.0 - self.poles)

    def matrices(self) -> np.ndarray:
        if self.is_rotated:
            return residue_matrices(self.residues)
        out = np.zeros((self.size, 2, 2))
        out[:, 0, 0] = self.residues
        return out

    def weight_matrix(self) -> np.ndarray:
        return (self.matrices() / (1.0 - self.poles)[:, None, None]).sum(axis=0)

    def volume_sum(self):
        """``sum B_i``: equals ``f1`` (or ``f1 I``) when the volume fraction is known."""
        return self.matrices().sum(axis=0) if self.is_rotated else self.residues.sum()

    def combine(self, other: "SpectralConfig", w: float) -> "SpectralConfig":
        """Residue-wise convex combination; poles must coincide."""
        if not np.array_equal(self.poles, other.poles) or self.is_rotated != other.is_rotated:
            raise ConfigurationError("convex combination needs identical poles")
        res = w * self.residues + (1 - w) * other.residues
        if self.is_rotated:
            if not np.array_equal(self.residues[:, 0], other.residues[:, 0]):
                raise ConfigurationError("convex combination needs identical angles")
            res[:, 0] = self.residues[:, 0]
        return SpectralConfig(self.poles, res, self.side)


@dataclass(frozen=True)
class StepLoading:
    """Constant strain (``StrainStep``) or stress (``StressStep``) applied at t = 0."""

    amplitude: tuple
    kind: Side = Side.STRESS  # STRESS: strain step, response is stress

    def __post_init__(self):
        amp = tuple(float(a) for a in np.atleast_1d(self.amplitude))
        if len(amp) == 1:
            amp = (amp[0], 0.0)
        if len(amp) != 2 or not all(np.isfinite(amp)):
            raise ConfigurationError("step amplitude must be two finite components")
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "kind", Side(self.kind))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.amplitude)

    @property
    def is_scalar(self) -> bool:
        return self.amplitude[1] == 0.0


def StrainStep(eps0) -> StepLoading:
    return StepLoading(eps0, Side.STRESS)


def StressStep(sig0) -> StepLoading:
    return StepLoading(sig0, Side.STRAIN)


def _match(config: SpectralConfig, pair: CompositePair, loading: StepLoading | None):
    if config.side is not pair.side:
        raise ModelMismatchError(f"config side {config.side.value} vs pair side {pair.side.value}")
    if loading is not None and loading.kind is not pair.side:
        raise ModelMismatchError("loading kind does not match the response side")


def normalized_scalar(config: SpectralConfig, pair: CompositePair, t):
    """``1 - sum K(s_i, t) B_i``, vectorised over ``t``."""
    if config.is_rotated:
        raise ConfigurationError("scalar evaluation needs scalar residues")
    _match(config, pair, None)
    t = np.asarray(t, float)
    if config.size == 0:
        return np.ones_like(t)
    g = pair.weighted_kernel(config.poles[:, None], t.reshape(1, -1))
    out = 1.0 - config.weights() @ g
    return out.reshape(t.shape)


def normalized_vector(config: SpectralConfig, pair: CompositePair, load, t):
    """``load - sum K(s_i, t) B_i load`` for a 2-vector ``load``; shape ``t.shape + (2,)``."""
    _match(config, pair, None)
    load = np.asarray(load, float)
    t = np.asarray(t, float)
    if config.size == 0:
        return np.broadcast_to(load, t.shape + (2,)).copy()
    g = pair.weighted_kernel(config.poles[:, None], t.reshape(1, -1))  # (n, T)
    Wv = (config.matrices() / (1.0 - config.poles)[:, None, None]) @ load  # (n, 2)
    out = load[None, :] - g.T @ Wv
    return out.reshape(t.shape + (2,))


def _scalar_amp(loading: StepLoading) -> float:
    if not loading.is_scalar:
        raise ConfigurationError("scalar response needs a load along the first axis only")
    return loading.amplitude[0]


def eval_scalar_stress(config: SpectralConfig, pair: CompositePair, loading: StepLoading, t):
    """``sigma_12(t) = G2 eps0 (1 - sum K(s_i, t) B_i)``."""
    if pair.side is not Side.STRESS:
        raise ModelMismatchError("eval_scalar_stress needs a stress-side pair")
    _match(config, pair, loading)
    return pair.G2 * _scalar_amp(loading) * normalized_scalar(config, pair, t)


def eval_scalar_strain(config: SpectralConfig, pair: CompositePair, loading: StepLoading, t):
    """``eps_12(t) = sigma0/(2 G2) (1 - sum L(u_i, t) P_i)``."""
    if pair.side is not Side.STRAIN:
        raise ModelMismatchError("eval_scalar_strain needs a strain-side pair")
    _match(config, pair, loading)
    return _scalar_amp(loading) / (2 * pair.G2) * normalized_scalar(config, pair, t)


def eval_vector_stress(config: SpectralConfig, pair: CompositePair, loading: StepLoading, t):
    """``(sigma_12, sigma_13)`` under a strain step with arbitrary direction."""
    if pair.side is not Side.STRESS:
        raise ModelMismatchError("eval_vector_stress needs a stress-side pair")
    _match(config, pair, loading)
    return pair.G2 * normalized_vector(config, pair, loading.vector, t)


def eval_vector_strain(config: SpectralConfig, pair: CompositePair, loading: StepLoading, t):
    """``(eps_12, eps_13)`` under a stress step with arbitrary direction."""
    if pair.side is not Side.STRAIN:
        raise ModelMismatchError("eval_vector_strain needs a strain-side pair")
    _match(config, pair, loading)
    return normalized_vector(config, pair, loading.vector, t) / (2 * pair.G2)


def evaluate(config: SpectralConfig, pair: CompositePair, loading: StepLoading, t):
    """Dispatch on side and residue type."""
    if config.is_rotated or not loading.is_scalar:
        fn = eval_vector_stress if pair.side is Side.STRESS else eval_vector_strain
    else:
        fn = eval_scalar_stress if pair.side is Side.STRESS else eval_scalar_strain
    return fn(config, pair, loading, t)
