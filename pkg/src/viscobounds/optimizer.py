"""Bounds over pole positions: single times, sweeps, closed forms and inversion."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ConfigurationError, DomainError, InfeasibleError
from .phases import CompositePair, Maxwell, Side
from .polesearch import (S_MAX, ColumnProblem, Family, golden_minimize, pole_from_y, pole_grid,
                         solve_columns, y_from_pole)
from .spectral import SpectralConfig, StepLoading, normalized_scalar
from .sumrules import InfoSet, normalized_known_value


class BoundSense(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class Scalar12:
    """The 11-direction response (``sigma_12`` or ``eps_12``)."""


@dataclass(frozen=True)
class Directional:
    """``sin(alpha) r_12 + cos(alpha) r_13`` of the vector response."""

    alpha: float


# the stress-side and strain-side directional objectives differ only in the response they act on
DirectionalF = Directional
DirectionalG = Directional


@dataclass(frozen=True)
class SearchSettings:
    n_grid: int = 64
    refine: bool = True

    def scaled(self, factor: float) -> "SearchSettings":
        return SearchSettings(max(4, int(round(self.n_grid * factor))), self.refine)


@dataclass(frozen=True)
class BoundQuery:
    pair: CompositePair
    info: InfoSet = field(default_factory=InfoSet)
    loading: Optional[StepLoading] = None
    times: tuple = ()
    sense: Optional[BoundSense] = BoundSense.UPPER  # None: both senses
    target: object = field(default_factory=Scalar12)
    settings: SearchSettings = field(default_factory=SearchSettings)

    def __post_init__(self):
        if self.loading is None:
            object.__setattr__(self, "loading", StepLoading((1.0, 0.0), self.pair.side))
        if self.loading.kind is not self.pair.side:
            raise ConfigurationError("loading kind does not match the pair side")
        if self.sense is not None:
            object.__setattr__(self, "sense", BoundSense(self.sense))
        t = np.asarray(self.times, float).reshape(-1)
        if np.any(np.isnan(t)) or np.any(t < 0) or np.any(np.diff(t) <= 0):
            raise ConfigurationError("times must be nonnegative and strictly increasing")
        object.__setattr__(self, "times", tuple(float(x) for x in t))
        if isinstance(self.target, Scalar12) and not self.loading.is_scalar:
            raise ConfigurationError("scalar bounds need a load along the first axis")

    @property
    def amplitude(self) -> float:
        return self.loading.amplitude[0]

    @property
    def scale(self) -> float:
        """Physical response per unit normalised response."""
        return self.pair.response_scale * self.amplitude

    def with_sense(self, sense) -> "BoundQuery":
        return BoundQuery(self.pair, self.info, self.loading, self.times, sense, self.target, self.settings)

    def with_info(self, info) -> "BoundQuery":
        return BoundQuery(self.pair, info, self.loading, self.times, self.sense, self.target, self.settings)


@dataclass
class BoundRecord:
    t: float
    lower: float = float("nan")
    upper: float = float("nan")
    lower_config: Optional[SpectralConfig] = None
    upper_config: Optional[SpectralConfig] = None

    @property
    def gap(self) -> float:
        return self.upper - self.lower


@dataclass
class BoundSeries:
    records: list
    scale: float = 1.0

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def lower(self) -> np.ndarray:
        return np.array([r.lower for r in self.records])

    @property
    def upper(self) -> np.ndarray:
        return np.array([r.upper for r in self.records])

    @property
    def gap(self) -> np.ndarray:
        return self.upper - self.lower

    def normalized(self, which: str) -> np.ndarray:
        return getattr(self, which) / self.scale


# ---------------------------------------------------------------------------
# scalar problem in weight form


def scalar_column_problem(pair: CompositePair, info: InfoSet, t: float, sense: BoundSense,
                          amplitude: float = 1.0) -> ColumnProblem:
    """Rows: unit bound, volume fraction, isotropy, known values (two rows per band)."""
    rows_fn, rhs, slack_rows = [lambda s: np.ones_like(s)], [1.0], [0]
    slack_sign = [1.0]
    if info.volume_fraction is not None:
        rows_fn.append(lambda s: 1.0 - s)
        rhs.append(info.f1)
    if info.transverse_isotropy:
        rows_fn.append(lambda s: s * (1.0 - s))
        rhs.append(info.f1 * info.f2 / 2.0)
    for kv in info.known_values:
        v, band = normalized_known_value(kv, pair, amplitude)
        g = (lambda tau: lambda s: pair._weighted_unchecked(s, tau))(kv.time)
        if band > 0:
            rows_fn.append(g)
            rhs.append(1.0 - v + band)
            slack_rows.append(len(rhs) - 1)
            slack_sign.append(1.0)
            rows_fn.append(g)
            rhs.append(1.0 - v - band)
            slack_rows.append(len(rhs) - 1)
            slack_sign.append(-1.0)
        else:
            rows_fn.append(g)
            rhs.append(1.0 - v)
    R = len(rhs)
    fixed = np.zeros((R, len(slack_rows)))
    for k, (r, sg) in enumerate(zip(slack_rows, slack_sign)):
        fixed[r, k] = sg
    sign = 1.0 if BoundSense(sense) is BoundSense.UPPER else -1.0

    def column(s):
        s = np.asarray(s, float)
        return np.stack([f(s) for f in rows_fn])

    def cost(s):
        return sign * pair._weighted_unchecked(np.asarray(s, float), t)

    return ColumnProblem((Family(column, cost, "scalar"),), np.array(rhs), fixed)


def _config_from_atoms(atoms, side) -> SpectralConfig:
    poles = np.array([a.pole for a in atoms])
    w = np.array([a.weight for a in atoms])
    return SpectralConfig(poles, w * (1.0 - poles), side)


def _no_info_batch(pair: CompositePair, times: np.ndarray, sense: BoundSense, n_grid: int = 64):
    """Vectorised single-pole search; returns normalised values and poles (NaN = pure phase 2)."""
    pair._require_closed_form()
    times = np.asarray(times, float).reshape(-1)
    sign = 1.0 if BoundSense(sense) is BoundSense.UPPER else -1.0
    S = pole_grid(n_grid)
    cost = sign * pair._weighted_unchecked(S[None, :], times[:, None])
    k = np.argmin(cost, axis=1)
    best = cost[np.arange(times.size), k]
    lo_s = S[np.maximum(k - 1, 0)]
    hi_s = S[np.minimum(k + 1, S.size - 1)]
    f = lambda y: sign * pair._weighted_unchecked(pole_from_y(y), times)
    y_opt, v_opt = golden_minimize(f, y_from_pole(lo_s), y_from_pole(hi_s))
    pole = pole_from_y(y_opt)
    # bracket endpoints may beat the interior search (boundary optima)
    for cand in (lo_s, hi_s, S[k]):
        vc = sign * pair._weighted_unchecked(cand, times)
        take = vc <= v_opt
        pole = np.where(take, cand, pole)
        v_opt = np.where(take, vc, v_opt)
    slack = v_opt >= 0.0  # pure phase 2 has weighted kernel 0
    v_opt = np.where(slack, 0.0, v_opt)
    pole = np.where(slack, np.nan, pole)
    value = 1.0 - sign * v_opt
    return value, pole


def _is_no_info(info: InfoSet) -> bool:
    return info.volume_fraction is None and not info.known_values


def _scalar_bound(query: BoundQuery, t: float, sense: BoundSense, warm=()):
    pair, info = query.pair, query.info
    if _is_no_info(info):
        value, pole = _no_info_batch(pair, np.array([t]), sense, query.settings.n_grid)
        p = pole[0]
        cfg = (SpectralConfig([], [], pair.side) if np.isnan(p)
               else SpectralConfig([p], [1.0 - p], pair.side))
        return float(value[0]), cfg
    problem = scalar_column_problem(pair, info, t, sense, query.amplitude)
    sol = solve_columns(problem, query.settings.n_grid, extra_poles=warm, refine=query.settings.refine)
    sign = 1.0 if sense is BoundSense.UPPER else -1.0
    value = 1.0 - sign * sol.value
    return value, _config_from_atoms(sol.atoms, pair.side)


def optimize_bound(query: BoundQuery, t: float, sense: Optional[BoundSense] = None, warm=()):
    """Extremal response at time ``t`` and a configuration attaining it (physical units)."""
    sense = BoundSense(sense or query.sense or BoundSense.UPPER)
    if isinstance(query.target, Directional):
        from .geometry import directional_bound
        return directional_bound(query, t, sense)
    if not query.pair.has_closed_form:
        query.pair._require_closed_form()
    norm, cfg = _scalar_bound(query, float(t), sense, warm)
    return query.scale * norm, cfg


def _sweep_chunk(query: BoundQuery, times: Sequence[float], senses):
    out = []
    warm = {s: () for s in senses}
    for t in times:
        rec = BoundRecord(float(t))
        for s in senses:
            v, cfg = optimize_bound(query, t, s, warm[s])
            if s is BoundSense.UPPER:
                rec.upper, rec.upper_config = v, cfg
            else:
                rec.lower, rec.lower_config = v, cfg
            warm[s] = tuple(cfg.poles)
        out.append(rec)
    return out


SWEEP_CHUNK = 32


def sweep_bounds(query: BoundQuery, threads: int = 1) -> BoundSeries:
    """One record per time; each chunk of consecutive times warm-starts from its predecessor."""
    senses = [query.sense] if query.sense is not None else [BoundSense.LOWER, BoundSense.UPPER]
    times = np.asarray(query.times, float)
    if isinstance(query.target, Scalar12) and _is_no_info(query.info):
        recs = [BoundRecord(float(t)) for t in times]
        for s in senses:
            vals, poles = _no_info_batch(query.pair, times, s, query.settings.n_grid)
            for r, v, p in zip(recs, vals, poles):
                cfg = (SpectralConfig([], [], query.pair.side) if np.isnan(p)
                       else SpectralConfig([p], [1.0 - p], query.pair.side))
                if s is BoundSense.UPPER:
                    r.upper, r.upper_config = query.scale * v, cfg
                else:
                    r.lower, r.lower_config = query.scale * v, cfg
        return BoundSeries(recs, query.scale)
    chunks = [times[i:i + SWEEP_CHUNK] for i in range(0, times.size, SWEEP_CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda c: _sweep_chunk(query, c, senses), chunks))
    else:
        parts = [_sweep_chunk(query, c, senses) for c in chunks]
    return BoundSeries([r for p in parts for r in p], query.scale)


# ---------------------------------------------------------------------------
# closed forms for the Maxwell/elastic pair without information


def _maxwell_params(pair: CompositePair):
    if pair.side is not Side.STRESS or not isinstance(pair.phase1, Maxwell):
        raise DomainError("closed forms need a stress-side Maxwell/elastic pair")
    p = pair.phase1
    return p.G_M, p.eta_M, pair.G2


def crossover_times(pair: CompositePair) -> tuple[float, float, float]:
    """``(t1, t2, t3)``: upper bound leaves phase 1, lower bound switches phase, upper reaches phase 2."""
    GM, eta, G2 = _maxwell_params(pair)
    if not GM > G2:
        raise DomainError("closed-form crossovers need G_M > G2")
    r = G2 / GM
    return eta / GM * (1 - r), eta / GM * math.log(GM / G2), eta / G2 * (1 - r)


def optimal_pole_analytic(t: float, pair: CompositePair) -> float:
    """Stationary pole of the single-pole upper bound for ``t`` in ``[t1, t3]``."""
    GM, eta, G2 = _maxwell_params(pair)
    t1, _, t3 = crossover_times(pair)
    tol = 1e-12 * max(1.0, t3)
    if not (t1 - tol <= t <= t3 + tol):
        raise DomainError(f"t={t} outside [t1, t3] = [{t1:.6g}, {t3:.6g}]")
    r = G2 / GM
    s = (t * G2 / eta - r * (1 - r)) / (1 - r) ** 2
    return float(min(max(s, 0.0), np.nextafter(1.0, 0.0)))


def no_info_closed_form(pair: CompositePair, t, amplitude: float = 1.0):
    """``(lower, upper)`` of the 12-stress without microstructural information."""
    GM, eta, G2 = _maxwell_params(pair)
    t = np.asarray(t, float)
    t1, _, t3 = crossover_times(pair)
    r = G2 / GM
    phase1 = GM * np.exp(-GM * t / eta)
    phase2 = np.full_like(t, G2)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        d = G2 * t / (eta * (1 - r))
        middle = G2 * np.exp(d - 1.0) / d
    upper = np.where(t <= t1, phase1, np.where(t >= t3, phase2, middle))
    lower = np.minimum(phase1, phase2)
    return amplitude * lower, amplitude * upper


# ---------------------------------------------------------------------------
# numeric branch switches


def _branch(pair, t, sense, tol=1e-9) -> str:
    _, pole = _no_info_batch(pair, np.array([t]), sense)
    p = pole[0]
    if np.isnan(p) or p > 1 - tol:
        return "phase2"
    if p < tol:
        return "phase1"
    return "interior"


@dataclass(frozen=True)
class Crossover:
    t: float
    sense: BoundSense
    before: str
    after: str


def detect_crossovers(pair: CompositePair, t_max: float = 10.0, n: int = 500, xtol: float = 1e-10):
    """Times where the no-information bound changes attaining microstructure."""
    times = np.linspace(0.0, t_max, n)
    found = []
    for sense in (BoundSense.UPPER, BoundSense.LOWER):
        _, poles = _no_info_batch(pair, times, sense)
        labels = np.where(np.isnan(poles) | (poles > 1 - 1e-9), "phase2",
                          np.where(poles < 1e-9, "phase1", "interior"))
        for i in np.flatnonzero(labels[1:] != labels[:-1]):
            a, b = times[i], times[i + 1]
            la, lb = labels[i], labels[i + 1]
            while b - a > xtol:
                m = 0.5 * (a + b)
                if _branch(pair, m, sense) == la:
                    a = m
                else:
                    b = m
            found.append(Crossover(0.5 * (a + b), sense, str(la), str(lb)))
    return sorted(found, key=lambda c: c.t)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class KernelSpread:
    spread: float
    mean: float
    fit_residual: float

    @property
    def relative_spread(self) -> float:
        return self.spread / abs(self.mean)


def tightness_coefficient_spread(t: float, poles_grid=None, pair: Optional[CompositePair] = None) -> KernelSpread:
    """Spread of ``K(., t)`` over a pole grid and the worst residual of its best affine fit in ``s``."""
    pair = pair or _default_pair()
    s = np.linspace(0.0, 0.99, 100) if poles_grid is None else np.asarray(poles_grid, float)
    k = pair.kernel(s, t)
    X = np.stack([np.ones_like(s), s], axis=1)
    coef, *_ = np.linalg.lstsq(X, k, rcond=None)
    resid = float(np.max(np.abs(X @ coef - k)))
    return KernelSpread(float(k.max() - k.min()), float(k.mean()), resid)


def _default_pair():
    from .phases import default_stress_pair
    return default_stress_pair()


def gap_local_minima(query: BoundQuery, t_lo: float, t_hi: float, n: int = 200, xatol: float = 1e-4):
    """Local minima of ``upper - lower`` (normalised) on ``[t_lo, t_hi]``, refined by bounded Brent."""
    q = query.with_sense(None)
    times = np.linspace(t_lo, t_hi, n)
    series = sweep_bounds(BoundQuery(q.pair, q.info, q.loading, tuple(times), None, q.target, q.settings))
    gap = series.gap / series.scale
    out = []
    for i in range(1, n - 1):
        if gap[i] <= gap[i - 1] and gap[i] <= gap[i + 1]:
            def gf(t):
                lo, _ = optimize_bound(q, t, BoundSense.LOWER)
                hi, _ = optimize_bound(q, t, BoundSense.UPPER)
                return (hi - lo) / q.scale
            res = minimize_scalar(gf, bounds=(times[i - 1], times[i + 1]), method="bounded",
                                  options={"xatol": xatol})
            out.append((float(res.x), float(res.fun)))
    return out


# ---------------------------------------------------------------------------
# inverse use of the bounds


class InconsistentDataError(ConfigurationError):
    """A measurement lies outside the bounds that hold without any information."""


@dataclass(frozen=True)
class VolumeFractionEstimate:
    intervals: tuple  # disjoint closed intervals of admissible f1

    @property
    def empty(self) -> bool:
        return len(self.intervals) == 0

    @property
    def interval(self):
        """Hull of the admissible set, or ``None`` when empty."""
        if self.empty:
            return None
        return (self.intervals[0][0], self.intervals[-1][1])

    @property
    def width(self) -> float:
        iv = self.interval
        return 0.0 if iv is None else iv[1] - iv[0]

    def contains(self, f1: float) -> bool:
        return any(a <= f1 <= b for a, b in self.intervals)


def invert_volume_fraction(measurements, pair: CompositePair, info_base: Optional[InfoSet] = None,
                           amplitude: float = 1.0, n_scan: int = 99, xtol: float = 1e-6,
                           tol: float = 1e-9, settings: SearchSettings = SearchSettings()):
    """Volume fractions whose bounds contain every measured ``(t, response)``."""
    meas = [(float(t), float(v)) for t, v in measurements]
    if not meas:
        raise ConfigurationError("at least one measurement is required")
    info_base = info_base or InfoSet()
    loading = StepLoading((amplitude, 0.0), pair.side)
    base = BoundQuery(pair, info_base.with_volume_fraction(None), loading, settings=settings)
    for t, v in meas:
        lo, _ = optimize_bound(base, t, BoundSense.LOWER)
        hi, _ = optimize_bound(base, t, BoundSense.UPPER)
        if v < lo - tol * abs(base.scale) or v > hi + tol * abs(base.scale):
            raise InconsistentDataError(f"measurement {v!r} at t={t} outside [{lo!r}, {hi!r}]")

    def pure_phase(f1, t):
        # f1 = 0 and f1 = 1 are the pure phases: both bounds collapse onto their response
        return 1.0 if f1 <= 0 else 1.0 - float(pair.weighted_kernel(0.0, t))

    def margin(f1):
        if f1 <= 0 or f1 >= 1:
            checks = meas + [(k.time, k.value) for k in info_base.known_values]
            return min(tol - abs(v / base.scale - pure_phase(f1, t)) for t, v in checks)
        q = BoundQuery(pair, info_base.with_volume_fraction(f1), loading, settings=settings)
        worst = np.inf
        for t, v in meas:
            try:
                lo, _ = optimize_bound(q, t, BoundSense.LOWER)
                hi, _ = optimize_bound(q, t, BoundSense.UPPER)
            except InfeasibleError:
                return -np.inf
            worst = min(worst, (v - lo) / base.scale + tol, (hi - v) / base.scale + tol)
        return worst

    grid = np.linspace(0.0, 1.0, n_scan + 2)
    m_grid = np.array([margin(f) for f in grid])
    ok = m_grid >= 0

    def edge(a, b):
        # a feasible, b infeasible (either order)
        fa = margin(a) >= 0
        while abs(b - a) > xtol:
            m = 0.5 * (a + b)
            if (margin(m) >= 0) == fa:
                a = m
            else:
                b = m
        return a

    intervals = []
    i = 0
    while i < grid.size:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < grid.size and ok[j + 1]:
            j += 1
        left = edge(grid[i], grid[i - 1]) if i > 0 else 0.0
        right = edge(grid[j], grid[j + 1]) if j + 1 < grid.size else 1.0
        intervals.append((float(left), float(right)))
        i = j + 1
    if not intervals:
        # a narrow admissible set can fall between scan points; look near the best margin
        k = int(np.argmax(m_grid))
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
        res = minimize_scalar(lambda f: -margin(f), bounds=(a, b), method="bounded",
                              options={"xatol": xtol})
        if -res.fun >= 0:
            intervals.append((float(edge(res.x, a)), float(edge(res.x, b))))
    return VolumeFractionEstimate(tuple(intervals))
