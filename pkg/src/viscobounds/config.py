"""TOML run configurations for the command-line front end.

Schema (all tables optional except ``[problem]``)::

    [problem]
    side = "stress"                      # or "strain"
    phase1 = { model = "maxwell", G = 1.0, eta = 1.6666666666666667 }
    phase2 = { model = "elastic", G = 0.5 }

    [loading]
    amplitude = [1.0, 0.0]               # (12, 13) components of the step

    [info]
    volume_fraction = 0.4
    transverse_isotropy = false
    symmetry = "reflective"              # or "nonreflective"
    second_track = "f1"                  # or "f1f2"
    fictitious_delta = 1e-6
    known_values = [{ time = 1.0, value = 0.3, band = 0.0 }]

    [times]
    start = 0.0
    stop = 10.0
    count = 500
    spacing = "linear"                   # or "log" (needs start > 0)

    [target]
    kind = "scalar12"                    # or "directional" with alpha = ...

    [settings]
    n_grid = 64
    refine = true
    alpha_grid = 256
    theta_grid = 64                      # an integer or an explicit list of angles
    mask_resolution = 200
    n_poles = 49
    n_angles = 12

    [kernel]
    directions = 32

    [invert]
    measurements = "meas.csv"            # rows t,value; relative to the config file
    n_scan = 99

    [correlate]
    tuples = [{ times = [0.78, 4.3], directions = [[1.0, 0.0], [1.0, 0.0]] }]

    [output]
    path = "out.csv"
"""
from __future__ import annotations

import hashlib
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigurationError, DomainError
from .geometry import Discretization
from .optimizer import Directional, Scalar12, SearchSettings
from .phases import CompositePair, Elastic, KelvinVoigt, Maxwell, Side
from .spectral import StepLoading
from .sumrules import InfoSet, KnownValue, SecondTrackReading, Symmetry

_MODELS = {"elastic": ("G",), "maxwell": ("G", "eta"), "kelvin_voigt": ("G", "eta")}


@dataclass(frozen=True)
class TimeGrid:
    start: float = 0.0
    stop: float = 10.0
    count: int = 500
    spacing: str = "linear"

    def values(self) -> np.ndarray:
        if self.count < 1:
            raise ConfigurationError("times.count must be >= 1")
        if self.count == 1:
            return np.array([self.start])
        if self.spacing == "log":
            if self.start <= 0:
                raise ConfigurationError("log spacing needs start > 0")
            return np.geomspace(self.start, self.stop, self.count)
        if self.spacing != "linear":
            raise ConfigurationError(f"unknown spacing {self.spacing!r}")
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class GridSettings:
    n_grid: int = 64
    refine: bool = True
    alpha_grid: int = 256
    theta_grid: object = 64
    mask_resolution: int = 200
    n_poles: int = 49
    n_angles: int = 12

    def scaled(self, factor: float) -> "GridSettings":
        if not factor > 0:
            raise ConfigurationError("grid scale must be positive")
        sc = lambda n, lo=2: max(lo, int(round(n * factor)))
        theta = self.theta_grid if not isinstance(self.theta_grid, int) else sc(self.theta_grid, 1)
        return replace(self, n_grid=sc(self.n_grid), alpha_grid=sc(self.alpha_grid, 4), theta_grid=theta,
                       mask_resolution=sc(self.mask_resolution, 8), n_poles=sc(self.n_poles),
                       n_angles=sc(self.n_angles, 1))

    @property
    def search(self) -> SearchSettings:
        return SearchSettings(n_grid=self.n_grid, refine=self.refine)

    @property
    def discretization(self) -> Discretization:
        return Discretization(self.n_poles, self.n_angles)

    def thetas(self) -> np.ndarray:
        if isinstance(self.theta_grid, int):
            return np.pi * np.arange(self.theta_grid) / self.theta_grid
        return np.asarray(self.theta_grid, float).reshape(-1)


@dataclass(frozen=True)
class RunConfig:
    pair: CompositePair
    loading: StepLoading
    info: InfoSet
    times: TimeGrid
    target: object
    grid: GridSettings
    sections: dict = field(default_factory=dict)
    source: Optional[Path] = None
    digest: str = ""

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def resolve(self, path: str) -> Path:
        p = Path(path)
        if not p.is_absolute() and self.source is not None:
            p = self.source.parent / p
        return p


def _phase(spec, where) -> object:
    if not isinstance(spec, dict) or "model" not in spec:
        raise ConfigurationError(f"{where} needs a 'model' key")
    model = spec["model"]
    if model not in _MODELS:
        raise ConfigurationError(f"{where}: unknown model {model!r}")
    extra = set(spec) - {"model", *_MODELS[model]}
    if extra:
        raise ConfigurationError(f"{where}: unexpected keys {sorted(extra)}")
    try:
        args = [float(spec[k]) for k in _MODELS[model]]
    except KeyError as e:
        raise ConfigurationError(f"{where}: missing {e.args[0]!r}") from None
    try:
        return {"elastic": Elastic, "maxwell": Maxwell, "kelvin_voigt": KelvinVoigt}[model](*args)
    except (DomainError, ValueError) as e:
        raise ConfigurationError(f"{where}: {e}") from None


def _info(sec: dict) -> InfoSet:
    try:
        kvs = tuple(KnownValue(float(k["time"]), float(k["value"]), float(k.get("band", 0.0)))
                    for k in sec.get("known_values", ()))
        vf = sec.get("volume_fraction")
        return InfoSet(volume_fraction=None if vf is None else float(vf),
                       transverse_isotropy=bool(sec.get("transverse_isotropy", False)),
                       known_values=kvs,
                       symmetry=Symmetry(sec.get("symmetry", "reflective")),
                       fictitious_delta=float(sec.get("fictitious_delta", 1e-6)),
                       second_track=SecondTrackReading(sec.get("second_track", "f1")))
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(f"[info]: {e}") from None


def parse_config(data: dict, source: Optional[Path] = None, digest: str = "") -> RunConfig:
    """Validate a decoded TOML document; raises ``ConfigurationError``."""
    if "problem" not in data:
        raise ConfigurationError("missing [problem] table")
    prob = data["problem"]
    try:
        side = Side(prob.get("side", "stress"))
    except ValueError:
        raise ConfigurationError(f"unknown side {prob.get('side')!r}") from None
    pair = CompositePair(_phase(prob.get("phase1"), "phase1"), _phase(prob.get("phase2"), "phase2"), side)
    if not pair.has_closed_form:
        want = "maxwell + elastic" if side is Side.STRESS else "kelvin_voigt + elastic"
        raise ConfigurationError(f"{side.value} side needs {want} phases")
    amp = data.get("loading", {}).get("amplitude", [1.0, 0.0])
    if np.ndim(amp) == 0:
        amp = [amp, 0.0]
    try:
        amp = tuple(float(a) for a in amp)
        loading = StepLoading(amp, side)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"[loading]: {e}") from None
    info = _info(data.get("info", {}))
    ts = data.get("times", {})
    try:
        times = TimeGrid(float(ts.get("start", 0.0)), float(ts.get("stop", 10.0)), int(ts.get("count", 500)),
                         str(ts.get("spacing", "linear")))
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"[times]: {e}") from None
    tv = times.values()
    if np.any(~np.isfinite(tv)) or np.any(tv < 0) or np.any(np.diff(tv) <= 0):
        raise ConfigurationError("times must be finite, nonnegative and increasing")
    tg = data.get("target", {})
    kind = tg.get("kind", "scalar12")
    if kind == "scalar12":
        target = Scalar12()
    elif kind == "directional":
        if "alpha" not in tg:
            raise ConfigurationError("directional target needs alpha")
        target = Directional(float(tg["alpha"]))
    else:
        raise ConfigurationError(f"unknown target kind {kind!r}")
    st = data.get("settings", {})
    known = {f for f in GridSettings.__dataclass_fields__}
    extra = set(st) - known
    if extra:
        raise ConfigurationError(f"[settings]: unexpected keys {sorted(extra)}")
    try:
        grid = GridSettings(**{k: (v if k in ("refine", "theta_grid") else int(v)) for k, v in st.items()})
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"[settings]: {e}") from None
    if not isinstance(grid.theta_grid, (int, list)):
        raise ConfigurationError("settings.theta_grid must be an integer or a list")
    sections = {k: v for k, v in data.items() if k in ("kernel", "invert", "correlate", "output", "domain")}
    return RunConfig(pair, loading, info, times, target, grid, sections, source, digest)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigurationError(f"cannot read config: {e}") from None
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"malformed config: {e}") from None
    return parse_config(data, path, hashlib.sha256(raw).hexdigest())


def fmt(x: float) -> str:
    """Full double precision; ``nan`` for missing entries."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".17g")
