"""Attainable response sets in the plane and support-function bounds.

Plot coordinates are ``(x, y) = (r_13, r_12)`` of the response divided by the
pure-phase-2 response to a unit load, so for a unit strain step along the first
axis the two pure phases sit at ``(0, 1)`` and ``(0, G_M/G2)`` at ``t = 0``.

Under reflective symmetry every residue is diagonal in a common frame at angle
``theta``, and the response is ``load - G_A u1 (u1.load) - G_B u2 (u2.load)``
with ``G_A = sum g(s_i, t) wA_i`` and ``G_B`` alike (``g`` the weighted kernel).
None of the constraints involve ``theta``, so the attainable ``(G_A, G_B)``
form one convex "track-sum" set per time and each orientation's response set
is a linear image of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigurationError, InfeasibleError
from .lp import Status, solve_standard
from .optimizer import (BoundQuery, BoundSense, Directional, SearchSettings, _no_info_batch,
                        scalar_column_problem)
from .phases import CompositePair
from .polesearch import ColumnProblem, Family, solve_columns
from .spectral import SpectralConfig, StepLoading, rotation_vectors
from .sumrules import InfoSet, SecondTrackReading, tensor_discretization

# ---------------------------------------------------------------------------
# planar convex geometry


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise hull vertices (monotone chain); collinear points dropped."""
    pts = np.unique(np.asarray(points, float).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts
    scale = max(1.0, float(np.abs(pts).max()))
    eps = 1e-14 * scale * scale
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= eps:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= eps:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    return hull


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    vertices: np.ndarray  # counter-clockwise, not closed

    @classmethod
    def from_points(cls, points) -> "ConvexPolygon":
        return cls(convex_hull(points))

    @property
    def area(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def is_convex(self, tol: float = 1e-12) -> bool:
        v = self.vertices
        if len(v) < 3:
            return True
        a, b, c = v, np.roll(v, -1, axis=0), np.roll(v, -2, axis=0)
        cr = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
        return bool(np.all(cr >= -tol))

    def support_min(self, direction) -> float:
        """``min_{x in P} direction . x``."""
        return float((self.vertices @ np.asarray(direction, float)).min())

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, float))
        v = self.vertices
        if len(v) == 0:
            return np.zeros(len(pts), bool)
        if len(v) == 1:
            return np.linalg.norm(pts - v[0], axis=1) <= tol
        if len(v) == 2:
            a, b = v
            d = b - a
            L = float(np.dot(d, d))
            u = np.clip((pts - a) @ d / L, 0, 1)
            return np.linalg.norm(pts - (a + u[:, None] * d), axis=1) <= tol
        a = v
        b = np.roll(v, -1, axis=0)
        e = b - a
        rel = pts[:, None, :] - a[None, :, :]
        cr = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
        lens = np.linalg.norm(e, axis=1)
        return np.all(cr >= -tol * lens[None, :], axis=1)

    def closed(self) -> np.ndarray:
        return np.vstack([self.vertices, self.vertices[:1]]) if len(self.vertices) else self.vertices


def to_plot(response: np.ndarray) -> np.ndarray:
    """``(r_12, r_13) -> (x, y) = (r_13, r_12)``."""
    r = np.asarray(response, float)
    return r[..., ::-1]


def _unit_load(loading: StepLoading) -> np.ndarray:
    v = loading.vector
    n = np.linalg.norm(v)
    if n == 0:
        raise ConfigurationError("load vector must be nonzero")
    return v / n


def _response_norm(pair: CompositePair, loading: StepLoading) -> float:
    return pair.response_scale * float(np.linalg.norm(loading.vector))


# ---------------------------------------------------------------------------
# track-sum set under reflective symmetry


@dataclass
class TrackPoint:
    G: np.ndarray                      # (G_A, G_B)
    atoms: list = field(default_factory=list)  # (track, pole, weight), track 0 = A, 1 = B


@dataclass
class TrackSet:
    """Attainable ``(G_A, G_B)`` at one time, described by sampled extreme points."""

    t: float
    points: list

    @property
    def polygon(self) -> ConvexPolygon:
        return ConvexPolygon.from_points(np.array([p.G for p in self.points]))


def _require_vector_info(info: InfoSet):
    if info.known_values:
        raise ConfigurationError("known values are only supported for scalar 12-bounds")


def _scalar_range(pair, info, t, settings: SearchSettings):
    """``(min, max)`` of ``sum g w`` under the scalar rules, with attaining atoms."""
    if info.volume_fraction is None:
        lo_v, lo_p = _no_info_batch(pair, np.array([t]), BoundSense.UPPER, settings.n_grid)
        hi_v, hi_p = _no_info_batch(pair, np.array([t]), BoundSense.LOWER, settings.n_grid)
        gmin, gmax = 1.0 - lo_v[0], 1.0 - hi_v[0]
        amin = [] if np.isnan(lo_p[0]) else [(lo_p[0], 1.0)]
        amax = [] if np.isnan(hi_p[0]) else [(hi_p[0], 1.0)]
        return (gmin, amin), (gmax, amax)
    out = []
    for sense in (BoundSense.UPPER, BoundSense.LOWER):
        prob = scalar_column_problem(pair, info, t, sense)
        sol = solve_columns(prob, settings.n_grid, refine=settings.refine)
        sign = 1.0 if sense is BoundSense.UPPER else -1.0
        out.append((sign * sol.value, [(a.pole, a.weight) for a in sol.atoms]))
    return out[0], out[1]


def _track_problem(pair, info: InfoSet, t: float, c) -> ColumnProblem:
    f1, f2 = info.f1, info.f2
    rhs_b = f1 if info.second_track is SecondTrackReading.F1 else f1 * f2
    rhs = np.array([1.0, 1.0, f1, rhs_b, f1 * f2])

    def colA(s):
        s = np.asarray(s, float)
        z = np.zeros_like(s)
        return np.stack([np.ones_like(s), z, 1 - s, z, s * (1 - s)])

    def colB(s):
        s = np.asarray(s, float)
        z = np.zeros_like(s)
        return np.stack([z, np.ones_like(s), z, 1 - s, s * (1 - s)])

    g = lambda s: pair._weighted_unchecked(np.asarray(s, float), t)
    fams = (Family(colA, lambda s: c[0] * g(s), "A"), Family(colB, lambda s: c[1] * g(s), "B"))
    fixed = np.zeros((5, 2))
    fixed[0, 0] = fixed[1, 1] = 1.0
    return ColumnProblem(fams, rhs, fixed)


def track_support(pair: CompositePair, info: InfoSet, t: float, c, settings: SearchSettings = SearchSettings(),
                  warm=()):
    """``min c . (G_A, G_B)`` over reflective configurations; returns a ``TrackPoint``."""
    _require_vector_info(info)
    c = np.asarray(c, float)
    if info.volume_fraction is None or info.transverse_isotropy:
        (gmin, amin), (gmax, amax) = _scalar_range(pair, info, t, settings)
        if info.transverse_isotropy:
            # residues proportional to the identity: G_A = G_B
            take_min = c.sum() >= 0
            G = gmin if take_min else gmax
            atoms = amin if take_min else amax
            return TrackPoint(np.array([G, G]), [(k, p, w) for p, w in atoms for k in (0, 1)])
        pts, atoms = [], []
        for k in (0, 1):
            take_min = c[k] >= 0
            pts.append(gmin if take_min else gmax)
            atoms += [(k, p, w) for p, w in (amin if take_min else amax)]
        return TrackPoint(np.array(pts), atoms)
    sol = solve_columns(_track_problem(pair, info, t, c), settings.n_grid, extra_poles=warm,
                        refine=settings.refine)
    G = np.zeros(2)
    atoms = []
    for a in sol.atoms:
        G[a.family] += float(pair._weighted_unchecked(np.array(a.pole), t)) * a.weight
        atoms.append((a.family, a.pole, a.weight))
    return TrackPoint(G, atoms)


def track_set(pair: CompositePair, info: InfoSet, t: float, n_dirs: int = 256,
              settings: SearchSettings = SearchSettings()) -> TrackSet:
    _require_vector_info(info)
    if info.volume_fraction is None or info.transverse_isotropy:
        # box or diagonal segment: its corners are exact
        dirs = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], float)
    else:
        phi = 2 * np.pi * np.arange(n_dirs) / n_dirs
        dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    points, warm = [], ()
    for d in dirs:
        tp = track_support(pair, info, t, d, settings, warm)
        warm = tuple(p for _, p, _ in tp.atoms)
        points.append(tp)
    return TrackSet(t, points)


def _image_vectors(theta: float, load: np.ndarray):
    u1, u2 = rotation_vectors(np.asarray(theta, float))
    return u1 * (u1 @ load), u2 * (u2 @ load)


def track_point_config(tp: TrackPoint, theta: float, side) -> SpectralConfig:
    rows, poles = [], []
    for k, p, w in tp.atoms:
        b = w * (1.0 - p)
        rows.append((theta, b, 0.0) if k == 0 else (theta, 0.0, b))
        poles.append(p)
    if not rows:
        return SpectralConfig(np.zeros(0), np.zeros((0, 3)), side)
    return SpectralConfig(np.array(poles), np.array(rows), side)


# ---------------------------------------------------------------------------
# response domains


@dataclass
class OrientationHull:
    theta: float
    polygon: ConvexPolygon
    jumps: list = field(default_factory=list)  # ((x0, y0), (x1, y1)) straight joins


@dataclass
class ResponseDomain:
    t: float
    hulls: list
    extent: tuple = None           # (xmin, xmax, ymin, ymax) of the mask
    mask: np.ndarray = None        # occupancy raster, rows along y

    @property
    def polygons(self) -> list:
        return [h.polygon for h in self.hulls]

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(points)
        inside = np.zeros(len(pts), bool)
        for p in self.polygons:
            inside |= p.contains(pts, tol)
        return inside

    @property
    def area(self) -> float:
        if self.mask is None:
            return float("nan")
        x0, x1, y0, y1 = self.extent
        ny, nx = self.mask.shape
        return float(self.mask.sum()) * (x1 - x0) / nx * (y1 - y0) / ny

    def boundary_points(self, tol: float = 1e-9) -> np.ndarray:
        """Hull vertices not strictly inside another orientation's hull."""
        out = []
        for i, h in enumerate(self.hulls):
            for v in h.polygon.vertices:
                inner = any(j != i and _strictly_inside(o.polygon, v, tol) for j, o in enumerate(self.hulls))
                if not inner:
                    out.append(v)
        return np.array(out).reshape(-1, 2)


def _strictly_inside(poly: ConvexPolygon, p, tol) -> bool:
    v = poly.vertices
    if len(v) < 3:
        return False
    e = np.roll(v, -1, axis=0) - v
    rel = p - v
    cr = e[:, 0] * rel[:, 1] - e[:, 1] * rel[:, 0]
    return bool(np.all(cr > tol * np.linalg.norm(e, axis=1)))


def _hull_for_orientation(Q: TrackSet, theta: float, load_unit: np.ndarray, alphas) -> OrientationHull:
    P, Qv = _image_vectors(theta, load_unit)
    G = np.array([p.G for p in Q.points])
    resp = load_unit[None, :] - G[:, :1] * P[None, :] - G[:, 1:] * Qv[None, :]
    pts = to_plot(resp)
    poly = ConvexPolygon.from_points(pts)
    return OrientationHull(float(theta), poly, _jumps(poly, alphas))


def _jumps(poly: ConvexPolygon, alphas) -> list:
    """Straight joins between minimisers of consecutive objective angles."""
    v = poly.vertices
    if len(v) < 2:
        return []
    # objective sin(a) r12 + cos(a) r13 = (cos a, sin a) . (x, y)
    d = np.stack([np.cos(alphas), np.sin(alphas)], axis=1)
    idx = np.argmin(v @ d.T, axis=0)
    m = v[idx]
    steps = np.linalg.norm(np.diff(m, axis=0), axis=1)
    nz = steps[steps > 0]
    if nz.size == 0:
        return []
    spacing = float(np.median(nz))
    return [(tuple(m[i]), tuple(m[i + 1])) for i in np.flatnonzero(steps > 10 * spacing)]


def _alpha_grid(alpha_grid) -> np.ndarray:
    if np.ndim(alpha_grid) == 0:
        return 2 * np.pi * np.arange(int(alpha_grid)) / int(alpha_grid)
    return np.asarray(alpha_grid, float)


def domain_fixed_orientation(t: float, theta: float, pair: CompositePair, info: InfoSet,
                             loading: StepLoading, alpha_grid=256,
                             settings: SearchSettings = SearchSettings(),
                             track: Optional[TrackSet] = None) -> OrientationHull:
    """Convex hull of the objective minimisers at one residue orientation."""
    if info.symmetry.value != "reflective":
        raise ConfigurationError("orientation hulls need reflective symmetry")
    alphas = _alpha_grid(alpha_grid)
    Q = track or track_set(pair, info, t, alphas.size, settings)
    return _hull_for_orientation(Q, theta, _unit_load(loading), alphas)


def domain_union_over_orientations(t: float, theta_grid, pair: CompositePair, info: InfoSet,
                                   loading: StepLoading, alpha_grid=256,
                                   settings: SearchSettings = SearchSettings(),
                                   mask_resolution: int = 200, extent=None) -> ResponseDomain:
    """Union of the per-orientation hulls plus an occupancy raster."""
    thetas = (np.pi * np.arange(int(theta_grid)) / int(theta_grid) if np.ndim(theta_grid) == 0
              else np.asarray(theta_grid, float))
    alphas = _alpha_grid(alpha_grid)
    Q = track_set(pair, info, t, alphas.size, settings)
    hulls = [domain_fixed_orientation(t, th, pair, info, loading, alphas, settings, Q) for th in thetas]
    dom = ResponseDomain(float(t), hulls)
    if mask_resolution:
        rasterize(dom, mask_resolution, extent)
    return dom


def rasterize(dom: ResponseDomain, resolution: int = 200, extent=None) -> ResponseDomain:
    if extent is None:
        allv = np.vstack([p.vertices for p in dom.polygons if len(p.vertices)])
        xr = float(np.abs(allv[:, 0]).max()) * 1.05 + 1e-9
        ylo, yhi = float(allv[:, 1].min()), float(allv[:, 1].max())
        pad = 0.05 * (yhi - ylo) + 1e-9
        extent = (-xr, xr, ylo - pad, yhi + pad)  # symmetric in x
    x0, x1, y0, y1 = extent
    xs = x0 + (np.arange(resolution) + 0.5) * (x1 - x0) / resolution
    ys = y0 + (np.arange(resolution) + 0.5) * (y1 - y0) / resolution
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    dom.mask = dom.contains(pts, tol=0.0).reshape(resolution, resolution)
    dom.extent = extent
    return dom


def laminate_reference_curve(t: float, theta: float, pair: CompositePair, loading: StepLoading,
                             f1_grid=None) -> np.ndarray:
    """Plot points of simple laminates at orientation ``theta`` for each volume fraction.

    The A-direction (normal to the layers) carries residue ``f1`` at pole ``f2``
    (harmonic mean) and the B-direction carries ``f1`` at pole 0 (arithmetic mean).
    """
    f1s = np.linspace(0.0, 1.0, 51) if f1_grid is None else np.asarray(f1_grid, float)
    load = _unit_load(loading)
    out = []
    for f1 in f1s:
        out.append(to_plot(laminate_response(t, theta, pair, load, f1)))
    return np.array(out)


def laminate_config(theta: float, f1: float, side) -> SpectralConfig:
    if f1 <= 0.0:
        return SpectralConfig(np.zeros(0), np.zeros((0, 3)), side)
    f2 = 1.0 - f1
    return SpectralConfig(np.array([f2, 0.0]), np.array([[theta, f1, 0.0], [theta, 0.0, f1]]), side)


def laminate_response(t, theta, pair, load_unit, f1) -> np.ndarray:
    """Normalised vector response of the laminate; exact at ``f1 = 0`` and ``f1 = 1``."""
    from .spectral import normalized_vector
    return normalized_vector(laminate_config(theta, f1, pair.side), pair, load_unit, np.float64(t))


# ---------------------------------------------------------------------------
# support functions over all composites (no symmetry assumed)


@dataclass(frozen=True)
class Discretization:
    n_poles: int = 49
    n_angles: int = 12

    def scaled(self, factor: float) -> "Discretization":
        return Discretization(max(4, int(round(self.n_poles * factor))), max(2, int(round(self.n_angles * factor))))


def _atoms(disc: Discretization):
    poles, angles = tensor_discretization(disc.n_poles, disc.n_angles)
    u1, u2 = rotation_vectors(angles)
    s = np.concatenate([poles, poles])
    n = np.vstack([u1, u2])  # unit directions of rank-one weights
    return s, n


def support_lp(pair: CompositePair, info: InfoSet, terms, disc: Discretization = Discretization()):
    """``min sum_j Tr(A_j (I - sum_i g(s_i, t_j) W_i))`` over discretised weights.

    ``terms`` is a list of ``(t_j, A_j)``; returns ``(value, solution)`` where the
    solution lists ``(pole, direction or None for isotropic, weight)`` atoms.
    """
    _require_vector_info(info)
    terms = [(float(t), np.asarray(A, float)) for t, A in terms]
    delta = info.fictitious_delta
    s, n = _atoms(disc)
    if info.transverse_isotropy:
        s = np.unique(s)
        cols = _iso_columns(s, info)
        cost = np.zeros(s.size)
        for t, A in terms:
            cost -= pair._weighted_unchecked(s, t) * np.trace(A)
        fict_cols = _iso_columns(np.array([1 - delta]), info, fictitious=True)
        fict_cost = np.zeros(1)
        for t, A in terms:
            fict_cost -= pair._weighted_unchecked(np.array([1 - delta]), t) * np.trace(A)
        fict_dirs = [None]
    else:
        cols = _rank1_columns(s, n, info)
        cost = np.zeros(s.size)
        for t, A in terms:
            Asym = 0.5 * (A + A.T)
            cost -= pair._weighted_unchecked(s, t) * np.einsum("ki,ij,kj->k", n, Asym, n)
        # the fictitious pole carries any positive semidefinite weight
        fn = np.vstack([n[: disc.n_angles], n[disc.n_poles * disc.n_angles: disc.n_poles * disc.n_angles + disc.n_angles]])
        fs = np.full(len(fn), 1 - delta)
        fict_cols = _rank1_columns(fs, fn, info, fictitious=True)
        fict_cost = np.zeros(len(fn))
        for t, A in terms:
            Asym = 0.5 * (A + A.T)
            fict_cost -= pair._weighted_unchecked(fs, t) * np.einsum("ki,ij,kj->k", fn, Asym, fn)
        fict_dirs = list(fn)
    rhs = _rhs(info)
    A_all = np.hstack([cols, fict_cols])
    c_all = np.concatenate([cost, fict_cost])
    status, x, _ = solve_standard(A_all, rhs, c_all, rule="dantzig")
    if status is Status.INFEASIBLE:
        raise InfeasibleError("support LP infeasible")
    if status is not Status.OPTIMAL:
        raise InfeasibleError(f"support LP returned {status.value}")
    const = sum(float(np.trace(A)) for _, A in terms)
    value = const + float(c_all @ x)
    atoms = []
    m = cols.shape[1]
    for k in np.flatnonzero(x > 0):
        if k < m:
            atoms.append((float(s[k]), None if info.transverse_isotropy else n[k], float(x[k])))
        else:
            atoms.append((1 - delta, fict_dirs[k - m], float(x[k])))
    return value, atoms


def _rhs(info: InfoSet):
    rhs = [1.0, 1.0, 0.0]
    if info.volume_fraction is not None:
        f1, f2 = info.f1, info.f2
        rhs += [f1, f1, 0.0, f1 * f2]
    return np.array(rhs)


def _rank1_columns(s, n, info, fictitious=False):
    n1, n2 = n[:, 0], n[:, 1]
    rows = [n1 * n1, n2 * n2, n1 * n2]
    if info.volume_fraction is not None:
        f = 0.0 if fictitious else 1.0
        rows += [f * (1 - s) * n1 * n1, f * (1 - s) * n2 * n2, f * (1 - s) * n1 * n2, f * (1 - s) * s]
    return np.array(rows)


def _iso_columns(s, info, fictitious=False):
    one = np.ones_like(s)
    rows = [one, one, 0 * s]
    if info.volume_fraction is not None:
        f = 0.0 if fictitious else 1.0
        rows += [f * (1 - s), f * (1 - s), 0 * s, f * 2 * (1 - s) * s]
    return np.array(rows)


def no_info_kernel_support(V, t: float, pair: CompositePair) -> float:
    """Exact ``min Tr(V C(t))`` over all composites when nothing is known (normalised)."""
    V = np.asarray(V, float)
    V = 0.5 * (V + V.T)
    (gmin, _), (gmax, _) = _scalar_range(pair, InfoSet(), t, SearchSettings())
    g_hi, g_lo = max(0.0, gmax), min(0.0, gmin)
    lam = np.linalg.eigvalsh(V)
    return float(np.trace(V) - np.sum(np.maximum(lam * g_hi, lam * g_lo)))


def kernel_support(V, t: float, pair: CompositePair, info: InfoSet = InfoSet(),
                   disc: Discretization = Discretization()) -> float:
    """``min Tr(V C(t))`` over admissible composites, in physical units.

    ``C`` is the relaxation kernel (stress side) or creep kernel (strain side).
    Without information the value is exact; otherwise it is the discretised LP.
    """
    V = np.asarray(V, float)
    if V.shape != (2, 2) or not np.allclose(V, V.T, atol=1e-14):
        raise ConfigurationError("V must be a symmetric 2x2 matrix")
    if info.volume_fraction is None and not info.known_values:
        return pair.response_scale * no_info_kernel_support(V, t, pair)
    value, _ = support_lp(pair, info, [(t, V)], disc)
    return pair.response_scale * value


def correlate_support(directions: Sequence, times: Sequence[float], loadings: Sequence[StepLoading],
                      pair: CompositePair, info: InfoSet = InfoSet(),
                      disc: Discretization = Discretization()) -> float:
    """``min sum_j v_j . r(t_j)`` over one shared configuration, in physical units.

    Each ``v_j`` acts on ``(r_12, r_13)`` of the response to load ``loadings[j]``.
    """
    if not (len(directions) == len(times) == len(loadings)) or len(times) == 0:
        raise ConfigurationError("directions, times and loadings must have equal nonzero length")
    terms = []
    for v, t, ld in zip(directions, times, loadings):
        if ld.kind is not pair.side:
            raise ConfigurationError("loading kind does not match the pair side")
        terms.append((float(t), np.outer(ld.vector, np.asarray(v, float))))
    value, _ = support_lp(pair, info, terms, disc)
    return pair.response_scale * value


def directional_support(v, t: float, pair: CompositePair, loading: StepLoading, info: InfoSet = InfoSet(),
                        disc: Discretization = Discretization()) -> float:
    """``min v . r(t)`` over all composites with the given information (physical units)."""
    return correlate_support([v], [t], [loading], pair, info, disc)


def symmetric_direction_fan(n: int = 32) -> list:
    """``n`` unit-Frobenius symmetric 2x2 matrices spread over the sphere.

    The first three are ``diag(1, 0)``, ``diag(0, 1)`` and ``I/sqrt(2)``; the rest
    follow a Fibonacci lattice in ``(v11, v22, sqrt(2) v12)``.
    """
    fixed = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), np.eye(2) / math.sqrt(2)]
    out = fixed[:n]
    m = n - len(out)
    golden = math.pi * (3 - math.sqrt(5))
    for k in range(m):
        z = 1 - 2 * (k + 0.5) / m
        r = math.sqrt(max(0.0, 1 - z * z))
        a, b, c = r * math.cos(golden * k), r * math.sin(golden * k), z
        out.append(np.array([[a, c / math.sqrt(2)], [c / math.sqrt(2), b]]))
    return out


@dataclass
class SupportSet:
    """Sampled ``(direction, min-support)`` pairs."""

    entries: list = field(default_factory=list)

    def add(self, direction, value):
        self.entries.append((np.asarray(direction, float), float(value)))

    def superadditivity_violations(self, evaluate, pairs, tol: float = 1e-9) -> list:
        """Pairs ``(i, j)`` with ``F(v_i + v_j) < F(v_i) + F(v_j) - tol``."""
        bad = []
        for i, j in pairs:
            (vi, fi), (vj, fj) = self.entries[i], self.entries[j]
            if evaluate(vi + vj) < fi + fj - tol:
                bad.append((i, j))
        return bad


# ---------------------------------------------------------------------------
# directional bound with reflective symmetry


def _reflective_directional(pair, info, t, v, load, settings, n_theta: int = 64):
    """``min v . r`` over orientations and track sums; returns ``(value, theta, TrackPoint)``."""
    def at(theta):
        P, Qv = _image_vectors(theta, load)
        c = np.array([-(v @ P), -(v @ Qv)])
        tp = track_support(pair, info, t, c, settings)
        return float(v @ load + c @ tp.G), tp

    thetas = np.pi * np.arange(n_theta) / n_theta
    vals = [at(th)[0] for th in thetas]
    k = int(np.argmin(vals))
    h = np.pi / n_theta
    res = minimize_scalar(lambda th: at(th)[0], bounds=(thetas[k] - h, thetas[k] + h), method="bounded",
                          options={"xatol": 1e-10})
    th = float(res.x) if res.fun < vals[k] else float(thetas[k])
    val, tp = at(th)
    return val, th, tp


def directional_bound(query: BoundQuery, t: float, sense: BoundSense):
    """Bound on ``sin(alpha) r_12 + cos(alpha) r_13`` (physical units) with an attaining config."""
    alpha = query.target.alpha
    v = np.array([math.sin(alpha), math.cos(alpha)])
    sign = 1.0 if BoundSense(sense) is BoundSense.LOWER else -1.0
    pair, info, loading = query.pair, query.info, query.loading
    load = loading.vector
    if info.symmetry.value == "reflective":
        val, th, tp = _reflective_directional(pair, info, float(t), sign * v, load, query.settings)
        return sign * pair.response_scale * val, track_point_config(tp, th, pair.side)
    value, atoms = support_lp(pair, info, [(float(t), np.outer(load, sign * v))])
    poles, rows = [], []
    for p, n, w in atoms:
        b = w * (1 - p)
        if n is None:
            rows.append((0.0, b, b))
        else:
            rows.append((math.atan2(-n[1], n[0]), b, 0.0))
        poles.append(p)
    cfg = SpectralConfig(np.array(poles), np.array(rows).reshape(-1, 3), pair.side, validate=False)
    return sign * pair.response_scale * value, cfg
