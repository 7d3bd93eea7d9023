"""Independent reference computations used by the test-suite.

Nothing here imports the package's kernel or solver code; the oracles work
from the constitutive laws directly.
"""
from __future__ import annotations

import itertools
import math

import mpmath as mp
import numpy as np

# ---------------------------------------------------------------------------
# inverse-Laplace kernels


def _maxwell_carson(GM, eta, lam):
    # lam * Laplace transform of GM exp(-GM t / eta)
    return lam * GM / (lam + GM / eta)


def _kelvin_carson_modulus(GK, eta, lam):
    # reciprocal of lam * Laplace transform of the creep (1 - exp(-GK t/eta)) / GK
    return GK + eta * lam


def talbot_stress_kernel(s0, t, GM=1.0, eta=5 / 3, G2=0.5, dps=30):
    """``K(s0, t)`` from numerically inverting ``1 / (lam (s(lam) - s0))``."""
    mp.mp.dps = dps
    GM, eta, G2, s0 = mp.mpf(GM), mp.mpf(eta), mp.mpf(G2), mp.mpf(s0)

    def F(lam):
        mu1 = _maxwell_carson(GM, eta, lam)
        s = G2 / (G2 - mu1)
        return 1 / (lam * (s - s0))

    return float(mp.invertlaplace(F, t, method="talbot"))


def talbot_strain_kernel(u0, t, GK=0.5, eta=2.05, G2=1.0, dps=30):
    """``L(u0, t)`` from numerically inverting ``1 / (lam (u(lam) - u0))`` on compliances."""
    mp.mp.dps = dps
    GK, eta, G2, u0 = mp.mpf(GK), mp.mpf(eta), mp.mpf(G2), mp.mpf(u0)

    def F(lam):
        m1 = 1 / _kelvin_carson_modulus(GK, eta, lam)
        m2 = 1 / G2
        u = m2 / (m2 - m1)
        return 1 / (lam * (u - u0))

    return float(mp.invertlaplace(F, t, method="talbot"))


# ---------------------------------------------------------------------------
# pure phases and single-pole responses from first principles


def maxwell_relaxation(t, GM=1.0, eta=5 / 3):
    return GM * np.exp(-GM * np.asarray(t, float) / eta)


def kelvin_creep(t, GK=0.5, eta=2.05):
    return (1 - np.exp(-GK * np.asarray(t, float) / eta)) / GK


def no_info_envelope(t, GM=1.0, eta=5 / 3, G2=0.5, n=200001):
    """Brute-force extremes of single-pole responses (normalised), including both pure phases."""
    s = np.linspace(0.0, 1.0, n)[:-1]
    r = G2 / GM
    d = r + s * (1 - r)
    resp = 1 - (1 - np.exp(-(G2 / eta) * (1 - s) * t / d) / d)  # residue 1 - s
    vals = np.concatenate([resp, [1.0]])
    return vals.min(), vals.max()


def laminate_means(f1, m1, m2):
    """Harmonic and arithmetic means of two moduli."""
    return 1 / (f1 / m1 + (1 - f1) / m2), f1 * m1 + (1 - f1) * m2


# ---------------------------------------------------------------------------
# linear programming by vertex enumeration


def enumerate_vertices(A_eq, b_eq, A_ub, b_ub, c, sense="min", tol=1e-9):
    """Optimum of ``c.x`` over ``{A_eq x = b_eq, A_ub x <= b_ub, x >= 0}`` by trying every basis.

    Returns ``(value, x)`` or ``(None, None)`` when infeasible.
    """
    A_eq = np.asarray(A_eq, float).reshape(-1, len(c))
    A_ub = np.asarray(A_ub, float).reshape(-1, len(c))
    n = len(c)
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    A = np.zeros((m_eq + m_ub, n + m_ub))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ub
    A[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([np.asarray(b_eq, float), np.asarray(b_ub, float)])
    cc = np.concatenate([np.asarray(c, float), np.zeros(m_ub)])
    m = A.shape[0]
    rank = np.linalg.matrix_rank(A)
    best, best_x = None, None
    sign = 1.0 if sense == "min" else -1.0
    for cols in itertools.combinations(range(A.shape[1]), rank):
        B = A[:, cols]
        if np.linalg.matrix_rank(B) < rank:
            continue
        xb, *_ = np.linalg.lstsq(B, b, rcond=None)
        if np.abs(B @ xb - b).max() > tol or xb.min() < -tol:
            continue
        x = np.zeros(A.shape[1])
        x[list(cols)] = xb
        val = sign * float(cc @ x)
        if best is None or val < best:
            best, best_x = val, x[:n]
    if best is None:
        return None, None
    return sign * best, best_x


# ---------------------------------------------------------------------------
# dense matrix evaluation of vector responses


def rotated_residue(theta, a, b):
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, -s], [s, c]])
    return R.T @ np.diag([a, b]) @ R


def vector_stress_dense(poles, rotated, t, load, GM=1.0, eta=5 / 3, G2=0.5):
    """``G2 (I - sum K B) load`` with K written out from the closed form."""
    r = G2 / GM
    out = np.array(load, float)
    for s, (th, a, b) in zip(poles, rotated):
        d = r - s * (r - 1)
        K = (1 - math.exp(-G2 * (1 - s) * t / (eta * d)) / d) / (1 - s)
        out = out - K * rotated_residue(th, a, b) @ np.asarray(load, float)
    return G2 * out


def vector_strain_dense(poles, rotated, t, load, GK=0.5, eta=2.05, G2=1.0):
    out = np.array(load, float)
    for u, (th, a, b) in zip(poles, rotated):
        L = (GK - G2 + G2 * math.exp(-(GK * (1 - u) + u * G2) * t / (eta * (1 - u))) / (1 - u)) / (
            GK - u * (GK - G2))
        out = out - L * rotated_residue(th, a, b) @ np.asarray(load, float)
    return out / (2 * G2)


# ---------------------------------------------------------------------------
# simple laminates from layer-wise averaging


def laminate_creep_normalized(f1, t, GK=0.5, eta=2.05, G2=1.0, dps=30):
    """Creep of a Kelvin-Voigt/elastic laminate divided by the phase-2 compliance.

    Returns ``(series, parallel)``: equal stress across layers averages the
    compliances; equal strain averages the Laplace moduli, inverted numerically.
    """
    J1 = (1 - math.exp(-GK * t / eta)) / GK
    series = (f1 * J1 + (1 - f1) / G2) * G2
    mp.mp.dps = dps

    def F(lam):
        return 1 / (lam * (f1 * _kelvin_carson_modulus(GK, eta, lam) + (1 - f1) * G2))

    parallel = float(mp.invertlaplace(F, t, method="talbot")) * G2
    return series, parallel
