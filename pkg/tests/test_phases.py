import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from viscobounds import (CompositePair, DegenerateContrastError, DomainError, Elastic, KelvinVoigt, Maxwell,
                         ModelMismatchError, Side, laplace_modulus, s_parameter, strain_kernel, stress_kernel)
from viscobounds.phases import pure_phase_crossing, pure_phase_crossing_formula


def test_phase_parameters_must_be_positive():
    for bad in (0.0, -1.0, math.nan, math.inf):
        with pytest.raises(DomainError):
            Elastic(bad)
        with pytest.raises(DomainError):
            Maxwell(1.0, bad)
        with pytest.raises(DomainError):
            KelvinVoigt(bad, 1.0)


def test_laplace_modulus_examples():
    assert laplace_modulus(Elastic(0.5), 0.1) == 0.5
    assert laplace_modulus(Elastic(0.5), 1e6) == 0.5
    m = Maxwell(1.0, 5 / 3)
    assert laplace_modulus(m, 0.6) == pytest.approx(0.5, rel=1e-15)
    assert laplace_modulus(m, math.inf) == 1.0
    assert laplace_modulus(KelvinVoigt(0.5, 2.05), 2.0) == pytest.approx(0.5 + 2.05 * 2.0)


def test_laplace_modulus_rejects_bad_input():
    with pytest.raises(DomainError):
        laplace_modulus(Elastic(1.0), 0.0)
    with pytest.raises(ModelMismatchError):
        laplace_modulus("rubber", 1.0)


@given(lam=st.floats(1e-3, 1e3))
def test_maxwell_laplace_modulus_matches_carson_transform(lam):
    # lam * integral of GM exp(-GM t/eta) exp(-lam t) dt
    GM, eta = 1.0, 5 / 3
    assert laplace_modulus(Maxwell(GM, eta), lam) == pytest.approx(lam * GM / (lam + GM / eta), rel=1e-13)


def test_pure_phase_time_functions():
    t = np.linspace(0, 5, 11)
    assert np.allclose(Maxwell(1.0, 5 / 3).relaxation_function(t), oracles.maxwell_relaxation(t), rtol=1e-14)
    assert np.allclose(KelvinVoigt(0.5, 2.05).creep_function(t), oracles.kelvin_creep(t), rtol=1e-14)


def test_stress_kernel_examples(stress_pair):
    assert float(stress_kernel(stress_pair, 0.0, 0.0)) == pytest.approx(-1.0, rel=1e-15)
    # response at s=0, B=1, t=0 is the pure phase-1 instantaneous stress G_M
    assert stress_pair.G2 * (1 - float(stress_kernel(stress_pair, 0.0, 0.0))) == pytest.approx(1.0)
    assert float(stress_kernel(stress_pair, 0.0, 200.0)) == pytest.approx(1.0, abs=1e-12)
    assert float(stress_kernel(stress_pair, 0.5, 1.0)) == pytest.approx(oracles.talbot_stress_kernel(0.5, 1.0),
                                                                        rel=1e-10)


def test_stress_kernel_rejects_pole_one(stress_pair):
    with pytest.raises(DomainError):
        stress_kernel(stress_pair, 1.0, 1.0)
    with pytest.raises(DomainError):
        stress_kernel(stress_pair, -0.1, 1.0)
    with pytest.raises(DomainError):
        stress_kernel(stress_pair, 0.5, -1.0)


def test_kernels_need_matching_pair(stress_pair, strain_pair):
    with pytest.raises(ModelMismatchError):
        stress_kernel(strain_pair, 0.1, 1.0)
    with pytest.raises(ModelMismatchError):
        strain_kernel(stress_pair, 0.1, 1.0)
    odd = CompositePair(KelvinVoigt(1.0, 1.0), Elastic(0.5), Side.STRESS)
    with pytest.raises(ModelMismatchError):
        stress_kernel(odd, 0.1, 1.0)


def test_strain_kernel_examples(strain_pair):
    GK, eta, G2 = 0.5, 2.05, 1.0
    t = np.linspace(0, 8, 17)
    strain = (1 - strain_kernel(strain_pair, 0.0, t)) / (2 * G2)
    assert np.allclose(strain, (1 - np.exp(-GK * t / eta)) / (2 * GK), rtol=1e-13, atol=1e-15)
    # u -> 1 with residue 1 - u leaves pure phase 2
    for u in (1 - 1e-6, 1 - 1e-9):
        assert (1 - (1 - u) * float(strain_kernel(strain_pair, u, 3.0))) == pytest.approx(1.0, abs=1e-5)
    assert float(strain_kernel(strain_pair, 0.3, 2.0)) == pytest.approx(oracles.talbot_strain_kernel(0.3, 2.0),
                                                                        rel=1e-10)


def test_weighted_kernel_at_pole_one_is_zero(stress_pair, strain_pair):
    t = np.array([0.0, 1.0, 50.0])
    assert np.all(stress_pair.weighted_kernel(1.0, t) == 0)
    assert np.all(strain_pair.weighted_kernel(1.0, t) == 0)


def test_s_parameter_examples(stress_pair):
    assert s_parameter(stress_pair, 1e-12) == pytest.approx(1.0, abs=1e-10)
    assert s_parameter(stress_pair, math.inf) == pytest.approx(-1.0)
    assert s_parameter(stress_pair, 1e12) == pytest.approx(-1.0, rel=1e-9)
    same = CompositePair(Elastic(1.0), Elastic(1.0), Side.STRESS)
    with pytest.raises(DegenerateContrastError):
        s_parameter(same, 1.0)


def test_well_ordering(stress_pair, strain_pair):
    assert not stress_pair.well_ordered  # G_M > G2 at t=0, Maxwell relaxes to 0 < G2
    assert not strain_pair.well_ordered
    assert CompositePair(Elastic(2.0), Elastic(1.0)).well_ordered


@settings(max_examples=200, deadline=None)
@given(s=st.floats(0.0, 0.999), t=st.floats(0.0, 20.0))
def test_one_pole_response_matches_laminate_form(stress_pair, s, t):
    # G2 (1 - (1-s) K) against 1 - 1 + exp(...)/d written out independently
    r = 0.5
    d = r - s * (r - 1)
    direct = math.exp(-0.5 * (1 - s) * t / ((5 / 3) * d)) / d
    mine = 1 - (1 - s) * float(stress_kernel(stress_pair, s, t))
    assert mine == pytest.approx(direct, rel=1e-12, abs=1e-15)


def test_kernel_continuous_on_fine_grid(stress_pair, strain_pair):
    # the largest jump must halve when the grid is refined (no hidden discontinuity)
    top = 1 - 1e-6
    for t in (0.01, 1.0, 10.0):
        for pair in (stress_pair, strain_pair):
            jumps = []
            for n in (50001, 100001):
                k = pair.kernel(np.linspace(0, top, n), t)
                assert np.all(np.isfinite(k))
                jumps.append(np.abs(np.diff(k)).max())
            assert jumps[1] < 0.6 * jumps[0]


def test_pure_phase_crossing_matches_formula_when_ordered():
    for GK, G2, eta in [(0.5, 1.0, 2.05), (0.3, 0.9, 1.0), (1.2, 2.0, 0.7)]:
        pair = CompositePair(KelvinVoigt(GK, eta), Elastic(G2), Side.STRAIN)
        assert pure_phase_crossing(pair) == pytest.approx(pure_phase_crossing_formula(pair), abs=1e-8)


def test_crossing_formula_refuses_reversed_moduli():
    pair = CompositePair(KelvinVoigt(1.0, 2.0), Elastic(0.5), Side.STRAIN)
    with pytest.raises(DomainError):
        pure_phase_crossing_formula(pair)


def test_stress_crossing_is_t2(stress_pair):
    assert pure_phase_crossing(stress_pair) == pytest.approx((5 / 3) * math.log(2.0), abs=1e-10)
