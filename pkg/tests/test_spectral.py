import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from viscobounds import (ConfigurationError, DomainError, ModelMismatchError, Side, SpectralConfig, StepLoading,
                         StrainStep, StressStep, eval_scalar_strain, eval_scalar_stress, eval_vector_strain,
                         eval_vector_stress)
from viscobounds.optimizer import no_info_closed_form
from viscobounds.spectral import evaluate


def random_scalar(rng, n, side=Side.STRESS):
    s = np.sort(rng.uniform(0, 0.99, n))
    x = rng.uniform(0, 1, n) * (1 - s)
    x *= rng.uniform(0, 1) / (x / (1 - s)).sum()
    return SpectralConfig(s, x, side)


def random_rotated(rng, n, side=Side.STRESS, poles=None, angles=None):
    s = np.sort(rng.uniform(0, 0.99, n)) if poles is None else np.asarray(poles)
    th = rng.uniform(0, np.pi, n) if angles is None else np.asarray(angles)
    ab = rng.uniform(0, 1, (n, 2)) * (1 - s)[:, None]
    cfg = SpectralConfig(s, np.column_stack([th, ab]), side, validate=False)
    top = np.linalg.eigvalsh(cfg.weight_matrix())[-1]
    ab *= rng.uniform(0.1, 1) / top
    return SpectralConfig(s, np.column_stack([th, ab]), side)


# ---------------------------------------------------------------------------
# configuration invariants


def test_poles_are_sorted_with_residues():
    cfg = SpectralConfig([0.5, 0.1], [0.2, 0.3])
    assert list(cfg.poles) == [0.1, 0.5]
    assert list(cfg.residues) == [0.3, 0.2]


@pytest.mark.parametrize("poles,res", [([1.0], [0.0]), ([-0.1], [0.1]), ([0.2], [-0.1]), ([0.5], [0.6])])
def test_invalid_configs_rejected(poles, res):
    with pytest.raises(DomainError):
        SpectralConfig(poles, res)


def test_rotated_config_needs_psd_and_unit_bound():
    with pytest.raises(DomainError):
        SpectralConfig([0.2], [[0.3, -0.1, 0.2]])
    with pytest.raises(DomainError):
        SpectralConfig([0.5], [[0.3, 0.6, 0.1]])
    with pytest.raises(ConfigurationError):
        SpectralConfig([0.5], [[0.3, 0.1]])


def test_coincident_poles_add_their_residues(stress_pair):
    t = np.linspace(0, 5, 11)
    split = SpectralConfig([0.3, 0.3], [0.2, 0.1])
    merged = SpectralConfig([0.3], [0.3])
    load = StrainStep(1.0)
    assert np.allclose(eval_scalar_stress(split, stress_pair, load, t), eval_scalar_stress(merged, stress_pair, load, t),
                       rtol=1e-15)


# ---------------------------------------------------------------------------
# scalar examples


def test_empty_config_is_phase_two(stress_pair, strain_pair):
    t = np.linspace(0, 10, 21)
    assert np.allclose(eval_scalar_stress(SpectralConfig([], []), stress_pair, StrainStep(2.0), t), 0.5 * 2.0)
    cfg = SpectralConfig([], [], Side.STRAIN)
    assert np.allclose(eval_scalar_strain(cfg, strain_pair, StressStep(3.0), t), 3.0 / 2.0)


def test_single_pole_at_zero_is_phase_one_relaxation(stress_pair):
    t = np.linspace(0, 10, 41)
    got = eval_scalar_stress(SpectralConfig([0.0], [1.0]), stress_pair, StrainStep(2.0), t)
    assert np.allclose(got, 2.0 * oracles.maxwell_relaxation(t), rtol=1e-13)


def test_single_pole_value_matches_inverted_transform(stress_pair):
    got = eval_scalar_stress(SpectralConfig([0.5], [0.3]), stress_pair, StrainStep(1.0), 1.0)
    want = 0.5 * (1 - 0.3 * oracles.talbot_stress_kernel(0.5, 1.0))
    assert float(got) == pytest.approx(want, rel=1e-12)


def test_pure_kelvin_voigt_creep(strain_pair):
    t = np.linspace(0, 10, 41)
    got = eval_scalar_strain(SpectralConfig([0.0], [1.0], Side.STRAIN), strain_pair, StressStep(2.0), t)
    assert np.allclose(got, 2.0 * oracles.kelvin_creep(t) / 2, rtol=1e-13, atol=1e-15)
    assert float(got[0]) == pytest.approx(0.0, abs=1e-15)


def test_side_mismatch_raises(stress_pair, strain_pair):
    with pytest.raises(ModelMismatchError):
        eval_scalar_stress(SpectralConfig([0.1], [0.2], Side.STRAIN), stress_pair, StrainStep(1.0), 1.0)
    with pytest.raises(ModelMismatchError):
        eval_scalar_strain(SpectralConfig([0.1], [0.2], Side.STRAIN), stress_pair, StressStep(1.0), 1.0)
    with pytest.raises(ModelMismatchError):
        eval_scalar_stress(SpectralConfig([0.1], [0.2]), stress_pair, StressStep(1.0), 1.0)


def test_loading_must_be_finite():
    with pytest.raises(ConfigurationError):
        StepLoading((math.nan, 0.0))
    with pytest.raises(ConfigurationError):
        StepLoading((1.0, 2.0, 3.0))


# ---------------------------------------------------------------------------
# vector examples


def test_diagonal_rotated_config_reduces_to_scalar(stress_pair, rng):
    diag = random_rotated(rng, 5, angles=np.zeros(5))
    scalar = SpectralConfig(diag.poles, diag.residues[:, 1])
    t = np.linspace(0, 6, 13)
    vec = eval_vector_stress(diag, stress_pair, StrainStep([1.5, 0.0]), t)
    assert np.all(vec[:, 1] == 0)
    assert np.allclose(vec[:, 0], eval_scalar_stress(scalar, stress_pair, StrainStep(1.5), t), rtol=1e-14, atol=1e-15)


def test_quarter_turn_swaps_tracks(stress_pair, rng):
    for _ in range(20):
        cfg = random_rotated(rng, 4)
        th, a, b = cfg.residues.T
        turned = SpectralConfig(cfg.poles, np.column_stack([th + np.pi / 2, b, a]))
        assert np.allclose(turned.matrices(), cfg.matrices(), atol=1e-15)
        load = StrainStep(rng.normal(size=2))
        t = rng.uniform(0, 8, 5)
        assert np.allclose(eval_vector_stress(turned, stress_pair, load, t),
                           eval_vector_stress(cfg, stress_pair, load, t), atol=1e-14)


def test_common_angle_reduces_to_two_rotated_scalars(stress_pair, rng):
    theta = 0.7
    s = np.sort(rng.uniform(0, 0.9, 4))
    a = rng.uniform(0, 0.2, 4) * (1 - s)
    b = rng.uniform(0, 0.2, 4) * (1 - s)
    cfg = SpectralConfig(s, np.column_stack([np.full(4, theta), a, b]))
    u1 = np.array([math.cos(theta), -math.sin(theta)])
    u2 = np.array([math.sin(theta), math.cos(theta)])
    load = np.array([0.8, -0.3])
    t = np.linspace(0, 5, 11)
    vec = eval_vector_stress(cfg, stress_pair, StrainStep(load), t)
    ra = eval_scalar_stress(SpectralConfig(s, a), stress_pair, StrainStep(1.0), t)
    rb = eval_scalar_stress(SpectralConfig(s, b), stress_pair, StrainStep(1.0), t)
    want = np.outer(ra, u1) * (u1 @ load) + np.outer(rb, u2) * (u2 @ load)
    assert np.allclose(vec, want, atol=1e-14)


def test_reflective_two_pole_point_matches_dense(stress_pair):
    s0, s1 = 0.2, 0.7
    rows = [[np.pi / 4, 1 - s0, 0.0], [np.pi / 4, 0.0, 1 - s1]]
    cfg = SpectralConfig([s0, s1], rows)
    got = eval_vector_stress(cfg, stress_pair, StrainStep([1.0, 0.0]), 0.0)
    want = oracles.vector_stress_dense([s0, s1], rows, 0.0, [1.0, 0.0])
    assert np.allclose(got, want, atol=1e-14)


def test_random_strain_config_matches_dense(strain_pair, rng):
    for _ in range(10):
        cfg = random_rotated(rng, 6, Side.STRAIN)
        load = rng.normal(size=2)
        got = eval_vector_strain(cfg, strain_pair, StressStep(load), 3.0)
        want = oracles.vector_strain_dense(cfg.poles, cfg.residues, 3.0, load)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-14)


def test_strain_vanishes_at_time_zero_for_phase_one(strain_pair):
    # a pole at 0 with B = I is pure phase 1, which has no instantaneous compliance
    cfg = SpectralConfig([0.0], [[0.3, 1.0, 1.0]], Side.STRAIN)
    assert np.allclose(eval_vector_strain(cfg, strain_pair, StressStep([1.0, 2.0]), 0.0), 0.0, atol=1e-15)


def test_zero_strain_config_preserves_direction(strain_pair):
    cfg = SpectralConfig([], np.zeros((0, 3)), Side.STRAIN)
    got = eval_vector_strain(cfg, strain_pair, StressStep([1.0, 2.0]), np.array([0.0, 4.0]))
    assert np.allclose(got, [[0.5, 1.0], [0.5, 1.0]])


def test_evaluate_dispatches(stress_pair, strain_pair):
    cfg = SpectralConfig([0.2], [0.3])
    assert float(evaluate(cfg, stress_pair, StrainStep(1.0), 1.0)) == float(
        eval_scalar_stress(cfg, stress_pair, StrainStep(1.0), 1.0))
    assert evaluate(cfg, stress_pair, StrainStep([1.0, 1.0]), 1.0).shape == (2,)


# ---------------------------------------------------------------------------
# properties


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), w=st.floats(0, 1))
def test_response_is_linear_in_residues(stress_pair, seed, w):
    rng = np.random.default_rng(seed)
    a = random_rotated(rng, 5)
    b = random_rotated(rng, 5, poles=a.poles, angles=a.residues[:, 0])
    mix = a.combine(b, w)
    load = StrainStep(rng.normal(size=2))
    t = rng.uniform(0, 10, 4)
    lhs = eval_vector_stress(mix, stress_pair, load, t)
    rhs = w * eval_vector_stress(a, stress_pair, load, t) + (1 - w) * eval_vector_stress(b, stress_pair, load, t)
    assert np.allclose(lhs, rhs, atol=1e-13)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_configs_stay_in_no_info_envelope(stress_pair, seed):
    rng = np.random.default_rng(seed)
    cfg = random_scalar(rng, int(rng.integers(1, 6)))
    t = rng.uniform(0, 10, 20)
    val = eval_scalar_stress(cfg, stress_pair, StrainStep(1.0), t)
    lo, hi = no_info_closed_form(stress_pair, t)
    assert np.all(val >= lo - 1e-12) and np.all(val <= hi + 1e-12)
