import math

import numpy as np
import pytest

from modlab.algebra import subspace_orthonormalize
from modlab.contour import (
    ContourError,
    ContourSpec,
    choose_contour,
    contour_apply,
    contour_quadrature_fixed,
    pole_sum,
    sigmoid,
    sigmoid_limit_check,
    sigmoid_poles,
    spectral_oracle,
)
from modlab.fixtures import AlgebraSpec, generate_fixture
from modlab.tomita import modular_data


def elementary(d, i, j):
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


def two_qubit_triple():
    a = subspace_orthonormalize(
        [np.kron(elementary(2, i, j), np.eye(2)) for i in range(2) for j in range(2)]
    )
    omega = np.array([np.sqrt(2 / 3), 0, 0, np.sqrt(1 / 3)], dtype=complex)
    return modular_data(a, omega)


# ---------------------------------------------------------------------------
# sigmoid scalar function
# ---------------------------------------------------------------------------


def test_sigmoid_half_at_lambda():
    assert abs(sigmoid(2.0, 3, 2.0) - 0.5) <= 1e-14


def test_sigmoid_periodic_on_half_lines():
    # with integer steepness the shifted line reproduces the real-axis value
    for t in (-1.0, 0.3, 4.0):
        line = sigmoid(t + 2j * math.pi, 3, 1.0)
        real = sigmoid(t, 3, 1.0)
        assert abs(line - real) <= 1e-13


def test_sigmoid_limits():
    assert abs(sigmoid(-40.0, 2, 1.0) - 1.0) <= 1e-14
    assert abs(sigmoid(40.0, 2, 1.0)) <= 1e-14


def test_sigmoid_matches_formula_away_from_poles():
    for z in (0.5 + 1j, -2.0 - 0.3j, 3.7 + 2.9j):
        direct = 1.0 / (1.0 + np.exp(2 * (z - 1.5)))
        assert abs(sigmoid(z, 2, 1.5) - direct) <= 1e-14 * max(1.0, abs(direct))


def test_sigmoid_rejects_non_integer_steepness():
    with pytest.raises(ContourError):
        sigmoid(1.0, 1.5, 1.0)
    with pytest.raises(ContourError):
        sigmoid(1.0, 0, 1.0)


# ---------------------------------------------------------------------------
# pole enumeration
# ---------------------------------------------------------------------------


def test_pole_enumeration_k1():
    # poles at lambda +- i pi, both inside |Im| < 2 pi
    poles = sigmoid_poles(1, 1.0, 2 * math.pi)
    assert len(poles) == 2
    assert np.allclose(sorted(p.imag for p in poles), [-math.pi, math.pi])


def test_pole_enumeration_k4():
    # (2m+1) pi / 4 < 2 pi gives m <= 3: eight poles
    poles = sigmoid_poles(4, 1.0, 2 * math.pi)
    assert len(poles) == 8


def test_pole_free_when_contour_shrinks():
    assert len(sigmoid_poles(2, 1.0, math.pi / 2 - 0.01)) == 0
    t = two_qubit_triple()
    psi = np.array([1.0, 0, 0, 0], dtype=complex)
    assert np.linalg.norm(pole_sum(t, 0, 2, 1.0, psi, half_height=math.pi / 2 - 0.01)) == 0.0


# ---------------------------------------------------------------------------
# spectral oracle
# ---------------------------------------------------------------------------


def test_oracle_identity_delta_far_lambda():
    fix = generate_fixture(AlgebraSpec.maximal_abelian(3), seed=0)
    rng = np.random.default_rng(1)
    psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    out = spectral_oracle(fix.triple, 0, 50, 2.0, psi)
    # f_k(1) with k (2 - 1) = 50: essentially 1
    assert np.linalg.norm(out - psi) <= 1e-14 * np.linalg.norm(psi)


def test_oracle_eigenvector_scalar_arithmetic():
    t = two_qubit_triple()
    # |01> is the eigenvalue-2 eigenvector
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0
    out = spectral_oracle(t, 1, 3, 3.0, psi)
    scalar = 2.0 * (1.0 / (1.0 + math.exp(3 * (2.0 - 3.0))))
    assert np.linalg.norm(out - scalar * psi) <= 1e-13


def test_oracle_linearity():
    t = two_qubit_triple()
    rng = np.random.default_rng(2)
    p1 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    p2 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    lhs = spectral_oracle(t, 1, 2, 1.3, 2.0 * p1 - 1j * p2)
    rhs = 2.0 * spectral_oracle(t, 1, 2, 1.3, p1) - 1j * spectral_oracle(t, 1, 2, 1.3, p2)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)


# ---------------------------------------------------------------------------
# quadrature with residue correction
# ---------------------------------------------------------------------------


def test_residue_closure_identity_delta():
    fix = generate_fixture(AlgebraSpec.maximal_abelian(3), seed=3)
    rng = np.random.default_rng(4)
    psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    psi /= np.linalg.norm(psi)
    q = contour_apply(fix.triple, 0, 4, 2.0, psi)
    oracle = spectral_oracle(fix.triple, 0, 4, 2.0, psi)
    assert np.linalg.norm(q.corrected_value - oracle) <= 1e-7


def test_residue_closure_ensemble_two_qubit():
    t = two_qubit_triple()
    rng = np.random.default_rng(5)
    lam = 3.0
    for n in (0, 1, 2):
        for k in (1, 2, 4, 8):
            psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            psi /= np.linalg.norm(psi)
            q = contour_apply(t, n, k, lam, psi)
            oracle = spectral_oracle(t, n, k, lam, psi)
            assert np.linalg.norm(q.corrected_value - oracle) <= 1e-7
            # step-halving error estimate is honest at the same scale
            assert q.estimated_error < 1e-8


def test_eigenvector_with_power_oracle():
    t = two_qubit_triple()
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0  # eigenvalue 2
    q = contour_apply(t, 1, 2, 3.0, psi)
    scalar = 2.0 * (1.0 / (1.0 + math.exp(2 * (2.0 - 3.0))))
    assert np.linalg.norm(q.corrected_value - scalar * psi) <= 1e-7


def test_uncorrected_discrepancy_equals_pole_norm():
    # value - oracle = pole_sum up to quadrature error: the uncorrected
    # mismatch is exactly the enclosed-pole contribution
    t = two_qubit_triple()
    rng = np.random.default_rng(6)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    q = contour_apply(t, 0, 1, 3.0, psi)
    oracle = spectral_oracle(t, 0, 1, 3.0, psi)
    diff = q.value - oracle
    assert np.linalg.norm(diff - q.pole_correction) <= 1e-7
    assert np.linalg.norm(q.pole_correction) > 1e-3  # poles genuinely matter


def test_convergence_order_at_least_three():
    t = two_qubit_triple()
    rng = np.random.default_rng(7)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    n, k, lam = 1, 2, 3.0
    spec = choose_contour(t, n, k, lam)
    target = spectral_oracle(t, n, k, lam, psi) + pole_sum(t, n, k, lam, psi, spec.half_height)
    n_line = max(8, int(spec.truncation * 2))
    d1 = np.linalg.norm(contour_quadrature_fixed(t, n, k, lam, psi, spec, n_line, 32) - target)
    d2 = np.linalg.norm(contour_quadrature_fixed(t, n, k, lam, psi, spec, 2 * n_line, 64) - target)
    assert d1 / d2 >= 3.0


def test_truncation_robustness():
    t = two_qubit_triple()
    rng = np.random.default_rng(8)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    spec = choose_contour(t, 0, 1, 3.0)
    doubled = ContourSpec(half_height=spec.half_height, truncation=2 * spec.truncation,
                          nodes_per_unit=spec.nodes_per_unit, halfcircle_nodes=spec.halfcircle_nodes)
    v1 = contour_apply(t, 0, 1, 3.0, psi, spec=spec).value
    v2 = contour_apply(t, 0, 1, 3.0, psi, spec=doubled).value
    assert np.linalg.norm(v1 - v2) < 1e-8


def test_contour_requires_enclosed_spectrum():
    t = two_qubit_triple()
    psi = np.array([1.0, 0, 0, 0], dtype=complex)
    bad = ContourSpec(truncation=1.0)
    with pytest.raises(ContourError):
        contour_apply(t, 0, 2, 0.5, psi, spec=bad)


def test_contour_rejects_negative_power_or_lambda():
    t = two_qubit_triple()
    psi = np.array([1.0, 0, 0, 0], dtype=complex)
    with pytest.raises(ContourError):
        contour_apply(t, -1, 2, 1.0, psi)
    with pytest.raises(ContourError):
        contour_apply(t, 0, 2, -1.0, psi)


# ---------------------------------------------------------------------------
# sigmoid-to-step limit
# ---------------------------------------------------------------------------


def test_sigmoid_limit_below_spectrum_envelope():
    # scalar tail bound: error <= max |e^n| exp(-k gap) for support below lambda
    t = two_qubit_triple()
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0  # eigenvalue 1 component only
    lam = 3.0
    gap = 1.0
    res = sigmoid_limit_check(t, 0, lam, psi, k_list=[1, 2, 4, 8, 16])
    for row in res.rows:
        assert row.error <= math.exp(-row.k * gap) + 1e-14
    assert res.passed


def test_sigmoid_limit_above_spectrum_envelope():
    t = two_qubit_triple()
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0  # eigenvalue 2 component, above lambda
    lam = 1.3
    gap = 0.7
    res = sigmoid_limit_check(t, 0, lam, psi, k_list=[2, 4, 8, 16, 32])
    for row in res.rows:
        assert row.error <= math.exp(-row.k * gap) + 1e-14
    assert res.passed


def test_sigmoid_limit_identity_delta_scalar_arithmetic():
    fix = generate_fixture(AlgebraSpec.maximal_abelian(4), seed=9)
    rng = np.random.default_rng(10)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    lam = 2.0
    res = sigmoid_limit_check(fix.triple, 0, lam, psi, k_list=[1, 2, 4, 8])
    for row in res.rows:
        expected = (1.0 - 1.0 / (1.0 + math.exp(row.k * (1.0 - lam)))) * np.linalg.norm(psi)
        assert abs(row.error - expected) <= 1e-12 * max(expected, 1.0)


def test_sigmoid_limit_default_klist_and_pass():
    fix = generate_fixture(AlgebraSpec.standard_factor(2), seed=17)
    rng = np.random.default_rng(11)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    w = fix.triple.delta_spec.eigenvalues
    lam = float(w[-1]) + 1.0
    res = sigmoid_limit_check(fix.triple, 1, lam, psi)
    assert res.passed
    assert res.rows[-1].k == math.ceil(40.0 / res.gap)


def test_sigmoid_limit_rejects_lambda_near_spectrum():
    t = two_qubit_triple()
    psi = np.array([1.0, 0, 0, 0], dtype=complex)
    with pytest.raises(ContourError):
        sigmoid_limit_check(t, 0, 1.01, psi)
