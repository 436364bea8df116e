import numpy as np
import pytest

from modlab.algebra import membership_residual, subspace_orthonormalize
from modlab.fixtures import AlgebraSpec, covering_windows, generate_fixture
from modlab.flow import (
    FlowDomainError,
    analytic_flow,
    modular_flow,
    strip_growth_scan,
    tomita_check,
)
from modlab.linalg import rel_residual
from modlab.tidy import ladder, make_tidy, tidy_bound
from modlab.tomita import modular_data


SX = np.array([[0, 1], [1, 0]], dtype=complex)


def elementary(d, i, j):
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


def two_qubit_fixture():
    a = subspace_orthonormalize(
        [np.kron(elementary(2, i, j), np.eye(2)) for i in range(2) for j in range(2)]
    )
    omega = np.array([np.sqrt(2 / 3), 0, 0, np.sqrt(1 / 3)], dtype=complex)
    return a, omega, modular_data(a, omega)


def test_flow_at_zero_is_identity_map():
    _, _, t = two_qubit_fixture()
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert rel_residual(modular_flow(t, x, 0.0), x) <= 1e-14


def test_flow_trivial_for_identity_delta():
    fix = generate_fixture(AlgebraSpec.maximal_abelian(4), seed=0)
    rng = np.random.default_rng(1)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    for tt in (0.5, 2.0, -7.0):
        assert rel_residual(modular_flow(fix.triple, x, tt), x) <= 1e-12


def test_flow_factorized_closed_form():
    # factorized oracle: flow of E_12 (x) 1 equals (rho^{-it} E_12 rho^{it}) (x) 1
    _, _, t = two_qubit_fixture()
    rho = np.diag([2 / 3, 1 / 3]).astype(complex)
    x = np.kron(elementary(2, 0, 1), np.eye(2))
    tt = 1.0
    w, u = np.linalg.eigh(rho)
    rho_pow = lambda z: (u * np.exp(z * np.log(w.astype(complex)))) @ u.conj().T
    oracle = np.kron(rho_pow(-1j * tt) @ elementary(2, 0, 1) @ rho_pow(1j * tt), np.eye(2))
    assert rel_residual(modular_flow(t, x, tt), oracle) <= 1e-12


def test_flow_preserves_norm():
    _, _, t = two_qubit_fixture()
    rng = np.random.default_rng(2)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    n0 = np.linalg.norm(x, 2)
    for tt in (0.3, np.pi, 10.0):
        assert abs(np.linalg.norm(modular_flow(t, x, tt), 2) - n0) <= 1e-10 * n0


def test_flow_group_law():
    _, _, t = two_qubit_fixture()
    rng = np.random.default_rng(3)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    lhs = modular_flow(t, modular_flow(t, x, 0.8), -2.1)
    rhs = modular_flow(t, x, 0.8 - 2.1)
    assert rel_residual(lhs, rhs) <= 1e-10


def test_flow_fixes_state_expectation():
    _, _, t = two_qubit_fixture()
    rng = np.random.default_rng(4)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    for tt in (0.7, -3.0):
        g = modular_flow(t, x, tt)
        assert abs(np.vdot(t.omega, g @ t.omega) - np.vdot(t.omega, x @ t.omega)) <= 1e-10


def test_analytic_flow_trivial_and_unitary_cases():
    a, _, t = two_qubit_fixture()
    x = a.basis[1]
    s0 = analytic_flow(t, x, 0.0)
    assert rel_residual(s0.value, x) <= 1e-14
    s_im = analytic_flow(t, x, 0.9j)
    assert abs(s_im.norm - np.linalg.norm(x, 2)) <= 1e-10


def test_analytic_flow_at_one_matches_independent_tidy_solve():
    a, omega, t = two_qubit_fixture()
    comm = subspace_orthonormalize(
        [np.kron(np.eye(2), elementary(2, i, j)) for i in range(2) for j in range(2)]
    )
    src = np.kron(SX, np.eye(2))
    tidy = make_tidy(t, a, comm, src, 1.5, 2.5, n=0)
    # window (1.5, 2.5) keeps only the eigenvalue-2 eigenspace |01>, and the
    # solved pair is E_01 (x) 1 by hand
    assert rel_residual(tidy.a, np.kron(elementary(2, 0, 1), np.eye(2))) <= 1e-10
    f1 = analytic_flow(t, tidy.a, 1.0)
    lad = ladder(t, a, tidy, -1)
    assert rel_residual(f1.value, lad) <= 1e-10
    # closed form: Delta^{-1} (E_01 (x) 1) Delta = (1/2) E_01 (x) 1
    assert rel_residual(f1.value, 0.5 * np.kron(elementary(2, 0, 1), np.eye(2))) <= 1e-10


def test_analytic_flow_overflow_guard():
    _, _, t = two_qubit_fixture()
    with pytest.raises(FlowDomainError):
        analytic_flow(t, np.eye(4), 13.0)


def test_membership_residual_in_flow_sample():
    a, _, t = two_qubit_fixture()
    sample = analytic_flow(t, a.basis[2], 0.5 + 1j, algebra=a)
    assert sample.membership_residual is not None
    assert sample.membership_residual <= 1e-9 * np.sqrt(t.kappa) * 4


def test_tomita_check_abelian_trivial():
    fix = generate_fixture(AlgebraSpec.maximal_abelian(5), seed=3)
    rows = tomita_check(fix.triple, fix.algebra, fix.commutant,
                        fix.algebra.basis[2], (0.3, 1.0, np.pi, 10.0))
    for r in rows:
        assert r.passed
        assert r.membership <= 1e-12


def test_tomita_check_standard_fixture():
    a, omega, t = two_qubit_fixture()
    comm = subspace_orthonormalize(
        [np.kron(np.eye(2), elementary(2, i, j)) for i in range(2) for j in range(2)]
    )
    x = np.kron(SX, np.eye(2))
    rows = tomita_check(t, a, comm, x, (0.3, 1.0, np.pi, 10.0))
    for r in rows:
        assert r.membership <= 1e-9
        assert r.max_commutator <= 1e-9
        assert r.passed


def test_tomita_check_random_direct_sum_ensemble():
    rng = np.random.default_rng(6)
    fix = generate_fixture(AlgebraSpec.direct_sum([(2, 2), (1, 1)]), seed=11)
    for _ in range(10):
        c = rng.standard_normal(fix.algebra.dim) + 1j * rng.standard_normal(fix.algebra.dim)
        x = fix.algebra.element(c)
        tt = float(rng.uniform(-5, 5))
        rows = tomita_check(fix.triple, fix.algebra, fix.commutant, x, (tt,))
        assert rows[0].passed


def test_strip_scan_identity_operator():
    _, _, t = two_qubit_fixture()
    samples = strip_growth_scan(t, np.eye(4), strip_n=3)
    for s in samples:
        assert abs(s.norm - 1.0) <= 1e-10


def test_strip_scan_constant_along_imaginary_direction():
    a, omega, t = two_qubit_fixture()
    comm = subspace_orthonormalize(
        [np.kron(np.eye(2), elementary(2, i, j)) for i in range(2) for j in range(2)]
    )
    rng = np.random.default_rng(7)
    c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    src = a.element(c)
    wins = covering_windows(t)
    tidy = make_tidy(t, a, comm, src, wins[0][0], wins[0][1], n=0)
    samples = strip_growth_scan(t, tidy.a, strip_n=4)
    by_re = {}
    for s in samples:
        by_re.setdefault(s.z.real, []).append(s.norm)
    for norms in by_re.values():
        if norms[0] > 1e-250:
            assert (max(norms) - min(norms)) <= 1e-10 * norms[0]
    # purely imaginary line keeps the untouched norm
    n_a = np.linalg.norm(tidy.a, 2)
    assert all(abs(v - n_a) <= 1e-10 * max(n_a, 1e-250) for v in by_re[0.0])


def test_strip_scan_integer_values_under_tidy_growth_bound():
    # compare against the tidy module's closed-form bound evaluation
    a, omega, t = two_qubit_fixture()
    comm = subspace_orthonormalize(
        [np.kron(np.eye(2), elementary(2, i, j)) for i in range(2) for j in range(2)]
    )
    src = np.kron(SX, np.eye(2))
    l1, l2 = 1.5, 2.5
    tidy = make_tidy(t, a, comm, src, l1, l2, n=0)
    norm_a0 = np.linalg.norm(tidy.a, 2)
    for x in range(1, 7):
        sample = analytic_flow(t, tidy.a, float(x))
        # F_a(x) = a_{-x}: mirrored-window bound for the commutant-side source
        bound = tidy_bound(1.0 / l1, x, norm_a0)
        assert sample.norm <= bound * (1 + 1e-9)


def test_analytic_commutators_vanish_off_axis():
    a, omega, t = two_qubit_fixture()
    comm = subspace_orthonormalize(
        [np.kron(np.eye(2), elementary(2, i, j)) for i in range(2) for j in range(2)]
    )
    wins = covering_windows(t)
    tidy = make_tidy(t, a, comm, np.kron(SX, np.eye(2)), wins[-1][0], wins[-1][1], n=0)
    rng = np.random.default_rng(8)
    for _ in range(8):
        z = complex(rng.uniform(-4, 4), rng.uniform(-5, 5))
        sample = analytic_flow(t, tidy.a, z)
        for b in comm.basis:
            comm_norm = np.linalg.norm(sample.value @ b - b @ sample.value, 2)
            scale = max(sample.norm * np.linalg.norm(b, 2), 1e-30)
            assert comm_norm / scale <= 1e-9 * t.kappa ** ((abs(z.real) + 1) / 2)
