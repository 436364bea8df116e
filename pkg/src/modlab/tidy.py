"""Tidy operators: spectral windows, basis solves, and the transfer bounds.

A tidy operator is an algebra element whose vector a omega is confined to a
bounded spectral window of the modular operator: for a window
0 < lambda_1 < lambda_2 and an integer power n, the vector
``Delta^n Theta(lambda_2 - Delta) Theta(Delta - lambda_1) (source) omega``
is realized both by an element of the algebra and by an element of the
commutant (two independent solves that must agree on the vector). On top of
the construction sit the quantitative checks:

- the resolvent transfer bound |a| <= |a'| / sqrt(2(|z| - Re z)) for the
  solve a omega = (z - Delta)^{-1} a' omega,
- the closed-form exponential bound on windowed ladder norms and its mirror
  under lambda -> 1/lambda, n -> -n,
- the adjoint-ladder and power-conjugation identities relating ladder
  elements across integer steps,
- span and bicommutant density of covering-window tidy families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    OperatorSubspace,
    RankReport,
    bicommutant,
    mutual_projection_residual,
    numerical_rank,
    subspace_orthonormalize,
)
from .linalg import as_square_array, complex_power, matrix_function, opnorm
from .tomita import ModularTriple, IllConditionedError, COND_CAP

N_CAP = 8  # |n| cap from the kappa <= 1e4 conditioning budget
BOUNDARY_EPS = 1e-9


class WindowError(ValueError):
    pass


class ResolventDomainError(ValueError):
    pass


def heaviside(x: float, eps: float = 0.0) -> float:
    """Step function with the half-value convention at the jump."""
    if x > eps:
        return 1.0
    if x < -eps:
        return 0.0
    return 0.5


def spectral_window(
    triple: ModularTriple,
    lambda1: float,
    lambda2: float,
    boundary_eps: float = BOUNDARY_EPS,
) -> np.ndarray:
    """Spectral projector onto eigenvalues of Delta inside [lambda1, lambda2].

    Eigenvalues within ``boundary_eps`` (relative) of a window edge receive
    weight 1/2, matching the half-value step convention; away from edges the
    result is an orthogonal projector.
    """
    if not (0.0 < lambda1 < lambda2):
        raise WindowError(f"window must satisfy 0 < lambda1 < lambda2, got ({lambda1}, {lambda2})")
    e1 = boundary_eps * max(1.0, abs(lambda1))
    e2 = boundary_eps * max(1.0, abs(lambda2))

    def f(w):
        return np.array([heaviside(lambda2 - x, e2) * heaviside(x - lambda1, e1) for x in w])

    return matrix_function(triple.delta_spec, f)


def operator_from_vector(v, algebra: OperatorSubspace, omega) -> np.ndarray:
    """The unique element a of the algebra with a omega = v.

    Existence and uniqueness come from omega being cyclic and separating (the
    basis matrix B with columns b_i omega is square and invertible); the map
    v -> a is linear. Solves with cond(B) beyond the global cap are refused.
    """
    omega = np.asarray(omega, dtype=complex)
    v = np.asarray(v, dtype=complex)
    b = np.column_stack([x @ omega for x in algebra.basis])
    if b.shape[0] != b.shape[1]:
        raise ResolventDomainError(
            f"solve needs dim(A) = d, got {b.shape[1]} basis elements at dimension {b.shape[0]}"
        )
    sv = np.linalg.svd(b, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if cond > COND_CAP:
        raise IllConditionedError(cond)
    coeffs = np.linalg.solve(b, v)
    return algebra.element(coeffs)


@dataclass(frozen=True)
class TidyOperator:
    """A windowed ladder pair: a in A and a' in A' sharing the vector a omega."""

    window: tuple[float, float]
    n: int
    source: np.ndarray
    a: np.ndarray
    a_prime: np.ndarray
    vector: np.ndarray


def make_tidy(
    triple: ModularTriple,
    algebra: OperatorSubspace,
    commutant_algebra: OperatorSubspace,
    source,
    lambda1: float,
    lambda2: float,
    n: int = 0,
) -> TidyOperator:
    """Build the tidy pair for a source algebra element, window, and power."""
    if abs(n) > N_CAP:
        raise WindowError(f"|n| = {abs(n)} exceeds the conditioning cap {N_CAP}")
    src = as_square_array(source)
    w = spectral_window(triple, lambda1, lambda2)
    v = w @ (src @ triple.omega)
    if n != 0:
        v = complex_power(triple.delta_spec, n) @ v
    a = operator_from_vector(v, algebra, triple.omega)
    a_prime = operator_from_vector(v, commutant_algebra, triple.omega)
    return TidyOperator(
        window=(float(lambda1), float(lambda2)),
        n=int(n),
        source=src,
        a=a,
        a_prime=a_prime,
        vector=v,
    )


def ladder(
    triple: ModularTriple,
    algebra: OperatorSubspace,
    tidy: TidyOperator,
    n: int,
) -> np.ndarray:
    """Ladder element a_n in the given algebra, solving a_n omega = Delta^n (a omega)."""
    if abs(n) > N_CAP:
        raise WindowError(f"|n| = {abs(n)} exceeds the conditioning cap {N_CAP}")
    v = complex_power(triple.delta_spec, n) @ tidy.vector
    return operator_from_vector(v, algebra, triple.omega)


# ---------------------------------------------------------------------------
# Resolvent transfer
# ---------------------------------------------------------------------------

AXIS_GAP = 1e-6  # |z| - Re(z) floor; the bound degenerates on the positive real axis


def resolvent_bound(z: complex, norm_source: float) -> float:
    """Transfer bound |a| <= |a'| / sqrt(2 (|z| - Re z))."""
    gap = abs(z) - z.real
    return norm_source / math.sqrt(2.0 * gap)


@dataclass(frozen=True)
class ResolventTransfer:
    z: complex
    a: np.ndarray
    measured_norm: float
    bound: float

    @property
    def satisfied(self) -> bool:
        # 1e-9 relative slack absorbs floating error in the norm measurement;
        # the bound itself is an exact inequality (equality at z = -1, Delta = 1)
        return self.measured_norm <= self.bound * (1.0 + 1e-9)


def resolvent_transfer(
    triple: ModularTriple,
    algebra: OperatorSubspace,
    a_prime,
    z: complex,
) -> ResolventTransfer:
    """Solve a omega = (z - Delta)^{-1} a' omega in the algebra and audit the bound.

    z must lie outside the spectrum of Delta with |z| - Re(z) > AXIS_GAP. The
    source a' is expected in the commutant; the mirrored variant (source in
    the algebra, solve in the commutant against Delta^{-1}) is provided by
    :func:`resolvent_transfer_mirror`.
    """
    z = complex(z)
    src = as_square_array(a_prime)
    w = triple.delta_spec.eigenvalues
    if abs(z) - z.real <= AXIS_GAP:
        raise ResolventDomainError(
            f"z = {z} is too close to the positive real axis (|z| - Re z <= {AXIS_GAP})"
        )
    if np.min(np.abs(z - w)) <= AXIS_GAP:
        raise ResolventDomainError(f"z = {z} is inside the spectrum of Delta")
    resolvent = matrix_function(triple.delta_spec, lambda x: 1.0 / (z - x))
    v = resolvent @ (src @ triple.omega)
    a = operator_from_vector(v, algebra, triple.omega)
    return ResolventTransfer(
        z=z, a=a, measured_norm=opnorm(a), bound=resolvent_bound(z, opnorm(src))
    )


def resolvent_transfer_mirror(
    triple: ModularTriple,
    commutant_algebra: OperatorSubspace,
    a,
    z: complex,
) -> ResolventTransfer:
    """Role-swapped transfer: source in A, solve in A', resolvent of Delta^{-1}.

    This is the same statement read for the commutant, whose modular operator
    is Delta^{-1}. It is run alongside the primary variant as an audit.
    """
    z = complex(z)
    src = as_square_array(a)
    w = 1.0 / triple.delta_spec.eigenvalues
    if abs(z) - z.real <= AXIS_GAP:
        raise ResolventDomainError(
            f"z = {z} is too close to the positive real axis (|z| - Re z <= {AXIS_GAP})"
        )
    if np.min(np.abs(z - w)) <= AXIS_GAP:
        raise ResolventDomainError(f"z = {z} is inside the spectrum of Delta^(-1)")
    resolvent = matrix_function(triple.delta_spec, lambda x: 1.0 / (z - 1.0 / x))
    v = resolvent @ (src @ triple.omega)
    a_pr = operator_from_vector(v, commutant_algebra, triple.omega)
    return ResolventTransfer(
        z=z, a=a_pr, measured_norm=opnorm(a_pr), bound=resolvent_bound(z, opnorm(src))
    )


# ---------------------------------------------------------------------------
# Closed-form exponential bounds
# ---------------------------------------------------------------------------


def tidy_bound(lam: float, n: int, norm_source: float) -> float:
    """Closed-form norm bound for one-sided windowed ladder elements, n >= 0.

    Exact evaluation of
    (|a'| / 2 pi) * (2 lam (lam^2 + 4 pi^2)^{n/2} / sqrt(2((lam^2+4pi^2)^{1/2} - lam))
                     + (2 pi)^{n+1} pi / sqrt(4 pi));
    monotone increasing in n and in lam.
    """
    if lam <= 0:
        raise WindowError(f"bound requires lambda > 0, got {lam}")
    lam = float(lam)
    r2 = lam * lam + 4.0 * math.pi * math.pi
    first = 2.0 * lam * r2 ** (n / 2.0) / math.sqrt(2.0 * (math.sqrt(r2) - lam))
    second = (2.0 * math.pi) ** (n + 1) * math.pi / math.sqrt(4.0 * math.pi)
    return norm_source / (2.0 * math.pi) * (first + second)


def mirrored_tidy_bound(lam: float, n: int, norm_source: float) -> float:
    """Mirror of the closed-form bound under lambda -> 1/lambda, n -> -n.

    Bounds the commutant-side ladder for n <= 0 in terms of the algebra-side
    source norm.
    """
    return tidy_bound(1.0 / lam, -n, norm_source)


@dataclass(frozen=True)
class BoundAuditRow:
    """One measured-versus-bound record for a ladder element."""

    lambda1: float
    lambda2: float
    n: int
    family: str  # "a" (algebra side) or "a_prime" (commutant side)
    measured_norm: float
    bound_value: float

    @property
    def ratio(self) -> float:
        return self.measured_norm / self.bound_value

    @property
    def passed(self) -> bool:
        return self.measured_norm <= self.bound_value * (1.0 + 1e-9)


@dataclass(frozen=True)
class GrowthAudit:
    rows: list[BoundAuditRow]
    slope_pos: float  # least-squares slope of log|a_n| for n >= 0
    slope_neg: float  # slope of log|a'_n| against -n for n <= 0
    bound_slope_pos: float
    bound_slope_neg: float


def growth_audit(
    triple: ModularTriple,
    algebra: OperatorSubspace,
    commutant_algebra: OperatorSubspace,
    source,
    lambda1: float,
    lambda2: float,
    n_max: int,
) -> GrowthAudit:
    """Measure ladder norms against the closed-form bounds for n = -N..N.

    Both solve families share the windowed vector. The bound paired with each
    row is the sign-appropriate closed form: the lambda_2 formula (source norm
    taken from the n = 0 commutant partner) for n >= 0, and its mirror at
    lambda_1 (source norm from the n = 0 algebra partner) for n < 0; the
    partner family at the same n is compared against the same value as a
    cross-check. Rows carry pass flags instead of raising: the closed form is
    derived through a contour identity that drops enclosed sigmoid poles, and
    measurements show its n = 0 constant can be exceeded (by a factor up to
    about 1.6 on these fixture families) while each step away from n = 0
    multiplies the slack by roughly 2 pi. The exponential growth rate itself
    is confirmed by the fitted slopes.
    """
    if n_max > N_CAP:
        raise WindowError(f"N = {n_max} exceeds the conditioning cap {N_CAP}")
    base = make_tidy(triple, algebra, commutant_algebra, source, lambda1, lambda2, n=0)
    norm_a0 = opnorm(base.a)
    norm_a0p = opnorm(base.a_prime)
    rows: list[BoundAuditRow] = []
    logs_pos, logs_neg = [], []
    for n in range(-n_max, n_max + 1):
        an = ladder(triple, algebra, base, n)
        apn = ladder(triple, commutant_algebra, base, n)
        if n >= 0:
            bound = tidy_bound(lambda2, n, norm_a0p)
        else:
            bound = mirrored_tidy_bound(lambda1, n, norm_a0)
        for family, op in (("a", an), ("a_prime", apn)):
            rows.append(
                BoundAuditRow(
                    lambda1=lambda1,
                    lambda2=lambda2,
                    n=n,
                    family=family,
                    measured_norm=opnorm(op),
                    bound_value=bound,
                )
            )
        if n >= 0:
            logs_pos.append((n, math.log(max(opnorm(an), 1e-300))))
        if n <= 0:
            logs_neg.append((-n, math.log(max(opnorm(apn), 1e-300))))
    slope_pos = _fit_slope(logs_pos)
    slope_neg = _fit_slope(logs_neg)
    return GrowthAudit(
        rows=rows,
        slope_pos=slope_pos,
        slope_neg=slope_neg,
        bound_slope_pos=0.5 * math.log(lambda2**2 + 4 * math.pi**2),
        bound_slope_neg=0.5 * math.log(1.0 / lambda1**2 + 4 * math.pi**2),
    )


def _fit_slope(points: list[tuple[int, float]]) -> float:
    if len(points) < 2:
        return 0.0
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    return float(np.polyfit(xs, ys, 1)[0])


# ---------------------------------------------------------------------------
# Ladder identities
# ---------------------------------------------------------------------------


def dagger_ladder_check(
    triple: ModularTriple,
    algebra: OperatorSubspace,
    commutant_algebra: OperatorSubspace,
    tidy: TidyOperator,
    n: int,
    tol_base: float = 1e-9,
) -> tuple[float, float]:
    """Residual of the adjoint-ladder identity (a'_{n+1})^* omega = (a_n)^* omega.

    Returns (residual, tolerance). The tolerance scales with the ladder vector
    magnitude: solve errors in double precision are relative to the solved
    vectors, which grow like |Delta|^n.
    """
    if abs(n) + 1 > N_CAP:
        raise WindowError(f"|n| + 1 = {abs(n) + 1} exceeds the conditioning cap {N_CAP}")
    a_n = ladder(triple, algebra, tidy, n)
    ap_n1 = ladder(triple, commutant_algebra, tidy, n + 1)
    lhs = ap_n1.conj().T @ triple.omega
    rhs = a_n.conj().T @ triple.omega
    residual = float(np.linalg.norm(lhs - rhs))
    scale = max(
        float(np.linalg.norm(lhs)),
        float(np.linalg.norm(rhs)),
        float(np.linalg.norm(tidy.vector)),
        1e-30,
    )
    tol = tol_base * math.sqrt(triple.kappa) * triple.dim * scale
    return residual, tol


def powers_check(
    triple: ModularTriple,
    algebra: OperatorSubspace,
    tidy_a: TidyOperator,
    tidy_b: TidyOperator,
    n: int,
    tol_base: float = 1e-9,
) -> tuple[float, float]:
    """Residual of Delta^n a Delta^{-n} b omega = a_n b omega.

    The two sides travel independent paths: matrix powers of Delta on the
    left, a ladder solve on the right. Tolerance carries the kappa^{|n|/2}
    amplification of the power sandwich.
    """
    if abs(n) > 6:
        raise WindowError(f"|n| = {abs(n)} exceeds the power-identity cap 6")
    d_pow = complex_power(triple.delta_spec, n)
    d_neg = complex_power(triple.delta_spec, -n)
    b_omega = tidy_b.vector
    lhs = d_pow @ (tidy_a.a @ (d_neg @ b_omega))
    a_n = ladder(triple, algebra, tidy_a, n)
    rhs = a_n @ b_omega
    residual = float(np.linalg.norm(lhs - rhs))
    scale = max(
        float(np.linalg.norm(lhs)),
        float(np.linalg.norm(rhs)),
        opnorm(tidy_a.a) * float(np.linalg.norm(b_omega)),
        1e-30,
    )
    tol = tol_base * triple.kappa ** ((abs(n) + 1) / 2.0) * triple.dim * scale
    return residual, tol


# ---------------------------------------------------------------------------
# Density checks
# ---------------------------------------------------------------------------


def tidy_vectors(
    triple: ModularTriple,
    algebra: OperatorSubspace,
    windows,
) -> list[np.ndarray]:
    """Windowed vectors W a_i omega for every basis element and window."""
    vs = []
    for (l1, l2) in windows:
        w = spectral_window(triple, l1, l2)
        for b in algebra.basis:
            vs.append(w @ (b @ triple.omega))
    return vs


def tidy_span_check(
    triple: ModularTriple,
    algebra: OperatorSubspace,
    windows,
) -> RankReport:
    """Numerical rank of the span of windowed basis vectors.

    Full rank d is expected exactly when the windows cover the spectrum of
    Delta; a missed eigenspace shows up as a rank deficit of its dimension.
    """
    vs = tidy_vectors(triple, algebra, windows)
    stack = np.column_stack(vs) if vs else np.zeros((triple.dim, 0))
    sv = np.linalg.svd(stack, compute_uv=False)
    return RankReport(rank=numerical_rank(sv), required=triple.dim, singular_values=sv)


def tidy_bicommutant_check(
    triple: ModularTriple,
    algebra: OperatorSubspace,
    commutant_algebra: OperatorSubspace,
    windows,
) -> float:
    """Mutual projection residual between (tidy set)'' and the algebra.

    The tidy set is built from every algebra basis element and every window
    (n = 0, two-sided solves). Covering windows must regenerate the algebra.
    """
    ops = []
    for (l1, l2) in windows:
        for b in algebra.basis:
            t = make_tidy(triple, algebra, commutant_algebra, b, l1, l2, n=0)
            ops.append(t.a)
    tidy_span = subspace_orthonormalize(ops, dim_space=triple.dim)
    regenerated = bicommutant(tidy_span)
    return mutual_projection_residual(regenerated, algebra)
