"""Finite-dimensional von Neumann algebra engine.

An algebra (or any operator subspace) is represented by an orthonormal basis
of d x d matrices under the trace inner product <X, Y> = tr(X^dag Y). The
engine provides star-algebra closure from generators, commutants and
bicommutants by nullspace computation on the d^2-dimensional operator space,
and cyclic/separating certification of vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_square_array, frob

RANK_TOL = 1e-9  # singular values below RANK_TOL * max count as zero
SPAN_TOL = 1e-10


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class RankReport:
    """Numerical rank evidence from an SVD: rank at RANK_TOL and the spectrum."""

    rank: int
    required: int
    singular_values: np.ndarray

    @property
    def full(self) -> bool:
        return self.rank >= self.required


class NotCyclicError(AlgebraError):
    def __init__(self, report: RankReport):
        self.report = report
        super().__init__(
            f"vector is not cyclic: orbit rank {report.rank} < {report.required}"
        )


class NotSeparatingError(AlgebraError):
    def __init__(self, report: RankReport):
        self.report = report
        super().__init__(
            f"vector is not separating: a -> a omega has nullspace of dimension "
            f"{report.required - report.rank}"
        )


@dataclass(frozen=True)
class OperatorSubspace:
    """A linear subspace of d x d matrices with a trace-orthonormal basis."""

    dim_space: int
    basis: np.ndarray  # shape (k, d, d), rows orthonormal under <X,Y>=tr(X^dag Y)
    contains_identity: bool = field(default=False)

    @property
    def dim(self) -> int:
        """Dimension of the subspace (number of basis elements)."""
        return self.basis.shape[0]

    def flat(self) -> np.ndarray:
        """Basis as a (k, d^2) row-orthonormal matrix (row-major flattening)."""
        return self.basis.reshape(self.dim, -1)

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        """Trace-inner-product coefficients of x against the basis."""
        return self.flat().conj() @ np.asarray(x, dtype=complex).reshape(-1)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of x onto the subspace."""
        c = self.coefficients(x)
        return np.tensordot(c, self.basis, axes=(0, 0))

    def element(self, coeffs: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=complex), self.basis, axes=(0, 0))


def membership_residual(x, subspace: OperatorSubspace, eps: float = 1e-30) -> float:
    """Distance of x from the subspace, relative to its own size.

    Returns ``|x - P(x)|_F / max(|x|_F, eps)``; zero (to rounding) exactly when
    x lies in the span.
    """
    m = np.asarray(x, dtype=complex)
    p = subspace.project(m)
    return frob(m - p) / max(frob(m), eps)


def subspace_orthonormalize(mats, dim_space: int | None = None) -> OperatorSubspace:
    """Orthonormalize a list of matrices under the trace inner product.

    The span is preserved: every input is within SPAN_TOL of its projection
    onto the output. Empty input yields the zero-dimensional subspace (the
    Hilbert space dimension must then be supplied).
    """
    mats = [as_square_array(m) for m in mats]
    if not mats:
        if dim_space is None:
            raise AlgebraError("cannot infer dimension from an empty generator list")
        return OperatorSubspace(dim_space, np.zeros((0, dim_space, dim_space), dtype=complex))
    d = mats[0].shape[0]
    for m in mats:
        if m.shape[0] != d:
            raise AlgebraError(f"dimension mismatch: {m.shape[0]} != {d}")
    stack = np.stack(mats).reshape(len(mats), d * d)
    _, sv, vh = np.linalg.svd(stack, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return OperatorSubspace(d, np.zeros((0, d, d), dtype=complex))
    keep = sv > RANK_TOL * sv[0]
    basis = vh[keep].reshape(-1, d, d)
    sub = OperatorSubspace(d, basis)
    has_id = membership_residual(np.eye(d), sub) <= SPAN_TOL
    return OperatorSubspace(d, basis, contains_identity=has_id)


def close_to_algebra(generators, dim_space: int | None = None) -> OperatorSubspace:
    """Smallest unital star-algebra containing the generators.

    Iterates span + adjoints + pairwise products to a fixed point,
    re-orthonormalizing each round. The iteration cannot exceed the full
    matrix algebra, so it is capped at d^2 rounds.
    """
    gens = [as_square_array(g) for g in generators]
    if gens:
        d = gens[0].shape[0]
    elif dim_space is not None:
        d = dim_space
    else:
        raise AlgebraError("cannot infer dimension from an empty generator list")
    current = subspace_orthonormalize([np.eye(d)] + gens)
    for _ in range(d * d + 1):
        elems = list(current.basis)
        new = elems + [b.conj().T for b in elems]
        for x in elems:
            for y in elems:
                new.append(x @ y)
        grown = subspace_orthonormalize(new)
        if grown.dim == current.dim:
            return grown
        current = grown
    raise AlgebraError("algebra closure did not stabilize within d^2 rounds")


def commutant(a: OperatorSubspace) -> OperatorSubspace:
    """Commutant {x : [x, b] = 0 for every basis element b of a}.

    Computed as the nullspace of the stacked commutator map on the
    d^2-dimensional operator space. The result of a (certified) algebra is
    itself an algebra.
    """
    d = a.dim_space
    if a.dim == 0:
        return subspace_orthonormalize(_full_basis(d))
    eye = np.eye(d)
    blocks = []
    for b in a.basis:
        # row-major vec: vec(x b) = (1 (x) b^T) vec(x), vec(b x) = (b (x) 1) vec(x)
        blocks.append(np.kron(eye, b.T) - np.kron(b, eye))
    stacked = np.concatenate(blocks, axis=0)
    _, sv, vh = np.linalg.svd(stacked)
    # basis elements are trace-normalized, so genuine non-commutation shows up
    # at scale O(1); the floor keeps noise-level singular values in the nullspace
    threshold = RANK_TOL * max(float(sv[0]) if sv.size else 0.0, 1.0)
    if sv.size:
        null_mask = np.concatenate([sv <= threshold, np.ones(d * d - sv.size, bool)])
    else:
        null_mask = np.ones(d * d, bool)
    null_rows = vh[null_mask]
    basis = null_rows.conj().reshape(-1, d, d)
    return subspace_orthonormalize(list(basis))


def _full_basis(d: int):
    out = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            out.append(e)
    return out


def bicommutant(a: OperatorSubspace) -> OperatorSubspace:
    return commutant(commutant(a))


def subspace_equal(a: OperatorSubspace, b: OperatorSubspace, tol: float = 1e-9) -> bool:
    return mutual_projection_residual(a, b) <= tol


def mutual_projection_residual(a: OperatorSubspace, b: OperatorSubspace) -> float:
    """Largest distance of a basis element of either subspace from the other."""
    if a.dim != b.dim:
        return 1.0
    if a.dim == 0:
        return 0.0
    res = 0.0
    for x in a.basis:
        res = max(res, frob(x - b.project(x)))
    for y in b.basis:
        res = max(res, frob(y - a.project(y)))
    return res


def is_algebra(a: OperatorSubspace, tol: float = SPAN_TOL * 10) -> bool:
    """Check closure under adjoint and multiplication plus unitality.

    Residuals are absolute: basis elements are unit vectors under the trace
    norm, so their adjoints and pairwise products live at scale at most 1 and
    a numerically-zero product must count as inside the span.
    """
    if not a.contains_identity:
        return False
    for x in a.basis:
        if frob(x.conj().T - a.project(x.conj().T)) > tol:
            return False
    for x in a.basis:
        for y in a.basis:
            p = x @ y
            if frob(p - a.project(p)) > tol:
                return False
    return True


def _orbit_matrix(a: OperatorSubspace, omega: np.ndarray) -> np.ndarray:
    """d x dim(a) matrix with columns b_i omega."""
    return np.column_stack([b @ omega for b in a.basis])


def numerical_rank(sv: np.ndarray) -> int:
    """Rank at the global threshold, floored at the O(1) scale of unit data."""
    if sv.size == 0:
        return 0
    return int(np.sum(sv > RANK_TOL * max(float(sv[0]), 1.0)))


def cyclic_report(a: OperatorSubspace, omega) -> RankReport:
    omega = np.asarray(omega, dtype=complex)
    orbit = _orbit_matrix(a, omega)
    sv = np.linalg.svd(orbit, compute_uv=False)
    return RankReport(rank=numerical_rank(sv), required=a.dim_space, singular_values=sv)


def is_cyclic(a: OperatorSubspace, omega) -> bool:
    """True iff the orbit {b omega} has full numerical rank d."""
    return cyclic_report(a, omega).full


def separating_report(a: OperatorSubspace, omega) -> RankReport:
    """Rank evidence for the map a -> a omega restricted to the subspace."""
    omega = np.asarray(omega, dtype=complex)
    orbit = _orbit_matrix(a, omega)
    sv = np.linalg.svd(orbit, compute_uv=False)
    return RankReport(rank=numerical_rank(sv), required=a.dim, singular_values=sv)


def is_separating(a: OperatorSubspace, omega) -> bool:
    """True iff a -> a omega has trivial nullspace on the subspace.

    Equivalent to omega being cyclic for the commutant; the equivalence is
    exercised as a property test rather than assumed here.
    """
    return separating_report(a, omega).full
