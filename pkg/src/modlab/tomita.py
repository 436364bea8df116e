"""Tomita operator and modular data of a pair (algebra, cyclic-separating vector).

Given an algebra A with orthonormal basis {a_i} and a unit vector omega that
is cyclic and separating, the antilinear Tomita operator S is fixed by
S(a omega) = a^* omega. Writing B for the square matrix with columns
a_i omega and B_* for the one with columns a_i^* omega, the matrix of S is
``B_* conj(B)^{-1}``. Polar decomposition S = J Delta^(1/2) then yields the
modular conjugation J (antiunitary involution) and the modular operator
Delta (positive, invertible), with S^* = J Delta^(-1/2) and
J Delta J = Delta^(-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    AlgebraError,
    NotCyclicError,
    NotSeparatingError,
    OperatorSubspace,
    cyclic_report,
    separating_report,
)
from .linalg import (
    AntilinearMap,
    SpectralDecomposition,
    hermitian_eig,
    polar_antilinear,
)

COND_CAP = 1e6  # refuse basis solves beyond this condition number


class IllConditionedError(AlgebraError):
    def __init__(self, cond: float):
        self.cond = cond
        super().__init__(
            f"basis matrix condition number {cond:.3e} exceeds cap {COND_CAP:.1e}; "
            "refusing to build an untrustworthy Tomita operator"
        )


class ModularBreakdownError(AlgebraError):
    def __init__(self, min_eig: float, kappa: float):
        self.min_eig = min_eig
        self.kappa = kappa
        super().__init__(
            f"modular operator lost positivity (min eigenvalue {min_eig:.3e}, "
            f"condition number {kappa:.3e})"
        )


@dataclass(frozen=True)
class ModularTriple:
    """Modular data of (A, omega): the operators S, J, Delta plus eigendata."""

    omega: np.ndarray
    s: AntilinearMap
    j: AntilinearMap
    delta: np.ndarray
    delta_spec: SpectralDecomposition
    kappa: float

    @property
    def dim(self) -> int:
        return self.omega.shape[0]

    @property
    def s_star(self) -> AntilinearMap:
        return self.s.adjoint()


def _basis_vector_matrix(a: OperatorSubspace, omega: np.ndarray) -> np.ndarray:
    return np.column_stack([b @ omega for b in a.basis])


def tomita_operator(a: OperatorSubspace, omega) -> AntilinearMap:
    """Antilinear S with S(x omega) = x^* omega for every x in the algebra.

    Preconditions are enforced, with distinct errors carrying the rank
    evidence: omega must be cyclic (orbit rank d) and separating (trivial
    solve nullspace), which forces dim(A) = d and makes the basis matrix B
    square and invertible. Solves with cond(B) beyond COND_CAP are refused.
    """
    omega = np.asarray(omega, dtype=complex)
    cyc = cyclic_report(a, omega)
    if not cyc.full:
        raise NotCyclicError(cyc)
    sep = separating_report(a, omega)
    if not sep.full:
        raise NotSeparatingError(sep)
    if a.dim != a.dim_space:
        # cyclic + separating forces dim(A) = d; reaching here means rank
        # certification and subspace dimension disagree
        raise AlgebraError(
            f"inconsistent certification: dim(A) = {a.dim} != d = {a.dim_space}"
        )
    b = _basis_vector_matrix(a, omega)
    sv = np.linalg.svd(b, compute_uv=False)
    cond = float(sv[0] / sv[-1])
    if cond > COND_CAP:
        raise IllConditionedError(cond)
    b_star = np.column_stack([x.conj().T @ omega for x in a.basis])
    # M conj(B) = B_*  =>  M = solve on the right
    m = np.linalg.solve(b.conj().T, b_star.T).T
    return AntilinearMap(m)


def modular_data(a: OperatorSubspace, omega) -> ModularTriple:
    """Construct the full modular triple (S, J, Delta) for (A, omega)."""
    omega = np.asarray(omega, dtype=complex)
    s = tomita_operator(a, omega)
    j, delta = polar_antilinear(s)
    spec = hermitian_eig(delta)
    w = spec.eigenvalues
    kappa = float(w[-1] / w[0]) if w[0] > 0 else np.inf
    if w[0] <= 0.0:
        raise ModularBreakdownError(float(w[0]), kappa)
    return ModularTriple(
        omega=omega, s=s, j=j, delta=delta, delta_spec=spec, kappa=kappa
    )
