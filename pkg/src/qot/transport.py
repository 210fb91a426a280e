"""Transport-type cost functionals between quantum states.

The base cost ``transport_cost`` minimizes the expectation of the
antisymmetric projector over all couplings of two states; ``wasserstein`` is
its square root.  ``stabilized_cost`` is the infimum of the base cost over
tensoring both states with a shared ancilla, computed through its two-block
reformulation; ``stabilized_cost_via_tensoring`` evaluates the equivalent
maximally-mixed-qubit extension directly and serves as a cross-check.

Couplings are always built on the supports of the marginals: any coupling of
(rho, sigma) lives inside range(rho) (x) range(sigma), so compressing there
is exact and leaves every solved SDP with a strictly feasible interior point
(the product of the reduced marginals).  Results are lifted back to the full
space afterwards; dual potentials get negative-identity padding off-support,
verified by an explicit eigenvalue check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from . import sdp
from .quantum import (
    DensityMatrix,
    DimensionMismatchError,
    HermitianOperator,
    hermitian_basis,
    proj_asym,
    proj_asym_reshuffled,
    proj_sym,
    tensor,
)

__all__ = [
    "DualWitness",
    "TransportResult",
    "StabilizedResult",
    "transport_cost",
    "dual_value",
    "wasserstein",
    "stabilized_cost",
    "stabilized_cost_via_tensoring",
    "tensored_cost",
    "DEFAULT_TOL",
    "WITNESS_FEASIBILITY_TOL",
    "MAX_TENSORED_DIM",
]

DEFAULT_TOL = sdp.DEFAULT_TOL
WITNESS_FEASIBILITY_TOL = 1e-7
MAX_TENSORED_DIM = 256

# Marginal eigenvalues at or below this are treated as zero when building
# coupling supports; states never carry eigenvalues below -1e-10.
SUPPORT_CUT = 1e-10


@dataclass(frozen=True)
class DualWitness:
    """A feasible pair for the dual program: two Hermitian potentials whose
    identity extension is dominated by the antisymmetric projector.

    ``feasibility_margin`` is minus the largest eigenvalue of
    ``potential_a (x) I + I (x) potential_b - proj_asym``; construction fails
    when it drops below -1e-7.
    """

    potential_a: HermitianOperator
    potential_b: HermitianOperator
    feasibility_margin: float = field(init=False)

    def __post_init__(self):
        if self.potential_a.dim != self.potential_b.dim:
            raise DimensionMismatchError("witness potentials must share one dimension")
        d = self.potential_a.dim
        lhs = np.kron(self.potential_a.matrix, np.eye(d)) + np.kron(
            np.eye(d), self.potential_b.matrix
        )
        margin = -float(np.linalg.eigvalsh(lhs - proj_asym(d).matrix)[-1])
        if margin < -WITNESS_FEASIBILITY_TOL:
            raise ValueError(f"witness is infeasible: margin {margin:.3e}")
        object.__setattr__(self, "feasibility_margin", margin)

    @property
    def dim(self) -> int:
        return self.potential_a.dim


@dataclass(frozen=True)
class TransportResult:
    """Optimal transport cost with its primal coupling and dual certificate."""

    value: float
    coupling: DensityMatrix
    dual_witness: DualWitness
    gap: float

    def __post_init__(self):
        if not -1e-9 <= self.value <= 1 + 1e-9:
            raise ValueError(f"cost {self.value!r} outside [0, 1]")


@dataclass(frozen=True)
class StabilizedResult:
    """Stabilized cost with the optimizers of its two-block formulation.

    ``sym_block`` is charged against the symmetric projector in the
    objective, ``asym_block`` against the antisymmetric one; their sum is a
    coupling of the two input states.
    """

    value: float
    sym_block: HermitianOperator
    asym_block: HermitianOperator
    gap: float


def transport_cost(rho: DensityMatrix, sigma: DensityMatrix, tol: float = DEFAULT_TOL) -> TransportResult:
    """Minimum expectation of the antisymmetric projector over couplings.

    Returns the optimal value together with an optimizing coupling and a
    feasibility-checked dual witness certifying the matching lower bound.
    """
    d = _require_same_dim(rho, sigma)
    iso_a, red_a = _support(rho)
    iso_b, red_b = _support(sigma)
    ra, rb = red_a.shape[0], red_b.shape[0]
    cost = _compress_two_sided(proj_asym(d).matrix, iso_a, iso_b, d)

    basis_a, basis_b = hermitian_basis(ra), hermitian_basis(rb)
    problem = _coupling_problem(cost, red_a, red_b, basis_a, basis_b)
    sol = _solved(problem, tol)

    pot_a = np.tensordot(sol.dual_vector[: ra * ra], basis_a, axes=(0, 0))
    pot_b = np.tensordot(sol.dual_vector[ra * ra :], basis_b[1:], axes=(0, 0))
    if iso_a is None and iso_b is None:
        full_a, full_b = pot_a, pot_b
    else:
        full_a, full_b = _lift_potentials(pot_a, pot_b, iso_a, iso_b, cost, d)
    full_a, full_b = _balance_traces(full_a, full_b)

    coupling = _lift_coupling(sol.primal_blocks[0], iso_a, iso_b, d)
    return TransportResult(
        value=float(sol.primal_value),
        coupling=DensityMatrix(coupling / np.trace(coupling).real),
        dual_witness=DualWitness(HermitianOperator(full_a), HermitianOperator(full_b)),
        gap=float(sol.gap),
    )


def dual_value(rho: DensityMatrix, sigma: DensityMatrix, witness: DualWitness) -> float:
    """Lower bound Tr[potential_a rho] + Tr[potential_b sigma] on the cost."""
    d = _require_same_dim(rho, sigma)
    if witness.dim != d:
        raise DimensionMismatchError(f"witness dim {witness.dim} does not match states ({d})")
    if witness.feasibility_margin < -WITNESS_FEASIBILITY_TOL:
        raise ValueError(f"witness is infeasible: margin {witness.feasibility_margin:.3e}")
    return float(
        np.trace(witness.potential_a.matrix @ rho.matrix).real
        + np.trace(witness.potential_b.matrix @ sigma.matrix).real
    )


def wasserstein(rho: DensityMatrix, sigma: DensityMatrix, tol: float = DEFAULT_TOL) -> float:
    """Square root of the transport cost."""
    return sqrt(max(0.0, transport_cost(rho, sigma, tol).value))


def stabilized_cost(rho: DensityMatrix, sigma: DensityMatrix, tol: float = DEFAULT_TOL) -> StabilizedResult:
    """Stabilized transport cost via its two-block split formulation.

    Minimizes Tr[X P_sym] + Tr[Y P_asym] over PSD X, Y whose sum couples
    rho with sigma.
    """
    d = _require_same_dim(rho, sigma)
    iso_a, red_a = _support(rho)
    iso_b, red_b = _support(sigma)
    ra, rb = red_a.shape[0], red_b.shape[0]
    cost_sym = _compress_two_sided(proj_sym(d).matrix, iso_a, iso_b, d)
    cost_asym = _compress_two_sided(proj_asym(d).matrix, iso_a, iso_b, d)

    basis_a, basis_b = hermitian_basis(ra), hermitian_basis(rb)
    n = ra * rb
    constraints = []
    for k in range(ra * ra):
        op = HermitianOperator(np.kron(basis_a[k], np.eye(rb)))
        constraints.append(((op, op), np.trace(basis_a[k] @ red_a).real))
    for k in range(1, rb * rb):
        op = HermitianOperator(np.kron(np.eye(ra), basis_b[k]))
        constraints.append(((op, op), np.trace(basis_b[k] @ red_b).real))
    problem = sdp.SdpProblem(
        blocks=(n, n),
        objective=(HermitianOperator(cost_sym), HermitianOperator(cost_asym)),
        constraints=tuple(constraints),
    )
    sol = _solved(problem, tol)
    return StabilizedResult(
        value=float(sol.primal_value),
        sym_block=HermitianOperator(_psd_clean(_lift_coupling(sol.primal_blocks[0], iso_a, iso_b, d))),
        asym_block=HermitianOperator(_psd_clean(_lift_coupling(sol.primal_blocks[1], iso_a, iso_b, d))),
        gap=float(sol.gap),
    )


def stabilized_cost_via_tensoring(rho: DensityMatrix, sigma: DensityMatrix, tol: float = DEFAULT_TOL) -> float:
    """Stabilized cost evaluated as the base cost of the states tensored with
    a maximally mixed qubit; agrees with ``stabilized_cost`` within 2*tol."""
    d = _require_same_dim(rho, sigma)
    if 4 * d * d > MAX_TENSORED_DIM:
        raise DimensionMismatchError(
            f"tensored coupling dimension {4 * d * d} exceeds the desk-scale cap {MAX_TENSORED_DIM}"
        )
    qubit = np.eye(2, dtype=complex) / 2
    return _interleaved_cost(rho.matrix, qubit, sigma.matrix, qubit, d, 2, tol)


def tensored_cost(
    rho1: DensityMatrix,
    sigma1: DensityMatrix,
    rho2: DensityMatrix,
    sigma2: DensityMatrix,
    tol: float = DEFAULT_TOL,
) -> float:
    """Base cost between tensor-product pairs, on interleaved factor ordering."""
    d1 = _require_same_dim(rho1, sigma1)
    d2 = _require_same_dim(rho2, sigma2)
    if (d1 * d2) ** 2 > MAX_TENSORED_DIM:
        raise DimensionMismatchError(
            f"tensored coupling dimension {(d1 * d2) ** 2} exceeds the desk-scale cap {MAX_TENSORED_DIM}"
        )
    return _interleaved_cost(rho1.matrix, rho2.matrix, sigma1.matrix, sigma2.matrix, d1, d2, tol)


# ---------------------------------------------------------------------------
# Problem assembly


def _require_same_dim(rho, sigma) -> int:
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"state dimensions differ: {rho.dim} vs {sigma.dim}")
    return rho.dim


def _support(state: DensityMatrix):
    """(isometry, reduced density) for the eigenvalue support of a state.

    The isometry is None when the state has full numerical rank; the reduced
    density is renormalized to unit trace (the discarded mass is at most
    d * SUPPORT_CUT).
    """
    vals, vecs = np.linalg.eigh(state.matrix)
    keep = vals > SUPPORT_CUT
    if np.all(keep):
        return None, state.matrix
    iso = vecs[:, keep]
    red = iso.conj().T @ state.matrix @ iso
    red = (red + red.conj().T) / 2
    return iso, red / np.trace(red).real


def _compress_two_sided(op: np.ndarray, iso_a, iso_b, d: int) -> np.ndarray:
    """Compress an operator on C^d (x) C^d with per-factor isometries."""
    if iso_a is None and iso_b is None:
        return op
    w = np.kron(
        iso_a if iso_a is not None else np.eye(d),
        iso_b if iso_b is not None else np.eye(d),
    )
    out = w.conj().T @ op @ w
    return (out + out.conj().T) / 2


def _lift_coupling(block: np.ndarray, iso_a, iso_b, d: int) -> np.ndarray:
    if iso_a is None and iso_b is None:
        return block
    w = np.kron(
        iso_a if iso_a is not None else np.eye(d),
        iso_b if iso_b is not None else np.eye(d),
    )
    out = w @ block @ w.conj().T
    return (out + out.conj().T) / 2


def _psd_clean(mat: np.ndarray) -> np.ndarray:
    """Clip the tiny negative eigenvalue dust an epsilon-optimal block carries."""
    vals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2)
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals) @ vecs.conj().T


def _coupling_problem(cost, red_a, red_b, basis_a, basis_b) -> sdp.SdpProblem:
    """Single-block coupling SDP: marginals fixed over orthonormal Hermitian
    bases, with the duplicate trace constraint dropped from the second side."""
    ra, rb = red_a.shape[0], red_b.shape[0]
    constraints = []
    for k in range(ra * ra):
        op = HermitianOperator(np.kron(basis_a[k], np.eye(rb)))
        constraints.append(((op,), np.trace(basis_a[k] @ red_a).real))
    for k in range(1, rb * rb):
        op = HermitianOperator(np.kron(np.eye(ra), basis_b[k]))
        constraints.append(((op,), np.trace(basis_b[k] @ red_b).real))
    return sdp.SdpProblem(
        blocks=(ra * rb,),
        objective=(HermitianOperator(cost),),
        constraints=tuple(constraints),
    )


def _interleaved_cost(mu_a1, mu_a2, mu_b1, mu_b2, d1: int, d2: int, tol: float) -> float:
    """Cost of coupling mu_a1 (x) mu_a2 with mu_b1 (x) mu_b2, with the coupling
    ordered A1 B1 A2 B2 and the reshaped antisymmetric projector as objective."""
    sup_a1, red_a1 = _support(DensityMatrix(mu_a1))
    sup_b1, red_b1 = _support(DensityMatrix(mu_b1))
    sup_a2, red_a2 = _support(DensityMatrix(mu_a2))
    sup_b2, red_b2 = _support(DensityMatrix(mu_b2))

    def _eye(iso, d):
        return iso if iso is not None else np.eye(d)

    w = tensor(_eye(sup_a1, d1), _eye(sup_b1, d1), _eye(sup_a2, d2), _eye(sup_b2, d2))
    cost = w.conj().T @ proj_asym_reshuffled(d1, d2).matrix @ w
    cost = (cost + cost.conj().T) / 2

    ra1, rb1 = red_a1.shape[0], red_b1.shape[0]
    ra2, rb2 = red_a2.shape[0], red_b2.shape[0]
    basis_a1, basis_b1 = hermitian_basis(ra1), hermitian_basis(rb1)
    basis_a2, basis_b2 = hermitian_basis(ra2), hermitian_basis(rb2)

    constraints = []
    for k1 in range(ra1 * ra1):
        for k2 in range(ra2 * ra2):
            op = HermitianOperator(tensor(basis_a1[k1], np.eye(rb1), basis_a2[k2], np.eye(rb2)))
            rhs = np.trace(basis_a1[k1] @ red_a1).real * np.trace(basis_a2[k2] @ red_a2).real
            constraints.append(((op,), rhs))
    for k1 in range(rb1 * rb1):
        for k2 in range(rb2 * rb2):
            if k1 == 0 and k2 == 0:
                continue
            op = HermitianOperator(tensor(np.eye(ra1), basis_b1[k1], np.eye(ra2), basis_b2[k2]))
            rhs = np.trace(basis_b1[k1] @ red_b1).real * np.trace(basis_b2[k2] @ red_b2).real
            constraints.append(((op,), rhs))

    problem = sdp.SdpProblem(
        blocks=(ra1 * rb1 * ra2 * rb2,),
        objective=(HermitianOperator(cost),),
        constraints=tuple(constraints),
    )
    return float(_solved(problem, tol).primal_value)


def _solved(problem: sdp.SdpProblem, tol: float) -> sdp.SdpSolution:
    sol = sdp.solve(problem, tol)
    if sol.status != sdp.STATUS_OPTIMAL:
        raise sdp.SolverFailure(
            sol.status,
            f"coupling SDP did not reach tolerance {tol:g}: status {sol.status}, "
            f"gap {sol.gap:.3e}, residual {sol.primal_infeasibility:.3e}",
        )
    return sol


# ---------------------------------------------------------------------------
# Dual potential lifting


def _balance_traces(pot_a: np.ndarray, pot_b: np.ndarray):
    """Fix the identity-shift ambiguity by equalizing the two traces."""
    d = pot_a.shape[0]
    c = (np.trace(pot_a).real - np.trace(pot_b).real) / (2 * d)
    return pot_a - c * np.eye(d), pot_b + c * np.eye(d)


def _lift_potentials(pot_a, pot_b, iso_a, iso_b, reduced_cost, d: int):
    """Extend reduced dual potentials to the full space.

    Off-support directions get a large negative multiple of the identity;
    the dual value is unchanged because the states carry no mass there.  A
    final global shift of the first potential makes the full-space
    feasibility margin exactly zero (for near-optimal reduced potentials the
    dual supremum is approached, not attained, so some shift is inherent).
    """
    ra, rb = pot_a.shape[0], pot_b.shape[0]
    excess = float(
        np.linalg.eigvalsh(
            np.kron(pot_a, np.eye(rb)) + np.kron(np.eye(ra), pot_b) - reduced_cost
        )[-1]
    )
    if excess > 0:  # solver dual dust; restore exact reduced feasibility
        pot_a = pot_a - excess * np.eye(ra)

    def extend(pot, iso, beta):
        if iso is None:
            return pot
        lifted = iso @ pot @ iso.conj().T
        off = np.eye(d) - iso @ iso.conj().T
        return lifted - beta * off

    top = max(1.0, float(np.linalg.eigvalsh(pot_a)[-1]) + float(np.linalg.eigvalsh(pot_b)[-1]))
    beta = 1e6 * top
    pasym = proj_asym(d).matrix
    for _ in range(12):
        full_a = extend(pot_a, iso_a, beta)
        full_b = extend(pot_b, iso_b, beta)
        delta = float(
            np.linalg.eigvalsh(np.kron(full_a, np.eye(d)) + np.kron(np.eye(d), full_b) - pasym)[-1]
        )
        if delta <= 5e-7:
            break
        beta *= 4
    full_a = full_a - max(delta, 0.0) * np.eye(d)
    return full_a, full_b
