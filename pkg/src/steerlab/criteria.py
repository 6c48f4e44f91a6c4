"""
Correlation-matrix steering criteria, ideal and with imprecise measurements.

Every gap has the shape

    gap = lhs - c_pen * sqrt(xi) - sqrt(lambda_a * (lambda_b + c_infl * eta(xi)))

where ``lhs`` is a trace norm (or weighted diagonal sum) of a centred
correlation matrix. :class:`GapTerms` stores the xi-independent pieces so a
state can be evaluated along a whole xi axis cheaply, and so the ideal
criterion is literally the ``xi = 0`` evaluation of the imprecise one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ContractError, ConvergenceError, DimensionError
from .observables import (
    ErrorModel,
    ObservableBasis,
    eta,
    gell_mann_loo,
    loo_for,
    product_loo,
)
from .states import DensityMatrix, purity

IMAG_TOL = 1e-10

A_TO_B = "A->B"
B_TO_A = "B->A"
A_TO_BC = "A->BC"
BC_TO_A = "BC->A"
SCENARIOS = (A_TO_B, B_TO_A, A_TO_BC, BC_TO_A)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    entries: np.ndarray
    row_basis: str = ""
    col_basis: str = ""

    def trace_norm(self) -> float:
        return linalg.trace_norm(self.entries)


@dataclass(frozen=True)
class VarianceBounds:
    lambda_a: float
    lambda_b: float
    lambda_b_inflated: float
    eta_used: float


@dataclass(frozen=True)
class GapReport:
    scenario: str
    xi: float
    lhs: float
    penalty: float
    rhs: float
    gap: float
    steerable: bool

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "xi": self.xi,
            "lhs": self.lhs,
            "penalty": self.penalty,
            "rhs": self.rhs,
            "gap": self.gap,
            "steerable": self.steerable,
        }

    def to_json(self) -> str:
        from .io import dumps_json

        return dumps_json(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GapReport":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class GapTerms:
    """xi-independent ingredients of one scenario for one state."""

    scenario: str
    lhs: float
    lambda_a: float
    lambda_b: float
    penalty_coeff: float
    inflation_coeff: float
    dim: int

    def at(self, xi: float | ErrorModel = 0.0) -> GapReport:
        model = xi if isinstance(xi, ErrorModel) else ErrorModel(float(xi), self.dim)
        if model.dim != self.dim:
            raise DimensionError(f"error model is for d={model.dim}, scenario needs d={self.dim}")
        penalty = self.penalty_coeff * np.sqrt(model.xi)
        rhs = np.sqrt(self.lambda_a * (self.lambda_b + self.inflation_coeff * eta(model)))
        gap = self.lhs - penalty - rhs
        return GapReport(self.scenario, model.xi, self.lhs, float(penalty), float(rhs), float(gap), bool(gap > 0))

    def gaps(self, xis) -> np.ndarray:
        """Vectorized gap values along an array of xi."""
        xis = np.asarray(xis, dtype=float)
        d = self.dim
        eta_v = d * d * (xis / 2 + np.sqrt(2 * d * xis))
        return self.lhs - self.penalty_coeff * np.sqrt(xis) - np.sqrt(
            self.lambda_a * (self.lambda_b + self.inflation_coeff * eta_v)
        )


def _rho(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else linalg.as_matrix(rho)


# --- correlation matrices and variances ------------------------------------


def correlation_matrix(rho: DensityMatrix, basis_a: ObservableBasis, basis_b: ObservableBasis) -> CorrelationMatrix:
    """Entries ``Tr[(A_i (x) B_j)(rho - rho_a (x) rho_b)]`` for a bipartite ``rho``."""
    if len(rho.dims) != 2:
        raise DimensionError(f"correlation_matrix needs a bipartite state, got dims {rho.dims}")
    da, db = rho.dims
    if basis_a.dim != da or basis_b.dim != db:
        raise DimensionError(
            f"bases act on ({basis_a.dim}, {basis_b.dim}) but the state has dims ({da}, {db})"
        )
    rho_a = linalg.partial_trace(rho.matrix, rho.dims, [0])
    rho_b = linalg.partial_trace(rho.matrix, rho.dims, [1])
    diff = (rho.matrix - np.kron(rho_a, rho_b)).reshape(da, db, da, db)
    c = np.einsum("iac,jbd,cdab->ij", basis_a.operators, basis_b.operators, diff, optimize=True)
    if np.max(np.abs(c.imag), initial=0.0) > IMAG_TOL:
        raise ContractError("correlation matrix has a non-negligible imaginary part")
    return CorrelationMatrix(np.ascontiguousarray(c.real), basis_a.name, basis_b.name)


def variance(op, rho) -> float:
    op = linalg.as_matrix(op)
    r = _rho(rho)
    mean = linalg.expectation(op, r)
    return max(linalg.expectation(op @ op, r) - mean**2, 0.0)


def lambda_a(basis: ObservableBasis, rho_a, g=None) -> float:
    """``sum_i g_i^2 V(A_i, rho_a)``; unit weights when ``g`` is None."""
    g = np.ones(len(basis)) if g is None else np.asarray(g, dtype=float)
    if g.shape != (len(basis),):
        raise DimensionError(f"{g.size} weights for {len(basis)} observables")
    if not np.all(np.isfinite(g)):
        raise ContractError("weights must be finite")
    return float(sum(w * w * variance(op, rho_a) for w, op in zip(g, basis.operators)))


def lambda_b_loo(rho_b: DensityMatrix) -> float:
    return 1.0 - purity(rho_b)


def _max_sum_sq_expectations(ops: np.ndarray, restarts: int, seed, max_iter: int, tol: float) -> float:
    """
    max over states of ``sum_j Tr(B_j sigma)^2``.

    The objective is convex, so the maximum sits on a pure state. Each restart
    iterates ``sigma <- top eigenvector of sum_j Tr(B_j sigma) B_j``; all
    restarts run batched.
    """
    d = ops.shape[1]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((restarts, d)) + 1j * rng.standard_normal((restarts, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)

    def objective(vecs):
        e = np.einsum("ra,jab,rb->rj", vecs.conj(), ops, vecs).real
        return e, np.sum(e * e, axis=1)

    e, f = objective(v)
    converged = np.zeros(restarts, dtype=bool)
    for _ in range(max_iter):
        k = np.einsum("rj,jab->rab", e, ops)
        k = (k + k.conj().transpose(0, 2, 1)) / 2
        _, vecs = np.linalg.eigh(k)
        v = vecs[:, :, -1]
        e, f_new = objective(v)
        converged = np.abs(f_new - f) < tol
        f = f_new
        if converged.all():
            break
    if not converged.any():
        raise ConvergenceError("lambda_b maximizer did not converge", best=float(f.max()))
    return float(f.max())


def lambda_b_general(
    basis: ObservableBasis,
    rho_b,
    restarts: int = 32,
    seed=0,
    max_iter: int = 500,
    tol: float = 1e-12,
) -> float:
    """``max_sigma sum_j Tr(B_j sigma)^2 - sum_j Tr(B_j rho_b)^2``."""
    r = _rho(rho_b)
    if r.shape != (basis.dim, basis.dim):
        raise DimensionError("basis and state dimensions differ")
    best = _max_sum_sq_expectations(basis.operators, restarts, seed, max_iter, tol)
    means = np.einsum("jab,ba->j", basis.operators, r).real
    return best - float(np.sum(means**2))


def weighted_lhs(rho: DensityMatrix, basis_a: ObservableBasis, basis_b: ObservableBasis, g=None) -> float:
    """``sum_i |g_i c_ii|`` over paired observables."""
    if len(basis_a) != len(basis_b):
        raise DimensionError("weighted_lhs pairs observables and needs equal counts")
    g = np.ones(len(basis_a)) if g is None else np.asarray(g, dtype=float)
    if g.shape != (len(basis_a),):
        raise DimensionError(f"{g.size} weights for {len(basis_a)} observables")
    c = correlation_matrix(rho, basis_a, basis_b).entries
    return float(np.sum(np.abs(g * np.diag(c))))


def variance_bounds(
    rho: DensityMatrix,
    basis_a: ObservableBasis,
    basis_b: ObservableBasis,
    model: ErrorModel,
    g=None,
    seed=0,
) -> VarianceBounds:
    """
    Alice's weighted variance sum, Bob's general bound and its inflated version
    ``Lambda_b + 2 sum_i eta (1 + Tr(B_i rho_b))``.
    """
    rho_a = linalg.partial_trace(rho.matrix, rho.dims, [0])
    rho_b = linalg.partial_trace(rho.matrix, rho.dims, [1])
    la = lambda_a(basis_a, rho_a, g)
    lb = lambda_b_general(basis_b, rho_b, seed=seed)
    e = eta(model)
    means = np.einsum("jab,ba->j", basis_b.operators, rho_b).real
    return VarianceBounds(la, lb, lb + 2 * e * float(np.sum(1 + means)), e)


# --- bipartite gaps ---------------------------------------------------------


def _require_complete_loo(*bases: ObservableBasis):
    for b in bases:
        if not b.is_complete_loo:
            raise ContractError(f"basis {b.name!r} is not a complete LOO basis")


def bipartite_terms(
    rho: DensityMatrix,
    basis_a: ObservableBasis | None = None,
    basis_b: ObservableBasis | None = None,
    scenario: str = A_TO_B,
) -> GapTerms:
    """
    Terms of the LOO criterion ``||C||_Tr - d^2 sqrt(xi) <= sqrt((d_1 - Tr rho_a^2)(1 - Tr rho_b^2 + 4 d^2 eta))``
    with ``d`` Bob's local dimension.
    """
    da, db = rho.dims
    basis_a = loo_for(da) if basis_a is None else basis_a
    basis_b = loo_for(db) if basis_b is None else basis_b
    _require_complete_loo(basis_a, basis_b)
    lhs = correlation_matrix(rho, basis_a, basis_b).trace_norm()
    la = da - purity(rho.reduced([0]))
    lb = 1.0 - purity(rho.reduced([1]))
    return GapTerms(scenario, lhs, la, lb, float(db * db), float(4 * db * db), db)


def bipartite_gap_ideal(rho, basis_a=None, basis_b=None) -> GapReport:
    return bipartite_terms(rho, basis_a, basis_b).at(0.0)


def bipartite_gap_imprecise(rho, basis_a=None, basis_b=None, model: ErrorModel | float = 0.0) -> GapReport:
    return bipartite_terms(rho, basis_a, basis_b).at(model)


def proposition1_terms(
    rho: DensityMatrix,
    basis_a: ObservableBasis,
    basis_b: ObservableBasis,
    g=None,
    seed=0,
    scenario: str = A_TO_B,
) -> GapTerms:
    """
    Terms of the general imprecise criterion for paired observables:
    ``sum_i |c_ii| - sqrt(xi) sum_i ||A_i||_F <= sqrt(Lambda_a * Lambda_b~)``.
    """
    if len(basis_a) != len(basis_b):
        raise DimensionError("paired criterion needs equal observable counts")
    g = np.ones(len(basis_a)) if g is None else np.asarray(g, dtype=float)
    lhs = weighted_lhs(rho, basis_a, basis_b, g)
    # weights scale Alice's observables, so they scale her Frobenius norms too
    pen = float(np.sum(np.abs(g) * np.sqrt(np.einsum("iab,iab->i", basis_a.operators, basis_a.operators.conj()).real)))
    rho_a = linalg.partial_trace(rho.matrix, rho.dims, [0])
    rho_b = linalg.partial_trace(rho.matrix, rho.dims, [1])
    la = lambda_a(basis_a, rho_a, g)
    lb = lambda_b_general(basis_b, rho_b, seed=seed)
    means = np.einsum("jab,ba->j", basis_b.operators, rho_b).real
    infl = 2.0 * float(np.sum(1 + means))
    return GapTerms(scenario, lhs, la, lb, pen, infl, rho.dims[1])


def proposition1_check(rho, basis_a, basis_b, model: ErrorModel | float = 0.0, g=None, seed=0) -> GapReport:
    return proposition1_terms(rho, basis_a, basis_b, g, seed).at(model)


def swap_roles(rho: DensityMatrix) -> DensityMatrix:
    if len(rho.dims) != 2:
        raise DimensionError("swap_roles needs a bipartite state")
    return rho.permuted([1, 0])


# --- tripartite ------------------------------------------------------------


def _check_tripartite(rho: DensityMatrix) -> int:
    if len(rho.dims) != 3 or len(set(rho.dims)) != 1:
        raise DimensionError(f"expected three equal local dimensions, got {rho.dims}")
    return rho.dims[0]


def theta_tensor(rho: DensityMatrix) -> np.ndarray:
    """``Theta_ijk = Tr(rho sigma_i (x) sigma_j (x) sigma_k)`` with unnormalized Paulis."""
    if rho.dims != (2, 2, 2):
        raise DimensionError(f"theta_tensor needs three qubits, got dims {rho.dims}")
    from .observables import PAULI

    p = np.stack(PAULI)
    t = rho.matrix.reshape((2,) * 6)
    theta = np.einsum("iad,jbe,kcf,defabc->ijk", p, p, p, t, optimize=True)
    return theta.real


def m_prime_from_theta(theta_bca: np.ndarray) -> np.ndarray:
    """
    M' entries for qubits from the Pauli tensor of the permuted state rho_BCA.

    ``M'_qp = (Theta_{j k p} - Theta_{j k 0} Theta_{0 0 p}) / (2 sqrt 2)`` with
    ``j = q // 4``, ``k = q % 4``. The prefactor is the product of the LOO
    normalizations 1/2 (BC) and 1/sqrt(2) (A).
    """
    out = np.empty((16, 4))
    for q in range(16):
        j, k = divmod(q, 4)
        for p in range(4):
            out[q, p] = theta_bca[j, k, p] - theta_bca[j, k, 0] * theta_bca[0, 0, p]
    return out / (2 * np.sqrt(2))


def cyclic_permute(rho: DensityMatrix) -> DensityMatrix:
    """ABC -> BCA: the first party moves to the last slot."""
    if len(rho.dims) != 3:
        raise DimensionError("cyclic_permute needs a tripartite state")
    return rho.permuted([1, 2, 0])


def tripartite_bases(d: int) -> tuple[ObservableBasis, ObservableBasis]:
    single = loo_for(d) if d == 2 else gell_mann_loo(d)
    return single, product_loo(single, single)


def m_matrix(rho: DensityMatrix) -> CorrelationMatrix:
    d = _check_tripartite(rho)
    ga, gbc = tripartite_bases(d)
    return correlation_matrix(rho.regroup((d, d * d)), ga, gbc)


def m_prime_matrix(rho: DensityMatrix) -> CorrelationMatrix:
    d = _check_tripartite(rho)
    ga, gbc = tripartite_bases(d)
    return correlation_matrix(cyclic_permute(rho).regroup((d * d, d)), gbc, ga)


def tripartite_terms(rho: DensityMatrix, scenario: str) -> GapTerms:
    """
    A->BC:  ``||M||  - d^3 sqrt(xi)`` vs ``sqrt((d - Tr rho_A^2)(1 - Tr rho_BC^2 + 4 d^4 eta))``
    BC->A:  ``||M'|| - d^3 sqrt(xi)`` vs ``sqrt((d^2 - Tr rho_BC^2)(1 - Tr rho_A^2 + 4 d^2 eta))``
    """
    d = _check_tripartite(rho)
    pur_a = purity(rho.reduced([0]))
    pur_bc = purity(rho.reduced([1, 2]))
    if scenario == A_TO_BC:
        lhs = m_matrix(rho).trace_norm()
        return GapTerms(scenario, lhs, d - pur_a, 1.0 - pur_bc, float(d**3), float(4 * d**4), d)
    if scenario == BC_TO_A:
        lhs = m_prime_matrix(rho).trace_norm()
        return GapTerms(scenario, lhs, d * d - pur_bc, 1.0 - pur_a, float(d**3), float(4 * d**2), d)
    raise ValueError(f"not a tripartite scenario: {scenario!r}")


def tripartite_gap_A_to_BC(rho: DensityMatrix, model: ErrorModel | float = 0.0) -> GapReport:
    return tripartite_terms(rho, A_TO_BC).at(model)


def tripartite_gap_BC_to_A(rho: DensityMatrix, model: ErrorModel | float = 0.0) -> GapReport:
    return tripartite_terms(rho, BC_TO_A).at(model)


def scenario_terms(rho: DensityMatrix, scenario: str) -> GapTerms:
    """LOO-criterion terms for any of the four scenarios."""
    if scenario == A_TO_B:
        return bipartite_terms(rho, scenario=A_TO_B)
    if scenario == B_TO_A:
        return bipartite_terms(swap_roles(rho), scenario=B_TO_A)
    return tripartite_terms(rho, scenario)
