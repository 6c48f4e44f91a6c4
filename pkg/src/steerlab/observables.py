"""
Local orthonormal operator (LOO) bases and the measurement-imprecision model.

An observable deviates from its target by at most ``xi`` in squared Frobenius
norm. Two derived amplitudes enter the steering bounds:

* ``coeff_bound = d (xi/2 + sqrt(2 d xi))`` bounds how far a tomography
  coefficient can move,
* ``eta = d * coeff_bound`` is the amplitude used to inflate Bob's variance term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import ContractError, DimensionError, ParameterError
from .states import DensityMatrix

LOO_TOL = 1e-10

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class ObservableBasis:
    """Ordered Hermitian operators on one subsystem, stacked as ``(n, dim, dim)``."""

    operators: np.ndarray
    loo: bool = False
    name: str = ""

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise DimensionError(f"operators must have shape (n, d, d), got {ops.shape}")
        if np.max(np.abs(ops - ops.conj().transpose(0, 2, 1)), initial=0.0) > LOO_TOL:
            raise ContractError("basis operators must be Hermitian")
        if self.loo:
            gram = hs_gram(ops)
            if np.max(np.abs(gram - np.eye(len(ops)))) > LOO_TOL:
                raise ContractError("operators flagged as LOO are not Hilbert-Schmidt orthonormal")
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    @property
    def is_complete_loo(self) -> bool:
        return self.loo and len(self.operators) == self.dim**2

    def __len__(self) -> int:
        return len(self.operators)

    def __getitem__(self, i) -> np.ndarray:
        return self.operators[i]

    def conjugated(self, u: np.ndarray) -> "ObservableBasis":
        """Basis ``{u G u^dagger}``; stays LOO when ``u`` is unitary."""
        ops = np.einsum("ab,nbc,dc->nad", u, self.operators, u.conj())
        return ObservableBasis(ops, self.loo, self.name)


def hs_gram(ops) -> np.ndarray:
    """Hilbert-Schmidt Gram matrix ``Tr(G_i G_j^dagger)``."""
    ops = np.asarray(ops)
    return np.einsum("iab,jab->ij", ops, ops.conj())


def pauli_loo_qubit() -> ObservableBasis:
    """``(I, X, Y, Z) / sqrt(2)``."""
    return ObservableBasis(np.stack(PAULI) / np.sqrt(2), loo=True, name="pauli")


def gell_mann_loo(d: int) -> ObservableBasis:
    """
    Hermitian generalized Gell-Mann LOO basis on ``C^d``.

    Order: ``I/sqrt(d)``; symmetric ``(|j><k| + |k><j|)/sqrt(2)`` for ``j < k``;
    antisymmetric ``(-i|j><k| + i|k><j|)/sqrt(2)`` for ``j < k``; then the
    diagonal operators for ``l = 1..d-1``. At ``d = 2`` this is
    ``(I, X, Y, Z)/sqrt(2)`` in that order.
    """
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    ops = [np.eye(d, dtype=complex) / np.sqrt(d)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[j, k] = g[k, j] = 1 / np.sqrt(2)
        ops.append(g)
    for j, k in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[j, k] = -1j / np.sqrt(2)
        g[k, j] = 1j / np.sqrt(2)
        ops.append(g)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        ops.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return ObservableBasis(np.stack(ops), loo=True, name=f"gell-mann-{d}")


def product_loo(a: ObservableBasis, b: ObservableBasis) -> ObservableBasis:
    """Operators ``a_j (x) b_k`` indexed by ``q = j * len(b) + k``."""
    if not (a.loo and b.loo):
        raise ContractError("product_loo needs two LOO bases")
    ops = np.einsum("jab,kcd->jkacbd", a.operators, b.operators)
    n, da, db = len(a) * len(b), a.dim, b.dim
    ops = ops.reshape(n, da * db, da * db)
    return ObservableBasis(ops, loo=True, name=f"{a.name}x{b.name}")


def loo_for(d: int) -> ObservableBasis:
    return pauli_loo_qubit() if d == 2 else gell_mann_loo(d)


# --- imprecision model ------------------------------------------------------


@dataclass(frozen=True)
class ErrorModel:
    """Per-observable squared-Frobenius deviation budget ``xi`` on a ``dim``-level system."""

    xi: float
    dim: int = 2

    def __post_init__(self):
        if not np.isfinite(self.xi) or self.xi < 0:
            raise ParameterError(f"xi must be a finite number >= 0, got {self.xi}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise ParameterError(f"dim must be an integer >= 2, got {self.dim}")

    @classmethod
    def from_percent(cls, percent: float, dim: int = 2) -> "ErrorModel":
        """``"0.001%"`` means ``xi = 1e-5``."""
        return cls(percent / 100.0, dim)

    @property
    def eta(self) -> float:
        return eta(self)

    @property
    def coeff_bound(self) -> float:
        return coeff_bound(self)


def coeff_bound(model: ErrorModel) -> float:
    d, xi = model.dim, model.xi
    return d * (xi / 2 + np.sqrt(2 * d * xi))


def eta(model: ErrorModel) -> float:
    d, xi = model.dim, model.xi
    return d * d * (xi / 2 + np.sqrt(2 * d * xi))


@dataclass(frozen=True, eq=False)
class PerturbedBasis:
    targets: ObservableBasis
    implemented: np.ndarray
    deviations: np.ndarray = field(repr=False)


def perturb_basis(targets: ObservableBasis, model: ErrorModel, seed) -> PerturbedBasis:
    """
    Implemented observables ``tau_i = sigma_i + Delta_i`` with Hermitian
    ``Delta_i`` of squared Frobenius norm exactly ``xi``.

    ``seed`` is anything ``numpy.random.default_rng`` accepts.
    """
    rng = np.random.default_rng(seed)
    n, d = len(targets), targets.dim
    g = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    delta = (g + g.conj().transpose(0, 2, 1)) / 2
    if model.xi > 0:
        norms = np.einsum("nab,nab->n", delta, delta.conj()).real
        delta *= np.sqrt(model.xi / norms)[:, None, None]
    else:
        delta[:] = 0
    implemented = targets.operators + delta
    deviations = np.array([linalg.frobenius_sq(t - s) for t, s in zip(implemented, targets.operators)])
    return PerturbedBasis(targets, implemented, deviations)


def tomography_coeffs(rho_b: DensityMatrix, basis: Sequence[np.ndarray] | ObservableBasis) -> np.ndarray:
    """Coefficients ``(1/d) Tr(rho tau_i^dagger)`` (real part)."""
    ops = np.asarray(basis.operators if isinstance(basis, ObservableBasis) else basis, dtype=complex)
    d = rho_b.dim
    if ops.ndim != 3 or ops.shape[1:] != (d, d):
        raise DimensionError(f"operators of shape {ops.shape[1:]} do not act on a {d}-level state")
    return np.einsum("ab,nab->n", rho_b.matrix, ops.conj()).real / d
