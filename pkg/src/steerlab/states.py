"""
Density matrices and the state families used by the steering criteria.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import ContractError, ParameterError

STATE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian, positive semidefinite, unit-trace matrix with subsystem dims."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix)
        dims = linalg.check_dims(self.dims, m.shape[0])
        if m.shape[0] != m.shape[1]:
            raise ContractError("density matrix must be square")
        if not linalg.is_hermitian(m, STATE_TOL):
            raise ContractError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > STATE_TOL:
            raise ContractError(f"density matrix has trace {np.trace(m).real!r}, expected 1")
        if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -STATE_TOL:
            raise ContractError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def reduced(self, keep: Iterable[int]) -> "DensityMatrix":
        keep = sorted(set(keep))
        sub = linalg.partial_trace(self.matrix, self.dims, keep)
        return DensityMatrix(sub, tuple(self.dims[k] for k in keep))

    def regroup(self, dims: Sequence[int]) -> "DensityMatrix":
        """Relabel the factorization, e.g. (2, 2, 2) -> (2, 4). Shares the array."""
        return DensityMatrix(self.matrix, tuple(dims))

    def permuted(self, order: Sequence[int]) -> "DensityMatrix":
        m = linalg.permute_subsystems(self.matrix, self.dims, order)
        return DensityMatrix(m, tuple(self.dims[k] for k in order))

    def to_json(self) -> str:
        return json.dumps(
            {
                "dims": list(self.dims),
                "re": self.matrix.real.tolist(),
                "im": self.matrix.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, data: dict) -> "DensityMatrix":
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        return cls(re + 1j * im, tuple(data["dims"]))


def pure_state(vec, dims: Sequence[int]) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), tuple(dims))


def product_state(*rhos: DensityMatrix) -> DensityMatrix:
    dims: tuple[int, ...] = ()
    for r in rhos:
        dims += r.dims
    return DensityMatrix(linalg.tensor_product(*(r.matrix for r in rhos)), dims)


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(np.eye(d) / d, (d,))


def random_density_matrix(dims: Sequence[int], rng: np.random.Generator) -> DensityMatrix:
    """Full-rank state ``G G^dagger / Tr(G G^dagger)`` from a complex Ginibre draw."""
    n = int(np.prod(dims))
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityMatrix((m + m.conj().T) / 2, tuple(dims))


def purity(rho: DensityMatrix) -> float:
    """``Tr(rho^2)``, computed as the sum of squared moduli of the entries."""
    return linalg.frobenius_sq(rho.matrix)


# --- state families ---------------------------------------------------------


def make_singlet() -> DensityMatrix:
    return pure_state([0, 1, -1, 0], (2, 2))


def make_asymmetric(p: float) -> DensityMatrix:
    """Singlet mixed with the asymmetric noise ``(2|0><0| x I/2 + I/2 x |1><1|) / 3``."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    half = np.eye(2) / 2
    noise = 2 * np.kron(np.diag([1.0, 0.0]), half) + np.kron(half, np.diag([0.0, 1.0]))
    m = p * make_singlet().matrix + (1 - p) / 3 * noise
    return DensityMatrix(m, (2, 2))


def make_ghz(theta: float) -> DensityMatrix:
    """``sin(theta)|000> + cos(theta)|111>`` on three qubits."""
    if not 0.0 <= theta <= np.pi / 2 + 1e-15:
        raise ParameterError(f"theta must lie in [0, pi/2], got {theta}")
    v = np.zeros(8)
    v[0] = np.sin(theta)
    v[7] = np.cos(theta)
    return DensityMatrix(np.outer(v, v), (2, 2, 2))


def make_ghz_d(d: int) -> DensityMatrix:
    """Balanced ``sum_i |iii> / sqrt(d)`` on three qudits."""
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    v = np.zeros(d**3)
    v[[i * (d * d + d + 1) for i in range(d)]] = 1 / np.sqrt(d)
    return DensityMatrix(np.outer(v, v), (d, d, d))


def make_max_entangled(d: int) -> DensityMatrix:
    """``sum_i |ii> / sqrt(d)``."""
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    v = np.zeros(d * d)
    v[[i * (d + 1) for i in range(d)]] = 1 / np.sqrt(d)
    return DensityMatrix(np.outer(v, v), (d, d))


FAMILIES = ("singlet", "asymmetric_p", "ghz_theta", "ghz_d", "max_entangled_d")
_ALIASES = {
    "asymmetric": "asymmetric_p",
    "ghz": "ghz_theta",
    "max_entangled": "max_entangled_d",
    "bell_d": "max_entangled_d",
}


@dataclass(frozen=True)
class StateFamilySpec:
    """A named state family plus its parameter values."""

    family: str
    p: float | None = None
    theta: float | None = None
    d: int | None = None

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise ParameterError(f"unknown state family {self.family!r}")
        object.__setattr__(self, "family", family)
        needed = {"asymmetric_p": "p", "ghz_theta": "theta", "ghz_d": "d", "max_entangled_d": "d"}
        name = needed.get(family)
        if name is not None and getattr(self, name) is None:
            raise ParameterError(f"family {family!r} requires parameter {name!r}")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {self.p}")
        if self.theta is not None and not 0.0 <= self.theta <= np.pi / 2 + 1e-15:
            raise ParameterError(f"theta must lie in [0, pi/2], got {self.theta}")
        if self.d is not None:
            if int(self.d) != self.d or self.d < 2:
                raise ParameterError(f"d must be an integer >= 2, got {self.d}")
            object.__setattr__(self, "d", int(self.d))

    @property
    def parameter(self) -> str | None:
        """Name of the scalar parameter this family is swept over, if any."""
        return {"asymmetric_p": "p", "ghz_theta": "theta", "ghz_d": "d", "max_entangled_d": "d"}.get(
            self.family
        )

    @property
    def parties(self) -> int:
        return 3 if self.family in ("ghz_theta", "ghz_d") else 2

    def with_params(self, **params) -> "StateFamilySpec":
        values = {"p": self.p, "theta": self.theta, "d": self.d}
        values.update(params)
        return StateFamilySpec(self.family, **values)

    def build(self) -> DensityMatrix:
        if self.family == "singlet":
            return make_singlet()
        if self.family == "asymmetric_p":
            return make_asymmetric(self.p)
        if self.family == "ghz_theta":
            return make_ghz(self.theta)
        if self.family == "ghz_d":
            return make_ghz_d(self.d)
        return make_max_entangled(self.d)
