"""
Dense complex matrix kernel.

Matrices are plain ``numpy`` arrays. Subsystem structure is carried by a
separate tuple of local dimensions (the "dims"), e.g. ``(2, 2, 2)`` for three
qubits or ``(2, 4)`` for the same space cut as A|BC.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionError

HERMITIAN_TOL = 1e-10
SINGULAR_CUTOFF = 1e-13


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError("matrix has non-finite entries")
    return arr


def check_dims(dims: Sequence[int], size: int | None = None) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 2 for d in dims):
        raise DimensionError(f"subsystem dimensions must all be >= 2, got {dims}")
    if size is not None and int(np.prod(dims)) != size:
        raise DimensionError(f"dims {dims} do not factor a dimension of {size}")
    return dims


def tensor_product(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not mats:
        raise ValueError("tensor_product needs at least one matrix")
    return reduce(np.kron, (as_matrix(m) for m in mats))


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """
    Trace out every subsystem not listed in ``keep``.

    The kept subsystems stay in their original order.

    >>> rho = tensor_product(np.diag([1, 0]), np.eye(2) / 2)
    >>> partial_trace(rho, [2, 2], keep=[1]).real
    array([[0.5, 0. ],
           [0. , 0.5]])
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError("partial_trace needs a square matrix")
    dims = check_dims(dims, m.shape[0])
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep={keep} references a subsystem outside 0..{n - 1}")

    t = m.reshape(dims + dims)
    # trace from the highest index down so earlier axis positions stay valid
    current = n
    for sub in reversed(range(n)):
        if sub in keep:
            continue
        t = np.trace(t, axis1=sub, axis2=sub + current)
        current -= 1
    kept = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(kept, kept)


def permute_subsystems(m, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor ``i`` is old factor ``order[i]``."""
    m = as_matrix(m)
    dims = check_dims(dims, m.shape[0])
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise DimensionError(f"{order} is not a permutation of {n} subsystems")
    t = m.reshape(dims + dims)
    t = t.transpose(list(order) + [n + k for k in order])
    size = m.shape[0]
    return t.reshape(size, size)


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def hermitize(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Check Hermiticity to ``tol`` and return the symmetrized matrix."""
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise ContractError("matrix is not Hermitian within tolerance")
    return (m + m.conj().T) / 2


def hermitian_eigen(m) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a Hermitian matrix.

    Returns eigenvalues in descending order and the matching eigenvectors as
    the columns of the second array.
    """
    h = hermitize(m)
    vals, vecs = np.linalg.eigh(h)
    return vals[::-1], vecs[:, ::-1]


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def trace_norm(m) -> float:
    """Sum of singular values, with relative noise below 1e-13 dropped."""
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    return float(np.sum(s[s >= SINGULAR_CUTOFF * s[0]]))


def frobenius_sq(m) -> float:
    """``Tr(m m^dagger)``, i.e. the squared Frobenius norm."""
    m = as_matrix(m)
    return float(np.sum(m.real**2 + m.imag**2))


def expectation(op, rho) -> float:
    """Real part of ``Tr(op rho)``."""
    return float(np.real(np.einsum("ij,ji->", as_matrix(op), as_matrix(rho))))
