"""Dense matrix semantics for small walk operators and block encodings."""
from __future__ import annotations

import numpy as np

DEFAULT_QUBIT_CAP = 16


class DimensionError(ValueError):
    pass


def check_dimension(dims, cap_qubits: int = DEFAULT_QUBIT_CAP) -> int:
    total = 1
    for d in dims:
        total *= int(d)
    if total > 1 << cap_qubits:
        raise DimensionError(
            f"dense dimension {total} exceeds cap 2**{cap_qubits}"
        )
    return total


def unitarity_defect(op: np.ndarray) -> float:
    """max |W† W - I|; declared-unitary operators must keep this <= 1e-10."""
    n = op.shape[0]
    return float(np.max(np.abs(op.conj().T @ op - np.eye(n))))


def block_extract(op: np.ndarray, dims, keep) -> np.ndarray:
    """Project the non-kept tensor factors onto |0> on both sides.

    ``dims`` lists the tensor-factor dimensions of ``op`` (row-major order);
    ``keep`` is a boolean per factor.  Returns <0| op |0> on the discarded
    factors as a matrix over the kept factors.
    """
    dims = [int(d) for d in dims]
    keep = [bool(k) for k in keep]
    if len(dims) != len(keep):
        raise DimensionError("dims and keep must have equal length")
    n = len(dims)
    total = int(np.prod(dims))
    if op.shape != (total, total):
        raise DimensionError("operator shape inconsistent with dims")
    tensor = op.reshape(dims + dims)
    # Index ancilla (non-kept) axes with 0 on both bra and ket sides.
    idx: list = []
    for k in keep:
        idx.append(slice(None) if k else 0)
    for k in keep:
        idx.append(slice(None) if k else 0)
    sub = tensor[tuple(idx)]
    kept = int(np.prod([d for d, k in zip(dims, keep) if k]))
    return sub.reshape(kept, kept)


def householder_from_zero(target: np.ndarray) -> np.ndarray:
    """Real orthogonal completion of the isometry |0> -> target.

    Returns U with U e_0 = target; target must be a unit real vector.
    """
    v = np.asarray(target, dtype=float)
    n = v.shape[0]
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError("target state must be normalized")
    e0 = np.zeros(n)
    e0[0] = 1.0
    w = e0 - v
    nw = np.dot(w, w)
    if nw < 1e-28:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(w, w) / nw


def eigenphases(op: np.ndarray) -> np.ndarray:
    """Sorted arguments of the eigenvalues of a unitary."""
    return np.sort(np.angle(np.linalg.eigvals(op)))
