"""Dense linear algebra for small multi-qubit operators.

Sites are labelled 1..N and site 1 is the leftmost (slowest varying)
tensor factor.  All entropies are in bits.
"""

from __future__ import annotations

import math
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputDomainError

HERMITIAN_TOL = 1e-9
EIG_CLAMP = 1e-8
ZERO_EIG = 1e-12
SUPPORT_EIG = 1e-12
SUPPORT_WEIGHT = 1e-10


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def n_sites_of(m: np.ndarray) -> int:
    dim = m.shape[0]
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 0 or 2**n != dim or m.shape != (dim, dim):
        raise InputDomainError(f"expected a square 2^N matrix, got shape {m.shape}")
    return n


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a`` as the leftmost factor."""
    return np.kron(a, b)


def tensor(*ops: np.ndarray) -> np.ndarray:
    return reduce(np.kron, ops)


def embed(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Place a single-site operator at ``site`` (1-based) in an N-site register."""
    if not 1 <= site <= n_sites:
        raise InputDomainError(f"site {site} outside 1..{n_sites}")
    eye = np.eye(2, dtype=complex)
    return tensor(*[op if k == site else eye for k in range(1, n_sites + 1)])


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduce ``rho`` onto the sites in ``keep``.

    Args:
        rho: operator on N qubits.
        keep: 1-based site labels to retain.  The output factors follow the
            order given here, so ``keep=(3, 1)`` puts site 3 leftmost.

    Returns:
        Operator of dimension ``2**len(keep)``.  An empty ``keep`` gives the
        1x1 matrix holding the trace.
    """
    n = n_sites_of(rho)
    keep = tuple(int(k) for k in keep)
    if len(set(keep)) != len(keep) or any(not 1 <= k <= n for k in keep):
        raise InputDomainError(f"invalid site set {keep} for {n} sites")
    traced = [k - 1 for k in range(1, n + 1) if k not in keep]
    t = rho.reshape((2,) * (2 * n))
    # trace out from the highest axis down so remaining indices stay valid
    for ax in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=ax, axis2=ax + cur)
    kept_sorted = sorted(k - 1 for k in keep)
    order = [kept_sorted.index(k - 1) for k in keep]
    m = len(keep)
    t = t.transpose(order + [m + o for o in order])
    return t.reshape(2**m, 2**m)


def hermitian_eig(m: np.ndarray) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputDomainError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise InputDomainError("matrix is not Hermitian within 1e-9")
    w, v = np.linalg.eigh(m)
    return Spectrum(w, v)


def _clamped_eigenvalues(rho: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh(rho)
    if w[0] < -EIG_CLAMP:
        raise InputDomainError(f"negative eigenvalue {w[0]:.3e} below clamp window")
    return np.clip(w, 0.0, None)


def shannon_entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > ZERO_EIG]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -Tr rho log2 rho, with 0 log 0 = 0."""
    return shannon_entropy(_clamped_eigenvalues(rho))


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """S(rho || sigma) in bits.

    Returns ``math.inf`` when rho carries weight outside the support of
    sigma; callers that cannot tolerate that check for it explicitly.
    """
    if rho.shape != sigma.shape:
        raise InputDomainError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    neg_s_rho = -von_neumann_entropy(rho)
    ws, vs = np.linalg.eigh(sigma)
    if ws[0] < -EIG_CLAMP:
        raise InputDomainError(f"negative eigenvalue {ws[0]:.3e} in sigma")
    weights = np.real(np.einsum("ij,ik,kj->j", vs.conj(), rho, vs))
    null = ws < SUPPORT_EIG
    if np.any(weights[null] >= SUPPORT_WEIGHT):
        return math.inf
    cross = float(np.sum(weights[~null] * np.log2(ws[~null])))
    return neg_s_rho - cross


def is_density_matrix(rho: np.ndarray, *, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8) -> bool:
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        return False
    if abs(np.trace(rho) - 1.0) > trace_tol:
        return False
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0] >= -eig_tol)


def ket(bits: str) -> np.ndarray:
    """Computational basis ket from a label such as ``"EGE"`` or ``"010"``.

    ``E`` and ``0`` map to index 0 on a site, ``G`` and ``1`` to index 1.
    """
    table = {"E": 0, "0": 0, "G": 1, "1": 1}
    idx = 0
    for ch in bits:
        idx = 2 * idx + table[ch]
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[idx] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())
