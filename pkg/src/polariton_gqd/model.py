"""Polariton chain Hamiltonian and its Davies (eigenoperator) dissipators.

Each site is a two-level polariton with excited level ``E`` (basis index 0)
and ground level ``G`` (basis index 1).  Neighbouring sites exchange
excitations with strength ``J/2``; every cavity leaks photons into its own
zero-temperature reservoir.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DaviesGroupingError, InputDomainError
from .qmat import embed

DEFAULT_G = math.pi * 1e6
DEFAULT_TRANSITION = 2 * math.pi * 51.1e9
DEFAULT_T_CAV = 1e-3
DEFAULT_GAMMA_SCALE = 1e5
DEFAULT_J_OVER_G = 1e-2

GROUPING_REL_TOL = 1e-9
ZERO_JUMP = 1e-12

RateFn = Callable[[float], float]


def _per_site(value, n: int, name: str) -> tuple[float, ...]:
    if np.ndim(value) == 0:
        return (float(value),) * n
    out = tuple(float(v) for v in value)
    if len(out) != n:
        raise InputDomainError(f"{name} needs {n} entries, got {len(out)}")
    return out


@dataclass(frozen=True)
class NetworkParams:
    """Physical parameters of an open polariton chain.

    Frequencies and couplings are angular (rad/s).  ``omega``, ``g`` and
    ``J`` accept a scalar (broadcast) or one value per site / link.  ``J``
    defaults to ``j_over_g * g`` and ``omega`` to the value that puts the
    polariton transition ``omega - g`` at 51.1 GHz.

    ``rate_multiplier`` scales the cavity decay rate ``1/t_cav`` into the
    polariton decay rate; the dressed excited state carries half a photon,
    hence the default of one half.
    """

    n_sites: int = 3
    omega: float | Sequence[float] | None = None
    g: float | Sequence[float] = DEFAULT_G
    J: float | Sequence[float] | None = None
    j_over_g: float = DEFAULT_J_OVER_G
    t_cav: float = DEFAULT_T_CAV
    gamma_scale: float = DEFAULT_GAMMA_SCALE
    rate_multiplier: float = 0.5

    def __post_init__(self):
        n = self.n_sites
        if n < 1:
            raise InputDomainError("n_sites must be positive")
        g = _per_site(self.g, n, "g")
        omega = self.omega
        if omega is None:
            omega = tuple(DEFAULT_TRANSITION + gi for gi in g)
        omega = _per_site(omega, n, "omega")
        J = self.J
        if J is None:
            J = tuple(self.j_over_g * g[i] for i in range(n - 1))
        J = _per_site(J, n - 1, "J") if n > 1 else ()
        if any(j < 0 for j in J):
            raise InputDomainError("hopping strengths must be non-negative")
        if self.t_cav <= 0 or self.gamma_scale <= 0:
            raise InputDomainError("t_cav and gamma_scale must be positive")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "J", J)

    @property
    def gamma_cav(self) -> float:
        return 1.0 / self.t_cav

    @property
    def decay_rate(self) -> float:
        """Polariton decay rate (1/s) used by the flat spectral density."""
        return self.rate_multiplier * self.gamma_cav

    @property
    def site_energies(self) -> tuple[float, ...]:
        return tuple(w - g for w, g in zip(self.omega, self.g))


def polariton_ops(site: int, n_sites: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(L_dag, L, |E><E|)`` for ``site`` embedded in ``n_sites``."""
    raise_1 = np.array([[0, 1], [0, 0]], dtype=complex)  # |E><G|
    lower_1 = raise_1.T.copy()  # |G><E|
    proj_1 = np.array([[1, 0], [0, 0]], dtype=complex)
    return (
        embed(raise_1, site, n_sites),
        embed(lower_1, site, n_sites),
        embed(proj_1, site, n_sites),
    )


def excitation_number(n_sites: int) -> np.ndarray:
    return sum(polariton_ops(i, n_sites)[2] for i in range(1, n_sites + 1))


def build_hamiltonian(p: NetworkParams) -> np.ndarray:
    n = p.n_sites
    dim = 2**n
    H = np.zeros((dim, dim), dtype=complex)
    ops = [polariton_ops(i, n) for i in range(1, n + 1)]
    for eps, (_, _, proj) in zip(p.site_energies, ops):
        H += eps * proj
    for i, J in enumerate(p.J):
        up_i, lo_i, _ = ops[i]
        up_j, lo_j, _ = ops[i + 1]
        H += 0.5 * J * (up_i @ lo_j + lo_i @ up_j)
    return H


@dataclass(frozen=True)
class DaviesChannel:
    site: int
    bohr_frequency: float
    rate: float
    jump_operator: np.ndarray = field(repr=False)


def excitation_eigenbasis(H: np.ndarray, n_sites: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenpairs of an excitation-conserving ``H``, one sector at a time.

    Diagonalising each fixed-excitation block about its own mean keeps the
    small hopping splittings accurate next to the large polariton energy.

    Returns:
        energies, eigenvectors (columns), excitation count of each column.
    """
    N = np.real(np.diag(excitation_number(n_sites))).round().astype(int)
    dim = H.shape[0]
    off_sector = N[:, None] != N[None, :]
    if np.max(np.abs(H[off_sector]), initial=0.0) > 0:
        raise InputDomainError("Hamiltonian does not conserve excitation number")
    energies = np.empty(dim)
    vecs = np.zeros((dim, dim), dtype=complex)
    counts = np.empty(dim, dtype=int)
    col = 0
    for k in sorted(set(N.tolist())):
        idx = np.flatnonzero(N == k)
        block = H[np.ix_(idx, idx)]
        shift = float(np.mean(np.real(np.diag(block))))
        w, v = np.linalg.eigh(block - shift * np.eye(len(idx)))
        sl = slice(col, col + len(idx))
        energies[sl] = shift + w
        vecs[idx, sl] = v
        counts[sl] = k
        col += len(idx)
    return energies, vecs, counts


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(values)
    groups, current = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if values[b] - values[a] <= tol:
            current.append(b)
        else:
            groups.append(np.array(current))
            current = [b]
    groups.append(np.array(current))
    return groups


def flat_rate(rate: float) -> RateFn:
    return lambda omega: rate


def davies_channels(
    H: np.ndarray,
    p: NetworkParams,
    rate_fn: RateFn | None = None,
) -> list[DaviesChannel]:
    """Decompose each site's lowering operator into eigenoperators of ``H``.

    Every (site, positive Bohr frequency) pair with a non-vanishing jump
    operator becomes one channel.  Bohr frequencies closer than
    ``1e-9 * max|E|`` are merged.

    Raises:
        DaviesGroupingError: if merging at ten times that tolerance would
            produce a different set of channels.
    """
    if rate_fn is None:
        rate_fn = flat_rate(p.decay_rate)
    n = p.n_sites
    energies, vecs, _ = excitation_eigenbasis(H, n)
    tol = GROUPING_REL_TOL * float(np.max(np.abs(energies)))
    gaps = energies[None, :] - energies[:, None]  # gaps[a, b] = E_b - E_a
    channels = []
    for site in range(1, n + 1):
        _, lower, _ = polariton_ops(site, n)
        elems = vecs.conj().T @ lower @ vecs
        alpha, beta = np.nonzero((np.abs(elems) > ZERO_JUMP) & (gaps > 0))
        if alpha.size == 0:
            continue
        freqs = gaps[alpha, beta]
        groups = _cluster(freqs, tol)
        if len(_cluster(freqs, 10 * tol)) != len(groups):
            raise DaviesGroupingError(
                f"site {site}: Bohr-frequency grouping is ambiguous at tolerance {tol:.3e}"
            )
        for grp in groups:
            mask = np.zeros_like(elems)
            mask[alpha[grp], beta[grp]] = elems[alpha[grp], beta[grp]]
            A = vecs @ mask @ vecs.conj().T
            if np.max(np.abs(A)) <= ZERO_JUMP:
                continue
            omega = float(np.mean(freqs[grp]))
            rate = float(rate_fn(omega))
            if rate < 0:
                raise InputDomainError(f"negative rate {rate} at omega={omega}")
            channels.append(DaviesChannel(site, omega, rate, A))
    return channels


def eigenoperator_residual(H: np.ndarray, ch: DaviesChannel, scale: float = 1.0) -> float:
    """max |[H, A] + omega A| with H and omega divided by ``scale``."""
    A = ch.jump_operator
    Hs = H / scale
    return float(np.max(np.abs(Hs @ A - A @ Hs + (ch.bohr_frequency / scale) * A)))
