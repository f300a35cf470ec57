"""Fixed-step integration of the Davies master equation.

The integrator works in dimensionless time ``tau = gamma_scale * t``.
:func:`dimensionless_generator` converts physical-unit inputs and moves to a
frame rotating at the mean polariton frequency, which removes the GHz-scale
phase without changing any quantity that is invariant under local unitaries
(populations, entropies, discords).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import GuardViolation, InputDomainError
from .model import DaviesChannel, excitation_number
from .qmat import n_sites_of

log = logging.getLogger(__name__)

RENORMALIZE_TOL = 1e-12


def liouvillian_rhs(rho: np.ndarray, H: np.ndarray, channels: Sequence[DaviesChannel]) -> np.ndarray:
    """-i[H, rho] + sum_k rate_k (A rho A^+ - {A^+ A, rho}/2)."""
    if rho.shape != H.shape:
        raise InputDomainError(f"state {rho.shape} and Hamiltonian {H.shape} disagree")
    out = -1j * (H @ rho - rho @ H)
    for ch in channels:
        A = ch.jump_operator
        if A.shape != rho.shape:
            raise InputDomainError(f"jump operator {A.shape} and state {rho.shape} disagree")
        Ad = A.conj().T
        AdA = Ad @ A
        out += ch.rate * (A @ rho @ Ad - 0.5 * (AdA @ rho + rho @ AdA))
    return out


def liouvillian_matrix(H: np.ndarray, channels: Sequence[DaviesChannel]) -> np.ndarray:
    """Superoperator acting on row-major ``rho.ravel()``."""
    dim = H.shape[0]
    cols = []
    for k in range(dim * dim):
        e = np.zeros(dim * dim, dtype=complex)
        e[k] = 1.0
        cols.append(liouvillian_rhs(e.reshape(dim, dim), H, channels).ravel())
    return np.array(cols).T


def dimensionless_generator(
    H: np.ndarray,
    channels: Sequence[DaviesChannel],
    gamma_scale: float,
    *,
    rotating: bool = True,
) -> tuple[np.ndarray, list[DaviesChannel]]:
    """Rescale to tau units and optionally strip the mean polariton energy.

    Every Davies operator lowers the excitation number by exactly one, so
    the dissipator is unchanged by the frame rotation.
    """
    n = n_sites_of(H)
    Hs = np.array(H, dtype=complex)
    if rotating:
        N = excitation_number(n)
        diag = np.real(np.diag(H))
        n_diag = np.real(np.diag(N))
        eps = float(np.mean(diag[n_diag == 1]) - diag[n_diag == 0][0])
        Hs = Hs - eps * N
    Hs /= gamma_scale
    scaled = [replace(ch, bohr_frequency=ch.bohr_frequency / gamma_scale, rate=ch.rate / gamma_scale)
              for ch in channels]
    return Hs, scaled


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float | None = None
    t_max: float = 10.0
    sample_stride: int = 1
    dt_factor: float = 0.01
    trace_tol: float = 1e-8
    eig_tol: float = 1e-6

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise InputDomainError("dt must be positive")
        if self.sample_stride < 1:
            raise InputDomainError("sample_stride must be >= 1")
        if not 0 < self.dt_factor <= 0.05:
            raise InputDomainError("dt_factor must lie in (0, 0.05]")

    def resolve_dt(self, H: np.ndarray, channels: Sequence[DaviesChannel]) -> float:
        if self.dt is not None:
            dt = self.dt
        else:
            w = np.linalg.eigvalsh(H)
            fastest = max(float(w[-1] - w[0]), max((ch.rate for ch in channels), default=0.0))
            dt = self.dt_factor / fastest if fastest > 0 else self.t_max / 100
        if self.t_max < dt:
            raise InputDomainError(f"t_max={self.t_max} shorter than dt={dt}")
        return dt


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    probabilities: np.ndarray
    dt: float
    max_trace_drift: float = 0.0
    max_hermiticity_drift: float = 0.0
    min_eigenvalue: float = 0.0

    def __len__(self):
        return len(self.times)


def excitation_probabilities(rho: np.ndarray) -> np.ndarray:
    """Per-site probability of finding the polariton excited."""
    n = n_sites_of(rho)
    diag = np.real(np.diag(rho)).reshape((2,) * n)
    axes = tuple(range(n))
    return np.array([diag.sum(axis=axes[:i] + axes[i + 1:])[0] for i in range(n)])


def _rk4_propagator(L: np.ndarray, dt: float) -> np.ndarray:
    # one classical RK4 step of a linear autonomous system, written out
    hL = dt * L
    eye = np.eye(L.shape[0], dtype=complex)
    hL2 = hL @ hL
    return eye + hL + hL2 / 2 + hL2 @ hL / 6 + hL2 @ hL2 / 24


def evolve(
    rho0: np.ndarray,
    H: np.ndarray,
    channels: Sequence[DaviesChannel],
    cfg: EvolutionConfig = EvolutionConfig(),
) -> Trajectory:
    """Integrate the master equation with fixed-step RK4.

    ``H`` and the channel rates are taken to be in the same units as the
    time axis (see :func:`dimensionless_generator`).  Every step is
    re-Hermitised; the trace is renormalised if it drifts by more than 1e-12.

    Raises:
        GuardViolation: trace drift above ``cfg.trace_tol`` or an eigenvalue
            of a sampled state below ``-cfg.eig_tol``.
    """
    n_sites_of(rho0)
    dim = rho0.shape[0]
    dt = cfg.resolve_dt(H, channels)
    n_steps = int(np.floor(cfg.t_max / dt + 1e-9))
    P = _rk4_propagator(liouvillian_matrix(H, channels), dt)

    rho = np.array(rho0, dtype=complex)
    times, states = [0.0], [rho.copy()]
    max_trace = max_herm = 0.0
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    for step in range(1, n_steps + 1):
        rho = (P @ rho.ravel()).reshape(dim, dim)
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        max_herm = max(max_herm, herm)
        rho = (rho + rho.conj().T) / 2
        drift = abs(float(np.real(np.trace(rho))) - 1.0)
        max_trace = max(max_trace, drift)
        tau = step * dt
        if drift > cfg.trace_tol:
            raise GuardViolation(
                f"trace drift {drift:.3e} at tau={tau:.6g}; reduce dt (currently {dt:.3e})", tau)
        if drift > RENORMALIZE_TOL:
            rho /= np.real(np.trace(rho))
        if step % cfg.sample_stride == 0:
            w0 = float(np.linalg.eigvalsh(rho)[0])
            min_eig = min(min_eig, w0)
            if w0 < -cfg.eig_tol:
                raise GuardViolation(
                    f"eigenvalue {w0:.3e} at tau={tau:.6g}; reduce dt (currently {dt:.3e})", tau)
            times.append(tau)
            states.append(rho.copy())
    states = np.array(states)
    probs = np.array([excitation_probabilities(s) for s in states])
    log.debug("evolved %d steps of dt=%.4g, kept %d samples", n_steps, dt, len(times))
    return Trajectory(np.array(times), states, probs, dt, max_trace, max_herm, min_eig)


def find_probability_crossings(traj: Trajectory, tol: float = 0.01) -> list[float]:
    """Times where all site probabilities agree to within ``tol``.

    Each contiguous run of qualifying samples contributes the midpoint of
    its first and last time.
    """
    p = np.asarray(traj.probabilities)
    if p.size == 0:
        return []
    close = (p.max(axis=1) - p.min(axis=1)) < tol
    out, start = [], None
    for i, flag in enumerate(close):
        if flag and start is None:
            start = i
        if not flag and start is not None:
            out.append(0.5 * (traj.times[start] + traj.times[i - 1]))
            start = None
    if start is not None:
        out.append(0.5 * (traj.times[start] + traj.times[-1]))
    return [float(t) for t in out]
