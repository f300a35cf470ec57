"""Discord-type correlation measures over local projective measurements.

Local measurements on a two-level site are parameterised by Bloch angles
``(theta, phi)``; the measured basis is ``|v+> = (cos theta/2,
e^{i phi} sin theta/2)`` and its orthogonal complement.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InputDomainError
from .simplex import nelder_mead_batch
from .qmat import (
    n_sites_of,
    partial_trace,
    relative_entropy,
    shannon_entropy,
    tensor,
    von_neumann_entropy,
)

AGREE_TOL = 1e-5
POOL_MAX = 4096


def local_projectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    v = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
    plus = np.outer(v, v.conj())
    return plus, np.eye(2) - plus


def _site_unitaries(angles: np.ndarray) -> np.ndarray:
    """Columns ``(v+, v-)`` for angles of shape (..., 2) -> (..., 2, 2)."""
    th, ph = angles[..., 0] / 2, angles[..., 1]
    c, s, e = np.cos(th), np.sin(th), np.exp(1j * ph)
    U = np.empty(angles.shape[:-1] + (2, 2), dtype=complex)
    U[..., 0, 0] = c
    U[..., 1, 0] = e * s
    U[..., 0, 1] = -np.conj(e) * s
    U[..., 1, 1] = c
    return U


def _product_unitaries(site_u: np.ndarray) -> np.ndarray:
    """Batched Kronecker product over the site axis: (B, N, 2, 2) -> (B, 2^N, 2^N)."""
    out = site_u[:, 0]
    for k in range(1, site_u.shape[1]):
        u = site_u[:, k]
        b, d = out.shape[0], out.shape[1]
        out = (out[:, :, None, :, None] * u[:, None, :, None, :]).reshape(b, 2 * d, 2 * d)
    return out


def _normalize_angles(theta: float, phi: float) -> tuple[float, float]:
    theta = theta % (2 * math.pi)
    if theta > math.pi:
        theta, phi = 2 * math.pi - theta, phi + math.pi
    return theta, phi % (2 * math.pi)


@dataclass(frozen=True)
class MeasurementBasis:
    """One ``(theta, phi)`` pair per site, stored normalised to
    ``theta in [0, pi]``, ``phi in [0, 2 pi)``."""

    angles: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "angles", tuple(_normalize_angles(float(t), float(p)) for t, p in self.angles))

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "MeasurementBasis":
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        return cls(tuple((t, p) for t, p in x))

    @classmethod
    def computational(cls, n_sites: int) -> "MeasurementBasis":
        return cls(((0.0, 0.0),) * n_sites)

    @property
    def n_sites(self) -> int:
        return len(self.angles)

    def site(self, k: int) -> "MeasurementBasis":
        """Sub-basis for 1-based site ``k``."""
        return MeasurementBasis((self.angles[k - 1],))

    def unitary(self) -> np.ndarray:
        return tensor(*[_site_unitaries(np.array(a)) for a in self.angles])

    def projectors(self) -> list[np.ndarray]:
        """All product projectors ``Pi_k``, outcome strings in binary order."""
        local = [local_projectors(*a) for a in self.angles]
        return [tensor(*[local[s][k] for s, k in enumerate(ks)])
                for ks in itertools.product((0, 1), repeat=self.n_sites)]


def dephase(rho: np.ndarray, basis: MeasurementBasis) -> np.ndarray:
    """sum_k Pi_k rho Pi_k for the product projectors of ``basis``."""
    if n_sites_of(rho) != basis.n_sites:
        raise InputDomainError(
            f"basis covers {basis.n_sites} sites, state has {n_sites_of(rho)}")
    U = basis.unitary()
    p = np.real(np.einsum("ki,kl,li->i", U.conj(), rho, U))
    return (U * p) @ U.conj().T


def mutual_information(rho: np.ndarray, cut: tuple[Sequence[int], Sequence[int]] | None = None) -> float:
    """I(A:B) = S(A) + S(B) - S(AB) for the bipartition ``cut`` (1-based sites)."""
    n = n_sites_of(rho)
    if cut is None:
        if n != 2:
            raise InputDomainError("a cut is required for states with more than two sites")
        cut = ((1,), (2,))
    a, b = tuple(cut[0]), tuple(cut[1])
    if not a or not b or set(a) & set(b):
        raise InputDomainError(f"invalid bipartition {cut}")
    s_ab = von_neumann_entropy(partial_trace(rho, a + b))
    return von_neumann_entropy(partial_trace(rho, a)) + von_neumann_entropy(partial_trace(rho, b)) - s_ab


@dataclass(frozen=True)
class OptimizationConfig:
    n_starts: int = 24
    grid_resolution: int = 8
    max_iterations: int | None = None
    f_tol: float = 1e-7
    x_tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1:
            raise InputDomainError("n_starts must be >= 1")
        if self.grid_resolution < 1:
            raise InputDomainError("grid_resolution must be >= 1")


@dataclass(frozen=True)
class CorrelationReport:
    value: float
    optimal_basis: MeasurementBasis
    starts_agreeing: int
    n_starts: int
    n_failed: int = 0
    raw_value: float = 0.0


def _xlog2x(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p * np.log2(np.where(p > 0, p, 1.0))


def _bloch_axes(x: np.ndarray) -> np.ndarray:
    """(M, 2n) angle vectors -> (M, n, 3) Bloch axes of the '+' outcome."""
    th, ph = x[:, 0::2], x[:, 1::2]
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def _seed_points(n_angle_sites: int, opt: OptimizationConfig, rng: np.random.Generator,
                 batch_fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Starting angle vectors: distinct low-scoring grid bases plus random ones.

    Grid points are ranked by objective and taken greedily, skipping any
    whose measured axes all lie within half a grid step of an accepted
    seed (axes are compared up to sign, since +/- outcomes may swap).
    About a third of the starts are uniform random bases.
    """
    R = opt.grid_resolution
    dim = 2 * n_angle_sites
    n_random = opt.n_starts // 3
    n_grid = opt.n_starts - n_random
    theta_axis = np.arange(R) * math.pi / R
    phi_axis = np.arange(R) * 2 * math.pi / R
    if R**dim <= POOL_MAX:
        idx = np.array(list(itertools.product(range(R), repeat=dim)), dtype=int).reshape(-1, dim)
    else:
        idx = rng.integers(0, R, size=(POOL_MAX, dim))
        idx[0] = 0
    pool = np.where(np.arange(dim) % 2 == 0, theta_axis[idx], phi_axis[idx])
    scores = batch_fn(pool.reshape(len(pool), n_angle_sites, 2))
    order = np.argsort(scores, kind="stable")
    axes = _bloch_axes(pool)
    min_sep = 0.5 * (1 - math.cos(math.pi / R))
    chosen: list[int] = []
    for i in order:
        if len(chosen) == n_grid:
            break
        if chosen:
            overlap = np.abs(np.einsum("snk,nk->sn", axes[chosen], axes[i]))
            if np.any(np.all(1 - overlap < min_sep, axis=1)):
                continue
        chosen.append(int(i))
    spacing = np.where(np.arange(dim) % 2 == 0, math.pi / R, 2 * math.pi / R)
    seeds = pool[chosen] + rng.normal(scale=0.1, size=(len(chosen), dim)) * spacing
    n_fill = opt.n_starts - len(seeds)
    u = rng.uniform(size=(n_fill, dim))
    extra = np.where(np.arange(dim) % 2 == 0, np.arccos(1 - 2 * u), 2 * math.pi * u)
    return np.vstack([seeds, extra])


def _multistart(batch_fn: Callable[[np.ndarray], np.ndarray], n_angle_sites: int,
                opt: OptimizationConfig) -> tuple[np.ndarray, float, int, int]:
    """Best of ``opt.n_starts`` Nelder-Mead descents over the angle vector.

    Returns the best angle vector, its objective, the number of starts
    within ``AGREE_TOL`` of it, and the number of starts that did not
    converge.  Non-converged starts are only used if none converged.
    """
    rng = np.random.default_rng(opt.seed)
    dim = 2 * n_angle_sites
    seeds = _seed_points(n_angle_sites, opt, rng, batch_fn)
    step = 0.5 * np.where(np.arange(dim) % 2 == 0, math.pi, 2 * math.pi) / opt.grid_resolution

    def flat(x):
        return batch_fn(x.reshape(len(x), n_angle_sites, 2))

    res = nelder_mead_batch(flat, seeds, step, xatol=opt.x_tol, fatol=opt.f_tol,
                            maxiter=opt.max_iterations or 400 * dim)
    usable = res.converged if res.converged.any() else np.ones_like(res.converged)
    f = np.where(usable, res.fun, np.inf)
    best = int(np.argmin(f))  # first index among ties
    agreeing = int(np.sum(f - f[best] <= AGREE_TOL))
    return res.x[best], float(f[best]), agreeing, int(np.sum(~res.converged))


class _GQDObjective:
    """Vectorised GQD objective: H(p) - S(rho) - sum_j [H(p_j) - S(rho_j)].

    Because the dephased state is diagonal in the measured product basis,
    S(rho || Phi(rho)) reduces to the Shannon entropy of the outcome
    distribution minus S(rho); the same holds for every single site.
    """

    def __init__(self, rho: np.ndarray):
        self.n = n_sites_of(rho)
        self.rho = rho
        self.locals = [partial_trace(rho, (k,)) for k in range(1, self.n + 1)]
        self.offset = von_neumann_entropy(rho) - sum(von_neumann_entropy(r) for r in self.locals)

    def __call__(self, angles: np.ndarray) -> np.ndarray:
        site_u = _site_unitaries(angles)
        U = _product_unitaries(site_u)
        p = np.real(np.einsum("bki,kl,bli->bi", U.conj(), self.rho, U))
        f = -_xlog2x(p).sum(axis=1)
        for k, r in enumerate(self.locals):
            u = site_u[:, k]
            pk = np.real(np.einsum("bki,kl,bli->bi", u.conj(), r, u))
            f += _xlog2x(pk).sum(axis=1)
        return f - self.offset


def gqd_objective(rho: np.ndarray, basis: MeasurementBasis) -> float:
    """S(rho || Phi(rho)) - sum_j S(rho_j || Phi_j(rho_j)) for one basis."""
    n = n_sites_of(rho)
    if basis.n_sites != n:
        raise InputDomainError(f"basis covers {basis.n_sites} sites, state has {n}")
    total = relative_entropy(rho, dephase(rho, basis))
    for k in range(1, n + 1):
        r = partial_trace(rho, (k,))
        total -= relative_entropy(r, dephase(r, basis.site(k)))
    if not math.isfinite(total):
        raise RuntimeError("dephased state lost support of rho; this indicates a bug")
    return total


def minimize_gqd(rho: np.ndarray, opt: OptimizationConfig | None = None) -> CorrelationReport:
    """Global quantum discord: the objective minimised over local bases."""
    opt = opt or OptimizationConfig()
    fobj = _GQDObjective(rho)
    x, _, agreeing, failed = _multistart(fobj, fobj.n, opt)
    basis = MeasurementBasis.from_vector(x)
    raw = gqd_objective(rho, basis)
    return CorrelationReport(max(raw, 0.0), basis, agreeing, opt.n_starts, failed, raw)


def bipartite_gqd(rho: np.ndarray, sites: tuple[int, int], opt: OptimizationConfig | None = None) -> CorrelationReport:
    if len(sites) != 2 or sites[0] == sites[1]:
        raise InputDomainError(f"need two distinct sites, got {sites}")
    return minimize_gqd(partial_trace(rho, tuple(sites)), opt)


def _conditional_entropy_fn(rho_ab: np.ndarray, measured_side: int) -> Callable[[np.ndarray], np.ndarray]:
    """Batched sum_k p_k S(rho_A^k) for a measurement on one side of two qubits."""
    t = rho_ab.reshape(2, 2, 2, 2)
    if measured_side == 1:
        t = t.transpose(1, 0, 3, 2)
    # t[a, b, a', b'] with b the measured qubit

    def fn(angles: np.ndarray) -> np.ndarray:
        u = _site_unitaries(angles[:, 0])  # (B, 2, 2), column k is outcome k
        # unnormalised conditional states: sum_{b,b'} conj(u[b,k]) t[a,b,a',b'] u[b',k]
        cond = np.einsum("xck,xbk,acdb->xkad", u.conj(), u, t)
        w = np.linalg.eigvalsh(cond)  # (B, 2, 2) eigenvalues per outcome
        p = w.sum(axis=2)
        # sum_k p_k S(w/p_k) = H(p) - H(all eigenvalues)
        return -_xlog2x(w).sum(axis=(1, 2)) + _xlog2x(p).sum(axis=1)

    return fn


def qd_asymmetric(rho_ab: np.ndarray, measured_side: int = 2,
                  opt: OptimizationConfig | None = None) -> CorrelationReport:
    """Quantum discord I(A:B) - J(A|B) with projective measurements on one side.

    ``measured_side`` is the 1-based site that is measured.  The report's
    basis covers only the measured site.
    """
    if n_sites_of(rho_ab) != 2:
        raise InputDomainError("quantum discord needs a two-site state")
    if measured_side not in (1, 2):
        raise InputDomainError(f"measured_side must be 1 or 2, got {measured_side}")
    opt = opt or OptimizationConfig()
    unmeasured = 3 - measured_side
    fn = _conditional_entropy_fn(rho_ab, measured_side)
    x, cond, agreeing, failed = _multistart(fn, 1, opt)
    s_a = von_neumann_entropy(partial_trace(rho_ab, (unmeasured,)))
    classical = s_a - cond
    raw = mutual_information(rho_ab) - classical
    return CorrelationReport(max(raw, 0.0), MeasurementBasis.from_vector(x), agreeing,
                             opt.n_starts, failed, raw)


@dataclass(frozen=True)
class GQDProfile:
    """Tripartite GQD together with the three pairwise values."""

    gqd_123: CorrelationReport
    gqd_12: CorrelationReport
    gqd_13: CorrelationReport
    gqd_23: CorrelationReport

    @classmethod
    def of(cls, rho: np.ndarray, opt: OptimizationConfig | None = None) -> "GQDProfile":
        if n_sites_of(rho) != 3:
            raise InputDomainError("the tripartite profile needs a three-site state")
        return cls(minimize_gqd(rho, opt), bipartite_gqd(rho, (1, 2), opt),
                   bipartite_gqd(rho, (1, 3), opt), bipartite_gqd(rho, (2, 3), opt))

    @property
    def mgqd(self) -> float:
        return self.gqd_123.value - self.gqd_12.value - self.gqd_13.value - self.gqd_23.value

    @property
    def residuals(self) -> tuple[float, float, float]:
        total, ab, ac, bc = (self.gqd_123.value, self.gqd_12.value,
                             self.gqd_13.value, self.gqd_23.value)
        return (total - ab - ac, total - ab - bc, total - 2.0 / 3.0 * (ab + bc + ac))


def mgqd(rho: np.ndarray, opt: OptimizationConfig | None = None) -> float:
    """GQD_123 - GQD_12 - GQD_13 - GQD_23.  Not clamped; it can go negative."""
    return GQDProfile.of(rho, opt).mgqd


def residual_discords(rho: np.ndarray, opt: OptimizationConfig | None = None) -> tuple[float, float, float]:
    """Residual GQD above the (1,2)+(1,3), (1,2)+(2,3) and symmetric 2/3 bounds."""
    return GQDProfile.of(rho, opt).residuals


def bell_weights(c1: float, c2: float, c3: float) -> np.ndarray:
    """Bell-basis weights of (I + c1 XX + c2 YY + c3 ZZ)/4."""
    return np.array([1 - c1 - c2 - c3, 1 - c1 + c2 + c3,
                     1 + c1 - c2 + c3, 1 + c1 + c2 - c3]) / 4


def bell_diagonal_state(c1: float, c2: float, c3: float) -> np.ndarray:
    if np.any(bell_weights(c1, c2, c3) < -1e-12):
        raise InputDomainError(f"({c1}, {c2}, {c3}) is not a valid Bell-diagonal triple")
    rho = np.diag([1 + c3, 1 - c3, 1 - c3, 1 + c3]).astype(complex)
    rho[0, 3] = rho[3, 0] = c1 - c2
    rho[1, 2] = rho[2, 1] = c1 + c2
    return rho / 4


def bell_diagonal_qd_oracle(c1: float, c2: float, c3: float) -> float:
    """Closed-form discord of a Bell-diagonal two-qubit state (bits)."""
    lam = bell_weights(c1, c2, c3)
    if np.any(lam < -1e-12):
        raise InputDomainError(f"({c1}, {c2}, {c3}) is not a valid Bell-diagonal triple")
    mutual = 2.0 - shannon_entropy(lam)
    c = max(abs(c1), abs(c2), abs(c3))
    classical = 1.0 - shannon_entropy(np.array([(1 - c) / 2, (1 + c) / 2]))
    return mutual - classical
