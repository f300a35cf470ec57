"""Initial states and end-to-end runs for the three-cavity network."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields
from typing import IO, Iterable, Iterator

import numpy as np

from .dynamics import (
    EvolutionConfig,
    Trajectory,
    dimensionless_generator,
    evolve,
    excitation_probabilities,
    find_probability_crossings,
)
from .errors import InputDomainError
from .measures import GQDProfile, OptimizationConfig, bell_diagonal_state, bipartite_gqd, minimize_gqd
from .model import DEFAULT_G, DEFAULT_J_OVER_G, NetworkParams, build_hamiltonian, davies_channels
from .qmat import ket, projector

KINDS = ("alpha_sweep", "mgqd_trajectory", "single_excitation", "sudden_transition")


def ghz_state(n_sites: int = 3) -> np.ndarray:
    return projector((ket("E" * n_sites) + ket("G" * n_sites)) / math.sqrt(2))


def state_mixture_alpha(alpha: float) -> np.ndarray:
    """alpha |GHZ><GHZ| + (1 - alpha) |Psi><Psi|, Psi a Bell pair on sites 1, 3.

    The first term is the coherent GHZ projector and |Psi> is normalised;
    with site 2 left in |G>.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InputDomainError(f"alpha={alpha} outside [0, 1]")
    bell = projector((ket("EGG") + ket("GGE")) / math.sqrt(2))
    return alpha * ghz_state(3) + (1 - alpha) * bell


def state_single_excitation(site: int, n_sites: int = 3) -> np.ndarray:
    if not 1 <= site <= n_sites:
        raise InputDomainError(f"site {site} outside 1..{n_sites}")
    label = "".join("E" if k == site else "G" for k in range(1, n_sites + 1))
    return projector(ket(label))


def state_sudden_transition(c1: float, c2: float, c3: float, middle: str = "G") -> np.ndarray:
    """Bell-diagonal pair on sites (1, 3) with site 2 in ``|middle>``."""
    if middle not in ("E", "G"):
        raise InputDomainError(f"middle must be 'E' or 'G', got {middle!r}")
    pair = bell_diagonal_state(c1, c2, c3)
    rho = np.kron(pair, projector(ket(middle)))  # site order (1, 3, 2)
    return rho.reshape((2,) * 6).transpose(0, 2, 1, 3, 5, 4).reshape(8, 8)


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to reproduce one run.

    ``t_cav_us``, ``t_max`` and ``stride`` default per scenario kind when
    left as ``None``.
    """

    kind: str
    alpha: float = 0.0
    n_alpha: int = 11
    bell_diag: tuple[float, float, float] = (1.0, -0.8, 0.8)
    middle: str = "G"
    site: int = 2
    t_cav_us: float | None = None
    j_over_g: float = DEFAULT_J_OVER_G
    g: float = DEFAULT_G
    dt: float | None = None
    t_max: float | None = None
    stride: int | None = None
    n_starts: int = 24
    grid: int = 8
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputDomainError(f"unknown scenario {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InputDomainError(f"alpha={self.alpha} outside [0, 1]")
        if self.n_alpha < 2:
            raise InputDomainError("n_alpha must be at least 2")
        if self.middle not in ("E", "G"):
            raise InputDomainError(f"middle must be 'E' or 'G', got {self.middle!r}")
        if len(self.bell_diag) != 3:
            raise InputDomainError("bell_diag needs three correlation coefficients")
        object.__setattr__(self, "bell_diag", tuple(float(c) for c in self.bell_diag))

    @property
    def resolved_t_cav_us(self) -> float:
        if self.t_cav_us is not None:
            return self.t_cav_us
        return 10.0 if self.kind in ("mgqd_trajectory", "sudden_transition") else 1000.0

    def network_params(self) -> NetworkParams:
        return NetworkParams(g=self.g, j_over_g=self.j_over_g, t_cav=self.resolved_t_cav_us * 1e-6)

    def evolution_config(self) -> EvolutionConfig:
        t_max = self.t_max if self.t_max is not None else 10.0
        stride = self.stride if self.stride is not None else (2 if self.kind == "single_excitation" else 5)
        return EvolutionConfig(dt=self.dt, t_max=t_max, sample_stride=stride)

    def optimization_config(self) -> OptimizationConfig:
        return OptimizationConfig(n_starts=self.n_starts, grid_resolution=self.grid, seed=self.seed)

    def initial_state(self, alpha: float | None = None) -> np.ndarray:
        if self.kind in ("alpha_sweep", "mgqd_trajectory"):
            return state_mixture_alpha(self.alpha if alpha is None else alpha)
        if self.kind == "single_excitation":
            return state_single_excitation(self.site)
        return state_sudden_transition(*self.bell_diag, middle=self.middle)


@dataclass
class OutputRecord:
    tau: float
    gqd_123: float | None = None
    gqd_12: float | None = None
    gqd_13: float | None = None
    gqd_23: float | None = None
    mgqd: float | None = None
    d_r1: float | None = None
    d_r2: float | None = None
    d_r3: float | None = None
    p_e1: float | None = None
    p_e2: float | None = None
    p_e3: float | None = None
    alpha: float | None = None


COLUMNS = tuple(f.name for f in fields(OutputRecord))


def _profile_record(tau: float, rho: np.ndarray, opt: OptimizationConfig, alpha: float | None) -> OutputRecord:
    prof = GQDProfile.of(rho, opt)
    d1, d2, d3 = prof.residuals
    p = excitation_probabilities(rho)
    return OutputRecord(tau, prof.gqd_123.value, prof.gqd_12.value, prof.gqd_13.value,
                        prof.gqd_23.value, prof.mgqd, d1, d2, d3, *map(float, p), alpha=alpha)


def simulate(spec: ScenarioSpec) -> Trajectory:
    """Evolve the scenario's initial state under the Davies master equation."""
    params = spec.network_params()
    H = build_hamiltonian(params)
    channels = davies_channels(H, params)
    Hd, chd = dimensionless_generator(H, channels, params.gamma_scale)
    return evolve(spec.initial_state(), Hd, chd, spec.evolution_config())


def run_scenario(spec: ScenarioSpec) -> Iterator[OutputRecord]:
    """Yield one record per alpha grid point or per sampled time."""
    opt = spec.optimization_config()
    if spec.kind == "alpha_sweep":
        for a in np.linspace(0.0, 1.0, spec.n_alpha):
            yield _profile_record(0.0, state_mixture_alpha(float(a)), opt, float(a))
        return
    traj = simulate(spec)
    for tau, rho, p in zip(traj.times, traj.states, traj.probabilities):
        tau = float(tau)
        if spec.kind == "mgqd_trajectory":
            yield _profile_record(tau, rho, opt, spec.alpha)
        elif spec.kind == "single_excitation":
            yield OutputRecord(tau, gqd_123=minimize_gqd(rho, opt).value, p_e1=float(p[0]),
                               p_e2=float(p[1]), p_e3=float(p[2]))
        else:
            yield OutputRecord(tau, gqd_13=bipartite_gqd(rho, (1, 3), opt).value, p_e1=float(p[0]),
                               p_e2=float(p[1]), p_e3=float(p[2]))


def _cell(v: float | None) -> str:
    return "" if v is None else format(float(v), ".17g")


def write_csv(records: Iterable[OutputRecord], out: IO[str]) -> int:
    """Write records with a header row; returns the number of records."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COLUMNS)
    n = 0
    for r in records:
        w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
        n += 1
    return n


def read_csv(src: IO[str]) -> list[OutputRecord]:
    rows = list(csv.reader(src))
    header, body = rows[0], rows[1:]
    if tuple(header) != COLUMNS:
        raise InputDomainError(f"unexpected header {header}")
    return [OutputRecord(**{c: (float(v) if v != "" else None) for c, v in zip(header, row)})
            for row in body]


def records_to_csv(records: Iterable[OutputRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def first_local_max(values: np.ndarray) -> int | None:
    """Index of the first interior sample that is >= its left neighbour
    and > its right neighbour."""
    v = np.asarray(values, dtype=float)
    for k in range(1, len(v) - 1):
        if v[k] >= v[k - 1] and v[k] > v[k + 1]:
            return k
    return None


def summarize(records: list[OutputRecord], tol: float = 0.01) -> dict[str, float | None]:
    """Crossing and maximum times used to compare excitation and discord."""
    taus = np.array([r.tau for r in records])
    out: dict[str, float | None] = {}
    probs = [(r.p_e1, r.p_e2, r.p_e3) for r in records]
    if all(None not in p for p in probs) and probs:
        traj = Trajectory(taus, np.empty((len(taus), 0)), np.array(probs, dtype=float), dt=math.nan)
        crossings = find_probability_crossings(traj, tol)
        out["first_crossing_tau"] = crossings[0] if crossings else None
    for col in ("gqd_123", "gqd_13"):
        vals = [getattr(r, col) for r in records]
        if vals and None not in vals and len(records) > 1:
            out[f"argmax_{col}_tau"] = float(taus[int(np.argmax(vals))])
            k = first_local_max(np.array(vals))
            out[f"first_max_{col}_tau"] = None if k is None else float(taus[k])
    return out

