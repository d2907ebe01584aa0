"""Time evolution, steady states and trajectory features."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import (
    IntegrationError,
    NoMinimumError,
    ParameterError,
    PositivityError,
    SteadyStateError,
)
from .liouvillians import (
    TRANSPORT_LABEL,
    Liouvillian,
    commutator_super,
    dissipator_super,
    unvec,
    vec,
)
from .model import (
    DIM,
    IDX_010,
    IDX_101,
    SIGMA_Z,
    TOLERANCES,
    effective_temperature,
    embed,
)

log = logging.getLogger(__name__)

RTOL = 1e-8
ATOL = 1e-10
EXPM_MAX_DIM = 8
STEADY_RESIDUAL_TOL = 1e-10


def _physical_states(states: np.ndarray) -> np.ndarray:
    """Reduce ``(n, d, d)`` snapshots to the three refrigerator qubits."""
    d = states.shape[-1]
    if d == DIM:
        return states
    extra = d // DIM
    t = states.reshape(states.shape[0], DIM, extra, DIM, extra)
    return np.einsum("iajbj->iab", t)


def _sigma_z_table() -> np.ndarray:
    idx = np.arange(DIM)
    return np.array([np.where((idx >> (2 - q)) & 1, 1.0, -1.0) for q in range(3)])


def _h1_operator(dim: int, e1: float) -> np.ndarray:
    n = int(np.log2(dim))
    return 0.5 * e1 * embed(SIGMA_Z, 0, n)


def heat_super(liouv: Liouvillian) -> sp.csr_matrix:
    """Superoperator of the bath-induced part of the dynamics."""
    gen = sp.csr_matrix((liouv.dim**2, liouv.dim**2), dtype=complex)
    for j in liouv.jumps:
        if j.bath != TRANSPORT_LABEL and j.rate > 0:
            gen = gen + j.rate * dissipator_super(j.matrix)
    if liouv.coupling is not None:
        gen = gen + commutator_super(liouv.coupling)
    return sp.csr_matrix(gen)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots ``states[k]`` of the density matrix at ``times[k]``.

    Observables are derived lazily from the snapshots; ``heat_current`` needs
    the generator that produced the trajectory.
    """

    times: np.ndarray
    states: np.ndarray
    liouvillian: Liouvillian | None = None

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @cached_property
    def physical_states(self) -> np.ndarray:
        return _physical_states(self.states)

    @cached_property
    def sigma_z(self) -> np.ndarray:
        diag = np.real(np.diagonal(self.physical_states, axis1=1, axis2=2))
        return diag @ _sigma_z_table().T

    @property
    def energies(self) -> tuple[float, float, float]:
        if self.liouvillian is None:
            raise ParameterError(
                "temperatures need the trajectory's generator for the qubit energies"
            )
        return self.liouvillian.params.energies

    @cached_property
    def temperatures(self) -> np.ndarray:
        sz = np.clip(self.sigma_z, -1.0, 1.0)
        return np.column_stack(
            [effective_temperature(sz[:, i], e) for i, e in enumerate(self.energies)]
        )

    @cached_property
    def coherence(self) -> np.ndarray:
        return self.physical_states[:, IDX_101, IDX_010]

    @cached_property
    def h1(self) -> np.ndarray:
        return 0.5 * self.energies[0] * self.sigma_z[:, 0]

    @cached_property
    def heat_current(self) -> np.ndarray:
        if self.liouvillian is None:
            raise ParameterError("heat current needs the trajectory's generator")
        liouv = self.liouvillian
        h1 = _h1_operator(liouv.dim, liouv.params.e1)
        weights = heat_super(liouv).T @ vec(h1.T)
        # column-stacked rows
        flat = self.states.transpose(0, 2, 1).reshape(len(self), -1)
        return np.real(flat @ weights)

    def state_at(self, index: int) -> np.ndarray:
        return self.states[index]

    def table(self) -> dict[str, np.ndarray]:
        """Columns of the per-time observable table."""
        sz, temps, c = self.sigma_z, self.temperatures, self.coherence
        cols = {
            "time": self.times,
            "sz1": sz[:, 0],
            "sz2": sz[:, 1],
            "sz3": sz[:, 2],
            "T1": temps[:, 0],
            "T2": temps[:, 1],
            "T3": temps[:, 2],
            "Re_C": c.real,
            "Im_C": c.imag,
        }
        cols["Qdot1"] = (
            self.heat_current
            if self.liouvillian is not None
            else np.full(len(self), np.nan)
        )
        cols["h1"] = self.h1
        return cols


@dataclass(frozen=True)
class SteadyState:
    rho_inf: np.ndarray
    t_inf_temperature: float
    residual: float


def _time_grid(t_end: float, n_samples: int | None, times) -> np.ndarray:
    if times is not None:
        grid = np.asarray(times, dtype=float)
        if grid.ndim != 1 or len(grid) < 2:
            raise ParameterError("times must be a 1-D grid with at least two points")
        return grid
    if not t_end > 0:
        raise ParameterError(f"t_end must be positive, got {t_end}")
    return np.linspace(0.0, t_end, n_samples or 1001)


def _propagate_expm(liouv: Liouvillian, v0: np.ndarray, grid: np.ndarray) -> np.ndarray:
    gen = liouv.matrix
    steps = np.diff(grid)
    out = np.empty((len(grid), v0.size), dtype=complex)
    out[0] = v0
    uniform = np.allclose(steps, steps[0], rtol=1e-12, atol=0.0)
    prop = sla.expm(gen * steps[0]) if uniform else None
    for k, dt in enumerate(steps):
        p = prop if uniform else sla.expm(gen * dt)
        out[k + 1] = p @ out[k]
    return out


def _propagate_ode(
    liouv: Liouvillian, v0: np.ndarray, grid: np.ndarray, rtol: float, atol: float
) -> np.ndarray:
    gen = liouv.sparse

    def rhs(_t, y):
        return gen @ y

    sol = solve_ivp(
        rhs, (grid[0], grid[-1]), v0, method="DOP853", t_eval=grid, rtol=rtol, atol=atol
    )
    if sol.status != 0:
        raise IntegrationError(
            f"integration failed at t={sol.t[-1] if sol.t.size else grid[0]}: {sol.message}"
        )
    return sol.y.T


def propagate(
    liouv: Liouvillian,
    rho0: np.ndarray,
    t_end: float | None = None,
    n_samples: int | None = None,
    *,
    times=None,
    method: str = "auto",
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Trajectory:
    """Integrate ``d rho/dt = L rho`` and sample the solution.

    The grid is either ``n_samples`` equispaced points on ``[0, t_end]`` or an
    explicit increasing ``times`` array whose first entry is the time of
    ``rho0``. ``method`` is ``"expm"`` (exact propagator, dim <= 8),
    ``"ode"`` (adaptive Dormand-Prince 8(5,3)) or ``"auto"``.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (liouv.dim, liouv.dim):
        raise ParameterError(
            f"state of shape {rho0.shape} does not match generator dimension {liouv.dim}"
        )
    grid = _time_grid(t_end, n_samples, times)
    if method == "auto":
        method = "expm" if liouv.dim <= EXPM_MAX_DIM else "ode"
    if method == "expm":
        flat = _propagate_expm(liouv, vec(rho0), grid)
    elif method == "ode":
        flat = _propagate_ode(liouv, vec(rho0), grid, rtol, atol)
    else:
        raise ParameterError(f"unknown propagation method {method!r}")

    states = flat.reshape(len(grid), liouv.dim, liouv.dim).transpose(0, 2, 1)
    states = 0.5 * (states + states.conj().transpose(0, 2, 1))
    traces = np.real(np.trace(states, axis1=1, axis2=2))
    drift = np.abs(traces - 1.0)
    if np.any(drift > TOLERANCES.trace):
        log.warning("renormalising trace (max drift %.3e)", drift.max())
        states = states / traces[:, None, None]
    min_eigs = np.linalg.eigvalsh(states)[:, 0]
    bad = np.flatnonzero(min_eigs < -TOLERANCES.positivity)
    if bad.size:
        k = bad[0]
        raise PositivityError(
            f"state lost positivity at t={grid[k]:.6g} (min eigenvalue {min_eigs[k]:.3e})"
        )
    return Trajectory(grid, states, liouv)


def evolve_state(liouv: Liouvillian, rho: np.ndarray, dt: float) -> np.ndarray:
    """State after time ``dt``."""
    if dt == 0:
        return np.array(rho, dtype=complex)
    if liouv.dim <= EXPM_MAX_DIM:
        return unvec(sla.expm(liouv.matrix * dt) @ vec(rho), liouv.dim)
    traj = propagate(liouv, rho, times=[0.0, dt], method="ode")
    return traj.states[-1]


def steady_state(liouv: Liouvillian) -> SteadyState:
    """Unique unit-trace null vector of the generator."""
    d = liouv.dim
    trace_row = vec(np.eye(d)).astype(complex)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    if d <= EXPM_MAX_DIM:
        gen = liouv.matrix
        s = np.linalg.svd(gen, compute_uv=False)
        if s[-2] <= 1e-12 * s[0]:
            raise SteadyStateError(
                f"steady state is not unique (second-smallest singular value {s[-2]:.3e})"
            )
        a = gen.copy()
        a[0, :] = trace_row
        x = np.linalg.solve(a, rhs)
        gen_apply = gen
    else:
        a = liouv.sparse.tolil(copy=True)
        a[0, :] = trace_row
        try:
            lu = spla.splu(sp.csc_matrix(a))
        except RuntimeError as exc:
            raise SteadyStateError(f"steady state is not unique: {exc}") from exc
        x = lu.solve(rhs)
        gen_apply = liouv.sparse
    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = float(np.linalg.norm(gen_apply @ vec(rho)))
    if residual >= STEADY_RESIDUAL_TOL:
        raise SteadyStateError(
            f"steady-state residual {residual:.3e} exceeds {STEADY_RESIDUAL_TOL}"
        )
    if not np.all(np.isfinite(rho)):
        raise SteadyStateError("steady-state solve produced non-finite entries")
    sz1 = float(
        np.clip(Trajectory(np.array([0.0]), rho[None]).sigma_z[0, 0], -1.0, 1.0)
    )
    return SteadyState(rho, effective_temperature(sz1, liouv.params.e1), residual)


def _parabola_vertex(t: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    c2, c1, c0 = np.polyfit(t - t[1], y, 2)
    if c2 <= 0:
        return float(t[1]), float(y[1])
    dt = -c1 / (2 * c2)
    dt = float(np.clip(dt, t[0] - t[1], t[2] - t[1]))
    return float(t[1] + dt), float(c0 + c1 * dt + c2 * dt * dt)


def _bracket_first_minimum(values: np.ndarray, noise: float) -> int | None:
    """Index of the first local minimum, ignoring steps smaller than ``noise``."""
    d = np.diff(values)
    signs = np.where(np.abs(d) <= noise, 0, np.sign(d))
    last_down = None
    for k, s in enumerate(signs):
        if s < 0:
            last_down = k
        elif s > 0 and last_down is not None:
            seg = values[last_down + 1 : k + 1]
            return last_down + 1 + int(np.argmin(seg))
    return None


def find_first_minimum(
    traj: Trajectory, *, refine: bool = True, noise: float = 1e-12
) -> tuple[float, float]:
    """First local minimum ``(t_min, T_min)`` of the cold-qubit temperature.

    Temperatures are ranked by coldness, i.e. by ``<sigma^z_1>``: a
    population-inverted (negative-temperature) qubit is hotter than any
    positive temperature, so the search runs on ``<sigma^z_1>`` and converts
    at the end. Steps below ``noise`` are treated as flat. The sample minimum
    is refined by re-propagating the bracketing interval on a 21-point grid
    and fitting a parabola through the best three points. Raises
    :class:`NoMinimumError` for monotone traces.
    """
    sz = traj.sigma_z[:, 0]
    k = _bracket_first_minimum(sz, noise)
    if k is None or k == 0 or k == len(sz) - 1:
        raise NoMinimumError(
            "cold-qubit temperature has no finite-time minimum on this trajectory"
        )
    times = traj.times[k - 1 : k + 2]
    values = sz[k - 1 : k + 2]
    if refine and traj.liouvillian is not None:
        fine = propagate(
            traj.liouvillian,
            traj.states[k - 1],
            times=np.linspace(times[0], times[-1], 21),
        )
        fs = fine.sigma_z[:, 0]
        j = min(max(int(np.argmin(fs)), 1), len(fs) - 2)
        times, values = fine.times[j - 1 : j + 2], fs[j - 1 : j + 2]
    t_min, sz_min = _parabola_vertex(times, values)
    return t_min, float(
        effective_temperature(float(np.clip(sz_min, -1.0, 1.0)), traj.energies[0])
    )


def energy_balance_residual(traj: Trajectory) -> np.ndarray:
    """Per-time residual of ``dh1/dt = Qdot1 - 2 g E1 Im C``.

    ``dh1/dt`` is a second-order finite difference over the sampled times.
    """
    if traj.liouvillian is None:
        raise ParameterError("energy balance needs the trajectory's generator")
    params = traj.liouvillian.params
    dh1 = np.gradient(traj.h1, traj.times, edge_order=2)
    return dh1 - traj.heat_current + 2.0 * params.g * params.e1 * traj.coherence.imag
