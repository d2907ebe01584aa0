"""Phase noise on the initial transport coherence.

The master equation is linear, so the ensemble-averaged state equals the
evolution of the phase-averaged initial state. Both that shortcut and an
explicit seeded Monte-Carlo ensemble are available; the closed-form shifts
of the unitary approximation sit alongside for comparison.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .dynamics import Trajectory, evolve_state, find_first_minimum, propagate
from .errors import ParameterError
from .liouvillians import Liouvillian, build_liouvillian, vec
from .model import (
    IDX_010,
    IDX_101,
    BathSpec,
    FridgeParams,
    effective_temperature,
    sigma_z_expectations,
    thermal_product_state,
    transport_populations,
)
from .protocols import initial_state

log = logging.getLogger(__name__)


class PhaseKind(str, enum.Enum):
    DELTA = "delta"
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"


class Scenario(str, enum.Enum):
    KNOWN = "known"  # extraction at the noisy ensemble's own minimum
    UNKNOWN = "unknown"  # extraction at the noiseless optimum


@dataclass(frozen=True)
class PhaseDistribution:
    kind: PhaseKind
    phi0: float = 0.0
    variance: float = 0.0
    width: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PhaseKind(self.kind))
        if self.variance < 0:
            raise ParameterError(f"variance must be non-negative, got {self.variance}")
        if not 0 <= self.width <= 2 * math.pi:
            raise ParameterError(
                f"uniform width must lie in [0, 2 pi], got {self.width}"
            )

    @classmethod
    def delta(cls, phi0: float = 0.0) -> PhaseDistribution:
        return cls(PhaseKind.DELTA, phi0=phi0)

    @classmethod
    def gaussian(cls, variance: float) -> PhaseDistribution:
        return cls(PhaseKind.GAUSSIAN, variance=variance)

    @classmethod
    def uniform(cls, width: float) -> PhaseDistribution:
        return cls(PhaseKind.UNIFORM, width=width)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind is PhaseKind.DELTA:
            return np.full(n, self.phi0)
        if self.kind is PhaseKind.GAUSSIAN:
            return rng.normal(0.0, math.sqrt(self.variance), n)
        return rng.uniform(-0.5 * self.width, 0.5 * self.width, n)

    def mean_phasor(self) -> complex:
        """Ensemble average of ``exp(i phi)``."""
        if self.kind is PhaseKind.DELTA:
            return complex(np.exp(1j * self.phi0))
        return complex(average_cos_phi(self))


def average_cos_phi(dist: PhaseDistribution) -> float:
    if dist.kind is PhaseKind.DELTA:
        return math.cos(dist.phi0)
    if dist.kind is PhaseKind.GAUSSIAN:
        return math.exp(-0.5 * dist.variance)
    half = 0.5 * dist.width
    return 1.0 if half == 0 else math.sin(half) / half


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so every ensemble is reproducible from its seed."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    mean_trajectory: Trajectory
    reference_trajectory: Trajectory
    t_opt: float
    t_opt_prime: float
    delta_sigma_z: float
    delta_T: float
    scenario: Scenario
    n_samples: int | None = None

    def summary(self) -> dict:
        return {
            "t_opt": self.t_opt,
            "t_opt_prime": self.t_opt_prime,
            "delta_t_opt": self.t_opt_prime - self.t_opt,
            "delta_sigma_z": self.delta_sigma_z,
            "delta_T": self.delta_T,
            "scenario": self.scenario.value,
            "n_samples": self.n_samples,
        }


def _monte_carlo_trajectory(
    liouv: Liouvillian, base: np.ndarray, r: float, phases: np.ndarray, grid: np.ndarray
) -> Trajectory:
    """Propagate every sample and average snapshot by snapshot in sample order."""
    d = liouv.dim
    n = phases.size
    cols = np.repeat(vec(base)[:, None], n, axis=1)
    c = 1j * r * np.exp(1j * phases)
    if d == 8:
        cols[IDX_101 + d * IDX_010] = c  # rho[101, 010] in column-stacked order
        cols[IDX_010 + d * IDX_101] = np.conj(c)
    else:
        raise ParameterError(
            "Monte-Carlo ensembles are implemented for the three-qubit models only"
        )
    steps = np.diff(grid)
    prop = sla.expm(liouv.matrix * steps[0])
    means = np.empty((grid.size, d * d), dtype=complex)
    means[0] = cols.sum(axis=1) / n
    for k in range(steps.size):
        if not math.isclose(steps[k], steps[0], rel_tol=1e-12):
            prop = sla.expm(liouv.matrix * steps[k])
        cols = prop @ cols
        means[k + 1] = cols.sum(axis=1) / n
    states = means.reshape(grid.size, d, d).transpose(0, 2, 1)
    states = 0.5 * (states + states.conj().transpose(0, 2, 1))
    return Trajectory(grid, states, liouv)


def _sz1_at(traj: Trajectory, t: float) -> float:
    k = int(np.searchsorted(traj.times, t, side="right")) - 1
    k = min(max(k, 0), len(traj) - 1)
    rho = evolve_state(traj.liouvillian, traj.states[k], t - traj.times[k])
    return float(sigma_z_expectations(rho)[0])


def ensemble_evolve(
    params: FridgeParams,
    bath: BathSpec,
    r: float,
    dist: PhaseDistribution,
    *,
    n_samples: int | None = None,
    seed: int | None = None,
    scenario: Scenario | str = Scenario.KNOWN,
    t_end: float | None = None,
    n_points: int = 801,
    liouvillian: Liouvillian | None = None,
) -> EnsembleResult:
    """Cold-qubit ensemble dynamics with a noisy coherence phase.

    Without ``n_samples`` the averaged initial state is propagated directly;
    with it, ``n_samples`` phases are drawn from a Philox generator seeded
    by ``seed`` (required) and propagated one by one.
    """
    scenario = Scenario(scenario)
    liouv = liouvillian or build_liouvillian(params, bath)
    if t_end is None:
        if params.g <= 0:
            raise ParameterError("t_end is required when g == 0")
        t_end = 2.0 * math.pi / params.g
    grid = np.linspace(0.0, t_end, n_points)

    reference = propagate(liouv, initial_state(params, bath, r, 0.0), times=grid)
    if n_samples is None:
        base = initial_state(params, bath)
        rho0 = base.copy()
        c = 1j * r * dist.mean_phasor()
        rho0[IDX_101, IDX_010] = c
        rho0[IDX_010, IDX_101] = np.conj(c)
        mean = propagate(liouv, rho0, times=grid)
    else:
        if seed is None:
            raise ParameterError("Monte-Carlo ensembles need an explicit seed")
        phases = dist.sample(make_rng(seed), n_samples)
        mean = _monte_carlo_trajectory(
            liouv, thermal_product_state(params), r, phases, grid
        )

    t_opt, _ = find_first_minimum(reference)
    t_opt_prime, _ = find_first_minimum(mean)
    t_eval = t_opt_prime if scenario is Scenario.KNOWN else t_opt
    sz_ref = _sz1_at(reference, t_opt)
    sz_noisy = _sz1_at(mean, t_eval)
    e1 = params.e1
    return EnsembleResult(
        mean_trajectory=mean,
        reference_trajectory=reference,
        t_opt=t_opt,
        t_opt_prime=t_opt_prime,
        delta_sigma_z=sz_noisy - sz_ref,
        delta_T=effective_temperature(sz_noisy, e1) - effective_temperature(sz_ref, e1),
        scenario=scenario,
        n_samples=n_samples,
    )


def unitary_populations(params: FridgeParams) -> tuple[float, float]:
    """``(S, D)`` of the thermal initial state: mean and half-difference of the transport populations."""
    a, b = transport_populations(thermal_product_state(params))
    return 0.5 * (a + b), 0.5 * (b - a)


def analytic_shift(
    params: FridgeParams,
    r: float,
    variance: float,
    scenario: Scenario | str = Scenario.KNOWN,
    bath: BathSpec | None = None,
) -> tuple[float, float, float]:
    """``(t_opt', delta <sigma^z_1>, delta T_1)`` for small Gaussian phase noise, neglecting dissipation."""
    scenario = Scenario(scenario)
    if params.g <= 0:
        raise ParameterError("the unitary analysis needs g > 0")
    _, d = unitary_populations(params)
    damp = math.exp(-0.5 * variance)
    t_opt_prime = (math.pi - math.atan(r * damp / d)) / (2 * params.g)
    amp = math.sqrt(d * d + r * r)
    if scenario is Scenario.KNOWN:
        dsz = r * r / amp * (1.0 - math.exp(-variance))
    else:
        dsz = 2.0 * r * r / amp * (1.0 - damp)

    sz0 = float(sigma_z_expectations(thermal_product_state(params))[0])
    sz_opt = sz0 - 2.0 * (d + amp)
    t_opt = effective_temperature(sz_opt, params.e1)
    d_temp = (
        2.0 * t_opt**2 / params.e1 * math.cosh(params.e1 / (2.0 * t_opt)) ** 2 * dsz
    )

    if bath is not None:
        max_rate = float(build_liouvillian(params, bath).rates.max())
        if max_rate > params.g / 10:
            log.warning(
                "unitary phase-noise formulas used with dissipation rate %.3g > g/10",
                max_rate,
            )
    return t_opt_prime, dsz, d_temp
