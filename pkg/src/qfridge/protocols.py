"""Single-shot cooling protocol, quantum-advantage metrics and trade-off sweeps."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dynamics import (
    Trajectory,
    evolve_state,
    find_first_minimum,
    propagate,
    steady_state,
)
from .errors import FridgeError, NoMinimumError, ParameterError
from .liouvillians import (
    Liouvillian,
    build_liouvillian,
    decoupled_generator,
    model_ii_spectral_density,
    ohmic_rate,
)
from .model import (
    BathModel,
    BathSpec,
    FridgeParams,
    coherence_bound,
    inject_coherence,
    thermal_product_state,
)

log = logging.getLogger(__name__)

T0_POLICIES = ("auto", "fixed", "pi-over-2g")
TIME_CAP_FACTOR = 20.0
THREADS_ENV = "QFRIDGE_THREADS"


def worker_count() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        return max(1, int(value))
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    t0: float
    T_min: float
    T_inf: float
    delta_T: float
    t1: float
    t_Q: float
    gamma_r: float
    capped: bool
    pre_trajectory: Trajectory
    post_trajectory: Trajectory

    def summary(self) -> dict[str, float | bool]:
        return {
            "t0": self.t0,
            "T_min": self.T_min,
            "T_inf": self.T_inf,
            "delta_T": self.delta_T,
            "t1": self.t1,
            "t_Q": self.t_Q,
            "gamma_r": self.gamma_r,
            "t_Q_scaled": self.t_Q * self.gamma_r,
            "capped": self.capped,
        }


@dataclass(frozen=True)
class SweepPoint:
    t_hot: float
    t_room: float
    fractional_advantage: float
    t_q_scaled: float
    delta_T: float = math.nan
    T_inf: float = math.nan
    t_Q: float = math.nan
    gamma_r: float = math.nan
    error: str | None = None


def relaxation_rate_gamma_r(params: FridgeParams, bath: BathSpec) -> float:
    """Mean of the gain and decay rates of the isolated cold qubit.

    For Model II the resonant value of the effective Lorentzian spectral
    density plays this role.
    """
    if bath.model is BathModel.MODEL_II:
        return model_ii_spectral_density(params, bath, 1, params.e1)
    beta = params.betas[0]
    down = ohmic_rate(params.e1, beta, bath.alpha, bath.omega_cutoff)
    up = ohmic_rate(-params.e1, beta, bath.alpha, bath.omega_cutoff)
    return 0.5 * (down + up)


def initial_state(
    params: FridgeParams, bath: BathSpec, r: float = 0.0, phi: float = 0.0
) -> np.ndarray:
    """Thermal product state, optionally with transport coherence ``i r e^{i phi}``.

    In Model II the fictitious qubits start in their own thermal states.
    """
    rho = thermal_product_state(params)
    if r:
        rho = inject_coherence(rho, r, phi)
    if bath.model is BathModel.MODEL_II:
        rho = np.kron(rho, thermal_product_state(params))
    return rho


def _cold_temperature(liouv: Liouvillian, rho: np.ndarray) -> float:
    traj = Trajectory(np.array([0.0]), rho[None], liouv)
    return float(traj.temperatures[0, 0])


def _locate_t0(liouv, rho0, params, policy, t0, n_samples) -> float:
    if policy == "fixed":
        if t0 is None or not t0 > 0:
            raise ParameterError("fixed t0 policy needs a positive t0")
        return float(t0)
    if params.g <= 0:
        raise ParameterError(f"t0 policy {policy!r} needs g > 0")
    estimate = math.pi / (2 * params.g)
    if policy == "pi-over-2g":
        return estimate
    if policy == "auto":
        search = propagate(liouv, rho0, 3.0 * estimate, n_samples)
        try:
            t_min, _ = find_first_minimum(search)
        except NoMinimumError as exc:
            raise NoMinimumError(f"auto t0 policy: {exc}") from exc
        return t_min
    raise ParameterError(f"unknown t0 policy {policy!r}; expected one of {T0_POLICIES}")


def run_single_shot(
    params: FridgeParams,
    bath: BathSpec,
    t0_policy: str = "pi-over-2g",
    *,
    t0: float | None = None,
    r: float = 0.0,
    phi: float = 0.0,
    time_cap: float | None = None,
    n_pre: int = 401,
    n_post: int = 2001,
) -> ProtocolResult:
    """Cool for a time ``t0``, switch the interaction off, and time the advantage.

    After the switch-off every qubit relaxes with its own bath; ``t1`` is
    the first time the cold qubit warms back to the steady-state temperature
    of the running machine. ``t1`` is infinite (and ``capped`` set) when
    that does not happen within ``time_cap`` (default ``20 / gamma_r``).
    """
    liouv = build_liouvillian(params, bath)
    t_inf = steady_state(liouv).t_inf_temperature
    gamma_r = relaxation_rate_gamma_r(params, bath)
    rho0 = initial_state(params, bath, r, phi)

    t0 = _locate_t0(liouv, rho0, params, t0_policy, t0, n_pre)
    pre = propagate(liouv, rho0, t0, n_pre)
    t_min = float(pre.temperatures[-1, 0])
    delta_t = t_inf - t_min

    post_gen = decoupled_generator(params, bath)
    cap = time_cap if time_cap is not None else TIME_CAP_FACTOR / gamma_r
    post = propagate(post_gen, pre.states[-1], times=t0 + np.linspace(0.0, cap, n_post))
    temps = post.temperatures[:, 0]
    above = np.flatnonzero(temps >= t_inf)
    capped = above.size == 0
    if capped:
        t1 = math.inf
    elif above[0] == 0:
        t1 = t0
    else:
        k = above[0]
        base = post.states[k - 1]
        width = post.times[k] - post.times[k - 1]

        def excess(tau):
            return (
                _cold_temperature(post_gen, evolve_state(post_gen, base, tau)) - t_inf
            )

        t1 = float(post.times[k - 1]) + brentq(
            excess, 0.0, width, xtol=1e-12, rtol=1e-12
        )
    return ProtocolResult(
        t0=t0,
        T_min=t_min,
        T_inf=t_inf,
        delta_T=delta_t,
        t1=t1,
        t_Q=t1 - t0,
        gamma_r=gamma_r,
        capped=capped,
        pre_trajectory=pre,
        post_trajectory=post,
    )


def _sweep_point(
    params: FridgeParams, bath: BathSpec, r_fraction: float, phi: float, kwargs
) -> SweepPoint:
    try:
        r = r_fraction * coherence_bound(params)
        res = run_single_shot(params, bath, "pi-over-2g", r=r, phi=phi, **kwargs)
    except (FridgeError, ValueError, ArithmeticError) as exc:
        log.warning(
            "sweep point T_r=%g T_h=%g failed: %s", params.t_room, params.t_hot, exc
        )
        return SweepPoint(
            params.t_hot,
            params.t_room,
            math.nan,
            math.nan,
            error=f"{type(exc).__name__}: {exc}",
        )
    return SweepPoint(
        t_hot=params.t_hot,
        t_room=params.t_room,
        fractional_advantage=res.delta_T / res.T_inf,
        t_q_scaled=res.t_Q * res.gamma_r,
        delta_T=res.delta_T,
        T_inf=res.T_inf,
        t_Q=res.t_Q,
        gamma_r=res.gamma_r,
    )


def sweep_tradeoff(
    base: FridgeParams,
    bath: BathSpec,
    hot_offsets,
    t_rooms,
    *,
    r_fraction: float = 0.0,
    phi: float = 0.0,
    workers: int | None = None,
    **run_kwargs,
) -> dict[float, list[SweepPoint]]:
    """Fractional temperature advantage versus scaled advantage time.

    For every room temperature ``T_r`` the hot bath runs over
    ``T_r + hot_offsets`` (offsets must be positive). Qubits 1 and 2 share
    the room temperature. Points run concurrently; output order follows the
    grid. Failed points are kept with their error message.
    """
    offsets = np.sort(np.asarray(hot_offsets, dtype=float))
    if offsets.size == 0 or np.any(offsets <= 0):
        raise ParameterError(
            "hot-bath offsets must be a non-empty set of positive numbers"
        )
    grid = [
        (t_room, base.replace(t_cold=t_room, t_room=t_room, t_hot=t_room + off))
        for t_room in t_rooms
        for off in offsets
    ]
    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        points = list(
            pool.map(
                lambda item: _sweep_point(item[1], bath, r_fraction, phi, run_kwargs),
                grid,
            )
        )
    out: dict[float, list[SweepPoint]] = {}
    for (t_room, _), point in zip(grid, points):
        out.setdefault(float(t_room), []).append(point)
    return out
