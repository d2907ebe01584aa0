"""Built-in invariant suite run by ``qfridge validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import energy_balance_residual, propagate, steady_state
from .liouvillians import build_liouvillian, ohmic_rate, strong_coupling_catalog, vec
from .model import (
    BathModel,
    BathSpec,
    FridgeParams,
    coherence_bound,
    inject_coherence,
    local_hamiltonian,
    system_hamiltonian,
    thermal_product_state,
)
from .protocols import initial_state

STRONG_ALPHA = 1e-4  # keeps every strong-coupling rate below g/10 at g = 0.2


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _bath_points() -> list[tuple[FridgeParams, BathSpec]]:
    strong = FridgeParams()
    weak = FridgeParams(g=0.002)
    return [
        (strong, BathSpec(BathModel.STRONG, alpha=STRONG_ALPHA)),
        (weak, BathSpec(BathModel.WEAK)),
        (weak, BathSpec(BathModel.STOCHASTIC)),
        (strong, BathSpec(BathModel.MODEL_II)),
    ]


def check_trace() -> Check:
    worst = 0.0
    for params, bath in _bath_points():
        liouv = build_liouvillian(params, bath)
        trace_row = vec(np.eye(liouv.dim)).conj() @ liouv.sparse
        worst = max(worst, float(np.abs(trace_row).max()))
    return Check("trace preservation", worst < 1e-10, f"max |Tr L(.)| = {worst:.2e}")


def check_hermiticity(seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for params, bath in _bath_points():
        liouv = build_liouvillian(params, bath)
        out = liouv.apply(_random_state(rng, liouv.dim))
        worst = max(worst, float(np.abs(out - out.conj().T).max()))
    return Check(
        "hermiticity preservation",
        worst < 1e-12,
        f"max |L(rho) - L(rho)^dag| = {worst:.2e}",
    )


def check_positivity() -> Check:
    worst = math.inf
    for params, bath in _bath_points():
        liouv = build_liouvillian(params, bath)
        r = 0.5 * coherence_bound(params)
        rho0 = initial_state(params, bath, r, 0.3)
        traj = propagate(
            liouv, rho0, 20.0, 41, method="ode" if liouv.dim > 8 else "auto"
        )
        worst = min(worst, float(min(np.linalg.eigvalsh(s).min() for s in traj.states)))
    return Check("positivity", worst >= -1e-9, f"min eigenvalue = {worst:.2e}")


def check_detailed_balance() -> Check:
    worst = 0.0
    for beta in (1 / 10, 1 / 50, 1 / 100):
        for w in np.geomspace(1e-3, 10.0, 41):
            ratio = ohmic_rate(-w, beta, 1e-3, 1e3) / ohmic_rate(w, beta, 1e-3, 1e3)
            worst = max(worst, abs(ratio / math.exp(-beta * w) - 1.0))
    return Check("detailed balance", worst < 1e-12, f"max relative error = {worst:.2e}")


def check_energy_balance() -> Check:
    points = [
        (FridgeParams(), BathSpec(BathModel.STRONG, alpha=STRONG_ALPHA), 60.0),
        (FridgeParams(g=0.002), BathSpec(BathModel.WEAK), 400.0),
    ]
    worst = 0.0
    for params, bath, t_end in points:
        liouv = build_liouvillian(params, bath)
        rho0 = inject_coherence(
            thermal_product_state(params), 0.01 * coherence_bound(params)
        )
        traj = propagate(liouv, rho0, t_end, 4001)
        worst = max(
            worst, float(np.abs(energy_balance_residual(traj)).max()) / params.e1
        )
    return Check("energy balance", worst < 1e-5, f"max residual / E1 = {worst:.2e}")


def check_catalog() -> Check:
    params = FridgeParams()
    h_a = system_hamiltonian(params)
    ops = strong_coupling_catalog(params)
    worst = 0.0
    count = 0
    for _, omega, a in ops:
        for op, w in ((a, omega), (a.conj().T, -omega)):
            worst = max(worst, float(np.abs(h_a @ op - op @ h_a + w * op).max()))
            count += 1
    h_loc = local_hamiltonian(params)
    commute = float(np.abs(h_loc @ h_a - h_a @ h_loc).max())
    ok = count == 18 and worst < 1e-10 and commute < 1e-12
    return Check(
        "strong-coupling catalog",
        ok,
        f"{count} operators, max |[H,A]+wA| = {worst:.2e}",
    )


def check_steady_state() -> Check:
    worst = 0.0
    for params, bath in _bath_points():
        worst = max(worst, steady_state(build_liouvillian(params, bath)).residual)
    return Check(
        "steady-state residual", worst < 1e-10, f"max |L rho_inf| = {worst:.2e}"
    )


SUITE = (
    check_trace,
    check_hermiticity,
    check_positivity,
    check_detailed_balance,
    check_energy_balance,
    check_catalog,
    check_steady_state,
)


def run_suite() -> list[Check]:
    results = []
    for check in SUITE:
        try:
            results.append(check())
        except Exception as exc:  # noqa: BLE001 - a crashing check is a failed check
            results.append(
                Check(
                    check.__name__.removeprefix("check_").replace("_", " "),
                    False,
                    repr(exc),
                )
            )
    return results
