"""Acceptance criteria, one test each.

Every test records ``(passed, title, detail)`` in ``RESULTS``; the terminal
summary hook in ``conftest.py`` prints one PASS/FAIL line per criterion.
Running this file directly prints the same lines.
"""

import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg as sla
from conftest import random_params, random_state

from qfridge import config as cfg
from qfridge.dynamics import (
    energy_balance_residual,
    find_first_minimum,
    propagate,
    steady_state,
)
from qfridge.errors import NoMinimumError
from qfridge.liouvillians import (
    TRANSPORT_LABEL,
    Liouvillian,
    _assemble,
    build_liouvillian,
    dephasing_rate_gamma,
    ohmic_rate,
    scale_dissipation,
    without_dissipation,
)
from qfridge.model import (
    IDX_010,
    IDX_101,
    BathModel,
    BathSpec,
    FridgeParams,
    coherence_bound,
    inject_coherence,
    ket,
    system_hamiltonian,
    thermal_product_state,
    transport_populations,
)
from qfridge.noise import PhaseDistribution, Scenario, analytic_shift, ensemble_evolve
from qfridge.protocols import initial_state, sweep_tradeoff

RESULTS: dict[int, tuple[bool, str, str]] = {}


def record(number: int, title: str, passed: bool, detail: str) -> None:
    RESULTS[number] = (bool(passed), title, detail)
    assert passed, f"criterion {number} ({title}) failed: {detail}"


def preset(name: str) -> tuple[FridgeParams, BathSpec, dict]:
    resolved = cfg.resolve(cfg.load_preset(name))
    params = FridgeParams(**resolved["params"])
    bath = BathSpec(**resolved["bath"])
    return params, bath, resolved


def _random_bath(rng, model: BathModel) -> BathSpec:
    if model is BathModel.MODEL_II:
        return BathSpec(
            model, gamma=rng.uniform(20.0, 60.0), eta=rng.uniform(0.01, 0.1)
        )
    return BathSpec(
        model, alpha=10 ** rng.uniform(-5, -3), omega_cutoff=10 ** rng.uniform(1, 3)
    )


# ---------------------------------------------------------------------------


def test_01_generator_validity():
    rng = np.random.default_rng(1)
    trace_err = herm_err = eig_err = 0.0
    min_rate = math.inf
    catalog_sizes = set()
    for model in BathModel:
        for _ in range(50):
            params = random_params(rng)
            bath = _random_bath(rng, model)
            liouv = build_liouvillian(params, bath)
            rho = random_state(rng, liouv.dim)
            out = liouv.apply(rho)
            trace_err = max(trace_err, abs(np.trace(out)))
            herm_err = max(herm_err, float(np.abs(out - out.conj().T).max()))
            min_rate = min(min_rate, float(liouv.rates.min()))
            if model is BathModel.STRONG:
                h = system_hamiltonian(params)
                catalog_sizes.add(len(liouv.jumps))
                for j in liouv.jumps:
                    eig_err = max(
                        eig_err,
                        float(
                            np.abs(
                                h @ j.matrix - j.matrix @ h + j.omega * j.matrix
                            ).max()
                        ),
                    )
    passed = (
        trace_err < 1e-10
        and herm_err < 1e-12
        and min_rate >= 0
        and catalog_sizes == {18}
        and eig_err < 1e-10
    )
    record(
        1,
        "generator validity",
        passed,
        f"trace {trace_err:.1e}, hermiticity {herm_err:.1e}, min rate {min_rate:.1e}, "
        f"catalog sizes {sorted(catalog_sizes)}, eigen-relation {eig_err:.1e} (4 models x 50 draws)",
    )


def test_02_detailed_balance():
    worst = 0.0
    for temperature in (1.0, 10.0, 50.0, 100.0, 500.0):
        beta = 1 / temperature
        for w in np.geomspace(1e-3, 10.0, 200):
            ratio = ohmic_rate(-w, beta, 1e-3, 1e3) / ohmic_rate(w, beta, 1e-3, 1e3)
            worst = max(worst, abs(ratio / math.exp(-beta * w) - 1))
    record(
        2,
        "detailed balance",
        worst < 1e-12,
        f"max relative error {worst:.1e} over omega in [1e-3, 10]",
    )


def test_03_unitary_limit():
    rng = np.random.default_rng(3)
    pop_err = t_err = 0.0
    for _ in range(10):
        # vary D through the bath temperatures, keeping the refrigeration bias D > 0
        t_room = rng.uniform(20.0, 80.0)
        params = FridgeParams(
            g=0.2, t_cold=t_room, t_room=t_room, t_hot=t_room + rng.uniform(20.0, 200.0)
        )
        r = rng.uniform(0.01, 0.95) * coherence_bound(params)
        phi = rng.uniform(-math.pi, math.pi)
        liouv = without_dissipation(build_liouvillian(params, BathSpec()))
        traj = propagate(
            liouv,
            inject_coherence(thermal_product_state(params), r, phi),
            4 * math.pi / params.g,
            801,
        )
        a0, b0 = transport_populations(thermal_product_state(params))
        s, d = 0.5 * (a0 + b0), 0.5 * (b0 - a0)
        x = 2 * params.g * traj.times
        a_expected = s - d * np.cos(x) + r * math.cos(phi) * np.sin(x)
        pop_err = max(
            pop_err,
            float(np.abs(traj.states[:, IDX_010, IDX_010].real - a_expected).max()),
        )
        pop_err = max(
            pop_err,
            float(
                np.abs(
                    traj.states[:, IDX_101, IDX_101].real - (2 * s - a_expected)
                ).max()
            ),
        )
        t_expected = (math.pi - math.atan(r * math.cos(phi) / d)) / (2 * params.g)
        t_err = max(t_err, abs(find_first_minimum(traj)[0] - t_expected))
    record(
        3,
        "unitary-limit oracle",
        pop_err < 1e-6 and t_err < 1e-4,
        f"population error {pop_err:.1e}, minimum-time error {t_err:.1e} over 10 draws",
    )


def test_04_cooling_oscillations():
    details, passed = [], True
    p_a, bath_a, _ = preset("fig2a")
    p_c, bath_c, _ = preset("fig2c")
    half_period = math.pi / (2 * p_a.g)
    for label, params, bath, t_end, n in (
        ("strong", p_a, bath_a, 30.0, 601),
        ("model2", p_c, bath_c, 20.0, 201),
    ):
        liouv = build_liouvillian(params, bath)
        t_inf = steady_state(liouv).t_inf_temperature
        traj = propagate(liouv, initial_state(params, bath), t_end, n)
        t_min, temp_min = find_first_minimum(traj)
        off = abs(t_min - half_period) / half_period
        ok = temp_min < t_inf and off < 0.15
        passed &= ok
        details.append(
            f"{label}: t_min {t_min:.3f} ({100 * off:.1f}% from pi/2g), T_min {temp_min:.3f} < T_inf {t_inf:.3f}"
        )

    p_b, bath_b, resolved = preset("fig2b")
    opts = resolved["evolve"]
    stoch = BathSpec(
        BathModel.STOCHASTIC, alpha=bath_b.alpha, omega_cutoff=bath_b.omega_cutoff
    )
    traj = propagate(
        build_liouvillian(p_b, stoch),
        thermal_product_state(p_b),
        opts["t_end"],
        opts["n_samples"],
    )
    temps = traj.temperatures[:, 0]
    monotone = bool(np.all(np.diff(temps) <= 1e-12))
    try:
        find_first_minimum(traj)
        no_minimum = False
    except NoMinimumError:
        no_minimum = True
    passed &= monotone and no_minimum
    details.append(f"stochastic: monotone {monotone}, no minimum {no_minimum}")
    record(4, "cooling oscillations", passed, "; ".join(details))


def test_05_steady_state_equivalence():
    p_b, bath_b, _ = preset("fig2b")

    def pair(params, alpha, cutoff):
        weak = steady_state(
            build_liouvillian(params, BathSpec(BathModel.WEAK, alpha, cutoff))
        ).t_inf_temperature
        stoch = steady_state(
            build_liouvillian(params, BathSpec(BathModel.STOCHASTIC, alpha, cutoff))
        )
        return abs(weak - stoch.t_inf_temperature) / abs(weak)

    worst = pair(p_b, bath_b.alpha, bath_b.omega_cutoff)
    at_point = worst
    rng = np.random.default_rng(5)
    draws = 0
    while draws < 20:
        params = random_params(rng)
        alpha = 10 ** rng.uniform(-4, -2)
        big_gamma = dephasing_rate_gamma(params, BathSpec(alpha=alpha))
        params = params.replace(g=rng.uniform(0.01, 1.0) * big_gamma / 50)
        worst = max(worst, pair(params, alpha, 1e3))
        draws += 1
    record(
        5,
        "quantum/classical steady-state equivalence",
        worst < 1e-3,
        f"fig2b point {at_point:.1e}, worst over 20 draws with g <= Gamma/50 {worst:.1e} (relative)",
    )


def test_06_stochastic_reduction():
    p_b, bath_b, _ = preset("fig2b")
    bath = BathSpec(
        BathModel.STOCHASTIC, alpha=bath_b.alpha, omega_cutoff=bath_b.omega_cutoff
    )
    liouv = build_liouvillian(p_b, bath)
    diag = [k * 9 for k in range(8)]
    rate_matrix = liouv.matrix[np.ix_(diag, diag)].real
    p0 = np.random.default_rng(6).dirichlet(np.ones(8))
    traj = propagate(liouv, np.diag(p0).astype(complex), 400.0, 41)
    diag_err = max(
        float(np.abs(np.diag(rho).real - sla.expm(rate_matrix * t) @ p0).max())
        for t, rho in zip(traj.times, traj.states)
    )

    expected = 2 * p_b.g**2 / dephasing_rate_gamma(p_b, bath)
    exact = (
        rate_matrix[IDX_101, IDX_010] == expected
        and rate_matrix[IDX_010, IDX_101] == expected
    )

    # isolate the hopping channel and fit the decay of the population difference, exp(-2 k t)
    hop_jumps = tuple(j for j in liouv.jumps if j.bath == TRANSPORT_LABEL)
    hop_only = Liouvillian(
        8,
        liouv.hamiltonian,
        hop_jumps,
        _assemble(liouv.hamiltonian, list(hop_jumps)),
        p_b,
        bath,
    )
    start = np.outer(ket("010"), ket("010")).astype(complex)
    fit = propagate(hop_only, start, 2.0 / expected, 41)
    diff = fit.states[:, IDX_010, IDX_010].real - fit.states[:, IDX_101, IDX_101].real
    fitted = -0.5 * np.polyfit(fit.times, np.log(diff), 1)[0]
    fit_err = abs(fitted / expected - 1)
    record(
        6,
        "stochastic reduction oracle",
        diag_err < 1e-10 and exact and fit_err < 1e-2,
        f"diagonal-sector error {diag_err:.1e}, rate entry exact {exact}, fitted rate off by {fit_err:.1e}",
    )


def test_07_coherence_advantage():
    params, bath, _ = preset("fig2a")
    liouv = build_liouvillian(params, bath)
    c_max = coherence_bound(params)

    def minimum(r, phi=0.0):
        traj = propagate(liouv, initial_state(params, bath, r, phi), 30.0, 601)
        return find_first_minimum(traj)[1]

    plain, coherent = minimum(0.0), minimum(c_max / 100)
    h1 = 0.5 * params.e1 * np.diag([-1, -1, -1, -1, 1, 1, 1, 1]).astype(complex)
    slopes = {}
    for phi in (0.0, math.pi):
        rho0 = initial_state(params, bath, c_max / 100, phi)
        slopes[phi] = float(np.trace(h1 @ liouv.apply(rho0)).real)
    early = propagate(
        liouv, initial_state(params, bath, c_max / 100, math.pi), 0.2, 3
    ).temperatures[:, 0]
    passed = (
        coherent < plain and slopes[0.0] < 0 < slopes[math.pi] and early[1] > early[0]
    )
    record(
        7,
        "coherence advantage",
        passed,
        f"T_min {coherent:.4f} (r = C_max/100) < {plain:.4f} (r = 0); dh1/dt(0) {slopes[0.0]:.2e} at phi=0, "
        f"{slopes[math.pi]:.2e} at phi=pi",
    )


def test_08_energy_balance():
    worst = {}
    for name in ("fig2a", "fig2b"):
        params, bath, resolved = preset(name)
        opts = resolved["evolve"]
        models = opts["models"] or [bath.model.value]
        for model in models:
            spec = bath.replace(model=BathModel(model))
            liouv = build_liouvillian(params, spec)
            for frac in opts["r_fractions"]:
                rho0 = initial_state(params, spec, frac * coherence_bound(params))
                traj = propagate(liouv, rho0, opts["t_end"], opts["n_samples"])
                res = float(np.abs(energy_balance_residual(traj)).max()) / params.e1
                worst[f"{name}/{model}/r{frac:g}"] = res
    top = max(worst.values())
    record(
        8,
        "energy balance",
        top < 1e-5,
        f"max residual / E1 = {top:.1e} over {len(worst)} trajectories",
    )


def test_09_phase_noise_analytics():
    params, bath, resolved = preset("fig4")
    r = resolved["noise"]["r_fraction"] * coherence_bound(params)
    liouv = build_liouvillian(params, bath)
    worst_sz = worst_temp = 0.0
    for v in (0.01, 0.1, 0.5):
        dist = PhaseDistribution.gaussian(v)
        for scenario in Scenario:
            num = ensemble_evolve(
                params, bath, r, dist, scenario=scenario, liouvillian=liouv
            )
            _, dsz, dtemp = analytic_shift(params, r, v, scenario)
            worst_sz = max(worst_sz, abs(num.delta_sigma_z - dsz) / abs(dsz))
            worst_temp = max(worst_temp, abs(num.delta_T - dtemp) / abs(dtemp))

    weak = scale_dissipation(liouv, 0.01)
    worst_t = 0.0
    for v in (0.01, 0.1, 0.5):
        num = ensemble_evolve(
            params, bath, r, PhaseDistribution.gaussian(v), liouvillian=weak
        )
        t_prime, _, _ = analytic_shift(params, r, v)
        worst_t = max(worst_t, abs(num.t_opt_prime - t_prime) / t_prime)
    record(
        9,
        "phase-noise analytics",
        worst_sz < 0.3 and worst_temp < 0.3 and worst_t < 0.05,
        f"worst relative error: delta<sz> {worst_sz:.1%}, delta T {worst_temp:.1%}; "
        f"t_opt' {worst_t:.2%} with dissipation x0.01",
    )


def test_10_tradeoff_sweep():
    params, bath, resolved = preset("fig3b")
    grid = resolved["sweep"]["hot_offsets"]
    offsets = np.linspace(grid["start"], grid["stop"], grid["num"])
    curves = sweep_tradeoff(params, bath, offsets, resolved["sweep"]["t_rooms"])
    details, passed = [], True
    for t_room, points in curves.items():
        t_q = np.array([p.t_Q for p in points])
        frac = np.array([p.fractional_advantage for p in points])
        best = int(np.argmax(frac))
        decreasing = bool(np.all(np.diff(t_q) < 0))
        interior = 0 < best < len(points) - 1
        passed &= decreasing and interior and all(p.error is None for p in points)
        details.append(
            f"T_r={t_room:g}: t_Q decreasing {decreasing}, max at T_h={points[best].t_hot:.1f}"
        )
    record(10, "trade-off sweep", passed, "; ".join(details))


def test_11_determinism(tmp_path):
    runs = [
        ["evolve", "--preset", "fig2a", "--set", "evolve.n_samples=301"],
        [
            "noise-ensemble",
            "--preset",
            "fig4",
            "--set",
            "noise.variances=[0.1]",
            "--set",
            "noise.n_samples=200",
            "--set",
            "noise.n_points=201",
        ],
        [
            "sweep",
            "--preset",
            "fig3b",
            "--set",
            "sweep.t_rooms=[30]",
            "--set",
            "sweep.hot_offsets.num=5",
        ],
    ]
    compared, identical = 0, True
    for k, argv in enumerate(runs):
        outputs = []
        for rep in range(2):
            out = tmp_path / f"run{k}_{rep}"
            subprocess.run(
                [
                    sys.executable,
                    "-m",
                    "qfridge.cli",
                    *argv,
                    "--seed",
                    "7",
                    "--out",
                    str(out),
                ],
                check=True,
                capture_output=True,
            )
            outputs.append(
                {p.name: p.read_bytes() for p in sorted(Path(out).glob("*.csv"))}
            )
        identical &= outputs[0] == outputs[1] and len(outputs[0]) > 0
        compared += len(outputs[0])
    record(
        11,
        "determinism",
        identical,
        f"{compared} CSV files byte-identical across repeated runs",
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
