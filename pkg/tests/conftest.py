import math
import sys

import numpy as np
import pytest

from qfridge.model import BathModel, BathSpec, FridgeParams

# Strong-coupling point used throughout: E = (1, 2, 1), T = (50, 50, 100), g = 0.2.
STRONG_ALPHA = 1e-4


@pytest.fixture
def fig2a():
    return FridgeParams(), BathSpec(BathModel.STRONG, alpha=STRONG_ALPHA)


@pytest.fixture
def fig2b():
    return FridgeParams(g=0.002), BathSpec(BathModel.WEAK)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def random_params(rng, *, g_max_fraction=0.5, refrigerating=False) -> FridgeParams:
    e1 = rng.uniform(0.5, 2.0)
    e3 = rng.uniform(0.5, 2.0)
    g = rng.uniform(0.01, g_max_fraction) * min(e1, e3)
    if refrigerating:
        t_room = rng.uniform(20.0, 80.0)
        return FridgeParams(
            e1,
            e1 + e3,
            e3,
            g,
            t_room * rng.uniform(1.0, 1.2),
            t_room,
            t_room + rng.uniform(20, 150),
        )
    temps = rng.uniform(5.0, 200.0, size=3)
    return FridgeParams(e1, e1 + e3, e3, g, *temps)


def random_state(rng, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get(
        "tests.test_acceptance"
    )
    if module is None or not getattr(module, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        passed, title, detail = module.RESULTS[number]
        terminalreporter.write_line(
            f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}"
        )


__all__ = ["STRONG_ALPHA", "math", "random_params", "random_state"]
