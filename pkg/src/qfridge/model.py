"""Parameters, basis conventions, thermal states and closed-form quantities.

Basis convention
----------------
States are labelled ``|q1 q2 q3>`` with qubit 1 the most significant bit, so
``|010>`` is index 2 and ``|101>`` is index 5. ``|1>`` is the excited level:
``sigma_z |1> = +|1>`` and ``sigma_z |0> = -|0>``. With this choice the
local Hamiltonian ``H_loc = sum_i E_i sigma^z_i / 2`` puts thermal population
in ``|0>``, a thermal qubit has ``<sigma_z> = -tanh(beta E / 2)``, and every
jump operator in the strong-coupling catalog lowers the energy by its
Bohr frequency.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import (
    DomainError,
    InvalidStateError,
    ParameterError,
    PositivityError,
    SingularTemperatureError,
)

N_QUBITS = 3
DIM = 2**N_QUBITS

IDX_010 = 0b010
IDX_101 = 0b101
TRANSPORT_SUBSPACE = (IDX_010, IDX_101)

# single-qubit operators in the (|0>, |1>) ordering
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SIGMA_PLUS = SIGMA_MINUS.conj().T
IDENTITY_2 = np.eye(2, dtype=complex)

INFINITE_TEMPERATURE = math.inf
_ARTANH_CLAMP = 1.0 - 1e-15


@dataclass
class Tolerances:
    hermiticity: float = 1e-12
    trace: float = 1e-10
    positivity: float = 1e-9


TOLERANCES = Tolerances()


def set_tolerances(**overrides: float) -> None:
    """Override the library-wide state tolerances in place."""
    for key, value in overrides.items():
        if not hasattr(TOLERANCES, key):
            raise ParameterError(f"unknown tolerance {key!r}")
        setattr(TOLERANCES, key, float(value))


@dataclass(frozen=True)
class FridgeParams:
    """Static definition of the three-qubit refrigerator.

    ``t_cold``, ``t_room`` and ``t_hot`` are the temperatures of the baths
    attached to qubits 1, 2 and 3. The usual configuration has
    ``t_cold == t_room`` and a single hot bath as the free-energy source.
    """

    e1: float = 1.0
    e2: float = 2.0
    e3: float = 1.0
    g: float = 0.2
    t_cold: float = 50.0
    t_room: float = 50.0
    t_hot: float = 100.0

    def __post_init__(self):
        for name in ("e1", "e2", "e3"):
            if not getattr(self, name) > 0:
                raise ParameterError(
                    f"{name} must be positive, got {getattr(self, name)}"
                )
        if not self.g >= 0:
            raise ParameterError(f"g must be non-negative, got {self.g}")
        for name in ("t_cold", "t_room", "t_hot"):
            if not getattr(self, name) > 0:
                raise ParameterError(
                    f"{name} must be positive, got {getattr(self, name)}"
                )
        if not math.isclose(self.e2, self.e1 + self.e3, rel_tol=1e-12, abs_tol=1e-14):
            raise ParameterError(
                f"interaction is not energy conserving: e2={self.e2} but e1+e3={self.e1 + self.e3}"
            )

    @classmethod
    def from_room_hot(cls, *, e1=1.0, e3=1.0, g=0.2, t_room=50.0, t_hot=100.0):
        return cls(
            e1=e1, e2=e1 + e3, e3=e3, g=g, t_cold=t_room, t_room=t_room, t_hot=t_hot
        )

    @property
    def energies(self) -> tuple[float, float, float]:
        return (self.e1, self.e2, self.e3)

    @property
    def temperatures(self) -> tuple[float, float, float]:
        return (self.t_cold, self.t_room, self.t_hot)

    @property
    def betas(self) -> tuple[float, float, float]:
        return tuple(1.0 / t for t in self.temperatures)

    def replace(self, **changes) -> FridgeParams:
        return dataclasses.replace(self, **changes)


class BathModel(str, enum.Enum):
    STRONG = "model1-strong"
    WEAK = "model1-weak"
    MODEL_II = "model2"
    STOCHASTIC = "stochastic"


@dataclass(frozen=True)
class BathSpec:
    """Thermalisation model and its parameters.

    ``alpha`` and ``omega_cutoff`` define the Ohmic baths of the Model I
    variants (the stochastic model reuses them). ``gamma`` and ``eta`` define
    the damped fictitious qubits of Model II. When ``gamma`` is None it
    defaults to ``20 * e2`` at build time.
    """

    model: BathModel = BathModel.STRONG
    alpha: float = 1e-3
    omega_cutoff: float = 1e3
    gamma: float | None = None
    eta: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "model", BathModel(self.model))
        if self.model is BathModel.MODEL_II:
            if self.gamma is not None and not self.gamma > 0:
                raise ParameterError(f"gamma must be positive, got {self.gamma}")
            if not 0 < self.eta < 1:
                raise ParameterError(f"eta must lie in (0, 1), got {self.eta}")
        else:
            if not self.alpha > 0:
                raise ParameterError(f"alpha must be positive, got {self.alpha}")
            if not self.omega_cutoff > 0:
                raise ParameterError(
                    f"omega_cutoff must be positive, got {self.omega_cutoff}"
                )

    def replace(self, **changes) -> BathSpec:
        return dataclasses.replace(self, **changes)


def embed(op: np.ndarray, site: int, n_qubits: int = N_QUBITS) -> np.ndarray:
    """Single-qubit ``op`` acting on ``site`` (0-based, most significant first)."""
    factors = [IDENTITY_2] * n_qubits
    factors[site] = op
    return reduce(np.kron, factors)


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def local_hamiltonian(params: FridgeParams) -> np.ndarray:
    return sum(0.5 * e * embed(SIGMA_Z, i) for i, e in enumerate(params.energies))


def interaction(params: FridgeParams) -> np.ndarray:
    v = np.zeros((DIM, DIM), dtype=complex)
    v[IDX_010, IDX_101] = params.g
    v[IDX_101, IDX_010] = params.g
    return v


def system_hamiltonian(params: FridgeParams) -> np.ndarray:
    return local_hamiltonian(params) + interaction(params)


def check_density_matrix(rho: np.ndarray, tolerances: Tolerances | None = None) -> None:
    tol = tolerances or TOLERANCES
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm >= tol.hermiticity:
        raise InvalidStateError(f"matrix is not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) >= tol.trace:
        raise InvalidStateError(f"trace is {tr!r}, not 1")
    min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if min_eig < -tol.positivity:
        raise PositivityError(f"matrix is not positive (min eigenvalue {min_eig:.3e})")


def qubit_thermal_state(energy: float, temperature: float) -> np.ndarray:
    # weights of |0> (energy -E/2) and |1> (energy +E/2), stable for T -> 0
    x = energy / temperature
    p_excited = 0.5 * (1.0 - math.tanh(0.5 * x))
    return np.diag([1.0 - p_excited, p_excited]).astype(complex)


def thermal_product_state(params: FridgeParams) -> np.ndarray:
    """Product of local Gibbs states of ``E_i sigma^z_i / 2`` at ``T_i``."""
    factors = [
        qubit_thermal_state(e, t) for e, t in zip(params.energies, params.temperatures)
    ]
    return reduce(np.kron, factors)


def virtual_temperature(params: FridgeParams) -> float:
    """Temperature of the {|01>, |10>} virtual qubit formed by qubits 2 and 3.

    May be negative when the virtual qubit is population-inverted.
    """
    b2, b3 = params.betas[1], params.betas[2]
    denom = b2 * params.e2 - b3 * params.e3
    if denom == 0.0:
        raise SingularTemperatureError(
            "virtual temperature is singular: beta2*E2 == beta3*E3"
        )
    return (params.e2 - params.e3) / denom


def effective_temperature(sigma_z_expect, energy: float):
    """Temperature assigned to a diagonal qubit with ``<sigma_z>`` and splitting ``energy``.

    Returns ``inf`` at ``<sigma_z> = 0``, ``0`` at ``-1`` and negative values
    for inverted populations. Accepts scalars or arrays.
    """
    s = np.asarray(sigma_z_expect, dtype=float)
    if np.any(np.abs(s) > 1.0 + 1e-12):
        raise DomainError(f"<sigma_z> outside [-1, 1]: {s[np.abs(s) > 1.0 + 1e-12]}")
    with np.errstate(divide="ignore"):
        clamped = np.clip(s, -_ARTANH_CLAMP, _ARTANH_CLAMP)
        out = -energy / (2.0 * np.arctanh(clamped))
    out = np.where(s == 0.0, INFINITE_TEMPERATURE, out)
    out = np.where(s <= -1.0, 0.0, out)
    out = np.where(s >= 1.0, -0.0, out)
    return float(out) if out.ndim == 0 else out


def coherence_bound(params: FridgeParams) -> float:
    """Largest transport coherence magnitude compatible with positivity of the thermal state."""
    return math.prod(
        0.5 / math.cosh(0.5 * b * e) for b, e in zip(params.betas, params.energies)
    )


def transport_coherence(rho: np.ndarray) -> complex:
    """``<101| rho |010>``, equivalently ``Tr[rho |010><101|]``."""
    return complex(rho[IDX_101, IDX_010])


def inject_coherence(rho: np.ndarray, r: float, phi: float = 0.0) -> np.ndarray:
    """Set the transport coherence of a diagonal state to ``i r e^{i phi}``.

    Populations are untouched. For a thermal product state positivity holds
    for every ``r`` below :func:`coherence_bound`.
    """
    if r < 0:
        raise ParameterError(f"coherence magnitude must be non-negative, got {r}")
    out = np.array(rho, dtype=complex, copy=True)
    c = 1j * r * np.exp(1j * phi)
    out[IDX_101, IDX_010] = c
    out[IDX_010, IDX_101] = np.conj(c)
    check_density_matrix(out)
    return out


def sigma_z_expectations(rho: np.ndarray) -> np.ndarray:
    """``<sigma^z_i>`` for the three refrigerator qubits of an 8x8 or 64x64 state."""
    n = round(math.log2(rho.shape[0]))
    diag = np.real(np.diagonal(rho))
    idx = np.arange(rho.shape[0])
    return np.array(
        [
            np.sum(diag * np.where((idx >> (n - 1 - i)) & 1, 1.0, -1.0))
            for i in range(N_QUBITS)
        ]
    )


def reduced_qubit_state(rho: np.ndarray, site: int) -> np.ndarray:
    n = round(math.log2(rho.shape[0]))
    t = rho.reshape([2] * (2 * n))
    keep = [k for k in range(n) if k != site]
    for k in sorted(keep, reverse=True):
        t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
    return t


def transport_populations(rho: np.ndarray) -> tuple[float, float]:
    """``(a, b)`` = populations of ``|010>`` and ``|101>``."""
    return float(rho[IDX_010, IDX_010].real), float(rho[IDX_101, IDX_101].real)
