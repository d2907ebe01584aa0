"""Lindblad generators for the four thermalisation models.

Superoperators act on column-stacked density matrices:
``vec(rho) = rho.reshape(-1, order="F")`` and ``vec(A rho B) = (B^T kron A) vec(rho)``.
All generators are assembled as sparse matrices; :attr:`Liouvillian.matrix`
gives the dense form on request.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .model import (
    DIM,
    IDX_010,
    IDX_101,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    BathModel,
    BathSpec,
    FridgeParams,
    embed,
    ket,
    local_hamiltonian,
    system_hamiltonian,
)

log = logging.getLogger(__name__)

TRANSPORT_LABEL = (
    0  # bath label of the incoherent hopping terms of the stochastic model
)
REGIME_FACTOR = 10.0


# --- vectorisation -------------------------------------------------------


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    dim = dim or math.isqrt(v.shape[0])
    return np.asarray(v).reshape((dim, dim), order="F")


def spre(a) -> sp.csr_matrix:
    """Superoperator of ``rho -> a rho``."""
    a = sp.csr_matrix(a)
    return sp.kron(sp.identity(a.shape[0], format="csr"), a, format="csr")


def spost(a) -> sp.csr_matrix:
    """Superoperator of ``rho -> rho a``."""
    a = sp.csr_matrix(a)
    return sp.kron(a.T, sp.identity(a.shape[0], format="csr"), format="csr")


def commutator_super(h) -> sp.csr_matrix:
    """Superoperator of ``rho -> -i [h, rho]``."""
    return -1j * (spre(h) - spost(h))


def dissipator_super(op) -> sp.csr_matrix:
    """Superoperator of ``D[L] rho = L rho L^+ - {L^+ L, rho} / 2``."""
    op = sp.csr_matrix(op)
    ld = op.conj().T
    ldl = (ld @ op).tocsr()
    return (
        sp.kron(op.conj(), op, format="csr") - 0.5 * spre(ldl) - 0.5 * spost(ldl)
    ).tocsr()


def dissipate(op: np.ndarray, rho: np.ndarray) -> np.ndarray:
    ld = op.conj().T
    ldl = ld @ op
    return op @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl)


# --- rates ---------------------------------------------------------------


def ohmic_spectral_density(omega, alpha: float, omega_cutoff: float):
    return alpha * omega * np.exp(-omega / omega_cutoff)


def bose_einstein(omega, beta: float):
    with np.errstate(over="ignore"):  # occupation underflows to 0 as T -> 0
        return 1.0 / np.expm1(beta * omega)


def ohmic_rate(omega: float, beta: float, alpha: float, omega_cutoff: float) -> float:
    """Incoherent transition rate at signed Bohr frequency ``omega``.

    Positive frequencies are emission into the bath, negative ones absorption.
    ``omega == 0`` returns the finite limit ``alpha / beta``.
    """
    if omega > 0:
        return float(
            ohmic_spectral_density(omega, alpha, omega_cutoff)
            * (1.0 + bose_einstein(omega, beta))
        )
    if omega < 0:
        w = -omega
        return float(
            ohmic_spectral_density(w, alpha, omega_cutoff) * bose_einstein(w, beta)
        )
    return alpha / beta


def local_rates(params: FridgeParams, bath: BathSpec) -> list[tuple[float, float]]:
    """``[(gamma_i(E_i), gamma_i(-E_i))]`` for the three qubits."""
    return [
        (
            ohmic_rate(e, b, bath.alpha, bath.omega_cutoff),
            ohmic_rate(-e, b, bath.alpha, bath.omega_cutoff),
        )
        for e, b in zip(params.energies, params.betas)
    ]


def dephasing_rate_gamma(params: FridgeParams, bath: BathSpec) -> float:
    """Decay rate of the transport coherence under the local dissipators."""
    return 0.5 * sum(down + up for down, up in local_rates(params, bath))


def model_ii_gamma(params: FridgeParams, bath: BathSpec) -> float:
    return bath.gamma if bath.gamma is not None else 20.0 * params.e2


def model_ii_spectral_density(
    params: FridgeParams, bath: BathSpec, qubit: int, omega: float
) -> float:
    """Lorentzian spectral density seen by physical qubit ``qubit`` (1-based) in Model II."""
    gamma = model_ii_gamma(params, bath)
    e = params.energies[qubit - 1]
    beta = params.betas[qubit - 1]
    width = 0.5 * gamma * (1.0 + math.exp(-beta * e))
    return (bath.eta * gamma) ** 2 * width / (width**2 + (e - omega) ** 2)


# --- containers ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JumpOperator:
    matrix: np.ndarray
    rate: float
    bath: int  # 1..3, or TRANSPORT_LABEL for stochastic hopping
    omega: float

    def __post_init__(self):
        if not self.rate >= 0:
            raise ParameterError(
                f"negative rate {self.rate} for jump on bath {self.bath}"
            )

    @property
    def label(self) -> tuple[int, float]:
        return (self.bath, self.omega)


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Generator ``d vec(rho)/dt = L vec(rho)`` plus the pieces it was built from.

    ``coupling`` is the Hamiltonian between physical and fictitious qubits in
    Model II (None otherwise); its action on qubit 1 counts as heat.
    """

    dim: int
    hamiltonian: np.ndarray
    jumps: tuple[JumpOperator, ...]
    sparse: sp.csr_matrix
    params: FridgeParams
    bath: BathSpec
    coupling: np.ndarray | None = None

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.sparse.toarray()

    @property
    def model(self) -> BathModel:
        return self.bath.model

    @property
    def rates(self) -> np.ndarray:
        return np.array([j.rate for j in self.jumps])

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.sparse @ vec(rho), self.dim)

    def heat_operator_part(self, rho: np.ndarray) -> np.ndarray:
        """Bath-induced part of ``d rho / dt`` (all thermal dissipators, plus the fictitious coupling)."""
        out = np.zeros_like(rho, dtype=complex)
        for j in self.jumps:
            if j.bath != TRANSPORT_LABEL and j.rate > 0:
                out += j.rate * dissipate(j.matrix, rho)
        if self.coupling is not None:
            out += -1j * (self.coupling @ rho - rho @ self.coupling)
        return out


def _assemble(hamiltonian: np.ndarray, jumps: list[JumpOperator]) -> sp.csr_matrix:
    gen = commutator_super(hamiltonian)
    for j in jumps:
        if j.rate > 0:
            gen = gen + j.rate * dissipator_super(j.matrix)
    return sp.csr_matrix(gen)


def _require(bath: BathSpec, *models: BathModel) -> None:
    if bath.model not in models:
        raise ParameterError(f"bath model {bath.model.value} cannot be used here")


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.outer(a, b.conj())


def strong_coupling_catalog(
    params: FridgeParams,
) -> list[tuple[int, float, np.ndarray]]:
    """Lowering operators ``(bath, omega, A_i(omega))`` in the dressed eigenbasis of ``H_loc + V``.

    Only positive frequencies are returned; reverse processes are the adjoints.
    """
    e1, e2, e3, g = params.e1, params.e2, params.e3, params.g
    k = {b: ket(b) for b in ("000", "001", "011", "100", "110", "111")}
    plus = (ket("101") + ket("010")) / math.sqrt(2)
    minus = (ket("101") - ket("010")) / math.sqrt(2)
    s = 1.0 / math.sqrt(2)
    return [
        (1, e1, _outer(k["011"], k["111"]) + _outer(k["000"], k["100"])),
        (1, e1 + g, s * (_outer(k["001"], plus) - _outer(minus, k["110"]))),
        (1, e1 - g, s * (_outer(plus, k["110"]) + _outer(k["001"], minus))),
        (2, e2, _outer(k["100"], k["110"]) + _outer(k["001"], k["011"])),
        (2, e2 + g, s * (_outer(k["000"], plus) + _outer(minus, k["111"]))),
        (2, e2 - g, s * (_outer(plus, k["111"]) - _outer(k["000"], minus))),
        (3, e3, _outer(k["110"], k["111"]) + _outer(k["000"], k["001"])),
        (3, e3 + g, s * (_outer(k["100"], plus) - _outer(minus, k["011"]))),
        (3, e3 - g, s * (_outer(plus, k["011"]) + _outer(k["100"], minus))),
    ]


def build_strong_coupling(params: FridgeParams, bath: BathSpec) -> Liouvillian:
    """Model I generator with dissipation between eigenstates of ``H_loc + V``."""
    _require(bath, BathModel.STRONG)
    if any(e - params.g <= 0 for e in params.energies):
        raise ParameterError(
            f"g={params.g} must be smaller than every qubit energy {params.energies}"
        )
    jumps: list[JumpOperator] = []
    for i, omega, op in strong_coupling_catalog(params):
        beta = params.betas[i - 1]
        jumps.append(
            JumpOperator(
                op, ohmic_rate(omega, beta, bath.alpha, bath.omega_cutoff), i, omega
            )
        )
        jumps.append(
            JumpOperator(
                op.conj().T.copy(),
                ohmic_rate(-omega, beta, bath.alpha, bath.omega_cutoff),
                i,
                -omega,
            )
        )
    max_rate = max(j.rate for j in jumps)
    scale = (
        min(min(params.energies), params.g) if params.g > 0 else min(params.energies)
    )
    if scale < REGIME_FACTOR * max_rate:
        log.warning(
            "strong-coupling generator outside its validity regime: min(E_i, g)=%.3g, max rate=%.3g",
            scale,
            max_rate,
        )
    h = system_hamiltonian(params)
    return Liouvillian(DIM, h, tuple(jumps), _assemble(h, jumps), params, bath)


def _local_jumps(params: FridgeParams, bath: BathSpec) -> list[JumpOperator]:
    jumps = []
    for i, ((down, up), e) in enumerate(
        zip(local_rates(params, bath), params.energies)
    ):
        jumps.append(JumpOperator(embed(SIGMA_MINUS, i), down, i + 1, e))
        jumps.append(JumpOperator(embed(SIGMA_PLUS, i), up, i + 1, -e))
    return jumps


def build_weak_coupling(params: FridgeParams, bath: BathSpec) -> Liouvillian:
    """Model I generator with local dissipators on each qubit."""
    _require(bath, BathModel.WEAK)
    jumps = _local_jumps(params, bath)
    h = system_hamiltonian(params)
    return Liouvillian(DIM, h, tuple(jumps), _assemble(h, jumps), params, bath)


def build_stochastic(params: FridgeParams, bath: BathSpec) -> Liouvillian:
    """Local dissipators plus incoherent hopping ``|101> <-> |010>`` at rate ``2 g^2 / Gamma``.

    The coherent interaction is dropped; its effect on populations is
    carried by the hopping terms.
    """
    _require(bath, BathModel.STOCHASTIC)
    jumps = _local_jumps(params, bath)
    big_gamma = dephasing_rate_gamma(params, bath)
    if params.g >= big_gamma / REGIME_FACTOR:
        log.warning(
            "stochastic model outside its validity regime: g=%.3g, Gamma=%.3g",
            params.g,
            big_gamma,
        )
    hop = 2.0 * params.g**2 / big_gamma
    b = np.zeros((DIM, DIM), dtype=complex)
    b[IDX_010, IDX_101] = 1.0
    jumps.append(JumpOperator(b, hop, TRANSPORT_LABEL, 0.0))
    jumps.append(JumpOperator(b.conj().T.copy(), hop, TRANSPORT_LABEL, 0.0))
    h = local_hamiltonian(params)
    return Liouvillian(DIM, h, tuple(jumps), _assemble(h, jumps), params, bath)


def build_model_ii(params: FridgeParams, bath: BathSpec) -> Liouvillian:
    """Six-qubit generator: physical qubits 1-3 then fictitious qubits 1-3, each damped at ``gamma``."""
    _require(bath, BathModel.MODEL_II)
    gamma = model_ii_gamma(params, bath)
    n = 6
    eye8 = np.eye(DIM, dtype=complex)
    h_a = np.kron(system_hamiltonian(params), eye8)
    h_f = sum(0.5 * e * embed(SIGMA_Z, 3 + i, n) for i, e in enumerate(params.energies))
    h_af = sum(
        bath.eta
        * gamma
        * (
            embed(SIGMA_PLUS, i, n) @ embed(SIGMA_MINUS, 3 + i, n)
            + embed(SIGMA_MINUS, i, n) @ embed(SIGMA_PLUS, 3 + i, n)
        )
        for i in range(3)
    )
    jumps = []
    for i, (e, beta) in enumerate(zip(params.energies, params.betas)):
        jumps.append(JumpOperator(embed(SIGMA_MINUS, 3 + i, n), gamma, i + 1, e))
        jumps.append(
            JumpOperator(
                embed(SIGMA_PLUS, 3 + i, n), gamma * math.exp(-beta * e), i + 1, -e
            )
        )
    if gamma < REGIME_FACTOR * max(max(params.energies), params.g):
        log.warning(
            "Model II gamma=%.3g is not much larger than the system frequencies", gamma
        )
    h = h_a + h_f + h_af
    # fictitious-qubit dissipators act on qubits 4-6 only: they never enter the qubit-1 heat term
    return Liouvillian(
        2**n, h, tuple(jumps), _assemble(h, jumps), params, bath, coupling=h_af
    )


_BUILDERS = {
    BathModel.STRONG: build_strong_coupling,
    BathModel.WEAK: build_weak_coupling,
    BathModel.MODEL_II: build_model_ii,
    BathModel.STOCHASTIC: build_stochastic,
}


def build_liouvillian(params: FridgeParams, bath: BathSpec) -> Liouvillian:
    return _BUILDERS[bath.model](params, bath)


def without_dissipation(liouv: Liouvillian) -> Liouvillian:
    """Same Hamiltonian with every rate forced to zero."""
    jumps = tuple(JumpOperator(j.matrix, 0.0, j.bath, j.omega) for j in liouv.jumps)
    return Liouvillian(
        liouv.dim,
        liouv.hamiltonian,
        jumps,
        _assemble(liouv.hamiltonian, []),
        liouv.params,
        liouv.bath,
        liouv.coupling,
    )


def scale_dissipation(liouv: Liouvillian, factor: float) -> Liouvillian:
    jumps = tuple(
        JumpOperator(j.matrix, j.rate * factor, j.bath, j.omega) for j in liouv.jumps
    )
    return Liouvillian(
        liouv.dim,
        liouv.hamiltonian,
        jumps,
        _assemble(liouv.hamiltonian, list(jumps)),
        liouv.params,
        liouv.bath,
        liouv.coupling,
    )


def decoupled_generator(params: FridgeParams, bath: BathSpec) -> Liouvillian:
    """Generator after the interaction is switched off: every qubit relaxes with its own bath."""
    off = params.replace(g=0.0)
    if bath.model is BathModel.MODEL_II:
        return build_model_ii(off, bath)
    return build_weak_coupling(off, bath.replace(model=BathModel.WEAK))
