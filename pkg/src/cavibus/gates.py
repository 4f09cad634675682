"""Ideal collective gates and the control-parameter solver.

The coupled stage realizes U(gamma) = exp(i gamma Jx^2) at loop closure;
combined with a single-qubit sigma_x layer it becomes (up to a global phase)
the one-shot cluster generator

    exp[i 8 gamma sum_{j>i} ((1+sigma_x^i)/2)((1+sigma_x^j)/2)],

because Jx^2 = N + 2 sum_{j>i} sigma_x^i sigma_x^j and each qubit appears in
N-1 pairs.  Expanding that generator fixes the single-qubit layer angle to
2 gamma (N-1) (mod 2 pi); that is t1_mode="corrected", the default.  The
original protocol prescription 2 E(Phi) t1 = (N-1) gamma (angle
gamma (N-1) / 2, a factor 4 weaker) is kept as t1_mode="paper"; the distance
it induces against the exact generator is reported by callers, not hidden.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SystemParams, josephson_energy
from .spaces import HilbertSpace, LinearOperator, collective_jx, qubit_space

__all__ = [
    "GateSchedule", "ideal_collective_gate", "single_qubit_layer",
    "pairwise_form", "cluster_generator", "solve_schedule",
    "composite_cluster_unitary",
]


def _qspace(n_or_space) -> HilbertSpace:
    if isinstance(n_or_space, HilbertSpace):
        if n_or_space.has_cavity:
            raise ValueError("ideal gates are built on a qubits-only space")
        return n_or_space
    return qubit_space(int(n_or_space))


@dataclass(frozen=True)
class GateSchedule:
    """Solved control parameters for one collective gate.

    gamma = (2 n + 1) pi / 8 by construction, delta closes k loops in time T
    (delta T = 2 k pi), t1 is the single-qubit stage duration in the selected
    mode, and E_phi the Josephson energy during that stage.  Times in ns,
    rates in rad/ns.
    """
    gamma: float
    k: int
    n_odd_index: int
    delta: float
    T: float
    t1: float
    t1_mode: str
    E_phi: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.n_odd_index < 0:
            raise ValueError("n_odd_index must be >= 0")
        if self.t1_mode not in ("paper", "corrected"):
            raise ValueError(f"unknown t1_mode {self.t1_mode!r}")
        if abs(self.delta * self.T - 2 * math.pi * self.k) > 1e-12 * max(1.0, abs(self.delta * self.T)):
            raise ValueError("schedule violates delta * T = 2 k pi")

    @property
    def t_total(self) -> float:
        return self.t1 + self.T

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "k": self.k,
            "n_odd_index": self.n_odd_index,
            "delta": {"value": self.delta, "unit": "rad/ns"},
            "T": {"value": self.T, "unit": "ns"},
            "t1": {"value": self.t1, "unit": "ns"},
            "t1_mode": self.t1_mode,
            "E_phi": {"value": self.E_phi, "unit": "rad/ns"},
        }


def _jx_eig(space: HilbertSpace):
    w, v = np.linalg.eigh(collective_jx(space).matrix)
    return np.rint(w).astype(int), v


def ideal_collective_gate(n_or_space, gamma: float) -> LinearOperator:
    """exp(i gamma Jx^2) on the qubit register, via Jx eigendecomposition."""
    space = _qspace(n_or_space)
    m, v = _jx_eig(space)
    mat = (v * np.exp(1j * gamma * m.astype(float) ** 2)) @ v.conj().T
    return LinearOperator(space, mat, "unitary")


def single_qubit_layer(n_or_space, e_phi: float, t: float) -> LinearOperator:
    """Product of identical rotations exp(i E(Phi) t sigma_x) on every qubit."""
    space = _qspace(n_or_space)
    theta = e_phi * t
    one = np.array([[math.cos(theta), 1j * math.sin(theta)],
                    [1j * math.sin(theta), math.cos(theta)]], dtype=complex)
    mat = one
    for _ in range(space.num_qubits - 1):
        mat = np.kron(mat, one)
    return LinearOperator(space, mat, "unitary")


def pairwise_form(n_or_space, gamma: float) -> LinearOperator:
    """exp(i 2 gamma sum_{j>i} sigma_x^i sigma_x^j); equals the collective
    gate up to the global phase e^{i gamma N}."""
    space = _qspace(n_or_space)
    m, v = _jx_eig(space)
    # Jx^2 = N I + 2 sum_{j>i} sx_i sx_j, so the pair sum has eigenvalues
    # (m^2 - N) / 2 on the Jx eigenbasis.
    pair_eigs = (m.astype(float) ** 2 - space.num_qubits) / 2.0
    mat = (v * np.exp(2j * gamma * pair_eigs)) @ v.conj().T
    return LinearOperator(space, mat, "unitary")


def cluster_generator(n_or_space, gamma: float) -> LinearOperator:
    """Directly exponentiated one-shot generator
    exp[i 8 gamma sum_{j>i} ((1+sx_i)/2)((1+sx_j)/2)]."""
    space = _qspace(n_or_space)
    n = space.num_qubits
    m, v = _jx_eig(space)
    # sum of projector pairs has eigenvalue C(n_plus, 2) with n_plus = (N+m)/2
    n_plus = (n + m.astype(float)) / 2.0
    pair_count = n_plus * (n_plus - 1.0) / 2.0
    mat = (v * np.exp(8j * gamma * pair_count)) @ v.conj().T
    return LinearOperator(space, mat, "unitary")


def solve_schedule(sp: SystemParams, N: int | None = None, k: int = 1,
                   n_odd_index: int = 0, t1_mode: str = "corrected") -> GateSchedule:
    """Solve (delta, T, t1) so the coupled stage accumulates
    gamma = (2 n + 1) pi / 8 over k loops.

    delta = g E_J sqrt(k / (2n+1)) and T = 2 k pi / delta; t1 follows the
    selected mode (module docstring).  The solved gamma is cross-checked
    against (g E_J / (4 delta))^2 delta T before returning.
    """
    if N is None:
        N = sp.num_qubits
    g, e_j = sp.cavity.g, sp.qubit.E_J
    gamma = (2 * n_odd_index + 1) * math.pi / 8.0
    delta = g * e_j * math.sqrt(k / (2 * n_odd_index + 1))
    T = 2 * math.pi * k / delta
    gamma_check = (g * e_j / (4 * delta)) ** 2 * delta * T
    if abs(gamma_check - gamma) > 1e-12:
        raise AssertionError("schedule self-check failed")

    e_phi = josephson_energy(sp.qubit)
    if e_phi < 1e-12 * sp.qubit.E_J:
        raise ValueError("E(Phi) vanishes: the single-qubit stage cannot run "
                         "(flux too close to half a flux quantum)")
    if t1_mode == "paper":
        t1 = (N - 1) * (2 * n_odd_index + 1) * math.pi / (16.0 * e_phi)
    elif t1_mode == "corrected":
        theta = (2.0 * gamma * (N - 1)) % (2 * math.pi)
        if theta == 0.0:
            theta = 2 * math.pi  # smallest strictly positive representative
        t1 = theta / e_phi
    else:
        raise ValueError(f"unknown t1_mode {t1_mode!r}")
    return GateSchedule(gamma, k, n_odd_index, delta, T, t1, t1_mode, e_phi)


def composite_cluster_unitary(n_or_space, schedule: GateSchedule) -> LinearOperator:
    """Single-qubit layer for t1 followed by the collective gate.

    In corrected mode this equals cluster_generator(gamma) up to a global
    phase; in paper mode the deviation is physical output, measured with
    operator_distance by callers.
    """
    space = _qspace(n_or_space)
    layer = single_qubit_layer(space, schedule.E_phi, schedule.t1)
    gate = ideal_collective_gate(space, schedule.gamma)
    return LinearOperator(space, gate.matrix @ layer.matrix, "unitary")
