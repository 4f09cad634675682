"""Physical parameters, units, and Hamiltonian builders.

Unit system: hbar = 1; energies and angular frequencies in rad/ns (so
1 GHz of angular frequency = 1 rad/ns) and times in ns.  Energies given in
micro-eV convert through hbar = 0.6582119569 ueV ns.  Public inputs accept
either unit with an explicit tag; everything internal is rad/ns.

The package models two strictly sequential stages: the single-qubit stage
(static flux, no cavity coupling, Hamiltonian -E_ce sigma_z - E(Phi) sigma_x)
and the coupled stage (flux swept linearly, pi Phi / phi_0 = omega t), for
which two tiers exist:

* exact tier: H(t) = omega_c (a^dag a + 1/2)
      - (E_J/2) sum_j [sigma^+_j D(-i g/2) e^{-i omega t} + h.c.],
  with the displacement-type coupling factor built exactly; requires the
  qubits at the charge degeneracy point (gate_charge = 1/2), where the
  charging term vanishes.
* first-order tier (Lamb-Dicke limit, rotating-wave approximation, cavity
  interaction picture): H(t) = (i g E_J / 4)(a^dag e^{i delta t}
      - a e^{-i delta t}) J_x.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, asdict, replace
from typing import Any

import numpy as np

from .errors import AdvisoryWarning
from .propagator import TermHamiltonian
from .spaces import (HilbertSpace, LinearOperator, PAULI_X, PAULI_Z,
                     SIGMA_PLUS, annihilation, collective_jx,
                     displacement_matrix, embed_qubit_operator, number_operator,
                     qubit_space)

__all__ = [
    "HBAR_UEV_NS", "to_angular", "to_time_ns", "ueV_to_angular", "angular_to_ueV",
    "QubitParams", "CavityParams", "DriveParams", "SystemParams",
    "default_params", "josephson_energy", "effective_charging",
    "single_qubit_hamiltonian", "lamb_dicke_hamiltonian", "lamb_dicke_terms",
    "lab_frame_hamiltonian", "lab_frame_terms", "interaction_frame",
    "default_step",
]

HBAR_UEV_NS = 0.6582119569  # ueV * ns

_FREQ_SCALE = {"rad/ns": 1.0, "GHz": 1.0, "MHz": 1e-3, "ueV": 1.0 / HBAR_UEV_NS}
_TIME_SCALE = {"ns": 1.0, "us": 1e3, "ps": 1e-3, "s": 1e9}


def ueV_to_angular(value: float) -> float:
    return value / HBAR_UEV_NS


def angular_to_ueV(value: float) -> float:
    return value * HBAR_UEV_NS


def _convert(value: Any, scales: dict[str, float], what: str) -> float:
    if isinstance(value, dict):
        try:
            v, unit = value["value"], value["unit"]
        except KeyError as exc:
            raise ValueError(f"{what}: tagged quantity needs value and unit") from exc
        if unit not in scales:
            raise ValueError(f"{what}: unknown unit {unit!r} (allowed: {sorted(scales)})")
        return float(v) * scales[unit]
    return float(value)


def to_angular(value: Any) -> float:
    """Energy / angular frequency to rad/ns; bare numbers pass through."""
    return _convert(value, _FREQ_SCALE, "frequency")


def to_time_ns(value: Any) -> float:
    return _convert(value, _TIME_SCALE, "time")


@dataclass(frozen=True)
class QubitParams:
    """Charge-qubit energies (rad/ns), gate charge in [0,1], flux in phi_0 units."""

    E_c: float
    E_J: float
    gate_charge: float = 0.5
    flux: float = 0.0

    def __post_init__(self):
        if self.E_c <= 0 or self.E_J <= 0:
            raise ValueError("E_c and E_J must be positive")
        if not 0.0 <= self.gate_charge <= 1.0:
            raise ValueError("gate_charge must lie in [0, 1]")
        if self.E_c < 5.0 * self.E_J:
            warnings.warn(
                f"charging regime advisory: E_c = {self.E_c:.3g} < 5 E_J",
                AdvisoryWarning, stacklevel=3)


@dataclass(frozen=True)
class CavityParams:
    """Cavity frequency (rad/ns), dimensionless coupling g, Fock cutoff."""

    omega_c: float
    g: float
    n_max: int

    def __post_init__(self):
        if self.omega_c <= 0:
            raise ValueError("omega_c must be positive")
        if self.g <= 0:
            raise ValueError("g must be positive")
        if self.g > 0.1:
            warnings.warn(f"Lamb-Dicke advisory: g = {self.g:.3g} > 0.1",
                          AdvisoryWarning, stacklevel=3)
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")


@dataclass(frozen=True)
class DriveParams:
    """Flux-drive angular frequency and detuning delta = omega_c - omega."""

    omega: float
    delta: float


@dataclass(frozen=True)
class SystemParams:
    qubit: QubitParams
    cavity: CavityParams
    drive: DriveParams
    num_qubits: int

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        gap = abs(self.cavity.omega_c - self.drive.omega - self.drive.delta)
        if gap > 1e-12 * max(1.0, self.cavity.omega_c):
            raise ValueError("drive invariant violated: delta != omega_c - omega")
        if abs(self.drive.delta) > 0.1 * abs(self.drive.omega):
            warnings.warn(
                f"detuning advisory: |delta| = {abs(self.drive.delta):.3g} "
                f"not small against omega = {self.drive.omega:.3g}",
                AdvisoryWarning, stacklevel=3)

    def with_delta(self, delta: float) -> "SystemParams":
        """Same system retuned to a new detuning (omega = omega_c - delta)."""
        return replace(self, drive=DriveParams(self.cavity.omega_c - delta, delta))

    def space(self, n_max: int | None = None) -> HilbertSpace:
        return HilbertSpace(self.num_qubits, n_max or self.cavity.n_max)

    def to_dict(self) -> dict:
        return {
            "E_c": {"value": angular_to_ueV(self.qubit.E_c), "unit": "ueV"},
            "E_J": {"value": angular_to_ueV(self.qubit.E_J), "unit": "ueV"},
            "gate_charge": self.qubit.gate_charge,
            "flux": self.qubit.flux,
            "omega_c": {"value": self.cavity.omega_c, "unit": "rad/ns"},
            "g": self.cavity.g,
            "n_max": self.cavity.n_max,
            "delta": {"value": self.drive.delta, "unit": "rad/ns"},
            "num_qubits": self.num_qubits,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SystemParams":
        """Build from the flat parameter-file schema (see README)."""
        d = dict(d)
        qubit = QubitParams(
            E_c=to_angular(d.pop("E_c")),
            E_J=to_angular(d.pop("E_J")),
            gate_charge=float(d.pop("gate_charge", 0.5)),
            flux=float(d.pop("flux", 0.0)),
        )
        cavity = CavityParams(
            omega_c=to_angular(d.pop("omega_c")),
            g=float(d.pop("g")),
            n_max=int(d.pop("n_max")),
        )
        num_qubits = int(d.pop("num_qubits"))
        if "delta" in d:
            delta = to_angular(d.pop("delta"))
        elif "omega" in d:
            delta = cavity.omega_c - to_angular(d.pop("omega"))
        else:
            raise ValueError("parameter file must give delta or omega")
        d.pop("omega", None)
        if d:
            raise ValueError(f"unknown parameter keys: {sorted(d)}")
        drive = DriveParams(cavity.omega_c - delta, delta)
        return cls(qubit, cavity, drive, num_qubits)

    @classmethod
    def from_json_file(cls, path) -> "SystemParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def default_params(num_qubits: int = 2, n_max: int = 25, k: int = 1,
                   n_odd_index: int = 0) -> SystemParams:
    """Reference charge-qubit/cavity parameter set.

    E_J = 40 ueV, E_c = 200 ueV, g = 1e-2, omega_c = 30 rad/ns, qubits at the
    degeneracy point, zero static flux, and the detuning pre-tuned to close a
    k-loop with collective phase (2 n + 1) pi / 8.
    """
    qubit = QubitParams(E_c=ueV_to_angular(200.0), E_J=ueV_to_angular(40.0))
    cavity = CavityParams(omega_c=30.0, g=1e-2, n_max=n_max)
    delta = cavity.g * qubit.E_J * math.sqrt(k / (2 * n_odd_index + 1))
    drive = DriveParams(cavity.omega_c - delta, delta)
    return SystemParams(qubit, cavity, drive, num_qubits)


def josephson_energy(qp: QubitParams) -> float:
    """Flux-tunable Josephson energy E(Phi) = E_J cos(pi Phi / phi_0)."""
    return qp.E_J * math.cos(math.pi * qp.flux)


def effective_charging(qp: QubitParams) -> float:
    """Effective charging energy E_ce = 2 E_c (1 - 2 n_gate)."""
    return 2.0 * qp.E_c * (1.0 - 2.0 * qp.gate_charge)


def single_qubit_hamiltonian(qp: QubitParams) -> LinearOperator:
    """Two-level Hamiltonian -E_ce sigma_z - E(Phi) sigma_x."""
    mat = -effective_charging(qp) * PAULI_Z - josephson_energy(qp) * PAULI_X
    return LinearOperator(qubit_space(1), mat, "hermitian")


def lamb_dicke_terms(sp: SystemParams, space: HilbertSpace) -> TermHamiltonian:
    """First-order coupling tier in factored form for the integrators."""
    if not space.has_cavity:
        raise ValueError("coupled-stage Hamiltonians need a cavity factor")
    eta = sp.cavity.g * sp.qubit.E_J / 4.0
    a = annihilation(space.cavity_dim)
    jx = collective_jx(HilbertSpace(space.num_qubits)).matrix
    up = 1j * eta * np.kron(a.conj().T, jx)
    down = -1j * eta * np.kron(a, jx)
    delta = sp.drive.delta

    def coeffs(times: np.ndarray) -> np.ndarray:
        ph = np.exp(1j * delta * np.asarray(times, dtype=float))
        return np.stack([ph, np.conj(ph)], axis=-1)

    return TermHamiltonian(space, (up, down), coeffs, "lamb_dicke")


def lamb_dicke_hamiltonian(sp: SystemParams, space: HilbertSpace, t: float) -> LinearOperator:
    """(i g E_J / 4)(a^dag e^{i delta t} - a e^{-i delta t}) J_x at time t."""
    return LinearOperator(space, lamb_dicke_terms(sp, space)(t), "hermitian")


def lab_frame_terms(sp: SystemParams, space: HilbertSpace) -> TermHamiltonian:
    """Exact coupled-stage tier in factored form.

    Requires gate_charge = 1/2: away from the degeneracy point the swept-flux
    stage is not modeled (the charging term is switched off there).
    """
    if not space.has_cavity:
        raise ValueError("coupled-stage Hamiltonians need a cavity factor")
    if abs(sp.qubit.gate_charge - 0.5) > 1e-12:
        raise ValueError("exact coupled-stage tier requires gate_charge = 1/2")
    dc = space.cavity_dim
    h0 = sp.cavity.omega_c * np.kron(
        number_operator(dc) + 0.5 * np.eye(dc), np.eye(space.qubit_dim))
    disp = displacement_matrix(-0.5j * sp.cavity.g, dc)
    raising = sum(embed_qubit_operator(HilbertSpace(space.num_qubits), j, SIGMA_PLUS).matrix
                  for j in range(space.num_qubits))
    coupling = -(sp.qubit.E_J / 2.0) * np.kron(disp, raising)
    omega = sp.drive.omega

    def coeffs(times: np.ndarray) -> np.ndarray:
        ph = np.exp(-1j * omega * np.asarray(times, dtype=float))
        return np.stack([np.ones_like(ph), ph, np.conj(ph)], axis=-1)

    return TermHamiltonian(space, (h0, coupling, coupling.conj().T), coeffs, "lab_frame")


def lab_frame_hamiltonian(sp: SystemParams, space: HilbertSpace, t: float) -> LinearOperator:
    """Cavity energy plus the exact displacement-type drive coupling at time t."""
    return LinearOperator(space, lab_frame_terms(sp, space)(t), "hermitian")


def interaction_frame(space: HilbertSpace, omega_c: float, t: float) -> LinearOperator:
    """Free-cavity frame rotation U_0 = exp(-i omega_c (a^dag a + 1/2) t)."""
    if not space.has_cavity:
        raise ValueError("interaction frame needs a cavity factor")
    n = np.arange(space.cavity_dim)
    phases = np.exp(-1j * omega_c * (n + 0.5) * t)
    mat = np.kron(np.diag(phases), np.eye(space.qubit_dim, dtype=complex))
    return LinearOperator(space, mat, "unitary")


def default_step(sp: SystemParams, tier: str) -> float:
    """Default integrator step: resolve the fastest oscillation with >= 200
    points (exact tier) or the loop with >= 500 points (first-order tier)."""
    if tier == "lab_frame":
        return min(2 * math.pi / abs(sp.drive.omega),
                   2 * math.pi / abs(sp.drive.delta)) / 200.0
    return (2 * math.pi / abs(sp.drive.delta)) / 500.0
