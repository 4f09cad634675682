"""Thermal cavity states, Lindblad evolution, scans, and feasibility numbers.

Noise model: cavity photon loss at kappa = omega_c / Q, per-qubit pure
dephasing in the sigma_z basis at rate 1/(2 T_d) per collapse operator
sigma_z (so coherences decay as e^{-t/T_d}), and optional per-qubit
relaxation sigma^- at rate 1/(2 gamma_q).  gamma_q is the qubit lifetime;
the name avoids the collision with the gate phase gamma.

Master-equation runs use fixed-step RK4 on the density matrix (D^2 scaling),
guarded to N <= 3 and n_max <= 15 unless forced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cluster import generate_cluster
from .errors import IntegrationError, TruncationError
from .gates import GateSchedule, solve_schedule
from .model import SystemParams, default_step
from .propagator import TermHamiltonian
from . import _backend
from .spaces import (DensityOperator, HilbertSpace, LinearOperator, PAULI_Z,
                     SIGMA_MINUS, annihilation, basis_state,
                     embed_cavity_operator, embed_qubit_operator)

__all__ = [
    "NoiseParams", "FeasibilityReport", "thermal_weights", "thermal_state",
    "cavity_decay", "dephasing_collapse", "relaxation_collapse",
    "lindblad_evolve", "thermal_insensitivity_scan", "feasibility_report",
]

LINDBLAD_MAX_QUBITS = 3
LINDBLAD_MAX_FOCK = 15


@dataclass(frozen=True)
class NoiseParams:
    """Cavity quality factor and decay rate, qubit dephasing time, thermal
    occupation.  kappa * Q = omega_c is enforced."""

    Q: float
    kappa: float
    qubit_T_d: float
    cavity_nbar: float = 0.0

    def __post_init__(self):
        if min(self.Q, self.kappa, self.qubit_T_d) <= 0 or self.cavity_nbar < 0:
            raise ValueError("noise parameters must be positive (nbar >= 0)")

    @classmethod
    def from_quality(cls, omega_c: float, Q: float, T_d: float,
                     nbar: float = 0.0) -> "NoiseParams":
        return cls(Q=Q, kappa=omega_c / Q, qubit_T_d=T_d, cavity_nbar=nbar)

    def check_consistency(self, omega_c: float) -> None:
        if abs(self.kappa * self.Q - omega_c) > 1e-12 * omega_c:
            raise ValueError("kappa * Q != omega_c")


def thermal_weights(nbar: float, levels: int, tail_tol: float = 1e-8) -> np.ndarray:
    """Boltzmann Fock weights with mean nbar, renormalized after truncation.

    Raises TruncationError if the untruncated distribution keeps more than
    tail_tol of its weight beyond level levels - 3 (the cutoff guard band).
    """
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if nbar == 0.0:
        w = np.zeros(levels)
        w[0] = 1.0
        return w
    n = np.arange(levels)
    w = (nbar / (1.0 + nbar)) ** n / (1.0 + nbar)
    guard = max(levels - 2, 1)
    tail = (nbar / (1.0 + nbar)) ** guard  # survival beyond guard - 1
    if tail > tail_tol:
        raise TruncationError(
            f"thermal tail {tail:.3e} beyond level {guard - 1} exceeds "
            f"{tail_tol:g}; increase n_max")
    return w / w.sum()


def thermal_state(space: HilbertSpace, nbar: float) -> DensityOperator:
    """Qubits in |0...0|, cavity in the Boltzmann mixture with mean nbar."""
    if not space.has_cavity:
        raise ValueError("thermal_state needs a cavity factor")
    w = thermal_weights(nbar, space.cavity_dim)
    ground = basis_state(HilbertSpace(space.num_qubits), [0] * space.num_qubits)
    rho_q = np.outer(ground.amplitudes, ground.amplitudes.conj())
    return DensityOperator(space, np.kron(np.diag(w).astype(complex), rho_q))


def cavity_decay(space: HilbertSpace, kappa: float) -> list[tuple[LinearOperator, float]]:
    return [(embed_cavity_operator(space, annihilation(space.cavity_dim)), kappa)]


def dephasing_collapse(space: HilbertSpace, T_d: float) -> list[tuple[LinearOperator, float]]:
    """sigma_z collapse per qubit at rate 1/(2 T_d): coherence decay e^{-t/T_d}."""
    rate = 1.0 / (2.0 * T_d)
    return [(embed_qubit_operator(space, j, PAULI_Z), rate)
            for j in range(space.num_qubits)]


def relaxation_collapse(space: HilbertSpace, gamma_q: float) -> list[tuple[LinearOperator, float]]:
    rate = 1.0 / (2.0 * gamma_q)
    return [(embed_qubit_operator(space, j, SIGMA_MINUS), rate)
            for j in range(space.num_qubits)]


def lindblad_evolve(h, collapse_ops, rho0: DensityOperator, t_span,
                    dt: float | None = None, tolerance: float = 1e-8,
                    force_large: bool = False) -> DensityOperator:
    """Fixed-step RK4 master equation
    drho/dt = -i[H, rho] + sum_j rate_j (L rho L^dag - {L^dag L, rho}/2).

    h is a TermHamiltonian or a constant matrix/LinearOperator; collapse_ops
    is a list of (operator, rate).  Trace preservation and final-state
    positivity are monitored against `tolerance` (positivity floor -1e-6).
    """
    space = rho0.space
    if not force_large and (space.num_qubits > LINDBLAD_MAX_QUBITS or
                            (space.fock_cutoff or 0) > LINDBLAD_MAX_FOCK):
        raise ValueError(
            f"master-equation guard: N <= {LINDBLAD_MAX_QUBITS} and n_max <= "
            f"{LINDBLAD_MAX_FOCK} unless force_large=True")
    try:
        t0, t1 = t_span
    except TypeError:
        t0, t1 = 0.0, float(t_span)
    span = t1 - t0
    if span == 0:
        return rho0

    if isinstance(h, TermHamiltonian):
        mats = h.stack
        coeff_fn = h.coeff_fn
    else:
        mats = np.asarray([h.matrix if isinstance(h, LinearOperator) else np.asarray(h)],
                          dtype=complex)
        coeff_fn = lambda times: np.ones((len(times), 1), dtype=complex)

    if dt is None:
        dt = span / 2000.0
    n_steps = max(1, math.ceil(span / dt - 1e-12))
    dt_eff = span / n_steps
    starts = t0 + dt_eff * np.arange(n_steps)
    nodes = np.stack([starts, starts + 0.5 * dt_eff, starts + dt_eff], axis=1)
    coeffs = np.asarray(coeff_fn(nodes.ravel()), dtype=complex).reshape(n_steps, 3, -1)

    ops = [(op.matrix if isinstance(op, LinearOperator) else np.asarray(op, dtype=complex), rate)
           for op, rate in collapse_ops]
    c_stack = np.asarray([op for op, _ in ops], dtype=complex).reshape(-1, space.dim, space.dim)
    rates = np.asarray([rate for _, rate in ops], dtype=float)
    if np.any(rates < 0):
        raise ValueError("collapse rates must be >= 0")

    rho = _backend.lindblad_rk4(mats, coeffs, c_stack, rates, rho0.matrix, dt_eff)

    tr_drift = abs(np.trace(rho).real - 1.0)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if tr_drift > tolerance or herm > tolerance:
        raise IntegrationError(
            f"Lindblad run drifted: |tr-1| = {tr_drift:.3e}, hermiticity "
            f"defect {herm:.3e} (tolerance {tolerance:g})")
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if min_eig < -1e-6:
        raise IntegrationError(f"Lindblad positivity violated: min eig {min_eig:.3e}")
    return DensityOperator(space, rho, validate=False)


def thermal_insensitivity_scan(sp: SystemParams, schedule: GateSchedule,
                               inits, tier: str = "lamb_dicke",
                               n_max: int | None = None, cfg=None) -> list[tuple[str, float]]:
    """Cluster fidelity versus initial cavity state.

    `inits` is a list of Fock integers and/or ("thermal", nbar) pairs; rows
    come back as (label, fidelity).  At loop closure the first-order tier is
    insensitive to the entries; the exact tier shows a finite spread.
    """
    rows = []
    for init in inits:
        if isinstance(init, int):
            label = f"fock_{init}"
        elif init[0] == "thermal":
            label = f"thermal_{init[1]:g}"
        else:
            label = f"{init[0]}_{init[1]:g}"
        result = generate_cluster(sp, schedule, tier=tier, cavity_init=init,
                                  n_max=n_max, cfg=cfg)
        rows.append((label, result.fidelity))
    return rows


@dataclass(frozen=True)
class FeasibilityReport:
    """Derived timescales and figures of merit, in reporting units."""

    tau_us: float
    delta_rad_ns: float
    T_ns: float
    t1_paper_ns: float
    t1_corrected_ns: float
    t_k_ns: float
    strong_coupling_figure: float
    flags: dict

    def to_dict(self) -> dict:
        d = {
            "tau": {"value": self.tau_us, "unit": "us"},
            "delta": {"value": self.delta_rad_ns, "unit": "rad/ns"},
            "T": {"value": self.T_ns, "unit": "ns"},
            "t1_paper": {"value": self.t1_paper_ns, "unit": "ns"},
            "t1_corrected": {"value": self.t1_corrected_ns, "unit": "ns"},
            "t_k": {"value": self.t_k_ns, "unit": "ns"},
            "strong_coupling_figure": self.strong_coupling_figure,
        }
        d["flags"] = dict(self.flags)
        return d


def feasibility_report(sp: SystemParams, noise: NoiseParams, omega_rabi: float,
                       gamma_q: float, N: int | None = None, k: int = 1,
                       n_odd_index: int = 0) -> FeasibilityReport:
    """Compute tau = Q/omega_c, the schedule times, and Omega^2 tau gamma_q.

    omega_rabi (vacuum Rabi frequency) and all rates are rad/ns; gamma_q is
    the qubit lifetime in ns.  Flags: the total manipulation time must sit
    well under both tau and T_d (ratio < 0.1) and the strong-coupling figure
    well above 1 (> 100).
    """
    noise.check_consistency(sp.cavity.omega_c)
    n_qubits = N or sp.num_qubits
    tau_ns = noise.Q / sp.cavity.omega_c
    sched_paper = solve_schedule(sp, n_qubits, k, n_odd_index, "paper")
    sched_corr = solve_schedule(sp, n_qubits, k, n_odd_index, "corrected")
    t_k = sched_paper.t1 + sched_paper.T
    figure = omega_rabi ** 2 * tau_ns * gamma_q
    flags = {
        "t_k_below_cavity_decay": bool(t_k < 0.1 * tau_ns),
        "t_k_below_qubit_dephasing": bool(t_k < 0.1 * noise.qubit_T_d),
        "strong_coupling": bool(figure > 100.0),
    }
    return FeasibilityReport(
        tau_us=tau_ns / 1e3,
        delta_rad_ns=sched_paper.delta,
        T_ns=sched_paper.T,
        t1_paper_ns=sched_paper.t1,
        t1_corrected_ns=sched_corr.t1,
        t_k_ns=t_k,
        strong_coupling_figure=figure,
        flags=flags,
    )
