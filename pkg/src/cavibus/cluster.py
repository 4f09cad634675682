"""Cluster-state targets, end-to-end generation, and projective measurements.

The register starts in |0...0>; each |0> = (|minus> + |plus>)/sqrt(2) in the
sigma_x eigenbasis (|minus> = (|0>+|1>)/sqrt(2) has sigma_x = +1 under the
package sign convention).  Applying the one-shot generator with
gamma = (2n+1) pi/8 produces the cluster state.  Two constructions exist:

* "generator" (normative): apply the directly exponentiated projector-pair
  generator to the product state.
* "expansion": the literal tensor expansion sum over sigma_x branches,
  factor i carrying (-1)^{N-i} prod_{j>i} sigma_x^{(j)} on its minus branch,
  evaluated left to right.  Equivalent for the sizes asserted in tests; kept
  as a cross-check.

Measurements for one-way computation are sigma_z-basis projections; sampling
is seeded and deterministic, branch enumeration is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gates import GateSchedule, cluster_generator, composite_cluster_unitary, single_qubit_layer
from .model import SystemParams, default_step
from .propagator import (IntegratorConfig, closed_form_propagator,
                         integrate_time_ordered)
from .spaces import (DensityOperator, HilbertSpace, StateVector, basis_state,
                     fidelity, partial_trace, qubit_space)

__all__ = [
    "ClusterTarget", "MeasurementSpec", "MeasurementRecord", "GenerationResult",
    "initial_product_state", "cluster_target", "generate_cluster",
    "measure_qubit", "measurement_branches", "run_measurement_sequence",
    "reduced_purity",
]

TIERS = ("ideal", "closed_form", "lamb_dicke", "lab_frame")


def initial_product_state(n: int) -> StateVector:
    """|0...0> on the qubit register."""
    return basis_state(qubit_space(n), [0] * n)


def _check_gamma(gamma: float) -> None:
    ratio = gamma / (math.pi / 8.0)
    n = (ratio - 1.0) / 2.0
    if abs(n - round(n)) > 1e-9 or round(n) < 0:
        raise ValueError(f"gamma must be an odd multiple of pi/8, got {gamma}")


def _literal_expansion(n: int) -> np.ndarray:
    """Tensor expansion evaluated from the last qubit inward.

    Flipping every later qubit with sigma_x reverses the amplitude order of
    the suffix block, so each step interleaves (flipped +- unflipped)/sqrt(2).
    """
    amps = np.array([1.0 + 0.0j])
    for q in range(n - 1, -1, -1):
        sign = (-1.0) ** (n - 1 - q)
        flipped = sign * amps[::-1]
        out = np.empty(2 * amps.size, dtype=complex)
        out[0::2] = (flipped + amps) / math.sqrt(2.0)
        out[1::2] = (flipped - amps) / math.sqrt(2.0)
        amps = out
    return amps / (2 ** (n / 2.0))


@dataclass(frozen=True)
class ClusterTarget:
    N: int
    state: StateVector
    construction: str


def cluster_target(n: int, gamma: float = math.pi / 8.0,
                   construction: str = "generator") -> ClusterTarget:
    """Cluster state of n qubits for gamma = (2m+1) pi/8."""
    _check_gamma(gamma)
    if construction == "generator":
        psi = cluster_generator(n, gamma) @ initial_product_state(n)
    elif construction == "expansion":
        psi = StateVector(qubit_space(n), _literal_expansion(n))
    else:
        raise ValueError(f"unknown construction {construction!r}")
    return ClusterTarget(n, psi, construction)


@dataclass(frozen=True)
class GenerationResult:
    state: object            # StateVector (ideal tier) or DensityOperator
    fidelity: float
    tier: str
    cavity_init: tuple
    target: ClusterTarget


def _parse_cavity_init(cavity_init) -> tuple:
    if isinstance(cavity_init, int):
        return ("fock", cavity_init)
    kind, value = cavity_init
    if kind not in ("fock", "thermal"):
        raise ValueError(f"unknown cavity init {cavity_init!r}")
    return (kind, value)


def _coupled_stage(sp: SystemParams, schedule: GateSchedule, tier: str,
                   space: HilbertSpace, psi0: StateVector,
                   cfg: IntegratorConfig | None) -> StateVector:
    if tier == "closed_form":
        u = closed_form_propagator(sp, space, schedule.T)
        return u @ psi0
    from .model import lab_frame_terms, lamb_dicke_terms
    terms = lamb_dicke_terms(sp, space) if tier == "lamb_dicke" else lab_frame_terms(sp, space)
    if cfg is None:
        cfg = IntegratorConfig(method="cf4", dt=default_step(sp, tier))
    return integrate_time_ordered(terms, (0.0, schedule.T), cfg, initial=psi0)


def generate_cluster(sp: SystemParams, schedule: GateSchedule,
                     tier: str = "ideal", cavity_init=0,
                     n_max: int | None = None,
                     cfg: IntegratorConfig | None = None) -> GenerationResult:
    """Run the single-qubit stage then the coupled stage and score the result.

    tier "ideal" composes the exact unitaries on the qubit register; the
    cavity tiers start the cavity in `cavity_init` (a Fock integer,
    ("fock", n), or ("thermal", nbar)), trace it out after the loop, and
    return the reduced register state.  Thermal inputs are evolved as an
    exact Boltzmann-weighted Fock mixture.  The detuning is retuned to the
    schedule when the two disagree.
    """
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}; expected one of {TIERS}")
    n = sp.num_qubits
    target = cluster_target(n, schedule.gamma)
    if abs(sp.drive.delta - schedule.delta) > 1e-12 * abs(schedule.delta):
        sp = sp.with_delta(schedule.delta)

    init = _parse_cavity_init(cavity_init)
    if tier == "ideal":
        psi = composite_cluster_unitary(n, schedule) @ initial_product_state(n)
        return GenerationResult(psi, fidelity(target.state, psi), tier, init, target)

    space = sp.space(n_max)
    layer = single_qubit_layer(n, schedule.E_phi, schedule.t1).matrix
    layer_full = np.kron(np.eye(space.cavity_dim, dtype=complex), layer)

    def run_fock(fock_n: int) -> DensityOperator:
        psi0 = basis_state(space, [0] * n, fock_n)
        psi0 = StateVector(space, layer_full @ psi0.amplitudes)
        psi1 = _coupled_stage(sp, schedule, tier, space, psi0, cfg)
        return partial_trace(psi1, range(n))

    if init[0] == "fock":
        rho = run_fock(int(init[1]))
    else:
        from .opensys import thermal_weights  # local import: opensys uses this module
        weights = thermal_weights(float(init[1]), space.cavity_dim)
        mix = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for fock_n, w in enumerate(weights):
            if w < 1e-14:
                continue
            mix += w * run_fock(fock_n).matrix
        rho = DensityOperator(qubit_space(n), mix)
    return GenerationResult(rho, fidelity(target.state, rho), tier, init, target)


@dataclass(frozen=True)
class MeasurementSpec:
    qubit_index: int
    basis: str = "z"
    rng_seed: int = 0

    def __post_init__(self):
        if self.basis != "z":
            raise ValueError("projective measurements are sigma_z basis only")


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: int
    probability: float
    post_state: StateVector | None


def _branch(state: StateVector, qubit: int, outcome: int) -> MeasurementRecord:
    idx = np.arange(state.space.dim)
    mask = ((idx >> qubit) & 1) == outcome
    amps = np.where(mask, state.amplitudes, 0.0)
    p = float(np.sum(np.abs(amps) ** 2))
    if p < 1e-300:
        return MeasurementRecord(outcome, 0.0, None)
    return MeasurementRecord(outcome, p, StateVector(state.space, amps / math.sqrt(p)))


def measurement_branches(state: StateVector, qubit: int) -> tuple[MeasurementRecord, MeasurementRecord]:
    """Both collapse branches of a sigma_z measurement, exactly."""
    if not 0 <= qubit < state.space.num_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    rec0, rec1 = _branch(state, qubit, 0), _branch(state, qubit, 1)
    return rec0, rec1


def measure_qubit(state: StateVector, spec: MeasurementSpec,
                  rng: np.random.Generator | None = None) -> MeasurementRecord:
    """Sampled sigma_z measurement; the generator is seeded from the spec
    unless an explicit one is passed (for sequences)."""
    rec0, rec1 = measurement_branches(state, spec.qubit_index)
    if rng is None:
        rng = np.random.default_rng(spec.rng_seed)
    return rec1 if rng.random() < rec1.probability else rec0


def run_measurement_sequence(state: StateVector, qubits, seed: int = 0) -> list[MeasurementRecord]:
    """Measure the listed qubits in order on the successively collapsed state."""
    rng = np.random.default_rng(seed)
    records = []
    for q in qubits:
        rec = measure_qubit(state, MeasurementSpec(q, rng_seed=seed), rng=rng)
        records.append(rec)
        if rec.post_state is None:
            break
        state = rec.post_state
    return records


def reduced_purity(state, qubit: int) -> float:
    """Tr(rho_qubit^2) of one qubit's reduced state; 1/2 means maximally mixed."""
    return partial_trace(state, qubit).purity()
