"""Parameters, units, and Hamiltonian builders."""
import math
import warnings

import numpy as np
import pytest

import cavibus as cb
from cavibus.errors import AdvisoryWarning
from cavibus.model import (CavityParams, DriveParams, QubitParams, SystemParams,
                           angular_to_ueV, default_step, effective_charging,
                           lab_frame_terms, lamb_dicke_terms, to_angular,
                           ueV_to_angular)
from cavibus.propagator import IntegratorConfig, integrate_time_ordered
from cavibus.spaces import PAULI_X, PAULI_Z, annihilation, operator_distance


def make_sp(E_J, omega_c, delta, g, n_max=8, num_qubits=1, E_c=None):
    qubit = QubitParams(E_c=E_c or 5 * E_J, E_J=E_J)
    cavity = CavityParams(omega_c=omega_c, g=g, n_max=n_max)
    return SystemParams(qubit, cavity, DriveParams(omega_c - delta, delta), num_qubits)


# ----------------------------------------------------------------------- units

def test_uev_roundtrip_is_identity():
    for value in (0.37, 40.0, 1234.5):
        back = angular_to_ueV(ueV_to_angular(value))
        assert abs(back - value) / value < 1e-12


def test_tagged_quantity_parsing():
    assert to_angular({"value": 40, "unit": "ueV"}) == pytest.approx(60.7706979198451)
    assert to_angular({"value": 15, "unit": "MHz"}) == pytest.approx(0.015)
    assert to_angular(2.5) == 2.5
    with pytest.raises(ValueError):
        to_angular({"value": 1, "unit": "eV"})


# ------------------------------------------------------------------ parameters

def test_param_validation_and_advisories():
    with pytest.raises(ValueError):
        QubitParams(E_c=-1.0, E_J=1.0)
    with pytest.warns(AdvisoryWarning):
        QubitParams(E_c=1.0, E_J=1.0)  # not in the charging regime
    with pytest.warns(AdvisoryWarning):
        CavityParams(omega_c=30.0, g=0.5, n_max=5)
    with pytest.warns(AdvisoryWarning):
        make_sp(E_J=1.0, omega_c=10.0, delta=5.0, g=0.01)  # delta not << omega
    with pytest.raises(ValueError):
        SystemParams(QubitParams(E_c=10, E_J=1), CavityParams(30, 0.01, 5),
                     DriveParams(omega=29.0, delta=2.0), 1)  # delta != omega_c - omega


def test_params_roundtrip_through_dict(sp):
    again = SystemParams.from_dict(sp.to_dict())
    assert again == sp
    with pytest.raises(ValueError):
        SystemParams.from_dict({**sp.to_dict(), "bogus": 1})


# ------------------------------------------------------------------ energetics

def test_josephson_energy_flux_dependence():
    base = QubitParams(E_c=1000.0, E_J=10.0)
    assert cb.josephson_energy(base) == pytest.approx(10.0)
    half = QubitParams(E_c=1000.0, E_J=10.0, flux=0.5)
    assert abs(cb.josephson_energy(half)) < 1e-12
    third = QubitParams(E_c=1000.0, E_J=10.0, flux=1 / 3)
    assert cb.josephson_energy(third) == pytest.approx(5.0)


def test_single_qubit_hamiltonian_cases():
    degenerate = QubitParams(E_c=1000.0, E_J=10.0, gate_charge=0.5)
    h = cb.single_qubit_hamiltonian(degenerate)
    assert np.allclose(h.matrix, -10.0 * PAULI_X, atol=1e-12)

    off = QubitParams(E_c=1000.0, E_J=10.0, gate_charge=0.5, flux=0.5)
    assert np.max(np.abs(cb.single_qubit_hamiltonian(off).matrix)) < 1e-11

    charge = QubitParams(E_c=1000.0, E_J=10.0, gate_charge=0.0, flux=0.5)
    assert effective_charging(charge) == pytest.approx(2000.0)
    assert np.allclose(cb.single_qubit_hamiltonian(charge).matrix,
                       -2000.0 * PAULI_Z, atol=1e-9)


# ----------------------------------------------------------- first-order tier

def test_lamb_dicke_t0_form_and_sign_flip(sp):
    space = cb.joint_space(2, 6)
    h0 = cb.lamb_dicke_hamiltonian(sp, space, 0.0)
    eta = sp.cavity.g * sp.qubit.E_J / 4
    a = annihilation(7)
    jx = cb.collective_jx(cb.qubit_space(2)).matrix
    ref = 1j * eta * np.kron(a.conj().T - a, jx)
    assert np.max(np.abs(h0.matrix - ref)) < 1e-14
    flip = cb.lamb_dicke_hamiltonian(sp, space, math.pi / sp.drive.delta)
    assert np.max(np.abs(flip.matrix + h0.matrix)) < 1e-12


def test_lamb_dicke_norm_time_independent(sp):
    space = cb.joint_space(1, 6)
    norms = [np.linalg.norm(cb.lamb_dicke_hamiltonian(sp, space, t).matrix)
             for t in (0.0, 0.4, 1.7, 5.2)]
    assert max(norms) - min(norms) < 1e-12


# ----------------------------------------------------------------- exact tier

def test_lab_frame_reduces_to_bare_drive_at_tiny_g():
    sp = make_sp(E_J=2.0, omega_c=50.0, delta=0.5, g=1e-9)
    space = cb.joint_space(2, 4)
    h = cb.lab_frame_hamiltonian(sp, space, 0.0)
    dc = space.cavity_dim
    h0 = sp.cavity.omega_c * np.kron(np.diag(np.arange(dc) + 0.5), np.eye(4))
    sum_sx = sum(cb.embed_qubit_operator(cb.qubit_space(2), j, PAULI_X).matrix
                 for j in range(2))
    ref = h0 - (sp.qubit.E_J / 2) * np.kron(np.eye(dc), sum_sx)
    assert np.max(np.abs(h.matrix - ref)) < 1e-7


def test_lab_frame_hermitian_at_random_times(sp, rng):
    space = cb.joint_space(2, 5)
    for t in rng.uniform(0, 20, size=5):
        h = cb.lab_frame_hamiltonian(sp, space, float(t))
        assert np.max(np.abs(h.matrix - h.matrix.conj().T)) < 1e-12


def test_lab_frame_requires_degeneracy_point():
    sp = make_sp(E_J=1.0, omega_c=50.0, delta=0.5, g=0.01)
    biased = SystemParams(QubitParams(E_c=5.0, E_J=1.0, gate_charge=0.3),
                          sp.cavity, sp.drive, 1)
    with pytest.raises(ValueError):
        cb.lab_frame_hamiltonian(biased, cb.joint_space(1, 4), 0.0)


def test_lab_frame_matrix_element_oracle():
    """Coupling element against the hand-expanded displacement series.

    <1_q,1_c|H|0_q,0_c> at t=0 comes from the lowering-operator branch:
    -(E_J/2) <1_c|D(ig/2)|0_c> = -(E_J/2) (i g/2) e^{-g^2/8}; the raising
    branch vanishes on |0_q> under the sign convention.  The full coupling
    block is cross-checked against a second-order expansion of the
    displacement factor on a 2-level, 3-photon space.
    """
    g = 1e-3
    sp = make_sp(E_J=2.0, omega_c=50.0, delta=0.5, g=g, n_max=2)
    space = cb.joint_space(1, 2)
    h = cb.lab_frame_hamiltonian(sp, space, 0.0).matrix

    i_00, i_10 = cb.basis_index(space, [0], 0), cb.basis_index(space, [1], 0)
    i_01 = cb.basis_index(space, [0], 1)
    i_11 = cb.basis_index(space, [1], 1)
    exact = -(sp.qubit.E_J / 2) * (1j * g / 2) * np.exp(-g * g / 8)
    assert h[i_11, i_00] == pytest.approx(exact, abs=1e-15)
    assert h[i_01, i_00] == 0.0  # diagonal in the qubit: no coupling element

    # hand expansion: D(-i g/2) ~ 1 - i(g/2)x - (g^2/8)x^2 with x = a + a^dag
    a = annihilation(3)
    x = a + a.conj().T
    d_series = np.eye(3) - 0.5j * g * x - (g * g / 8) * (x @ x)
    sx_plus = np.array([[0, 1], [0, 0]], dtype=complex)
    coupling = -(sp.qubit.E_J / 2) * (np.kron(d_series, sx_plus)
                                      + np.kron(d_series.conj().T, sx_plus.conj().T))
    dc = 3
    h0 = sp.cavity.omega_c * np.kron(np.diag(np.arange(dc) + 0.5), np.eye(2))
    assert np.max(np.abs(h - (h0 + coupling))) < 5e-9  # O(g^3)


# ------------------------------------------------------------ frame rotation

def test_interaction_frame_properties(sp):
    space = cb.joint_space(1, 6)
    assert np.allclose(cb.interaction_frame(space, 3.0, 0.0).matrix,
                       np.eye(space.dim))
    omega_c, t = 2.7, 0.83
    u0 = cb.interaction_frame(space, omega_c, t).matrix
    a_full = cb.embed_cavity_operator(space, annihilation(7)).matrix
    rotated = u0 @ a_full @ u0.conj().T
    assert np.max(np.abs(rotated - a_full * np.exp(1j * omega_c * t))) < 1e-10
    full_turn = cb.interaction_frame(space, omega_c, 2 * math.pi / omega_c).matrix
    assert np.max(np.abs(full_turn + np.eye(space.dim))) < 1e-10  # zero-point sign


# --------------------------------------------- first-order consistency (O(g))

@pytest.mark.slow
def test_cross_tier_distance_scales_with_g():
    """The exact and first-order tiers drift apart at a rate controlled by g.

    Propagators are compared mid-period (at loop closure the leading
    difference cancels by construction).  The distance ratio between g and
    g/2 runs must sit within a factor 2 of linear scaling of the metric.
    """
    def distance(g):
        sp = make_sp(E_J=0.5, omega_c=100.0, delta=0.25, g=g, n_max=8)
        space = cb.joint_space(1, 8)
        t = 0.37 * (2 * math.pi / sp.drive.delta)
        cfg = IntegratorConfig(method="cf4", dt=2 * math.pi / sp.drive.omega / 100)
        u_lab = integrate_time_ordered(lab_frame_terms(sp, space), (0.0, t), cfg)
        frame = cb.interaction_frame(space, sp.cavity.omega_c, t).matrix
        u_int = frame.conj().T @ u_lab.matrix
        cfg_eff = IntegratorConfig(method="cf4", dt=(2 * math.pi / sp.drive.delta) / 500)
        u_eff = integrate_time_ordered(lamb_dicke_terms(sp, space), (0.0, t), cfg_eff)
        safe_columns = (space.fock_cutoff - 3) * space.qubit_dim
        return operator_distance(u_int, u_eff.matrix, columns=safe_columns)

    d1, d2 = distance(1e-2), distance(5e-3)
    assert d2 > 0
    ratio = d1 / d2
    assert 1.0 <= ratio <= 4.0, f"distance ratio {ratio}"


def test_default_step_resolves_fastest_scale(sp):
    assert default_step(sp, "lab_frame") == pytest.approx(
        2 * math.pi / sp.drive.omega / 200)
    assert default_step(sp, "lamb_dicke") == pytest.approx(
        2 * math.pi / sp.drive.delta / 500)
