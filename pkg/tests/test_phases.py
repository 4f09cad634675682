"""Geometric/dynamical phase decomposition."""
import math

import numpy as np
import pytest
from scipy.integrate import simpson

import cavibus as cb
from cavibus.spaces import annihilation


# ----------------------------------------------------------------- trajectory

def test_trajectory_zero_for_m_zero(sp):
    tt = np.linspace(0, 5, 50)
    assert np.max(np.abs(cb.phase_space_trajectory(sp, 0, tt))) == 0.0


def test_trajectory_closes_and_peaks(sp):
    T = 2 * math.pi / sp.drive.delta
    r = cb.loop_radius(sp)
    traj = cb.phase_space_trajectory(sp, 2, np.array([0.0, T / 2, T]))
    assert abs(traj[0]) < 1e-14 and abs(traj[2]) < 1e-12
    assert abs(traj[1]) == pytest.approx(2 * 2 * r, abs=1e-12)


# -------------------------------------------------------------- decomposition

def test_unconventional_relation_k1(sp):
    dec = cb.decompose_phases(sp, k=1)
    assert abs(dec.gamma_total) == pytest.approx(math.pi / 8, abs=1e-8)
    assert dec.gamma_d == pytest.approx(-2 * dec.gamma_g, abs=1e-6)
    assert dec.gamma_total == pytest.approx(-dec.gamma_g, abs=1e-6)
    assert dec.gamma_total == pytest.approx(dec.gamma_g + dec.gamma_d, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("n_odd", [0, 1])
def test_unconventional_relation_across_schedules(sp, k, n_odd):
    delta = sp.cavity.g * sp.qubit.E_J * math.sqrt(k / (2 * n_odd + 1))
    tuned = sp.with_delta(delta)
    dec = cb.decompose_phases(tuned, k=k)
    assert dec.gamma_d == pytest.approx(-2 * dec.gamma_g, abs=1e-6)
    assert abs(dec.gamma_total) == pytest.approx((2 * n_odd + 1) * math.pi / 8, abs=1e-8)


def test_phases_scale_quadratically_in_g(sp):
    from dataclasses import replace
    # same delta and T, half the coupling: every term is quadratic in r
    half = replace(sp, cavity=replace(sp.cavity, g=sp.cavity.g / 2))
    d1, d2 = cb.decompose_phases(sp, 1), cb.decompose_phases(half, 1)
    for field in ("gamma_total", "gamma_g", "gamma_d", "loop_area"):
        assert getattr(d2, field) == pytest.approx(getattr(d1, field) / 4, abs=1e-9)


def test_dynamical_phase_from_matrix_oracle(sp):
    """Independent oracle: sandwich the built coupling-tier Hamiltonian between
    numerically constructed coherent vectors along the trajectory."""
    n_max = 30
    space = cb.joint_space(1, n_max)
    T = 2 * math.pi / sp.drive.delta
    tt = np.linspace(0.0, T, 801)
    m = 1
    vals = []
    fact = np.sqrt(np.array([math.factorial(n) for n in range(n_max + 1)], dtype=float))
    for t in tt:
        alpha = 1j * m * cb.b_of_t(sp, t)
        coh = np.exp(-abs(alpha) ** 2 / 2) * (alpha ** np.arange(n_max + 1)) / fact
        # qubit factor: sigma_x = +1 eigenstate so Jx acts as m = +1
        minus = np.array([1, 1]) / math.sqrt(2)
        psi = cb.StateVector(space, np.kron(coh, minus))
        h = cb.lamb_dicke_hamiltonian(sp, space, float(t))
        vals.append(cb.expectation(h, psi).real)
    gamma_d_oracle = -simpson(np.asarray(vals), x=tt) / m ** 2
    dec = cb.decompose_phases(sp, 1)
    assert dec.gamma_d == pytest.approx(gamma_d_oracle, abs=1e-6)


def test_loop_area_values(sp):
    r = cb.loop_radius(sp)
    assert cb.loop_area(sp, 1) == pytest.approx(math.pi * r * r, rel=1e-12)
    assert cb.loop_area(sp, 2) == pytest.approx(2 * math.pi * r * r, rel=1e-12)
    dec = cb.decompose_phases(sp, 1)
    assert dec.loop_area == pytest.approx(cb.loop_area(sp, 1), abs=1e-8)
    # |gamma_total| = 2 k pi r^2 = 2 * loop_area, and |gamma_g| = 2 * loop_area
    assert abs(dec.gamma_total) == pytest.approx(2 * dec.loop_area, abs=1e-7)
    assert abs(dec.gamma_g) == pytest.approx(2 * dec.loop_area, abs=1e-6)
