"""Geometric / dynamical decomposition of the collective gate phase.

Per Jx eigenvalue m the cavity is dragged around a closed circle; starting
from vacuum the coherent amplitude is alpha_m(t) = i m B(t) (the factor i is
fixed by the closed-form propagator, whose m-block is a displacement by
i m B).  The dynamical phase is the standard coherent-path expectation

    gamma_d = -(1/hbar) integral_0^T <alpha_m(t)| H_m(t) |alpha_m(t)> dt,

with H_m the first-order coupling tier at Jx -> m, and the geometric part is
gamma_g = gamma_total - gamma_d.  All three are quoted per unit m^2 (they are
m-independent in that normalization, which decompose_phases verifies).  For a
closed k-loop the decomposition satisfies gamma_d = -2 gamma_g, hence
gamma_total = -gamma_g: the total phase is proportional to the enclosed area
alone, |gamma_total| = 2 * loop_area.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import IntegrationError
from .propagator import b_of_t, loop_radius, phase_exponent

__all__ = ["PhaseDecomposition", "phase_space_trajectory", "decompose_phases",
           "loop_area"]


@dataclass(frozen=True)
class PhaseDecomposition:
    """Total, geometric and dynamical phase per unit squared Jx eigenvalue,
    plus the phase-space area enclosed per unit m^2 (k traversals counted)."""

    gamma_total: float
    gamma_g: float
    gamma_d: float
    loop_area: float

    def to_dict(self) -> dict:
        return {"gamma_total": self.gamma_total, "gamma_g": self.gamma_g,
                "gamma_d": self.gamma_d, "loop_area": self.loop_area}


def phase_space_trajectory(sp, m: int, times) -> np.ndarray:
    """Circle alpha_m(t) = m B(t) of radius |m| r, traversed k times over a
    closed schedule (orientation/phase conventions live in decompose_phases)."""
    return m * b_of_t(sp, np.asarray(times, dtype=float))


def _dynamical_phase(sp, m: int, times: np.ndarray) -> float:
    """Coherent-path expectation quadrature for one Jx eigenvalue."""
    eta = sp.cavity.g * sp.qubit.E_J / 4.0
    delta = sp.drive.delta
    alpha = 1j * m * b_of_t(sp, times)
    # <alpha| i eta m (a^dag e^{i d t} - a e^{-i d t}) |alpha>
    expval = (1j * eta * m * (np.exp(1j * delta * times) * np.conj(alpha)
                              - np.exp(-1j * delta * times) * alpha)).real
    return -float(simpson(expval, x=times))


def decompose_phases(sp, k: int = 1, points_per_loop: int = 2000,
                     tolerance: float = 1e-8) -> PhaseDecomposition:
    """Split the collective phase of a closed k-loop schedule.

    gamma_total comes from the closed-form phase exponent at T = 2 k pi /
    delta; gamma_d from Simpson quadrature of the coherent-path energy
    expectation (computed at m = 1 and m = 2 and required to agree per unit
    m^2); the loop area from |Im contour-integral(conj(alpha) d alpha)| / 2.
    """
    delta = sp.drive.delta
    T = 2 * math.pi * k / delta
    n_pts = 2 * (points_per_loop * k // 2) + 1
    times = np.linspace(0.0, T, n_pts)

    gamma_total = phase_exponent(sp, T).imag
    gd = [_dynamical_phase(sp, m, times) / m ** 2 for m in (1, 2)]
    if abs(gd[0] - gd[1]) > max(tolerance, 1e-10 * abs(gd[0])):
        raise IntegrationError(
            f"dynamical phase not m-independent: {gd[0]} vs {gd[1]}")
    gamma_d = gd[0]
    gamma_g = gamma_total - gamma_d

    alpha = 1j * b_of_t(sp, times)  # m = 1 trajectory
    dalpha = loop_radius(sp) * delta * np.exp(1j * delta * times)  # d(iB)/dt
    area = abs(simpson((np.conj(alpha) * dalpha).imag, x=times)) / 2.0
    return PhaseDecomposition(gamma_total, gamma_g, gamma_d, area)


def loop_area(sp, k: int = 1) -> float:
    """Enclosed phase-space area per unit m^2: k pi r^2 for k traversals."""
    r = loop_radius(sp)
    return k * math.pi * r * r
