"""Physical <-> mass-Lagrangian coordinates and the moving interfaces."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, NonMonotone

log = logging.getLogger(__name__)


@dataclass
class LagrangianProfile:
    """Result of mapping a physical profile onto y in [0, 1]."""

    y: np.ndarray  # uniform cell centres
    phi: np.ndarray
    y_of_x: PchipInterpolator  # monotone map x -> y
    x_of_y: PchipInterpolator  # its inverse
    s1: float
    s2: float
    mass: float  # integral of phi dx before normalisation


def to_mass_lagrangian(x, phi, n: int) -> LagrangianProfile:
    """Map phi sampled on a physical grid x in [-S1, S2] to n uniform y-cells.

    y(x) is the cumulative trapezoid of phi.  A profile whose total polymer
    mass differs from 1 by more than 1e-8 is rescaled (with a warning).
    """
    x = np.asarray(x, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if x.shape != phi.shape or x.ndim != 1 or len(x) < 2:
        raise DomainError("x and phi must be 1-D arrays of equal length >= 2")
    if not np.all((phi > 0) & (phi < 1)):
        raise DomainError("phi must lie in (0, 1)")
    if not np.all(np.diff(x) > 0):
        raise NonMonotone("physical grid must be strictly increasing")
    y = cumulative_trapezoid(phi, x, initial=0.0)
    mass = y[-1]
    if abs(mass - 1.0) > 1e-8:
        log.warning("total polymer mass %.12g != 1; rescaling", mass)
    y = y / mass
    if not np.all(np.diff(y) > 0):
        raise NonMonotone("cumulative polymer mass is not strictly increasing")
    y[-1] = 1.0
    y_of_x = PchipInterpolator(x, y)
    x_of_y = PchipInterpolator(y, x)
    phi_of_y = PchipInterpolator(y, phi)
    yc = (np.arange(n) + 0.5) / n
    return LagrangianProfile(yc, phi_of_y(yc), y_of_x, x_of_y, -x[0], x[-1], mass)


def node_values(psi, psi_star):
    """Cell values padded with the Dirichlet value at y = 0 and y = 1."""
    psi = np.asarray(psi, dtype=float)
    n = len(psi)
    y = np.concatenate([[0.0], (np.arange(n) + 0.5) / n, [1.0]])
    return y, np.concatenate([[psi_star], psi, [psi_star]])


def reconstruct_x(psi, s1: float, psi_star: float):
    """Physical positions x(y) = -S1 + int_0^y psi dy' on the node set.

    Nodes are y = 0, the n cell centres and y = 1; the boundary nodes carry
    the Dirichlet value psi_star.
    """
    y, vals = node_values(psi, psi_star)
    return y, -s1 + cumulative_trapezoid(vals, y, initial=0.0)


def domain_length(psi, psi_star) -> float:
    y, vals = node_values(psi, psi_star)
    return float(np.trapezoid(vals, y))


def physical_mass(psi, psi_star):
    """Integral of phi dx over the reconstructed domain (trapezoid in x)."""
    y, vals = node_values(psi, psi_star)
    x = cumulative_trapezoid(vals, y, initial=0.0)
    phi = 1.0 / vals
    return float(np.sum(0.5 * (phi[1:] + phi[:-1]) * np.diff(x)))


@dataclass
class InterfaceTrack:
    """S1(t), S2(t) from the kinematic ODEs next to the domain-length check."""

    times: list = field(default_factory=list)
    s1: list = field(default_factory=list)
    s2: list = field(default_factory=list)
    length: list = field(default_factory=list)  # reconstructed int psi dy

    @classmethod
    def start(cls, t0: float, L: float, length: float):
        return cls([t0], [L], [L], [length])

    def residual(self):
        return np.abs(np.asarray(self.s1) + np.asarray(self.s2) - np.asarray(self.length))


def boundary_velocity(u):
    """u at y = 0 and y = 1 by zero-order extrapolation from the end cells."""
    return float(u[0]), float(u[-1])


def advance_interfaces(track: InterfaceTrack, old_state, new_state, dt: float, phi_star: float, psi_star: float):
    """Append one step of S1' = -(1-phi*) u(0), S2' = (1-phi*) u(1).

    The rate is averaged over the old and new boundary velocities.
    """
    u0_old, u1_old = boundary_velocity(old_state.u)
    u0_new, u1_new = boundary_velocity(new_state.u)
    c = 1.0 - phi_star
    track.times.append(new_state.t)
    track.s1.append(track.s1[-1] - dt * c * 0.5 * (u0_old + u0_new))
    track.s2.append(track.s2[-1] + dt * c * 0.5 * (u1_old + u1_new))
    track.length.append(domain_length(new_state.psi, psi_star))
    return track
