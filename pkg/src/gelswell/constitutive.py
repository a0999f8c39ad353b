"""Energies, the one-dimensional stress G(phi) and the flux potential F(psi).

All functions accept scalars or numpy arrays.  Volume fractions outside the
open interval (phiClampMin, 1 - phiClampMin) raise :class:`DomainError`;
nothing is clamped silently.
"""
from __future__ import annotations

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, QuadratureError
from .params import ParameterSet

QUAD_TOL = 1e-10
TABLE_KNOTS = 4096


def _as_array(x):
    return np.asarray(x, dtype=float)


def _out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def _check_open(phi, p: ParameterSet, name="phi"):
    phi = _as_array(phi)
    lo, hi = p.phi_clamp_min, 1.0 - p.phi_clamp_min
    if not np.all((phi > lo) & (phi < hi)):
        bad = phi[~((phi > lo) & (phi < hi))] if phi.ndim else phi
        raise DomainError(f"{name} outside ({lo:g}, {hi:g}): {np.ravel(bad)[:3]}")
    return phi


def _power_ratio(ratio, exponent, scale=1.0):
    """scale * ratio**exponent; with q up to 1000 overflow to +inf is the honest answer."""
    with np.errstate(over="ignore", divide="ignore"):
        return np.exp(exponent * np.log(ratio) + np.log(scale))


def chi(phi, p: ParameterSet):
    """Flory interaction parameter chi0 + chi1*phi + chi2*phi**2."""
    phi = _as_array(phi)
    if not np.all((phi >= 0) & (phi <= 1)):
        raise DomainError("phi outside [0, 1]")
    out = p.chi0 + p.chi1 * phi + p.chi2 * phi**2
    return _out(out, phi)


def mixing_energy(phi, p: ParameterSet):
    """Flory-Huggins energy of mixing with phi2 = 1 - phi."""
    phi = _check_open(phi, p)
    a = p.kt / p.n1
    b = p.kt / p.n2
    c = 0.5 * p.kt * chi(phi, p)
    out = a * phi * np.log(phi) + b * (1 - phi) * np.log1p(-phi) + c * phi * (1 - phi)
    return _out(out, phi)


def elastic_energy(det_f, p: ParameterSet, shifted: bool = False):
    """Isotropic stored energy of the polymer for F = diag(det_f, 1, 1).

    The offset constant is 3**s.  With ``shifted=True`` the constant
    beta0 + beta1 is also removed so the energy vanishes at det_f = 1.
    """
    d = _as_array(det_f)
    if not np.all(d > 0):
        raise DomainError("det F must be positive")
    i1 = d**2 + 2.0
    i3 = d**2
    w = (i1**p.s - 3.0**p.s) + p.alpha0 * (i3 ** (-p.r / 2) - 1.0) + p.beta0 * np.sqrt(i3)
    with np.errstate(over="ignore"):
        w = w + p.beta1 * i3 ** (p.q / 2)
    if shifted:
        w = w - (p.beta0 + p.beta1)
    return _out(w, d)


def G(phi, p: ParameterSet):
    """Effective one-dimensional stress.

    Only the log terms and the chi0 term carry the kT factor; the chi1 and
    chi2 terms are unscaled.
    """
    phi = _check_open(phi, p)
    kt, pi_ = p.kt, p.phi_i
    ratio2 = pi_**2 / phi**2
    out = (
        kt * np.log1p(-phi) / p.n2
        - kt * np.log(phi) / p.n1
        + _power_ratio(pi_ / phi, p.q, (p.q - 1) * p.beta1)
        - (1 + p.r) * p.alpha0 * pi_ ** (-p.r) * phi**p.r
        + (2 + ratio2) ** p.s * (2 * p.s * pi_**2 / (pi_**2 + 2 * phi**2) - 1)
        + kt * p.chi0 * phi
        - 2 * p.chi1 * phi
        + 3 * (p.chi1 - p.chi2) * phi**2
        + 4 * p.chi2 * phi**3
    )
    return _out(out, phi)


def dG(phi, p: ParameterSet):
    """Closed-form derivative of :func:`G`."""
    phi = _check_open(phi, p)
    kt, pi_, s = p.kt, p.phi_i, p.s
    a = 2 + pi_**2 / phi**2
    da = -2 * pi_**2 / phi**3
    den = pi_**2 + 2 * phi**2
    b = 2 * s * pi_**2 / den - 1
    db = -8 * s * pi_**2 * phi / den**2
    out = (
        -kt / (p.n2 * (1 - phi))
        - kt / (p.n1 * phi)
        - _power_ratio(pi_ / phi, p.q, p.q * (p.q - 1) * p.beta1) / phi
        - p.r * (1 + p.r) * p.alpha0 * pi_ ** (-p.r) * phi ** (p.r - 1)
        + s * a ** (s - 1) * da * b
        + a**s * db
        + kt * p.chi0
        - 2 * p.chi1
        + 6 * (p.chi1 - p.chi2) * phi
        + 12 * p.chi2 * phi**2
    )
    return _out(out, phi)


def saturation_residual(phi, p: ParameterSet):
    """Normal traction balance at a fully permeable interface.

    Elastic bracket (including the beta0 term) minus the mixing bracket; a
    zero is an admissible boundary volume fraction phi*.
    """
    phi = _check_open(phi, p)
    kt, pi_ = p.kt, p.phi_i
    ratio2 = pi_**2 / phi**2
    log1 = np.log(phi)
    log2 = np.log1p(-phi)
    elastic = phi * (
        2 * p.s * (ratio2 + 2) ** (p.s - 1) * ratio2
        - p.alpha0 * pi_ ** (-p.r) * p.r * phi**p.r
        + p.beta0 * pi_ / phi
        + _power_ratio(pi_ / phi, p.q, p.beta1 * p.q)
    )
    inner = (
        kt / 2 * p.chi0 * (1 - phi) + kt / p.n1 * log1 + kt / p.n1
        + 2 * p.chi1 * phi * (1 - phi) + 3 * p.chi2 * phi**2 * (1 - phi)
    ) - (
        kt / 2 * p.chi0 * phi + kt / p.n2 * log2 + kt / p.n2
        + p.chi1 * phi**2 + p.chi2 * phi**3
    )
    mixing = (
        phi * inner
        - (kt / 2 * p.chi0 * phi * (1 - phi) + kt / p.n1 * phi * log1 + kt / p.n2 * (1 - phi) * log2)
        + p.chi1 * phi**2 * (1 - phi)
        + p.chi2 * phi**2 * (1 - phi)
    )
    return _out(elastic - mixing, phi)


def _integrand(sigma, p):
    return sigma * dG(sigma, p)


def flux_potential(psi, p: ParameterSet, psi_star: float, tol: float = QUAD_TOL):
    """F(psi) = f(1/psi) with f(s) the integral of sigma*G'(sigma) from 1/psi_star to s.

    Evaluated by adaptive Gauss-Kronrod quadrature.  F(psi_star) == 0.
    """
    psi_arr = _as_array(psi)
    if psi_star <= 1 or not np.all(psi_arr > 1):
        raise DomainError("flux potential requires psi > 1 and psi_star > 1")
    lower = 1.0 / psi_star
    _check_open(lower, p, "1/psi_star")
    flat = np.ravel(psi_arr)
    out = np.empty_like(flat)
    for k, value in enumerate(flat):
        upper = 1.0 / value
        _check_open(upper, p, "1/psi")
        if upper == lower:
            out[k] = 0.0
            continue
        val, err = integrate.quad(_integrand, lower, upper, args=(p,), epsabs=tol, epsrel=0.0, limit=200)
        if not np.isfinite(val) or err > tol:
            raise QuadratureError(
                f"quadrature for F({value!r}) did not reach {tol:g} (estimate {err:.3g})",
                error_estimate=err,
            )
        out[k] = val
    return _out(out.reshape(psi_arr.shape), psi_arr)


def flux_potential_derivative(psi, p: ParameterSet):
    """dF/dpsi = -G'(1/psi) / psi**3."""
    psi = _as_array(psi)
    return _out(-dG(1.0 / psi, p) / psi**3, psi)


class FluxPotential:
    """Tabulated F(psi) for solver inner loops.

    Values on ``TABLE_KNOTS`` knots come from segment-wise quadrature and are
    joined by cubic Hermite pieces that use the exact derivative.  Arguments
    outside the table fall back to direct quadrature.
    """

    def __init__(self, p: ParameterSet, psi_star: float, psi_range=None, knots: int = TABLE_KNOTS):
        if psi_star <= 1:
            raise DomainError("psi_star must exceed 1")
        self.params = p
        self.psi_star = float(psi_star)
        if psi_range is None:
            psi_range = default_table_range(p, psi_star)
        lo, hi = psi_range
        if not (1 < lo < psi_star < hi):
            raise DomainError("table range must bracket psi_star and stay above 1")
        self.lo, self.hi = float(lo), float(hi)
        # knots geometric in psi - 1 (G' has a 1/(1 - phi) term), with one
        # exactly at psi_star so F(psi_star) stays 0 in the table
        a, m, b = np.log(lo - 1), np.log(psi_star - 1), np.log(hi - 1)
        n_lo = max(2, int(round(knots * (m - a) / (b - a))))
        left = 1 + np.exp(np.linspace(a, m, n_lo))
        right = 1 + np.exp(np.linspace(m, b, max(2, knots - n_lo + 1)))
        left[0], left[-1], right[0], right[-1] = lo, psi_star, psi_star, hi
        psi = np.concatenate([left, right[1:]])
        i_star = n_lo - 1
        # fixed 10-point Gauss-Legendre per (short, smooth) segment
        nodes, weights = np.polynomial.legendre.leggauss(10)
        a, b = 1.0 / psi[:-1], 1.0 / psi[1:]
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        sigma = mid[:, None] + half[:, None] * nodes[None, :]
        seg = half * (_integrand(sigma, p) @ weights)
        values = np.zeros_like(psi)
        values[i_star + 1:] = np.cumsum(seg[i_star:])
        values[:i_star] = -np.cumsum(seg[:i_star][::-1])[::-1]
        self.knots = psi
        self.values = values
        self._spline = CubicHermiteSpline(psi, values, flux_potential_derivative(psi, p))

    def __call__(self, psi):
        psi_arr = _as_array(psi)
        inside = (psi_arr >= self.lo) & (psi_arr <= self.hi)
        if np.all(inside):
            return _out(self._spline(psi_arr), psi_arr)
        out = np.where(inside, self._spline(np.clip(psi_arr, self.lo, self.hi)), 0.0)
        outside = ~inside
        out[outside] = flux_potential(psi_arr[outside], self.params, self.psi_star)
        return _out(out, psi_arr)

    def derivative(self, psi):
        return flux_potential_derivative(psi, self.params)


def default_table_range(p: ParameterSet, psi_star: float):
    """psi interval covered by the F-table: half-way to psi = 1 below, 2*psi* above."""
    lo = 1.0 + 0.5 * (psi_star - 1.0)
    hi = min(2.0 * psi_star, 1.0 / (2 * p.phi_clamp_min))
    return lo, hi
