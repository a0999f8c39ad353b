"""Jacobian, eigen-structure, boundary conditions and the critical fractions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import constitutive as cst
from .errors import DomainError, NoRoot, NotHyperbolic
from .params import ParameterSet

DEFAULT_INTERVAL = (1e-3, 1 - 1e-3)
DEFAULT_SCAN = 10_000


def _check_psi(psi):
    psi = np.asarray(psi, dtype=float)
    if not np.all(psi > 1):
        raise DomainError("psi must exceed 1")
    return psi


def jacobian(psi, u, p: ParameterSet):
    """Gradient matrix A(psi, u) of the mass-Lagrangian system.

    Broadcasts over array arguments; the two matrix axes come last.
    """
    psi = _check_psi(psi)
    u = np.asarray(u, dtype=float)
    psi, u = np.broadcast_arrays(psi, u)
    g = cst.dG(1.0 / psi, p)
    a = np.empty(psi.shape + (2, 2))
    a[..., 0, 0] = -u / psi**2
    a[..., 0, 1] = (1 - psi) / psi
    a[..., 1, 0] = (u**2 + g) / psi**3
    a[..., 1, 1] = -u / psi**2
    return a


@dataclass(frozen=True)
class EigenSystem:
    """Wave speeds and eigenvectors at one state.

    Ordering is lambda1 < lambda2.  L_i . R_j = 2 delta_ij.
    """

    psi: float
    u: float
    lambda1: float
    lambda2: float
    L1: np.ndarray
    L2: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    hyp_margin: float
    nc_margin: float
    ukl_gamma: float


def _margins(psi, u, g):
    hyp = -(u**2 + g)
    nc = (1 - psi) / psi * g - u**2
    return hyp, nc


def wave_speeds(psi, u, p: ParameterSet):
    """(lambda1, lambda2) elementwise; raises NotHyperbolic if any radicand <= 0."""
    psi = _check_psi(psi)
    u = np.asarray(u, dtype=float)
    g = cst.dG(1.0 / psi, p)
    radicand = (u**2 + g) * (1 - psi)
    if not np.all(radicand > 0):
        worst = float(np.min(-(u**2 + g)))
        raise NotHyperbolic("u^2 + G'(1/psi) >= 0", margin=worst)
    root = np.sqrt(radicand)
    return (-u - root) / psi**2, (-u + root) / psi**2


def eigensystem(psi: float, u: float, p: ParameterSet) -> EigenSystem:
    psi = float(_check_psi(psi))
    u = float(u)
    g = cst.dG(1.0 / psi, p)
    hyp, nc = _margins(psi, u, g)
    w = u**2 + g
    if w * (1 - psi) <= 0:
        raise NotHyperbolic(f"not hyperbolic at psi={psi!r}, u={u!r}", margin=hyp)
    root = np.sqrt(w * (1 - psi))
    lam1 = (-u - root) / psi**2
    lam2 = (-u + root) / psi**2
    # left:  (+/- (1/psi) sqrt(w/(1-psi)), 1); right: (+/- psi sqrt((1-psi)/w), 1)
    ell = np.sqrt(w / (1 - psi)) / psi
    arr = psi * np.sqrt((1 - psi) / w)
    return EigenSystem(
        psi=psi,
        u=u,
        lambda1=lam1,
        lambda2=lam2,
        L1=np.array([ell, 1.0]),
        L2=np.array([-ell, 1.0]),
        R1=np.array([arr, 1.0]),
        R2=np.array([-arr, 1.0]),
        hyp_margin=hyp,
        nc_margin=nc,
        ukl_gamma=arr,
    )


@dataclass(frozen=True)
class ConditionReport:
    hyperbolic: bool
    non_characteristic: bool
    ukl_gamma: float | None


def check_conditions(psi: float, u: float, p: ParameterSet) -> ConditionReport:
    psi = float(_check_psi(psi))
    g = cst.dG(1.0 / psi, p)
    hyperbolic = u**2 + g < 0
    non_char = u**2 < (1 - psi) / psi * g
    gamma = psi * np.sqrt((1 - psi) / (u**2 + g)) if hyperbolic else None
    return ConditionReport(bool(hyperbolic), bool(non_char), None if gamma is None else float(gamma))


def _polish(f, df, x, a, b, steps=3):
    """Newton steps kept only while they stay in [a, b] and reduce |f|."""
    fx = f(x)
    for _ in range(steps):
        d = df(x)
        if d == 0 or not np.isfinite(d):
            break
        x_new = x - fx / d
        if not a <= x_new <= b:
            break
        f_new = f(x_new)
        if abs(f_new) >= abs(fx):
            break
        x, fx = x_new, f_new
    return x


def sign_change_roots(f, interval, n, df=None):
    """All sign changes of f on an n-point uniform scan, refined with brentq."""
    lo, hi = interval
    grid = np.linspace(lo, hi, n)
    with np.errstate(invalid="ignore", over="ignore"):
        values = f(grid)
    sgn = np.sign(values)
    roots = []
    for k in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        a, b = grid[k], grid[k + 1]
        x = brentq(lambda z: f(float(z)), a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
        if df is not None:
            x = _polish(lambda z: f(float(z)), df, x, a, b)
        roots.append(float(x))
    for k in np.nonzero(sgn == 0)[0]:
        roots.append(float(grid[k]))
    return sorted(roots)


def find_phi_critical(p: ParameterSet, interval=DEFAULT_INTERVAL, n: int = DEFAULT_SCAN):
    """Zeros of G' located by sign-change scan.  Tangential zeros are missed."""
    _validate_scan(p, interval, n)
    return sign_change_roots(lambda x: cst.dG(x, p), interval, n)


@dataclass(frozen=True)
class PhiStar:
    phi: float
    psi: float
    residual: float
    dG: float
    admissible: bool


def _residual_slope(p):
    def df(x, h=1e-7):
        return (cst.saturation_residual(x + h, p) - cst.saturation_residual(x - h, p)) / (2 * h)

    return df


def solve_phi_star(p: ParameterSet, interval=DEFAULT_INTERVAL, n: int = DEFAULT_SCAN):
    """Boundary volume fractions from the saturation residual.

    Every root is returned; ``admissible`` marks G'(phi*) < 0.
    """
    _validate_scan(p, interval, n)
    roots = sign_change_roots(lambda x: cst.saturation_residual(x, p), interval, n, df=_residual_slope(p))
    if not roots:
        raise NoRoot(f"saturation residual has no sign change on {interval}")
    out = []
    for phi in roots:
        g = cst.dG(phi, p)
        out.append(PhiStar(phi, 1.0 / phi, cst.saturation_residual(phi, p), g, bool(g < 0)))
    return out


def admissible_psi_star(p: ParameterSet, interval=DEFAULT_INTERVAL, n: int = DEFAULT_SCAN) -> float:
    """psi* of the first admissible saturation root."""
    for root in solve_phi_star(p, interval, n):
        if root.admissible:
            return root.psi
    raise NoRoot("no admissible saturation root (all have G'(phi*) >= 0)")


def _validate_scan(p, interval, n):
    lo, hi = interval
    if not (p.phi_clamp_min < lo < hi < 1 - p.phi_clamp_min):
        raise DomainError(f"scan interval {interval} outside admissible volume fractions")
    if n < 100:
        raise DomainError("scan resolution must be at least 100")


@dataclass
class MarginGrid:
    phi: np.ndarray
    u: np.ndarray
    hyp_margin: np.ndarray
    nc_margin: np.ndarray
    ukl_gamma: np.ndarray  # nan where undefined

    def rows(self):
        for i in range(len(self.phi)):
            for j in range(len(self.u)):
                yield (self.phi[i], self.u[j], self.hyp_margin[i, j], self.nc_margin[i, j], self.ukl_gamma[i, j])


def scan_region(p: ParameterSet, phi_range, u_range, n_phi: int, n_u: int) -> MarginGrid:
    """Margins of the hyperbolicity, non-characteristic and UKL conditions on a grid."""
    if n_phi < 1 or n_u < 1:
        raise DomainError("grid sizes must be positive")
    phi = np.linspace(*phi_range, n_phi)
    u = np.linspace(*u_range, n_u)
    cst._check_open(phi, p)
    psi = 1.0 / phi
    g = cst.dG(phi, p)[:, None]
    uu = u[None, :]
    hyp = -(uu**2 + g)
    nc = ((1 - psi) / psi)[:, None] * g - uu**2
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma = np.where(hyp > 0, psi[:, None] * np.sqrt((1 - psi)[:, None] / (uu**2 + g)), np.nan)
    return MarginGrid(phi, u, hyp, nc, gamma)
