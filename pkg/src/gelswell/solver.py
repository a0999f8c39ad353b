"""Finite-volume integration of the fixed-domain (psi, u) system on y in [0, 1].

Conservative form

    psi_t + (-(1 - 1/psi) u)_y = 0
    u_t   + (-u^2/(2 psi^2) - F(psi))_y = -beta u psi^2 / (psi - 1)

with psi = psi* at y = 0, 1.  First-order HLL (or local Lax-Friedrichs)
fluxes, explicit unsplit source, ghost cells psi_g = 2 psi* - psi, u_g = u.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import constitutive as cst
from . import freeboundary as fb
from .errors import ConfigError, DomainError, IncompatibleData, NonFinite, NotHyperbolic
from .hyperbolicity import admissible_psi_star, wave_speeds
from .params import ParameterSet

log = logging.getLogger(__name__)

SCHEMES = ("hll", "llf")


@dataclass(frozen=True)
class StateField:
    psi: np.ndarray
    u: np.ndarray
    t: float = 0.0

    @property
    def n(self) -> int:
        return len(self.psi)

    @property
    def dy(self) -> float:
        return 1.0 / len(self.psi)

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.n


@dataclass(frozen=True)
class SimConfig:
    """Run settings.  ``profile`` is a dict, see :func:`init`."""

    n: int = 256
    cfl: float = 0.45
    t_end: float = 1.0
    output_every: int = 10
    scheme: str = "hll"
    profile: dict = field(default_factory=lambda: {"kind": "cosine", "eps_eta": 0.0, "eps_u": 0.0})
    psi_star: float | None = None
    c1_ceiling: float = 1e3

    def __post_init__(self):
        # JSON integers like "tEnd": 5 must not leak into float output columns
        for name in ("cfl", "t_end", "c1_ceiling"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not 0 < self.cfl < 1:
            raise ConfigError("cfl must lie in (0, 1)", field="cfl")
        if self.n < 16:
            raise ConfigError("n must be at least 16", field="n")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}", field="scheme")
        if self.t_end < 0:
            raise ConfigError("tEnd must be non-negative", field="tEnd")
        if self.output_every < 1:
            raise ConfigError("outputEvery must be >= 1", field="outputEvery")

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    _KEYS = {
        "n": "n", "cfl": "cfl", "tEnd": "t_end", "outputEvery": "output_every",
        "scheme": "scheme", "profile": "profile", "psiStar": "psi_star", "c1Ceiling": "c1_ceiling",
    }

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        kwargs = {}
        for key, value in data.items():
            if key not in cls._KEYS:
                raise ConfigError(f"unknown config field: {key}", field=key)
            kwargs[cls._KEYS[key]] = value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {key: getattr(self, attr) for key, attr in self._KEYS.items()}


@lru_cache(maxsize=32)
def flux_table(p: ParameterSet, psi_star: float) -> cst.FluxPotential:
    return cst.FluxPotential(p, psi_star)


def flux(psi, u, p: ParameterSet, psi_star: float):
    """Physical flux (-(1 - 1/psi) u, -u^2/(2 psi^2) - F(psi))."""
    psi = np.asarray(psi, dtype=float)
    if not np.all(psi > 1):
        raise DomainError("psi must exceed 1")
    u = np.asarray(u, dtype=float)
    return np.array([-(1 - 1 / psi) * u, -(u**2) / (2 * psi**2) - flux_table(p, psi_star)(psi)])


def source(psi, u, p: ParameterSet):
    """Drag source (0, -beta u psi^2 / (psi - 1))."""
    psi = np.asarray(psi, dtype=float)
    if not np.all(psi > 1):
        raise DomainError("psi must exceed 1")
    u = np.asarray(u, dtype=float)
    return np.array([np.zeros_like(psi * u), -p.beta_drag * u * psi**2 / (psi - 1)])


def kappa(p: ParameterSet, psi_star: float) -> float:
    """Linear damping rate beta psi*^2 / (2 (psi* - 1))."""
    if psi_star <= 1:
        raise DomainError("psi_star must exceed 1")
    return p.beta_drag * psi_star**2 / (2 * (psi_star - 1))


def cosine_bump(y):
    return 0.5 * (1 - np.cos(2 * np.pi * y))


def _end_slope(y, f, at):
    coef = np.polynomial.polynomial.polyfit(y - at, f, 4)
    return coef[1]


def check_compatibility(eta0, u0, y, psi_star, tol_value=1e-10, tol_c1=1e-8):
    """Raise IncompatibleData unless eta0(0) = eta0(1) = 0 and the C1 line holds.

    The second line, -u0 eta0_y / psi*^2 + (1 - psi*)/psi* u0_y = 0, is
    evaluated at both ends with slopes of a quartic through the five
    nearest samples.
    """
    eta0 = np.asarray(eta0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) < 5:
        raise ConfigError("tabulated profiles need at least 5 points", field="profile")
    if abs(eta0[0]) > tol_value or abs(eta0[-1]) > tol_value:
        raise IncompatibleData("eta0 must vanish at y = 0 and y = 1", line=1)
    for k, sl in ((0, slice(0, 5)), (-1, slice(-5, None))):
        deta, du = (_end_slope(y[sl], f[sl], y[k]) for f in (eta0, u0))
        res = -u0[k] * deta / psi_star**2 + (1 - psi_star) / psi_star * du
        if abs(res) > tol_c1:
            raise IncompatibleData(f"C1 compatibility residual {res:.3g} at y = {y[k]:g}", line=2)


def init(config: SimConfig, p: ParameterSet, psi_star: float) -> StateField:
    """Initial cell averages.

    profile kinds:
      ``cosine``     eta0 = eps_eta (1 - cos 2 pi y)/2, u0 = eps_u (1 - cos 2 pi y)/2
      ``tabulated``  arrays ``y`` (including 0 and 1), ``eta``, ``u``; checked
                     for compatibility, then interpolated to cell centres
    """
    prof = dict(config.profile)
    kind = prof.get("kind", "cosine")
    n = config.n
    yc = (np.arange(n) + 0.5) / n
    if kind == "cosine":
        eps_eta = float(prof.get("eps_eta", 0.0))
        eps_u = float(prof.get("eps_u", 0.0))
        if eps_eta < 0 or eps_u < 0:
            raise ConfigError("profile amplitudes must be non-negative", field="profile")
        # exact cell averages of the bump
        h = 1.0 / n
        avg = 0.5 - (np.sin(2 * np.pi * (yc + h / 2)) - np.sin(2 * np.pi * (yc - h / 2))) / (4 * np.pi * h)
        eta, u = eps_eta * avg, eps_u * avg
    elif kind == "tabulated":
        y = np.asarray(prof["y"], dtype=float)
        eta_t = np.asarray(prof["eta"], dtype=float)
        u_t = np.asarray(prof["u"], dtype=float)
        if y[0] != 0.0 or y[-1] != 1.0 or not np.all(np.diff(y) > 0):
            raise ConfigError("tabulated y must increase from 0 to 1", field="profile")
        check_compatibility(eta_t, u_t, y, psi_star)
        eta, u = np.interp(yc, y, eta_t), np.interp(yc, y, u_t)
    else:
        raise ConfigError(f"unknown profile kind {kind!r}", field="profile")
    psi = psi_star + eta
    if not np.all(psi > 1 + 1e-9):
        raise DomainError("initial psi must exceed 1")
    return StateField(psi, u, 0.0)


def cfl_dt(state: StateField, p: ParameterSet, config: SimConfig) -> float:
    """cfl * dy / max |lambda| over cells."""
    lam1, lam2 = wave_speeds(state.psi, state.u, p)
    smax = max(np.max(np.abs(lam1)), np.max(np.abs(lam2)))
    return config.cfl * state.dy / smax


def source_dt_limit(p: ParameterSet, psi_star: float) -> float:
    """Largest dt with beta psi*^2/(psi*-1) dt < 0.5."""
    rate = 2 * kappa(p, psi_star)
    return np.inf if rate == 0 else 0.49 / rate


def _numerical_flux(psi, u, p, psi_star, scheme):
    fl = flux(psi[:-1], u[:-1], p, psi_star)
    fr = flux(psi[1:], u[1:], p, psi_star)
    l1, l2 = wave_speeds(psi, u, p)
    ql = np.array([psi[:-1], u[:-1]])
    qr = np.array([psi[1:], u[1:]])
    if scheme == "llf":
        a = np.maximum(np.maximum(np.abs(l1[:-1]), np.abs(l2[:-1])), np.maximum(np.abs(l1[1:]), np.abs(l2[1:])))
        return 0.5 * (fl + fr) - 0.5 * a * (qr - ql)
    scale = np.maximum(np.abs(l1), np.abs(l2)).max()
    sl = np.minimum(np.minimum(l1[:-1], l1[1:]), 0.0) - 1e-12 * scale
    sr = np.maximum(np.maximum(l2[:-1], l2[1:]), 0.0) + 1e-12 * scale
    return (sr * fl - sl * fr + sl * sr * (qr - ql)) / (sr - sl)


def step(state: StateField, dt: float, p: ParameterSet, config: SimConfig, psi_star: float) -> StateField:
    """One explicit finite-volume update."""
    psi = np.concatenate([[2 * psi_star - state.psi[0]], state.psi, [2 * psi_star - state.psi[-1]]])
    u = np.concatenate([[state.u[0]], state.u, [state.u[-1]]])
    if not np.all(psi > 1):
        raise NotHyperbolic("psi dropped to 1 or below", margin=float(psi.min() - 1))
    f = _numerical_flux(psi, u, p, psi_star, config.scheme)
    s = source(state.psi, state.u, p)
    lam = dt / state.dy
    new_psi = state.psi - lam * (f[0, 1:] - f[0, :-1]) + dt * s[0]
    new_u = state.u - lam * (f[1, 1:] - f[1, :-1]) + dt * s[1]
    if not (np.all(np.isfinite(new_psi)) and np.all(np.isfinite(new_u))):
        raise NonFinite(f"non-finite state at t = {state.t + dt!r}")
    return StateField(new_psi, new_u, state.t + dt)


def boundary_fluxes(state: StateField, p: ParameterSet, config: SimConfig, psi_star: float):
    """Numerical fluxes through y = 0 and y = 1 (for conservation checks)."""
    psi = np.concatenate([[2 * psi_star - state.psi[0]], state.psi, [2 * psi_star - state.psi[-1]]])
    u = np.concatenate([[state.u[0]], state.u, [state.u[-1]]])
    f = _numerical_flux(psi, u, p, psi_star, config.scheme)
    return f[:, 0], f[:, -1]


# ---------------------------------------------------------------- diagnostics


def gradients(state: StateField, psi_star: float):
    """(eta_y, u_y): central in the interior, one-sided at the end cells."""
    eta = state.psi - psi_star
    return np.gradient(eta, state.dy, edge_order=1), np.gradient(state.u, state.dy, edge_order=1)


def c1_norm(state: StateField, psi_star: float) -> float:
    eta_y, u_y = gradients(state, psi_star)
    eta = state.psi - psi_star
    return float(max(np.abs(eta).max(), np.abs(state.u).max(), np.abs(eta_y).max(), np.abs(u_y).max()))


def potential_energy_density(psi, p: ParameterSet, psi_star: float):
    """Pi(psi) = int_{psi*}^{psi} F, the stored energy per unit polymer mass of the reduced system."""
    table = flux_table(p, psi_star)
    anti = _antiderivative(p, psi_star)
    psi = np.asarray(psi, dtype=float)
    if np.any((psi < table.lo) | (psi > table.hi)):
        raise DomainError("psi outside the tabulated flux-potential range")
    return anti(psi) - anti(psi_star)


@lru_cache(maxsize=32)
def _antiderivative(p, psi_star):
    return flux_table(p, psi_star)._spline.antiderivative()


def reduced_energy(state: StateField, p: ParameterSet, psi_star: float) -> float:
    """int_0^1 [ (1 - 1/psi) u^2 / 2 + Pi(psi) ] dy.

    For smooth solutions its rate is -beta int psi u^2 dy plus a boundary
    term cubic in u.
    """
    kin = 0.5 * (1 - 1 / state.psi) * state.u**2
    return float(np.sum(kin + potential_energy_density(state.psi, p, psi_star)) * state.dy)


def energy_diagnostic(state: StateField, p: ParameterSet, psi_star: float | None = None) -> float:
    """Mixture energy over the reconstructed physical cells.

    sum_i [ phi(1-phi) u^2 / 2 + phi W_P(phiI/phi) + W_FH(phi) ] dx_i with
    dx_i = psi_i dy, W_P shifted to vanish at det F = 1.
    """
    phi = 1.0 / state.psi
    dx = state.psi * state.dy
    density = (
        0.5 * phi * (1 - phi) * state.u**2
        + phi * cst.elastic_energy(p.phi_i / phi, p, shifted=True)
        + cst.mixing_energy(phi, p)
    )
    return float(np.sum(density * dx))


@dataclass
class Diagnostics:
    t: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    mixture_energy: list = field(default_factory=list)
    sup_eta: list = field(default_factory=list)
    sup_u: list = field(default_factory=list)
    sup_eta_x: list = field(default_factory=list)
    sup_u_x: list = field(default_factory=list)
    dt: list = field(default_factory=list)

    def record(self, state, p, psi_star, dt):
        eta_y, u_y = gradients(state, psi_star)
        self.t.append(state.t)
        self.mass.append(fb.physical_mass(state.psi, psi_star))
        self.energy.append(reduced_energy(state, p, psi_star))
        self.mixture_energy.append(energy_diagnostic(state, p, psi_star))
        self.sup_eta.append(float(np.abs(state.psi - psi_star).max()))
        self.sup_u.append(float(np.abs(state.u).max()))
        self.sup_eta_x.append(float(np.abs(eta_y).max()))
        self.sup_u_x.append(float(np.abs(u_y).max()))
        self.dt.append(dt)

    def c1(self):
        return np.max(np.array([self.sup_eta, self.sup_u, self.sup_eta_x, self.sup_u_x]), axis=0)


@dataclass
class SimulationRecord:
    config: SimConfig
    params: ParameterSet
    psi_star: float
    snapshots: list
    diagnostics: Diagnostics
    interfaces: fb.InterfaceTrack
    termination: str = "completed"
    detail: str = ""

    @property
    def phi_star(self) -> float:
        return 1.0 / self.psi_star

    @property
    def final(self) -> StateField:
        return self.snapshots[-1]


def run(config: SimConfig, p: ParameterSet, psi_star: float | None = None, stop=None) -> SimulationRecord:
    """Integrate to ``config.t_end`` or until a termination condition.

    ``stop(state, c1)`` may end the run early (reason ``"stopped"``).  Loss of
    hyperbolicity, non-finite values and a C1 norm above
    ``c1_ceiling`` times its initial value end the run with a recorded reason
    instead of an exception.
    """
    if psi_star is None:
        psi_star = config.psi_star if config.psi_star is not None else admissible_psi_star(p)
    psi_star = float(psi_star)
    phi_star = 1.0 / psi_star
    state = init(config, p, psi_star)
    diag = Diagnostics()
    diag.record(state, p, psi_star, 0.0)
    length0 = fb.domain_length(state.psi, psi_star)
    track = fb.InterfaceTrack.start(0.0, 0.5 * length0, length0)
    snapshots = [state]
    c1_0 = c1_norm(state, psi_star)
    ceiling = config.c1_ceiling * c1_0 if c1_0 > 0 else np.inf
    dt_source = source_dt_limit(p, psi_star)
    record = SimulationRecord(config, p, psi_star, snapshots, diag, track)
    if stop is not None and stop(state, c1_0):
        record.termination = "stopped"
        return record
    k = 0
    while state.t < config.t_end:
        try:
            dt = min(cfl_dt(state, p, config), dt_source)
            last = config.t_end - state.t <= dt * (1 + 1e-12)
            if last:
                dt = config.t_end - state.t
            new = step(state, dt, p, config, psi_star)
            if last:
                new = replace(new, t=config.t_end)
            wave_speeds(new.psi, new.u, p)
        except NotHyperbolic as exc:
            record.termination, record.detail = "not_hyperbolic", str(exc)
            break
        except (NonFinite, DomainError) as exc:
            record.termination, record.detail = "non_finite", str(exc)
            break
        fb.advance_interfaces(track, state, new, dt, phi_star, psi_star)
        state = new
        k += 1
        diag.record(state, p, psi_star, dt)
        c1 = diag.c1()[-1]
        done = state.t >= config.t_end
        if k % config.output_every == 0 or done:
            snapshots.append(state)
        if c1 > ceiling:
            record.termination, record.detail = "c1_ceiling", f"C1 norm {c1:.6g} exceeded {ceiling:.6g}"
            break
        if stop is not None and stop(state, c1):
            record.termination = "stopped"
            break
    if snapshots[-1] is not state:
        snapshots.append(state)
    return record
