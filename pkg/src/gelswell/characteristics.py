"""Diagonal variables, characteristic tracing, sup-norm series and the lifetime study."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constitutive as cst
from . import solver as sv
from .errors import BoundBlowup, ConfigError, InterpolationOutOfRange, NotHyperbolic
from .freeboundary import node_values

kappa = sv.kappa


@dataclass(frozen=True)
class CharacteristicState:
    t: float
    y: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray

    def boundary_residuals(self):
        """(|v1 - v2|, |lam1 w1 - lam2 w2|) at the two end cells.

        v1 = v2 follows from eta = 0 on the boundary; lam1 w1 = lam2 w2 from
        eta_t = 0 there.
        """
        ends = [0, -1]
        rv = np.abs(self.v1[ends] - self.v2[ends])
        rw = np.abs(self.lam1[ends] * self.w1[ends] - self.lam2[ends] * self.w2[ends])
        return rv, rw


def left_weight(psi, u, p):
    """ell with L1 = (ell, 1), L2 = (-ell, 1)."""
    w = u**2 + cst.dG(1.0 / psi, p)
    if not np.all(w * (1 - psi) > 0):
        raise NotHyperbolic("state not hyperbolic", margin=float(np.min(-w)))
    return np.sqrt(w / (1 - psi)) / psi


def to_diagonal(state: sv.StateField, p, psi_star: float) -> CharacteristicState:
    """v_i = L_i . (eta, u), w_i = L_i . (eta_y, u_y) cellwise."""
    eta = state.psi - psi_star
    ell = left_weight(state.psi, state.u, p)
    eta_y, u_y = sv.gradients(state, psi_star)
    lam1, lam2 = sv.wave_speeds(state.psi, state.u, p)
    return CharacteristicState(
        state.t, state.y,
        ell * eta + state.u, -ell * eta + state.u,
        ell * eta_y + u_y, -ell * eta_y + u_y,
        lam1, lam2,
    )


@dataclass
class SupNormSeries:
    times: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    W1: np.ndarray
    W2: np.ndarray

    @property
    def U1(self):
        return np.maximum(self.V1, self.V2)

    @property
    def U2(self):
        return np.maximum(self.W1, self.W2)


def sup_norms(record: sv.SimulationRecord) -> SupNormSeries:
    rows = []
    for snap in record.snapshots:
        d = to_diagonal(snap, record.params, record.psi_star)
        rows.append((snap.t, *(np.abs(a).max() for a in (d.v1, d.v2, d.w1, d.w2))))
    cols = np.array(rows).T
    return SupNormSeries(*cols)


def bound_y(t, T, delta, eps, C, kappa_val):
    """A-priori bound on the diagonal sup norms for t >= T.

    a = exp(-kappa T) (delta + (exp(kappa T) - 1) eps + C eps^2),
    Y(t) <= a / (1 - C a (t - T)).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < T):
        raise ConfigError("bound requires t >= T", field="t")
    a = np.exp(-kappa_val * T) * (delta + np.expm1(kappa_val * T) * eps + C * eps**2)
    den = 1 - C * a * (t - T)
    if np.any(den <= 0):
        raise BoundBlowup(f"bound denominator {np.min(den):.6g} <= 0")
    out = a / den
    return float(out) if out.ndim == 0 else out


# ------------------------------------------------------------------ tracing


class SpeedField:
    """Wave speeds of one family on the (t, y) lattice of a record.

    Boundary nodes y = 0, 1 carry psi* and the end-cell velocity, so the
    interpolated field is defined on all of [0, 1].
    """

    def __init__(self, record: sv.SimulationRecord):
        p, ps = record.params, record.psi_star
        times = np.array([s.t for s in record.snapshots])
        if len(times) < 2 or np.any(np.diff(times) <= 0):
            raise InterpolationOutOfRange("record needs at least two increasing snapshot times")
        lam = []
        for s in record.snapshots:
            y, psi = node_values(s.psi, ps)
            u = np.concatenate([[s.u[0]], s.u, [s.u[-1]]])
            lam.append(np.stack(sv.wave_speeds(psi, u, p)))
        lam = np.array(lam)  # (time, family, node)
        self.times, self.y = times, y
        self.lam = lam
        mags = np.abs(lam)
        self.lambda_min = float(mags.min())
        self.lambda_max = float(mags.max())

    def __call__(self, family: int, tau: float, xi: float) -> float:
        """Bilinear interpolation in (tau, y)."""
        times, y = self.times, self.y
        if not (times[0] - 1e-12 <= tau <= times[-1] + 1e-12):
            raise InterpolationOutOfRange(f"tau={tau!r} outside recorded times")
        xi = min(max(xi, 0.0), 1.0)
        i = min(max(np.searchsorted(times, tau) - 1, 0), len(times) - 2)
        j = min(max(np.searchsorted(y, xi) - 1, 0), len(y) - 2)
        a = (tau - times[i]) / (times[i + 1] - times[i])
        b = (xi - y[j]) / (y[j + 1] - y[j])
        f = self.lam[:, family - 1, :]
        return float(
            (1 - a) * ((1 - b) * f[i, j] + b * f[i, j + 1]) + a * ((1 - b) * f[i + 1, j] + b * f[i + 1, j + 1])
        )


@dataclass
class CharacteristicTrace:
    family: int
    anchor: tuple
    tau: np.ndarray
    xi: np.ndarray
    families: np.ndarray
    events: list = field(default_factory=list)  # (boundary, tau, family arriving)

    def rows(self):
        for t, x, f in zip(self.tau, self.xi, self.families):
            yield float(t), float(x), int(f)

    def reflection_time(self, k: int):
        """Time of the k-th boundary hit (0-based) or None."""
        return self.events[k][1] if k < len(self.events) else None


def _rk4(speed, family, tau, xi, h):
    k1 = speed(family, tau, xi)
    k2 = speed(family, tau + h / 2, xi + h / 2 * k1)
    k3 = speed(family, tau + h / 2, xi + h / 2 * k2)
    k4 = speed(family, tau + h, xi + h * k3)
    return xi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def trace_characteristic(record, family: int, anchor, field_=None, max_reflections: int = 8, steps_per_unit: int = 2000):
    """Integrate d xi/d tau = lambda_i backward from the anchor (y, t).

    On reaching y = 0 or 1 the boundary time is recorded and the path
    continues backward on the other family.  Stops at tau = 0 or after
    ``max_reflections`` hits.
    """
    if family not in (1, 2):
        raise ConfigError("family must be 1 or 2", field="family")
    speed = field_ or SpeedField(record)
    y0, t0 = map(float, anchor)
    if not (0 <= y0 <= 1) or not (speed.times[0] <= t0 <= speed.times[-1]):
        raise InterpolationOutOfRange(f"anchor {anchor} outside the recorded domain")
    h_max = 1.0 / steps_per_unit
    tau, xi, fam = t0, y0, family
    taus, xis, fams, events = [tau], [xi], [fam], []
    while tau > speed.times[0] and len(events) < max_reflections:
        h = -min(h_max, tau - speed.times[0])
        nxt = _rk4(speed, fam, tau, xi, h)
        if 0.0 <= nxt <= 1.0:
            tau, xi = tau + h, nxt
        else:
            # shrink the step onto the boundary by bisection in the step length
            wall = 1.0 if nxt > 1.0 else 0.0
            lo, hi = 0.0, h  # xi stays inside for lo, leaves for hi
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if 0.0 <= _rk4(speed, fam, tau, xi, mid) <= 1.0:
                    lo = mid
                else:
                    hi = mid
            tau, xi = tau + hi, wall
            events.append((wall, tau, fam))
            taus.append(tau), xis.append(xi), fams.append(fam)
            fam = 3 - fam
        taus.append(tau), xis.append(xi), fams.append(fam)
    return CharacteristicTrace(family, (y0, t0), np.array(taus), np.array(xis), np.array(fams), events)


def retrace_forward(record, trace: CharacteristicTrace, field_=None):
    """Forward-integrate the recorded path segments; returns the end point."""
    speed = field_ or SpeedField(record)
    tau, xi = trace.tau[-1], trace.xi[-1]
    for k in range(len(trace.tau) - 1, 0, -1):
        h = trace.tau[k - 1] - trace.tau[k]
        if h == 0:
            xi = trace.xi[k - 1]  # family switch at a wall
            continue
        xi = _rk4(speed, trace.families[k], tau, xi, h)
        tau = trace.tau[k - 1]
    return float(xi), float(tau)


@dataclass(frozen=True)
class ReflectionCheck:
    t1: float  # 1/lambda_max
    t2: float  # 1/lambda_min
    first_ok: bool  # 0 <= t - tau_first <= T2
    second_ok: bool  # 0 <= tau_first - tau_second <= T2
    double_ok: bool  # T1 <= t - tau_second <= 2 T2

    @property
    def ok(self):
        return self.first_ok and self.second_ok and self.double_ok


def check_reflection_times(trace: CharacteristicTrace, field_: SpeedField, tol: float = 1e-9) -> ReflectionCheck:
    """Crossing-time inequalities for a traced path.

    The first hit must come within T2 of the anchor, the second within T2 of
    the first, and a double reflection needs at least T1 (one full crossing).
    Missing events make the corresponding check vacuous.
    """
    t1, t2 = 1.0 / field_.lambda_max, 1.0 / field_.lambda_min
    t = trace.anchor[1]
    r1, r2 = trace.reflection_time(0), trace.reflection_time(1)
    first = r1 is None or -tol <= t - r1 <= t2 + tol
    second = r2 is None or -tol <= r1 - r2 <= t2 + tol
    double = r2 is None or t1 - tol <= t - r2 <= 2 * t2 + tol
    return ReflectionCheck(t1, t2, bool(first), bool(second), bool(double))


# ---------------------------------------------------------------- lifetime


@dataclass
class LifetimeTable:
    eps: np.ndarray
    exit_time: np.ndarray
    reasons: list
    slope: float
    intercept: float
    correlation: float

    def rows(self):
        for e, t, r in zip(self.eps, self.exit_time, self.reasons):
            yield float(e), float(t), r


def lifetime_study(p, config: sv.SimConfig, eps_list, psi_star=None) -> LifetimeTable:
    """Exit time of the C1 norm above 2 eps for cosine data of C1 size eps.

    The built-in bump with amplitude a has C1 norm pi*a, so each run uses
    a = eps/pi for both eta and u.  A run that never exits reports its
    final time.  T is fitted against |log eps| by least squares.
    """
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list) or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("eps list must be positive and strictly decreasing", field="eps")
    if psi_star is None:
        psi_star = sv.admissible_psi_star(p)
    times, reasons = [], []
    for eps in eps_list:
        cfg = config.with_(profile={"kind": "cosine", "eps_eta": eps / np.pi, "eps_u": eps / np.pi})
        rec = sv.run(cfg, p, psi_star, stop=lambda state, c1, eps=eps: c1 > 2 * eps)
        reason = "exceeded_2eps" if rec.termination == "stopped" else rec.termination
        times.append(rec.final.t)
        reasons.append(reason)
    x = np.abs(np.log(eps_list))
    t = np.array(times)
    if len(x) >= 2:
        slope, intercept = np.polyfit(x, t, 1)
        corr = float(np.corrcoef(x, t)[0, 1]) if np.ptp(t) > 0 else float("nan")
    else:
        slope = intercept = corr = float("nan")
    return LifetimeTable(np.array(eps_list), t, reasons, float(slope), float(intercept), corr)
