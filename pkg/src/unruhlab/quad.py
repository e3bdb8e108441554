"""Numerical integration utilities.

Adaptive 1D rules are delegated to QUADPACK (scipy.integrate.quad) behind
a small result/flag contract; semi-infinite integrals can optionally be
mapped by an exponential or double-exponential substitution first.
Grid-based scalar products between sampled field modes live here too,
since every overlap in the channel pipelines reduces to a weighted
trapezoid sum on a shared spatial grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate as si

from .errors import (
    DomainError,
    IncompatibleGrids,
    MeasureMismatch,
    NonFiniteSample,
)


def _bose_weighted(w):
    """w / (e^{2 pi w} - 1), guarded against overflow in the far tail."""
    z = 2.0 * math.pi * w
    if z > 700.0:
        return 0.0
    return w / math.expm1(z)


class SemiInfiniteMap(enum.Enum):
    NONE = "none"          # let QUADPACK transform the infinite interval
    EXP_DECAY = "exp"      # x = a - log(1-s), s in [0, 1)
    DOUBLE_EXP = "de"      # x = a + exp(sinh(t)), trapezoid in t


@dataclass(frozen=True)
class QuadSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 200
    semi_infinite_map: SemiInfiniteMap = SemiInfiniteMap.NONE

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("tolerances must be positive")


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    error: float
    converged: bool
    message: str = ""

    def __float__(self):
        return float(np.real(self.value))


@dataclass(frozen=True)
class Grid1D:
    """Strictly increasing sample points; values are supplied by callers."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 16:
            raise DomainError("grid needs at least 16 points")
        if np.any(np.diff(pts) <= 0):
            raise DomainError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def trapezoid_weights(self):
        pts = self.points
        w = np.empty_like(pts)
        w[1:-1] = 0.5 * (pts[2:] - pts[:-2])
        w[0] = 0.5 * (pts[1] - pts[0])
        w[-1] = 0.5 * (pts[-1] - pts[-2])
        return w

    def same_grid(self, other, tol=1e-12):
        return (self.points.size == other.points.size
                and np.max(np.abs(self.points - other.points)) <= tol)


def _guarded(f):
    def wrapped(x):
        v = f(x)
        if not np.all(np.isfinite(v)):
            raise NonFiniteSample(f"integrand not finite at x = {x!r}")
        return v
    return wrapped


def _quad_real(f, a, b, spec):
    val, err, info, *extra = si.quad(
        f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, full_output=True)
    message = extra[0] if extra else ""
    converged = not extra
    return val, err, converged, message


def _de_halfline(f, a, spec):
    """Double-exponential map x = a + exp(sinh(t)); trapezoid with halving."""
    tmax = math.asinh(math.log(1e300))  # x - a caps at ~1e300
    tmin = -tmax

    def g(t):
        s = math.sinh(t)
        x = a + math.exp(s)
        return f(x) * math.exp(s) * math.cosh(t)

    prev = None
    n = 64
    for _ in range(10):
        ts = np.linspace(tmin, tmax, n + 1)
        h = ts[1] - ts[0]
        with np.errstate(over="ignore", under="ignore"):
            vals = np.array([g(t) for t in ts])
        vals[~np.isfinite(vals)] = 0.0
        total = h * (np.sum(vals) - 0.5 * (vals[0] + vals[-1]))
        if prev is not None:
            err = abs(total - prev)
            if err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
                return total, err, True, ""
        prev = total
        n *= 2
    return total, abs(total - prev), False, "double-exp trapezoid not converged"


def integrate_adaptive(f, a, b, spec=QuadSpec()):
    """Adaptive integral of f over (a, b); b may be numpy.inf.

    Supports complex-valued integrands (real and imaginary parts are
    integrated separately).  Returns an IntegralResult; a failed
    tolerance target is reported via converged=False, not an exception.
    """
    f = _guarded(f)
    probe = f(a + 0.5 if np.isinf(b) else 0.5 * (a + b))
    is_complex = np.iscomplexobj(probe)

    if np.isinf(b) and spec.semi_infinite_map is SemiInfiniteMap.EXP_DECAY:
        inner = f

        def f_mapped(s):
            return inner(a - math.log1p(-s)) / (1.0 - s)

        return integrate_adaptive(
            f_mapped, 0.0, 1.0,
            QuadSpec(spec.abs_tol, spec.rel_tol, spec.max_subdivisions))

    if np.isinf(b) and spec.semi_infinite_map is SemiInfiniteMap.DOUBLE_EXP:
        if is_complex:
            re = _de_halfline(lambda x: np.real(f(x)), a, spec)
            im = _de_halfline(lambda x: np.imag(f(x)), a, spec)
            return IntegralResult(re[0] + 1j * im[0], re[1] + im[1],
                                  re[2] and im[2], re[3] or im[3])
        v, e, ok, msg = _de_halfline(f, a, spec)
        return IntegralResult(v, e, ok, msg)

    if is_complex:
        vr, er, okr, mr = _quad_real(lambda x: np.real(f(x)), a, b, spec)
        vi, ei, oki, mi = _quad_real(lambda x: np.imag(f(x)), a, b, spec)
        return IntegralResult(vr + 1j * vi, er + ei, okr and oki,
                              str(mr) or str(mi))
    v, e, ok, msg = _quad_real(f, a, b, spec)
    return IntegralResult(v, e, ok, str(msg))


def integrate_2d(f, domain, spec=QuadSpec()):
    """Tensorized adaptive integral of f(x, y) over a rectangle.

    domain = (ax, bx, ay, by); the inner integral runs over y with a
    tenth of the tolerance budget.  Convergence failures are flagged.
    """
    ax, bx, ay, by = domain
    inner_spec = QuadSpec(spec.abs_tol / 10.0, spec.rel_tol / 10.0,
                          spec.max_subdivisions, spec.semi_infinite_map)
    flags = []

    def inner(x):
        res = integrate_adaptive(lambda y: f(x, y), ay, by, inner_spec)
        if not res.converged:
            flags.append(res.message)
        return res.value

    res = integrate_adaptive(inner, ax, bx, spec)
    ok = res.converged and not flags
    msg = res.message or (flags[0] if flags else "")
    return IntegralResult(res.value, res.error, ok, msg)


# ---------------------------------------------------------------------------
# Scalar products of sampled modes
# ---------------------------------------------------------------------------

def _require_compatible(mode_a, mode_b):
    from .modes import Chart, ModeStatistics

    fermion_a = mode_a.statistics is not ModeStatistics.BOSON
    fermion_b = mode_b.statistics is not ModeStatistics.BOSON
    if fermion_a != fermion_b:
        raise MeasureMismatch("cannot overlap bosonic with fermionic modes")
    ca, cb = mode_a.chart, mode_b.chart
    conformal = {Chart.RINDLER_CONFORMAL_I, Chart.RINDLER_CONFORMAL_II}
    if (ca in conformal) != (cb in conformal):
        raise MeasureMismatch("conformal and K-type charts do not mix")
    if not mode_a.grid.same_grid(mode_b.grid):
        raise IncompatibleGrids("modes sampled on different grids")
    return fermion_a


def overlap_scalar(mode_a, mode_b):
    """Field scalar product (mode_a, mode_b) at the shared Cauchy surface.

    Sampled-mode conventions (see modes module): wedge-localized modes
    live on a positive chi grid (distance from the wedge apex, equal to
    |x| at t = 0); `time_derivative` is d/dt for Minkowski-chart modes
    and the rapidity derivative d/d(a eta) for Rindler-chart modes, which
    makes every overlap independent of the Rindler gauge parameter.

    Bosonic products:
      Minkowski x Minkowski:  i int dx (a* b_t - b a*_t)
      same wedge:          +-i int dchi/chi (a* b_rap - b a*_rap),
                           minus in wedge II (past-directed boost field)
      Minkowski x wedge:      Minkowski form with d/dt = +-(1/chi) d/d(a eta)
    Dirac modes use  int dchi a^dag b  with no derivative terms.

    Antilinear in the first argument for bosons.  Modes from disjoint
    wedges overlap to exactly zero.
    """
    from .modes import Chart

    fermion = _require_compatible(mode_a, mode_b)
    ca, cb = mode_a.chart, mode_b.chart
    wedge_i = {Chart.RINDLER_I, Chart.RINDLER_CONFORMAL_I}
    wedge_ii = {Chart.RINDLER_II, Chart.RINDLER_CONFORMAL_II}
    region_a = mode_a.meta.get("region")
    region_b = mode_b.meta.get("region")
    in_i = lambda c, reg: c in wedge_i or (c is Chart.MINKOWSKI and reg == "I")
    in_ii = lambda c, reg: c in wedge_ii or (c is Chart.MINKOWSKI
                                             and reg == "II")
    if (in_i(ca, region_a) and in_ii(cb, region_b)) or \
            (in_ii(ca, region_a) and in_i(cb, region_b)):
        return 0.0j

    x = mode_a.grid.points
    w = mode_a.grid.trapezoid_weights

    if fermion:
        return complex(np.sum(w * np.sum(np.conj(mode_a.profile)
                                         * mode_b.profile, axis=1)))

    def dt_profile(mode):
        """d/dt of the profile in the Minkowski frame at t = 0."""
        if mode.chart is Chart.MINKOWSKI:
            return mode.time_derivative
        sign = 1.0 if mode.chart in wedge_i else -1.0
        return sign * mode.time_derivative / x

    if ca is Chart.MINKOWSKI and cb is Chart.MINKOWSKI:
        integrand = (np.conj(mode_a.profile) * mode_b.time_derivative
                     - mode_b.profile * np.conj(mode_a.time_derivative))
        return complex(1j * np.sum(w * integrand))

    if ca is Chart.MINKOWSKI or cb is Chart.MINKOWSKI:
        # mixed-chart overlap in the Minkowski form; the shared grid is
        # the wedge-local chi grid (dx = dchi at t = 0)
        integrand = (np.conj(mode_a.profile) * dt_profile(mode_b)
                     - mode_b.profile * np.conj(dt_profile(mode_a)))
        return complex(1j * np.sum(w * integrand))

    # both modes in the same wedge
    sign = 1.0 if ca in wedge_i else -1.0
    conformal = ca in {Chart.RINDLER_CONFORMAL_I, Chart.RINDLER_CONFORMAL_II}
    measure = w if conformal else w / x
    integrand = (np.conj(mode_a.profile) * mode_b.time_derivative
                 - mode_b.profile * np.conj(mode_a.time_derivative))
    return complex(sign * 1j * np.sum(measure * integrand))


# ---------------------------------------------------------------------------
# Verification battery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BatteryCase:
    name: str
    f: object
    a: float
    b: float
    exact: float
    spec: QuadSpec = field(default_factory=QuadSpec)


def verification_battery():
    """Integrals with independently known values, used by selftest and by
    the honesty check on reported error estimates."""
    cases = [
        BatteryCase("exp-decay", lambda x: math.exp(-x), 0.0, np.inf, 1.0),
        BatteryCase("bose", _bose_weighted, 1e-300, np.inf, 1.0 / 24.0),
        BatteryCase("gauss", lambda x: math.exp(-x * x), -8.0, 8.0,
                    math.sqrt(math.pi)),
        BatteryCase("poly", lambda x: x ** 3 - 2 * x, 0.0, 2.0, 0.0),
        BatteryCase("log-endpoint", lambda x: math.log(x), 0.0, 1.0, -1.0),
        BatteryCase("runge", lambda x: 1.0 / (1.0 + 25 * x * x), -1.0, 1.0,
                    2.0 / 5.0 * math.atan(5.0)),
        BatteryCase("osc", lambda x: math.cos(40 * x), 0.0, math.pi,
                    math.sin(40 * math.pi) / 40.0),
        BatteryCase("sqrt-sing", lambda x: 1.0 / math.sqrt(x), 1e-300, 1.0,
                    2.0),
        BatteryCase("lorentz-tail", lambda x: 1.0 / (1.0 + x * x), 0.0,
                    np.inf, math.pi / 2.0),
        BatteryCase("exp-cos", lambda x: math.exp(-x) * math.cos(x), 0.0,
                    np.inf, 0.5),
        BatteryCase("de-exp", lambda x: math.exp(-x), 0.0, np.inf, 1.0,
                    QuadSpec(semi_infinite_map=SemiInfiniteMap.DOUBLE_EXP)),
        BatteryCase("expmap-exp", lambda x: math.exp(-2 * x), 0.0, np.inf,
                    0.5, QuadSpec(semi_infinite_map=SemiInfiniteMap.EXP_DECAY)),
    ]
    return cases


def run_battery():
    """Evaluate all battery cases; returns (n_ok, results)."""
    results = []
    for case in verification_battery():
        res = integrate_adaptive(case.f, case.a, case.b, case.spec)
        actual = abs(np.real(res.value) - case.exact)
        tol = max(case.spec.abs_tol, case.spec.rel_tol * abs(case.exact))
        ok = actual <= max(tol, 10 * res.error + 1e-15)
        honest = res.error >= actual or actual < 1e-14
        results.append((case.name, ok, honest, actual, res.error))
    n_ok = sum(1 for _, ok, _, _, _ in results if ok)
    return n_ok, results
