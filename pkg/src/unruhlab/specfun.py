"""Modified Bessel functions of imaginary order and related pieces.

K_iv(x) is real and even in v; for large v it decays like e^{-pi v/2},
so every consumer in this package works with the scaled function

    Kt_iv(x) = e^{pi v / 2} K_iv(x),

which stays O(1) in the oscillatory regime v >~ x.  Two evaluation
strategies cover the parameter ranges that appear in the pipelines:

* direct quadrature of  K_iv(x) = int_0^inf e^{-x cosh t} cos(v t) dt,
  with the e^{pi v/2} scaling folded into the integrand.  Stable for
  small orders and, more generally, whenever the cancellation budget
  x*(f(v/x) - 1) (monotone regime) or pi v/2 - x (oscillatory regime)
  stays small; f(r) = sqrt(1-r^2) + r asin r.

* the ascending series through  K_iv = -pi Im I_iv / sinh(pi v), with
  I_iv = exp(iv log(x/2) - loggamma(1+iv)) * sum_k (x^2/4)^k / (k! (1+iv)_k),
  carried out in log-scaled arithmetic so it works up to |v| ~ 1e4.
  Safe when the series terms do not grow, i.e. x^2/(4(1+v)) small.

The two regions overlap for every (v, x) needed by the channel, clock
and mode pipelines; a residual corner (x large with v slightly below x)
falls back to quadrature with a LossOfPrecisionWarning.

Half-shifted orders K_{iv +- 1/2} (spinor modes) use the same two paths
via  K_mu = pi (I_{-mu} - I_mu) / (2 sin(pi mu))  and the cosh(mu t)
integral representation.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import loggamma

from .errors import DomainError, LossOfPrecisionWarning, OrderOutOfRange

NU_MAX = 1.0e4          # documented supported order magnitude
_SMALL_X_WARN = 1e-6    # distributional regime of K_iv
_DIRECT_NU = 8.0        # direct quadrature always used below this order
_CANCEL_BUDGET = 18.0   # max tolerated log cancellation for quadrature
_GROWTH_BUDGET = 18.0   # max tolerated log series-term growth


def gamma_imag_axis(nu):
    """Gamma(1 + i*nu) for real nu."""
    return complex(np.exp(loggamma(1.0 + 1j * float(nu))))


def _as_positive_array(x):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("argument x must be positive and finite")
    if np.any(arr < _SMALL_X_WARN):
        warnings.warn("K_iv argument below 1e-6: distributional regime",
                      LossOfPrecisionWarning, stacklevel=3)
    return arr


def _check_order(nu):
    nu = float(nu)
    if not math.isfinite(nu):
        raise DomainError("order must be finite")
    if abs(nu) > NU_MAX:
        raise OrderOutOfRange(f"|nu| = {abs(nu):.3g} exceeds {NU_MAX:.0e}")
    return abs(nu)  # K_iv is even in nu


def _monotone_exponent(nu, x):
    """log |K_iv(x)| ~ -x f(r) with r = nu/x < 1 (saddle estimate)."""
    r = nu / x
    return -x * (math.sqrt(1.0 - r * r) + r * math.asin(r))


def _direct_cancellation(nu, x):
    """Anticipated log cancellation of the scaled quadrature."""
    if nu >= x:
        return 0.5 * math.pi * nu - x
    return x + _monotone_exponent(nu, x)


def _series_growth(nu, x):
    """Crude log bound on the largest ascending-series term."""
    x = np.asarray(x, dtype=float)
    return x * x / (4.0 * (1.0 + nu))


def _quad_nodes(nu, x_min, target=750.0):
    """Panelled Gauss-Legendre nodes for int_0^tmax e^{-x cosh t} cos(nu t)."""
    s = 0.5 * math.pi * nu
    # beyond tmax the (scaled) integrand is below e^{-target}
    tmax = math.acosh(max((target + s) / x_min, 1.0 + 1e-12)) + 0.5
    width = min(0.5, 2.0 * math.pi / (10.0 * max(nu, 1.0)))
    n_panels = max(8, int(math.ceil(tmax / width)))
    gx, gw = leggauss(16)
    edges = np.linspace(0.0, tmax, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    return t, w


def _kiv_quad_scaled(nu, xs):
    """e^{pi nu/2} K_{i nu}(x) by quadrature; xs is a 1-D positive array."""
    t, w = _quad_nodes(nu, float(np.min(xs)))
    s = 0.5 * math.pi * nu
    expo = s - xs[:, None] * np.cosh(t)[None, :]
    np.clip(expo, -745.0, 50.0, out=expo)
    vals = np.exp(expo) * np.cos(nu * t)[None, :]
    return vals @ w


def _kiv_series_scaled(nu, xs):
    """e^{pi nu/2} K_{i nu}(x) by the log-scaled ascending series."""
    lg = loggamma(1.0 + 1j * nu)
    # amplitude 2 pi e^{-pi nu/2 - Re lg} / (1 - e^{-2 pi nu}), kept in logs
    log_amp = (math.log(2.0 * math.pi) - 0.5 * math.pi * nu - lg.real
               - math.log1p(-math.exp(-2.0 * math.pi * nu)))
    amp = math.exp(log_amp)
    q = 0.25 * xs * xs
    term = np.ones(len(xs), dtype=complex)
    total = term.copy()
    for k in range(400):
        term = term * (q / ((k + 1.0) * (k + 1.0 + 1j * nu)))
        total += term
        if np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(total)), 1.0):
            break
    phase = nu * np.log(0.5 * xs) - lg.imag
    return -amp * (np.sin(phase) * total.real + np.cos(phase) * total.imag)


def bessel_K_imag_grid(nu, x, scaled=False):
    """K_{i nu}(x) on an array of positive arguments x.

    With scaled=True returns e^{pi |nu|/2} K_{i nu}(x).
    """
    anu = _check_order(nu)
    xs = _as_positive_array(x)
    if anu <= _DIRECT_NU:
        out = _kiv_quad_scaled(anu, xs)
    else:
        x_hi = float(np.max(xs))
        if _series_growth(anu, x_hi) <= _GROWTH_BUDGET:
            out = _kiv_series_scaled(anu, xs)
        elif _direct_cancellation(anu, x_hi) <= _CANCEL_BUDGET:
            out = _kiv_quad_scaled(anu, xs)
        else:
            # split pointwise; warn for any genuinely uncovered points
            out = np.empty_like(xs)
            ser = _series_growth(anu, xs) <= _GROWTH_BUDGET
            if np.any(ser):
                out[ser] = _kiv_series_scaled(anu, xs[ser])
            if np.any(~ser):
                bad = xs[~ser]
                if _direct_cancellation(anu, float(np.max(bad))) > \
                        _CANCEL_BUDGET:
                    warnings.warn(
                        f"K_iv transition corner (nu={anu:.3g}, "
                        f"x up to {np.max(bad):.3g}): reduced accuracy",
                        LossOfPrecisionWarning, stacklevel=2)
                out[~ser] = _kiv_quad_scaled(anu, bad)
    if not scaled:
        s = 0.5 * math.pi * anu
        out = out * math.exp(-s) if s < 700.0 else out * 0.0
    return out


def bessel_K_imag(nu, x, scaled=False):
    """K_{i nu}(x) for scalar positive x (real result, even in nu)."""
    return float(bessel_K_imag_grid(nu, [float(x)], scaled=scaled)[0])


def _kiv_series_scaled_orders(nus, x):
    """e^{pi nu/2} K_{i nu}(x) vectorized over an order array, scalar x."""
    lg = loggamma(1.0 + 1j * nus)
    log_amp = (math.log(2.0 * math.pi) - 0.5 * math.pi * nus - lg.real
               - np.log1p(-np.exp(-2.0 * math.pi * nus)))
    amp = np.exp(log_amp)
    q = 0.25 * x * x
    term = np.ones(len(nus), dtype=complex)
    total = term.copy()
    for k in range(400):
        term = term * (q / ((k + 1.0) * (k + 1.0 + 1j * nus)))
        total += term
        if np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(total)), 1.0):
            break
    phase = nus * math.log(0.5 * x) - lg.imag
    return -amp * (np.sin(phase) * total.real + np.cos(phase) * total.imag)


def bessel_K_imag_orders(nus, x, scaled=False):
    """K_{i nu}(x) over an array of orders at fixed argument x > 0.

    Used by the channel kernels, which need K at thousands of orders and
    one argument per geometry point.  Same region logic as the scalar
    path; with scaled=True returns e^{pi |nu|/2} K_{i nu}(x).
    """
    nus = np.abs(np.asarray(nus, dtype=float))
    if np.any(nus > NU_MAX):
        raise OrderOutOfRange("order array exceeds supported range")
    xs = _as_positive_array([x])
    x = float(xs[0])
    out = np.empty(nus.size)
    small = nus <= _DIRECT_NU
    if np.any(small):
        # shared quadrature nodes built for the largest small order
        t, w = _quad_nodes(_DIRECT_NU, x)
        expo = -x * np.cosh(t)
        sub = nus[small]
        vals = np.exp(sub[:, None] * (0.5 * math.pi)
                      + expo[None, :]) * np.cos(np.outer(sub, t))
        out[small] = vals @ w
    if np.any(~small):
        big = nus[~small]
        if _series_growth(float(np.min(big)), x) > _GROWTH_BUDGET:
            warnings.warn("K_iv order sweep in the transition corner",
                          LossOfPrecisionWarning, stacklevel=2)
        out[~small] = _kiv_series_scaled_orders(big, x)
    if not scaled:
        with np.errstate(under="ignore"):
            out = out * np.exp(-0.5 * math.pi * nus)
    return out


def bessel_K_large_arg(x):
    """Leading large-argument form sqrt(pi/(2x)) e^{-x} (order-free)."""
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)


def _i_order_series(mu, xs):
    """I_mu(x) = exp(mu log(x/2) - lg(1+mu)) * S for complex order mu."""
    lg = loggamma(1.0 + mu)
    q = 0.25 * xs * xs
    term = np.ones(len(xs), dtype=complex)
    total = term.copy()
    for k in range(600):
        term = term * (q / ((k + 1.0) * (k + 1.0 + mu)))
        total += term
        if np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(total)), 1.0):
            break
    pref = np.exp(mu * np.log(0.5 * xs) - lg)
    return pref * total


def bessel_I_imag_grid(nu, x):
    """I_{i nu}(x) (complex) on an array of positive arguments, x <= 300."""
    nu = float(nu)
    _check_order(nu)
    xs = _as_positive_array(x)
    if np.max(xs) > 300.0:
        raise OverflowError("I_iv supported for x <= 300")
    if abs(nu) > 430.0:
        # 1/Gamma(1+i nu) overflows double; callers needing larger orders
        # use the scaled K path instead.
        raise OrderOutOfRange("unscaled I_iv limited to |nu| <= 430")
    return _i_order_series(1j * nu, xs)


def bessel_I_imag(nu, x):
    return complex(bessel_I_imag_grid(nu, [float(x)])[0])


def scaled_I_pair_im(nu, a_arg, x):
    """e^{-pi nu} Im[ I_{-i nu}(a_arg) I_{i nu}(x) ]  on an array x.

    This is the standing-wave radial shape of an accelerated cavity-like
    mode; the e^{-pi nu} scaling keeps it representable for any order
    (each I factor grows like e^{pi nu / 2}).
    """
    nu = abs(float(nu))
    _check_order(nu)
    xs = _as_positive_array(x)
    if max(float(np.max(xs)), float(a_arg)) > 300.0:
        raise OverflowError("I_iv pair supported for arguments <= 300")
    s = 0.5 * math.pi * nu
    lg = loggamma(1.0 + 1j * nu)

    def scaled_i(vals):
        """e^{-pi nu/2} I_{i nu} on vals."""
        q = 0.25 * vals * vals
        term = np.ones(len(vals), dtype=complex)
        total = term.copy()
        for k in range(600):
            term = term * (q / ((k + 1.0) * (k + 1.0 + 1j * nu)))
            total += term
            if np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(total)), 1.0):
                break
        phase = nu * np.log(0.5 * vals) - lg.imag
        return np.exp(-lg.real - s) * np.exp(1j * phase) * total

    ia = scaled_i(np.array([float(a_arg)]))[0]
    ix = scaled_i(xs)
    return np.imag(np.conj(ia) * ix)


def _k_shift_series_scaled(nu, shift, xs):
    """e^{pi nu/2} K_{i nu + shift}(x) via the reflection formula,
    log-scaled; shift is +-1/2, nu >= 0.

    K_{i nu + 1/2} = pi (conj(I_{i nu - 1/2}) - I_{i nu + 1/2}) / (2 cosh pi nu)
    and swapping 1/2 -> -1/2 swaps the two I's.
    """
    s = 0.5 * math.pi * nu

    def scaled_i(sigma):
        """e^{-pi nu/2} I_{i nu + sigma}(x)."""
        mu = 1j * nu + sigma
        lg = loggamma(1.0 + mu)
        q = 0.25 * xs * xs
        term = np.ones(len(xs), dtype=complex)
        total = term.copy()
        for k in range(600):
            term = term * (q / ((k + 1.0) * (k + 1.0 + mu)))
            total += term
            if np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(total)), 1.0):
                break
        log_mag = sigma * np.log(0.5 * xs) - lg.real - s
        phase = nu * np.log(0.5 * xs) - lg.imag
        return np.exp(log_mag + 1j * phase) * total

    i_plus = scaled_i(0.5)
    i_minus = scaled_i(-0.5)
    denom = 1.0 + math.exp(-2.0 * math.pi * nu)  # 2 cosh(pi nu) e^{-pi nu}
    if shift > 0:
        return math.pi * (np.conj(i_minus) - i_plus) / denom
    # sin(pi(i nu - 1/2)) = -cosh(pi nu) flips the sign for shift = -1/2
    return math.pi * (i_minus - np.conj(i_plus)) / denom


def _k_shift_quad_scaled(nu, shift, xs):
    """Quadrature for e^{pi nu/2} K_{i nu +- 1/2}(x):
    int e^{-x cosh t} [cosh(t/2) cos(nu t) +- i sinh(t/2) sin(nu t)] dt."""
    t, w = _quad_nodes(nu + 0.5, float(np.min(xs)))
    s = 0.5 * math.pi * nu
    expo = s - xs[:, None] * np.cosh(t)[None, :]
    np.clip(expo, -745.0, 50.0, out=expo)
    env = np.exp(expo)
    re = env * (np.cosh(0.5 * t) * np.cos(nu * t))[None, :]
    im = env * (np.sinh(0.5 * t) * np.sin(nu * t))[None, :]
    sign = 1.0 if shift > 0 else -1.0
    return re @ w + 1j * sign * (im @ w)


def bessel_K_imag_shifted_grid(nu, shift, x, scaled=False):
    """K_{i nu + shift}(x) for shift in {-1/2, 0, +1/2}; complex.

    Conjugation symmetry K_{-i nu + s}(x) = conj(K_{i nu + s}(x)) maps
    negative orders onto positive ones.
    """
    if shift == 0:
        return bessel_K_imag_grid(nu, x, scaled=scaled).astype(complex)
    if shift not in (0.5, -0.5):
        raise DomainError("shift must be -1/2, 0 or +1/2")
    nu = float(nu)
    _check_order(nu)
    xs = _as_positive_array(x)
    conj = nu < 0.0
    anu = abs(nu)
    if anu <= _DIRECT_NU:
        out = _k_shift_quad_scaled(anu, shift, xs)
    elif np.max(_series_growth(anu, np.max(xs))) <= _GROWTH_BUDGET:
        out = _k_shift_series_scaled(anu, shift, xs)
    else:
        if _direct_cancellation(anu, float(np.max(xs))) > _CANCEL_BUDGET:
            warnings.warn("K_{iv+1/2} transition corner: reduced accuracy",
                          LossOfPrecisionWarning, stacklevel=2)
        out = _k_shift_quad_scaled(anu, shift, xs)
    if conj:
        out = np.conj(out)
    if not scaled:
        s = 0.5 * math.pi * anu
        out = out * math.exp(-s) if s < 700.0 else out * 0.0
    return out


def bessel_K_imag_shifted(nu, shift, x, scaled=False):
    return complex(bessel_K_imag_shifted_grid(nu, shift, [float(x)],
                                              scaled=scaled)[0])
