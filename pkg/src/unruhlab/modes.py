"""Field-mode construction: plane waves, cavity modes, boost modes and
localized wavepackets, sampled on 1-D spatial grids.

Conventions
-----------
* Wedge-localized modes (both charts) are sampled on the wedge-local
  coordinate chi > 0, the distance from the wedge apex; at t = 0 this is
  |x| up to the wedge shift, and region-II profiles are stored as mirror
  images, so intra-wedge overlaps never see the shift.
* `time_derivative` holds d(profile)/dt for Minkowski-chart modes and
  the rapidity derivative d(profile)/d(a eta) for Rindler-chart modes.
  The rapidity derivative of a mode with proper frequency Omega0 on the
  hyperbola of acceleration A is -+ i (Omega0 / A) * profile, which makes
  every stored object independent of the Rindler gauge parameter a.
* Boost modes are held in the gauge-free normalization
      what_u(chi) = sqrt(sinh(pi u)/pi^2) K_{iu}(m_eff chi),
  delta-normalized in the dimensionless frequency u = Omega/a; the
  conventional mode of frequency Omega at gauge a is what_u / sqrt(a).
* Dirac modes carry 2-component profiles and no time derivative.

Localized wavepackets are built from the displayed envelope
exp(-2 (log(A chi)/(A L))^2) times a standing-wave factor, then
projected onto the positive-frequency family of their own chart
(Fourier modes for inertial packets, the Kontorovich-Lebedev family for
accelerated ones) so that annihilation operators of the packet involve
only annihilators of its rest-frame quanta.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import specfun
from .errors import (
    DomainError,
    FrequencyBelowMass,
    MasslessNonConformal1D,
    ProjectionChangedProfile,
    RootBracketingFailed,
    ZeroModeRequested,
)
from .quad import Grid1D, overlap_scalar

DEFAULT_POINTS = 4096
ENVELOPE_HALFWIDTHS = 8.0   # grid spans +-8 Gaussian widths of the envelope
PROFILE_CHANGE_DEFAULT = 2e-2  # L^2 gate on the projection-induced change


class Chart(enum.Enum):
    MINKOWSKI = "minkowski"
    RINDLER_I = "rindler-I"
    RINDLER_II = "rindler-II"
    RINDLER_CONFORMAL_I = "rindler-conformal-I"
    RINDLER_CONFORMAL_II = "rindler-conformal-II"


class ModeStatistics(enum.Enum):
    BOSON = "boson"
    FERMION_PARTICLE = "fermion-particle"
    FERMION_ANTIPARTICLE = "fermion-antiparticle"


@dataclass(frozen=True)
class SampledMode:
    grid: Grid1D
    profile: np.ndarray
    time_derivative: np.ndarray | None
    chart: Chart
    statistics: ModeStatistics = ModeStatistics.BOSON
    meta: dict = field(default_factory=dict)

    def norm(self):
        return float(np.real(overlap_scalar(self, self)))

    @property
    def is_dirac(self):
        return self.statistics is not ModeStatistics.BOSON

    def with_fields(self, **kw):
        data = dict(grid=self.grid, profile=self.profile,
                    time_derivative=self.time_derivative, chart=self.chart,
                    statistics=self.statistics, meta=self.meta)
        data.update(kw)
        return SampledMode(**data)


@dataclass(frozen=True)
class CavityFrequencies:
    boundary: str
    omegas: np.ndarray
    labels: np.ndarray


# ---------------------------------------------------------------------------
# Scaled-Bessel helpers
# ---------------------------------------------------------------------------

def boost_mode_grid(u, y):
    """sqrt(sinh(pi u)/pi^2) K_{iu}(y) on an array y, evaluated through the
    scaled Bessel so it stays finite for any u."""
    u = float(u)
    if u <= 0.0:
        raise DomainError("boost-mode frequency u must be positive")
    # sqrt(sinh) * e^{-pi u/2} = sqrt((1 - e^{-2 pi u})/2)
    pref = math.sqrt(0.5 * -math.expm1(-2.0 * math.pi * u)) / math.pi
    return pref * kt_on_grid(u, y)


def kt_on_grid(u, y):
    """e^{pi u/2} K_{iu}(y) on a (sorted) array y; subsamples + splines the
    quadrature path, which is smooth in log y, to keep grids cheap."""
    y = np.asarray(y, dtype=float)
    if u <= specfun._DIRECT_NU and y.size > 700:
        idx = np.unique(np.linspace(0, y.size - 1, 512).astype(int))
        vals = specfun.bessel_K_imag_grid(u, y[idx], scaled=True)
        return CubicSpline(np.log(y[idx]), vals)(np.log(y))
    return specfun.bessel_K_imag_grid(u, y, scaled=True)


# ---------------------------------------------------------------------------
# Delta-normalized families and simple cavity modes
# ---------------------------------------------------------------------------

def minkowski_plane_wave(k, m, grid=None, extent=40.0, n_points=DEFAULT_POINTS):
    """Plane wave e^{ikx}/sqrt(4 pi omega_k) with omega = sqrt(k^2+m^2),
    sampled on `grid` (default symmetric around 0); delta-normalized:
    (u_k, u_k') = delta(k - k') in the continuum."""
    omega = math.hypot(k, m)
    if grid is None:
        grid = Grid1D(np.linspace(-extent, extent, n_points))
    x = grid.points
    prof = np.exp(1j * k * x) / math.sqrt(4.0 * math.pi * omega)
    return SampledMode(grid, prof, -1j * omega * prof, Chart.MINKOWSKI,
                       meta={"k": k, "m": m, "omega": omega})


def cavity_mode(boundary, n, L, m, grid=None, sigma_minus=0.0,
                n_points=DEFAULT_POINTS):
    """Stationary cavity mode on [sigma_minus, sigma_minus + L].

    Dirichlet: sin(n pi (x - s)/L)/sqrt(omega_n L), n >= 1.
    Periodic:  e^{2 pi i n (x - s)/L}/sqrt(2 omega_n L), n != 0
               (equals 1/sqrt(4 pi |n|) in the massless case).
    """
    if boundary not in ("dirichlet", "periodic"):
        raise DomainError("boundary must be 'dirichlet' or 'periodic'")
    if grid is None:
        grid = Grid1D(np.linspace(sigma_minus, sigma_minus + L, n_points))
    x = grid.points - sigma_minus
    if boundary == "dirichlet":
        if n < 1:
            raise DomainError("Dirichlet labels start at n = 1")
        kn = n * math.pi / L
        omega = math.hypot(kn, m)
        prof = np.sin(kn * x) / math.sqrt(omega * L) + 0.0j
    else:
        if n == 0:
            raise ZeroModeRequested("periodic zero mode is omitted")
        kn = 2.0 * math.pi * n / L
        omega = math.hypot(kn, m)
        prof = np.exp(1j * kn * x) / math.sqrt(2.0 * omega * L)
    return SampledMode(grid, prof, -1j * omega * prof, Chart.MINKOWSKI,
                       meta={"boundary": boundary, "n": n, "L": L, "m": m,
                             "omega": omega})


def rindler_mode(wedge, Omega, k_perp=None, m=0.0, a=1.0, conformal=False,
                 grid=None, n_points=DEFAULT_POINTS):
    """Boost mode of frequency Omega at Rindler gauge a (u = Omega/a).

    Massive (or transverse-momentum-carrying) modes are K-Bessel shapes
    on a chi grid; the massless 1D case must be requested with
    conformal=True and lives on a xi grid as a plane wave.
    """
    if Omega <= 0 or a <= 0:
        raise DomainError("Omega and a must be positive")
    u = Omega / a
    kp2 = 0.0 if k_perp is None else float(np.dot(k_perp, k_perp))
    m_eff = math.sqrt(kp2 + m * m)
    sign = -1.0 if wedge == "I" else 1.0  # d/d(a eta) phase: -+ i u
    if conformal:
        if m_eff > 0:
            raise DomainError("conformal boost modes require m_eff = 0")
        if grid is None:
            grid = Grid1D(np.linspace(-20.0 / max(u, 1.0), 20.0 / max(u, 1.0),
                                      n_points))
        xi = grid.points
        # right-moving branch; the left-mover is the complex conjugate in xi
        prof = np.exp((1j if wedge == "I" else -1j) * Omega * xi) \
            / math.sqrt(4.0 * math.pi * Omega)
        chart = (Chart.RINDLER_CONFORMAL_I if wedge == "I"
                 else Chart.RINDLER_CONFORMAL_II)
        return SampledMode(grid, prof, sign * 1j * u * prof, chart,
                           meta={"Omega": Omega, "a": a, "u": u, "m": 0.0})
    if m_eff == 0.0:
        raise MasslessNonConformal1D(
            "massless 1D boost modes exist only in the conformal chart")
    if grid is None:
        lo = min(0.05, 0.5 / u if u > 0 else 0.05) / m_eff
        hi = (30.0 + 3 * u) / m_eff
        grid = Grid1D(np.geomspace(lo, hi, n_points))
    chi = grid.points
    prof = boost_mode_grid(u, m_eff * chi) / math.sqrt(a) + 0.0j
    chart = Chart.RINDLER_I if wedge == "I" else Chart.RINDLER_II
    return SampledMode(grid, prof, sign * 1j * u * prof, chart,
                       meta={"Omega": Omega, "a": a, "u": u, "m": m,
                             "k_perp": k_perp, "m_eff": m_eff})


def rindler_cavity_frequencies(sigma_minus, sigma_plus, m_eff, a, count):
    """First `count` eigenfrequencies of a uniformly accelerated Dirichlet
    cavity with walls at chi = sigma_-+.

    Roots nu_n of Im{ I_{-i nu}(m sigma_-) I_{i nu}(m sigma_+) } = 0,
    returned as omega_n = a nu_n.  For m_eff -> 0 they approach
    a n pi / log(sigma_+/sigma_-).
    """
    if not 0 < sigma_minus < sigma_plus:
        raise DomainError("need 0 < sigma_- < sigma_+")
    if count < 1:
        raise DomainError("count must be positive")
    ratio = math.log(sigma_plus / sigma_minus)
    if m_eff == 0.0:
        labels = np.arange(1, count + 1)
        return CavityFrequencies("rindler-dirichlet",
                                 a * labels * math.pi / ratio, labels)

    xs = np.array([m_eff * sigma_plus])

    def f(nu):
        if nu <= 0.0:
            return 0.0
        val = specfun.scaled_I_pair_im(nu, m_eff * sigma_minus, xs)[0]
        # normalize away the overall magnitude so residuals are O(1)
        scale = abs(specfun.scaled_I_pair_im(
            nu, m_eff * sigma_minus, np.array([m_eff * sigma_minus]))[0])
        return val / max(1e-300, math.sqrt(scale) if scale > 0 else 1.0)

    # raw (unnormalized) sign function is enough for bracketing
    def raw(nu):
        return specfun.scaled_I_pair_im(nu, m_eff * sigma_minus, xs)[0]

    step = 0.2 * math.pi / ratio
    roots = []
    nu_lo = step * 1e-3
    f_lo = raw(nu_lo)
    nu = nu_lo
    for _ in range(200 * count):
        nu_hi = nu + step
        f_hi = raw(nu_hi)
        if f_lo == 0.0:
            roots.append(nu)
        elif f_lo * f_hi < 0.0:
            roots.append(brentq(raw, nu, nu_hi, xtol=1e-13, rtol=1e-14))
        nu, f_lo = nu_hi, f_hi
        if len(roots) >= count:
            break
    if len(roots) < count:
        raise RootBracketingFailed(
            f"found {len(roots)} of {count} eigenfrequencies")
    omegas = a * np.asarray(roots[:count])
    return CavityFrequencies("rindler-dirichlet", omegas,
                             np.arange(1, count + 1))


# ---------------------------------------------------------------------------
# Localized wavepackets
# ---------------------------------------------------------------------------

def _envelope_grid(A, L, n_points):
    """Log-spaced chi grid covering +-ENVELOPE_HALFWIDTHS envelope widths;
    the envelope exp(-2 (v/(A L))^2) in v = log(A chi) has width A L / 2."""
    half = ENVELOPE_HALFWIDTHS * 0.5 * A * L
    v = np.linspace(-half, half, n_points)
    return Grid1D(np.exp(v) / A), v


def _transverse_profile(L_perp, kappa_perp):
    """Normalization of  e^{-2(y^2+z^2)/Lp^2} sin(kp y) sin(kp z)  and the
    closed-form Fourier transform of one factor.

    t(q) = int dy e^{-alpha y^2} sin(kp y) e^{-iqy}
         = -(i/2) sqrt(pi/alpha) [e^{-(q-kp)^2/(4 alpha)}
                                  - e^{-(q+kp)^2/(4 alpha)}],
    with alpha = 2/Lp^2.
    """
    alpha = 2.0 / (L_perp * L_perp)

    def t_hat(q):
        q = np.asarray(q, dtype=float)
        return -0.5j * math.sqrt(math.pi / alpha) * (
            np.exp(-(q - kappa_perp) ** 2 / (4 * alpha))
            - np.exp(-(q + kappa_perp) ** 2 / (4 * alpha)))

    # int |e^{-alpha y^2} sin(kp y)|^2 dy
    #   = (1/2) sqrt(pi/(2 alpha)) (1 - e^{-kp^2/(2 alpha)})
    one_dim = 0.5 * math.sqrt(math.pi / (2 * alpha)) * \
        -math.expm1(-kappa_perp ** 2 / (2 * alpha))
    return {"alpha": alpha, "t_hat": t_hat, "norm2_1d": one_dim}


def _normalize(mode):
    n = mode.norm()
    if n <= 0:
        raise DomainError("mode has non-positive norm")
    s = 1.0 / math.sqrt(n)
    return mode.with_fields(profile=mode.profile * s,
                            time_derivative=mode.time_derivative * s)


def _project_minkowski(mode, k0, width_k):
    """Split Cauchy data into +-frequency plane-wave content; drop the
    negative part and resynthesize.  Returns (projected mode, fraction)."""
    x = mode.grid.points
    w = mode.grid.trapezoid_weights
    m = mode.meta["m"]
    k_max = k0 + 14.0 * width_k
    n_k = 1536
    ks = np.linspace(-k_max, k_max, n_k)
    wk = np.full(n_k, ks[1] - ks[0])
    wk[0] = wk[-1] = 0.5 * wk[0]
    omega = np.hypot(ks, m)
    basis = np.exp(-1j * np.outer(ks, x)) / np.sqrt(
        4.0 * math.pi * omega)[:, None]
    f = mode.profile
    fdot = mode.time_derivative
    # a(k) = int dx e^{-ikx} (omega f + i fdot)/sqrt(4 pi omega)
    a_k = omega * (basis @ (w * f)) + 1j * (basis @ (w * fdot))
    # b(k) = int dx e^{+ikx} (omega f - i fdot)/sqrt(4 pi omega)
    basis_p = np.conj(basis)
    b_k = omega * (basis_p @ (w * f)) - 1j * (basis_p @ (w * fdot))
    pos = np.sum(wk * np.abs(a_k) ** 2)
    neg = np.sum(wk * np.abs(b_k) ** 2)
    fraction = neg / (pos + neg)
    # resynthesis of the positive part on the same grid
    synth = basis_p.T
    prof = synth @ (wk * a_k)
    dprof = synth @ (wk * a_k * (-1j) * omega)
    out = mode.with_fields(profile=prof, time_derivative=dprof)
    return _normalize(out), float(fraction)


def boost_family_matrix(u_values, chi_grid, m_eff):
    """Matrix of boost modes what_u(chi) on (u_values x chi_grid)."""
    mat = np.empty((len(u_values), len(chi_grid)))
    y = m_eff * chi_grid
    for i, u in enumerate(u_values):
        mat[i] = boost_mode_grid(u, y)
    return mat


def boost_content(mode, u_values):
    """Positive- and negative-frequency boost amplitudes of a wedge mode:
    a(u) = (what_u, mode), b(u) = -(what_u*, mode), vectorized over u."""
    chi = mode.grid.points
    meas = mode.grid.trapezoid_weights / chi
    m_eff = mode.meta.get("m_eff", mode.meta["m"])
    wedge_i = mode.chart is Chart.RINDLER_I
    us = np.asarray(u_values, dtype=float)
    a_u = np.empty(us.size, dtype=complex)
    b_u = np.empty(us.size, dtype=complex)
    for lo in range(0, us.size, 512):
        sel = slice(lo, min(lo + 512, us.size))
        mk = boost_family_matrix(us[sel], chi, m_eff) * meas[None, :]
        g_f = mk @ mode.profile
        g_d = mk @ mode.time_derivative
        if wedge_i:
            a_u[sel] = us[sel] * g_f + 1j * g_d
            b_u[sel] = us[sel] * g_f - 1j * g_d
        else:
            a_u[sel] = us[sel] * g_f - 1j * g_d
            b_u[sel] = us[sel] * g_f + 1j * g_d
    return a_u, b_u


def _project_rindler(mode, u0, width_u):
    """Kontorovich-Lebedev projection onto the positive-frequency boost
    family of the mode's own wedge.  Returns (projected mode, fraction)."""
    chi = mode.grid.points
    m_eff = mode.meta.get("m_eff", mode.meta["m"])
    wedge_i = mode.chart is Chart.RINDLER_I
    u_lo = max(1e-4, u0 - 8.0 * width_u)
    u_hi = u0 + 8.0 * width_u
    n_u = min(5000, max(1024, int((u_hi - u_lo) / 0.04)))
    us = np.linspace(u_lo, u_hi, n_u)
    wu = np.full(n_u, us[1] - us[0])
    wu[0] = wu[-1] = 0.5 * wu[0]
    meas = mode.grid.trapezoid_weights / chi
    sgn = -1j if wedge_i else 1j
    pos = neg = 0.0
    prof = np.zeros(chi.size, dtype=complex)
    dprof = np.zeros(chi.size, dtype=complex)
    for lo in range(0, n_u, 512):
        sel = slice(lo, min(lo + 512, n_u))
        mat = boost_family_matrix(us[sel], chi, m_eff)
        mk = mat * meas[None, :]
        g_f = mk @ mode.profile
        g_d = mk @ mode.time_derivative
        if wedge_i:
            a_u = us[sel] * g_f + 1j * g_d
            b_u = us[sel] * g_f - 1j * g_d
        else:
            a_u = us[sel] * g_f - 1j * g_d
            b_u = us[sel] * g_f + 1j * g_d
        pos += float(np.sum(wu[sel] * np.abs(a_u) ** 2))
        neg += float(np.sum(wu[sel] * np.abs(b_u) ** 2))
        prof += mat.T @ (wu[sel] * a_u)
        dprof += mat.T @ (wu[sel] * a_u * sgn * us[sel])
    fraction = neg / (pos + neg)
    out = mode.with_fields(profile=prof, time_derivative=dprof)
    return _normalize(out), float(fraction)


def _check_packet_params(A, L, Omega0, m):
    if A <= 0 or L <= 0:
        raise DomainError("A and L must be positive")
    if Omega0 <= m:
        raise FrequencyBelowMass("need Omega0 > m")
    if A * L > 0.3:
        import warnings
        warnings.warn("A*L > 0.3: single-acceleration picture degrades",
                      UserWarning, stacklevel=3)
    if Omega0 * L < 3.0:
        import warnings
        warnings.warn("Omega0 < 3/L: negative-frequency content large",
                      UserWarning, stacklevel=3)


def wavepacket_inertial(region, A, L, Omega0, m, dims=1, extras=None,
                        n_points=DEFAULT_POINTS, project=True,
                        max_profile_change=PROFILE_CHANGE_DEFAULT):
    """Localized inertial wavepacket centered at distance 1/A from the
    wedge apex: envelope * sin(k0 (chi - 1/A)) with the frequency content
    concentrated at Omega0; region-II packets are stored as mirror images
    on the same positive chi grid.

    For dims=3 the packet factorizes into this x-profile times
    exp(-2(y^2+z^2)/L_perp^2) sin(kp y) sin(kp z); `extras` must then
    provide kappa_perp and L_perp, and the x-direction dispersion sees
    the effective mass sqrt(2 kp^2 + m^2).
    """
    extras = extras or {}
    if dims == 3:
        kp = extras["kappa_perp"]
        m_eff = math.sqrt(2.0 * kp * kp + m * m)
    else:
        m_eff = m
    _check_packet_params(A, L, Omega0, m_eff)
    grid, v = _envelope_grid(A, L, n_points)
    chi = grid.points
    k0 = math.sqrt(Omega0 ** 2 - m_eff ** 2)
    raw = np.exp(-2.0 * (v / (A * L)) ** 2) * np.sin(k0 * (chi - 1.0 / A))
    mode = SampledMode(
        grid, raw + 0.0j, -1j * Omega0 * raw + 0.0j, Chart.MINKOWSKI,
        meta={"region": region, "A": A, "L": L, "Omega0": Omega0, "m": m_eff,
              "m_phys": m, "dims": dims, **extras})
    mode = _normalize(mode)
    if dims == 3:
        tr = _transverse_profile(extras["L_perp"], kp)
        mode = mode.with_fields(meta={**mode.meta, "transverse": tr})
    if not project:
        return mode
    projected, fraction = _project_minkowski(mode, k0, 2.0 / L)
    change = _profile_change(mode, projected)
    if change > max_profile_change:
        raise ProjectionChangedProfile(
            f"projection changed the profile by {change:.2e} (L^2)")
    meta = {**projected.meta, "raw_negative_fraction": fraction,
            "projection_change": change}
    return projected.with_fields(meta=meta)


def wavepacket_accelerated(region, A, L, Omega0, m, dims=1, extras=None,
                           n_points=DEFAULT_POINTS, project=True,
                           max_profile_change=PROFILE_CHANGE_DEFAULT):
    """Uniformly accelerated wavepacket riding the hyperbola 1/A:
    envelope * Im[I_{-i u0}(m_eff/A) I_{i u0}(m_eff chi)] with proper
    frequency Omega0 (u0 = Omega0/A), in the wedge named by `region`."""
    extras = extras or {}
    if dims == 3:
        kp = extras["kappa_perp"]
        m_eff = math.sqrt(2.0 * kp * kp + m * m)
    else:
        m_eff = m
    if m_eff <= 0.0:
        raise MasslessNonConformal1D(
            "accelerated K-type packets need m_eff > 0")
    _check_packet_params(A, L, Omega0, m_eff)
    grid, v = _envelope_grid(A, L, n_points)
    chi = grid.points
    u0 = Omega0 / A
    shape = specfun.scaled_I_pair_im(u0, m_eff / A, m_eff * chi)
    raw = np.exp(-2.0 * (v / (A * L)) ** 2) * shape
    chart = Chart.RINDLER_I if region == "I" else Chart.RINDLER_II
    sgn = -1j if region == "I" else 1j
    mode = SampledMode(
        grid, raw + 0.0j, sgn * u0 * raw + 0.0j, chart,
        meta={"region": region, "A": A, "L": L, "Omega0": Omega0, "m": m_eff,
              "m_phys": m, "u0": u0, "dims": dims, **extras})
    mode = _normalize(mode)
    if dims == 3:
        tr = _transverse_profile(extras["L_perp"], kp)
        mode = mode.with_fields(meta={**mode.meta, "transverse": tr})
    if not project:
        return mode
    projected, fraction = _project_rindler(mode, u0, 2.0 / (A * L))
    change = _profile_change(mode, projected)
    if change > max_profile_change:
        raise ProjectionChangedProfile(
            f"projection changed the profile by {change:.2e} (L^2)")
    meta = {**projected.meta, "raw_negative_fraction": fraction,
            "projection_change": change}
    return projected.with_fields(meta=meta)


def _profile_change(before, after):
    """Squared L^2 difference of unit-normalized profiles (grid measure)."""
    w = before.grid.trapezoid_weights
    f = before.profile
    g = after.profile
    # align the free global phase on the dominant component
    k = int(np.argmax(np.abs(f)))
    phase = (f[k] / g[k]) / abs(f[k] / g[k]) if g[k] != 0 else 1.0
    g = g * phase
    nf = math.sqrt(float(np.sum(w * np.abs(f) ** 2)))
    ng = math.sqrt(float(np.sum(w * np.abs(g) ** 2)))
    return float(np.sum(w * np.abs(f / nf - g / ng) ** 2))


def purity_check(mode):
    """Negative-frequency norm fraction of a sampled wavepacket.

    Expands the Cauchy data in the +-frequency family of the mode's own
    chart and returns ||negative part||^2 / total.  Construction-time
    projection drives this below 1e-6.
    """
    if mode.is_dirac:
        return _dirac_wrong_component_fraction(mode)
    if mode.chart is Chart.MINKOWSKI:
        k0 = math.sqrt(max(mode.meta["Omega0"] ** 2 - mode.meta["m"] ** 2,
                           1e-12)) if "Omega0" in mode.meta else \
            abs(mode.meta.get("k", 1.0))
        width = 2.0 / mode.meta.get("L", 1.0)
        _, fraction = _project_minkowski(mode, k0, width)
        return fraction
    u0 = mode.meta["u0"]
    width = 2.0 / (mode.meta["A"] * mode.meta["L"])
    _, fraction = _project_rindler(mode, u0, width)
    return fraction


# ---------------------------------------------------------------------------
# Dirac modes
# ---------------------------------------------------------------------------

CHARGE_CONJUGATION = np.array([[0.0, -1.0], [-1.0, 0.0]])


def charge_conjugate(mode):
    """C phi* with C = [[0,-1],[-1,0]]; flips particle <-> antiparticle."""
    stats = (ModeStatistics.FERMION_ANTIPARTICLE
             if mode.statistics is ModeStatistics.FERMION_PARTICLE
             else ModeStatistics.FERMION_PARTICLE)
    prof = np.conj(mode.profile) @ CHARGE_CONJUGATION.T
    return mode.with_fields(profile=prof, statistics=stats)


def dirac_rindler_mode(wedge, kind, u, m, a=1.0, grid=None,
                       n_points=DEFAULT_POINTS):
    """Boost spinor mode of dimensionless frequency u = Omega/a.

    Gauge-free normalization (delta-normalized in u):
      what^+-_u = sqrt(m cosh(pi u)/(2 pi^2))
                  ( K_{+-iu+1/2}(m chi) + i K_{+-iu-1/2}(m chi),
                   -K_{+-iu+1/2}(m chi) + i K_{+-iu-1/2}(m chi) );
    the conventional mode at gauge a is what_u / sqrt(a).
    kind: '+' particle, '-' antiparticle.
    """
    if m <= 0 or u <= 0:
        raise DomainError("need m > 0 and u > 0")
    if grid is None:
        grid = Grid1D(np.geomspace(0.05 / m, (30.0 + 3 * u) / m, n_points))
    chi = grid.points
    s = 1.0 if kind == "+" else -1.0
    kp = specfun.bessel_K_imag_shifted_grid(s * u, 0.5, m * chi, scaled=True)
    km = specfun.bessel_K_imag_shifted_grid(s * u, -0.5, m * chi, scaled=True)
    # sqrt(cosh(pi u)) e^{-pi u/2} = sqrt((1 + e^{-2 pi u})/2)
    pref = math.sqrt(m * 0.5 * (1.0 + math.exp(-2.0 * math.pi * u))
                     / (2.0 * math.pi ** 2) / a)
    prof = np.stack([pref * (kp + 1j * km), pref * (-kp + 1j * km)], axis=1)
    stats = (ModeStatistics.FERMION_PARTICLE if kind == "+"
             else ModeStatistics.FERMION_ANTIPARTICLE)
    chart = Chart.RINDLER_I if wedge == "I" else Chart.RINDLER_II
    return SampledMode(grid, prof, None, chart, stats,
                       meta={"u": u, "m": m, "a": a, "kind": kind})


def dirac_wavepackets(region, A, L, Omega0, m, n_points=DEFAULT_POINTS):
    """Particle and antiparticle spinor wavepackets, inertial and
    accelerated, for one wedge.

    Returns a dict with keys 'phi+', 'phi-', 'psi+', 'psi-'.
    The inertial particle packet carries the plane-wave spinor at the
    central momentum (mixing angle kappa = atan(m/k0)); the accelerated
    one is the I-Bessel spinor standing wave.  Antiparticles are charge
    conjugates.
    """
    if Omega0 <= m:
        raise FrequencyBelowMass("need Omega0 > m")
    if m <= 0:
        raise DomainError("spinor packets need m > 0")
    _check_packet_params(A, L, Omega0, m)
    grid, v = _envelope_grid(A, L, n_points)
    chi = grid.points
    env = np.exp(-2.0 * (v / (A * L)) ** 2)
    k0 = math.sqrt(Omega0 ** 2 - m ** 2)
    kappa = math.atan2(m, k0)
    c, s = math.cos(0.5 * kappa), math.sin(0.5 * kappa)
    plane = env * np.exp(1j * k0 * (chi - 1.0 / A) - 0.5j * kappa)
    phi_prof = np.stack([(c + s) * plane, (c - s) * plane], axis=1)
    phi = SampledMode(grid, phi_prof, None, Chart.MINKOWSKI,
                      ModeStatistics.FERMION_PARTICLE,
                      meta={"region": region, "A": A, "L": L,
                            "Omega0": Omega0, "m": m, "kappa": kappa})
    phi = _dirac_normalize(phi)

    u0 = Omega0 / A
    # prefactor (I_{-iu0-1/2} - I_{-iu0+1/2})(m/A), spinor I_{iu0 -+ 1/2}(m chi);
    # each I carries e^{pi u0/2}, so work with e^{-pi u0/2}-scaled factors
    # computed from the scaled K-path building blocks via mpmath-free series.
    ia_m = _scaled_I_shift(-u0, -0.5, np.array([m / A]))[0]
    ia_p = _scaled_I_shift(-u0, 0.5, np.array([m / A]))[0]
    ix_m = _scaled_I_shift(u0, -0.5, m * chi)
    ix_p = _scaled_I_shift(u0, 0.5, m * chi)
    pref = ia_m - ia_p
    psi_prof = np.stack([env * pref * (ix_m + 1j * ix_p),
                         env * pref * (ix_m - 1j * ix_p)], axis=1)
    chart = Chart.RINDLER_I if region == "I" else Chart.RINDLER_II
    psi = SampledMode(grid, psi_prof, None, chart,
                      ModeStatistics.FERMION_PARTICLE,
                      meta={"region": region, "A": A, "L": L,
                            "Omega0": Omega0, "m": m, "u0": u0})
    psi = _dirac_normalize(psi)
    return {"phi+": phi, "phi-": charge_conjugate(phi),
            "psi+": psi, "psi-": charge_conjugate(psi)}


def _scaled_I_shift(nu, sigma, xs):
    """e^{-pi |nu|/2} I_{i nu + sigma}(x) on an array."""
    from scipy.special import loggamma
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
    log_mag = sigma * np.log(0.5 * xs) - lg.real - 0.5 * math.pi * abs(nu)
    phase = nu * np.log(0.5 * xs) - lg.imag
    return np.exp(log_mag + 1j * phase) * total


def _dirac_normalize(mode):
    n = mode.norm()
    if n <= 0:
        raise DomainError("spinor mode has non-positive norm")
    return mode.with_fields(profile=mode.profile / math.sqrt(n))


def _dirac_wrong_component_fraction(mode, n_u=600):
    """Content of a particle packet in the opposite-frequency spinor
    family (and vice versa): particle modes pair with w^+ / u^+, and the
    displayed w^- / u^- are already the negative-frequency solutions."""
    if mode.chart is Chart.MINKOWSKI:
        x = mode.grid.points
        w = mode.grid.trapezoid_weights
        m = mode.meta["m"]
        k0 = math.sqrt(mode.meta["Omega0"] ** 2 - m * m)
        ks = np.linspace(-k0 - 20.0 / mode.meta["L"],
                         k0 + 20.0 / mode.meta["L"], 1024)
        wk = np.full(ks.size, ks[1] - ks[0])
        wk[0] = wk[-1] = 0.5 * wk[0]
        om = np.hypot(ks, m)
        up = np.stack([np.sqrt(om + m), np.sqrt(om - m)], axis=1) / np.sqrt(
            4 * math.pi * om)[:, None]
        um = np.stack([np.sqrt(om - m), -np.sqrt(om + m)], axis=1) / np.sqrt(
            4 * math.pi * om)[:, None]
        # both u^+- carry e^{+ikx} spatially, so one transform serves both
        ft = np.exp(-1j * np.outer(ks, x)) @ (w[:, None] * mode.profile)
        a_p = np.sum(up * ft, axis=1)
        a_m = np.sum(um * ft, axis=1)
        p = np.sum(wk * np.abs(a_p) ** 2)
        q_ = np.sum(wk * np.abs(a_m) ** 2)
        return float(q_ / (p + q_))
    u0 = mode.meta.get("u0", 1.0)
    width = 2.0 / (mode.meta["A"] * mode.meta["L"]) if "A" in mode.meta else 5.0
    us = np.linspace(max(1e-3, u0 - 8 * width), u0 + 8 * width, n_u)
    wu = np.full(us.size, us[1] - us[0])
    wu[0] = wu[-1] = 0.5 * wu[0]
    wedge = "I" if mode.chart is Chart.RINDLER_I else "II"
    kind = "+" if mode.statistics is ModeStatistics.FERMION_PARTICLE else "-"
    other = "-" if kind == "+" else "+"
    good = np.empty(us.size)
    bad = np.empty(us.size)
    for i, u in enumerate(us):
        w_good = dirac_rindler_mode(wedge, kind, u, mode.meta["m"],
                                    grid=mode.grid)
        w_bad = dirac_rindler_mode(wedge, other, u, mode.meta["m"],
                                   grid=mode.grid)
        good[i] = abs(overlap_scalar(w_good, mode)) ** 2
        bad[i] = abs(overlap_scalar(w_bad, mode)) ** 2
    p = np.sum(wu * good)
    q_ = np.sum(wu * bad)
    return float(q_ / (p + q_))
