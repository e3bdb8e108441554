"""Gaussian-state algebra on covariance matrices.

Quadrature ordering is (q1, p1, q2, p2, ...) throughout the package.
Covariance convention: sigma_jl = <x_j x_l + x_l x_j> - 2<x_j><x_l>,
so the bosonic vacuum has sigma = identity.  Logarithmic negativity of a
two-mode bosonic state uses base-2 logs; the fermionic lower bound uses
natural log (kept as displayed in the source literature, see README).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyPartition,
    LocalizationFailed,
    NegativeInput,
    NonPhysicalState,
    NotSymmetric,
    NotSymplectic,
)

PHYSICALITY_TOL = 1e-10   # algebraic-identity tolerance
PHYSICALITY_TOL_LOOSE = 1e-8  # downstream of numerical integration
SYMPLECTIC_TOL = 1e-8


class Statistics(enum.Enum):
    BOSON = "boson"
    FERMION = "fermion"


def symplectic_form(n_modes):
    """Block-diagonal symplectic form, [[0,1],[-1,0]] per mode."""
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), J)


def is_symplectic(S, tol=SYMPLECTIC_TOL):
    n2 = S.shape[0]
    if S.shape != (n2, n2) or n2 % 2:
        return False
    Om = symplectic_form(n2 // 2)
    return np.max(np.abs(S.T @ Om @ S - Om)) < tol


def physicality_defect(cov):
    """Most negative eigenvalue of (sigma + i*Omega); >= ~0 when physical."""
    n = cov.shape[0] // 2
    Om = symplectic_form(n)
    w = np.linalg.eigvalsh(cov + 1j * Om)
    return float(np.min(w))


@dataclass(frozen=True)
class GaussianState:
    """First moments + covariance matrix of an n-mode Gaussian state."""

    n_modes: int
    first_moments: np.ndarray
    cov: np.ndarray
    statistics: Statistics = Statistics.BOSON

    def __post_init__(self):
        n = self.n_modes
        X = np.asarray(self.first_moments, dtype=float)
        V = np.asarray(self.cov, dtype=float)
        if n < 1:
            raise DimensionMismatch("n_modes must be positive")
        if X.shape != (2 * n,):
            raise DimensionMismatch(
                f"first_moments shape {X.shape} != ({2 * n},)")
        if V.shape != (2 * n, 2 * n):
            raise DimensionMismatch(
                f"cov shape {V.shape} != ({2 * n}, {2 * n})")
        if self.statistics is Statistics.BOSON:
            if np.max(np.abs(V - V.T)) > PHYSICALITY_TOL:
                raise NonPhysicalState("bosonic covariance not symmetric")
        else:
            if np.max(np.abs(V + V.T)) > PHYSICALITY_TOL:
                raise NonPhysicalState("fermionic covariance not antisymmetric")
        object.__setattr__(self, "first_moments", X)
        object.__setattr__(self, "cov", V)

    def require_physical(self, tol=PHYSICALITY_TOL_LOOSE):
        if self.statistics is Statistics.BOSON:
            defect = physicality_defect(self.cov)
            if defect < -tol:
                raise NonPhysicalState(
                    f"min eig(sigma + i Omega) = {defect:.3e} < -{tol:.0e}")
        return self

    def block(self, i, j):
        """2x2 covariance block between modes i and j."""
        return self.cov[2 * i:2 * i + 2, 2 * j:2 * j + 2]


def vacuum(n_modes):
    return GaussianState(n_modes, np.zeros(2 * n_modes), np.eye(2 * n_modes))


def fermionic_vacuum(n_modes):
    return GaussianState(n_modes, np.zeros(2 * n_modes),
                         symplectic_form(n_modes), Statistics.FERMION)


def two_mode_squeezer(r):
    """Symplectic matrix of a two-mode squeezer with parameter r."""
    c, s = math.cosh(r), math.sinh(r)
    Z = np.diag([1.0, -1.0])
    S = np.zeros((4, 4))
    S[:2, :2] = c * np.eye(2)
    S[2:, 2:] = c * np.eye(2)
    S[:2, 2:] = s * Z
    S[2:, :2] = s * Z
    return S


def mode_rotation(theta):
    """Single-mode phase-space rotation by theta."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def beam_splitter(theta=math.pi / 4):
    """Two-mode beam splitter; theta = pi/4 is the balanced 50:50 case."""
    c, s = math.cos(theta), math.sin(theta)
    S = np.zeros((4, 4))
    S[:2, :2] = c * np.eye(2)
    S[2:, 2:] = c * np.eye(2)
    S[:2, 2:] = -s * np.eye(2)
    S[2:, :2] = s * np.eye(2)
    return S


def embed(S_small, n_modes, modes):
    """Embed a symplectic acting on `modes` into an n-mode identity."""
    S = np.eye(2 * n_modes)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    S[np.ix_(idx, idx)] = S_small
    return S


def evolve(state, S, tol=SYMPLECTIC_TOL):
    """Apply X -> S X, sigma -> S sigma S^T after checking symplecticity."""
    S = np.asarray(S, dtype=float)
    if S.shape != (2 * state.n_modes,) * 2:
        raise DimensionMismatch("S has wrong shape for this state")
    if not is_symplectic(S, tol):
        raise NotSymplectic("S^T Omega S != Omega within tolerance")
    return GaussianState(state.n_modes, S @ state.first_moments,
                         S @ state.cov @ S.T, state.statistics)


def partial_trace(state, keep):
    """Reduced state on the modes listed in `keep` (order preserved)."""
    keep = list(keep)
    if not keep:
        raise EmptyPartition("keep-set is empty")
    if any(k < 0 or k >= state.n_modes for k in keep):
        raise DimensionMismatch("keep indices out of range")
    idx = np.concatenate([[2 * k, 2 * k + 1] for k in keep])
    return GaussianState(len(keep), state.first_moments[idx],
                         state.cov[np.ix_(idx, idx)], state.statistics)


@dataclass(frozen=True)
class NegativityResult:
    """Logarithmic negativity with its ingredients.

    `value` is clamped at 0; `raw` keeps the unclamped -log2(nu_minus)
    so sign crossings (sudden death) remain visible.
    """

    value: float
    nu_minus: float = float("nan")
    delta_tilde: float = float("nan")
    raw: float = float("nan")


def log_negativity_2mode(state, tol=PHYSICALITY_TOL_LOOSE):
    """E_N = max(0, -log2 nu-tilde-minus) for a two-mode bosonic state.

    The closed form  2 nu^2 = Delta - sqrt(Delta^2 - 4 det sigma),
    Delta = det A + det B - 2 det C  cancels catastrophically for states
    within ~1e-8 of the vacuum (exactly the Unruh-channel regime, where
    nu - 1 ~ 1e-12), so nu is taken from the partially transposed
    symplectic spectrum computed by an eigenvalue solver, which resolves
    nu - 1 down to machine absolute error; Delta is still reported.
    """
    if state.statistics is not Statistics.BOSON:
        raise DimensionMismatch("bosonic log-negativity needs a bosonic state")
    if state.n_modes != 2:
        raise DimensionMismatch("log_negativity_2mode needs exactly 2 modes")
    state.require_physical(tol)
    A = state.block(0, 0)
    B = state.block(1, 1)
    C = state.block(0, 1)
    delta = (np.linalg.det(A) + np.linalg.det(B) - 2.0 * np.linalg.det(C))
    T = np.diag([1.0, 1.0, 1.0, -1.0])
    cov_pt = T @ state.cov @ T
    Om = symplectic_form(2)
    ev = np.linalg.eigvals(1j * Om @ cov_pt)
    nu = float(np.min(np.abs(ev.real)))
    if nu <= 0.0:
        raise NonPhysicalState("nu-tilde-minus collapsed to zero")
    raw = -math.log2(nu)
    # strip pure-roundoff positives from nu = 1 - O(eps)
    value = raw if raw > 2e-14 else 0.0
    return NegativityResult(value, nu, delta, raw)


def log_negativity_general(state, partition, tol=PHYSICALITY_TOL_LOOSE):
    """Negativity across `partition` | rest via the partially
    time-reversed symplectic spectrum (any mode count)."""
    part = sorted(set(partition))
    if not part or len(part) >= state.n_modes:
        raise EmptyPartition("partition must be a nonempty proper subset")
    if any(p < 0 or p >= state.n_modes for p in part):
        raise DimensionMismatch("partition indices out of range")
    state.require_physical(tol)
    n = state.n_modes
    T = np.ones(2 * n)
    for p in part:
        T[2 * p + 1] = -1.0  # time reversal: flip p of transposed modes
    cov_pt = state.cov * np.outer(T, T)
    Om = symplectic_form(n)
    ev = np.linalg.eigvals(1j * Om @ cov_pt)
    nus = np.sort(np.abs(ev.real))[::2]  # one value per +-nu pair
    raw = -sum(math.log2(v) for v in nus if v < 1.0)
    nu_min = float(np.min(nus))
    # strip pure-roundoff contributions from nu = 1 - O(eps)
    value = raw if raw > n * 5e-15 else 0.0
    return NegativityResult(value, nu_min, float("nan"), raw)


def fermionic_negativity_bound(n_i_plus, n_ii_minus, n_12_plus, clamp=True):
    """Lower bound on fermionic log-negativity from the Unruh noise terms.

    ln[1 + (1/2)(-NI - NII + NI*NII + |N12|^2 + Re sqrt(w) + Im sqrt(w))]
    with w = (NI - NII)^2 - 4 |N12|^2.  Natural log; may dip below zero
    for tiny noise, in which case the clamped value is 0 (raw kept by
    the caller via clamp=False).
    """
    ni = float(n_i_plus)
    nii = float(n_ii_minus)
    c2 = abs(n_12_plus) ** 2
    w = complex((ni - nii) ** 2 - 4.0 * c2, 0.0)
    root = cmath.sqrt(w)
    arg = 1.0 + 0.5 * (-ni - nii + ni * nii + c2 + root.real + root.imag)
    raw = math.log(arg)
    return max(0.0, raw) if clamp else raw


def _symmetric_blocks(state, tol=1e-9):
    """Return (sigma_s, gamma) of a fully detector-symmetric 3-mode state,
    or raise NotSymmetric."""
    if state.n_modes != 3:
        raise DimensionMismatch("expected a 3-mode state")
    diags = [state.block(i, i) for i in range(3)]
    offs = [state.block(0, 1), state.block(0, 2), state.block(1, 2)]
    for d in diags[1:]:
        if np.max(np.abs(d - diags[0])) > tol:
            raise NotSymmetric("diagonal blocks differ")
    for g in offs[1:]:
        if np.max(np.abs(g - offs[0])) > tol:
            raise NotSymmetric("off-diagonal blocks differ")
    if np.max(np.abs(offs[0] - offs[0].T)) > tol:
        raise NotSymmetric("correlation block not symmetric")
    return diags[0], offs[0]


def unitary_localize_symmetric(state, tol=1e-9):
    """Beam-splitter localization of a fully symmetric 3-mode state.

    Applies the balanced beam splitter to modes (1,2); the result has
    mode 1 decoupled with block sigma_s - gamma, and blocks
    (sigma_s + gamma, sqrt(2) gamma; sigma_s) carrying all correlations
    between modes 2 and 3.
    """
    _symmetric_blocks(state, tol)
    S = embed(beam_splitter(), 3, [0, 1])
    return evolve(state, S)


def _pair_symplectic(params):
    """Local symplectic on a mode pair: BS(t2) . two-mode squeeze(r) . BS(t1)."""
    t1, r, t2 = params
    return beam_splitter(t2) @ two_mode_squeezer(r) @ beam_splitter(t1)


def unitary_localize_numeric(state, pivot, tol=1e-8, max_iter=200):
    """Localize all pivot|rest correlations onto (pivot, one partner).

    Works on 3-mode states symmetric under exchange of the two non-pivot
    modes.  Searches the 3-parameter family BS-squeeze-BS acting on the
    non-pivot pair (a local operation for the pivot|rest bipartition) by
    damped Gauss-Newton from the balanced beam splitter, driving the
    off-blocks of the first non-pivot mode to zero.
    """
    if state.n_modes != 3:
        raise DimensionMismatch("expected a 3-mode state")
    others = [i for i in range(3) if i != pivot]
    # exchange symmetry of the non-pivot pair
    perm = list(range(3))
    perm[others[0]], perm[others[1]] = perm[others[1]], perm[others[0]]
    P = np.zeros((6, 6))
    for i, j in enumerate(perm):
        P[2 * i:2 * i + 2, 2 * j:2 * j + 2] = np.eye(2)
    if np.max(np.abs(P @ state.cov @ P.T - state.cov)) > 1e-7:
        raise NotSymmetric("state not symmetric under non-pivot exchange")

    dead = others[0]  # mode to decouple

    def residual(params):
        S = embed(_pair_symplectic(params), 3, others)
        cov = S @ state.cov @ S.T
        r1 = cov[2 * dead:2 * dead + 2, 2 * pivot:2 * pivot + 2]
        r2 = cov[2 * dead:2 * dead + 2,
                 2 * others[1]:2 * others[1] + 2]
        return np.concatenate([r1.ravel(), r2.ravel()])

    x = np.array([math.pi / 4, 0.0, 0.0])
    res = residual(x)
    for _ in range(max_iter):
        if np.max(np.abs(res)) < tol * 1e-2:
            break
        # finite-difference Jacobian (3 columns)
        J = np.empty((res.size, 3))
        h = 1e-7
        for k in range(3):
            xk = x.copy()
            xk[k] += h
            J[:, k] = (residual(xk) - res) / h
        step, *_ = np.linalg.lstsq(J, -res, rcond=None)
        lam = 1.0
        for _ in range(30):
            trial = x + lam * step
            rt = residual(trial)
            if np.linalg.norm(rt) < np.linalg.norm(res):
                x, res = trial, rt
                break
            lam *= 0.5
        else:
            break
    if np.max(np.abs(res)) > 1e-6:
        raise LocalizationFailed(
            f"residual off-block norm {np.max(np.abs(res)):.2e} > 1e-6")
    return evolve(state, embed(_pair_symplectic(x), 3, others))


def tripartite_estimate(e1, e2, e3):
    """Geometric mean of the three one-vs-two negativities."""
    vals = [e1, e2, e3]
    if any(v < 0 for v in vals):
        raise NegativeInput("negativities must be nonnegative")
    return (vals[0] * vals[1] * vals[2]) ** (1.0 / 3.0)
