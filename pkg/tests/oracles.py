"""Independent brute-force oracles used by the test suite.

Everything here works in a truncated Fock basis with dense density
matrices, deliberately avoiding the covariance-matrix code paths it is
meant to check.
"""

import numpy as np


def tmsv_density_matrix(r, n_max):
    """Two-mode squeezed vacuum |TMSV> = sech(r) sum tanh(r)^n |n,n>,
    truncated at n_max photons per mode."""
    n = np.arange(n_max + 1)
    amp = np.tanh(r) ** n / np.cosh(r)
    psi = np.zeros((n_max + 1, n_max + 1))
    psi[n, n] = amp
    psi = psi.ravel()
    return np.outer(psi, psi)


def thermal_density_matrix(nbar, n_max):
    n = np.arange(n_max + 1)
    p = (nbar / (1.0 + nbar)) ** n / (1.0 + nbar)
    return np.diag(p)


def partial_transpose_b(rho, dim_a, dim_b):
    """Partial transpose on the second factor of a dim_a*dim_b system."""
    r4 = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    return r4.transpose(0, 3, 2, 1).reshape(dim_a * dim_b, dim_a * dim_b)


def log_negativity_fock(rho, dim_a, dim_b):
    """E_N = log2[ sum_i (|lam_i| - lam_i) + 1 ] over the PT spectrum."""
    pt = partial_transpose_b(rho, dim_a, dim_b)
    lam = np.linalg.eigvalsh(0.5 * (pt + pt.T))
    return np.log2(np.sum(np.abs(lam) - lam) + 1.0)


def tmsv_log_negativity(r, n_max=40):
    rho = tmsv_density_matrix(r, n_max)
    d = n_max + 1
    return log_negativity_fock(rho, d, d)


def mean_occupation_reduced_tmsv(r, n_max=60):
    """Mean photon number of one arm of a TMSV, from the Fock ladder."""
    n = np.arange(n_max + 1)
    p = np.tanh(r) ** (2 * n) / np.cosh(r) ** 2
    return float(np.sum(n * p))
