"""Compiled inner loop of the coordinate-wise Metropolis sampler."""

import numpy as np
from numba import njit


@njit(cache=True)
def is_psd(m, tol):
    """Cholesky of m + tol*I succeeds; m is Hermitian (only the lower triangle is read)."""
    d = m.shape[0]
    L = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        s = m[j, j].real + tol
        for k in range(j):
            s -= L[j, k].real ** 2 + L[j, k].imag ** 2
        if not s > 0.0:
            return False
        ljj = np.sqrt(s)
        L[j, j] = ljj
        for i in range(j + 1, d):
            z = m[i, j]
            for k in range(j):
                z -= L[i, k] * np.conj(L[j, k])
            L[i, j] = z / ljj
    return True


@njit(cache=True)
def _rebuild(theta, paulis, ident, rho):
    d = rho.shape[0]
    for a in range(d):
        for b in range(d):
            rho[a, b] = ident[a, b]
    for k in range(theta.shape[0]):
        t = theta[k]
        for a in range(d):
            for b in range(d):
                rho[a, b] += t * paulis[k, a, b]


@njit(cache=True)
def _expected(theta, ptr, rows, signs, totals, base, nbar):
    for r in range(nbar.shape[0]):
        nbar[r] = base[r]
    for k in range(theta.shape[0]):
        for q in range(ptr[k], ptr[k + 1]):
            r = rows[q]
            nbar[r] += totals[r] * signs[q] * theta[k]


@njit(cache=True)
def run_chain(
    theta0, ref, prior_scale, paulis, ident, ptr, rows, signs, totals, base, observed,
    count_floor, beta, sigma_floor, psd_tol, normals, uniforms,
):
    """Sweep over coordinates ``normals.shape[0]`` times.

    ``paulis`` and ``signs`` are pre-divided by 2**n so that
    rho = ident + sum_k theta_k paulis[k] and
    nbar[r] = base[r] + sum_k totals[r] * signs * theta_k.
    Returns the per-sweep samples and the number of accepted moves.
    """
    n_sweeps, dim = normals.shape
    d = ident.shape[0]
    theta = theta0.copy()
    rho = np.empty((d, d), dtype=np.complex128)
    trial = np.empty((d, d), dtype=np.complex128)
    nbar = np.empty(observed.shape[0])
    out = np.empty((n_sweeps, dim))
    accepted = 0
    for j in range(n_sweeps):
        _rebuild(theta, paulis, ident, rho)
        _expected(theta, ptr, rows, signs, totals, base, nbar)
        for k in range(dim):
            old = theta[k]
            s_old = beta * max(abs(old), sigma_floor)
            new = old + s_old * normals[j, k]
            s_new = beta * max(abs(new), sigma_floor)
            delta = new - old
            # Gaussian prior
            log_a = ((old - ref[k]) ** 2 - (new - ref[k]) ** 2) / (2.0 * prior_scale[k])
            # Gaussian count surrogate, only rows that depend on theta_k
            for q in range(ptr[k], ptr[k + 1]):
                r = rows[q]
                nb_old = nbar[r]
                nb_new = nb_old + totals[r] * signs[q] * delta
                x = observed[r]
                log_a += (nb_old - x) ** 2 / max(nb_old, count_floor)
                log_a -= (nb_new - x) ** 2 / max(nb_new, count_floor)
            # - log g(new|old) + log g(old|new)
            log_a += 0.5 * (delta / s_old) ** 2 + np.log(s_old)
            log_a -= 0.5 * (delta / s_new) ** 2 + np.log(s_new)
            if np.log(uniforms[j, k]) >= log_a:
                continue
            for a in range(d):
                for b in range(a + 1):
                    trial[a, b] = rho[a, b] + delta * paulis[k, a, b]
            if not is_psd(trial, psd_tol):
                continue
            theta[k] = new
            accepted += 1
            for a in range(d):
                for b in range(d):
                    rho[a, b] += delta * paulis[k, a, b]
            for q in range(ptr[k], ptr[k + 1]):
                r = rows[q]
                nbar[r] += totals[r] * signs[q] * delta
        out[j] = theta
    return out, accepted
