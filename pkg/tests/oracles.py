"""Independent reference implementations used as test oracles.

These are deliberately literal: explicit inverses, eigen-based square roots,
explicit projectors and full-size determinants. They share no code with the
production kernels beyond numpy itself.
"""

import math

import numpy as np


def h(a):
    return np.conj(np.swapaxes(a, -1, -2))


def random_pd(rng, n, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    d = np.linspace(1.0, cond, n)
    return (q * d) @ h(q)


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


# -- noise-like jammers -------------------------------------------------------


def nlj_direct(z, m):
    """Compressed log-likelihood ratio written term by term from squared singular values."""
    n, k = z.shape
    gam = np.sort(np.linalg.svd(z, compute_uv=False) ** 2)[::-1]
    if gam.size < n:
        gam = np.concatenate([gam, np.zeros(n - gam.size)])
    tail_mean = gam[m:].sum() / (k * (n - m))
    grand_mean = gam.sum() / (n * k)
    return (
        -k * (n - m) * math.log(tail_mean)
        - k * sum(math.log(g / k) for g in gam[:m])
        + n * k * math.log(grand_mean)
    )


def nlj_from_eigs(gam, k, m):
    gam = np.asarray(gam, dtype=float)
    n = gam.size
    tail_mean = gam[m:].sum() / (k * (n - m))
    grand_mean = gam.sum() / (n * k)
    return -k * (n - m) * math.log(tail_mean) - k * np.sum(np.log(gam[:m] / k)) + n * k * math.log(grand_mean)


# -- coherent jammer ----------------------------------------------------------


def inv_sqrt_eig(s):
    w, u = np.linalg.eigh(s)
    return (u / np.sqrt(w)) @ h(u)


def cj_direct(z, s, v, J, k):
    """The three statistics from explicit inverses and explicit projectors."""
    si = np.linalg.inv(s)
    zz = np.real(h(z[:, None]) @ si @ z[:, None])[0, 0]
    a = h(z[:, None]) @ si @ J
    lam1 = (k + 1) * (math.log(1 + zz) - math.log(np.real(1 + zz - a @ np.linalg.inv(h(J) @ si @ J) @ h(a))[0, 0]))
    zv = (h(v[:, None]) @ si @ z[:, None])[0, 0]
    vv = np.real(h(v[:, None]) @ si @ v[:, None])[0, 0]
    lam2 = (k + 1) * (math.log(1 + zz) - math.log(1 + zz - abs(zv) ** 2 / vv))
    r = inv_sqrt_eig(s)
    zs, vs, js = r @ z, r @ v, r @ J
    n = z.size
    p_perp = np.eye(n) - np.outer(vs, vs.conj()) / np.vdot(vs, vs).real
    zt, jt = p_perp @ zs, p_perp @ js
    p_j = np.eye(n) - jt @ np.linalg.pinv(jt)
    lam3 = (k + 1) * (math.log(1 + np.vdot(zs, zs).real) - math.log(1 + np.real(np.vdot(zt, p_j @ zt))))
    return np.array([lam1, lam2, lam3])


# -- range-spread target ------------------------------------------------------


def logdet_chol(a):
    return 2.0 * np.sum(np.log(np.real(np.diag(np.linalg.cholesky(a)))))


def rst_direct(window, s, v, k, bins):
    """Statistic for the window ``bins`` (1-based) via full ``N x N`` determinants."""
    n, l = window.shape
    s0 = window @ h(window) + s
    inside = [b - 1 for b in bins]
    outside = [i for i in range(l) if i not in inside]
    s1 = s + window[:, outside] @ h(window[:, outside])
    s1i = np.linalg.inv(s1)
    denom = np.real(np.vdot(v, s1i @ v))
    acc = s1.copy()
    for i in inside:
        zl = window[:, i]
        r = zl - (np.vdot(v, s1i @ zl) / denom) * v
        acc += np.outer(r, r.conj())
    return (l + k) * (logdet_chol(s0) - logdet_chol(acc))


def rst_direct_stable(window, s, v, k, bins):
    """Same statistic as :func:`rst_direct` without subtracting two large log-determinants.

    ``log det S0 - log det(S1 + sum r r^H)`` equals ``-log det(I + E)`` with
    ``E = L0^-1 (sum_l r_l r_l^H - z_l z_l^H) L0^-H`` and ``L0`` the Cholesky
    factor of ``S0``; ``E`` has rank at most ``2 |bins|`` and its eigenvalues
    carry the statistic at full relative precision.
    """
    n, l = window.shape
    s0 = window @ h(window) + s
    inside = [b - 1 for b in bins]
    outside = [i for i in range(l) if i not in inside]
    s1 = s + window[:, outside] @ h(window[:, outside])
    s1i = np.linalg.inv(s1)
    denom = np.real(np.vdot(v, s1i @ v))
    diff = np.zeros((n, n), dtype=complex)
    for i in inside:
        zl = window[:, i]
        r = zl - (np.vdot(v, s1i @ zl) / denom) * v
        diff += np.outer(r, r.conj()) - np.outer(zl, zl.conj())
    low_inv = np.linalg.inv(np.linalg.cholesky(s0))
    e = low_inv @ diff @ h(low_inv)
    mu = np.linalg.eigvalsh(0.5 * (e + h(e)))
    return -(l + k) * float(np.sum(np.log1p(mu)))
