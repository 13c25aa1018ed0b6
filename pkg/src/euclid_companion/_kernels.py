"""Compiled dense kernels for upper Hessenberg matrices.

Everything here works on a real upper Hessenberg ``a`` (float64, C order):

* ``hqr``: Francis double-shift QR, eigenvalues only, straight on the
  Hessenberg form (no reduction step).
* ``hess_lu`` / ``solve`` / ``solve_h``: LU with partial pivoting of
  ``a - z I`` for complex ``z``.  Pivoting only ever swaps rows ``i`` and
  ``i+1``, so the factorization is O(n**2).
* ``eig_cond_batch``: inverse iteration for right and left eigenvectors,
  ``1/|y^H x|`` and the smallest singular value of ``a - lam I``.
* ``sigma_min_batch``: smallest singular value of ``z I - a`` by Lanczos
  on ``((a - zI)^H (a - zI))^{-1}``.

All kernels release the GIL so callers can split work over threads.
"""

import math

import numpy as np
from numba import njit

EPS = np.finfo(np.float64).eps


@njit(cache=True, nogil=True)
def hqr(h, max_iter):
    """Eigenvalues of the upper Hessenberg ``h`` (overwritten).

    Returns ``(wr, wi, status, active)``.  ``status`` is the number of QR
    sweeps used, or -1 if ``max_iter`` ran out; ``active`` is then the last
    row of the undeflated window.
    """
    n = h.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += abs(h[i, j])
    nn = n - 1
    t = 0.0
    total = 0
    x = 0.0
    y = 0.0
    w = 0.0
    while nn >= 0:
        its = 0
        while True:
            # find a negligible subdiagonal entry
            l = nn
            while l >= 1:
                s = abs(h[l - 1, l - 1]) + abs(h[l, l])
                if s == 0.0:
                    s = anorm
                if abs(h[l, l - 1]) < EPS * s:
                    h[l, l - 1] = 0.0
                    break
                l -= 1
            x = h[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = h[nn - 1, nn - 1]
            w = h[nn, nn - 1] * h[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + (z if p >= 0.0 else -z)
                    wr[nn - 1] = x + z
                    wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = 0.0
                    wi[nn] = 0.0
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = z
                    wi[nn] = -z
                nn -= 2
                break
            if total >= max_iter:
                return wr, wi, -1, nn
            if its == 10 or its == 20:
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    h[i, i] -= x
                s = abs(h[nn, nn - 1]) + abs(h[nn - 1, nn - 2])
                x = 0.75 * s
                y = x
                w = -0.4375 * s * s
            its += 1
            total += 1
            # start of the double-shift sweep: two consecutive small subdiagonals
            m = nn - 2
            p = 0.0
            q = 0.0
            r = 0.0
            while m >= l:
                z = h[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / h[m + 1, m] + h[m, m + 1]
                q = h[m + 1, m + 1] - z - r - s
                r = h[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(h[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(h[m - 1, m - 1]) + abs(z) + abs(h[m + 1, m + 1]))
                if u < EPS * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                h[i, i - 2] = 0.0
                if i != m + 2:
                    h[i, i - 3] = 0.0
            # chase the bulge
            k = m
            while k <= nn - 1:
                if k != m:
                    p = h[k, k - 1]
                    q = h[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = h[k + 2, k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.sqrt(p * p + q * q + r * r)
                if p < 0.0:
                    s = -s
                if s != 0.0:
                    if k == m:
                        if l != m:
                            h[k, k - 1] = -h[k, k - 1]
                    else:
                        h[k, k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    for j in range(k, nn + 1):
                        p = h[k, j] + q * h[k + 1, j]
                        if k != nn - 1:
                            p += r * h[k + 2, j]
                            h[k + 2, j] -= p * z
                        h[k + 1, j] -= p * y
                        h[k, j] -= p * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        p = x * h[i, k] + y * h[i, k + 1]
                        if k != nn - 1:
                            p += z * h[i, k + 2]
                            h[i, k + 2] -= p * r
                        h[i, k + 1] -= p * q
                        h[i, k] -= p
                k += 1
    return wr, wi, total, -1


@njit(cache=True, nogil=True)
def hess_lu(a, z, u, ell, piv):
    """Factor ``a - z I`` into ``u`` (upper), multipliers ``ell``, swaps ``piv``.

    Returns the index of the first exactly zero pivot, or -1.
    """
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            u[i, j] = a[i, j]
        u[i, i] -= z
    for i in range(n - 1):
        # only row i+1 has a nonzero below the diagonal in column i
        if abs(u[i + 1, i]) > abs(u[i, i]):
            for j in range(i, n):
                tmp = u[i, j]
                u[i, j] = u[i + 1, j]
                u[i + 1, j] = tmp
            piv[i] = True
        else:
            piv[i] = False
        if u[i, i] == 0:
            ell[i] = 0.0
            return i
        f = u[i + 1, i] / u[i, i]
        ell[i] = f
        u[i + 1, i] = 0.0
        if f != 0:
            for j in range(i + 1, n):
                u[i + 1, j] -= f * u[i, j]
    if u[n - 1, n - 1] == 0:
        return n - 1
    return -1


@njit(cache=True, nogil=True)
def solve(u, ell, piv, b):
    """Solve ``(a - zI) x = b`` in place in ``b``."""
    n = u.shape[0]
    for i in range(n - 1):
        if piv[i]:
            tmp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = tmp
        b[i + 1] -= ell[i] * b[i]
    for i in range(n - 1, -1, -1):
        s = b[i]
        for j in range(i + 1, n):
            s -= u[i, j] * b[j]
        b[i] = s / u[i, i]


@njit(cache=True, nogil=True)
def solve_h(u, ell, piv, b):
    """Solve ``(a - zI)^H y = b`` in place in ``b``."""
    n = u.shape[0]
    # U^H w = b, forward, column-oriented so U is read by rows
    for j in range(n):
        b[j] /= np.conj(u[j, j])
        bj = b[j]
        for i in range(j + 1, n):
            b[i] -= np.conj(u[j, i]) * bj
    # y = G_1^H ... G_{n-1}^H w
    for i in range(n - 2, -1, -1):
        b[i] -= np.conj(ell[i]) * b[i + 1]
        if piv[i]:
            tmp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = tmp


@njit(cache=True, nogil=True)
def _normalize(v):
    s = 0.0
    for i in range(v.shape[0]):
        s += v[i].real * v[i].real + v[i].imag * v[i].imag
    s = math.sqrt(s)
    if s == 0.0 or not math.isfinite(s):
        return s
    for i in range(v.shape[0]):
        v[i] /= s
    return s


@njit(cache=True, nogil=True)
def _norm1(a):
    best = 0.0
    n = a.shape[0]
    for j in range(n):
        s = 0.0
        for i in range(n):
            s += abs(a[i, j])
        if s > best:
            best = s
    return best


@njit(cache=True, nogil=True)
def _factor_with_retry(a, z, u, ell, piv):
    # an exactly singular shift is nudged once
    bad = hess_lu(a, z, u, ell, piv)
    if bad < 0:
        return z, True
    scale = max(_norm1(a), 1.0)
    z2 = z + EPS * scale * (1.0 + 1.0j)
    bad = hess_lu(a, z2, u, ell, piv)
    return z2, bad < 0


@njit(cache=True, nogil=True)
def eig_cond_batch(a, lams, cond, sigma, status, n_iter):
    """For each eigenvalue estimate: ``1/|y^H x|`` and ``sigma_min(a - lam I)``.

    ``status[i]`` is 0 on success, 1 if the shift had to be perturbed,
    2 if factorization failed twice.
    """
    n = a.shape[0]
    u = np.empty((n, n), dtype=np.complex128)
    ell = np.empty(n, dtype=np.complex128)
    piv = np.empty(n, dtype=np.bool_)
    x = np.empty(n, dtype=np.complex128)
    y = np.empty(n, dtype=np.complex128)
    v = np.empty(n, dtype=np.complex128)
    for t in range(lams.shape[0]):
        lam = lams[t]
        z, ok = _factor_with_retry(a, lam, u, ell, piv)
        if not ok:
            status[t] = 2
            cond[t] = np.nan
            sigma[t] = np.nan
            continue
        status[t] = 0 if z == lam else 1
        for i in range(n):
            x[i] = 1.0 + 0.0j
            y[i] = 1.0 + 0.0j
        _normalize(x)
        _normalize(y)
        for _ in range(n_iter):
            solve(u, ell, piv, x)
            _normalize(x)
            solve_h(u, ell, piv, y)
            _normalize(y)
        yx = 0.0j
        for i in range(n):
            yx += np.conj(y[i]) * x[i]
        cond[t] = 1.0 / abs(yx)
        # sigma_min: power iteration on (B^H B)^{-1}, started from x; the
        # singular gap at a converged eigenvalue makes one or two steps enough
        for i in range(n):
            v[i] = x[i]
        g = 0.0
        g_old = -1.0
        for _ in range(n_iter):
            solve_h(u, ell, piv, v)
            solve(u, ell, piv, v)
            g = _normalize(v)
            if abs(g - g_old) <= 1e-10 * g:
                break
            g_old = g
        sigma[t] = 1.0 / math.sqrt(g) if g > 0.0 else 0.0


@njit(cache=True, nogil=True)
def _tridiag_max_eig(alpha, beta, m):
    """Largest eigenvalue of the symmetric tridiagonal (alpha[:m], beta[:m-1])."""
    lo = alpha[0]
    hi = alpha[0]
    for i in range(m):
        r = 0.0
        if i > 0:
            r += abs(beta[i - 1])
        if i < m - 1:
            r += abs(beta[i])
        if alpha[i] - r < lo:
            lo = alpha[i] - r
        if alpha[i] + r > hi:
            hi = alpha[i] + r
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        # Sturm count: number of eigenvalues < mid
        cnt = 0
        d = alpha[0] - mid
        if d < 0.0:
            cnt += 1
        for i in range(1, m):
            if d == 0.0:
                d = EPS * (abs(beta[i - 1]) + 1e-300)
            d = alpha[i] - mid - beta[i - 1] * beta[i - 1] / d
            if d < 0.0:
                cnt += 1
        if cnt == m:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * abs(hi):
            break
    return hi


@njit(cache=True, nogil=True)
def sigma_min_batch(a, zs, out, tol, max_steps):
    """Smallest singular value of ``z I - a`` for each ``z``.

    Lanczos with full reorthogonalization on the inverse normal operator;
    stops when the top Ritz value moves by less than ``tol`` (relative).
    ``out`` receives NaN if factorization failed.
    """
    n = a.shape[0]
    m_max = min(n, max_steps)
    u = np.empty((n, n), dtype=np.complex128)
    ell = np.empty(n, dtype=np.complex128)
    piv = np.empty(n, dtype=np.bool_)
    V = np.empty((m_max + 1, n), dtype=np.complex128)
    w = np.empty(n, dtype=np.complex128)
    alpha = np.empty(m_max)
    beta = np.empty(m_max)
    for t in range(zs.shape[0]):
        z = zs[t]
        bad = hess_lu(a, z, u, ell, piv)
        if bad >= 0:
            out[t] = 0.0
            continue
        for i in range(n):
            # fixed, generic start vector
            V[0, i] = 1.0 + 0.1j * (i % 7) + 0.01 * i
        _normalize(V[0])
        theta_old = 0.0
        theta = 0.0
        for j in range(m_max):
            for i in range(n):
                w[i] = V[j, i]
            solve_h(u, ell, piv, w)
            solve(u, ell, piv, w)
            al = 0.0
            for i in range(n):
                al += (np.conj(V[j, i]) * w[i]).real
            alpha[j] = al
            for i in range(n):
                w[i] -= al * V[j, i]
                if j > 0:
                    w[i] -= beta[j - 1] * V[j - 1, i]
            for _ in range(2):
                for q in range(j + 1):
                    c = 0.0j
                    for i in range(n):
                        c += np.conj(V[q, i]) * w[i]
                    for i in range(n):
                        w[i] -= c * V[q, i]
            b = _normalize(w)
            theta = _tridiag_max_eig(alpha, beta, j + 1)
            if not math.isfinite(theta):
                break
            if b <= 1e-14 * theta or j == m_max - 1:
                break
            if j > 0 and abs(theta - theta_old) <= tol * theta:
                break
            theta_old = theta
            beta[j] = b
            for i in range(n):
                V[j + 1, i] = w[i]
        out[t] = 1.0 / math.sqrt(theta) if theta > 0.0 and math.isfinite(theta) else 0.0
