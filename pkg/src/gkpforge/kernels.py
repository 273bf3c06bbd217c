"""Hot numeric kernels with numba and pure-numpy implementations.

Both variants of every kernel are importable (``*_numba`` / ``*_numpy``) so
the benchmark and the tests can compare them; the unsuffixed names are bound
to whichever backend ``GKPFORGE_BACKEND`` selects.

Conventions: Fock index runs over rows; ``D[m, n] = <m|D(alpha)|n>`` with
``D(alpha) = exp(alpha a^dag - conj(alpha) a)``. Matrix elements are those of
the infinite-dimensional operator restricted to the first ``dim`` levels, so
the truncated matrix is not unitary; the norm deficit of ``D @ psi`` is the
population pushed past the cutoff.
"""
import math

import numpy as np

from ._backend import BACKEND, njit

_BIG = 1e100
_LOG_BIG = 100.0 * math.log(10.0)


# --------------------------------------------------------------------------
# displacement matrix
#
# Along the k-th subdiagonal, <n+k|D(alpha)|n> = |alpha|^k e^{-x/2} e^{ik arg alpha}
# f_n with x = |alpha|^2 and f_n = sqrt(n!/(n+k)!) L_n^(k)(x). The normalized
# Laguerre values obey
#     f_{n+1} = ((2n+1+k-x) f_n - sqrt(n(n+k)) f_{n-1}) / sqrt((n+1)(n+k+1)),
# which stays accurate to dimensions in the thousands, unlike column-by-column
# application of (a^dag - conj(alpha)). Superdiagonals follow from
# <n|D|n+k> = (-1)^k conj(<n+k|D|n>).
# --------------------------------------------------------------------------

@njit
def _displacement_matrix_numba(alpha, dim):
    out = np.zeros((dim, dim), dtype=np.complex128)
    x = alpha.real * alpha.real + alpha.imag * alpha.imag
    if x == 0.0:
        for i in range(dim):
            out[i, i] = 1.0
        return out
    la = 0.5 * math.log(x)
    phase = alpha / math.sqrt(x)
    pk = 1.0 + 0.0j
    lgk = 0.0
    for k in range(dim):
        if k > 0:
            pk *= phase
            lgk += math.log(k)
        logs = -0.5 * x + k * la - 0.5 * lgk
        scale = math.exp(logs)
        up = pk.conjugate() * (1.0 if k % 2 == 0 else -1.0)
        fp = 0.0
        f = 1.0
        for n in range(dim - k):
            val = f * scale
            out[n + k, n] = val * pk
            if k > 0:
                out[n, n + k] = val * up
            fn = ((2 * n + 1 + k - x) * f - math.sqrt(n * (n + k)) * fp) / math.sqrt((n + 1.0) * (n + k + 1.0))
            fp = f
            f = fn
            if abs(f) > _BIG:
                f /= _BIG
                fp /= _BIG
                logs += _LOG_BIG
                scale = math.exp(logs)
    return out


def _diag_start(x, dim):
    """Log of the starting value ``|alpha|^k e^{-x/2} / sqrt(k!)`` per subdiagonal."""
    from scipy.special import gammaln

    k = np.arange(dim)
    with np.errstate(divide="ignore"):
        la = 0.5 * np.log(x)
    return -0.5 * x + k * la - 0.5 * gammaln(k + 1)


def _displacement_matrix_numpy(alpha, dim):
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    if x == 0.0:
        return np.eye(dim, dtype=complex)
    k = np.arange(dim)
    logs = _diag_start(x, dim)
    pk = np.exp(1j * k * np.angle(alpha))
    up = np.conj(pk) * np.where(k % 2 == 0, 1.0, -1.0)
    out = np.zeros((dim, dim), dtype=complex)
    f = np.ones(dim)
    fp = np.zeros(dim)
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        for n in range(dim):
            kk = k[: dim - n]
            val = f[: dim - n] * np.exp(logs[: dim - n])
            out[n + kk, n] = val * pk[: dim - n]
            out[n, n + kk[1:]] = val[1:] * up[1: dim - n]
            fn = ((2 * n + 1 + k - x) * f - np.sqrt(n * (n + k)) * fp) / np.sqrt((n + 1.0) * (n + k + 1.0))
            fp, f = f, fn
            big = np.abs(f) > _BIG
            if big.any():
                f[big] /= _BIG
                fp[big] /= _BIG
                logs[big] += _LOG_BIG
    return out


# --------------------------------------------------------------------------
# Hermite functions
# --------------------------------------------------------------------------

@njit
def _hermite_functions_numba(nmax, x):
    npts = x.shape[0]
    out = np.zeros((npts, nmax + 1))  # filled row by row, returned transposed
    c0 = math.pi ** -0.25
    a = np.empty(nmax + 1)
    b = np.empty(nmax + 1)
    for n in range(nmax + 1):
        a[n] = math.sqrt(2.0 / (n + 1))
        b[n] = math.sqrt(n / (n + 1.0))
    for j in range(npts):
        xj = x[j]
        logscale = -0.5 * xj * xj
        scale = math.exp(logscale)
        h_prev = 0.0
        h = c0
        out[j, 0] = h * scale
        for n in range(nmax):
            h_next = a[n] * xj * h - b[n] * h_prev
            h_prev = h
            h = h_next
            if abs(h) > _BIG:
                h *= 1.0 / _BIG
                h_prev *= 1.0 / _BIG
                logscale += _LOG_BIG
                scale = math.exp(logscale)
            if scale > 1e-300:
                out[j, n + 1] = h * scale
            elif h != 0.0:
                out[j, n + 1] = math.copysign(math.exp(math.log(abs(h)) + logscale), h)
    return out.T


def _hermite_functions_numpy(nmax, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros((nmax + 1, x.size))
    logscale = -0.5 * x * x
    h_prev = np.zeros_like(x)
    h = np.full_like(x, math.pi ** -0.25)
    out[0] = h * np.exp(logscale)
    with np.errstate(divide="ignore", under="ignore"):
        for n in range(nmax):
            if n == 0:
                h_next = math.sqrt(2.0) * x * h
            else:
                h_next = math.sqrt(2.0 / (n + 1)) * x * h - math.sqrt(n / (n + 1.0)) * h_prev
            h_prev, h = h, h_next
            big = np.abs(h) > _BIG
            if big.any():
                h[big] /= _BIG
                h_prev[big] /= _BIG
                logscale[big] += math.log(_BIG)
            mag = np.abs(h)
            val = np.where(mag > 0, np.exp(np.log(np.where(mag > 0, mag, 1.0)) + logscale), 0.0)
            out[n + 1] = np.sign(h) * val
    return out


# --------------------------------------------------------------------------
# Wigner function by displaced parity: W(b) = (2/pi) <psi| D(2b) P |psi>
#
# Same subdiagonal recurrence as above with alpha = 2b; the k and -k diagonals
# combine into 2 Re(e^{ik arg} conj(psi_{n+k}) psi_n), so only O(dim^2) real
# work per point and no matrix storage.
# --------------------------------------------------------------------------

@njit
def _displaced_parity_numba(psi, betas):
    dim = psi.shape[0]
    npts = betas.shape[0]
    out = np.zeros(npts)
    lgam = np.zeros(dim)
    for m in range(1, dim):
        lgam[m] = lgam[m - 1] + math.log(m)
    for j in range(npts):
        gam = 2.0 * betas[j]
        x = gam.real * gam.real + gam.imag * gam.imag
        total = 0.0
        if x == 0.0:
            for n in range(dim):
                s = 1.0 if n % 2 == 0 else -1.0
                total += s * (psi[n].real ** 2 + psi[n].imag ** 2)
            out[j] = 2.0 / math.pi * total
            continue
        la = 0.5 * math.log(x)
        phase = gam / math.sqrt(x)
        pk = 1.0 + 0.0j
        for k in range(dim):
            if k > 0:
                pk *= phase
            logs = -0.5 * x + k * la - 0.5 * lgam[k]
            scale = math.exp(logs)
            fp = 0.0
            f = 1.0
            acc = 0.0
            for n in range(dim - k):
                if k == 0:
                    w = psi[n].real ** 2 + psi[n].imag ** 2
                else:
                    w = 2.0 * (pk * psi[n + k].conjugate() * psi[n]).real
                if n % 2 == 0:
                    acc += f * scale * w
                else:
                    acc -= f * scale * w
                fn = ((2 * n + 1 + k - x) * f - math.sqrt(n * (n + k)) * fp) / math.sqrt((n + 1.0) * (n + k + 1.0))
                fp = f
                f = fn
                if abs(f) > _BIG:
                    f /= _BIG
                    fp /= _BIG
                    logs += _LOG_BIG
                    scale = math.exp(logs)
            total += acc
        out[j] = 2.0 / math.pi * total
    return out


def _displaced_parity_numpy(psi, betas, chunk=256):
    psi = np.asarray(psi, dtype=complex)
    betas = np.asarray(betas, dtype=complex).ravel()
    dim = psi.size
    out = np.empty(betas.size)
    from scipy.special import gammaln

    k = np.arange(dim)
    half_lg = 0.5 * gammaln(k + 1)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    for start in range(0, betas.size, chunk):
        gam = 2.0 * betas[start:start + chunk]
        x = np.abs(gam) ** 2
        safe = np.where(x > 0, x, 1.0)
        logs = -0.5 * x[None, :] + k[:, None] * 0.5 * np.log(safe)[None, :] - half_lg[:, None]
        logs[1:, x == 0] = -np.inf
        pk = np.exp(1j * np.outer(k, np.angle(gam)))
        f = np.ones_like(logs)
        fp = np.zeros_like(logs)
        total = np.zeros(gam.size)
        kc = k[:, None]
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            for n in range(dim):
                rows = dim - n
                pair = np.conj(psi[n:n + rows]) * psi[n]
                w = 2.0 * (pk[:rows] * pair[:, None]).real
                w[0] = abs(psi[n]) ** 2
                contrib = f[:rows] * np.exp(logs[:rows]) * w
                total += sign[n] * np.nansum(contrib, axis=0)
                fn = ((2 * n + 1 + kc - x) * f - np.sqrt(n * (n + kc)) * fp) / np.sqrt((n + 1.0) * (n + kc + 1.0))
                fp, f = f, fn
                big = np.abs(f) > _BIG
                if big.any():
                    f[big] /= _BIG
                    fp[big] /= _BIG
                    logs[big] += _LOG_BIG
        out[start:start + chunk] = 2.0 / math.pi * total
    return out


if BACKEND == "numba":
    def displacement_matrix(alpha, dim):
        return _displacement_matrix_numba(complex(alpha), int(dim))

    def hermite_functions(nmax, x):
        return _hermite_functions_numba(int(nmax), np.ascontiguousarray(x, dtype=np.float64))

    def displaced_parity(psi, betas):
        return _displaced_parity_numba(np.ascontiguousarray(psi, dtype=np.complex128),
                                       np.ascontiguousarray(np.ravel(betas), dtype=np.complex128))
else:
    displacement_matrix = _displacement_matrix_numpy
    hermite_functions = _hermite_functions_numpy
    displaced_parity = _displaced_parity_numpy

displacement_matrix.__doc__ = "Closed-form ``<m|D(alpha)|n>`` for ``m, n < dim``."
hermite_functions.__doc__ = "Normalized Hermite functions ``psi_n(x)``, shape ``(nmax+1, len(x))``."
displaced_parity.__doc__ = "Wigner values ``(2/pi)<psi|D(2b) P|psi>`` at each complex ``b``."
