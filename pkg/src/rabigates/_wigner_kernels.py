"""Wigner function of a Fock-basis density matrix at arbitrary phase-space points.

With ``a = (x + i p)/sqrt(2) = |a| e^{i theta}`` and ``s = 4|a|^2`` the Wigner
transform of ``|m><m+k|`` is

    K_{m,m+k} = (-1)^m e^{i k theta} f_m^k(s) / pi,
    f_m^k(s)  = sqrt(m!/(m+k)!) s^{k/2} e^{-s/2} L_m^{(k)}(s),

so ``W = (1/pi) sum_k w_k Re[e^{i k theta} sum_m (-1)^m rho_{m,m+k} f_m^k(s)]``
with ``w_0 = 1``, ``w_k = 2``.  The normalised Laguerre functions obey

    f_{m+1}^k = ((2m+1+k-s) f_m^k - sqrt(m(m+k)) f_{m-1}^k) / sqrt((m+1)(m+k+1)),

run forward in ``m``; that direction follows the growing (or oscillating)
solution and stays accurate for large cutoffs, unlike row-by-row recursions
that mix diagonals.  ``f_0^k`` is seeded in log space.
"""
import math

import numpy as np

from ._accel import HAVE_NUMBA, njit, prange


@njit(cache=True)
def _recurrence_tables(dim):
    c_prev = np.zeros((dim, dim))
    c_norm = np.zeros((dim, dim))
    log_fact = np.zeros(dim)
    for m in range(1, dim):
        for k in range(dim):
            c_prev[m, k] = math.sqrt((m - 1.0) * (m - 1.0 + k))
            c_norm[m, k] = 1.0 / math.sqrt(m * (m + k + 0.0))
    for k in range(dim):
        log_fact[k] = 0.5 * math.lgamma(k + 1.0)
    return c_prev, c_norm, log_fact


_BLOCK = 64


@njit(parallel=True, cache=True)
def _wigner_points_numba(diag_re, diag_im, xs, ps):
    npts = xs.shape[0]
    dim = diag_re.shape[0]
    out = np.empty(npts)
    c_prev, c_norm, log_fact = _recurrence_tables(dim)
    nblocks = (npts + _BLOCK - 1) // _BLOCK
    for blk in prange(nblocks):
        lo = blk * _BLOCK
        nb = min(_BLOCK, npts - lo)
        s = np.empty(nb)
        logs = np.empty(nb)
        cth = np.empty(nb)
        sth = np.empty(nb)
        for b in range(nb):
            x = xs[lo + b]
            p = ps[lo + b]
            s[b] = 2.0 * (x * x + p * p)
            logs[b] = math.log(s[b]) if s[b] > 0.0 else -np.inf
            r = math.sqrt(x * x + p * p)
            cth[b] = x / r if r > 0.0 else 1.0
            sth[b] = p / r if r > 0.0 else 0.0
        acc = np.zeros(nb)
        fm = np.empty(nb)
        fm1 = np.empty(nb)
        tr = np.empty(nb)
        ti = np.empty(nb)
        # running cos(k theta), sin(k theta)
        ck = np.ones(nb)
        sk = np.zeros(nb)
        for k in range(dim):
            for b in range(nb):
                if s[b] > 0.0:
                    f0 = math.exp(0.5 * k * logs[b] - 0.5 * s[b] - log_fact[k])
                else:
                    f0 = 1.0 if k == 0 else 0.0
                fm[b] = f0
                fm1[b] = 0.0
                tr[b] = diag_re[k, 0] * f0
                ti[b] = diag_im[k, 0] * f0
            for m in range(1, dim - k):
                a = 2.0 * m - 1.0 + k
                cp = c_prev[m, k]
                cn = c_norm[m, k]
                dr = diag_re[k, m]
                di = diag_im[k, m]
                for b in range(nb):
                    fn = ((a - s[b]) * fm[b] - cp * fm1[b]) * cn
                    fm1[b] = fm[b]
                    fm[b] = fn
                    tr[b] += dr * fn
                    ti[b] += di * fn
            w = 1.0 if k == 0 else 2.0
            for b in range(nb):
                acc[b] += w * (ck[b] * tr[b] - sk[b] * ti[b])
                c_new = ck[b] * cth[b] - sk[b] * sth[b]
                sk[b] = sk[b] * cth[b] + ck[b] * sth[b]
                ck[b] = c_new
        for b in range(nb):
            out[lo + b] = acc[b] / math.pi
    return out


def _signed_diagonals(rho):
    # row k holds (-1)^m rho[m, m+k] for m = 0..dim-k-1, zero padded
    dim = rho.shape[0]
    diags = np.zeros((dim, dim), dtype=complex)
    signs = (-1.0) ** np.arange(dim)
    for k in range(dim):
        d = np.diagonal(rho, offset=k)
        diags[k, :d.size] = signs[:d.size] * d
    return np.ascontiguousarray(diags.real), np.ascontiguousarray(diags.imag)


def _wigner_points_numpy(rho, xs, ps, chunk=8192):
    dim = rho.shape[0]
    out = np.empty(xs.shape[0])
    for start in range(0, xs.shape[0], chunk):
        x = xs[start:start + chunk]
        p = ps[start:start + chunk]
        s = 2.0 * (x * x + p * p)
        theta = np.arctan2(p, x)
        acc = np.zeros(x.shape[0])
        with np.errstate(divide="ignore"):
            logs = np.log(s)
        for k in range(dim):
            if k == 0:
                f0 = np.exp(-0.5 * s)
            else:
                f0 = np.where(s > 0, np.exp(0.5 * k * logs - 0.5 * s - 0.5 * math.lgamma(k + 1.0)), 0.0)
            fm1 = np.zeros_like(s)
            fm = f0
            tot = rho[0, k] * f0
            for m in range(1, dim - k):
                fn = ((2.0 * m - 1.0 + k - s) * fm - math.sqrt((m - 1.0) * (m - 1.0 + k)) * fm1) / math.sqrt(
                    m * (m + k + 0.0))
                fm1, fm = fm, fn
                tot = tot + ((-1) ** m) * rho[m, m + k] * fm
            acc += (1.0 if k == 0 else 2.0) * np.real(np.exp(1j * k * theta) * tot)
        out[start:start + chunk] = acc / np.pi
    return out


def wigner_points(rho, x, p, backend=None):
    """Evaluate the Wigner function at paired coordinates ``(x[i], p[i])``.

    ``backend`` is ``"numba"``, ``"numpy"`` or ``None`` (numba when available).
    """
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    shape = x.shape
    xs = np.ascontiguousarray(x.ravel())
    ps = np.ascontiguousarray(p.ravel())
    if backend is None:
        backend = "numba" if HAVE_NUMBA else "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable or disabled")
        vals = _wigner_points_numba(*_signed_diagonals(rho), xs, ps)
    elif backend == "numpy":
        vals = _wigner_points_numpy(rho, xs, ps)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return vals.reshape(shape)
