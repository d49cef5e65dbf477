"""Pure-Python (numpy) implementations of the summation kernels.

These mirror ``_kernels.pyx`` exactly and are selected when the compiled
extension is unavailable or ``XASKEY_PURE=1`` is set.
"""

import numpy as np


def _two_sum(s, c, t):
    # Neumaier step, elementwise on float arrays
    u = s + t
    big = np.abs(s) >= np.abs(t)
    c = c + np.where(big, (s - u) + t, (t - u) + s)
    return u, c


def _factor(a, k, q):
    if q == 0.0:
        return a + k
    return 1.0 - a * q**k


def terminating_sum(num, den, z, q, n, scaled):
    """Sum a terminating (basic) hypergeometric series row by row.

    ``num`` has shape (N, p) and ``den`` shape (N, r). With ``q == 0`` the
    ordinary series is summed, otherwise the q-series whose term ratio is
    prod(1 - a q^k) z / ((1 - q^{k+1}) prod(1 - b q^k)).

    If ``scaled`` the result is multiplied by prod_j (b_j)_n (or its
    q-analogue) and evaluated without any division by a denominator
    parameter. Returns ``(values, bad)`` where ``bad`` flags rows whose
    unscaled sum hit a vanishing denominator.
    """
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    npts = num.shape[0]
    z = complex(z)
    bad = np.zeros(npts, dtype=bool)

    terms = np.empty((n + 1, npts), dtype=complex)
    t = np.ones(npts, dtype=complex)
    terms[0] = t
    for k in range(n):
        kfac = (k + 1.0) if q == 0.0 else (1.0 - q ** (k + 1))
        ratio = np.prod(_factor(num, k, q), axis=1) * (z / kfac)
        if not scaled:
            d = np.prod(_factor(den, k, q), axis=1)
            zero = d == 0
            bad |= zero
            ratio = ratio / np.where(zero, 1.0, d)
        t = t * ratio
        terms[k + 1] = t

    if scaled:
        tail = np.ones(npts, dtype=complex)
        for k in range(n, -1, -1):
            if k < n:
                tail = tail * np.prod(_factor(den, k, q), axis=1)
            terms[k] = terms[k] * tail

    sr = np.zeros(npts)
    cr = np.zeros(npts)
    si = np.zeros(npts)
    ci = np.zeros(npts)
    for k in range(n + 1):
        sr, cr = _two_sum(sr, cr, terms[k].real)
        si, ci = _two_sum(si, ci, terms[k].imag)
    out = (sr + cr) + 1j * (si + ci)
    out[bad] = np.nan
    return out, bad


def q_product(a, q, terms):
    """prod_{k<terms} (1 - a q^k) for an array ``a``."""
    a = np.asarray(a, dtype=complex)
    out = np.ones_like(a)
    for k in range(terms):
        out = out * (1.0 - a * q**k)
    return out
