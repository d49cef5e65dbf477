"""Pochhammer symbols, q-shifted factorials and (basic) hypergeometric sums.

Every function accepts scalars or numpy arrays and broadcasts over them.
Terminating sums run through the compiled kernel (see :mod:`xaskey.kernels`).
"""

import math

import numpy as np
import scipy.special

from . import kernels

_TAIL_EPS = 1e-17


class SeriesError(ArithmeticError):
    """A denominator parameter vanished before the series terminated."""


class PoleError(ArithmeticError):
    """Evaluation hit a pole of a meromorphic function."""


def _ret(values, shape):
    values = np.asarray(values).reshape(shape)
    return values[()] if values.ndim == 0 else values


def pochhammer(a, n):
    """Rising factorial (a)_n = a (a+1) ... (a+n-1)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a = np.asarray(a, dtype=complex)
    out = np.ones_like(a)
    for k in range(n):
        out = out * (a + k)
    return out[()] if out.ndim == 0 else out


def _check_q(q):
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q!r}")


def infinite_product_terms(amax, q):
    """Number of factors K with tail bound sum_{k>=K} amax q^k below 1e-17."""
    _check_q(q)
    if amax == 0:
        return 1
    k = math.log(_TAIL_EPS * (1.0 - q) / amax) / math.log(q)
    return max(1, int(math.ceil(k)))


def q_pochhammer(a, q, n):
    """q-shifted factorial (a; q)_n; ``n`` may be ``math.inf``."""
    _check_q(q)
    a = np.asarray(a, dtype=complex)
    if n == math.inf:
        amax = float(np.max(np.abs(a))) if a.size else 0.0
        terms = infinite_product_terms(amax, q)
    else:
        if n < 0:
            raise ValueError("n must be non-negative")
        terms = int(n)
    if terms == 0:
        return _ret(np.ones(a.shape, dtype=complex), a.shape)
    out = kernels.q_product(a.ravel(), float(q), terms)
    return _ret(out, a.shape)


def _stack(entries, extra=()):
    arrs = np.broadcast_arrays(*[np.asarray(e, dtype=complex) for e in entries], *extra)
    shape = arrs[0].shape if arrs else ()
    return shape, arrs


def _termination_index(num, q=None):
    for a in num:
        a = np.asarray(a)
        if a.ndim:
            continue
        v = complex(a)
        if q is None:
            if abs(v.imag) < 1e-14 and v.real <= 0 and abs(v.real - round(v.real)) < 1e-12:
                return int(round(-v.real))
        else:
            if abs(v.imag) < 1e-14 and v.real >= 1.0:
                k = math.log(v.real) / -math.log(q)
                if abs(k - round(k)) < 1e-9:
                    return int(round(k))
    raise ValueError("no terminating numerator parameter found; pass n explicitly")


def _run(num, den, z, q, n, scaled):
    shape, arrs = _stack(list(num) + list(den), (np.asarray(z, dtype=complex),))
    zarr = arrs[-1]
    if np.ndim(z) != 0 and not np.all(zarr == zarr.ravel()[0]):
        raise ValueError("argument z must be a scalar")
    p = len(num)
    npts = int(np.prod(shape)) if shape else 1
    numm = np.stack([a.ravel() for a in arrs[:p]], axis=1) if p else np.zeros((npts, 0), complex)
    denm = (
        np.stack([a.ravel() for a in arrs[p:-1]], axis=1)
        if len(den)
        else np.zeros((npts, 0), complex)
    )
    vals, bad = kernels.terminating_sum(numm, denm, complex(np.ravel(zarr)[0]), q, n, scaled)
    if np.any(bad):
        raise SeriesError("denominator Pochhammer symbol vanishes before termination")
    return _ret(vals, shape)


def hyp_pFq_terminating(num, den, z=1.0, n=None):
    """Terminating pFq(num; den | z) summed over k = 0..n by running term ratios.

    ``n`` defaults to the index implied by a numerator entry equal to -n.
    Raises :class:`SeriesError` if a denominator Pochhammer vanishes at k <= n.
    """
    if n is None:
        n = _termination_index(num)
    return _run(num, den, z, 0.0, n, scaled=False)


def hyp_pFq_scaled(num, den, z=1.0, n=None):
    """prod_j (den_j)_n times the terminating pFq, computed without division by den."""
    if n is None:
        n = _termination_index(num)
    return _run(num, den, z, 0.0, n, scaled=True)


def hyp_qphi_terminating(num, den, q, z=None, n=None):
    """Terminating balanced r+1 phi r(num; den | q; z), with z defaulting to q."""
    _check_q(q)
    if z is None:
        z = q
    if n is None:
        n = _termination_index(num, q)
    return _run(num, den, z, float(q), n, scaled=False)


hyp_4phi3_terminating = hyp_qphi_terminating


def hyp_qphi_scaled(num, den, q, z=None, n=None):
    """prod_j (den_j; q)_n times the terminating q-series, division free."""
    _check_q(q)
    if z is None:
        z = q
    if n is None:
        n = _termination_index(num, q)
    return _run(num, den, z, float(q), n, scaled=True)


def hyp_series(num, den, z, q=None, tol=1e-17, max_terms=2000):
    """Convergent (non-terminating) pFq or r+1 phi r power series for |z| < 1.

    Used for closed-form generating functions; the sum stops once two
    consecutive terms fall below ``tol`` relative to the partial sum.
    """
    shape, arrs = _stack(list(num) + list(den), (np.asarray(z, dtype=complex),))
    p = len(num)
    nums, dens, zz = arrs[:p], arrs[p:-1], arrs[-1]
    term = np.ones(shape, dtype=complex)
    total = term.copy()
    quiet = 0
    for k in range(max_terms):
        if q is None:
            r = zz / (k + 1)
            for a in nums:
                r = r * (a + k)
            for b in dens:
                r = r / (b + k)
        else:
            r = zz / (1 - q ** (k + 1))
            for a in nums:
                r = r * (1 - a * q**k)
            for b in dens:
                r = r / (1 - b * q**k)
        term = term * r
        total = total + term
        if np.all(np.abs(term) <= tol * np.maximum(np.abs(total), 1e-300)):
            quiet += 1
            if quiet >= 2:
                return _ret(total, shape)
        else:
            quiet = 0
    raise ArithmeticError("hypergeometric series did not converge")


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex z.

    Raises :class:`PoleError` at non-positive integers.
    """
    z = np.asarray(z, dtype=complex)
    pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(pole):
        raise PoleError("log_gamma pole at a non-positive integer")
    out = scipy.special.loggamma(z)
    return out[()] if out.ndim == 0 else out
