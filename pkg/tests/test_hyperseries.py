import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xaskey import _fallback, kernels
from xaskey.hyperseries import (
    PoleError,
    SeriesError,
    hyp_pFq_scaled,
    hyp_pFq_terminating,
    hyp_qphi_scaled,
    hyp_qphi_terminating,
    hyp_series,
    infinite_product_terms,
    log_gamma,
    pochhammer,
    q_pochhammer,
)

mp.mp.dps = 40

small = st.floats(-0.9, 0.9)
cplx = st.builds(complex, small, small)


def test_pochhammer_matches_mpmath():
    for a in (0.3, -2.5, 1.2 + 0.7j):
        for n in range(7):
            ref = complex(mp.rf(mp.mpc(a), n))
            assert abs(pochhammer(a, n) - ref) <= 1e-14 * max(1, abs(ref))


def test_pochhammer_rejects_negative():
    with pytest.raises(ValueError):
        pochhammer(1.0, -1)


@given(cplx, st.floats(0.05, 0.95), st.integers(0, 12))
def test_q_pochhammer_finite(a, q, n):
    ref = complex(mp.qp(mp.mpc(a), mp.mpf(q), n))
    assert abs(q_pochhammer(a, q, n) - ref) <= 1e-13 * max(1, abs(ref))


@given(cplx, st.floats(0.05, 0.9))
def test_q_pochhammer_infinite(a, q):
    ref = complex(mp.qp(mp.mpc(a), mp.mpf(q)))
    assert abs(q_pochhammer(a, q, math.inf) - ref) <= 1e-14 * max(1, abs(ref))


def test_infinite_product_tail_bound():
    for q in (0.3, 0.7, 0.95):
        K = infinite_product_terms(0.9, q)
        assert 0.9 * q**K / (1 - q) < 1e-17


def test_q_must_be_in_unit_interval():
    with pytest.raises(ValueError):
        q_pochhammer(0.5, 1.0, 3)


@given(st.integers(0, 8), cplx, cplx, st.floats(0.2, 3.0))
def test_terminating_4F3_matches_mpmath(n, a, b, x):
    num = [-n, n + 1.3 + a, 0.4 + 1j * x, 0.4 - 1j * x]
    den = [1.1 + b, 1.7, 2.2]
    ref = complex(mp.hyper([mp.mpc(v) for v in num], [mp.mpc(v) for v in den], 1))
    got = hyp_pFq_terminating(num, den, 1.0)
    scale = sum(
        abs(complex(mp.rf(mp.mpc(num[0]), k) * mp.rf(num[1], k) * mp.rf(num[2], k) * mp.rf(num[3], k)
            / (mp.rf(den[0], k) * mp.rf(den[1], k) * mp.rf(den[2], k) * mp.factorial(k))))
        for k in range(n + 1)
    )
    assert abs(got - ref) <= 1e-14 * max(1, scale)


def test_scaled_series_is_denominator_product_times_sum():
    num, den = [-4, 2.5, 0.3 + 0.2j], [1.5, 0.8]
    plain = hyp_pFq_terminating(num, den)
    scaled = hyp_pFq_scaled(num, den)
    assert scaled == pytest.approx(plain * pochhammer(1.5, 4) * pochhammer(0.8, 4), rel=1e-13)


def test_scaled_survives_vanishing_denominator():
    # (b)_k vanishes at k = 2 for b = -2 + small; the scaled sum stays finite
    with pytest.raises(SeriesError):
        hyp_pFq_terminating([-4, 1.0], [-2.0])
    assert np.isfinite(hyp_pFq_scaled([-4, 1.0], [-2.0]))


def _mp_qterms(num, den, q, n):
    q = mp.mpf(q)
    out, t = [], mp.mpc(1)
    for k in range(n + 1):
        out.append(t)
        r = q / (1 - q ** (k + 1))
        for a in num:
            r *= 1 - mp.mpc(a) * q**k
        for b in den:
            r /= 1 - mp.mpc(b) * q**k
        t *= r
    return out


@given(st.integers(0, 6), cplx, cplx, st.floats(0.1, 0.9))
def test_terminating_4phi3_matches_mpmath(n, a, b, q):
    num = [q**-n, 0.3 * q ** (n - 1), 0.5 * a, 0.5 * b]
    den = [0.2 + 0.1j, -0.4, 0.35]
    terms = _mp_qterms(num, den, q, n)
    ref = complex(mp.fsum(terms))
    scale = float(mp.fsum(abs(t) for t in terms))
    assert abs(hyp_qphi_terminating(num, den, q, n=n) - ref) <= 1e-14 * max(1, scale)


def test_qphi_scaled_matches_plain():
    q = 0.4
    num, den = [q**-3, 0.2, 0.3, 0.5j], [0.6, -0.2, 0.1]
    ratio = hyp_qphi_scaled(num, den, q) / hyp_qphi_terminating(num, den, q)
    assert ratio == pytest.approx(complex(np.prod([q_pochhammer(b, q, 3) for b in den])), rel=1e-12)


def test_termination_index_required():
    with pytest.raises(ValueError):
        hyp_pFq_terminating([0.5, 1.5], [2.0])


def test_convergent_series():
    got = hyp_series([0.5, 1.0], [1.5], -0.3)
    assert got == pytest.approx(complex(mp.hyp2f1(0.5, 1, 1.5, -0.3)), rel=1e-14)
    got = hyp_series([0.2, 0.4], [0.7], 0.2, q=0.5)
    assert got == pytest.approx(complex(mp.qhyper([0.2, 0.4], [0.7], 0.5, 0.2)), rel=1e-14)


@given(st.floats(0.05, 40), st.floats(-50, 50))
def test_log_gamma_matches_mpmath(re, im):
    z = complex(re, im)
    ref = complex(mp.loggamma(mp.mpc(z)))
    assert abs(log_gamma(z) - ref) <= 1e-13 * max(1, abs(ref))


def test_log_gamma_reflection_region():
    z = np.array([-0.5 + 0.1j, -3.3 + 2j, -7.5])
    for v, g in zip(z, log_gamma(z)):
        assert abs(np.exp(g) - complex(mp.gamma(v))) <= 1e-12 * abs(complex(mp.gamma(v)))


def test_log_gamma_pole():
    with pytest.raises(PoleError):
        log_gamma(-3.0)


def test_backends_agree():
    rng = np.random.default_rng(3)
    num = rng.normal(size=(40, 4)) + 1j * rng.normal(size=(40, 4))
    den = 1.5 + rng.uniform(size=(40, 3))
    for q in (0.0, 0.6):
        ref, _ = _fallback.terminating_sum(num, den, 0.6 if q else 1.0, q, 7, False)
        got, _ = kernels.terminating_sum(num, den, 0.6 if q else 1.0, q, 7, False)
        assert np.allclose(got, ref, rtol=1e-13, atol=0)
    a = np.linspace(0.1, 0.9, 11) * np.exp(0.4j)
    assert np.allclose(kernels.q_product(a, 0.7, 50), _fallback.q_product(a, 0.7, 50), rtol=1e-14)


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")
