import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xaskey.families import (
    Family,
    InvalidParameters,
    NotPolynomialError,
    ParamSet,
    b_n,
    coefficients_in_eta,
    energy,
    eta,
    eval_Pn,
    f_n,
    groundstate_weight,
    has_exact_degree,
    log_weight_analytic,
    norm_hn,
    potential_V,
    potential_V_star,
    v1,
    v2,
    varphi,
)

from conftest import ORIGINAL

mp.mp.dps = 50


def _oracle(p, n, x):
    """P_n from the hypergeometric definition in 50-digit arithmetic."""
    x = mp.mpc(x)
    a = [mp.mpc(v) for v in p.a]
    if p.family is Family.CH:
        c = [mp.conj(v) for v in a]
        b1 = sum(a) + sum(c)
        pre = mp.mpc(0, 1) ** n * mp.rf(a[0] + c[0], n) * mp.rf(a[0] + c[1], n) / mp.factorial(n)
        return pre * mp.hyper([-n, n + b1 - 1, a[0] + 1j * x], [a[0] + c[0], a[0] + c[1]], 1)
    if p.family is Family.W:
        b1 = sum(a)
        pre = mp.rf(a[0] + a[1], n) * mp.rf(a[0] + a[2], n) * mp.rf(a[0] + a[3], n)
        return pre * mp.hyper([-n, n + b1 - 1, a[0] + 1j * x, a[0] - 1j * x], [a[0] + a[1], a[0] + a[2], a[0] + a[3]], 1)
    q = mp.mpf(p.q)
    b4 = a[0] * a[1] * a[2] * a[3]
    e = mp.exp(1j * x)
    num = [q**-n, b4 * q ** (n - 1), a[0] * e, a[0] / e]
    den = [a[0] * a[1], a[0] * a[2], a[0] * a[3]]
    tot, t = mp.mpc(0), mp.mpc(1)
    for k in range(n + 1):
        tot += t
        r = q / (1 - q ** (k + 1))
        for u in num:
            r *= 1 - u * q**k
        for v in den:
            r /= 1 - v * q**k
        t *= r
    return a[0] ** -n * mp.qp(a[0] * a[1], q, n) * mp.qp(a[0] * a[2], q, n) * mp.qp(a[0] * a[3], q, n) * tot


@pytest.mark.parametrize("method", ["recurrence", "series"])
@pytest.mark.parametrize("n", [1, 3, 6, 8])
def test_Pn_against_oracle(original, n, method):
    if method == "series" and original.family is Family.AW and n > 6:
        pytest.skip("terminating 4phi3 loses about ten digits here")
    xs = np.array([0.3, 1.1 + 0.2j, 2.4 - 0.1j])
    got = eval_Pn(original, n, xs, method=method)
    ref = np.array([complex(_oracle(original, n, x)) for x in xs])
    assert np.max(np.abs(got - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_P0_is_one(original):
    assert np.all(eval_Pn(original, 0, np.linspace(0.1, 2, 5)) == 1)


def test_Pn_is_polynomial_of_exact_degree(original):
    for n in range(5):
        assert has_exact_degree(lambda x: eval_Pn(original, n, x), n, original.family)
    assert not has_exact_degree(lambda x: eval_Pn(original, 4, x), 3, original.family)


def test_coefficients_reject_non_polynomial():
    with pytest.raises(NotPolynomialError):
        coefficients_in_eta(lambda x: np.exp(x), 3, "cH")


def test_energy_factorises(original):
    for n in range(1, 8):
        assert energy(original, n) == pytest.approx(f_n(original, n) * b_n(original, n - 1), rel=1e-14)


def test_energy_is_increasing(original):
    E = [energy(original, n) for n in range(8)]
    assert E[0] == 0 and all(b > a for a, b in zip(E, E[1:]))


def test_potential_factorisation(original):
    fam, g, sk = original.family, original.gamma, np.sqrt(original.kappa)
    x = np.array([0.4 + 0.1j, 1.3 - 0.2j])
    rhs = -sk * v1(original, x) * v2(original, x) / (varphi(fam, x) * varphi(fam, x - 0.5j * g))
    assert np.allclose(rhs, potential_V(original, x), rtol=1e-13, atol=0)
    rhs = -sk * v1(original, x, True) * v2(original, x, True) / (varphi(fam, x) * varphi(fam, x + 0.5j * g))
    assert np.allclose(rhs, potential_V_star(original, x), rtol=1e-13, atol=0)


def test_potential_star_is_conjugate_on_real_line(original):
    x = np.array([0.4, 1.3, 2.2])
    assert np.allclose(potential_V_star(original, x), np.conj(potential_V(original, x)), rtol=1e-14)


def test_weight_positive_and_matches_analytic(original):
    lo, hi = {Family.CH: (-3, 3), Family.W: (0.05, 3), Family.AW: (0.05, 3.0)}[original.family]
    x = np.linspace(lo, hi, 9)
    w = groundstate_weight(original, x)
    assert np.all(w > 0)
    assert np.allclose(np.exp(np.real(log_weight_analytic(original, x))), w, rtol=1e-12)


def test_cH_unit_norm_is_pi_over_three():
    # |Gamma(1 + ix)|^4 integrates to pi/3 over the real line
    assert norm_hn(ParamSet("cH", (1, 1)), 0) == pytest.approx(math.pi / 3, rel=1e-14)


def test_norm_vs_mpmath_quadrature():
    p = ORIGINAL["W"]
    for n in (0, 2):
        f = lambda x: (
            abs(mp.gamma(0.3 + 1j * x) * mp.gamma(0.5 + 1j * x) * mp.gamma(1.1 + 1j * x) * mp.gamma(1.7 + 1j * x)
                / mp.gamma(2j * x)) ** 2
            * mp.re(_oracle(p, n, x)) ** 2
        )
        mp.mp.dps = 20
        ref = mp.quad(f, [0, 2, 8, mp.inf])
        mp.mp.dps = 50
        assert norm_hn(p, n) == pytest.approx(float(ref), rel=1e-9)


@pytest.mark.parametrize(
    "fam,a,q",
    [("cH", (-0.1, 1), None), ("W", (0.3, 0.5, 1 + 1j, 2), None), ("AW", (0.5, 1.2, 0.1, 0.1), 0.5)],
)
def test_invalid_parameters(fam, a, q):
    assert not ParamSet(fam, a, q).is_valid
    with pytest.raises(InvalidParameters):
        ParamSet(fam, a, q).check()


def test_arity_and_q_checks():
    with pytest.raises(InvalidParameters):
        ParamSet("W", (1, 2, 3))
    with pytest.raises(InvalidParameters):
        ParamSet("AW", (0.1, 0.2, 0.3, 0.4), 1.5)
    with pytest.raises(InvalidParameters):
        ParamSet("cH", (1, 2), 0.5)


@given(st.floats(0.1, 2), st.floats(0.1, 2), st.floats(-1, 1))
def test_shift_and_twist_are_involutive(a1, a2, im):
    p = ParamSet("cH", (a1, complex(a2, im)))
    assert p.twisted().twisted() == p
    assert p.shifted(2).shifted(-2).a == pytest.approx(p.a)


def test_eta_coordinates():
    x = np.array([0.3, 1.2])
    assert np.allclose(eta("cH", x), x)
    assert np.allclose(eta("W", x), x * x)
    assert np.allclose(eta("AW", x), np.cos(x))
