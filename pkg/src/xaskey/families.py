"""The continuous Hahn (cH), Wilson (W) and Askey-Wilson (AW) systems.

Everything is keyed by a :class:`ParamSet`. For cH and W the stored
parameters are lambda itself; for AW they are ``a = q**lambda`` together
with ``q``, so parameter shifts act multiplicatively there.

All x-dependent functions accept complex scalars or arrays.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import faults
from .hyperseries import (
    PoleError,
    hyp_pFq_scaled,
    hyp_qphi_scaled,
    log_gamma,
    q_pochhammer,
)


class Family(str, Enum):
    CH = "cH"
    W = "W"
    AW = "AW"


_ARITY = {Family.CH: 2, Family.W: 4, Family.AW: 4}
# twist sign pattern / delta-tilde pattern, in units of the parameter shift
_TWIST = {Family.CH: (True, False), Family.W: (True, True, False, False)}
_TWIST[Family.AW] = _TWIST[Family.W]
_TILDE = {Family.CH: (1, -1), Family.W: (1, 1, -1, -1), Family.AW: (1, 1, -1, -1)}


class InvalidParameters(ValueError):
    pass


def _as_family(f):
    return f if isinstance(f, Family) else Family(f)


def _conj_closed(vals, tol=1e-12):
    rest = list(vals)
    for v in vals:
        c = complex(v).conjugate()
        hits = [i for i, w in enumerate(rest) if abs(w - c) <= tol * max(1.0, abs(c))]
        if not hits:
            return False
        rest.pop(hits[0])
    return True


@dataclass(frozen=True)
class ParamSet:
    """A family tag with its parameters (lambda for cH/W, a = q^lambda for AW)."""

    family: Family
    a: tuple
    q: float | None = None

    def __post_init__(self):
        fam = _as_family(self.family)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "a", tuple(complex(v) for v in self.a))
        if len(self.a) != _ARITY[fam]:
            raise InvalidParameters(f"{fam.value} takes {_ARITY[fam]} parameters, got {len(self.a)}")
        if fam is Family.AW:
            if self.q is None or not 0.0 < float(self.q) < 1.0:
                raise InvalidParameters("AW requires 0 < q < 1")
            object.__setattr__(self, "q", float(self.q))
        elif self.q is not None:
            raise InvalidParameters(f"{fam.value} takes no q")

    # -- per-family constants ------------------------------------------------
    @property
    def gamma(self) -> float:
        return math.log(self.q) if self.family is Family.AW else 1.0

    @property
    def kappa(self) -> float:
        return 1.0 / self.q if self.family is Family.AW else 1.0

    @property
    def interval(self) -> tuple[float, float]:
        return {Family.CH: (-math.inf, math.inf), Family.W: (0.0, math.inf), Family.AW: (0.0, math.pi)}[
            self.family
        ]

    @property
    def b1(self) -> complex:
        a = self.a
        if self.family is Family.CH:
            return a[0] + a[1] + a[0].conjugate() + a[1].conjugate()
        return sum(a)

    @property
    def b4(self) -> complex:
        a = self.a
        return a[0] * a[1] * a[2] * a[3]

    # -- parameter arithmetic ------------------------------------------------
    def _step(self, v, units):
        if self.family is Family.AW:
            return v * self.q ** (0.5 * units)
        return v + 0.5 * units

    def shifted(self, k=1) -> "ParamSet":
        """lambda -> lambda + k*delta."""
        return ParamSet(self.family, tuple(self._step(v, k) for v in self.a), self.q)

    def tilde_shifted(self, k=1) -> "ParamSet":
        """lambda -> lambda + k*delta_tilde."""
        steps = _TILDE[self.family]
        return ParamSet(self.family, tuple(self._step(v, k * s) for v, s in zip(self.a, steps)), self.q)

    def twisted(self) -> "ParamSet":
        flips = _TWIST[self.family]
        if self.family is Family.AW:
            vals = tuple(1.0 / v if f else v for v, f in zip(self.a, flips))
        else:
            vals = tuple(-v if f else v for v, f in zip(self.a, flips))
        return ParamSet(self.family, vals, self.q)

    def conjugated(self) -> "ParamSet":
        return ParamSet(self.family, tuple(v.conjugate() for v in self.a), self.q)

    def permuted(self, order) -> "ParamSet":
        return ParamSet(self.family, tuple(self.a[i] for i in order), self.q)

    # -- validity --------------------------------------------------------------
    @property
    def is_valid(self) -> bool:
        a = self.a
        if self.family is Family.CH:
            return all(v.real > 0 for v in a)
        if self.family is Family.W:
            return all(v.real > 0 for v in a) and _conj_closed(a)
        return all(abs(v) < 1 for v in a) and _conj_closed(a)

    @property
    def deformation_ready(self) -> bool:
        """The restricted ranges under which the exceptional deformation is built."""
        if not self.is_valid:
            return False
        a = self.a
        real12 = all(abs(v.imag) <= 1e-14 for v in a[:2])
        if self.family is Family.CH:
            return a[0].real > 0 and abs(a[0].imag) <= 1e-14
        if not real12 or not _conj_closed(a[2:]):
            return False
        if self.family is Family.W:
            return all(0 < a[j].real < a[k].real for j in (0, 1) for k in (2, 3))
        return all(1 > a[j].real > abs(a[k]) for j in (0, 1) for k in (2, 3))

    def check(self) -> "ParamSet":
        if not self.is_valid:
            raise InvalidParameters(f"parameters outside the allowed range: {self.fingerprint}")
        return self

    @property
    def fingerprint(self) -> str:
        def fmt(v):
            if abs(v.imag) < 1e-15:
                return f"{v.real:.12g}"
            return f"{v.real:.12g}{v.imag:+.12g}j"

        body = ",".join(fmt(v) for v in self.a)
        tail = f";q={self.q:.12g}" if self.q is not None else ""
        return f"{self.family.value}({body}{tail})"


def shift_params(p: ParamSet, k) -> ParamSet:
    return p.shifted(k)


def twist(p: ParamSet) -> ParamSet:
    return p.twisted()


@dataclass(frozen=True)
class AnalyticMap:
    """A complex-analytic function of x, evaluated elementwise on arrays."""

    evaluator: Callable
    descriptor: str = ""

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=complex))


@dataclass(frozen=True)
class PolyInEta:
    """Polynomial in the sinusoidal coordinate, degree-ascending coefficients."""

    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        c = np.abs(self.coeffs)
        big = np.nonzero(c > 1e-14 * c.max())[0] if c.max() > 0 else [0]
        return int(big[-1])

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[self.degree])

    def __call__(self, eta):
        return np.polynomial.polynomial.polyval(eta, self.coeffs)

    def is_real(self, tol=1e-12) -> bool:
        scale = np.abs(self.coeffs).max()
        return bool(np.all(np.abs(self.coeffs.imag) <= tol * scale))


class NotPolynomialError(ValueError):
    pass


# -- coordinates --------------------------------------------------------------


def eta(family, x):
    family = _as_family(family)
    x = np.asarray(x, dtype=complex)
    if family is Family.CH:
        out = x
    elif family is Family.W:
        out = x * x
    else:
        out = np.cos(x)
    return out[()] if out.ndim == 0 else out


def varphi(family, x):
    family = _as_family(family)
    x = np.asarray(x, dtype=complex)
    if family is Family.CH:
        out = np.ones_like(x)
    elif family is Family.W:
        out = 2 * x
    else:
        out = 2 * np.sin(x)
    return out[()] if out.ndim == 0 else out


def x_of_eta(family, e):
    """A preimage x of eta on the real interval (used for interpolation nodes)."""
    family = _as_family(family)
    e = np.asarray(e, dtype=float)
    if family is Family.CH:
        return e.astype(complex)
    if family is Family.W:
        return np.sqrt(e).astype(complex)
    return np.arccos(e).astype(complex)


# -- potentials ---------------------------------------------------------------


def _potential(fam, a, q, x, s):
    # s = +1 for V, -1 for V*; `a` already conjugated for V*
    i = 1j * s
    if fam is Family.CH:
        return (a[0] + i * x) * (a[1] + i * x)
    if fam is Family.W:
        num = (a[0] + i * x) * (a[1] + i * x) * (a[2] + i * x) * (a[3] + i * x)
        return num / (2 * i * x * (2 * i * x + 1))
    e = np.exp(i * x)
    num = (1 - a[0] * e) * (1 - a[1] * e) * (1 - a[2] * e) * (1 - a[3] * e)
    return num / ((1 - e * e) * (1 - q * e * e))


def _conj(a):
    return tuple(v.conjugate() for v in a)


def potential_V(p: ParamSet, x):
    x = np.asarray(x, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _potential(p.family, p.a, p.q, x, +1)
    return out[()] if np.ndim(out) == 0 else out


def potential_V_star(p: ParamSet, x):
    """V*(x): the closed form with conjugated coefficients (not conj(V(conj x)))."""
    x = np.asarray(x, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _potential(p.family, _conj(p.a), p.q, x, -1)
    return out[()] if np.ndim(out) == 0 else out


def _v_factor(fam, pair, x, s):
    i = 1j * s
    if fam is Family.CH:
        return i * (pair[0] + i * x)
    if fam is Family.W:
        return (pair[0] + i * x) * (pair[1] + i * x)
    e = np.exp(i * x)
    return (1 - pair[0] * e) * (1 - pair[1] * e) / e


def _pairs(p):
    if p.family is Family.CH:
        return (p.a[0],), (p.a[1],)
    return p.a[:2], p.a[2:]


def v1(p: ParamSet, x, star=False):
    x = np.asarray(x, dtype=complex)
    pair = _pairs(p)[0]
    out = _v_factor(p.family, _conj(pair) if star else pair, x, -1 if star else 1)
    return out[()] if np.ndim(out) == 0 else out


def v2(p: ParamSet, x, star=False):
    x = np.asarray(x, dtype=complex)
    pair = _pairs(p)[1]
    out = _v_factor(p.family, _conj(pair) if star else pair, x, -1 if star else 1)
    return out[()] if np.ndim(out) == 0 else out


def potential_factors_v1_v2(p: ParamSet, x):
    return v1(p, x), v2(p, x)


# -- spectrum -----------------------------------------------------------------


def _real(v):
    v = complex(v)
    if abs(v.imag) <= 1e-12 * max(1.0, abs(v)):
        return v.real
    return v


def energy(p: ParamSet, n: int):
    if n == 0:
        return 0.0
    if p.family is Family.AW:
        q = p.q
        val = (q**-n - 1) * (1 - p.b4 * q ** (n - 1))
    else:
        val = n * (n + p.b1 - 1)
    return faults.apply("E", _real(val), n=n, params=p)


def f_n(p: ParamSet, n: int):
    if p.family is Family.CH:
        return _real(n + p.b1 - 1)
    if p.family is Family.W:
        return _real(-n * (n + p.b1 - 1))
    q = p.q
    return _real(q ** (n / 2) * (q**-n - 1) * (1 - p.b4 * q ** (n - 1)))


def b_n(p: ParamSet, n: int):
    """b_n(lambda); the energy factorises as E_n = f_n * b_{n-1}."""
    if p.family is Family.CH:
        return float(n + 1)
    if p.family is Family.W:
        return -1.0
    return p.q ** (-(n + 1) / 2)


# -- eigenpolynomials ---------------------------------------------------------


class _Degenerate(ArithmeticError):
    pass


def _recurrence_coeffs(p: ParamSet, n: int):
    """Monic three-term recurrence data (B_k, G_k) and the leading coefficient of P_n.

    p_{k+1} = (eta - B_k) p_k - G_k p_{k-1}; raises :class:`_Degenerate` when a
    coefficient denominator (nearly) vanishes, i.e. an intermediate degree drops.
    """
    fam = p.family
    if fam is Family.CH:
        a, b = p.a
        c, d = a.conjugate(), b.conjugate()
    elif fam is Family.W:
        a, b, c, d = p.a
    else:
        k0 = int(np.argmax([abs(v) for v in p.a]))
        a = p.a[k0]
        b, c, d = (p.a[j] for j in range(4) if j != k0)
    s = a + b + c + d
    q = p.q
    b4 = a * b * c * d

    def den(v, ref=1.0):
        if abs(v) <= 1e-10 * max(1.0, abs(ref)):
            raise _Degenerate
        return v

    def AC(k):
        if fam is Family.W:
            A = (k + s - 1) * (k + a + b) * (k + a + c) * (k + a + d) / den((2 * k + s - 1) * (2 * k + s))
            C = k * (k + b + c - 1) * (k + b + d - 1) * (k + c + d - 1) / den(
                (2 * k + s - 2) * (2 * k + s - 1)
            ) if k else 0.0
        elif fam is Family.CH:
            A = -(k + s - 1) * (k + a + c) * (k + a + d) / den((2 * k + s - 1) * (2 * k + s))
            C = k * (k + b + c - 1) * (k + b + d - 1) / den((2 * k + s - 2) * (2 * k + s - 1)) if k else 0.0
        else:
            A = (
                (1 - a * b * q**k) * (1 - a * c * q**k) * (1 - a * d * q**k) * (1 - b4 * q ** (k - 1))
                / (a * den((1 - b4 * q ** (2 * k - 1)) * (1 - b4 * q ** (2 * k))))
            )
            C = (
                a * (1 - q**k) * (1 - b * c * q ** (k - 1)) * (1 - b * d * q ** (k - 1)) * (1 - c * d * q ** (k - 1))
                / den((1 - b4 * q ** (2 * k - 2)) * (1 - b4 * q ** (2 * k - 1)))
            ) if k else 0.0
        return A, C

    Bs, Gs = [], []
    prevA = None
    for k in range(n):
        A, C = AC(k)
        if fam is Family.W:
            Bs.append(A + C - a * a)
            Gs.append(prevA * C if k else 0.0)
        elif fam is Family.CH:
            Bs.append(1j * (A + C + a))
            Gs.append(-prevA * C if k else 0.0)
        else:
            Bs.append(0.5 * (a + 1 / a - A - C))
            Gs.append(0.25 * prevA * C if k else 0.0)
        prevA = A
    if fam is Family.W:
        lead = (-1) ** n * complex(_poch_scalar(n + s - 1, n))
    elif fam is Family.CH:
        lead = complex(_poch_scalar(n + s - 1, n)) / math.factorial(n)
    else:
        lead = 2**n * complex(q_pochhammer(b4 * q ** (n - 1), q, n))
    return Bs, Gs, lead


def _Pn_recurrence(p, n, e):
    Bs, Gs, lead = _recurrence_coeffs(p, n)
    prev = np.zeros_like(e)
    cur = np.ones_like(e)
    for k in range(n):
        prev, cur = cur, (e - Bs[k]) * cur - Gs[k] * prev
    return lead * cur


def _Pn_series(p, n, x):
    fam, a = p.family, p.a
    if fam is Family.CH:
        c1, c2 = a[0].conjugate(), a[1].conjugate()
        s = hyp_pFq_scaled([-n, n + p.b1 - 1, a[0] + 1j * x], [a[0] + c1, a[0] + c2], 1.0, n)
        return s * (1j**n / math.factorial(n))
    if fam is Family.W:
        # symmetric in all four parameters; a[0] leads
        return hyp_pFq_scaled(
            [-n, n + p.b1 - 1, a[0] + 1j * x, a[0] - 1j * x],
            [a[0] + a[1], a[0] + a[2], a[0] + a[3]],
            1.0,
            n,
        )
    # lead with the largest |a_j| so that a_1^{-n} stays harmless
    k = int(np.argmax([abs(v) for v in a]))
    a1 = a[k]
    rest = [a[j] for j in range(4) if j != k]
    q = p.q
    e = np.exp(1j * x)
    s = hyp_qphi_scaled(
        [q**-n, p.b4 * q ** (n - 1), a1 * e, a1 / e],
        [a1 * rest[0], a1 * rest[1], a1 * rest[2]],
        q,
        q,
        n,
    )
    return s * a1**-n


def eval_Pn(p: ParamSet, n: int, x, method="auto"):
    """P_n(eta(x); lambda).

    ``method="series"`` sums the (basic) hypergeometric representation
    directly. ``"recurrence"`` runs the monic three-term recurrence in eta,
    which avoids the heavy cancellation of the terminating sum (for AW the
    4phi3 terms can exceed the result by ten orders of magnitude at n = 8).
    ``"auto"`` uses the recurrence unless one of its coefficients is
    singular for this parameter set, and then falls back to the series.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=complex)
    if n == 0:
        out = np.ones_like(x)
        return out[()] if out.ndim == 0 else out
    if method not in ("auto", "series", "recurrence"):
        raise ValueError(f"unknown method {method!r}")
    out = None
    if method != "series":
        try:
            out = _Pn_recurrence(p, n, np.asarray(eta(p.family, x), dtype=complex))
        except _Degenerate:
            if method == "recurrence":
                raise
    if out is None:
        out = _Pn_series(p, n, x)
    return out[()] if np.ndim(out) == 0 else out


def Pn_map(p: ParamSet, n: int) -> AnalyticMap:
    return AnalyticMap(lambda x: eval_Pn(p, n, x), f"P_{n}({p.fingerprint})")


_ETA_RANGE = {Family.CH: (-1.0, 1.0), Family.W: (0.1, 1.1), Family.AW: (-0.95, 0.95)}


def _fit_in_eta(f, degree, family, window=None):
    family = _as_family(family)
    lo, hi = window or _ETA_RANGE[family]
    m = degree + 1
    k = np.arange(m)
    t = np.cos(np.pi * (k + 0.5) / m)
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t
    vals = np.asarray(f(x_of_eta(family, nodes)), dtype=complex)
    cheb = np.polynomial.chebyshev.chebfit(t, vals, degree)
    # map chebyshev-in-t to monomials in eta: t = (2 eta - lo - hi) / (hi - lo)
    mono_t = np.polynomial.chebyshev.cheb2poly(cheb)
    lin = np.array([-(lo + hi) / (hi - lo), 2.0 / (hi - lo)])
    coeffs = np.zeros(m, dtype=complex)
    power = np.array([1.0])
    for c in mono_t:
        coeffs[: len(power)] += c * power
        power = np.polynomial.polynomial.polymul(power, lin)
    poly = PolyInEta(coeffs)

    nchk = max(2, 2 * degree)
    fresh = lo + (hi - lo) * (np.arange(nchk) + 0.37) / nchk
    got = np.asarray(f(x_of_eta(family, fresh)), dtype=complex)
    resid = float(np.max(np.abs(got - poly(fresh))))
    return poly, resid, float(np.max(np.abs(got)))


def _windows(family):
    lo, hi = _ETA_RANGE[family]
    if family is Family.AW:
        return [(lo, hi)]
    return [(lo, lo + (hi - lo) * s) if family is Family.W else (lo * s, hi * s) for s in (1, 4, 16)]


def coefficients_in_eta(f, degree: int, family) -> PolyInEta:
    """Interpolate ``f`` (a function of x) as a polynomial of given degree in eta.

    Chebyshev-spaced eta nodes on a fixed family window; the fit is then
    checked at max(2, 2*degree) fresh nodes and :class:`NotPolynomialError`
    is raised if the residual exceeds 1e-9 * max|coeff|.
    """
    poly, resid, _ = _fit_in_eta(f, degree, family)
    scale = np.max(np.abs(poly.coeffs))
    if not resid <= 1e-9 * scale:
        raise NotPolynomialError(
            f"not a degree-{degree} polynomial in eta: residual {resid:.3g} vs scale {scale:.3g}"
        )
    return poly


def has_exact_degree(f, degree: int, family) -> bool:
    """True iff ``f`` is a polynomial of degree exactly ``degree`` in eta.

    The degree-``degree`` fit must pass the residual check, and dropping to
    one degree lower must leave a residual at least 1e4 times larger than
    both that noise floor and 1e-13 of the sampled values (so the top
    coefficient is resolved, however small it looks in the monomial basis).
    For cH and W the eta window is widened up to 16-fold until that happens.
    """
    family = _as_family(family)
    try:
        coefficients_in_eta(f, degree, family)
    except NotPolynomialError:
        return False
    if degree == 0:
        return True
    for win in _windows(family):
        _, r_hi, vmax = _fit_in_eta(f, degree, family, win)
        _, r_lo, _ = _fit_in_eta(f, degree - 1, family, win)
        if r_lo > 1e4 * max(r_hi, 1e-13 * vmax):
            return True
    return False


# -- ground state and norms ---------------------------------------------------


def log_weight_analytic(p: ParamSet, x):
    """Complex log of the analytically continued phi_0(x)^2 (branch immaterial)."""
    x = np.asarray(x, dtype=complex)
    a = p.a
    if p.family is Family.CH:
        c = _conj(a)
        out = (
            log_gamma(a[0] + 1j * x)
            + log_gamma(a[1] + 1j * x)
            + log_gamma(c[0] - 1j * x)
            + log_gamma(c[1] - 1j * x)
        )
    elif p.family is Family.W:
        out = -log_gamma(2j * x) - log_gamma(-2j * x)
        for v in a:
            out = out + log_gamma(v + 1j * x) + log_gamma(v - 1j * x)
    else:
        q = p.q
        e = np.exp(1j * x)
        prod = q_pochhammer(e * e, q, math.inf) * q_pochhammer(1 / (e * e), q, math.inf)
        for v in a:
            prod = prod / (q_pochhammer(v * e, q, math.inf) * q_pochhammer(v / e, q, math.inf))
        out = np.log(prod)
    return out[()] if np.ndim(out) == 0 else out


def groundstate_weight(p: ParamSet, x, log=False):
    """phi_0(x)^2 on the real interval, or its logarithm with ``log=True``."""
    x = np.asarray(x, dtype=float)
    xc = x.astype(complex)
    a = p.a
    with np.errstate(divide="ignore", invalid="ignore"):
        if p.family is Family.CH:
            lw = 2 * (log_gamma(a[0] + 1j * xc).real + log_gamma(a[1] + 1j * xc).real)
        elif p.family is Family.W:
            lw = np.zeros(x.shape)
            for v in a:
                lw = lw + (log_gamma(v + 1j * xc) + log_gamma(v - 1j * xc)).real
            safe = np.where(x == 0, 1.0, xc)
            lw = lw - 2 * log_gamma(2j * safe).real
            lw = np.where(x == 0, -np.inf, lw)
        else:
            q = p.q
            e = np.exp(1j * xc)
            top = np.abs(q_pochhammer(e * e, q, math.inf)) ** 2
            bot = np.ones(x.shape, dtype=complex)
            for v in a:
                bot = bot * q_pochhammer(v * e, q, math.inf) * q_pochhammer(v / e, q, math.inf)
            lw = np.log(top) - np.log(bot.real)
    lw = np.asarray(lw, dtype=float)
    out = lw if log else np.exp(lw)
    return out[()] if np.ndim(out) == 0 else out


def log_norm_hn(p: ParamSet, n: int) -> float:
    a = p.a
    if p.family is Family.CH:
        c = _conj(a)
        val = math.log(2 * math.pi)
        for ai in a:
            for cj in c:
                val = val + log_gamma(n + ai + cj)
        b1 = p.b1
        val = val - (math.lgamma(n + 1) + np.log(2 * n + b1 - 1) + log_gamma(n + b1 - 1))
    elif p.family is Family.W:
        b1 = p.b1
        val = math.log(2 * math.pi) + math.lgamma(n + 1) + np.log(complex(_poch_scalar(n + b1 - 1, n)))
        for i in range(4):
            for j in range(i + 1, 4):
                val = val + log_gamma(n + a[i] + a[j])
        val = val - log_gamma(2 * n + b1)
    else:
        q, b4 = p.q, p.b4
        prod = complex(q_pochhammer(b4 * q ** (n - 1), q, n)) * complex(q_pochhammer(b4 * q ** (2 * n), q, math.inf))
        prod = prod / complex(q_pochhammer(q ** (n + 1), q, math.inf))
        for i in range(4):
            for j in range(i + 1, 4):
                prod = prod / complex(q_pochhammer(a[i] * a[j] * q**n, q, math.inf))
        val = math.log(2 * math.pi) + np.log(prod)
    return float(complex(val).real)


def _poch_scalar(a, n):
    out = 1.0 + 0j
    for k in range(n):
        out *= a + k
    return out


def norm_hn(p: ParamSet, n: int) -> float:
    return faults.apply("h", math.exp(log_norm_hn(p, n)), n=n, params=p)


__all__ = [
    "Family",
    "ParamSet",
    "AnalyticMap",
    "PolyInEta",
    "InvalidParameters",
    "NotPolynomialError",
    "PoleError",
    "shift_params",
    "twist",
    "eta",
    "varphi",
    "x_of_eta",
    "potential_V",
    "potential_V_star",
    "v1",
    "v2",
    "potential_factors_v1_v2",
    "energy",
    "f_n",
    "b_n",
    "eval_Pn",
    "Pn_map",
    "coefficients_in_eta",
    "has_exact_degree",
    "log_weight_analytic",
    "groundstate_weight",
    "log_norm_hn",
    "norm_hn",
]
