"""The identity suite.

Every checked identity is registered under a fixed id. An identity of kind

* ``pointwise`` returns, for an array of sample points, a list of
  ``(difference, scale)`` pairs where ``scale`` is the largest summand
  magnitude; the scaled residual is ``|difference| / max(1, scale)``;
* ``scalar`` compares closed-form constants and reports relative
  differences, with ``worst_point = n``;
* ``check`` runs its own procedure (quadrature, certificates, limits,
  random hypergeometric draws) and returns a residual directly.

A report passes iff its residual is at most the tolerance.
"""

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from contextlib import ExitStack
from dataclasses import dataclass

import numpy as np

from . import faults
from .config import SuiteConfig
from .deformation import (
    DeformedSystem,
    b_hat,
    b_ln,
    check_zero_free,
    energy_Eln,
    eval_Pln,
    eval_xi,
    f_hat,
    f_ln,
    intertwine_potential_Vhat,
    kappa_hat,
    norm_hln,
    norm_hln_via_original,
    norm_hln_via_shifted,
    potential_Vell,
)
from .families import (
    Family,
    InvalidParameters,
    ParamSet,
    b_n,
    coefficients_in_eta,
    energy,
    eta,
    eval_Pn,
    f_n,
    has_exact_degree,
    log_weight_analytic,
    norm_hn,
    potential_V,
    potential_V_star,
    v1,
    v2,
    varphi,
)
from .hyperseries import PoleError, hyp_pFq_terminating, hyp_qphi_terminating
from .operators import (
    B,
    B_ell,
    Bhat_ell,
    F,
    F_ell,
    Fhat_ell,
    Htilde,
    Htilde_ell,
    apply_terms,
    generating_function_Pln,
    rodrigues_Pln,
)
from .quadrature import contour_shift_admissibility, gram_matrix

SCHEMA_VERSION = 1

WINDOWS = {Family.CH: (-4.0, 4.0), Family.W: (0.0, 4.0), Family.AW: (0.0, math.pi)}

TOL_SINGLE = 1e-10
TOL_COMPOSED = 1e-9
TOL_SCALAR = 1e-12
TOL_QUAD = 1e-6
N_MAX_DIFEQ = 8
N_MAX = 6
N_RODRIGUES = 4


class PoleAtSample(ArithmeticError):
    pass


@dataclass(frozen=True)
class IdentityReport:
    id: str
    instance: str
    samples: int
    max_scaled_residual: float
    tolerance: float
    passed: bool
    worst_point: complex
    error: str | None = None
    name: str | None = None

    def to_json(self):
        r = self.max_scaled_residual
        out = {
            "id": self.id,
            "instance": self.instance,
            "samples": self.samples,
            "max_scaled_residual": float(r) if math.isfinite(r) else None,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "worst_point": [float(self.worst_point.real), float(self.worst_point.imag)],
        }
        if self.name is not None:
            out["name"] = self.name
        if self.error is not None:
            out["error"] = self.error
        return out

    @classmethod
    def from_json(cls, d):
        r = d["max_scaled_residual"]
        return cls(
            d["id"],
            d["instance"],
            d["samples"],
            math.inf if r is None else r,
            d["tolerance"],
            d["pass"],
            complex(*d["worst_point"]),
            d.get("error"),
            d.get("name"),
        )


@dataclass(frozen=True)
class IdentitySpec:
    name: str
    layer: str  # "original", "deformed" or "standalone"
    kind: str  # "pointwise", "scalar" or "check"
    tolerance: float
    fn: object
    families: tuple = ("cH", "W", "AW")


REGISTRY: dict = {}


def _identity(name, layer, kind, tol, families=("cH", "W", "AW")):
    def deco(fn):
        if name in REGISTRY:
            raise RuntimeError(f"duplicate identity {name}")
        REGISTRY[name] = IdentitySpec(name, layer, kind, tol, fn, families)
        return fn

    return deco


def identity_ids():
    return sorted(REGISTRY)


# -- helpers ---------------------------------------------------------------------


def _chk(lhs_terms, rhs_terms):
    """(difference, largest summand magnitude) of sum(lhs_terms) = sum(rhs_terms)."""
    terms = [np.asarray(t, dtype=complex) for t in list(lhs_terms) + list(rhs_terms)]
    diff = sum(np.asarray(t, dtype=complex) for t in lhs_terms) - sum(
        np.asarray(t, dtype=complex) for t in rhs_terms
    )
    scale = np.max(np.abs(np.array(np.broadcast_arrays(*terms))), axis=0)
    return diff, scale


def _ratio_chk(log_lhs, log_rhs):
    """Compare two quantities given by complex logarithms (branch immaterial)."""
    r = np.exp(np.asarray(log_lhs) - np.asarray(log_rhs))
    return r - 1.0, np.ones(np.shape(r))


def _rel(lhs, rhs):
    lhs, rhs = complex(lhs), complex(rhs)
    s = max(abs(lhs), abs(rhs))
    return 0.0 if s == 0 else abs(lhs - rhs) / s


def _family(ctx):
    if isinstance(ctx, DeformedSystem):
        return ctx.family
    return ctx.family


def sample_points(family, gamma, seed, samples, ident, attempt=0):
    """Deterministic sample points for one id: uniform Re x with 5% inset, Im x in {0, +-gamma/4}."""
    family = Family(family)
    lo, hi = WINDOWS[family]
    inset = 0.05 * (hi - lo)
    rng = np.random.default_rng([seed, zlib.crc32(ident.encode()), attempt])
    re = rng.uniform(lo + inset, hi - inset, samples)
    im = np.array([0.0, 0.25 * gamma, -0.25 * gamma])[np.arange(samples) % 3]
    return re + 1j * im


def _Pn(p, n):
    return lambda z: eval_Pn(p, n, z)


def _Pln(d, n):
    return lambda z: eval_Pln(d, n, z)


def _op_chk(op, f, rhs):
    """op f = rhs with the operator's summands as the scale."""

    def run(x):
        terms = apply_terms(op, f, x)
        return _chk(terms, [rhs(x)])

    return run


def _expanded_terms(outer, inner, f, x):
    """Summands of outer(inner f) at x: outer coefficient times one inner summand."""
    out = []
    for k in range(len(apply_terms(inner, f, x[:1]))):
        gk = lambda z, k=k: apply_terms(inner, f, z)[k]
        out.extend(apply_terms(outer, gk, x))
    return out


def _composed_chk(outer, inner, f, rhs_terms):
    """outer(inner f) = sum(rhs_terms(x)), scaled by the expanded summands."""

    def run(x):
        return _chk(_expanded_terms(outer, inner, f, x), rhs_terms(x))

    return run


# -- original systems ------------------------------------------------------------


@_identity("difeqP", "original", "pointwise", TOL_SINGLE)
def _difeqP(p, x):
    g = p.gamma
    V, Vs = potential_V(p, x), potential_V_star(p, x)
    out = []
    for n in range(N_MAX_DIFEQ + 1):
        P = eval_Pn(p, n, x)
        lhs = [V * eval_Pn(p, n, x - 1j * g), -V * P, Vs * eval_Pn(p, n, x + 1j * g), -Vs * P]
        out.append(_chk(lhs, [energy(p, n) * P]))
    return out


@_identity("varphiprop", "original", "pointwise", TOL_SINGLE)
def _varphiprop(p, x):
    g = p.gamma
    fam = p.family
    p1 = p.shifted(1)
    a = _chk(
        [potential_V(p1, x)],
        [varphi(fam, x - 1j * g) / (p.kappa * varphi(fam, x)) * potential_V(p, x - 0.5j * g)],
    )
    # phi_0(x; lambda + delta)^2 = varphi^2 V(x + i gamma/2) phi_0(x + i gamma/2)^2
    b = _ratio_chk(
        log_weight_analytic(p1, x),
        2 * np.log(varphi(fam, x))
        + np.log(potential_V(p, x + 0.5j * g))
        + log_weight_analytic(p, x + 0.5j * g),
    )
    return [a, b]


@_identity("factorV", "original", "pointwise", TOL_SINGLE)
def _factorV(p, x):
    g, fam, sk = p.gamma, p.family, math.sqrt(p.kappa)
    phi = varphi(fam, x)
    a = _chk([potential_V(p, x)], [-sk * v1(p, x) * v2(p, x) / (phi * varphi(fam, x - 0.5j * g))])
    b = _chk(
        [potential_V_star(p, x)],
        [-sk * v1(p, x, star=True) * v2(p, x, star=True) / (phi * varphi(fam, x + 0.5j * g))],
    )
    return [a, b]


def _shapeinv(V, Vs, V1, Vs1, kappa, E1, x, g):
    a = _chk([V(x - 0.5j * g) * Vs(x - 0.5j * g)], [kappa**2 * V1(x) * Vs1(x - 1j * g)])
    b = _chk(
        [V(x + 0.5j * g), Vs(x - 0.5j * g)],
        [kappa * V1(x), kappa * Vs1(x), -E1 * np.ones_like(x)],
    )
    return [a, b]


@_identity("shapeinv_original", "original", "pointwise", TOL_SINGLE)
def _shapeinv_original(p, x):
    p1 = p.shifted(1)
    return _shapeinv(
        lambda z: potential_V(p, z),
        lambda z: potential_V_star(p, z),
        lambda z: potential_V(p1, z),
        lambda z: potential_V_star(p1, z),
        p.kappa,
        energy(p, 1),
        x,
        p.gamma,
    )


@_identity("FP_fP", "original", "pointwise", TOL_SINGLE)
def _FP(p, x):
    p1 = p.shifted(1)
    return [
        _op_chk(F(p), _Pn(p, n), lambda z, n=n: f_n(p, n) * eval_Pn(p1, n - 1, z))(x)
        for n in range(1, N_MAX + 1)
    ]


@_identity("BP_bP", "original", "pointwise", TOL_SINGLE)
def _BP(p, x):
    p1 = p.shifted(1)
    return [
        _op_chk(B(p), _Pn(p1, n - 1), lambda z, n=n: b_n(p, n - 1) * eval_Pn(p, n, z))(x)
        for n in range(1, N_MAX + 1)
    ]


@_identity("BF_equals_Htilde", "original", "pointwise", TOL_COMPOSED)
def _BF(p, x):
    fam = p.family
    tests = [_Pn(p, m) for m in range(N_MAX + 1)]
    tests.append(lambda z: np.exp(0.37j * eta(fam, z)))
    out = []
    for f in tests:
        rhs = lambda z, f=f: apply_terms(Htilde(p), f, z)  # noqa: E731
        out.append(_composed_chk(B(p), F(p), f, rhs)(x))
    return out


@_identity("energy_factorization", "original", "scalar", TOL_SCALAR)
def _energy_factorization(p):
    return [(n, _rel(energy(p, n), f_n(p, n) * b_n(p, n - 1))) for n in range(1, N_MAX_DIFEQ + 1)]


@_identity("hn_shift", "original", "scalar", TOL_SCALAR)
def _hn_shift(p):
    p1 = p.shifted(1)
    return [
        (n, _rel(b_n(p, n - 1) * norm_hn(p, n), f_n(p, n) * norm_hn(p1, n - 1)))
        for n in range(1, N_MAX + 1)
    ]


@_identity("orthogonality", "original", "check", TOL_QUAD)
def _orthogonality(p, seed, samples):
    N = N_MAX + 1
    G = gram_matrix(p, N)
    h = np.array([norm_hn(p, n) for n in range(N)])
    diag = np.abs(G.diagonal / h - 1)
    k = int(np.argmax(diag))
    res = max(float(diag.max()), G.offdiag_ratio())
    return res, complex(k, 0), N * (N + 1) // 2


# -- deformed systems --------------------------------------------------------------


@_identity("xildiffeq", "deformed", "pointwise", TOL_SINGLE)
def _xildiffeq(d, x):
    g = d.gamma
    tw = d.xi_params(0)
    xi = eval_xi(d, x)
    V, Vs = potential_V(tw, x), potential_V_star(tw, x)
    lhs = [V * eval_xi(d, x - 1j * g), -V * xi, Vs * eval_xi(d, x + 1j * g), -Vs * xi]
    return [_chk(lhs, [energy(d.base.twisted(), d.ell) * xi])]


@_identity("xil_l_plus_d", "deformed", "pointwise", TOL_SINGLE)
def _xil_l_plus_d(d, x):
    h = 0.5j * d.gamma
    pl = d.base.shifted(d.ell)
    pre = 1j / varphi(d.family, x)
    lhs = [pre * v1(pl, x, star=True) * eval_xi(d, x - h), -pre * v1(pl, x) * eval_xi(d, x + h)]
    return [_chk(lhs, [f_hat(d.base, d.ell, 0) * eval_xi(d, x, 1)])]


@_identity("xil_l", "deformed", "pointwise", TOL_SINGLE)
def _xil_l(d, x):
    h = 0.5j * d.gamma
    pl = d.base.shifted(d.ell - 1)
    pre = -1j / varphi(d.family, x)
    lhs = [pre * v2(pl, x) * eval_xi(d, x - h, 1), -pre * v2(pl, x, star=True) * eval_xi(d, x + h, 1)]
    return [_chk(lhs, [b_hat(d.base, d.ell, 0) * eval_xi(d, x)])]


def _shapeinv_deformed(d, x, which):
    d1 = d.shifted(1)
    out = _shapeinv(
        lambda z: potential_Vell(d, z),
        lambda z: potential_Vell(d, z, star=True),
        lambda z: potential_Vell(d1, z),
        lambda z: potential_Vell(d1, z, star=True),
        d.base.kappa,
        energy_Eln(d, 1),
        x,
        d.gamma,
    )
    return [out[which]]


@_identity("shapeinvVV", "deformed", "pointwise", TOL_SINGLE)
def _shapeinvVV(d, x):
    return _shapeinv_deformed(d, x, 0)


@_identity("shapeinvV", "deformed", "pointwise", TOL_SINGLE)
def _shapeinvV(d, x):
    return _shapeinv_deformed(d, x, 1)


def _zero_count(d, n, points=2000):
    """Sign changes of P_{ell,n} on the interval (the part that can hold zeros)."""
    fam = d.family
    if fam is Family.AW:
        xs = np.linspace(0.0, math.pi, points + 2)[1:-1]
    else:
        roots = np.roots(_Pln_coeffs(d, n)[::-1]) if d.ell + n > 0 else np.zeros(0)
        R = 1.0 + 1.1 * float(np.max(np.abs(roots), initial=0.0))
        if fam is Family.CH:
            xs = np.linspace(-R, R, points)
        else:
            xs = np.linspace(0.0, math.sqrt(R), points + 1)[1:]
    re = eval_Pln(d, n, xs.astype(complex)).real
    return int(np.count_nonzero(np.sign(re[1:]) * np.sign(re[:-1]) < 0))


def _Pln_coeffs(d, n):
    return coefficients_in_eta(lambda z: eval_Pln(d, n, z), d.ell + n, d.family).coeffs


@_identity("mainres_degree", "deformed", "check", TOL_SCALAR)
def _mainres(d, seed, samples):
    """Exact degree ell+n, n zeros inside the interval, and P_{ell,0} = xi_ell(lambda + delta)."""
    x = sample_points(d.family, d.gamma, seed, samples, "mainres_degree")
    res, worst = 0.0, 0j
    p0 = eval_Pln(d, 0, x)
    xi = eval_xi(d, x, 1)
    r0 = np.abs(p0 - xi) / np.maximum(1.0, np.abs(xi))
    res, worst = float(r0.max()), complex(x[int(np.argmax(r0))])
    for n in range(N_MAX + 1):
        ok = has_exact_degree(lambda z, n=n: eval_Pln(d, n, z), d.ell + n, d.family)
        if not ok or _zero_count(d, n) != n:
            res, worst = max(res, 1.0), complex(n, 0)
    return res, worst, samples + 2 * (N_MAX + 1)


@_identity("FlPln", "deformed", "pointwise", TOL_SINGLE)
def _FlPln(d, x):
    d1 = d.shifted(1)
    return [
        _op_chk(F_ell(d), _Pln(d, n), lambda z, n=n: f_ln(d, n) * eval_Pln(d1, n - 1, z))(x)
        for n in range(1, N_MAX + 1)
    ]


@_identity("BlPln", "deformed", "pointwise", TOL_SINGLE)
def _BlPln(d, x):
    d1 = d.shifted(1)
    return [
        _op_chk(B_ell(d), _Pln(d1, n - 1), lambda z, n=n: b_ln(d, n - 1) * eval_Pln(d, n, z))(x)
        for n in range(1, N_MAX + 1)
    ]


@_identity("Htilde_ell", "deformed", "pointwise", TOL_SINGLE)
def _Htilde_ell(d, x):
    return [
        _op_chk(Htilde_ell(d), _Pln(d, n), lambda z, n=n: energy_Eln(d, n) * eval_Pln(d, n, z))(x)
        for n in range(N_MAX + 1)
    ]


def _f0b0(d):
    return f_hat(d.base, d.ell, 0) * b_hat(d.base, d.ell, 0)


@_identity("Hl_plus_factorization", "deformed", "pointwise", TOL_COMPOSED)
def _Hl_plus(d, x):
    pp = d.original_partner
    c = _f0b0(d)
    out = []
    for m in range(N_MAX + 1):
        f = _Pn(pp, m)
        rhs = lambda z, f=f: apply_terms(Htilde(pp), f, z) + [c * f(z)]  # noqa: E731
        out.append(_composed_chk(Bhat_ell(d), Fhat_ell(d), f, rhs)(x))
    return out


@_identity("Hl_minus_factorization", "deformed", "pointwise", TOL_COMPOSED)
def _Hl_minus(d, x):
    c = _f0b0(d)
    out = []
    for m in range(N_MAX + 1):
        f = _Pln(d, m)
        rhs = lambda z, f=f: apply_terms(Htilde_ell(d), f, z) + [c * f(z)]  # noqa: E731
        out.append(_composed_chk(Fhat_ell(d), Bhat_ell(d), f, rhs)(x))
    return out


@_identity("FhatPn", "deformed", "pointwise", TOL_SINGLE)
def _FhatPn(d, x):
    pp = d.original_partner
    return [
        _op_chk(Fhat_ell(d), _Pn(pp, n), lambda z, n=n: f_hat(d.base, d.ell, n) * eval_Pln(d, n, z))(x)
        for n in range(N_MAX + 1)
    ]


@_identity("BhatPln", "deformed", "pointwise", TOL_SINGLE)
def _BhatPln(d, x):
    pp = d.original_partner
    return [
        _op_chk(Bhat_ell(d), _Pln(d, n), lambda z, n=n: b_hat(d.base, d.ell, n) * eval_Pn(pp, n, z))(x)
        for n in range(N_MAX + 1)
    ]


@_identity("FlhF", "deformed", "pointwise", TOL_COMPOSED)
def _FlhF(d, x):
    d1 = d.shifted(1)
    pp = d.original_partner
    s1 = math.sqrt(kappa_hat(d1.base, d.ell))
    s0 = math.sqrt(kappa_hat(d.base, d.ell))
    out = []
    for m in range(N_MAX + 1):
        f = _Pn(pp, m)
        lhs = [s1 * t for t in _expanded_terms(Fhat_ell(d1), F(pp), f, x)]
        rhs = [s0 * t for t in _expanded_terms(F_ell(d), Fhat_ell(d), f, x)]
        out.append(_chk(lhs, rhs))
    return out


@_identity("FlhB", "deformed", "pointwise", TOL_COMPOSED)
def _FlhB(d, x):
    d1 = d.shifted(1)
    pp = d.original_partner
    s1 = math.sqrt(kappa_hat(d1.base, d.ell))
    s0 = math.sqrt(kappa_hat(d.base, d.ell))
    out = []
    for m in range(N_MAX + 1):
        f = _Pn(d1.original_partner, m)
        lhs = [s0 * t for t in _expanded_terms(Fhat_ell(d), B(pp), f, x)]
        rhs = [s1 * t for t in _expanded_terms(B_ell(d), Fhat_ell(d1), f, x)]
        out.append(_chk(lhs, rhs))
    return out


@_identity("kappa_ratio_constants", "deformed", "scalar", TOL_SCALAR)
def _kappa_ratio(d):
    lam, ell = d.base, d.ell
    lam1 = lam.shifted(1)
    pp = d.original_partner
    k0, k1 = kappa_hat(lam, ell), kappa_hat(lam1, ell)
    out = []
    for n in range(1, N_MAX + 1):
        fr = math.sqrt(k1 / k0) * f_n(pp, n) * f_hat(lam1, ell, n - 1) / f_hat(lam, ell, n)
        br = math.sqrt(k0 / k1) * b_n(pp, n - 1) * f_hat(lam, ell, n) / f_hat(lam1, ell, n - 1)
        out.append((n, max(_rel(fr, f_ln(d, n)), _rel(br, b_ln(d, n - 1)))))
    return out


@_identity("Eln_pm", "deformed", "scalar", TOL_SCALAR)
def _Eln_pm(d):
    lam, ell = d.base, d.ell
    c = _f0b0(d)
    out = []
    for n in range(N_MAX + 1):
        E = energy_Eln(d, n)
        fb = f_hat(lam, ell, n) * b_hat(lam, ell, n) - c
        Ep = energy(d.original_partner, n)
        out.append((n, max(_rel(E, fb), _rel(E, Ep), _rel(E, f_ln(d, n) * b_ln(d, n - 1)) if n else 0.0)))
    return out


@_identity("hln2", "deformed", "scalar", TOL_SCALAR)
def _hln2(d):
    out = []
    for n in range(N_MAX + 1):
        a, b, c = norm_hln(d, n), norm_hln_via_original(d, n), norm_hln_via_shifted(d, n)
        out.append((n, max(_rel(a, b), _rel(a, c))))
    return out


@_identity("zero_mode_chi", "deformed", "pointwise", TOL_SINGLE)
def _zero_chi(d, x):
    h = 0.5j * d.gamma
    tw = d.xi_params(0)

    def log_chi2(z):
        return 2 * np.log(eval_xi(d, z)) + log_weight_analytic(tw, z)

    lhs = np.log(intertwine_potential_Vhat(d, x - h, star=True)) + log_chi2(x - h)
    rhs = np.log(intertwine_potential_Vhat(d, x + h)) + log_chi2(x + h)
    return [_ratio_chk(lhs, rhs)]


@_identity("zero_mode_rho", "deformed", "pointwise", TOL_SINGLE)
def _zero_rho(d, x):
    """A^dagger rho = 0 squared, rho^2 = 1 / (xi(x-h) xi(x+h) V*_t(x-h) phi_0(x-h; t)^2).

    The ground-state factor sits at x - i gamma/2; evaluated at x the
    expression does not solve the zero-mode equation (see the ledger).
    """
    h = 0.5j * d.gamma
    tw = d.xi_params(0)

    def log_rho2(z):
        return -(
            log_weight_analytic(tw, z - h)
            + np.log(eval_xi(d, z - h))
            + np.log(eval_xi(d, z + h))
            + np.log(potential_V_star(tw, z - h))
        )

    lhs = np.log(intertwine_potential_Vhat(d, x)) + log_rho2(x - h)
    rhs = np.log(intertwine_potential_Vhat(d, x, star=True)) + log_rho2(x + h)
    return [_ratio_chk(lhs, rhs)]


@_identity("rodrigues_agree", "deformed", "pointwise", TOL_COMPOSED)
def _rodrigues(d, x):
    out = []
    for n in range(N_RODRIGUES + 1):
        P = eval_Pln(d, n, x)
        for route in ("deformed_B", "original_B_then_Fhat"):
            out.append(_chk([rodrigues_Pln(d, n, x, route)], [P]))
    return out


GENFUN_T = (0.1, -0.1, 0.1j)
GENFUN_TERMS = 12
GENFUN_TERMS_CLOSED = 24


@_identity("genfun_agree", "deformed", "check", 1e-8)
def _genfun(d, seed, samples):
    """Both sides truncated at 12 terms, then the closed-form G against 24 terms of the deformed series."""
    x = sample_points(d.family, d.gamma, seed, samples, "genfun_agree")
    worst, res = 0j, 0.0
    for t in GENFUN_T:
        short = generating_function_Pln(d, t, x, terms=GENFUN_TERMS, cauchy_tol=1e-3)
        full = generating_function_Pln(d, t, x, terms=GENFUN_TERMS_CLOSED, cauchy_tol=1e-9)
        for lhs, rhs in ((short.lhs, short.rhs_truncated), (full.lhs, full.rhs)):
            den = np.maximum(np.abs(lhs), np.abs(rhs))
            r = np.abs(lhs - rhs) / np.where(den > 0, den, 1.0)
            k = int(np.argmax(r))
            if r[k] > res:
                res, worst = float(r[k]), complex(x[k])
    return res, worst, 2 * len(GENFUN_T) * samples


@_identity("orthogonality_deformed", "deformed", "check", TOL_QUAD)
def _orthogonality_deformed(d, seed, samples):
    N = N_MAX
    G = gram_matrix(d, N)
    h = np.array([norm_hln(d, n) for n in range(N)])
    # end-to-end chain: f^_n f^_m (Gram)_nm = f^_n b^_n h_n(lambda') delta_nm
    fh = np.array([f_hat(d.base, d.ell, n) for n in range(N)])
    chain = np.array([f_hat(d.base, d.ell, n) * b_hat(d.base, d.ell, n) for n in range(N)])
    chain = chain * np.array([norm_hn(d.original_partner, n) for n in range(N)])
    diag = np.abs(G.diagonal / h - 1)
    diag2 = np.abs(fh * fh * G.diagonal / chain - 1)
    res = max(float(diag.max()), float(diag2.max()), G.offdiag_ratio())
    k = int(np.argmax(np.maximum(diag, diag2)))
    return res, complex(k, 0), N * (N + 1) // 2


@_identity("contour_shift_admissible", "deformed", "check", 0.0)
def _contour(d, seed, samples):
    rep = contour_shift_admissibility(d)
    worst = rep.genuine_poles[0] if rep.genuine_poles else 0j
    return float(len(rep.genuine_poles)), complex(worst), rep.candidate_poles


@_identity("zero_free", "deformed", "check", 0.0)
def _zero_free(d, seed, samples):
    cert = check_zero_free(d)
    res = abs(cert.contour_winding) + (0.0 if cert.min_abs > 0 else 1.0)
    return float(res), complex(cert.min_abs, 0), cert.grid_density


# -- standalone identities -----------------------------------------------------------


HYP_DRAWS = 50


def _disc(rng, size=None):
    r = np.sqrt(rng.uniform(0, 1, size))
    t = rng.uniform(0, 2 * math.pi, size)
    return r * np.exp(1j * t)


def _safe(dens, n, q=None, margin=0.1):
    for b in dens:
        for k in range(n + 1):
            v = 1 - b * q**k if q is not None else b + k
            if abs(v) < margin:
                return False
    return True


def _hyp_draws(ident, seed, build):
    rng = np.random.default_rng([seed, zlib.crc32(ident.encode())])
    res, worst, done = 0.0, 0j, 0
    while done < HYP_DRAWS:
        n = int(rng.integers(0, 7))
        al = _disc(rng, 5)
        x = complex(rng.uniform(0.2, 2.8), rng.uniform(-0.3, 0.3))
        out = build(n, al, x)
        if out is None:
            continue
        diff, scale = out
        r = abs(diff) / max(1.0, scale)
        if not math.isfinite(r):
            continue
        done += 1
        if r > res:
            res, worst = r, x
    return res, worst, HYP_DRAWS


def _abs_sum(num, den, n, z=1.0, q=None):
    """sum_k |term_k| of a terminating (basic) hypergeometric series."""
    t, total = 1.0 + 0j, 1.0
    for k in range(n):
        if q is None:
            r = z / (k + 1)
            for a in num:
                r *= a + k
            for b in den:
                r /= b + k
        else:
            r = z / (1 - q ** (k + 1))
            for a in num:
                r *= 1 - a * q**k
            for b in den:
                r /= 1 - b * q**k
        t *= r
        total += abs(t)
    return total


def _series_terms(pre, num, den, n, q=None):
    """(value, magnitude) of pre * series, the magnitude summing |pre * term_k|."""
    if q is None:
        val = hyp_pFq_terminating(num, den, 1.0, n)
        mag = _abs_sum(num, den, n)
    else:
        val = hyp_qphi_terminating(num, den, q, q, n)
        mag = _abs_sum(num, den, n, q, q)
    return pre * complex(val), abs(pre) * mag


def _combine(*parts):
    """parts are (value, magnitude, sign): residual of sum(sign * value) and the largest magnitude."""
    diff = sum(s * v for v, _, s in parts)
    return abs(diff), max(m for _, m, _ in parts)


@_identity("hyp_3F2propB", "standalone", "check", 1e-11)
def _hyp3F2(_ctx, seed, samples):
    def build(n, al, x):
        ap, a1, a2, a3 = al[:4]
        if not _safe([a3, a1 + a2, a1 + a2 + 1], n):
            return None
        t1 = _series_terms(a1 + 1j * x, [-n, ap, a1 + 1 + 1j * x], [a3, a1 + a2 + 1], n)
        t2 = _series_terms(a2 - 1j * x, [-n, ap, a1 + 1j * x], [a3, a1 + a2 + 1], n)
        t3 = _series_terms(a1 + a2, [-n, ap, a1 + 1j * x], [a3, a1 + a2], n)
        return _combine((*t1, 1), (*t2, 1), (*t3, -1))

    return _hyp_draws("hyp_3F2propB", seed, build)


@_identity("hyp_4F3propB", "standalone", "check", 1e-11)
def _hyp4F3(_ctx, seed, samples):
    def build(n, al, x):
        ap, a1, a2, a3, a4 = al
        dens = [a1 + a2 + 1, a1 + a3, a1 + a4]
        if not _safe(dens + [a1 + a2], n):
            return None
        pre = -1j / (2 * x)
        t1 = _series_terms(pre * (a1 + 1j * x) * (a2 + 1j * x), [-n, ap, a1 + 1 + 1j * x, a1 - 1j * x], dens, n)
        t2 = _series_terms(pre * (a1 - 1j * x) * (a2 - 1j * x), [-n, ap, a1 + 1j * x, a1 + 1 - 1j * x], dens, n)
        t3 = _series_terms(a1 + a2, [-n, ap, a1 + 1j * x, a1 - 1j * x], [a1 + a2, a1 + a3, a1 + a4], n)
        return _combine((*t1, 1), (*t2, -1), (*t3, -1))

    return _hyp_draws("hyp_4F3propB", seed, build)


HYP_Q = 0.5


@_identity("hyp_4phi3propB", "standalone", "check", 1e-11)
def _hyp4phi3(_ctx, seed, samples):
    q = HYP_Q

    def build(n, al, x):
        ap, a1, a2, a3, a4 = al
        dens = [a1 * a2 * q, a1 * a3, a1 * a4]
        if not _safe(dens + [a1 * a2], n, q):
            return None
        e = complex(np.exp(1j * x))
        top = q**-n
        pre = -1j / (2 * complex(np.sin(x)))
        t1 = _series_terms(pre * (1 - a1 * e) * (1 - a2 * e) / e, [top, ap, a1 * q * e, a1 / e], dens, n, q)
        t2 = _series_terms(pre * e * (1 - a1 / e) * (1 - a2 / e), [top, ap, a1 * e, a1 * q / e], dens, n, q)
        t3 = _series_terms(-(1 - a1 * a2), [top, ap, a1 * e, a1 / e], [a1 * a2, a1 * a3, a1 * a4], n, q)
        return _combine((*t1, 1), (*t2, -1), (*t3, -1))

    return _hyp_draws("hyp_4phi3propB", seed, build)


# -- W -> cH limit -------------------------------------------------------------------


@dataclass(frozen=True)
class LimitReport:
    n: int
    x: float
    L_values: tuple
    errors: tuple
    target: complex
    orders: tuple  # error(L_{k+1}) / error(L_k)
    stagnated: bool


def wilson_limit_params(cH_params: ParamSet, L):
    a1, a2 = cH_params.a
    return ParamSet(Family.W, (a1 - 1j * L, a1.conjugate() + 1j * L, a2 - 1j * L, a2.conjugate() + 1j * L))


def run_limit_W_to_cH(cH_params: ParamSet, n: int, x: float, L_values) -> LimitReport:
    """Distance of (-2L)^{-n} W_n((x+L)^2) from n! p_n(x) for each L, and successive error ratios."""
    if cH_params.family is not Family.CH:
        raise InvalidParameters("limit needs cH parameters")
    L_values = tuple(float(v) for v in L_values)
    if len(L_values) < 2 or any(b <= a for a, b in zip(L_values, L_values[1:])):
        raise ValueError("L_values must be increasing with at least two entries")
    target = complex(math.factorial(n) * eval_Pn(cH_params, n, complex(x)))
    errs = []
    for L in L_values:
        w = wilson_limit_params(cH_params, L)
        v = (-2 * L) ** (-n) * eval_Pn(w, n, complex(x + L), method="series")
        errs.append(abs(complex(v) - target))
    orders = tuple(b / a if a > 0 else math.nan for a, b in zip(errs, errs[1:]))
    floor = 1e-12 * max(1.0, abs(target))
    stagnated = any(b > 0.5 * a and b < floor * 1e3 for a, b in zip(errs, errs[1:]))
    return LimitReport(n, float(x), L_values, tuple(errs), target, orders, stagnated)


LIMIT_L = (1e3, 1e4)
LIMIT_BAND = (0.05, 0.2)


@_identity("limit_W_to_cH", "original", "check", math.log10(2.0), families=("cH",))
def _limit(p, seed, samples):
    """Residual |log10(error ratio) + 1|: first-order decay puts the ratio near 0.1."""
    rng = np.random.default_rng([seed, zlib.crc32(b"limit_W_to_cH")])
    xs = rng.uniform(-3.0, 3.0, 3)
    res, worst, count = 0.0, 0j, 0
    for n in range(4):
        for x in xs:
            rep = run_limit_W_to_cH(p, n, x, LIMIT_L)
            count += 1
            if n == 0:
                res = max(res, rep.errors[-1])
                continue
            r = rep.orders[-1]
            dev = abs(math.log10(r) + 1) if r > 0 and not rep.stagnated else math.inf
            if dev > res:
                res, worst = dev, complex(x, n)
    return res, worst, count


# -- runner --------------------------------------------------------------------------


def _context_label(ctx):
    return "random" if ctx is None else ctx.fingerprint


def _pointwise(spec, ctx, seed, samples):
    fam = _family(ctx)
    for attempt in range(6):
        x = sample_points(fam, ctx.gamma, seed, samples, spec.name, attempt)
        try:
            with np.errstate(all="ignore"):
                checks = spec.fn(ctx, x)
        except (PoleError, ZeroDivisionError):
            continue
        res = np.zeros(samples)
        ok = True
        for diff, scale in checks:
            r = np.abs(diff) / np.maximum(1.0, scale)
            if not np.all(np.isfinite(r)):
                ok = False
                break
            res = np.maximum(res, r)
        if ok:
            k = int(np.argmax(res))
            return float(res[k]), complex(x[k]), samples
    raise PoleAtSample(f"{spec.name}: pole at sample points after 5 resamples")


def _scalar(spec, ctx):
    vals = spec.fn(ctx)
    n, r = max(vals, key=lambda t: t[1])
    if not math.isfinite(r):
        r = math.inf
    return float(r), complex(n, 0), len(vals)


def run_identity(ident, instance=None, seed=0, samples=20, tol=None) -> IdentityReport:
    """Run one registered identity on one instance.

    ``instance`` is a :class:`ParamSet` for original-layer ids, a certified
    :class:`DeformedSystem` for deformed ids and ``None`` for standalone ones.
    """
    if ident not in REGISTRY:
        raise KeyError(f"unknown identity {ident!r}")
    spec = REGISTRY[ident]
    if spec.layer == "deformed":
        if not isinstance(instance, DeformedSystem):
            raise TypeError(f"{ident} needs a DeformedSystem")
        instance.require_certificate()
    elif spec.layer == "original":
        if not isinstance(instance, ParamSet):
            raise TypeError(f"{ident} needs a ParamSet")
    if spec.layer != "standalone" and _family(instance).value not in spec.families:
        raise InvalidParameters(f"{ident} does not apply to {_family(instance).value}")
    tol = spec.tolerance if tol is None else tol
    if spec.kind == "pointwise":
        res, worst, count = _pointwise(spec, instance, seed, samples)
    elif spec.kind == "scalar":
        res, worst, count = _scalar(spec, instance)
    else:
        with np.errstate(all="ignore"):
            res, worst, count = spec.fn(instance, seed, samples)
    res = float(res)
    return IdentityReport(ident, _context_label(instance), count, res, tol, bool(res <= tol), complex(worst))


def _error_report(ident, label, tol, exc, name=None):
    return IdentityReport(ident, label, 0, math.inf, tol, False, 0j, f"{type(exc).__name__}: {exc}", name)


@dataclass(frozen=True)
class Task:
    ident: str
    instance: str | None
    ell: int | None


def plan(config: SuiteConfig, only=None):
    ids = set(only or config.ids or REGISTRY)
    unknown = ids - set(REGISTRY)
    if unknown:
        raise KeyError(f"unknown identity ids: {sorted(unknown)}")
    tasks = []
    for ident in sorted(ids):
        spec = REGISTRY[ident]
        if spec.layer == "standalone":
            if config.instances:
                tasks.append(Task(ident, None, None))
            continue
        for inst in config.instances:
            if inst.params.family.value not in spec.families:
                continue
            if spec.layer == "original":
                tasks.append(Task(ident, inst.name, None))
            else:
                tasks.extend(Task(ident, inst.name, ell) for ell in inst.ells)
    return tasks


def _fault_contexts(config: SuiteConfig):
    stack = ExitStack()
    for f in config.faults:
        match = config.instance(f.instance).params if f.instance else None
        stack.enter_context(faults.inject(f.quantity, f.rel, f.n, match))
    return stack


def execute(task: Task, config: SuiteConfig) -> IdentityReport:
    spec = REGISTRY[task.ident]
    tol = config.tolerances.get(task.ident, spec.tolerance)
    label = task.instance or "random"
    ctx = None
    with _fault_contexts(config):
        try:
            if task.instance is not None:
                p = config.instance(task.instance).params
                ctx = p if task.ell is None else DeformedSystem(p, task.ell).certified()
                label = ctx.fingerprint
            rep = run_identity(task.ident, ctx, config.seed, config.samples, tol)
        except Exception as e:  # noqa: BLE001 - reported, never silently dropped
            rep = _error_report(task.ident, label, tol, e)
    return IdentityReport(
        rep.id,
        rep.instance,
        rep.samples,
        rep.max_scaled_residual,
        rep.tolerance,
        rep.passed,
        rep.worst_point,
        rep.error,
        task.instance,
    )


def _execute_star(args):
    return execute(*args)


def run_full_suite(config: SuiteConfig, only=None, jobs=1) -> list:
    """Every applicable (id, instance, ell) combination; sorted by id then instance fingerprint."""
    tasks = plan(config, only)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(_execute_star, [(t, config) for t in tasks], chunksize=4))
    else:
        reports = [execute(t, config) for t in tasks]
    return sorted(reports, key=lambda r: (r.id, r.instance))


__all__ = [
    "REGISTRY",
    "IdentityReport",
    "IdentitySpec",
    "LimitReport",
    "PoleAtSample",
    "Task",
    "SCHEMA_VERSION",
    "identity_ids",
    "sample_points",
    "run_identity",
    "run_limit_W_to_cH",
    "wilson_limit_params",
    "run_full_suite",
    "plan",
    "execute",
]
