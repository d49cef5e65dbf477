"""Difference operators acting on analytic functions by imaginary shifts.

The shift generator acts as exp(gamma p / 2) f(x) = f(x - i gamma / 2).
Only the similarity-transformed (polynomial) forms are represented:
F, B, H~ of the original system, F_ell, B_ell, H~_ell of the deformed
system and the intertwining pair F^_ell, B^_ell. No square roots of
potentials are ever taken.

Each operator evaluates to a list of summands whose sum is the result, so
callers can measure cancellation (see :func:`apply_terms`).
"""

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources

import numpy as np

from .deformation import (
    DeformedSystem,
    eval_Pln,
    eval_xi,
    f_hat,
)
from .families import (
    AnalyticMap,
    ParamSet,
    Pn_map,
    b_n,
    eval_Pn,
    potential_V,
    potential_V_star,
    v1,
    v2,
    varphi,
)
from .hyperseries import SeriesError, hyp_series, pochhammer, q_pochhammer


class Kind(str, Enum):
    F = "F"
    B = "B"
    F_ELL = "F_ell"
    B_ELL = "B_ell"
    FHAT_ELL = "Fhat_ell"
    BHAT_ELL = "Bhat_ell"
    HTILDE = "Htilde"
    HTILDE_ELL = "Htilde_ell"


_DEFORMED_KINDS = {Kind.F_ELL, Kind.B_ELL, Kind.FHAT_ELL, Kind.BHAT_ELL, Kind.HTILDE_ELL}


@dataclass(frozen=True)
class DiffOperator:
    kind: Kind
    context: object  # ParamSet or DeformedSystem

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        want = DeformedSystem if kind in _DEFORMED_KINDS else ParamSet
        if not isinstance(self.context, want):
            raise TypeError(f"{kind.value} needs a {want.__name__} context")

    def __call__(self, f) -> AnalyticMap:
        return apply(self, f)

    def __matmul__(self, other):
        return compose(self, other)

    @property
    def descriptor(self):
        return f"{self.kind.value}[{self.context.fingerprint}]"


def _ctx_family(ctx):
    return ctx.family if isinstance(ctx, ParamSet) else ctx.base.family


def _terms(op: DiffOperator, f, x):
    ctx = op.context
    fam = _ctx_family(ctx)
    g = ctx.gamma
    h = 0.5j * g
    phi = varphi(fam, x)
    k = op.kind
    if k is Kind.F:
        return [1j * f(x - h) / phi, -1j * f(x + h) / phi]
    if k is Kind.B:
        return [
            -1j * potential_V(ctx, x) * varphi(fam, x - h) * f(x - h),
            1j * potential_V_star(ctx, x) * varphi(fam, x + h) * f(x + h),
        ]
    if k is Kind.HTILDE:
        V, Vs, f0 = potential_V(ctx, x), potential_V_star(ctx, x), f(x)
        return [V * f(x - 2 * h), -V * f0, Vs * f(x + 2 * h), -Vs * f0]
    d = ctx
    if k is Kind.F_ELL:
        pre = 1j / (phi * eval_xi(d, x))
        return [pre * eval_xi(d, x + h, 1) * f(x - h), -pre * eval_xi(d, x - h, 1) * f(x + h)]
    if k is Kind.B_ELL:
        lam_l = d.base.shifted(d.ell)
        pre = -1j / eval_xi(d, x, 1)
        return [
            pre * potential_V(lam_l, x) * eval_xi(d, x + h) * varphi(fam, x - h) * f(x - h),
            -pre * potential_V_star(lam_l, x) * eval_xi(d, x - h) * varphi(fam, x + h) * f(x + h),
        ]
    if k is Kind.HTILDE_ELL:
        lam_l = d.base.shifted(d.ell)
        xi_up, xi_dn = eval_xi(d, x + h), eval_xi(d, x - h)
        xi1 = eval_xi(d, x, 1)
        A = potential_V(lam_l, x) * xi_up / xi_dn
        As = potential_V_star(lam_l, x) * xi_dn / xi_up
        f0 = f(x)
        return [
            A * f(x - 2 * h),
            -A * eval_xi(d, x - 2 * h, 1) / xi1 * f0,
            As * f(x + 2 * h),
            -As * eval_xi(d, x + 2 * h, 1) / xi1 * f0,
        ]
    if k is Kind.FHAT_ELL:
        lam_l = d.base.shifted(d.ell)
        pre = -1j / phi
        return [
            pre * v1(lam_l, x) * eval_xi(d, x + h) * f(x - h),
            -pre * v1(lam_l, x, star=True) * eval_xi(d, x - h) * f(x + h),
        ]
    if k is Kind.BHAT_ELL:
        lam = d.base.shifted(d.ell - 1)
        pre = -1j / (phi * eval_xi(d, x))
        return [pre * v2(lam, x) * f(x - h), -pre * v2(lam, x, star=True) * f(x + h)]
    raise AssertionError(k)


def _as_callable(f):
    if isinstance(f, AnalyticMap) or callable(f):
        return lambda z: np.asarray(f(np.asarray(z, dtype=complex)), dtype=complex)
    raise TypeError("operand must be callable")


def apply_terms(op: DiffOperator, f, x):
    """The summands of (op f)(x), as a list of arrays."""
    x = np.asarray(x, dtype=complex)
    return _terms(op, _as_callable(f), x)


def apply(op: DiffOperator, f) -> AnalyticMap:
    fc = _as_callable(f)

    def ev(x):
        t = _terms(op, fc, x)
        return sum(t[1:], t[0])

    desc = getattr(f, "descriptor", "f")
    return AnalyticMap(ev, f"{op.descriptor}({desc})")


@dataclass(frozen=True)
class Composed:
    """Operator product ops[0] ops[1] ... ops[-1]; the last factor acts first."""

    ops: tuple

    def __call__(self, f):
        for op in reversed(self.ops):
            f = apply(op, f) if isinstance(op, DiffOperator) else op(f)
        return f

    def __matmul__(self, other):
        return compose(self, other)


def compose(*ops):
    flat = []
    for op in ops:
        flat.extend(op.ops if isinstance(op, Composed) else (op,))
    return Composed(tuple(flat))


def scaled(op_or_map, c):
    """c times an operator (as a callable on maps)."""

    def run(f):
        g = op_or_map(f)
        return AnalyticMap(lambda x: c * g(x), f"{c}*{getattr(g, 'descriptor', '')}")

    return run


# convenience constructors
def F(p):
    return DiffOperator(Kind.F, p)


def B(p):
    return DiffOperator(Kind.B, p)


def Htilde(p):
    return DiffOperator(Kind.HTILDE, p)


def F_ell(d):
    return DiffOperator(Kind.F_ELL, d)


def B_ell(d):
    return DiffOperator(Kind.B_ELL, d)


def Htilde_ell(d):
    return DiffOperator(Kind.HTILDE_ELL, d)


def Fhat_ell(d):
    return DiffOperator(Kind.FHAT_ELL, d)


def Bhat_ell(d):
    return DiffOperator(Kind.BHAT_ELL, d)


def apply_Htilde(layer, f) -> AnalyticMap:
    """H~ (original layer) or H~_ell (deformed layer) applied to f."""
    if isinstance(layer, DeformedSystem):
        return apply(Htilde_ell(layer), f)
    return apply(Htilde(layer), f)


def Pln_map(d, n):
    return AnalyticMap(lambda x: eval_Pln(d, n, x), f"P_{d.ell},{n}[{d.base.fingerprint}]")


def const_map(c=1.0):
    return AnalyticMap(lambda x: np.full(np.shape(x), c, dtype=complex), str(c))


# -- Rodrigues formulas -----------------------------------------------------------


def rodrigues_Pln(d: DeformedSystem, n: int, x, route="deformed_B"):
    """P_{ell,n} by repeated backward shifts.

    ``deformed_B``: prod_{k=0}^{n-1} B_ell(lambda + k delta) / b_{n-1-k}(lambda + (ell+k) delta)
    applied to xi_ell(eta; lambda + (n+1) delta).
    ``original_B_then_Fhat``: F^_ell(lambda)/f^_{ell,n} after
    prod_{k} B(lambda + (ell+k) delta + delta~) / b_{n-1-k}(lambda + (ell+k) delta) applied to 1.
    The k = n-1 factor acts first in both products.
    """
    lam = d.base
    if route == "deformed_B":
        g = AnalyticMap(lambda z: eval_xi(d, z, n + 1), "xi")
        for k in reversed(range(n)):
            c = 1.0 / b_n(lam.shifted(d.ell + k), n - 1 - k)
            g = scaled(B_ell(d.shifted(k)), c)(g)
    elif route == "original_B_then_Fhat":
        g = const_map(1.0)
        for k in reversed(range(n)):
            c = 1.0 / b_n(lam.shifted(d.ell + k), n - 1 - k)
            g = scaled(B(lam.shifted(d.ell + k).tilde_shifted(1)), c)(g)
        g = scaled(Fhat_ell(d), 1.0 / f_hat(lam, d.ell, n))(g)
    else:
        raise ValueError(f"unknown route {route!r}")
    out = g(np.asarray(x, dtype=complex))
    return out[()] if np.ndim(out) == 0 else out


# -- generating functions ---------------------------------------------------------


def load_genfun_presets():
    with resources.files("xaskey").joinpath("data/genfun_presets.json").open() as fh:
        return json.load(fh)


def _preset_for(family, name=None):
    presets = [p for p in load_genfun_presets()["presets"] if p["family"] == family.value]
    if name is not None:
        presets = [p for p in presets if p["name"] == name]
    if not presets:
        raise KeyError(f"no generating-function preset {name!r} for {family.value}")
    return presets[0]


def genfun_alpha(p: ParamSet, n: int, preset=None):
    """The coefficient alpha_n(lambda) of a preset generating function."""
    kind = _preset_for(p.family, preset)["kind"]
    a = p.a
    if kind == "ch_1f1_1f1":
        v = 1.0 / (pochhammer(a[0] + a[0].conjugate(), n) * pochhammer(a[1] + a[1].conjugate(), n))
    elif kind == "w_2f1_2f1":
        v = 1.0 / (pochhammer(a[0] + a[1], n) * pochhammer(a[2] + a[3], n) * pochhammer(1.0, n))
    elif kind == "aw_2phi1_2phi1":
        q = p.q
        v = 1.0 / (
            q_pochhammer(a[0] * a[1], q, n) * q_pochhammer(a[2] * a[3], q, n) * q_pochhammer(q, q, n)
        )
    else:
        raise KeyError(kind)
    return complex(v)


def genfun_closed(p: ParamSet, t, x, preset=None):
    """Closed form G(t, x; lambda) = sum_n alpha_n P_n(eta(x)) t^n of a preset."""
    kind = _preset_for(p.family, preset)["kind"]
    a = p.a
    x = np.asarray(x, dtype=complex)
    if kind == "ch_1f1_1f1":
        c = [v.conjugate() for v in a]
        g1 = hyp_series([a[0] + 1j * x], [a[0] + c[0]], -1j * t)
        g2 = hyp_series([c[1] - 1j * x], [a[1] + c[1]], 1j * t)
    elif kind == "w_2f1_2f1":
        g1 = hyp_series([a[0] + 1j * x, a[1] + 1j * x], [a[0] + a[1]], t)
        g2 = hyp_series([a[2] - 1j * x, a[3] - 1j * x], [a[2] + a[3]], t)
    elif kind == "aw_2phi1_2phi1":
        q = p.q
        e = np.exp(1j * x)
        g1 = _qseries_varz([a[0] * e, a[1] * e], [a[0] * a[1]], q, t / e)
        g2 = _qseries_varz([a[2] / e, a[3] / e], [a[2] * a[3]], q, t * e)
    else:
        raise KeyError(kind)
    out = g1 * g2
    return out[()] if np.ndim(out) == 0 else out


def _qseries_varz(num, den, q, z):
    return hyp_series(num, den, np.asarray(z, dtype=complex), q=q)


def genfun_truncated(p: ParamSet, t, x, terms, preset=None):
    x = np.asarray(x, dtype=complex)
    out = np.zeros(x.shape, dtype=complex)
    for n in range(terms):
        out = out + genfun_alpha(p, n, preset) * eval_Pn(p, n, x) * t**n
    return out


@dataclass(frozen=True)
class GenFunComparison:
    lhs: np.ndarray  # truncated sum of alpha_n(lambda') f^_{ell,n} P_{ell,n} t^n
    rhs: np.ndarray  # transform applied to the closed-form G
    rhs_truncated: np.ndarray  # transform applied to the truncated G
    rel_diff: float  # max |lhs - rhs| / max(|lhs|, |rhs|)
    rel_diff_truncated: float  # the same against rhs_truncated


def generating_function_Pln(d: DeformedSystem, t, x, terms=12, preset=None, cauchy_tol=1e-6):
    """Both sides of the generating-function transform for P_{ell,n}.

    The left side is truncated after ``terms`` terms; the right side applies
    the intertwining operator F^_ell to G(t, .; lambda + ell delta + delta~),
    once in closed form and once truncated at the same depth. Raises
    :class:`SeriesError` when the last retained term is not below
    ``cauchy_tol`` relative to the partial sum.
    """
    x = np.asarray(x, dtype=complex)
    partner = d.original_partner
    lhs = np.zeros(x.shape, dtype=complex)
    last = None
    for n in range(terms):
        term = genfun_alpha(partner, n, preset) * f_hat(d.base, d.ell, n) * eval_Pln(d, n, x) * t**n
        lhs = lhs + term
        last = term
    if terms > 1 and np.any(np.abs(last) > cauchy_tol * np.maximum(np.abs(lhs), 1e-300)):
        raise SeriesError("generating-function partial sums fail the Cauchy test")
    Fh = Fhat_ell(d)
    rhs = apply(Fh, lambda z: genfun_closed(partner, t, z, preset))(x)
    rhs_t = apply(Fh, lambda z: genfun_truncated(partner, t, z, terms, preset))(x)

    def rel(a, b):
        den = np.maximum(np.abs(a), np.abs(b))
        return float(np.max(np.abs(a - b) / np.where(den > 0, den, 1.0)))

    return GenFunComparison(lhs, rhs, rhs_t, rel(lhs, rhs), rel(lhs, rhs_t))


__all__ = [
    "Kind",
    "DiffOperator",
    "Composed",
    "apply",
    "apply_terms",
    "compose",
    "apply_Htilde",
    "F",
    "B",
    "Htilde",
    "F_ell",
    "B_ell",
    "Htilde_ell",
    "Fhat_ell",
    "Bhat_ell",
    "Pn_map",
    "Pln_map",
    "const_map",
    "rodrigues_Pln",
    "genfun_alpha",
    "genfun_closed",
    "genfun_truncated",
    "generating_function_Pln",
    "GenFunComparison",
    "load_genfun_presets",
]
