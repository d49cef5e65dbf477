"""Exceptional (X_ell) deformations of the cH, W and AW systems.

A :class:`DeformedSystem` pairs an original parameter set lambda with the
degree ``ell`` of the deforming polynomial

    xi_ell(eta; lambda) = P_ell(eta; t(lambda + (ell-1) delta)),

where ``t`` is the twist. Everything here is evaluated from closed forms
through :func:`xaskey.families.eval_Pn`; nothing is pre-expanded except
where coefficients are explicitly requested.
"""

import dataclasses
import functools
import math
from dataclasses import dataclass

import numpy as np

from . import faults
from .families import (
    Family,
    InvalidParameters,
    ParamSet,
    coefficients_in_eta,
    energy,
    eta,
    eval_Pn,
    f_n,
    b_n,
    groundstate_weight,
    norm_hn,
    potential_V,
    potential_V_star,
    v1,
    varphi,
)
from .hyperseries import PoleError


class MissingCertificate(RuntimeError):
    """A zero-free certificate is required but absent or invalid."""


class Inconclusive(ArithmeticError):
    """The deforming polynomial comes too close to zero on the test contour."""


@dataclass(frozen=True)
class ZeroFreeCertificate:
    grid_density: int
    min_abs: float  # min over the mesh of |xi| / sum_k |c_k| |eta|^k
    contour_winding: int

    @property
    def valid(self) -> bool:
        return self.contour_winding == 0 and self.min_abs > 0


@dataclass(frozen=True)
class DeformedSystem:
    base: ParamSet
    ell: int
    certificate: ZeroFreeCertificate | None = None
    strict: bool = dataclasses.field(default=True, compare=False)

    def __post_init__(self):
        if self.ell < 0:
            raise InvalidParameters("ell must be non-negative")
        if self.base.family is Family.CH and self.ell % 2:
            raise InvalidParameters("cH deformations need even ell")
        if self.strict and not self.base.deformation_ready:
            raise InvalidParameters(f"{self.base.fingerprint} is outside the restricted parameter range")

    @classmethod
    def unrestricted(cls, base, ell):
        """Skip the restricted-range check (for counterexamples)."""
        return cls(base, ell, None, strict=False)

    @property
    def family(self) -> Family:
        return self.base.family

    @property
    def gamma(self) -> float:
        return self.base.gamma

    @property
    def fingerprint(self) -> str:
        return f"{self.base.fingerprint}/l={self.ell}"

    def xi_params(self, shift=0) -> ParamSet:
        """t(lambda + (shift + ell - 1) delta): parameters of xi_ell(eta; lambda + shift delta)."""
        return self.base.shifted(shift + self.ell - 1).twisted()

    def shifted(self, k=1) -> "DeformedSystem":
        """Same ell, lambda -> lambda + k delta (certificate not carried over)."""
        return DeformedSystem(self.base.shifted(k), self.ell, None, strict=self.strict)

    @property
    def original_partner(self) -> ParamSet:
        """lambda + ell delta + delta_tilde."""
        return self.base.shifted(self.ell).tilde_shifted(1)

    def certified(self, grid=256) -> "DeformedSystem":
        cert = check_zero_free(self, grid)
        return dataclasses.replace(self, certificate=cert)

    def require_certificate(self):
        if self.certificate is None or not self.certificate.valid:
            raise MissingCertificate(f"{self.fingerprint} has no valid zero-free certificate")


def _ret(v):
    return v[()] if np.ndim(v) == 0 else v


# -- deforming polynomial -------------------------------------------------------


def eval_xi(d: DeformedSystem, x, shift=0):
    """xi_ell(eta(x); lambda + shift*delta)."""
    x = np.asarray(x, dtype=complex)
    if d.ell == 0:
        return _ret(np.ones_like(x))
    return eval_Pn(d.xi_params(shift), d.ell, x)


def xi_coefficients(d: DeformedSystem, shift=0):
    return coefficients_in_eta(lambda x: eval_xi(d, x, shift), d.ell, d.family)


def _rectangle(d: DeformedSystem, coeffs):
    """Corners (re_lo, re_hi, im_half) of the hermiticity rectangle, truncated for cH/W."""
    half = 0.5 * abs(d.gamma)
    if d.family is Family.AW:
        return 0.0, math.pi, half
    c = coeffs
    # Cauchy bound on the eta-roots
    r = 1.0 + float(np.max(np.abs(c[:-1] / c[-1]))) if len(c) > 1 else 1.0
    if d.family is Family.CH:
        return -(r + 1.0), r + 1.0, half
    return 0.0, math.sqrt(r) + 1.0, half


def _winding(f, lo, hi, half, nodes):
    w, h = hi - lo, 2 * half
    per = nodes / (2 * (w + h))
    nw, nh = max(8, int(per * w)), max(8, int(per * h))
    edges = [
        lo - 1j * half + w * np.arange(nw) / nw,
        hi - 1j * half + 1j * h * np.arange(nh) / nh,
        hi + 1j * half - w * np.arange(nw) / nw,
        lo + 1j * half - 1j * h * np.arange(nh) / nh,
    ]
    z = np.concatenate(edges)
    vals = np.asarray(f(z), dtype=complex)
    return z, vals


def check_zero_free(d: DeformedSystem, grid=256, nodes=4096) -> ZeroFreeCertificate:
    """Mesh minimum of |xi_ell| plus the winding number of xi_ell around the rectangle.

    The rectangle is x1 <= Re x <= x2, |Im x| <= |gamma|/2, cut off for cH
    and W at a Cauchy bound beyond which no root can lie. The winding number
    is the total phase change of xi along the boundary (a discretised
    log-derivative integral); the node count is doubled until no step turns
    the phase by more than pi/4.
    """
    if grid < 64:
        raise ValueError("grid must be at least 64")
    if d.ell == 0:
        return ZeroFreeCertificate(grid, 1.0, 0)
    coeffs = xi_coefficients(d).coeffs
    if not abs(coeffs[-1]) > 1e-12 * np.max(np.abs(coeffs)):
        raise InvalidParameters(f"xi_{d.ell} drops degree for {d.base.fingerprint}")
    lo, hi, half = _rectangle(d, coeffs)
    f = functools.partial(eval_xi, d)

    def rel(z, vals):
        # |xi| against sum_k |c_k| |eta|^k, the size of the terms it is made of
        scale = np.polynomial.polynomial.polyval(np.abs(eta(d.family, z)), np.abs(coeffs))
        return np.abs(vals) / scale

    re = np.linspace(lo, hi, grid)
    im = np.linspace(-half, half, max(16, grid // 4))
    mesh = re[None, :] + 1j * im[:, None]
    min_rel = float(rel(mesh, f(mesh)).min())

    for _ in range(6):
        z, vals = _winding(f, lo, hi, half, nodes)
        if rel(z, vals).min() <= 1e-8:
            raise Inconclusive(f"xi_{d.ell} nearly vanishes on the boundary of the test rectangle")
        steps = np.angle(np.roll(vals, -1) / vals)
        if np.max(np.abs(steps)) < math.pi / 4:
            break
        nodes *= 2
    else:
        raise Inconclusive("phase along the boundary could not be resolved")
    winding = int(round(steps.sum() / (2 * math.pi)))
    return ZeroFreeCertificate(grid, min_rel, winding)


# -- potentials and weights -----------------------------------------------------


def potential_Vell(d: DeformedSystem, x, star=False):
    x = np.asarray(x, dtype=complex)
    g = d.gamma
    s = -1 if star else 1
    base = d.base.shifted(d.ell)
    V = potential_V_star(base, x) if star else potential_V(base, x)
    num = eval_xi(d, x + s * 0.5j * g) * eval_xi(d, x - s * 1j * g, 1)
    den = eval_xi(d, x - s * 0.5j * g) * eval_xi(d, x, 1)
    if np.any(den == 0):
        raise PoleError("deforming polynomial vanishes in V_ell")
    return _ret(V * num / den)


def potential_Vell_star(d, x):
    return potential_Vell(d, x, star=True)


def weight_psi_ell_sq(d: DeformedSystem, x, log=False):
    """psi_ell(x)^2 = phi_0(x; lambda + ell delta)^2 / (xi(x + i gamma/2) xi(x - i gamma/2))."""
    d.require_certificate()
    x = np.asarray(x, dtype=float)
    g = d.gamma
    xc = x.astype(complex)
    pair = (eval_xi(d, xc + 0.5j * g) * eval_xi(d, xc - 0.5j * g)).real
    lw = groundstate_weight(d.base.shifted(d.ell), x, log=True) - np.log(pair)
    return _ret(lw if log else np.exp(lw))


# -- constants -------------------------------------------------------------------


def f_hat(p: ParamSet, ell: int, n: int):
    a = p.a
    if p.family is Family.CH:
        v = 2 * a[0] + n
    elif p.family is Family.W:
        v = a[0] + a[1] + n
    else:
        q = p.q
        v = -(q ** (-(n - ell) / 2)) * (1 - a[0] * a[1] * q**n)
    return faults.apply("f_hat", complex(v).real, n=n, params=p)


def b_hat(p: ParamSet, ell: int, n: int):
    a = p.a
    if p.family is Family.CH:
        v = a[1] + a[1].conjugate() + n + 2 * ell - 1
    elif p.family is Family.W:
        v = a[2] + a[3] + n + 2 * ell - 1
    else:
        q = p.q
        v = -(q ** (-(n + ell) / 2)) * (1 - a[2] * a[3] * q ** (n + 2 * ell - 1))
    return faults.apply("b_hat", complex(v).real, n=n, params=p)


def kappa_hat(p: ParamSet, ell: int):
    if p.family is Family.AW:
        v = 1.0 / complex(p.a[0] * p.a[1] * p.q**ell).real
    else:
        v = 1.0
    return faults.apply("kappa_hat", v, params=p)


def hat_constants(d: DeformedSystem, n: int):
    """(f_hat_{ell,n}, b_hat_{ell,n}, kappa_hat_ell) at lambda = d.base."""
    return f_hat(d.base, d.ell, n), b_hat(d.base, d.ell, n), kappa_hat(d.base, d.ell)


def energy_Eln(d: DeformedSystem, n: int):
    return energy(d.base.shifted(d.ell), n)


def f_ln(d: DeformedSystem, n: int):
    return f_n(d.base.shifted(d.ell), n)


def b_ln(d: DeformedSystem, n: int):
    """b_{ell,n}(lambda) = b_n(lambda + ell delta)."""
    return b_n(d.base.shifted(d.ell), n)


# -- exceptional polynomials ---------------------------------------------------


def _Pln_formula(d: DeformedSystem, n: int, x):
    g = d.gamma
    lam_l = d.base.shifted(d.ell)
    partner = d.original_partner
    fh = f_hat(d.base, d.ell, n)
    up = v1(lam_l, x) * eval_xi(d, x + 0.5j * g) * eval_Pn(partner, n, x - 0.5j * g)
    dn = v1(lam_l, x, star=True) * eval_xi(d, x - 0.5j * g) * eval_Pn(partner, n, x + 0.5j * g)
    return -1j * (up - dn) / (fh * varphi(d.family, x))


@functools.lru_cache(maxsize=256)
def _Pln_poly(d: DeformedSystem, n: int):
    return coefficients_in_eta(lambda x: _Pln_formula(d, n, x), d.ell + n, d.family)


_PHI_SMALL = 1e-3


def eval_Pln(d: DeformedSystem, n: int, x):
    """P_{ell,n}(eta(x); lambda) from the intertwining formula.

    Near zeros of varphi (W: x = 0; AW: x = 0, pi) the bracket and varphi
    vanish together; there the value comes from the degree ell+n
    interpolant in eta instead.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=complex)
    if d.family is Family.CH:
        return _ret(_Pln_formula(d, n, x))
    near = np.abs(varphi(d.family, x)) < _PHI_SMALL
    if not np.any(near):
        return _ret(_Pln_formula(d, n, x))
    out = np.empty(x.shape, dtype=complex)
    far = ~near
    if np.any(far):
        out[far] = _Pln_formula(d, n, x[far])
    poly = _Pln_poly.__wrapped__(d, n) if faults.active() else _Pln_poly(d, n)
    out[near] = poly(eta(d.family, x[near]))
    return _ret(out)


# -- norms -----------------------------------------------------------------------


def _hln_ratio(d: DeformedSystem, n: int):
    a, ell = d.base.a, d.ell
    if d.family is Family.CH:
        s2 = (a[1] + a[1].conjugate()).real
        a1 = a[0].real
        return (2 * a1 + n + ell) * (s2 + n + 2 * ell - 1) / ((2 * a1 + n) * (s2 + n + ell - 1))
    if d.family is Family.W:
        s1 = (a[0] + a[1]).real
        s2 = (a[2] + a[3]).real
        return (s1 + n + ell) * (s2 + n + 2 * ell - 1) / ((s1 + n) * (s2 + n + ell - 1))
    q = d.base.q
    p12 = (a[0] * a[1]).real
    p34 = (a[2] * a[3]).real
    return (
        q**-ell
        * (1 - p12 * q ** (n + ell))
        * (1 - p34 * q ** (n + 2 * ell - 1))
        / ((1 - p12 * q**n) * (1 - p34 * q ** (n + ell - 1)))
    )


def norm_hln(d: DeformedSystem, n: int) -> float:
    """Closed form: h_n(lambda + ell delta) times the explicit family ratio."""
    return norm_hn(d.base.shifted(d.ell), n) * _hln_ratio(d, n)


def norm_hln_via_original(d: DeformedSystem, n: int) -> float:
    """(b_hat / f_hat) h_n(lambda + ell delta + delta_tilde)."""
    fh, bh, _ = hat_constants(d, n)
    return bh / fh * norm_hn(d.original_partner, n)


def norm_hln_via_shifted(d: DeformedSystem, n: int) -> float:
    """(b_hat/f_hat)(f_hat_{0,n}/b_hat_{0,n})(lambda + ell delta) h_n(lambda + ell delta)."""
    fh, bh, _ = hat_constants(d, n)
    lam_l = d.base.shifted(d.ell)
    return bh / fh * f_hat(lam_l, 0, n) / b_hat(lam_l, 0, n) * norm_hn(lam_l, n)


# -- intertwining potential ----------------------------------------------------


def intertwine_potential_Vhat(d: DeformedSystem, x, star=False):
    x = np.asarray(x, dtype=complex)
    g = d.gamma
    tw = d.xi_params(0)
    if star:
        V = potential_V_star(tw, x)
        num = eval_xi(d, x + 1j * g)
    else:
        V = potential_V(tw, x)
        num = eval_xi(d, x - 1j * g)
    den = eval_xi(d, x)
    if np.any(den == 0):
        raise PoleError("deforming polynomial vanishes in V_hat")
    return _ret(V * num / den)


def intertwine_potential_Vhat_star(d, x):
    return intertwine_potential_Vhat(d, x, star=True)


__all__ = [
    "DeformedSystem",
    "ZeroFreeCertificate",
    "MissingCertificate",
    "Inconclusive",
    "eval_xi",
    "xi_coefficients",
    "check_zero_free",
    "potential_Vell",
    "potential_Vell_star",
    "weight_psi_ell_sq",
    "f_hat",
    "b_hat",
    "kappa_hat",
    "hat_constants",
    "energy_Eln",
    "f_ln",
    "b_ln",
    "eval_Pln",
    "norm_hln",
    "norm_hln_via_original",
    "norm_hln_via_shifted",
    "intertwine_potential_Vhat",
    "intertwine_potential_Vhat_star",
]
