"""Weighted orthogonality integrals and the contour-shift admissibility scan."""

import math
from dataclasses import dataclass, field

import numpy as np

from .deformation import (
    DeformedSystem,
    Inconclusive,
    eval_Pln,
    eval_xi,
    intertwine_potential_Vhat,
    weight_psi_ell_sq,
    xi_coefficients,
)
from .families import Family, ParamSet, eval_Pn, groundstate_weight, log_weight_analytic
from .hyperseries import PoleError


class NonConvergence(ArithmeticError):
    """Two node counts disagree by more than the allowed margin."""


SCHEMES = ("gauss_legendre_mapped", "tanh_sinh")


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str
    nodes: int
    truncation: float = math.inf
    target: float = 1e-10

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.nodes < 32:
            raise ValueError("nodes must be >= 32")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    nodes: int = 0
    tail_bound: float = 0.0


def default_spec(family, n=0, m=0, slack=0) -> QuadratureSpec:
    family = Family(family)
    if family is Family.CH:
        # |Gamma(a + ix)|^2 decays like exp(-pi|x|), so tails vanish long before T
        T = 40.0 + 2 * (n + m + slack)
        return QuadratureSpec("gauss_legendre_mapped", 16 * int(2 * T), T)
    if family is Family.W:
        return QuadratureSpec("tanh_sinh", 1025, 60.0)
    return QuadratureSpec("gauss_legendre_mapped", 512, math.pi)


def _interval(family, spec):
    if family is Family.CH:
        return -spec.truncation, spec.truncation
    if family is Family.W:
        return 0.0, spec.truncation
    return 0.0, math.pi


def _gl_panels(lo, hi, nodes):
    per = 16
    panels = max(1, nodes // per)
    t, w = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return x, wt


def _gl(lo, hi, nodes):
    if nodes <= 512:
        t, w = np.polynomial.legendre.leggauss(nodes)
        return 0.5 * (hi - lo) * t + 0.5 * (hi + lo), 0.5 * (hi - lo) * w
    return _gl_panels(lo, hi, nodes)


def _tanh_sinh(lo, hi, nodes, tmax=3.2):
    k = np.arange(nodes) - (nodes - 1) / 2
    h = 2 * tmax / (nodes - 1)
    t = k * h
    u = 0.5 * math.pi * np.sinh(t)
    s = np.tanh(u)
    half = 0.5 * (hi - lo)
    x = lo + half * (1 + s)
    w = half * h * 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    keep = (x > lo) & (x < hi) & (w > 0)
    return x[keep], w[keep]


def _rule(family, spec, nodes):
    lo, hi = _interval(family, spec)
    if spec.scheme == "tanh_sinh":
        return _tanh_sinh(lo, hi, nodes)
    if family is Family.CH:
        return _gl_panels(lo, hi, nodes)
    return _gl(lo, hi, nodes)


def _layer_family(layer):
    return layer.family if isinstance(layer, ParamSet) else layer.base.family


def _integrand(layer, ns):
    """Weight times the real polynomial products for every (n, m) in ``ns``."""
    if isinstance(layer, DeformedSystem):
        layer.require_certificate()

        def w(x):
            return weight_psi_ell_sq(layer, x)

        def P(n, x):
            return eval_Pln(layer, n, x.astype(complex))
    else:

        def w(x):
            return groundstate_weight(layer, x)

        def P(n, x):
            return eval_Pn(layer, n, x.astype(complex))

    def f(x):
        wx = np.asarray(w(x), dtype=float)
        cache = {}
        out = []
        for n, m in ns:
            for k in (n, m):
                if k not in cache:
                    cache[k] = np.real(P(k, x))
            out.append(wx * cache[n] * cache[m])
        return np.array(out)

    return f


def _integrate(layer, ns, spec):
    fam = _layer_family(layer)
    f = _integrand(layer, ns)
    if spec.scheme == "tanh_sinh":
        coarse = (spec.nodes + 1) // 2
    else:
        coarse = spec.nodes // 2
    vals = []
    for nodes in (coarse, spec.nodes):
        x, w = _rule(fam, spec, nodes)
        vals.append(f(x) @ w)
    fine, rough = vals[1], vals[0]
    err = np.abs(fine - rough)
    tail = np.zeros(len(ns))
    if fam is not Family.AW:
        # integrand size at the truncation edge times the remaining length scale
        ends = np.array([spec.truncation]) if fam is Family.W else np.array([-spec.truncation, spec.truncation])
        tail = np.max(np.abs(f(ends)), axis=1) * 10.0
    return fine, err, tail


def _check(values, errs, tails, scales, spec, tol):
    margin = 10.0 * max(tol, spec.target)
    for v, e, t, s in zip(values, errs, tails, scales):
        if e > margin * s:
            raise NonConvergence(f"node-doubling difference {e:.3g} exceeds {margin:.1g} x scale {s:.3g}")
        if t > 1e-12 * s:
            raise NonConvergence(f"truncation tail bound {t:.3g} too large")


def orthogonality_integral(layer, n, m, spec=None, tol=1e-6) -> QuadratureResult:
    fam = _layer_family(layer)
    spec = spec or default_spec(fam, n, m, getattr(layer, "ell", 0))
    val, err, tail = _integrate(layer, [(n, m)], spec)
    scale = abs(val[0])
    if n != m:
        d = _integrate(layer, [(n, n), (m, m)], spec)[0]
        scale = math.sqrt(abs(d[0] * d[1]))
    _check(val, err, tail, [scale], spec, tol)
    return QuadratureResult(float(val[0]), float(err[0]), spec.nodes, float(tail[0]))


@dataclass(frozen=True)
class GramResult:
    matrix: np.ndarray
    error: np.ndarray

    @property
    def diagonal(self):
        return np.diag(self.matrix)

    def offdiag_ratio(self):
        d = np.sqrt(np.abs(np.diag(self.matrix)))
        r = np.abs(self.matrix) / np.outer(d, d)
        np.fill_diagonal(r, 0.0)
        return float(r.max()) if r.size else 0.0


def gram_matrix(layer, N, spec=None, tol=1e-6) -> GramResult:
    """Gram matrix of the first N (exceptional) polynomials under the layer's weight."""
    fam = _layer_family(layer)
    spec = spec or default_spec(fam, N - 1, N - 1, getattr(layer, "ell", 0))
    ns = [(i, j) for i in range(N) for j in range(i, N)]
    val, err, tail = _integrate(layer, ns, spec)
    G = np.zeros((N, N))
    E = np.zeros((N, N))
    for (i, j), v, e in zip(ns, val, err):
        G[i, j] = G[j, i] = v
        E[i, j] = E[j, i] = e
    d = np.sqrt(np.abs(np.diag(G)))
    scales = [d[i] * d[j] for i, j in ns]
    _check(val, err, tail, scales, spec, tol)
    return GramResult(G, E)


# -- contour shift ---------------------------------------------------------------


@dataclass(frozen=True)
class ContourReport:
    admissible: bool
    min_xi_rel: float
    candidate_poles: int
    genuine_poles: list = field(default_factory=list)


def _candidate_poles(d: DeformedSystem):
    """Points of 0 <= Im x / gamma <= 1/2 where a factor of V^ phi_0(lambda')^2 is singular."""
    g = d.gamma
    lo, hi = sorted((0.0, 0.5 * g))
    pp = d.original_partner
    fam = d.family
    pts = []
    if fam is Family.CH:
        for a in pp.a:
            for k in range(3):
                pts += [1j * (a + k), -1j * (a.conjugate() + k)]
    elif fam is Family.W:
        for a in pp.a:
            for k in range(3):
                pts += [1j * (a + k), -1j * (a + k)]
        pts += [0.0, 0.5j]
    else:
        q = pp.q
        for a in pp.a:
            for k in range(6):
                z = 1j * np.log(a * q**k)
                pts += [z, -z]
        pts += [0.0, math.pi, 0.5j * np.log(q), math.pi + 0.5j * np.log(q)]
        pts = [complex((z.real + math.pi) % (2 * math.pi) - math.pi, z.imag) for z in map(complex, pts)]
        pts = [z if z.real >= -1e-12 else complex(-z.real, z.imag) for z in pts]
    out = []
    for z in map(complex, pts):
        if lo - 1e-12 <= z.imag <= hi + 1e-12 and all(abs(z - w) > 1e-9 for w in out):
            out.append(z)
    return out


def _log_abs_product(d, z):
    z = np.asarray(z, dtype=complex)
    V = intertwine_potential_Vhat(d, z)
    return np.log(np.abs(V)) + np.real(log_weight_analytic(d.original_partner, z))


def contour_shift_admissibility(d: DeformedSystem, grid=128) -> ContourReport:
    """Is V^_ell phi_0(lambda + ell delta + delta~)^2 pole-free on 0 <= Im x/gamma <= 1/2?

    Denominator zeros of V^ (zeros of xi) are excluded by a grid scan of the
    coefficient-relative size of xi. Every candidate singularity of the
    explicit factors is tested on two small circles: a genuine pole makes
    the magnitude grow as the radius shrinks.
    """
    fam = d.family
    g = d.gamma
    coeffs = xi_coefficients(d).coeffs
    if fam is Family.CH:
        r = float(np.max(np.abs(coeffs[:-1])) / abs(coeffs[-1])) if len(coeffs) > 1 else 0.0
        lo, hi = -(r + 1) - 2, r + 3
    elif fam is Family.W:
        r = float(np.max(np.abs(coeffs[:-1])) / abs(coeffs[-1])) if len(coeffs) > 1 else 0.0
        lo, hi = 0.0, math.sqrt(r + 1) + 2
    else:
        lo, hi = 0.0, math.pi
    X, Y = np.meshgrid(np.linspace(lo, hi, grid), np.linspace(0.0, 0.5 * g, max(16, grid // 4)))
    Z = X + 1j * Y
    from .families import eta

    e = eta(fam, Z)
    size = sum(abs(c) * np.abs(e) ** k for k, c in enumerate(coeffs))
    rel = float(np.min(np.abs(eval_xi(d, Z)) / size))
    if rel <= 1e-8:
        raise Inconclusive("xi nearly vanishes in the shift strip")
    genuine = []
    cands = _candidate_poles(d)
    th = np.linspace(0, 2 * math.pi, 24, endpoint=False)
    for z0 in cands:
        try:
            big = np.max(_log_abs_product(d, z0 + 1e-3 * np.exp(1j * th)))
            small = np.max(_log_abs_product(d, z0 + 1e-5 * np.exp(1j * th)))
        except PoleError:
            genuine.append(z0)
            continue
        if small - big > math.log(10.0):
            genuine.append(z0)
    return ContourReport(not genuine, rel, len(cands), genuine)


__all__ = [
    "QuadratureSpec",
    "QuadratureResult",
    "GramResult",
    "ContourReport",
    "NonConvergence",
    "default_spec",
    "orthogonality_integral",
    "gram_matrix",
    "contour_shift_admissibility",
]
