"""Multipliers of Hilbert transforms along curves and their derivative bounds.

Two families are evaluated:

* homogeneous curves, ``m_z(xi) = p.v. int e^{-2 pi i xi . Gamma(t)} |t|^z dt/t``;
* convex plane curves ``(t, gamma(t))``,
  ``m_z(xi, eta) = p.v. int e^{-i phi(t)} W(t)^z dt/t`` with
  ``phi = 2 pi (xi t + eta gamma(t))`` and ``W = 1 + eta^2 gamma^2``.

For the convex family the three scaled derivatives ``xi d_xi m``,
``eta d_eta m`` and ``xi eta d_xi d_eta m`` are computed from
integrated-by-parts representations on the truncated interval
``[-R, R]``.  With ``R`` held fixed those representations are exact
derivatives of the truncated multiplier, so finite differences of
:func:`m_z_convex` at the same ``R`` check them directly.  Boundary terms at
``+-R`` are kept and reported.

Every integral over ``[-R, R]`` is folded onto ``[0, R]`` using the parity of
the integrand (``gamma`` odd, ``W`` even): even parts pair to ``2 cos phi``,
odd parts to ``-2 i sin phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curves import ConvexPlane, Homogeneous, TwoSided, side_vectors
from .geometry import DomainError
from .quadrature import (PVSpec, QuadratureError, adaptive_panels, cutoff_for_tail,
                         outer_window, subdivide)

TWO_PI = 2.0 * math.pi
REGIMES = ("homogeneous", "convex", "unrestricted")


@dataclass(frozen=True)
class AnalyticParameter:
    """Complex exponent ``z`` together with the window of ``Re z`` it is used in.

    ``regime="homogeneous"`` requires ``-beta <= re <= -eta_margin``;
    ``regime="convex"`` requires ``re < -1``.
    """

    re: float
    im: float = 0.0
    regime: str = "unrestricted"
    beta: Optional[float] = None
    eta_margin: Optional[float] = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}")
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise DomainError("z must be finite")
        if self.regime == "convex" and not self.re < -1:
            raise DomainError(f"convex regime needs Re z < -1, got {self.re}")
        if self.regime == "homogeneous":
            if self.beta is None or self.eta_margin is None:
                raise DomainError("homogeneous regime needs beta and eta_margin")
            if not (0 < self.eta_margin <= self.beta):
                raise DomainError("need 0 < eta_margin <= beta")
            if not (-self.beta <= self.re <= -self.eta_margin):
                raise DomainError(
                    f"homogeneous regime needs {-self.beta} <= Re z <= {-self.eta_margin}, got {self.re}")

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def coerce(cls, z) -> "AnalyticParameter":
        if isinstance(z, AnalyticParameter):
            return z
        z = complex(z)
        return cls(z.real, z.imag)


def _z(z) -> complex:
    return AnalyticParameter.coerce(z).z


# ---------------------------------------------------------------------------
# homogeneous curves


def _merge_by_exponent(coef, alpha):
    """Sum coefficients that share an exponent; drop zeros."""
    out = {}
    for c, a in zip(coef, alpha):
        out[a] = out.get(a, 0.0) + c
    return {a: c for a, c in out.items() if c != 0.0}


def oscillation_cutoff(coef, alpha, cycles=16.0) -> float:
    """Outer cutoff for ``exp(-2 pi i sum_j coef_j s^{alpha_j})`` under the erfc window.

    Past the last point where lower-order terms can cancel the leading one,
    the phase rate is at least half the leading term's rate; ``R`` is chosen
    so that at least ``cycles`` oscillations fall inside ``[R/4, R]``.
    Returns 0 for a constant phase.
    """
    terms = _merge_by_exponent(coef, alpha)
    if not terms:
        return 0.0
    big = max(abs(c) for c in terms.values())
    small = {a: c for a, c in terms.items() if abs(c) < 1e-12 * big}
    if small and len(small) < len(terms):
        # a rounding-level coefficient (a direction an ulp off an axis) would
        # otherwise set R; drop it when its phase stays negligible up to the window's end
        kept = [(a, c) for a, c in terms.items() if a not in small]
        R = oscillation_cutoff([c for _, c in kept], [a for a, _ in kept], cycles)
        if all(TWO_PI * abs(c) * (1.2 * R) ** a < 1e-6 for a, c in small.items()):
            return R
    ak = max(terms)
    ck = terms[ak]
    opp = [(a, c) for a, c in terms.items() if a != ak and c * ck < 0]
    s_dom = 0.0
    lead = ak * abs(ck)
    if opp:
        lead *= 0.5
        for a, c in opp:
            s_dom = max(s_dom, (2 * len(opp) * a * abs(c) / (ak * abs(ck))) ** (1.0 / (ak - a)))
    beta = ak - 1.0
    R = (cycles * 4.0 ** max(beta, 0.0) / lead) ** (1.0 / ak)
    return max(R, 4.0 * s_dom)


def _inner_cutoff(dcoef, alpha, re_z, tol):
    """Inner cutoff so the dropped core ``(0, eps)`` contributes at most ``tol``.

    ``|e^{-i psi_+} - e^{-i psi_-}| <= 2 pi sum_j |dcoef_j| s^{alpha_j}``, so the
    core is bounded by ``2 pi sum_j |dcoef_j| eps^{alpha_j + Re z} / (alpha_j + Re z)``.
    """
    live = [(a, abs(c)) for a, c in zip(alpha, dcoef) if c != 0]
    if not live:
        return None
    for a, _ in live:
        if a + re_z <= 0:
            raise DomainError(
                f"p.v. integral diverges at t=0: exponent {a} with Re z = {re_z}")
    lo, hi = 1e-300, 1.0

    def core(e):
        return sum(TWO_PI * c * e ** (a + re_z) / (a + re_z) for a, c in live)

    if core(hi) <= tol:
        return hi
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if core(mid) > tol:
            hi = mid
        else:
            lo = mid
        if hi / lo < 1.01:
            break
    return lo


@dataclass(frozen=True)
class HomogeneousPlan:
    eps: float
    R: float
    window: str
    coarse_below: float


def homogeneous_plan(curve, z, xi, tol=1e-10, cycles=16.0, spec=None) -> Optional[HomogeneousPlan]:
    """Cutoffs for ``m_z(xi)``; ``None`` when the integrand vanishes identically."""
    e, f = side_vectors(curve)
    alpha = curve.group.alpha
    xi = np.asarray(xi, dtype=float)
    cp, cm = xi * e, xi * f
    zc = _z(z)
    if not np.any(cp - cm):
        return None
    # repeated exponents can cancel to rounding level (xi orthogonal to a line)
    scale = np.abs(cp).sum() + np.abs(cm).sum()
    merged = list(_merge_by_exponent(cp, alpha).values()) + list(_merge_by_exponent(cm, alpha).values())
    if all(abs(c) <= 1e-14 * scale for c in merged):
        return None
    if spec is not None:
        return HomogeneousPlan(spec.eps, spec.R, spec.window, spec.eps)
    Rp = oscillation_cutoff(cp, alpha, cycles)
    Rm = oscillation_cutoff(cm, alpha, cycles)
    if Rp == 0.0 or Rm == 0.0:
        # one side does not oscillate: only absolute convergence can close the tail
        if zc.real >= 0:
            raise DomainError("a non-oscillating side needs Re z < 0 or explicit cutoffs")
        R = max(Rp, Rm, cutoff_for_tail(zc, tol, cap=1e12))
        window = "hard"
    else:
        R = max(Rp, Rm)
        window = "erfc"
    eps = _inner_cutoff(cp - cm, alpha, zc.real, tol)
    eps = min(eps, 1e-3 * R)
    # below this scale the paired integrand is a smooth power law
    rate = sum(abs(c) for c in np.concatenate([cp, cm]))
    coarse = min(R, max(eps, 0.05 / max(rate, 1e-300)) if rate > 0 else R)
    return HomogeneousPlan(eps, R, window, coarse)


def _shell_edges(eps, R, coarse_below, levels_per_octave):
    """Log-spaced edges: one panel per octave under ``coarse_below``, finer above."""
    edges = [R]
    h = 2.0 ** (-1.0 / levels_per_octave)
    t = R
    while t > eps:
        t = t * (h if t > coarse_below else 0.5)
        edges.append(max(t, eps))
    return np.array(edges[::-1])


def m_z_homogeneous_many(curve, z, xis, tol=1e-10, spec: Optional[PVSpec] = None,
                         levels_per_octave=8, cycles=16.0, raise_on_fail=True):
    """Vectorised :func:`m_z_homogeneous` over a stack of frequencies.

    Returns ``(values, errors)``.  Without ``spec`` the cutoffs are chosen
    per frequency: the inner one from the size of the dropped core, the outer
    one from the oscillation rate (smooth erfc window), or from the absolute
    tail bound if one side of the curve does not oscillate.
    """
    if not isinstance(curve, (Homogeneous, TwoSided)):
        raise TypeError("m_z_homogeneous needs a homogeneous or two-sided curve")
    zc = _z(z)
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if xis.shape[-1] != curve.group.n:
        raise DomainError(f"frequencies must lie in R^{curve.group.n}")
    e, f = side_vectors(curve)
    alpha = curve.group.a
    npts = xis.shape[0]
    out = np.zeros(npts, dtype=complex)
    errs = np.zeros(npts)
    plans = [homogeneous_plan(curve, zc, x, tol, cycles, spec) for x in xis]
    live = [i for i, p in enumerate(plans) if p is not None]
    if not live:
        return out, errs
    aa, bb, oo, RR, WW = [], [], [], [], []
    for k, i in enumerate(live):
        p = plans[i]
        edges = _shell_edges(p.eps, p.R, p.coarse_below, levels_per_octave)
        a, b = edges[:-1], edges[1:]
        cp, cm = xis[i] * e, xis[i] * f
        var = TWO_PI * np.maximum(
            np.abs(cp) @ (b[None, :] ** alpha[:, None] - a[None, :] ** alpha[:, None]),
            np.abs(cm) @ (b[None, :] ** alpha[:, None] - a[None, :] ** alpha[:, None]))
        var = var + abs(zc.imag) * np.log(b / a)
        a, b, o = subdivide(a, b, np.full(a.size, k, np.int64), np.ceil(var / math.pi))
        aa.append(a)
        bb.append(b)
        oo.append(o)
        RR.append(p.R)
        WW.append(p.window == "erfc")
    a, b, o = np.concatenate(aa), np.concatenate(bb), np.concatenate(oo)
    Rk, Wk = np.array(RR), np.array(WW)
    CP = xis[live] * e
    CM = xis[live] * f

    def integrand(t, own):
        tp = t[:, None] ** alpha
        ph = TWO_PI * (CP[own] * tp).sum(axis=1)
        pm = TWO_PI * (CM[own] * tp).sum(axis=1)
        amp = np.exp((zc - 1.0) * np.log(t))
        w = np.where(Wk[own], outer_window(t, Rk[own]), 1.0)
        return (np.exp(-1j * ph) - np.exp(-1j * pm)) * amp * w

    val, err, ok = adaptive_panels(integrand, a, b, o, len(live), abs_tol=tol, rel_tol=tol)
    out[live] = val[:, 0]
    errs[live] = err
    if raise_on_fail and not ok.all():
        raise QuadratureError("m_z_homogeneous: tolerance not met", value=out, error=errs)
    return out, errs


def m_z_homogeneous(curve, z, xi, tol=1e-10, spec: Optional[PVSpec] = None,
                    return_error=False):
    """``m_z(xi)`` for a homogeneous or two-sided homogeneous curve.

    Parameters
    ----------
    curve : Homogeneous or TwoSided
    z : complex or AnalyticParameter
    xi : array_like, shape (n,)
    tol : float
        Absolute and relative quadrature tolerance.
    spec : PVSpec, optional
        Explicit cutoffs; by default they are chosen from ``xi`` and ``z``.
    """
    val, err = m_z_homogeneous_many(curve, z, np.asarray(xi, float)[None, :], tol, spec)
    if return_error:
        return complex(val[0]), float(err[0])
    return complex(val[0])


# ---------------------------------------------------------------------------
# convex plane curves

XI_TERMS = ("boundary", "gamma_prime", "gamma_gamma_prime")
ETA_TERMS = ("first", "second")
MIXED_TERMS = ("boundary_1", "integral_1", "integral_2", "integral_3",
               "boundary_2", "integral_4", "integral_5", "integral_6")

# integrand components on [0, R], after folding t -> -t
_COMPONENTS = ("m", "I1", "I2", "B1", "B2", "J1", "J3", "J5")
_NEEDS = {
    "m": ("m",),
    "xi_dxi": ("I1", "I2"),
    "eta_deta": ("B1", "B2"),
    "xi_eta_mixed": ("I1", "I2", "J1", "J3", "J5"),
}
QUANTITIES = ("m", "xi_dxi", "eta_deta", "xi_eta_mixed")


def tail_level(z, tol=1e-8) -> float:
    """``U`` with ``int_U^inf u^{2 Re z - 1} du = U^{2 Re z} / (2 |Re z|) = tol``.

    With ``u = |eta| gamma(t)`` and ``dt/t <= du/u`` (convexity), truncating at
    ``|eta| gamma(R) = U`` discards at most ``tol`` from ``m_z``.
    """
    re = _z(z).real
    if re >= 0:
        raise DomainError("the convex weight decays only for Re z < 0")
    return (2 * abs(re) * tol) ** (1.0 / (2 * re))


def convex_cutoff(gamma, z, eta, tol=1e-8, eta_floor=1e-2):
    """Outer cutoff ``R`` with ``|eta| gamma(R) = U`` (``|eta|`` floored at ``eta_floor``)."""
    U = tail_level(z, tol)
    e = np.maximum(np.abs(np.asarray(eta, dtype=float)), eta_floor)
    return gamma.inverse_positive(U / e)


def split_point(gamma, eta):
    """``t0 > 0`` with ``|eta| gamma(t0) = 1``."""
    eta = abs(float(eta))
    if eta == 0:
        return math.inf
    return float(gamma.inverse_positive(np.array(1.0 / eta)))


@dataclass
class ConvexResult:
    xi: np.ndarray
    eta: np.ndarray
    z: complex
    R: np.ndarray
    values: dict
    terms: dict
    error: np.ndarray
    converged: np.ndarray
    extra: dict = field(default_factory=dict)


def convex_quantities(gamma: ConvexPlane, z, xi, eta, quantities=QUANTITIES, R=None,
                      tail_tol=1e-8, abs_tol=1e-10, rel_tol=1e-9, levels_per_octave=4,
                      chunk_panels=60_000) -> ConvexResult:
    """Batch evaluation of the convex multiplier and its scaled derivatives.

    All requested quantities at a point share one set of quadrature nodes;
    points are processed in chunks to bound memory.  ``R`` (scalar or per
    point) overrides the tail-based cutoff of :func:`convex_cutoff`.
    """
    if not isinstance(gamma, ConvexPlane):
        raise TypeError("convex_quantities needs a ConvexPlane curve")
    zc = _z(z)
    xi, eta = np.broadcast_arrays(np.asarray(xi, float), np.asarray(eta, float))
    shape = xi.shape
    xi, eta = xi.ravel().copy(), eta.ravel().copy()
    npts = xi.size
    for q in quantities:
        if q not in QUANTITIES:
            raise ValueError(f"unknown quantity {q!r}")
    comps = sorted({c for q in quantities for c in _NEEDS[q]}, key=_COMPONENTS.index)
    if R is None:
        Rv = convex_cutoff(gamma, zc, eta, tail_tol)
    else:
        Rv = np.broadcast_to(np.asarray(R, dtype=float), (npts,)).copy()
    Rv = np.atleast_1d(Rv).astype(float)

    # panels per point
    pan_a, pan_b, pan_o = [], [], []
    counts = np.zeros(npts, np.int64)
    for i in range(npts):
        a, b = _convex_panels(gamma, zc, xi[i], eta[i], Rv[i], levels_per_octave)
        pan_a.append(a)
        pan_b.append(b)
        counts[i] = a.size

    vals = np.zeros((npts, len(comps)), dtype=complex)
    err = np.zeros(npts)
    ok = np.zeros(npts, dtype=bool)
    start = 0
    while start < npts:
        stop = start
        tot = 0
        while stop < npts and (stop == start or tot + counts[stop] <= chunk_panels):
            tot += counts[stop]
            stop += 1
        idx = np.arange(start, stop)
        a = np.concatenate([pan_a[i] for i in idx])
        b = np.concatenate([pan_b[i] for i in idx])
        o = np.repeat(np.arange(idx.size), counts[idx])
        f = _convex_integrand(gamma, zc, xi[idx], eta[idx], comps)
        v, e, k = adaptive_panels(f, a, b, o, idx.size, abs_tol=abs_tol, rel_tol=rel_tol)
        vals[idx] = v
        err[idx] = e
        ok[idx] = k
        start = stop

    comp = {c: vals[:, j] for j, c in enumerate(comps)}
    values, terms = _assemble(gamma, zc, xi, eta, Rv, comp, quantities)
    for q in values:
        values[q] = values[q].reshape(shape)
    for q in terms:
        terms[q] = terms[q].reshape(shape + (terms[q].shape[-1],))
    return ConvexResult(xi.reshape(shape), eta.reshape(shape), zc, Rv.reshape(shape), values,
                        terms, err.reshape(shape), ok.reshape(shape))


def _convex_panels(gamma, z, xi, eta, R, levels_per_octave):
    """Panels on ``[0, R]``: a core panel, log shells, then phase splitting."""
    rate0 = abs(xi) + abs(eta) * float(gamma.d1(np.array(min(R, 1e-3))))
    s_lo = min(R * 1e-6, 1e-3 / max(rate0, 1e-12), 1e-3)
    h = 2.0 ** (-1.0 / levels_per_octave)
    n = int(math.ceil(math.log(R / s_lo) / -math.log(h)))
    edges = R * h ** np.arange(n, -1, -1)
    edges[0] = s_lo
    t0 = split_point(gamma, eta)
    extra = [0.0]
    if t0 < R:
        extra.append(t0)
    edges = np.unique(np.concatenate([edges, extra]))
    a, b = edges[:-1], edges[1:]
    ga, gb = gamma.gamma(a), gamma.gamma(b)
    var = TWO_PI * (abs(xi) * (b - a) + abs(eta) * (gb - ga))
    if z.imag != 0:
        var = var + abs(z.imag) * (np.log1p((eta * gb) ** 2) - np.log1p((eta * ga) ** 2))
    o = np.zeros(a.size, np.int64)
    a, b, _ = subdivide(a, b, o, np.ceil(var / math.pi))
    return a, b


def _convex_integrand(gamma, z, X, Y, comps):
    def f(t, own):
        x, y = X[own], Y[own]
        g = gamma.gamma(t)
        g1 = gamma.d1(t)
        ph = TWO_PI * (x * t + y * g)
        c2 = 2.0 * np.cos(ph)
        s2 = -2j * np.sin(ph)
        u = y * g
        W = 1.0 + u * u
        Wz = np.exp(z * np.log(W))
        out = []
        for name in comps:
            if name == "m":
                out.append(s2 * Wz / t)
            elif name == "I1":
                out.append(c2 * g1 * Wz)
            elif name == "I2":
                out.append(s2 * g * g1 * Wz / W)
            elif name == "B1":
                out.append(c2 * u * Wz / t)
            elif name == "B2":
                out.append(s2 * u * u * Wz / W / t)
            elif name == "J1":
                out.append(s2 * u * y * g1 * Wz)
            elif name == "J3":
                out.append(c2 * u * u * y * g1 * Wz / W)
            elif name == "J5":
                out.append(s2 * u ** 3 * y * g1 * Wz / (W * W))
        return np.stack(out, axis=-1)
    return f


def _assemble(gamma, z, xi, eta, R, comp, quantities):
    gR = gamma.gamma(R)
    phR = TWO_PI * (xi * R + eta * gR)
    uR = eta * gR
    WR = 1.0 + uR * uR
    WRz = np.exp(z * np.log(WR))
    sinR = -2j * np.sin(phR)  # E(R) - E(-R)
    cosR = 2.0 * np.cos(phR)  # E(R) + E(-R)
    pi = math.pi
    values, terms = {}, {}
    if "m" in quantities:
        values["m"] = comp["m"]
    if "xi_dxi" in quantities:
        t = np.stack([WRz * sinR,
                      2j * pi * eta * comp["I1"],
                      -2.0 * z * eta ** 2 * comp["I2"]], axis=-1)
        terms["xi_dxi"] = t
        values["xi_dxi"] = t.sum(axis=-1)
    if "eta_deta" in quantities:
        t = np.stack([-2j * pi * comp["B1"], 2.0 * z * comp["B2"]], axis=-1)
        terms["eta_deta"] = t
        values["eta_deta"] = t.sum(axis=-1)
    if "xi_eta_mixed" in quantities:
        t = np.stack([
            -2j * pi * uR * WRz * cosR,
            4.0 * pi ** 2 * comp["J1"],
            2j * pi * eta * comp["I1"],
            4j * pi * z * comp["J3"],
            2.0 * z * uR ** 2 * WRz / WR * sinR,
            4j * pi * z * comp["J3"],
            -4.0 * z * eta ** 2 * comp["I2"],
            -4.0 * z * (z - 1.0) * comp["J5"],
        ], axis=-1)
        terms["xi_eta_mixed"] = t
        values["xi_eta_mixed"] = t.sum(axis=-1)
        terms["sixth_integral_core"] = (z * (z - 1.0) * comp["J5"])[:, None]
    return values, terms


def _single(gamma, z, xi, eta, quantity, R, **kw):
    res = convex_quantities(gamma, z, np.array([xi], float), np.array([eta], float),
                            quantities=(quantity,), R=R, **kw)
    if not res.converged[0]:
        raise QuadratureError(f"{quantity}: tolerance not met",
                              value=complex(res.values[quantity][0]), error=float(res.error[0]))
    return res


def m_z_convex(gamma, z, xi, eta, R=None, **kw) -> complex:
    """``m_z(xi, eta)`` truncated to ``|t| < R`` (default: tail below 1e-8)."""
    return complex(_single(gamma, z, xi, eta, "m", R, **kw).values["m"][0])


def _scaled_or_plain(value, scale, scaled, name):
    if scaled:
        return value
    if scale == 0:
        raise DomainError(f"unscaled {name} is not available where the scale factor vanishes")
    return value / scale


def dm_dxi(gamma, z, xi, eta, R=None, scaled=False, return_terms=False, **kw):
    """``d m_z / d xi`` (or ``xi d m_z / d xi`` with ``scaled=True``).

    Three terms: the boundary value ``W(R)^z (E(R) - E(-R))``,
    ``2 pi i eta int E gamma' W^z`` and ``-2 z eta^2 int E W^{z-1} gamma gamma'``.
    """
    res = _single(gamma, z, xi, eta, "xi_dxi", R, **kw)
    v = _scaled_or_plain(complex(res.values["xi_dxi"][0]), xi, scaled, "dm_dxi")
    if return_terms:
        return v, dict(zip(XI_TERMS, res.terms["xi_dxi"][0]))
    return v


def dm_deta(gamma, z, xi, eta, R=None, scaled=False, return_terms=False, **kw):
    """``d m_z / d eta`` (or ``eta d m_z / d eta``), two-term representation."""
    res = _single(gamma, z, xi, eta, "eta_deta", R, **kw)
    v = _scaled_or_plain(complex(res.values["eta_deta"][0]), eta, scaled, "dm_deta")
    if return_terms:
        return v, dict(zip(ETA_TERMS, res.terms["eta_deta"][0]))
    return v


def d2m_dxideta(gamma, z, xi, eta, R=None, scaled=False, return_terms=False, **kw):
    """Mixed derivative from the eight-term integrated-by-parts representation."""
    res = _single(gamma, z, xi, eta, "xi_eta_mixed", R, **kw)
    v = _scaled_or_plain(complex(res.values["xi_eta_mixed"][0]), xi * eta, scaled, "d2m_dxideta")
    if return_terms:
        return v, dict(zip(MIXED_TERMS, res.terms["xi_eta_mixed"][0]))
    return v


def inner_piece(gamma, eta) -> float:
    """``|eta| int_0^{t0} gamma(t)/t dt`` with ``|eta| gamma(t0) = 1``."""
    from scipy.integrate import quad

    t0 = split_point(gamma, eta)
    if not math.isfinite(t0):
        return 0.0
    val, _ = quad(lambda t: float(gamma.gamma(np.array(t))) / t, 0.0, t0,
                  epsabs=1e-13, epsrel=1e-12, limit=200)
    return abs(eta) * val


def weight_integral(re_z) -> float:
    """``int_R (1 + u^2)^{Re z} du`` in closed form (Beta function)."""
    from scipy.special import beta

    if re_z >= -0.5:
        return math.inf
    return float(beta(0.5, -re_z - 0.5))


# ---------------------------------------------------------------------------
# grid reports


@dataclass
class BoundReport:
    quantity: str
    grid_spec: dict
    sup_abs: float
    argmax_point: tuple
    bound: float
    passed: bool
    coverage: float
    z: complex = 0j

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "sup_abs": self.sup_abs,
                "argmax": list(self.argmax_point), "bound": self.bound,
                "pass": self.passed, "coverage": self.coverage,
                "z": [self.z.real, self.z.imag], "grid": self.grid_spec}


GROWTH_POWER = {"m": 0, "xi_dxi": 1, "eta_deta": 1, "xi_eta_mixed": 2}
# regression envelope frozen after the finite-difference-verified sweep
ENVELOPE_C0 = 64.0


def quadrant_grid(lo=1e-2, hi=1e2, count=33):
    """Log-spaced magnitudes in every sign quadrant; returns flat ``(xi, eta)``."""
    r = np.geomspace(lo, hi, count)
    X, Y = np.meshgrid(r, r, indexing="ij")
    xs, ys = [], []
    for sx in (1.0, -1.0):
        for sy in (1.0, -1.0):
            xs.append(sx * X.ravel())
            ys.append(sy * Y.ravel())
    return np.concatenate(xs), np.concatenate(ys)


def ml_bound_report(gamma, z, grid=None, C0=ENVELOPE_C0, **kw):
    """Sup of each scaled quantity over the grid against ``C0 (1 + |Im z|)^k``.

    ``grid`` is ``{"lo", "hi", "count"}`` for :func:`quadrant_grid`.  Points
    whose quadrature misses its tolerance are excluded from the sup and
    counted against ``coverage``.  Returns ``(reports, result)``.
    """
    grid = dict(grid or {"lo": 1e-2, "hi": 1e2, "count": 33})
    spec = {"kind": "log_quadrants", **grid}
    xi, eta = quadrant_grid(grid["lo"], grid["hi"], grid["count"])
    zc = _z(z)
    res = convex_quantities(gamma, zc, xi, eta, quantities=QUANTITIES, **kw)
    reports = []
    ok = res.converged
    for q in QUANTITIES:
        mag = np.where(ok, np.abs(res.values[q]), -np.inf)
        j = int(np.argmax(mag))
        bound = C0 * (1.0 + abs(zc.imag)) ** GROWTH_POWER[q]
        sup = float(mag[j]) if ok.any() else math.nan
        reports.append(BoundReport(q, spec, sup, (float(xi[j]), float(eta[j])), bound,
                                   bool(ok.any() and sup <= bound), float(ok.mean()), zc))
    return reports, res
