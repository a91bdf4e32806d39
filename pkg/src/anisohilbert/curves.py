"""Curves through the origin and checks of the convex-curve hypotheses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import DilationGroup, DomainError


class CurveValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Homogeneous:
    """``Gamma(t) = (|t|^{a_1} sgn t, ..., |t|^{a_n} sgn t)``."""

    group: DilationGroup
    variant = "homogeneous"

    @property
    def e(self):
        return np.ones(self.group.n)

    @property
    def f(self):
        return -np.ones(self.group.n)


@dataclass(frozen=True)
class TwoSided:
    """``Gamma(t) = delta_t e`` for ``t > 0`` and ``delta_{-t} f`` for ``t < 0``."""

    group: DilationGroup
    e: np.ndarray = field(compare=False)
    f: np.ndarray = field(compare=False)
    nullspace_checked: bool = True
    variant = "two_sided"


@dataclass(frozen=True)
class ConvexPlane:
    """Plane curve ``(t, gamma(t))`` with analytic first and second derivatives.

    ``name`` identifies a builtin so the curve can be serialised; ``gamma``,
    ``d1`` and ``d2`` are vectorised callables.
    """

    name: str
    gamma: Callable = field(compare=False, repr=False)
    d1: Callable = field(compare=False, repr=False)
    d2: Callable = field(compare=False, repr=False)
    variant = "convex_plane"

    def inverse_positive(self, u):
        """Solve ``gamma(t) = u`` for ``t > 0`` (gamma increasing on t > 0)."""
        u = np.asarray(u, dtype=float)
        lo = np.full(u.shape, 0.0)
        hi = np.ones(u.shape)
        for _ in range(2000):
            short = self.gamma(hi) < u
            if not short.any():
                break
            hi = np.where(short, hi * 2.0, hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self.gamma(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-15 * np.maximum(hi, 1e-300)):
                break
        return 0.5 * (lo + hi)


def power_curve(alpha: float) -> ConvexPlane:
    """``gamma(t) = sgn(t) |t|^alpha``."""
    alpha = float(alpha)

    def g(t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) * np.abs(t) ** alpha

    def d1(t):
        return alpha * np.abs(np.asarray(t, dtype=float)) ** (alpha - 1)

    def d2(t):
        t = np.asarray(t, dtype=float)
        return alpha * (alpha - 1) * np.sign(t) * np.abs(t) ** (alpha - 2)

    c = ConvexPlane(f"pow:{alpha:g}", g, d1, d2)
    # gamma(t) = u inverts in closed form
    object.__setattr__(c, "inverse_positive", lambda u: np.asarray(u, float) ** (1.0 / alpha))
    return c


def t_exp_inv_curve() -> ConvexPlane:
    """``gamma(t) = t e^{-1/|t|}`` (flat at the origin)."""

    def g(t):
        t = np.asarray(t, dtype=float)
        at = np.abs(t)
        with np.errstate(divide="ignore"):
            return np.where(at > 0, t * np.exp(-1.0 / np.where(at > 0, at, 1.0)), 0.0)

    def d1(t):
        at = np.abs(np.asarray(t, dtype=float))
        safe = np.where(at > 0, at, 1.0)
        return np.where(at > 0, np.exp(-1.0 / safe) * (1.0 + 1.0 / safe), 0.0)

    def d2(t):
        t = np.asarray(t, dtype=float)
        at = np.abs(t)
        safe = np.where(at > 0, at, 1.0)
        return np.where(at > 0, np.sign(t) * np.exp(-1.0 / safe) / safe ** 3, 0.0)

    return ConvexPlane("t_exp_inv", g, d1, d2)


def convex_from_name(name: str) -> ConvexPlane:
    if name == "t_exp_inv":
        return t_exp_inv_curve()
    if name.startswith("pow:"):
        return power_curve(float(name.split(":", 1)[1]))
    raise ValueError(f"unknown convex curve {name!r}; use 'pow:<alpha>' or 't_exp_inv'")


def make_two_sided(group: DilationGroup, e, f) -> TwoSided:
    """Build a two-sided homogeneous curve, checking the null-space condition.

    With pairwise distinct exponents, ``xi . delta_t e`` vanishes identically
    exactly when ``xi_i e_i = 0`` for every ``i``, so the condition reduces
    to ``e_i = 0 <=> f_i = 0``.  With repeated exponents the reduction fails
    and the check is skipped (``nullspace_checked=False``).
    """
    e = np.asarray(e, dtype=float)
    f = np.asarray(f, dtype=float)
    if e.shape != (group.n,) or f.shape != (group.n,):
        raise DomainError(f"e and f must be vectors in R^{group.n}")
    if not (np.all(np.isfinite(e)) and np.all(np.isfinite(f))):
        raise DomainError("e and f must be finite")
    if not group.distinct:
        return TwoSided(group, e, f, nullspace_checked=False)
    for i in range(group.n):
        if (e[i] == 0) != (f[i] == 0):
            raise CurveValidationError(
                f"null spaces differ: coordinate {i + 1} has e={e[i]:g}, f={f[i]:g}"
            )
    return TwoSided(group, e, f)


def eval_curve(curve, t) -> np.ndarray:
    """Curve points for each ``t``; result has shape ``t.shape + (n,)``."""
    t = np.asarray(t, dtype=float)
    if isinstance(curve, ConvexPlane):
        return np.stack([t, curve.gamma(t)], axis=-1)
    a = curve.group.a
    at = np.abs(t)[..., None] ** a
    if isinstance(curve, Homogeneous):
        return np.sign(t)[..., None] * at
    if isinstance(curve, TwoSided):
        pos = at * curve.e
        neg = at * curve.f
        out = np.where((t > 0)[..., None], pos, neg)
        return np.where((t == 0)[..., None], 0.0, out)
    raise TypeError(f"not a curve: {curve!r}")


def curve_group(curve) -> DilationGroup:
    if isinstance(curve, (Homogeneous, TwoSided)):
        return curve.group
    raise TypeError("convex plane curves carry no dilation group")


def side_vectors(curve):
    """``(e, f)`` with ``Gamma(s) = delta_s e`` and ``Gamma(-s) = delta_s f`` for ``s > 0``."""
    if isinstance(curve, Homogeneous):
        n = curve.group.n
        return np.ones(n), -np.ones(n)
    if isinstance(curve, TwoSided):
        return curve.e, curve.f
    raise TypeError("side vectors exist only for homogeneous curves")


@dataclass
class ConvexityReport:
    is_odd: bool
    is_increasing: bool
    is_convex: bool
    second_derivative_monotone: bool
    best_C: float
    C_flagged: bool
    grid_spec: dict

    @property
    def all_hold(self) -> bool:
        return (self.is_odd and self.is_increasing and self.is_convex
                and self.second_derivative_monotone and not self.C_flagged)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["best_C"] = None if math.isinf(self.best_C) else self.best_C
        d["all_hold"] = self.all_hold
        return d


def log_grid(lo=1e-3, hi=1e3, count=2048) -> np.ndarray:
    return np.geomspace(lo, hi, count)


def validate_convex_curve(gamma, t_grid=None) -> ConvexityReport:
    """Sampled evidence for the hypotheses on ``gamma`` (not a proof).

    ``gamma`` is a :class:`ConvexPlane`; ``best_C`` is the max over the grid
    of ``gamma'(t) / (t gamma''(t))``, reported as ``inf`` (and flagged)
    where ``gamma''`` vanishes while ``gamma'`` does not.
    """
    t = log_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise DomainError("t_grid must be a 1-d array with at least two points")
    if np.any(t <= 0) or not np.all(np.isfinite(t)):
        raise DomainError("t_grid must be strictly positive")
    if np.any(np.diff(t) <= 0):
        raise DomainError("t_grid must be sorted increasing")
    g, g1, g2 = gamma.gamma(t), gamma.d1(t), gamma.d2(t)
    gm = gamma.gamma(-t)
    scale = np.maximum(np.abs(g), 1e-300)
    is_odd = bool(np.all(np.abs(gm + g) <= 1e-12 * scale) and abs(float(gamma.gamma(np.array(0.0)))) == 0.0)
    is_increasing = bool(np.all(g1 >= 0) and np.all(np.diff(g) >= -1e-15 * scale[1:]))
    is_convex = bool(np.all(g2 >= 0))
    d = np.diff(g2)
    tol = 1e-12 * np.maximum(np.abs(g2[1:]), np.abs(g2[:-1]))
    monotone = bool(np.all(d >= -tol) or np.all(d <= tol))
    zero2 = g2 <= 0
    if np.any(zero2 & (g1 > 0)):
        best, flagged = math.inf, True
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(zero2, 0.0, g1 / (t * g2))
        best, flagged = float(np.max(ratio)), False
    spec = {"kind": "explicit", "lo": float(t[0]), "hi": float(t[-1]), "count": int(t.size)}
    return ConvexityReport(is_odd, is_increasing, is_convex, monotone, best, flagged, spec)


def curve_to_dict(curve) -> dict:
    if isinstance(curve, ConvexPlane):
        return {"variant": "convex_plane", "gamma": curve.name}
    if isinstance(curve, Homogeneous):
        return {"variant": "homogeneous", "alpha": list(curve.group.alpha)}
    if isinstance(curve, TwoSided):
        return {"variant": "two_sided", "alpha": list(curve.group.alpha),
                "e": curve.e.tolist(), "f": curve.f.tolist()}
    raise TypeError(f"not a curve: {curve!r}")


def curve_from_dict(data: dict):
    v = data.get("variant")
    if v == "convex_plane":
        return convex_from_name(data["gamma"])
    if v == "homogeneous":
        return Homogeneous(DilationGroup(data["alpha"]))
    if v == "two_sided":
        return make_two_sided(DilationGroup(data["alpha"]), data["e"], data["f"])
    raise ValueError(f"unknown curve variant {v!r}")
