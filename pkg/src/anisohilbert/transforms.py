"""Hilbert transforms along curves on grids of vector- or matrix-valued samples.

Two routes are provided and used as mutual oracles:

* ``hilbert_direct`` evaluates ``p.v. int f(x - Gamma(t)) dt/t`` at grid
  points by a paired quadrature in ``t``, reading ``f`` between grid points
  by multilinear interpolation;
* ``hilbert_fourier`` multiplies the discrete Fourier coefficients of each
  value coordinate by the scalar multiplier ``m_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.ndimage import map_coordinates

from .curves import ConvexPlane, Homogeneous, TwoSided, side_vectors
from .geometry import DilationGroup, DomainError, polar
from .quadrature import PVSpec, outer_window

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


# ---------------------------------------------------------------------------
# value spaces


@dataclass(frozen=True)
class ValueSpace:
    """A finite-dimensional normed space: ``Real``, ``l_q^m`` or Schatten ``S_p^m``."""

    tag: str = "Real"
    exponent: float = 2.0
    m: int = 1

    def __post_init__(self):
        if self.tag not in ("Real", "SequenceLq", "SchattenP"):
            raise DomainError(f"unknown value space {self.tag!r}")
        if self.tag != "Real":
            if not 1.0 < self.exponent < math.inf:
                raise DomainError("exponent must lie in (1, inf)")
            if self.m < 1:
                raise DomainError("dimension must be positive")

    @property
    def shape(self) -> tuple:
        return {"Real": (), "SequenceLq": (self.m,), "SchattenP": (self.m, self.m)}[self.tag]

    @property
    def components(self) -> int:
        return int(np.prod(self.shape)) if self.shape else 1

    def norm(self, v):
        """Norm of each value; ``v`` has the value shape as its trailing axes."""
        v = np.asarray(v)
        if self.tag == "Real":
            return np.abs(v)
        if self.tag == "SequenceLq":
            return (np.abs(v) ** self.exponent).sum(axis=-1) ** (1.0 / self.exponent)
        s = np.linalg.svd(v, compute_uv=False)
        return (s ** self.exponent).sum(axis=-1) ** (1.0 / self.exponent)

    def label(self) -> str:
        if self.tag == "Real":
            return "Real"
        short = "lq" if self.tag == "SequenceLq" else "S"
        return f"{short}:{self.exponent:g}:{self.m}"

    @classmethod
    def parse(cls, text: str) -> "ValueSpace":
        """``Real``, ``lq:<q>:<m>`` or ``S:<p>:<m>``."""
        if text in ("Real", "real"):
            return cls()
        kind, e, m = text.split(":")
        tag = {"lq": "SequenceLq", "S": "SchattenP"}.get(kind)
        if tag is None:
            raise DomainError(f"unknown value space {text!r}")
        return cls(tag, float(e), int(m))


@dataclass
class GridField:
    """Samples on the box ``prod [-L_i, L_i)`` with ``N_i`` points per axis.

    ``values`` has shape ``shape + space.shape``.  Periodic fields wrap.
    """

    half_widths: tuple
    values: np.ndarray
    space: ValueSpace = field(default_factory=ValueSpace)
    periodic: bool = True

    def __post_init__(self):
        self.half_widths = tuple(float(h) for h in self.half_widths)
        self.values = np.asarray(self.values)
        n = len(self.half_widths)
        if self.values.shape[n:] != self.space.shape:
            raise DomainError("value shape does not match the value space")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field values must be finite")

    @property
    def shape(self) -> tuple:
        return self.values.shape[: len(self.half_widths)]

    @property
    def ndim(self) -> int:
        return len(self.half_widths)

    @property
    def spacing(self) -> np.ndarray:
        return 2 * np.asarray(self.half_widths) / np.asarray(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self):
        return [-h + np.arange(n) * d for h, n, d in zip(self.half_widths, self.shape, self.spacing)]

    def points(self):
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def flat_components(self) -> np.ndarray:
        """Values as ``(C,) + shape``."""
        v = self.values.reshape(self.shape + (self.space.components,))
        return np.moveaxis(v, -1, 0)

    def with_components(self, comps) -> "GridField":
        v = np.moveaxis(np.asarray(comps), 0, -1).reshape(self.shape + self.space.shape)
        return GridField(self.half_widths, v, self.space, self.periodic)

    def frequencies(self):
        return [np.fft.fftfreq(n, d=d) for n, d in zip(self.shape, self.spacing)]


def band_limited_field(shape, half_widths=None, space: ValueSpace = ValueSpace(), seed=0,
                       octave=(1, 2), complex_values=False) -> GridField:
    """Seeded real field whose Fourier modes ``k`` satisfy ``lo <= |k_i| <= hi`` on every axis.

    Modes on the coordinate axes are left out: along them the phase of
    ``f(x - Gamma(t))`` grows only through one component of the curve, which
    makes the truncated principal value converge far more slowly.
    """
    shape = tuple(int(s) for s in shape)
    half_widths = (1.0,) * len(shape) if half_widths is None else tuple(half_widths)
    rng = np.random.default_rng(seed)
    lo, hi = octave
    ks = np.arange(lo, hi + 1)
    ks = np.concatenate([-ks[::-1], ks])
    grids = np.meshgrid(*([ks] * len(shape)), indexing="ij")
    modes = np.stack([g.ravel() for g in grids], axis=-1)
    C = space.components
    coef = rng.normal(size=(len(modes), C)) + 1j * rng.normal(size=(len(modes), C))
    spec = np.zeros((C,) + shape, dtype=complex)
    for k, c in zip(modes, coef):
        idx = tuple(int(ki) % n for ki, n in zip(k, shape))
        spec[(slice(None),) + idx] += c
    axes = tuple(range(1, len(shape) + 1))
    if not complex_values:
        # symmetrise so the field is real
        spec = 0.5 * (spec + _reflect(np.conj(spec), shape))
    vals = np.fft.ifftn(spec, axes=axes) * np.prod(shape)
    if not complex_values:
        vals = vals.real
    f = GridField(half_widths, np.zeros(shape + space.shape), space)
    return f.with_components(vals)


def _reflect(spec, shape):
    """``spec[-k]`` for every mode index ``k``."""
    out = spec
    for ax, n in enumerate(shape, start=1):
        out = np.take(out, np.mod(-np.arange(n), n), axis=ax)
    return out


def single_mode_field(shape, k, half_widths=None) -> GridField:
    """``exp(2 pi i k . x / (2 L))`` as a complex scalar field."""
    shape = tuple(shape)
    half_widths = (1.0,) * len(shape) if half_widths is None else tuple(half_widths)
    f = GridField(half_widths, np.zeros(shape), ValueSpace(), True)
    X = f.points()
    phase = sum(2 * np.pi * k[i] * X[..., i] / (2 * half_widths[i]) for i in range(len(shape)))
    return GridField(half_widths, np.exp(1j * phase), ValueSpace(), True)


# ---------------------------------------------------------------------------
# direct route


def _curve_at(curve, s, side):
    """``Gamma(side * s)`` for ``s > 0``; shape ``s.shape + (n,)``."""
    s = np.asarray(s, dtype=float)
    if isinstance(curve, ConvexPlane):
        t = side * s
        return np.stack([t, curve.gamma(t)], axis=-1)
    e, f = side_vectors(curve)
    v = e if side > 0 else f
    return s[..., None] ** curve.group.a * v


def _phase_rate_bound(curve, fmax, s):
    """Bound on ``d/ds`` of ``2 pi xi . Gamma(+-s)`` over the occupied frequencies."""
    s = np.asarray(s, dtype=float)
    if isinstance(curve, ConvexPlane):
        return 2 * np.pi * (fmax[0] + fmax[1] * np.abs(curve.d1(s)))
    e, f = side_vectors(curve)
    amp = np.maximum(np.abs(e), np.abs(f))
    a = curve.group.a
    return 2 * np.pi * (fmax * amp * a * s[..., None] ** (a - 1)).sum(axis=-1)


def occupied_band(f: GridField, rel=1e-12) -> np.ndarray:
    """Largest ``|xi_i|`` per axis among Fourier modes above ``rel`` of the peak."""
    spec = np.abs(np.fft.fftn(f.flat_components(), axes=tuple(range(1, f.ndim + 1)))).max(axis=0)
    on = spec > rel * spec.max() if spec.max() > 0 else np.zeros_like(spec, bool)
    freqs = f.frequencies()
    out = []
    for ax in range(f.ndim):
        sh = [1] * f.ndim
        sh[ax] = -1
        fa = np.abs(freqs[ax]).reshape(sh) * np.ones(f.shape)
        out.append(float(fa[on].max()) if on.any() else 0.0)
    return np.asarray(out)


def default_transform_spec(R=8.0) -> PVSpec:
    """Spec used by the grid transforms: erfc window at ``R``, core below 1e-10.

    Four log shells per octave (the least ``PVSpec`` accepts) suffice
    because each shell is further cut by phase and carries 8 Gauss nodes.
    """
    return PVSpec(eps=1e-10, R=R, window="erfc", levels_per_octave=4)


def t_nodes(curve, spec: PVSpec, fmax) -> tuple:
    """Nodes ``s`` and weights for ``int_0^inf [.] ds/s`` with the window folded in.

    Log shells between ``eps`` and the end of the window are cut so that
    the phase of every occupied mode turns by at most ``pi/2`` per piece,
    and each piece gets 8 Gauss-Legendre nodes.
    """
    top = spec.R * (1.1 if spec.window == "erfc" else 1.0)
    per = spec.levels_per_octave
    n = max(1, int(math.ceil(math.log2(top / spec.eps) * per)))
    edges = spec.eps * (top / spec.eps) ** (np.arange(n + 1) / n)
    a, b = edges[:-1], edges[1:]
    rate = _phase_rate_bound(curve, fmax, b)
    pieces = np.maximum(1, np.ceil(rate * (b - a) / (np.pi / 2))).astype(int)
    aa = np.repeat(a, pieces)
    h = np.repeat((b - a) / pieces, pieces)
    j = np.concatenate([np.arange(p) for p in pieces])
    lo = aa + j * h
    s = (lo + h / 2)[:, None] + (h / 2)[:, None] * GL_NODES
    w = (h / 2)[:, None] * GL_WEIGHTS
    s, w = s.ravel(), w.ravel()
    if spec.window == "erfc":
        w = w * outer_window(s, spec.R)
    return s, w / s


def _sample_shifted(comps, f: GridField, pts_idx, shifts):
    """``f(x_p - v)`` for grid points ``pts_idx`` (``(d, P)``) and shifts ``(B, d)``.

    Returns ``(C, B, P)``.  Multilinear interpolation; periodic fields wrap.
    """
    d = f.ndim
    sp = f.spacing
    coords = pts_idx[:, None, :] - (shifts.T / sp[:, None])[:, :, None]
    coords = coords.reshape(d, -1)
    mode = "grid-wrap" if f.periodic else "constant"
    out = []
    for c in comps:
        if np.iscomplexobj(c):
            v = (map_coordinates(c.real, coords, order=1, mode=mode)
                 + 1j * map_coordinates(c.imag, coords, order=1, mode=mode))
        else:
            v = map_coordinates(c, coords, order=1, mode=mode)
        out.append(v.reshape(shifts.shape[0], -1))
    return np.stack(out)


def _check_margin(f: GridField, curve, top):
    """Non-periodic fields must vanish within ``max |Gamma(t)|`` of the boundary."""
    s = np.geomspace(1e-6, top, 400)
    reach = np.max(np.abs(np.concatenate([_curve_at(curve, s, 1), _curve_at(curve, s, -1)])), axis=0)
    X = f.points()
    nz = np.abs(f.flat_components()).max(axis=0) > 0
    if not nz.any():
        return
    for i, h in enumerate(f.half_widths):
        if np.any(np.abs(X[..., i][nz]) + reach[i] > h):
            raise DomainError(f"support plus curve reach exceeds the box on axis {i + 1}; "
                              "pad the field or make it periodic")


def grid_indices(f: GridField, stride=1):
    """Index arrays ``(d, P)`` of the output points (every ``stride``-th point per axis)."""
    ax = [np.arange(0, n, stride) for n in f.shape]
    G = np.meshgrid(*ax, indexing="ij")
    return np.stack([g.ravel() for g in G]).astype(float), tuple(len(a) for a in ax)


def hilbert_direct(f: GridField, curve, spec: Optional[PVSpec] = None, stride=1,
                   batch=64) -> GridField:
    """``p.v. int f(x - Gamma(t)) dt/t`` at every ``stride``-th grid point.

    The returned field lives on the subsampled grid (same box).
    """
    spec = default_transform_spec() if spec is None else spec
    if not f.periodic:
        _check_margin(f, curve, spec.R * 1.1)
    fmax = occupied_band(f)
    s, w = t_nodes(curve, spec, fmax)
    comps = list(f.flat_components())
    idx, out_shape = grid_indices(f, stride)
    acc = np.zeros((len(comps), idx.shape[1]), dtype=complex if np.iscomplexobj(f.values) else float)
    for k in range(0, len(s), batch):
        sb, wb = s[k:k + batch], w[k:k + batch]
        plus = _sample_shifted(comps, f, idx, _curve_at(curve, sb, 1))
        minus = _sample_shifted(comps, f, idx, _curve_at(curve, sb, -1))
        acc += np.einsum("b,cbp->cp", wb, plus - minus)
    vals = acc.reshape((len(comps),) + out_shape)
    g = GridField(f.half_widths, np.zeros(out_shape + f.space.shape, dtype=acc.dtype),
                  f.space, f.periodic)
    return g.with_components(vals)


# ---------------------------------------------------------------------------
# Fourier route


def as_homogeneous(curve):
    """``(t, sgn(t)|t|^a)`` is the homogeneous curve of the group ``(1, a)``."""
    if isinstance(curve, (Homogeneous, TwoSided)):
        return curve
    if isinstance(curve, ConvexPlane) and curve.name.startswith("pow:"):
        return Homogeneous(DilationGroup((1.0, float(curve.name.split(":", 1)[1]))))
    raise DomainError("the Fourier route needs a homogeneous curve (or a pow:<a> plane curve)")


@dataclass
class MultiplierCache:
    """``m_0`` on the dual grid of a given box and resolution.

    Frequencies are evaluated exactly while at most ``exact_limit`` are
    requested at once; larger requests (power iteration on a full grid) use
    a table of ``m_0`` on the unit circle, which suffices because ``m_0`` is
    invariant under the dilations.
    """

    curve: object
    shape: tuple
    half_widths: tuple
    exact_limit: int = 4096
    profile_size: int = 8192
    _exact: dict = field(default_factory=dict, repr=False)
    _profile: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        self.curve = as_homogeneous(self.curve)
        self.shape = tuple(self.shape)
        self.half_widths = tuple(float(h) for h in self.half_widths)

    def check(self, f: GridField):
        if tuple(f.shape) != self.shape or tuple(f.half_widths) != self.half_widths:
            raise DomainError("multiplier cache was built for a different grid")

    def frequencies(self, flat_index):
        sp = 2 * np.asarray(self.half_widths) / np.asarray(self.shape)
        ks = np.unravel_index(flat_index, self.shape)
        return np.stack([np.fft.fftfreq(n, d)[k] for n, d, k in zip(self.shape, sp, ks)], axis=-1)

    def profile(self):
        if self._profile is None:
            from .multipliers import m_z_homogeneous_many

            th = np.linspace(-np.pi, np.pi, self.profile_size, endpoint=False)
            om = np.stack([np.cos(th), np.sin(th)], axis=-1)
            vals, _ = m_z_homogeneous_many(self.curve, 0.0, om)
            self._profile = (th, vals)
        return self._profile

    def from_profile(self, xi):
        th, vals = self.profile()
        nz = np.any(xi != 0, axis=-1)
        out = np.zeros(len(xi), dtype=complex)
        _, om = polar(self.curve.group, xi[nz])
        ang = np.arctan2(om[:, 1], om[:, 0])
        tt = np.concatenate([th - 2 * np.pi, th, th + 2 * np.pi])
        vv = np.concatenate([vals] * 3)
        out[nz] = np.interp(ang, tt, vv.real) + 1j * np.interp(ang, tt, vv.imag)
        return out

    def values(self, flat_index):
        flat_index = np.asarray(flat_index)
        xi = self.frequencies(flat_index)
        if xi.ndim == 1:
            xi = xi[:, None]
        if flat_index.size > self.exact_limit:
            return self.from_profile(xi)
        from .multipliers import m_z_homogeneous_many

        missing = [i for i in flat_index.tolist() if i not in self._exact]
        if missing:
            mx = self.frequencies(np.asarray(missing))
            nz = np.any(mx != 0, axis=-1)
            vals = np.zeros(len(missing), dtype=complex)
            if nz.any():
                vals[nz], _ = m_z_homogeneous_many(self.curve, 0.0, mx[nz])
            self._exact.update(zip(missing, vals))
        return np.array([self._exact[i] for i in flat_index.tolist()])


def hilbert_fourier(f: GridField, curve, cache: Optional[MultiplierCache] = None,
                    rel=1e-13, full=False) -> GridField:
    """Multiply each value coordinate's DFT by ``m_0``; only occupied modes are evaluated
    unless ``full`` is set."""
    if not f.periodic:
        raise DomainError("the Fourier route needs a periodic field")
    cache = MultiplierCache(curve, f.shape, f.half_widths) if cache is None else cache
    cache.check(f)
    axes = tuple(range(1, f.ndim + 1))
    comps = f.flat_components()
    F = np.fft.fftn(comps, axes=axes)
    mag = np.abs(F).max(axis=0).ravel()
    if full:
        occ = np.arange(mag.size)
    else:
        occ = np.nonzero(mag > rel * mag.max())[0] if mag.max() > 0 else np.arange(0)
    mult = np.zeros(mag.size, dtype=complex)
    if occ.size:
        mult[occ] = cache.values(occ)
    G = F * mult.reshape(f.shape)[None]
    out = np.fft.ifftn(G, axes=axes)
    if not np.iscomplexobj(f.values):
        out = out.real
    return f.with_components(out)


# ---------------------------------------------------------------------------
# norms


def lp_norm(f: GridField, p: float) -> float:
    """``(cell volume * sum ||f(x)||_X^p)^{1/p}``."""
    if not 1.0 <= p < math.inf:
        raise DomainError("p must lie in [1, inf)")
    nv = f.space.norm(f.values)
    return float((f.cell_volume * np.sum(nv ** p)) ** (1.0 / p))


def relative_l2(a: GridField, b: GridField) -> float:
    """``||a - b||_2 / ||b||_2`` over all components."""
    da = np.asarray(a.values) - np.asarray(b.values)
    return float(np.sqrt(np.sum(np.abs(da) ** 2) / np.sum(np.abs(b.values) ** 2)))


def op_norm_estimate(operator: Callable, p: float, value_space: ValueSpace, trials=8, seed=0,
                     shape=(128, 128), half_widths=None, power_iterations=30, max_retries=5):
    """Largest ``||T f||_p / ||f||_p`` over seeded band-limited test fields.

    For ``p = 2`` and real scalars a power iteration on ``T`` from a seeded
    white-noise start is added; for a normal operator (a Fourier multiplier)
    ``||T^{k+1} f|| / ||T^k f||`` tends to its norm.  Returns
    ``(estimate, details)``.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    ratios = []
    for k in range(trials):
        for attempt in range(max_retries + 1):
            f = band_limited_field(shape, half_widths, value_space, seed=seed * 1000 + k + 97 * attempt)
            nf = lp_norm(f, p)
            if nf > 0:
                break
        else:
            raise DomainError("could not draw a nonzero test field")
        ratios.append(lp_norm(operator(f), p) / nf)
    details = {"trial_ratios": ratios}
    est = max(ratios)
    if p == 2 and value_space.tag == "Real":
        rng = np.random.default_rng(seed)
        hw = (1.0,) * len(shape) if half_widths is None else half_widths
        g = GridField(hw, rng.normal(size=shape), value_space)
        g = GridField(hw, g.values / lp_norm(g, 2), value_space)
        lam = 0.0
        for _ in range(power_iterations):
            h = operator(g)
            lam = lp_norm(h, 2)
            if lam == 0:
                break
            g = GridField(hw, h.values / lam, value_space)
        details["power_iteration"] = lam
        est = max(est, lam)
    return est, details


def classical_hilbert_1d(f: GridField, spec: Optional[PVSpec] = None) -> GridField:
    """Direct route for ``n = 1`` and ``Gamma(t) = t``."""
    return hilbert_direct(f, Homogeneous(DilationGroup((1.0,))), spec)
