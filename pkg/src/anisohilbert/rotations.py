"""Method of rotations in the plane.

For an odd, dilation-invariant ``Omega`` the operator

    T f(x) = int_0^inf int_{S^1} f(x - delta_t w) J(w) Omega(w) dw dt/t,
    J(w) = sum_i a_i w_i^2,

is evaluated in two ways: directly as a tensor rule (circle nodes times a
common radial rule), and as the weighted average over directions ``w`` of
Hilbert transforms along the two-sided curves ``t -> delta_t w``,
``-t -> delta_t (-w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .curves import make_two_sided
from .geometry import DilationGroup, DomainError, sphere_weight
from .quadrature import PVSpec
from .transforms import (GridField, _sample_shifted, default_transform_spec, grid_indices,
                         hilbert_direct, occupied_band, t_nodes)


@dataclass(frozen=True)
class SphereFunction:
    """``Omega(theta) = sum_k a_k cos(k theta) + b_k sin(k theta)``, ``k = 0, 1, ...``.

    ``name`` is ``"cos"``, ``"sin"``, ``"one"`` or ``"trig:a0,b0,a1,b1,..."``.
    """

    name: str
    cos_coef: tuple
    sin_coef: tuple

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for k, (a, b) in enumerate(zip(self.cos_coef, self.sin_coef)):
            out = out + a * np.cos(k * theta) + b * np.sin(k * theta)
        return out

    @property
    def is_odd(self) -> bool:
        """Odd under ``w -> -w``: only odd frequencies present."""
        return all(a == 0 and b == 0 for k, (a, b) in enumerate(zip(self.cos_coef, self.sin_coef))
                   if k % 2 == 0)

    def oddness_defect(self, nodes=64) -> float:
        th = np.linspace(0, 2 * np.pi, nodes, endpoint=False)
        return float(np.max(np.abs(self(th) + self(th + np.pi))))

    @classmethod
    def parse(cls, name: str) -> "SphereFunction":
        if name == "cos":
            return cls(name, (0.0, 1.0), (0.0, 0.0))
        if name == "sin":
            return cls(name, (0.0, 0.0), (0.0, 1.0))
        if name == "one":
            return cls(name, (1.0,), (0.0,))
        if name.startswith("trig:"):
            c = [float(v) for v in name[5:].split(",")]
            if len(c) % 2:
                c.append(0.0)
            return cls(name, tuple(c[0::2]), tuple(c[1::2]))
        raise DomainError(f"unknown sphere function {name!r}")


def seeded_odd_functions(count=3, seed=0, order=3):
    """Low-order odd trigonometric polynomials with seeded coefficients."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = []
        for k in range(order + 1):
            if k % 2:
                c.extend(rng.normal(size=2).round(6).tolist())
            else:
                c.extend([0.0, 0.0])
        out.append(SphereFunction.parse("trig:" + ",".join(f"{v:g}" for v in c)))
    return out


def circle_nodes(nodes: int):
    """Uniform angles with trapezoid weights ``2 pi / nodes``."""
    th = np.arange(nodes) * (2 * np.pi / nodes)
    return th, np.full(nodes, 2 * np.pi / nodes)


def check_size_cancellation(omega_fn, group: DilationGroup, nodes=256):
    """``(int J |Omega| dw, int J Omega dw)`` by the trapezoid rule on the circle."""
    if nodes < 16:
        raise DomainError("need at least 16 circle nodes")
    if group.n != 2:
        raise DomainError("rotations are implemented for n = 2")
    th, w = circle_nodes(nodes)
    om = np.stack([np.cos(th), np.sin(th)], axis=-1)
    J = sphere_weight(group, om)
    v = omega_fn(th)
    return float(np.sum(J * np.abs(v) * w)), float(np.sum(J * v * w))


def _as_list(omega_fns):
    if isinstance(omega_fns, (list, tuple)):
        return list(omega_fns), True
    return [omega_fns], False


def t_omega_direct(f: GridField, omega_fns, group: DilationGroup, pv_spec: Optional[PVSpec] = None,
                   nodes=256, stride=1, jacobian=True):
    """Tensor rule: circle nodes times one radial rule shared by all directions.

    Only ``t > 0`` is summed; the cancellation ``sum J Omega = 0`` over the
    symmetric node set takes the place of the principal value.  ``omega_fns``
    may be a list, in which case a list of fields is returned.
    """
    if group.n != 2 or f.ndim != 2:
        raise DomainError("rotations are implemented for n = 2")
    fns, many = _as_list(omega_fns)
    for fn in fns:
        _, cancel = check_size_cancellation(fn, group, max(nodes, 16))
        if abs(cancel) > 1e-8:
            import warnings

            warnings.warn(f"cancellation integral is {cancel:.3g}, not 0", stacklevel=2)
    spec = default_transform_spec() if pv_spec is None else pv_spec
    fmax = occupied_band(f)
    # radial rule for the worst direction: unit amplitude on every axis
    probe = make_two_sided(group, np.ones(2), -np.ones(2))
    s, w = t_nodes(probe, spec, fmax)
    th, tw = circle_nodes(nodes)
    om = np.stack([np.cos(th), np.sin(th)], axis=-1)
    J = sphere_weight(group, om) if jacobian else np.ones(nodes)
    coef = np.stack([J * fn(th) * tw for fn in fns])           # (F, nodes)
    comps = list(f.flat_components())
    idx, out_shape = grid_indices(f, stride)
    dtype = complex if np.iscomplexobj(f.values) else float
    acc = np.zeros((len(fns), len(comps), idx.shape[1]), dtype=dtype)
    a = group.a
    for j in range(nodes):
        shifts = s[:, None] ** a * om[j]
        vals = np.zeros((len(comps), idx.shape[1]), dtype=dtype)
        for k in range(0, len(s), 128):
            smp = _sample_shifted(comps, f, idx, shifts[k:k + 128])
            vals += np.einsum("b,cbp->cp", w[k:k + 128], smp)
        acc += coef[:, j, None, None] * vals[None]
    outs = [_wrap(f, out_shape, acc[i]) for i in range(len(fns))]
    return outs if many else outs[0]


def _wrap(f: GridField, out_shape, comps) -> GridField:
    g = GridField(f.half_widths, np.zeros(out_shape + f.space.shape, dtype=comps.dtype),
                  f.space, f.periodic)
    return g.with_components(comps.reshape((comps.shape[0],) + out_shape))


class DirectionalCache:
    """Hilbert transforms of one field along ``Gamma_w`` for each node angle.

    They do not depend on ``Omega``, so several ``Omega`` (and node sets
    that are subsets of each other) share them.
    """

    def __init__(self, f: GridField, group: DilationGroup, pv_spec: Optional[PVSpec] = None,
                 stride=1):
        self.f, self.group, self.stride = f, group, stride
        self.spec = default_transform_spec() if pv_spec is None else pv_spec
        self._store = {}

    def get(self, theta: float) -> np.ndarray:
        key = round(float(theta) % (2 * np.pi), 12)
        if key not in self._store:
            w = np.array([math.cos(theta), math.sin(theta)])
            curve = make_two_sided(self.group, w, -w)
            self._store[key] = hilbert_direct(self.f, curve, self.spec, stride=self.stride).flat_components()
        return self._store[key]


def t_omega_rotations(f: GridField, omega_fns, group: DilationGroup, n_dirs=64,
                      pv_spec: Optional[PVSpec] = None, stride=1, cache: Optional[DirectionalCache] = None,
                      jacobian=True):
    """``1/2 sum_w J(w) Omega(w) H_w f`` over ``n_dirs`` uniform directions.

    ``jacobian=False`` drops ``J`` (negative control).  A supplied ``cache``
    fixes the spec and output stride.
    """
    if group.n != 2 or f.ndim != 2:
        raise DomainError("rotations are implemented for n = 2")
    fns, many = _as_list(omega_fns)
    for fn in fns:
        if fn.oddness_defect() > 1e-10:
            raise DomainError(f"{fn.name} is not odd")
    if cache is None:
        cache = DirectionalCache(f, group, pv_spec, stride)
    elif cache.f is not f or cache.group != group:
        raise DomainError("directional cache was built for a different field or group")
    stride = cache.stride
    th, tw = circle_nodes(n_dirs)
    om = np.stack([np.cos(th), np.sin(th)], axis=-1)
    J = sphere_weight(group, om) if jacobian else np.ones(n_dirs)
    acc = None
    for j in range(n_dirs):
        d = cache.get(th[j])
        term = np.stack([0.5 * J[j] * fn(th[j]) * tw[j] * d for fn in fns])
        acc = term if acc is None else acc + term
    _, out_shape = grid_indices(f, stride)
    outs = [_wrap(f, out_shape, acc[i]) for i in range(len(fns))]
    return outs if many else outs[0]


def isotropic_cos_symbol(xi):
    """Symbol of the direct operator for ``a = (1, 1)``, ``Omega = cos``: ``-2 pi i xi_1/|xi|``."""
    xi = np.asarray(xi, dtype=float)
    return -2j * np.pi * xi[..., 0] / np.linalg.norm(xi, axis=-1)


def identity_report(direct: GridField, rot: GridField, n_dirs: int) -> dict:
    from .transforms import relative_l2

    l2d = float(np.sqrt(np.sum(np.abs(direct.values) ** 2)))
    l2r = float(np.sqrt(np.sum(np.abs(rot.values) ** 2)))
    return {"l2_direct": l2d, "l2_rot": l2r, "rel_discrepancy": relative_l2(rot, direct),
            "n_dirs": int(n_dirs)}
