"""Anisotropic Littlewood-Paley system built on the quasi-norm."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DilationGroup, rho
from .quadrature import smooth_cutoff


def eta_profile(s):
    """Radial profile: 1 on ``[0, 1]``, 0 on ``[2, inf)``, smooth and non-increasing."""
    return smooth_cutoff(s)


@dataclass(frozen=True)
class LPSystem:
    """``phi_hat_j(xi) = eta(2^{-j} rho(xi)) - eta(2^{1-j} rho(xi))``.

    Scaling by powers of two is exact in floating point, so the support and
    telescoping properties hold exactly rather than to solver tolerance.
    """

    group: DilationGroup
    J: int = 8

    def rho(self, xi):
        return rho(self.group, xi)

    def phi_hat_from_rho(self, j, r):
        r = np.asarray(r, dtype=float)
        return eta_profile(r * 2.0 ** (-j)) - eta_profile(r * 2.0 ** (1 - j))

    def phi_hat(self, j, xi):
        return self.phi_hat_from_rho(j, self.rho(xi))

    def chi_hat_from_rho(self, j, r, drop=()):
        bands = [k for k in (j - 1, j, j + 1) if k not in drop]
        return sum(self.phi_hat_from_rho(k, r) for k in bands)

    def chi_hat(self, j, xi, drop=()):
        return self.chi_hat_from_rho(j, self.rho(xi), drop)

    def partition_sum(self, xi, J=None):
        """``sum_{|j| <= J} phi_hat_j(xi)``, band by band (no telescoping shortcut)."""
        J = self.J if J is None else J
        r = self.rho(xi)
        return sum(self.phi_hat_from_rho(j, r) for j in range(-J, J + 1))


def phi_hat_j(system: LPSystem, j: int, xi):
    return system.phi_hat(j, xi)


def chi_hat_j(system: LPSystem, j: int, xi):
    return system.chi_hat(j, xi)


def partition_defect(system: LPSystem, xi, J=None):
    """Max of ``|sum_{|j|<=J} phi_hat_j - 1|`` over points with ``2^{1-J} <= rho <= 2^{J-1}``.

    Returns ``(defect, covered)`` where ``covered`` counts the points inside the annulus.
    """
    J = system.J if J is None else J
    xi = np.asarray(xi, dtype=float)
    r = system.rho(xi)
    inside = (r >= 2.0 ** (1 - J)) & (r <= 2.0 ** (J - 1))
    if not inside.any():
        return 0.0, 0
    total = sum(system.phi_hat_from_rho(j, r[inside]) for j in range(-J, J + 1))
    return float(np.max(np.abs(total - 1.0))), int(inside.sum())


def support_violations(system: LPSystem, j, xi) -> int:
    """Points outside ``2^{j-1} <= rho <= 2^{j+1}`` where ``phi_hat_j`` is not exactly 0."""
    r = system.rho(xi)
    v = system.phi_hat_from_rho(j, r)
    outside = (r < 2.0 ** (j - 1)) | (r > 2.0 ** (j + 1))
    return int(np.count_nonzero(v[outside]))


def reproducing_check(system: LPSystem, xi, j=0, drop=()) -> float:
    """Max over ``xi`` of ``|phi_hat_j (1 - chi_hat_j^2)|`` (0 when the identity holds).

    ``drop`` removes bands from ``chi_hat_j`` for negative controls.
    """
    r = system.rho(xi)
    phi = system.phi_hat_from_rho(j, r)
    chi = system.chi_hat_from_rho(j, r, drop)
    return float(np.max(np.abs(phi * (1.0 - chi * chi))))
