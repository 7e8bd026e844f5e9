"""Exact analytic model of a degenerating collar.

The collar around a short geodesic is the wedge quotient

    A_lam = {1 <= |z| <= e^{2 pi lam}, lam <= arg z <= pi - lam} / (z ~ e^{2 pi lam} z)

carrying the metric |dz| / Im z.  The coordinate tau = exp(i ln z / lam)
maps it to the round annulus A'_lam = {e^{-(pi-lam)/lam} <= |tau| <= e^{-1}},
a sub-annulus of the maximal annulus {e^{-pi/lam} < |tau| < 1}.  All
densities here are closed forms; nothing is solved numerically.

Convention: lam is the dilation parameter of the wedge; the core geodesic
of the model metric has length 2 pi lam.  (The source construction calls
lam itself "the length" of the core; both numbers are exposed and the
factor-of-2pi bookkeeping is deliberate, not resolved silently.)
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CollarChart",
    "AnnulusChart",
    "annulus_chart_for",
    "z_to_tau",
    "tau_to_z",
    "im_z_of_tau",
    "wedge_density",
    "annulus_hyperbolic_density",
    "punctured_disk_density",
    "collar_injectivity_radius",
    "thick_boundary_theta",
    "pointwise_m_norm",
    "m_norm_in_tau_frame",
    "thin_collar_volume",
    "thin_collar_volume_closed_form",
]

_TOL = 1e-12


@dataclass(frozen=True)
class CollarChart:
    """The wedge model A_lam of a collar with dilation parameter lam."""

    lam: float

    def __post_init__(self):
        if not 0 < self.lam < math.pi / 2:
            raise ValueError("require 0 < lam < pi/2")

    @property
    def core_length(self) -> float:
        """Length of the core geodesic in the model metric (2 pi lam)."""
        return 2.0 * math.pi * self.lam

    @property
    def core_parameter(self) -> float:
        """The bare dilation parameter lam (the source's 'length of C')."""
        return self.lam


@dataclass(frozen=True)
class AnnulusChart:
    """Round annulus (or punctured disk) in the tau coordinate.

    For a hyperbolic-annulus chart the maximal annulus it sits inside is
    {r_inner * r_outer < |tau| < 1}: the chart is the symmetric middle band.
    """

    r_inner: float
    r_outer: float
    density_kind: str = "hyperbolic-annulus"

    def __post_init__(self):
        if not 0 <= self.r_inner < self.r_outer <= 1:
            raise ValueError("require 0 <= r_inner < r_outer <= 1")
        if self.density_kind not in ("hyperbolic-annulus", "punctured-disk"):
            raise ValueError("unknown density_kind")
        if (self.density_kind == "punctured-disk") != (self.r_inner == 0.0):
            raise ValueError("punctured-disk iff r_inner == 0")


def annulus_chart_for(lam: float) -> AnnulusChart:
    """The tau-image A'_lam of the collar A_lam."""
    CollarChart(lam)
    return AnnulusChart(math.exp(-(math.pi - lam) / lam), math.exp(-1.0))


def _in_wedge(z: complex, lam: float) -> bool:
    if abs(z) < 1.0 - _TOL or abs(z) > math.exp(2 * math.pi * lam) * (1 + _TOL):
        return False
    a = cmath.phase(z) % (2 * math.pi)
    return lam - _TOL <= a <= math.pi - lam + _TOL


def z_to_tau(z: complex, lam: float) -> complex:
    """Map a wedge point to the annulus: tau = exp(i ln z / lam).

    The arg branch is [0, pi); the deck identification z ~ e^{2 pi lam} z
    is applied first, so both identified circles map to the same tau.
    """
    CollarChart(lam)
    if not _in_wedge(z, lam):
        raise ValueError("z outside the collar wedge")
    a = cmath.phase(z) % (2 * math.pi)
    r = abs(z)
    # deck representative with 1 <= |z| < e^{2 pi lam}
    if r >= math.exp(2 * math.pi * lam) * (1 - _TOL):
        r = r / math.exp(2 * math.pi * lam)
    ln_z = complex(math.log(r), a)
    return cmath.exp(1j * ln_z / lam)


def tau_to_z(tau: complex, lam: float) -> complex:
    """Inverse of z_to_tau with arg(tau) taken in [0, 2 pi)."""
    CollarChart(lam)
    chart = annulus_chart_for(lam)
    r = abs(tau)
    if not chart.r_inner * (1 - _TOL) <= r <= chart.r_outer * (1 + _TOL):
        raise ValueError("tau outside the annulus A'_lam")
    ln_tau = complex(math.log(r), cmath.phase(tau) % (2 * math.pi))
    return cmath.exp(-1j * lam * ln_tau)


def im_z_of_tau(tau: complex, lam: float) -> float:
    """Im(z) of the wedge point over tau: -exp(lam arg tau) sin(lam ln |tau|)."""
    CollarChart(lam)
    if tau == 0:
        raise ValueError("tau must be nonzero")
    return -math.exp(lam * (cmath.phase(tau) % (2 * math.pi))) * math.sin(
        lam * math.log(abs(tau))
    )


def wedge_density(z: complex) -> float:
    """Hyperbolic density 1/Im z of the upper half plane (the wedge metric)."""
    y = z.imag
    if y <= 0:
        raise ValueError("z must lie in the upper half plane")
    return 1.0 / y


def annulus_hyperbolic_density(tau: complex, chart: AnnulusChart) -> float:
    """Curvature -1 density at tau for the chart's annulus or punctured disk.

    Annulus {r < |tau| < 1} with r = r_inner * r_outer:
        rho = (pi/L) / (|tau| sin(pi ln|tau| / ln r)),  L = ln(1/r).
    Punctured disk:  rho = 1 / (|tau| ln(1/|tau|)).
    """
    r = abs(tau)
    if not chart.r_inner < r < chart.r_outer:
        raise ValueError("tau not strictly inside the chart")
    if chart.density_kind == "punctured-disk":
        return 1.0 / (r * math.log(1.0 / r))
    r_full = chart.r_inner * chart.r_outer
    L = -math.log(r_full)
    return (math.pi / L) / (r * math.sin(math.pi * math.log(r) / math.log(r_full)))


def punctured_disk_density(tau: complex) -> float:
    """Cusp density 1/(|tau| ln(1/|tau|)) on the punctured unit disk."""
    r = abs(tau)
    if not 0 < r < 1:
        raise ValueError("tau must lie in the punctured unit disk")
    return 1.0 / (r * math.log(1.0 / r))


def collar_injectivity_radius(tau: complex, lam: float) -> float:
    """Injectivity radius pi lam / sin(theta) at tau, theta = -lam ln|tau|.

    Half the length of the core-parallel loop through tau; minimal at the
    core theta = pi/2 where it equals pi lam.
    """
    chart = annulus_chart_for(lam)
    r = abs(tau)
    if not chart.r_inner * (1 - _TOL) <= r <= chart.r_outer * (1 + _TOL):
        raise ValueError("tau outside the annulus A'_lam")
    theta = -lam * math.log(r)
    return math.pi * lam / math.sin(theta)


def thick_boundary_theta(lam: float, epsilon: float) -> float:
    """Angle theta in (0, pi/2) where inj == epsilon: sin(theta) = pi lam / epsilon.

    Rejects collars that are entirely thick (pi lam >= epsilon).
    """
    CollarChart(lam)
    s = math.pi * lam / epsilon
    if s >= 1.0:
        raise ValueError("collar entirely thick: pi*lam >= epsilon")
    return math.asin(s)


def pointwise_m_norm(f_value: complex, z: complex, m: int) -> float:
    """|eta|_omega = (Im z)^m |f(z)| for eta = f(z) dz^m on the wedge."""
    if m < 1:
        raise ValueError("m must be >= 1")
    y = z.imag
    if y <= 0:
        raise ValueError("Im z must be positive")
    return y**m * abs(f_value)


def m_norm_in_tau_frame(u_value: complex, tau: complex, lam: float, m: int) -> float:
    """Pointwise norm of eta = u(tau) (dtau/tau)^m under the wedge metric.

    Chain rule dz/dtau = z lam / (i tau) turns (dtau/tau)^m into
    (dz / (i lam z))^m, so |eta|_omega = |u| (Im z / (lam |z|))^m.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    y = im_z_of_tau(tau, lam)
    if y <= 0:
        raise ValueError("tau maps outside the upper half plane")
    z_abs = math.exp(lam * (cmath.phase(tau) % (2 * math.pi)))
    return abs(u_value) * (y / (lam * z_abs)) ** m


def thin_collar_volume(
    lam: float, epsilon: float, n_radial: int = 64, n_angular: int = 128
) -> float:
    """Area of the thin part {inj < epsilon} of the collar, by 2D quadrature.

    Integrates the hyperbolic area form rho^2 dA over the middle band
    sin(theta) > pi lam / epsilon in (ln|tau|, arg tau) coordinates
    (Gauss-Legendre radially, trapezoid in angle).  Returns 0 when the
    collar is entirely thick.
    """
    CollarChart(lam)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if math.pi * lam >= epsilon:
        return 0.0
    theta_eps = thick_boundary_theta(lam, epsilon)
    # theta = -lam * ell, thin band theta in (theta_eps, pi - theta_eps)
    ell_lo = -(math.pi - theta_eps) / lam
    ell_hi = -theta_eps / lam
    nodes, weights = np.polynomial.legendre.leggauss(n_radial)
    ell = 0.5 * (ell_hi - ell_lo) * nodes + 0.5 * (ell_hi + ell_lo)
    w_ell = 0.5 * (ell_hi - ell_lo) * weights
    theta = -lam * ell
    # integrand of rho^2 |tau|^2 d(ell) d(psi) = lam^2 / sin^2(theta)
    radial = np.sum(w_ell * lam**2 / np.sin(theta) ** 2)
    psi_weight = 2.0 * math.pi / n_angular
    return float(radial * psi_weight * n_angular)


def thin_collar_volume_closed_form(lam: float, epsilon: float) -> float:
    """Closed-form thin-collar area 4 pi lam cot(theta_eps) (oracle for the 2D rule)."""
    CollarChart(lam)
    if math.pi * lam >= epsilon:
        return 0.0
    theta_eps = thick_boundary_theta(lam, epsilon)
    return 4.0 * math.pi * lam / math.tan(theta_eps)
