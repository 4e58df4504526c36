"""Scalar potential of the field: h = h0 + sum_j alpha_j log|z - z_j|.

Each bump uses the fixed quartic profile B(r) = A (1 - (r/rho)^2)^2 on its
support, for which the radial Poisson problem has a closed-form solution.
Outside its support a bump contributes exactly flux * log|z - center|, the
same normalization as the defining logarithmic convolution.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .field import FieldConfig, total_flux


class SingularPointError(ValueError):
    """Evaluation requested exactly at a solenoid position."""


def bump_profile(r, radius: float):
    """Unit-amplitude C^1 profile (1 - (r/radius)^2)^2 on r < radius, else 0.

    A bump of flux_over_2pi F scaled by 6 F / radius^2 integrates to total
    flux 2 pi F, since int_0^rho r (1 - (r/rho)^2)^2 dr = rho^2 / 6.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    r = np.asarray(r, dtype=float)
    t2 = np.clip((r / radius) ** 2, 0.0, 1.0)
    out = (1.0 - t2) ** 2
    out = np.where(r < radius, out, 0.0)
    return out if out.ndim else float(out)


def _bump_radial_h(flux: float, radius: float, r):
    """Radial potential u(r) of a single bump, with u = flux * log r outside.

    Inside the support, integrating u'(r) = F(r)/r for the quartic profile
    gives a polynomial in (r/radius)^2 plus the matching constant
    flux * (log radius - 11/12).
    """
    r = np.asarray(r, dtype=float)
    t2 = (r / radius) ** 2
    inner = flux * (
        math.log(radius) - 11.0 / 12.0 + 1.5 * t2 - 0.75 * t2**2 + t2**3 / 6.0
    )
    with np.errstate(divide="ignore"):
        outer = flux * np.log(np.maximum(r, 1e-300))
    out = np.where(r < radius, inner, outer)
    return out if out.ndim else float(out)


class PotentialEvaluator:
    """Evaluates h0, h and e^{+-h} for a field configuration.

    Immutable after construction; all evaluation methods accept scalars or
    numpy arrays of complex points.
    """

    def __init__(self, config: FieldConfig):
        self.config = config
        self._bump_data = [
            (float(b.flux_over_2pi), b.radius, b.center) for b in config.bumps
        ]
        self._solenoid_data = [
            (float(s.intensity), s.position) for s in config.solenoids
        ]

    def h0(self, z):
        """Potential of the smooth part: superposition of radial bump solutions."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=float)
        for flux, radius, center in self._bump_data:
            out += _bump_radial_h(flux, radius, np.abs(z - center))
        return out if out.ndim else float(out)

    def h(self, z):
        """Full potential h0 plus the solenoid logarithms.

        Raises SingularPointError if any point coincides with a solenoid.
        """
        z = np.asarray(z, dtype=complex)
        out = np.asarray(self.h0(z), dtype=float).copy()
        for alpha, position in self._solenoid_data:
            d = np.abs(z - position)
            if np.any(d == 0.0):
                raise SingularPointError(
                    f"potential is singular at solenoid position {position}"
                )
            out = out + alpha * np.log(d)
        return out if out.ndim else float(out)

    def field_b0(self, z):
        """The smooth field B0 at z (sum of scaled bump profiles)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=float)
        for flux, radius, center in self._bump_data:
            out += (6.0 * flux / radius**2) * bump_profile(
                np.abs(z - center), radius
            )
        return out if out.ndim else float(out)

    def far_field_exponent(self) -> Fraction:
        """Exact exponent F with e^{+-h} ~ |z|^{+-F} as |z| -> infinity."""
        return total_flux(self.config)

    def local_exponent(self, j: int) -> Fraction:
        """Exact exponent a_j with e^{+-h} ~ |z - z_j|^{+-a_j} at solenoid j."""
        if not 0 <= j < self.config.n_solenoids:
            raise IndexError(f"no solenoid with index {j}")
        return self.config.solenoids[j].intensity

    def support_radius(self) -> float:
        """Radius beyond which all bump supports and solenoids lie inside."""
        r = 0.0
        for b in self.config.bumps:
            r = max(r, abs(b.center) + b.radius)
        for s in self.config.solenoids:
            r = max(r, abs(s.position))
        return r
