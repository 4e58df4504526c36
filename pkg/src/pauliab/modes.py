"""Explicit zero-mode bases for the maximal extension.

Spin-up modes have the form (sum_j c_j/(z - z_j) + polynomial(z)) * e^h and
spin-down modes (sum_j c_j/(zbar - zbar_j) + polynomial(zbar)) * e^{-h}.
Admissible pole coefficient vectors solve the Vandermonde moment constraints
sum_j c_j z_j^k = 0 for k below the decay order required by square
integrability.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import math

import numpy as np
from numpy.polynomial import polynomial as P

from .field import (
    FieldConfig,
    ModeCount,
    count_zero_modes,
    curly_bracket,
    ExtensionKind,
    gauge_shift,
    total_flux,
)
from .potential import PotentialEvaluator

SPIN_UP = "up"
SPIN_DOWN = "down"

_COEFF_TRIM = 1e-12


class NotSquareIntegrableError(ValueError):
    """A requested mode fails the symbolic decay requirement."""


class UnrepresentableModeError(ValueError):
    """Gauge transform left the pole-plus-polynomial normal form.

    The ``factored`` attribute holds a FactoredMode that still supports
    pointwise evaluation.
    """

    def __init__(self, message: str, factored: "FactoredMode"):
        super().__init__(message)
        self.factored = factored


def smallest_l(phi) -> int:
    """Smallest nonnegative integer strictly greater than phi."""
    phi = Fraction(phi)
    return max(0, math.floor(phi) + 1)


def _point_scale(points) -> float:
    return max(1.0, max((abs(p) for p in points), default=1.0))


def vandermonde_null_space(points: Sequence[complex], l: int) -> list[np.ndarray]:
    """Orthonormal basis of {c : sum_j c_j points_j^k = 0, k = 0..l-1}.

    The l x n moment matrix has exact rank l for distinct points, so the
    null space has dimension n - l.
    """
    points = [complex(p) for p in points]
    n = len(points)
    if l < 0 or l > n:
        raise ValueError(f"need 0 <= l <= {n}, got l={l}")
    scale = _point_scale(points)
    for i in range(n):
        for k in range(i + 1, n):
            if abs(points[i] - points[k]) < 1e-8 * scale:
                raise ValueError(
                    f"points {i} and {k} coincide within tolerance: "
                    f"{points[i]} vs {points[k]}"
                )
    if l == 0:
        return [np.eye(n, dtype=complex)[j] for j in range(n)]
    zs = np.array(points, dtype=complex) / scale
    m = np.vstack([zs**k for k in range(l)])
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    if s[l - 1] <= 1e-10 * s[0]:
        raise ValueError("moment matrix is numerically rank deficient")
    return [vh[k].conj() for k in range(l, n)]


def leading_order(
    coeffs: Sequence[complex], points: Sequence[complex]
) -> tuple[int, complex]:
    """Smallest l with sum_j c_j points_j^l != 0, and that sum.

    Determines the far-field decay |z|^{-l-1} of sum_j c_j/(z - points_j);
    l never exceeds n - 1 for a nonzero coefficient vector.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    points = np.asarray(points, dtype=complex)
    if coeffs.shape != points.shape:
        raise ValueError("coefficients and points must have equal length")
    cscale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if cscale == 0.0:
        raise ValueError("all pole coefficients are zero")
    n = len(coeffs)
    for l in range(n):
        s = complex(np.sum(coeffs * points**l))
        magnitude_scale = float(np.sum(np.abs(coeffs) * np.abs(points) ** l))
        if abs(s) > 1e-10 * magnitude_scale + 1e-300:
            return l, s
    raise ValueError("no nonzero moment found; coefficient vector is degenerate")


@dataclass(frozen=True)
class ZeroMode:
    """One zero mode, stored as symbolic coefficients of its analytic factor.

    For spin up the factor variable is z with simple poles at the solenoid
    positions; for spin down it is conj(z) with poles at the conjugated
    positions.  pole_coeffs has one entry per solenoid of ``config``.
    """

    spin: str
    pole_coeffs: tuple[complex, ...]
    poly_coeffs: tuple[complex, ...]
    config: FieldConfig

    def __post_init__(self):
        if self.spin not in (SPIN_UP, SPIN_DOWN):
            raise ValueError(f"spin must be 'up' or 'down', got {self.spin!r}")
        object.__setattr__(
            self, "pole_coeffs", tuple(complex(c) for c in self.pole_coeffs)
        )
        object.__setattr__(
            self, "poly_coeffs", tuple(complex(a) for a in self.poly_coeffs)
        )
        if len(self.pole_coeffs) != self.config.n_solenoids:
            raise ValueError("need one pole coefficient per solenoid")
        if not any(c != 0 for c in self.pole_coeffs + self.poly_coeffs):
            raise ValueError("mode must have at least one nonzero coefficient")

    def _variable_points(self) -> np.ndarray:
        pos = np.array(self.config.solenoid_positions(), dtype=complex)
        return pos if self.spin == SPIN_UP else pos.conj()

    def factor(self, z):
        """The analytic factor f evaluated at z (before the e^{+-h} weight)."""
        z = np.asarray(z, dtype=complex)
        x = z if self.spin == SPIN_UP else z.conj()
        out = np.zeros(np.shape(x), dtype=complex)
        if self.poly_coeffs:
            out = out + P.polyval(x, np.array(self.poly_coeffs, dtype=complex))
        for c, p in zip(self.pole_coeffs, self._variable_points()):
            if c != 0:
                out = out + c / (x - p)
        return out if out.ndim else complex(out)


@dataclass(frozen=True)
class ZeroModeBasis:
    modes: tuple[ZeroMode, ...]
    counts: ModeCount

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.modes) != self.counts.total:
            raise ValueError("basis size does not match the claimed count")


def evaluate_mode(mode: ZeroMode, evaluator: PotentialEvaluator, z):
    """Pointwise value f(z) * e^{h(z)} (spin up) or f(z) * e^{-h(z)} (spin down)."""
    h = evaluator.h(z)
    f = mode.factor(z)
    if mode.spin == SPIN_UP:
        return f * np.exp(h)
    return f * np.exp(-h)


def mode_tail_exponent(mode: ZeroMode) -> Fraction:
    """Exact far-field exponent e with |psi| ~ |z|^e; square integrable iff e < -1."""
    phi = total_flux(mode.config)
    weight = phi if mode.spin == SPIN_UP else -phi
    exponents = []
    if any(c != 0 for c in mode.pole_coeffs):
        l, _ = leading_order(mode.pole_coeffs, mode._variable_points())
        exponents.append(weight - l - 1)
    degree = -1
    for m, a in enumerate(mode.poly_coeffs):
        if a != 0:
            degree = m
    if degree >= 0:
        exponents.append(weight + degree)
    return max(exponents)


def mode_local_exponent(mode: ZeroMode, j: int) -> Fraction:
    """Exact modulus exponent of the mode at solenoid j (lower bound if the
    polynomial part happens to vanish there); locally L2 iff > -1."""
    alpha = mode.config.solenoids[j].intensity
    weight = alpha if mode.spin == SPIN_UP else -alpha
    if mode.pole_coeffs[j] != 0:
        return weight - 1
    return Fraction(weight)


def _require_square_integrable(mode: ZeroMode) -> ZeroMode:
    e = mode_tail_exponent(mode)
    if e >= -1:
        raise NotSquareIntegrableError(
            f"far-field exponent {e} >= -1; mode is not square integrable"
        )
    for j in range(mode.config.n_solenoids):
        if mode_local_exponent(mode, j) <= -1:
            raise NotSquareIntegrableError(
                f"local exponent at solenoid {j} is <= -1"
            )
    return mode


def spin_down_monomial_mode(
    config: FieldConfig, degree: int, check: bool = True
) -> ZeroMode:
    """The spin-down mode with factor conj(z)^degree; validates decay by default."""
    mode = ZeroMode(
        SPIN_DOWN,
        (0,) * config.n_solenoids,
        (0,) * degree + (1,),
        config,
    )
    return _require_square_integrable(mode) if check else mode


def build_basis(config: FieldConfig) -> ZeroModeBasis:
    """Basis of the zero-mode space of the maximal extension.

    Requires all intensities already normalized to (0, 1).  The spin-up
    space splits into three exact-rational cases on the total flux F:
    F < -1 (free poles plus polynomial), -1 <= F < n-1 (constrained poles),
    F >= n-1 (empty).  The spin-down space is spanned by monomials in
    conj(z) of degree below {F}.
    """
    for j, s in enumerate(config.solenoids):
        if not (0 < s.intensity < 1):
            raise ValueError(
                f"build_basis requires intensities in (0, 1); solenoid {j} "
                f"has intensity {s.intensity}; normalize the config first"
            )
    n = config.n_solenoids
    phi = total_flux(config)
    counts = count_zero_modes(config, ExtensionKind.MAXIMAL)
    modes: list[ZeroMode] = []

    if phi < -1:
        for j in range(n):
            pole = [0] * n
            pole[j] = 1
            modes.append(ZeroMode(SPIN_UP, pole, (), config))
        for m in range(curly_bracket(-phi)):
            modes.append(ZeroMode(SPIN_UP, (0,) * n, (0,) * m + (1,), config))
    elif phi < n - 1:
        l = smallest_l(phi)
        for vec in vandermonde_null_space(config.solenoid_positions(), l):
            modes.append(ZeroMode(SPIN_UP, tuple(vec), (), config))

    for m in range(curly_bracket(phi)):
        modes.append(spin_down_monomial_mode(config, m))

    for mode in modes:
        _require_square_integrable(mode)
    return ZeroModeBasis(tuple(modes), counts)


def basis_for_config(config: FieldConfig):
    """Zero modes of the maximal extension for an arbitrary config.

    Normalizes intensities to (0, 1), builds the basis there and gauge
    transforms each mode back; modes whose normal form does not survive the
    back-transform are returned in factored form.
    """
    from .field import normalize_to_unit_interval

    normalized, shifts = normalize_to_unit_interval(config)
    basis = build_basis(normalized)
    back = [-m for m in shifts]
    modes = []
    for mode in basis.modes:
        try:
            modes.append(gauge_transform_mode(mode, back))
        except UnrepresentableModeError as err:
            modes.append(err.factored)
    return modes, basis.counts


@dataclass(frozen=True)
class FactoredMode:
    """A gauge-transformed mode kept in factored form.

    Represents base.factor * prod_j (x - x_j)^{exponents_j} times the
    e^{+-h} weight of ``config`` (the shifted field), where x is z for spin
    up and conj(z) for spin down.
    """

    base: ZeroMode
    exponents: tuple[int, ...]
    config: FieldConfig

    @property
    def spin(self) -> str:
        return self.base.spin

    def factor(self, z):
        z = np.asarray(z, dtype=complex)
        x = z if self.spin == SPIN_UP else z.conj()
        out = np.asarray(self.base.factor(z), dtype=complex)
        pos = np.array(self.config.solenoid_positions(), dtype=complex)
        if self.spin == SPIN_DOWN:
            pos = pos.conj()
        for p, e in zip(pos, self.exponents):
            if e:
                out = out * (x - p) ** e
        return out if out.ndim else complex(out)

    def evaluate(self, evaluator: PotentialEvaluator, z):
        h = evaluator.h(z)
        f = self.factor(z)
        return f * np.exp(h if self.spin == SPIN_UP else -h)


def _polyroot_divide(num: np.ndarray, root) -> tuple[np.ndarray, complex]:
    """Synthetic division of num (low-to-high coeffs) by (x - root)."""
    quotient, remainder = P.polydiv(num, np.array([-root, 1.0], dtype=num.dtype))
    return np.atleast_1d(quotient), remainder[0]


def gauge_transform_mode(mode: ZeroMode, shifts: Sequence[int]) -> ZeroMode:
    """Re-express a mode for the integer-shifted field.

    A shift vector m multiplies the spin-up factor by prod (z - z_j)^{-m_j}
    and the spin-down factor by prod (conj(z) - conj(z_j))^{m_j}.  The result
    is re-expanded into simple poles plus polynomial; when the product has a
    pole of order two or more an UnrepresentableModeError is raised carrying
    the factored form.
    """
    config = mode.config
    if len(shifts) != config.n_solenoids:
        raise ValueError("need one shift per solenoid")
    shifts = [int(m) for m in shifts]
    new_config = gauge_shift(config, shifts)
    sign = -1 if mode.spin == SPIN_UP else 1
    exponents = [sign * m for m in shifts]
    if all(e == 0 for e in exponents):
        return ZeroMode(mode.spin, mode.pole_coeffs, mode.poly_coeffs, new_config)

    # the re-expansion runs in extended precision: repeated polynomial
    # products and divisions lose a few digits, and the expanded monomial
    # coefficients are evaluated far from the poles where that loss amplifies
    points = np.asarray(mode._variable_points(), dtype=np.clongdouble)
    n = len(points)
    one = np.ones(1, dtype=np.clongdouble)

    pole_set = [j for j in range(n) if mode.pole_coeffs[j] != 0]
    den = one
    for j in pole_set:
        den = P.polymul(den, np.array([-points[j], 1.0], dtype=np.clongdouble))
    num = (
        P.polymul(np.array(mode.poly_coeffs, dtype=np.clongdouble), den)
        if mode.poly_coeffs
        else np.zeros(1, dtype=np.clongdouble)
    )
    for j in pole_set:
        other = one
        for i in pole_set:
            if i != j:
                other = P.polymul(
                    other, np.array([-points[i], 1.0], dtype=np.clongdouble)
                )
        num = P.polyadd(num, np.clongdouble(mode.pole_coeffs[j]) * other)

    orders = {j: 1 for j in pole_set}
    for j, e in enumerate(exponents):
        if e > 0:
            for _ in range(e):
                num = P.polymul(
                    num, np.array([-points[j], 1.0], dtype=np.clongdouble)
                )
        elif e < 0:
            orders[j] = orders.get(j, 0) - e

    # cancel numerator roots against denominator factors
    for j in list(orders):
        while orders[j] > 0:
            scale = float(np.max(np.abs(num))) * max(1.0, abs(points[j])) ** max(
                0, len(num) - 1
            )
            quotient, remainder = _polyroot_divide(num, points[j])
            if abs(remainder) > 1e-9 * (scale + 1e-300):
                break
            num = quotient
            orders[j] -= 1
        if orders[j] == 0:
            del orders[j]

    factored = FactoredMode(mode, tuple(exponents), new_config)
    if any(o > 1 for o in orders.values()):
        raise UnrepresentableModeError(
            "gauge transform produces a pole of order two or more; "
            "use the attached factored form for pointwise evaluation",
            factored,
        )

    den = one
    for j in orders:
        den = P.polymul(den, np.array([-points[j], 1.0], dtype=np.clongdouble))
    quotient, remainder = P.polydiv(num, den)
    dprime = P.polyder(den)
    pole_coeffs = [0.0 + 0.0j] * n
    for j in orders:
        pole_coeffs[j] = complex(
            P.polyval(points[j], remainder) / P.polyval(points[j], dprime)
        )

    cscale = max(
        float(np.max(np.abs(quotient))),
        max((abs(c) for c in pole_coeffs), default=0.0),
        1e-300,
    )
    poly = [complex(a) if abs(a) > _COEFF_TRIM * cscale else 0j for a in quotient]
    while poly and poly[-1] == 0:
        poly.pop()
    pole_coeffs = [
        c if abs(c) > _COEFF_TRIM * cscale else 0j for c in pole_coeffs
    ]
    return ZeroMode(mode.spin, tuple(pole_coeffs), tuple(poly), new_config)
