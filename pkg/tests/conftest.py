"""Shared helpers: seeded random field configurations."""

from fractions import Fraction

import numpy as np
import pytest

from pauliab import Bump, FieldConfig, Solenoid


def random_rational(rng, lo, hi, max_den=12, integer_ok=False):
    """Random rational in (lo, hi); non-integer unless integer_ok."""
    while True:
        den = int(rng.integers(1 if integer_ok else 2, max_den + 1))
        num = int(rng.integers(lo * den, hi * den + 1))
        f = Fraction(num, den)
        if lo < f < hi and (integer_ok or f.denominator > 1):
            return f


def random_config(rng, max_solenoids=5):
    """A bump of rational flux in [-4, 4] plus up to max_solenoids solenoids
    with non-integer rational intensities in (-3, 3)."""
    n = int(rng.integers(0, max_solenoids + 1))
    solenoids = []
    positions = []
    while len(solenoids) < n:
        z = complex(*rng.uniform(-2, 2, 2))
        if all(abs(z - p) > 0.3 for p in positions):
            positions.append(z)
            solenoids.append(Solenoid(z, random_rational(rng, -3, 3)))
    phi0 = Fraction(int(rng.integers(-16, 17)), 4)
    bumps = (
        Bump(complex(*rng.uniform(-1, 1, 2)), float(rng.uniform(0.5, 2.0)), phi0),
    )
    return FieldConfig(bumps, tuple(solenoids))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def exact_pole_sum(coeffs, points, z):
    """Sum of c_j / (z - z_j) in exact rational arithmetic.

    Far outside the point cloud the sum is many orders below the individual
    terms, so a double-precision evaluation is pure cancellation noise; every
    float is converted to an exact fraction and only the result is rounded.
    """
    def pair(w):
        w = complex(w)
        return (Fraction(w.real), Fraction(w.imag))

    total = (Fraction(0), Fraction(0))
    zr, zi = pair(z)
    for c, p in zip(coeffs, points):
        cr, ci = pair(c)
        pr, pi = pair(p)
        dr, di = zr - pr, zi - pi
        den = dr * dr + di * di
        total = (
            total[0] + (cr * dr + ci * di) / den,
            total[1] + (ci * dr - cr * di) / den,
        )
    return complex(float(total[0]), float(total[1]))


def convolution_h0(config, z):
    """Independent oracle for the smooth potential: numeric 2D quadrature of
    (1/2pi) int B0(w) log|z - w| dA(w) in polar coordinates per bump."""
    from scipy.integrate import quad

    total = 0.0
    for b in config.bumps:
        flux = float(b.flux_over_2pi)
        rho = b.radius
        amp = 6.0 * flux / rho**2
        d = abs(z - b.center)

        def inner(r):
            def f(theta):
                return np.log(abs(d - r * np.exp(1j * theta)))

            val, _ = quad(f, 0.0, 2.0 * np.pi, limit=200)
            return val / (2.0 * np.pi)

        def outer(r):
            return amp * (1.0 - (r / rho) ** 2) ** 2 * r * inner(r)

        points = [d] if 0.0 < d < rho else None
        val, _ = quad(outer, 0.0, rho, points=points, limit=200)
        total += val
    return total
