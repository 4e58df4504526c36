"""Asymptotic coefficients at a solenoid and approximability classification.

Near a solenoid of intensity a in (0,1), admissible functions expand into
the four power sectors r^{-a}, r^{a}, r^{a-1} and r^{1-a} (the latter two in
the first angular harmonic, e^{-i theta} for spin up and e^{+i theta} for
spin down).  The extension parameters are the ratios nu0 = c_a / c_{-a} and
nu1 = c_{1-a} / c_{a-1}, with value infinity when the denominator vanishes;
an extension is approximable by regularized fields exactly when one of the
two parameters is infinite and the other finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .field import ExtensionKind, FieldConfig
from .modes import SPIN_DOWN, SPIN_UP
from .potential import PotentialEvaluator

INFINITY = math.inf

_ZERO_THRESHOLD = 1e-8


class FitError(RuntimeError):
    """Coefficient extraction failed (ill-conditioned or unstable fit)."""


class IndeterminateRatioError(ValueError):
    """Both numerator and denominator of a nu parameter vanish."""


class UnsupportedRangeError(ValueError):
    """Requested parameters outside the treated intensity range."""


@dataclass(frozen=True)
class AsymptoticCoeffs:
    """The four expansion coefficients at a solenoid of intensity alpha."""

    c_minus_alpha: complex
    c_alpha: complex
    c_alpha_minus_1: complex
    c_1_minus_alpha: complex
    alpha: Fraction
    fit_residual: float = 0.0

    @property
    def gamma(self) -> Fraction:
        """Order of the expansion remainder: min(1 + alpha, 2 - alpha)."""
        return min(1 + self.alpha, 2 - self.alpha)

    def scale(self) -> float:
        return max(
            abs(self.c_minus_alpha),
            abs(self.c_alpha),
            abs(self.c_alpha_minus_1),
            abs(self.c_1_minus_alpha),
        )


@dataclass(frozen=True)
class NuParams:
    """Extension parameters; math.inf encodes the extended-real infinity."""

    nu0: float
    nu1: float
    spin: str


def angular_moment(sampler, r: float, k: int, nodes: int = 64) -> complex:
    """(1/2pi) integral of sampler(r, theta) e^{i k theta} d theta by the
    trapezoidal rule (spectrally accurate for smooth periodic samplers)."""
    if nodes < 16:
        raise ValueError("need at least 16 angular nodes")
    theta = np.linspace(0.0, 2.0 * np.pi, nodes, endpoint=False)
    vals = np.asarray(sampler(r, theta), dtype=complex)
    return complex(np.mean(vals * np.exp(1j * k * theta)))


def _two_term_fit(radii, values, exponents) -> tuple[complex, complex, float]:
    """Least-squares fit of values(r) against c0 r^e0 + c1 r^e1."""
    r = np.asarray(radii, dtype=float)
    a = np.column_stack([r ** exponents[0], r ** exponents[1]])
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0):
        raise FitError("degenerate fit basis")
    coeffs, *_ = np.linalg.lstsq(a / norms, np.asarray(values, dtype=complex), rcond=None)
    coeffs = coeffs / norms
    resid = float(np.linalg.norm(a @ coeffs - values))
    return complex(coeffs[0]), complex(coeffs[1]), resid


def extract_coeffs(
    sampler,
    alpha: Fraction,
    radii,
    spin: str = SPIN_UP,
    nodes: int = 64,
    stability_tol: float = 1e-4,
) -> AsymptoticCoeffs:
    """Fit the four-sector expansion of sampler(r, theta) at the origin.

    The radial zero-harmonic is fit against c_{-a} r^{-a} + c_a r^{a} and the
    first harmonic against c_{a-1} r^{a-1} + c_{1-a} r^{1-a}; the harmonic
    carries e^{-i theta} for spin up and e^{+i theta} for spin down.  The
    coefficients must be stable under dropping the largest radius.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise UnsupportedRangeError(f"alpha must be in (0, 1), got {alpha}")
    radii = sorted((float(r) for r in radii), reverse=True)
    if len(radii) < 3:
        raise FitError("need at least 3 radii")
    a = float(alpha)
    k = 1 if spin == SPIN_UP else -1

    m0 = [angular_moment(sampler, r, 0, nodes) for r in radii]
    m1 = [angular_moment(sampler, r, k, nodes) for r in radii]

    cm, cp, r0 = _two_term_fit(radii, m0, (-a, a))
    cm1, c1m, r1 = _two_term_fit(radii, m1, (a - 1.0, 1.0 - a))
    coeffs = AsymptoticCoeffs(cm, cp, cm1, c1m, alpha, fit_residual=max(r0, r1))

    # stability: drop the largest radius and compare
    cm_d, cp_d, _ = _two_term_fit(radii[1:], m0[1:], (-a, a))
    cm1_d, c1m_d, _ = _two_term_fit(radii[1:], m1[1:], (a - 1.0, 1.0 - a))
    scale = max(coeffs.scale(), 1e-300)
    drift = max(
        abs(cm - cm_d), abs(cp - cp_d), abs(cm1 - cm1_d), abs(c1m - c1m_d)
    )
    if drift > stability_tol * scale:
        raise FitError(
            f"coefficients unstable under dropping the largest radius "
            f"(relative drift {drift / scale:.2e})"
        )
    return coeffs


def _ratio(num: complex, den: complex, scale: float) -> float:
    threshold = _ZERO_THRESHOLD * max(scale, 1e-300)
    if abs(den) < threshold:
        if abs(num) < threshold:
            raise IndeterminateRatioError("both coefficients vanish; ratio 0/0")
        return INFINITY
    return float((num / den).real)


def nu_params(coeffs: AsymptoticCoeffs, spin: str) -> NuParams:
    """The ratios nu0 = c_a/c_{-a} and nu1 = c_{1-a}/c_{a-1} as extended reals."""
    scale = coeffs.scale()
    nu0 = _ratio(coeffs.c_alpha, coeffs.c_minus_alpha, scale)
    nu1 = _ratio(coeffs.c_1_minus_alpha, coeffs.c_alpha_minus_1, scale)
    return NuParams(nu0, nu1, spin)


def classify_approximable(nu: NuParams) -> bool:
    """True iff exactly one of nu0, nu1 is infinite.

    Extensions reachable as limits of regularized fields pin one parameter
    at its extreme value and leave the other free.
    """
    return math.isinf(nu.nu0) != math.isinf(nu.nu1)


def extension_reference_params(
    kind: ExtensionKind, spin: str, alpha: Fraction
) -> NuParams:
    """The known parameter values of the maximal and EV realizations."""
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise UnsupportedRangeError(f"alpha must be in (0, 1), got {alpha}")
    if kind is ExtensionKind.MAXIMAL:
        if spin == SPIN_UP:
            return NuParams(INFINITY, 0.0, spin)
        return NuParams(0.0, INFINITY, spin)
    if kind in (ExtensionKind.EV, ExtensionKind.NONREDUCED_EV):
        if not alpha < Fraction(1, 2):
            raise UnsupportedRangeError(
                f"EV parameters are only treated for alpha in (0, 1/2), got {alpha}"
            )
        if spin == SPIN_UP:
            return NuParams(INFINITY, INFINITY, spin)
        return NuParams(0.0, INFINITY, spin)
    raise ValueError(f"unknown extension kind {kind!r}")


def _plateau(r, plateau_radius: float = 0.25, support_radius: float = 0.5):
    """Smooth radial plateau: 1 inside plateau_radius, 0 beyond support_radius."""
    t = (np.asarray(r, dtype=float) - plateau_radius) / (
        support_radius - plateau_radius
    )
    t = np.clip(t, 0.0, 1.0)
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def probe_radii(scale: float = 1.0) -> list[float]:
    """Default geometric probe radii 1e-2 * 2^{-k}, k = 0..7, times scale."""
    return [1e-2 * scale * 0.5**k for k in range(8)]


def probe_extension(
    kind: ExtensionKind,
    spin: str,
    alpha: Fraction,
    evaluator: PotentialEvaluator,
    radii=None,
    pole_weight: float = 0.7,
) -> NuParams:
    """Measure the nu parameters from representative form-core elements.

    The probes realize every sector the core admits: for the maximal
    extension the spin-up core contains (plateau + c/z) e^h and the
    spin-down core (plateau + c z) e^{-h}; for the EV extension only the
    plateau element survives in spin up.  A coefficient forced to zero
    across the core maps to the corresponding extreme nu value.
    """
    alpha = Fraction(alpha)
    config = evaluator.config
    if config.n_solenoids != 1 or config.solenoids[0].position != 0:
        raise ValueError("probe requires a single solenoid at the origin")
    if config.solenoids[0].intensity != alpha:
        raise ValueError("evaluator intensity does not match requested alpha")
    if radii is None:
        radii = probe_radii()
    # sanity: reference lookup also validates the (kind, spin, alpha) range
    extension_reference_params(kind, spin, alpha)

    sgn = 1.0 if spin == SPIN_UP else -1.0
    with_pole = kind is ExtensionKind.MAXIMAL and spin == SPIN_UP
    with_linear = spin == SPIN_DOWN

    def sampler(r, theta):
        z = r * np.exp(1j * np.asarray(theta))
        weight = np.exp(sgn * evaluator.h(z))
        f = _plateau(r) * np.ones_like(z)
        if with_pole:
            f = f + pole_weight / z
        if with_linear:
            f = f + pole_weight * z
        return f * weight

    coeffs = extract_coeffs(sampler, alpha, radii, spin=spin)
    scale = coeffs.scale()
    threshold = _ZERO_THRESHOLD * max(scale, 1e-300)

    def forced_ratio(num, den):
        if abs(den) < threshold:
            return INFINITY
        if abs(num) < threshold:
            return 0.0
        return float((num / den).real)

    return NuParams(
        forced_ratio(coeffs.c_alpha, coeffs.c_minus_alpha),
        forced_ratio(coeffs.c_1_minus_alpha, coeffs.c_alpha_minus_1),
        spin,
    )


def nu_params_agree(measured: NuParams, reference: NuParams, tol: float = 1e-4) -> bool:
    """Compare measured and reference parameters (infinities must match)."""
    for m, r in ((measured.nu0, reference.nu0), (measured.nu1, reference.nu1)):
        if math.isinf(m) != math.isinf(r):
            return False
        if not math.isinf(m) and abs(m - r) > tol * max(1.0, abs(r)):
            return False
    return True
