"""Exact description of the magnetic field and flux bookkeeping.

The field is a finite sum of smooth compactly supported radial bumps plus
idealized flux lines (solenoids).  All fluxes are stored as exact rationals
so that the integer boundary cases of the counting formulas are decided
without floating-point comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence


class FieldError(ValueError):
    """Invalid field description (integer intensity, duplicate positions, ...)."""


class ExtensionKind(Enum):
    """Which self-adjoint realization the counting/domain rules refer to."""

    MAXIMAL = "maximal"
    EV = "ev"
    NONREDUCED_EV = "ev-nonreduced"


@dataclass(frozen=True)
class Solenoid:
    """An idealized flux line at ``position`` with intensity = flux / 2pi.

    The intensity must not be an integer: an integer flux line is gauge
    equivalent to no flux line at all and is excluded from the model.
    """

    position: complex
    intensity: Fraction

    def __post_init__(self):
        object.__setattr__(self, "position", complex(self.position))
        object.__setattr__(self, "intensity", Fraction(self.intensity))
        if self.intensity.denominator == 1:
            raise FieldError(
                f"solenoid intensity must be non-integer, got {self.intensity}"
            )


@dataclass(frozen=True)
class Bump:
    """A radial C^1 bump of total flux ``2*pi*flux_over_2pi`` supported on
    the disc of given radius around ``center``."""

    center: complex
    radius: float
    flux_over_2pi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "flux_over_2pi", Fraction(self.flux_over_2pi))
        if not self.radius > 0:
            raise FieldError(f"bump radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class FieldConfig:
    """A magnetic field: smooth bumps plus solenoids at distinct points."""

    bumps: tuple[Bump, ...] = ()
    solenoids: tuple[Solenoid, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "bumps", tuple(self.bumps))
        object.__setattr__(self, "solenoids", tuple(self.solenoids))
        positions = [s.position for s in self.solenoids]
        for i in range(len(positions)):
            for k in range(i + 1, len(positions)):
                if positions[i] == positions[k]:
                    raise FieldError(
                        f"solenoid positions must be distinct, got repeated "
                        f"{positions[i]}"
                    )

    @property
    def n_solenoids(self) -> int:
        return len(self.solenoids)

    def solenoid_positions(self) -> list[complex]:
        return [s.position for s in self.solenoids]

    def intensities(self) -> list[Fraction]:
        return [s.intensity for s in self.solenoids]


@dataclass(frozen=True)
class ModeCount:
    """Zero-mode counts per spinor component."""

    spin_up: int
    spin_down: int

    @property
    def total(self) -> int:
        return self.spin_up + self.spin_down


def curly_bracket(x) -> int:
    """The counting primitive: 0 for x <= 1, otherwise the largest integer
    strictly less than x."""
    x = Fraction(x)
    if x <= 1:
        return 0
    if x.denominator == 1:
        return x.numerator - 1
    return math.floor(x)


def total_flux(config: FieldConfig) -> Fraction:
    """Exact total flux / 2pi: bump fluxes plus solenoid intensities."""
    return sum(
        (b.flux_over_2pi for b in config.bumps), Fraction(0)
    ) + sum((s.intensity for s in config.solenoids), Fraction(0))


def regular_flux(config: FieldConfig) -> Fraction:
    """Flux / 2pi carried by the smooth part alone."""
    return sum((b.flux_over_2pi for b in config.bumps), Fraction(0))


def gauge_shift(config: FieldConfig, shifts: Sequence[int]) -> FieldConfig:
    """Shift each solenoid intensity by an integer; bumps are unchanged."""
    if len(shifts) != config.n_solenoids:
        raise FieldError(
            f"expected {config.n_solenoids} shifts, got {len(shifts)}"
        )
    solenoids = tuple(
        Solenoid(s.position, s.intensity + int(m))
        for s, m in zip(config.solenoids, shifts)
    )
    return FieldConfig(config.bumps, solenoids)


def normalize_to_unit_interval(config: FieldConfig) -> tuple[FieldConfig, list[int]]:
    """Gauge-shift every intensity into (0, 1).

    Returns the shifted config and the integer shifts applied, so modes can
    be transformed back afterwards.
    """
    shifts = [-math.floor(s.intensity) for s in config.solenoids]
    return gauge_shift(config, shifts), shifts


def reduce_to_ev_interval(config: FieldConfig) -> tuple[FieldConfig, list[int]]:
    """Gauge-shift every intensity into [-1/2, 1/2)."""
    shifts = [-math.floor(s.intensity + Fraction(1, 2)) for s in config.solenoids]
    return gauge_shift(config, shifts), shifts


def negate_field(config: FieldConfig) -> FieldConfig:
    """Reverse the direction of the field: negate all fluxes and intensities."""
    return FieldConfig(
        tuple(Bump(b.center, b.radius, -b.flux_over_2pi) for b in config.bumps),
        tuple(Solenoid(s.position, -s.intensity) for s in config.solenoids),
    )


def count_zero_modes(config: FieldConfig, kind: ExtensionKind) -> ModeCount:
    """Number of spin-up / spin-down zero modes for the chosen extension.

    Maximal: after normalizing intensities to (0,1) with n solenoids and
    total flux F, the counts are {n - F} spin-up and {F} spin-down.

    EV: after reduction to [-1/2, 1/2) with total flux F, the kernel has
    dimension {|F|}, carried entirely by one spinor component; we place it
    spin-down for F > 0 and spin-up for F < 0.

    NonReducedEV: all intensities must lie in (-1, 1); counts are {-F}
    spin-up and {F} spin-down on the field as given.
    """
    n = config.n_solenoids
    if kind is ExtensionKind.MAXIMAL:
        normalized, _ = normalize_to_unit_interval(config)
        phi = total_flux(normalized)
        return ModeCount(curly_bracket(n - phi), curly_bracket(phi))
    if kind is ExtensionKind.EV:
        reduced, _ = reduce_to_ev_interval(config)
        phi = total_flux(reduced)
        total = curly_bracket(abs(phi))
        if total == 0:
            return ModeCount(0, 0)
        if phi > 0:
            return ModeCount(0, total)
        return ModeCount(total, 0)
    if kind is ExtensionKind.NONREDUCED_EV:
        for j, s in enumerate(config.solenoids):
            if not (-1 < s.intensity < 1):
                raise FieldError(
                    f"non-reduced EV extension requires intensities in (-1, 1); "
                    f"solenoid {j} has intensity {s.intensity}"
                )
        phi = total_flux(config)
        return ModeCount(curly_bracket(-phi), curly_bracket(phi))
    raise FieldError(f"unknown extension kind {kind!r}")
