"""Verification backbone: quadrature, finite differences, residuals, norms.

Integration over the punctured disc {|z| < R} minus small discs around the
solenoids uses a smooth partition: a radial cutoff localizes the integrand
near each solenoid (integrated in local polar coordinates with geometric
grading toward the singularity) and the smooth remainder is integrated on a
background polar grid.  Summation order is fixed so results are reproducible
at fixed panel counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .field import FieldConfig
from .modes import (
    SPIN_UP,
    UnrepresentableModeError,
    ZeroMode,
    ZeroModeBasis,
    evaluate_mode,
    gauge_transform_mode,
    mode_local_exponent,
    mode_tail_exponent,
)
from .potential import PotentialEvaluator


class QuadratureError(RuntimeError):
    """Quadrature could not meet its target within the panel budget."""


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def _cutoff(r, rho):
    """1 on r <= rho/2, smoothly (C^2) down to 0 at r = rho."""
    return 1.0 - _smoothstep((np.asarray(r, dtype=float) - rho / 2) / (rho / 2))


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel layout for integrals over the punctured disc of radius R."""

    centers: tuple[complex, ...]
    inner_radii: tuple[float, ...]
    local_radii: tuple[float, ...]
    outer_radius: float
    n_radial_panels: int = 24
    n_local_panels: int = 24
    gauss_order: int = 8
    n_angular: int = 128
    target_tol: float = 1e-3

    def __post_init__(self):
        if any(e <= 0 for e in self.inner_radii):
            raise ValueError("exclusion radii must be positive")
        if any(e >= rho / 2 for e, rho in zip(self.inner_radii, self.local_radii)):
            raise ValueError("exclusion radii must stay below half the local radii")
        for i, ci in enumerate(self.centers):
            if abs(ci) + self.local_radii[i] > self.outer_radius:
                raise ValueError("local discs must fit inside the outer disc")
            for k in range(i + 1, len(self.centers)):
                if abs(ci - self.centers[k]) < self.local_radii[i] + self.local_radii[k]:
                    raise ValueError("local discs around singular points overlap")

    @classmethod
    def for_config(
        cls,
        config: FieldConfig,
        outer_radius: float | None = None,
        inner_radius: float = 1e-3,
        **kwargs,
    ) -> "QuadratureSpec":
        centers = tuple(config.solenoid_positions())
        support = 0.0
        for b in config.bumps:
            support = max(support, abs(b.center) + b.radius)
        for c in centers:
            support = max(support, abs(c))
        if outer_radius is None:
            outer_radius = 2.0 * support + 10.0
        local = []
        for i, ci in enumerate(centers):
            gap = outer_radius - abs(ci)
            for k, ck in enumerate(centers):
                if k != i:
                    gap = min(gap, abs(ci - ck) / 2)
            local.append(min(0.9 * gap, 1.0))
        eps = tuple(min(inner_radius, rho / 4) for rho in local)
        return cls(
            centers=centers,
            inner_radii=eps,
            local_radii=tuple(local),
            outer_radius=outer_radius,
            **kwargs,
        )

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return replace(
            self,
            n_radial_panels=self.n_radial_panels * factor,
            n_local_panels=self.n_local_panels * factor,
            n_angular=self.n_angular * factor,
        )


def _panel_nodes(breaks: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on the union of panels given by breaks."""
    x, w = np.polynomial.legendre.leggauss(order)
    a = breaks[:-1][:, None]
    b = breaks[1:][:, None]
    nodes = 0.5 * (b - a) * (x[None, :] + 1.0) + a
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


def integrate_region(func, spec: QuadratureSpec) -> complex:
    """Integral of func over {|z| < R} minus the exclusion discs.

    func must accept a complex ndarray and return values of matching shape.
    """
    theta = np.linspace(0.0, 2.0 * np.pi, spec.n_angular, endpoint=False)
    dtheta = 2.0 * np.pi / spec.n_angular
    phase = np.exp(1j * theta)
    total = 0.0 + 0.0j

    for center, eps, rho in zip(spec.centers, spec.inner_radii, spec.local_radii):
        breaks = eps * (rho / eps) ** np.linspace(0.0, 1.0, spec.n_local_panels + 1)
        r, wr = _panel_nodes(breaks, spec.gauss_order)
        z = center + r[:, None] * phase[None, :]
        vals = np.asarray(func(z)) * _cutoff(r, rho)[:, None]
        total += complex(np.sum(vals * (r * wr)[:, None]) * dtheta)

    breaks = np.linspace(0.0, spec.outer_radius, spec.n_radial_panels + 1)
    r, wr = _panel_nodes(breaks, spec.gauss_order)
    z = r[:, None] * phase[None, :]
    mask = np.ones(z.shape)
    for center, rho in zip(spec.centers, spec.local_radii):
        mask = mask * (1.0 - _cutoff(np.abs(z - center), rho))
    # guard: never evaluate func inside an exclusion disc
    for center, eps in zip(spec.centers, spec.inner_radii):
        mask = np.where(np.abs(z - center) <= eps, 0.0, mask)
    vals = np.where(mask > 0, np.asarray(func(np.where(mask > 0, z, spec.outer_radius))), 0.0)
    total += complex(np.sum(vals * mask * (r * wr)[:, None]) * dtheta)
    return total


def integrate_region_checked(func, spec: QuadratureSpec, max_refinements: int = 2):
    """Integrate, refining panels until doubling changes less than target_tol."""
    value = integrate_region(func, spec)
    for _ in range(max_refinements):
        finer = spec.refined()
        new_value = integrate_region(func, finer)
        scale = max(abs(new_value), 1e-300)
        if abs(new_value - value) <= spec.target_tol * scale:
            return new_value
        value, spec = new_value, finer
    raise QuadratureError("integral did not settle within the panel budget")


def wirtinger_fd(f, z, step, order: int = 2):
    """Central-difference d/dz and d/dzbar of f at z.

    Accepts scalar or array z (and matching step).  order selects the stencil:
    2 for the three-point rule (O(step^2)), 4 for the five-point rule
    (O(step^4)), both evaluated at the same base step.
    """
    z = np.asarray(z, dtype=complex)
    step = np.asarray(step, dtype=float)
    if np.any(step <= 0):
        raise ValueError("step must be positive")
    if order == 2:
        def diff(direction):
            s = step * direction
            return (np.asarray(f(z + s)) - np.asarray(f(z - s))) / (2.0 * step)
    elif order == 4:
        def diff(direction):
            s = step * direction
            return (
                -np.asarray(f(z + 2 * s))
                + 8.0 * np.asarray(f(z + s))
                - 8.0 * np.asarray(f(z - s))
                + np.asarray(f(z - 2 * s))
            ) / (12.0 * step)
    else:
        raise ValueError(f"order must be 2 or 4, got {order}")
    dx = diff(1.0)
    dy = diff(1.0j)
    d_z = 0.5 * (dx - 1j * dy)
    d_zbar = 0.5 * (dx + 1j * dy)
    if z.ndim == 0:
        return complex(d_z), complex(d_zbar)
    return d_z, d_zbar


def kernel_residual(
    mode, evaluator: PotentialEvaluator, grid, step: float
) -> float:
    """Max over the grid of the kernel-equation defect of the mode.

    Spin up measures |d/dzbar (e^{-h} psi)| e^h, spin down |d/dz (e^h psi)| e^{-h},
    with psi and h both evaluated numerically; for a true mode this is pure
    finite-difference discretization error.
    """
    grid = np.asarray(grid, dtype=complex)
    for s in evaluator.config.solenoids:
        if np.any(np.abs(grid - s.position) < 10 * step):
            raise ValueError("grid point within 10 steps of a solenoid")
    if mode.spin == SPIN_UP:
        def g(w):
            return _eval(mode, evaluator, w) * np.exp(-evaluator.h(w))
        _, d = wirtinger_fd(g, grid, step, order=4)
        resid = np.abs(d) * np.exp(evaluator.h(grid))
    else:
        def g(w):
            return _eval(mode, evaluator, w) * np.exp(evaluator.h(w))
        d, _ = wirtinger_fd(g, grid, step, order=4)
        resid = np.abs(d) * np.exp(-evaluator.h(grid))
    return float(np.max(resid))


def _eval(mode, evaluator, z):
    if isinstance(mode, ZeroMode):
        return evaluate_mode(mode, evaluator, z)
    return mode.evaluate(evaluator, z)


def mode_scale(mode, evaluator: PotentialEvaluator, grid) -> float:
    """Max |psi| over the grid; the reference scale for relative residuals."""
    return float(np.max(np.abs(_eval(mode, evaluator, np.asarray(grid, dtype=complex)))))


@dataclass(frozen=True)
class L2Result:
    value: float
    tail_exponent: Fraction
    finite: bool
    tail_bound: float


def l2_norm_with_tail(
    mode: ZeroMode, evaluator: PotentialEvaluator, spec: QuadratureSpec
) -> L2Result:
    """Squared L2 norm over the truncated region plus an analytic tail bound.

    Finiteness is certified symbolically: the far-field exponent must be
    below -1 and every local exponent above -1; the numeric part never
    decides integrability.
    """
    e = mode_tail_exponent(mode)
    finite = e < -1 and all(
        mode_local_exponent(mode, j) > -1 for j in range(mode.config.n_solenoids)
    )
    value = float(
        integrate_region(lambda z: np.abs(_eval(mode, evaluator, z)) ** 2, spec).real
    )
    if finite:
        r = spec.outer_radius
        theta = np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
        boundary = np.abs(_eval(mode, evaluator, r * np.exp(1j * theta))) ** 2
        c = float(np.max(boundary)) * r ** (-2.0 * float(e))
        tail = 2.0 * np.pi * c * r ** (2.0 * float(e) + 2.0) / abs(2.0 * float(e) + 2.0)
        value += tail
    else:
        tail = float("inf")
    return L2Result(value, e, finite, tail)


def gram_matrix(
    basis: ZeroModeBasis, evaluator: PotentialEvaluator, spec: QuadratureSpec
) -> tuple[np.ndarray, float, float]:
    """L2 inner products of the basis modes over the truncated region.

    Modes of different spin occupy orthogonal spinor components, so their
    entries are exactly zero.  Returns (matrix, smallest, largest singular
    value).
    """
    k = len(basis.modes)
    g = np.zeros((k, k), dtype=complex)
    for a in range(k):
        for b in range(a, k):
            ma, mb = basis.modes[a], basis.modes[b]
            if ma.spin != mb.spin:
                continue
            val = integrate_region(
                lambda z: _eval(ma, evaluator, z)
                * np.conj(_eval(mb, evaluator, z)),
                spec,
            )
            g[a, b] = val
            g[b, a] = np.conj(val)
    if k == 0:
        return g, 0.0, 0.0
    s = np.linalg.svd(g, compute_uv=False)
    return g, float(s[-1]), float(s[0])


def form_value_annulus(
    psi,
    spin: str,
    evaluator: PotentialEvaluator,
    eps: float,
    outer_radius: float,
    spec: QuadratureSpec | None = None,
    fd_step_rel: float = 1e-5,
) -> float:
    """Value of the quadratic form 4 int |dbar(e^{-h} psi)|^2 e^{2h} (spin up,
    mirrored for spin down) over the punctured disc with exclusion radius eps.

    psi is any complex-valued function of z; derivatives are taken by
    central differences with a step proportional to the distance from the
    nearest singular point.
    """
    config = evaluator.config
    if spec is None:
        spec = QuadratureSpec.for_config(
            config, outer_radius=outer_radius, inner_radius=eps
        )
    else:
        spec = replace(
            spec,
            inner_radii=tuple(eps for _ in spec.centers),
            outer_radius=outer_radius,
        )

    centers = np.array(config.solenoid_positions(), dtype=complex)

    def integrand(z):
        z = np.asarray(z, dtype=complex)
        if centers.size:
            dist = np.min(
                np.abs(z[..., None] - centers[None, :]), axis=-1
            )
        else:
            dist = np.full(z.shape, outer_radius)
        step = np.maximum(fd_step_rel * outer_radius, 0.0) + 0.2 * fd_step_rel * dist
        step = np.minimum(np.maximum(step, 1e-9), 0.4 * np.maximum(dist, 1e-9))
        h = evaluator.h(z)
        if spin == SPIN_UP:
            def g(w):
                return np.asarray(psi(w)) * np.exp(-evaluator.h(w))
            _, d = wirtinger_fd(g, z, step)
            return 4.0 * np.abs(d) ** 2 * np.exp(2.0 * h)
        def g(w):
            return np.asarray(psi(w)) * np.exp(evaluator.h(w))
        d, _ = wirtinger_fd(g, z, step)
        return 4.0 * np.abs(d) ** 2 * np.exp(-2.0 * h)

    return float(integrate_region(integrand, spec).real)


def residual_sample_points(
    evaluator: PotentialEvaluator, rng, count: int = 40
) -> np.ndarray:
    """Sample points in the annulus [2.2, 3] x field scale, outside all
    supports and far from the poles, where the finite-difference truncation
    error of the kernel residual stays well below the pass threshold."""
    scale = max(1.0, evaluator.support_radius())
    r = rng.uniform(2.2 * scale, 3.0 * scale, count)
    theta = rng.uniform(0.0, 2.0 * np.pi, count)
    return r * np.exp(1j * theta)


def gauge_modulus_defect(mode: ZeroMode, evaluator: PotentialEvaluator, shifts, points) -> float:
    """Max relative modulus mismatch |psi_hat| vs |psi| under a gauge shift.

    The gauge factor is unimodular, so the moduli agree identically; the
    measured defect is pure floating-point and re-expansion error.
    """
    try:
        transformed = gauge_transform_mode(mode, shifts)
    except UnrepresentableModeError as err:
        transformed = err.factored
    shifted_eval = PotentialEvaluator(transformed.config)
    pts = np.asarray(points, dtype=complex)
    a = np.abs(_eval(mode, evaluator, pts))
    b = np.abs(_eval(transformed, shifted_eval, pts))
    scale = max(float(np.max(a)), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


@dataclass
class VerificationReport:
    """Measured values and pass/fail flags for one verification run."""

    residual_threshold: float
    gram_threshold: float
    modulus_threshold: float
    kernel_residuals: list[float] = field(default_factory=list)
    l2_values: list[float] = field(default_factory=list)
    tail_exponents: list[Fraction] = field(default_factory=list)
    gram_ratio: float | None = None
    gauge_modulus_defect: float | None = None
    sign_flip_totals: tuple[int, int] | None = None
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures
