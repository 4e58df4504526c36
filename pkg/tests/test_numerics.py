"""Quadrature, finite differences, kernel residuals and norm estimates."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from pauliab import (
    Bump,
    FieldConfig,
    PotentialEvaluator,
    QuadratureSpec,
    Solenoid,
    build_basis,
    form_value_annulus,
    gram_matrix,
    integrate_region,
    kernel_residual,
    l2_norm_with_tail,
    wirtinger_fd,
)
from pauliab.modes import SPIN_DOWN, SPIN_UP, ZeroMode, spin_down_monomial_mode
from pauliab.numerics import (
    integrate_region_checked,
    mode_scale,
    residual_sample_points,
)
from pauliab.potential import _bump_radial_h


def solenoid_spec(position=0j, outer=1.0, eps=1e-3):
    return QuadratureSpec(
        centers=(position,),
        inner_radii=(eps,),
        local_radii=(0.5,),
        outer_radius=outer,
    )


class TestIntegrateRegion:
    def test_disc_area_plain(self):
        spec = QuadratureSpec(
            centers=(), inner_radii=(), local_radii=(), outer_radius=2.0
        )
        val = integrate_region(lambda z: np.ones(z.shape), spec)
        assert val.real == pytest.approx(4.0 * math.pi, rel=1e-10)

    def test_disc_area_with_exclusion(self):
        # the excluded disc of radius 1e-3 removes area of order 3e-6
        val = integrate_region(lambda z: np.ones(z.shape), solenoid_spec())
        assert val.real == pytest.approx(math.pi, rel=1e-5)

    def test_gaussian(self):
        spec = QuadratureSpec(
            centers=(), inner_radii=(), local_radii=(), outer_radius=8.0
        )
        val = integrate_region(lambda z: np.exp(-np.abs(z) ** 2), spec)
        assert val.real == pytest.approx(math.pi, rel=1e-8)

    def test_integrable_singularity(self):
        # int 1/|z| over the punctured unit disc equals 2 pi (1 - eps)
        eps = 1e-3
        spec = solenoid_spec(eps=eps)
        val = integrate_region_checked(lambda z: 1.0 / np.abs(z), spec)
        assert val.real == pytest.approx(2.0 * math.pi * (1.0 - eps), rel=1e-5)

    def test_partition_does_not_change_smooth_integrals(self):
        # adding a local patch around an interior point must not move the value
        plain = QuadratureSpec(
            centers=(), inner_radii=(), local_radii=(), outer_radius=8.0
        )
        patched = solenoid_spec(position=0.3 + 0.2j, outer=8.0)
        f = lambda z: np.exp(-np.abs(z) ** 2)
        a = integrate_region(f, plain)
        b = integrate_region(f, patched)
        # only the tiny excluded disc (radius 1e-3) may move the value
        assert b.real == pytest.approx(a.real, rel=1e-5)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(
                centers=(0j,), inner_radii=(0.4,), local_radii=(0.5,), outer_radius=1.0
            )
        with pytest.raises(ValueError):
            QuadratureSpec(
                centers=(0j, 0.1 + 0j),
                inner_radii=(1e-3, 1e-3),
                local_radii=(0.5, 0.5),
                outer_radius=2.0,
            )

    def test_for_config_layout(self):
        config = FieldConfig(
            (Bump(0j, 1.0, Fraction(3, 4)),), (Solenoid(0.5 + 0j, Fraction(1, 2)),)
        )
        spec = QuadratureSpec.for_config(config)
        assert spec.outer_radius == pytest.approx(12.0)
        assert spec.centers == (0.5 + 0j,)


class TestWirtingerFd:
    def test_holomorphic(self):
        dz, dzbar = wirtinger_fd(lambda z: z**3, 1.0 + 2.0j, 1e-5)
        assert dz == pytest.approx(3.0 * (1.0 + 2.0j) ** 2, abs=1e-8)
        assert abs(dzbar) < 1e-8

    def test_antiholomorphic(self):
        z0 = 0.5 - 1.5j
        dz, dzbar = wirtinger_fd(lambda z: np.conj(z) ** 2, z0, 1e-5)
        assert dzbar == pytest.approx(2.0 * np.conj(z0), abs=1e-8)
        assert abs(dz) < 1e-8

    def test_mixed(self):
        z0 = 1.0 + 1.0j
        dz, dzbar = wirtinger_fd(lambda z: z * np.conj(z), z0, 1e-6)
        assert dz == pytest.approx(np.conj(z0), abs=1e-6)
        assert dzbar == pytest.approx(z0, abs=1e-6)

    def test_array_input(self):
        z = np.array([1.0 + 0j, 2.0j])
        dz, dzbar = wirtinger_fd(lambda w: w**2, z, 1e-5)
        assert np.allclose(dz, 2.0 * z, atol=1e-8)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            wirtinger_fd(lambda z: z, 0j, 0.0)
        with pytest.raises(ValueError):
            wirtinger_fd(lambda z: z, 0j, 1e-3, order=3)

    def test_fourth_order_stencil(self):
        # d/dzbar of a holomorphic function vanishes; the truncation term of
        # the three-point rule survives in this mismatched derivative (it is
        # what the kernel residual measures) and the five-point rule kills it
        z0 = 2.0 + 1.0j
        f = lambda z: z**7
        _, d2 = wirtinger_fd(f, z0, 1e-2, order=2)
        _, d4 = wirtinger_fd(f, z0, 1e-2, order=4)
        assert abs(d2) > 1e-2
        assert abs(d4) < 1e-3 * abs(d2)


class TestKernelResidual:
    def config(self):
        return FieldConfig(
            (Bump(0j, 1.0, Fraction(3, 4)),), (Solenoid(0j, Fraction(1, 2)),)
        )

    def test_true_mode_small_residual(self, rng):
        config = self.config()
        ev = PotentialEvaluator(config)
        mode = build_basis(config).modes[0]
        grid = residual_sample_points(ev, rng)
        step = 1e-3
        resid = kernel_residual(mode, ev, grid, step)
        scale = mode_scale(mode, ev, grid)
        assert resid / scale < 1e-6

    def test_counterfeit_mode_large_residual(self, rng):
        # conj(z) e^{h} solves nothing for spin up: residual stays order one
        config = self.config()
        ev = PotentialEvaluator(config)
        fake = ZeroMode(SPIN_UP, (0,), (0, 1), config)

        class Flipped:
            spin = SPIN_DOWN

            def factor(self, z):
                return fake.factor(z)

            def evaluate(self, evaluator, z):
                return self.factor(z) * np.exp(-evaluator.h(z))

        grid = residual_sample_points(ev, rng)
        resid = kernel_residual(Flipped(), ev, grid, 1e-3)
        scale = mode_scale(Flipped(), ev, grid)
        assert resid / scale > 1e-2

    def test_grid_near_solenoid_rejected(self):
        config = self.config()
        ev = PotentialEvaluator(config)
        mode = build_basis(config).modes[0]
        with pytest.raises(ValueError):
            kernel_residual(mode, ev, np.array([1e-4 + 0j]), 1e-3)

    def test_sample_points_live_in_annulus(self, rng):
        ev = PotentialEvaluator(self.config())
        pts = residual_sample_points(ev, rng)
        r = np.abs(pts)
        scale = max(1.0, ev.support_radius())
        assert np.all(r >= 2.2 * scale)
        assert np.all(r <= 3.0 * scale)


class TestL2NormWithTail:
    def test_radial_oracle(self):
        # single bump of flux 5/2: |psi|^2 for the constant spin-down mode is
        # e^{-2 h0(r)}, a purely radial integrand with exact closed-form tail
        config = FieldConfig((Bump(0j, 1.0, Fraction(5, 2)),), ())
        ev = PotentialEvaluator(config)
        mode = spin_down_monomial_mode(config, 0)
        spec = QuadratureSpec.for_config(config)
        result = l2_norm_with_tail(mode, ev, spec)
        assert result.finite
        assert result.tail_exponent == Fraction(-5, 2)

        R = spec.outer_radius
        body, _ = quad(
            lambda r: 2.0 * math.pi * r * math.exp(-2.0 * _bump_radial_h(2.5, 1.0, r)),
            0.0,
            R,
            points=[1.0],
        )
        tail = 2.0 * math.pi * R ** (-3.0) / 3.0
        assert result.value == pytest.approx(body + tail, rel=1e-6)

    def test_non_integrable_flagged(self):
        config = FieldConfig((Bump(0j, 1.0, Fraction(5, 2)),), ())
        mode = spin_down_monomial_mode(config, 2, check=False)
        ev = PotentialEvaluator(config)
        result = l2_norm_with_tail(mode, ev, QuadratureSpec.for_config(config))
        assert not result.finite
        assert result.tail_bound == math.inf


class TestGramMatrix:
    def config(self):
        return FieldConfig(
            (Bump(0j, 1.0, Fraction(-17, 4)),),
            (Solenoid(0.5 + 0j, Fraction(1, 2)), Solenoid(-0.5j, Fraction(1, 2))),
        )

    def test_hermitian_positive(self):
        config = self.config()
        ev = PotentialEvaluator(config)
        basis = build_basis(config)
        spec = QuadratureSpec.for_config(config)
        g, smin, smax = gram_matrix(basis, ev, spec)
        assert np.allclose(g, g.conj().T)
        assert smin > 0
        assert smin / smax > 1e-6
        eigvals = np.linalg.eigvalsh(g)
        assert np.all(eigvals > 0)

    def test_cross_spin_entries_exactly_zero(self):
        config = FieldConfig(
            (Bump(0j, 1.0, Fraction(-9, 4)),), (Solenoid(0j, Fraction(1, 2)),)
        )
        # flux -7/4: one spin-up pole mode and no spin-down; add one by hand
        ev = PotentialEvaluator(config)
        basis = build_basis(config)
        assert {m.spin for m in basis.modes} == {SPIN_UP}

        config2 = self.config()
        ev2 = PotentialEvaluator(config2)
        up = ZeroMode(SPIN_UP, (1, 0), (), config2)
        down = spin_down_monomial_mode(config2, 0, check=False)
        from pauliab.modes import ZeroModeBasis
        from pauliab.field import ModeCount

        mixed = ZeroModeBasis((up, down), ModeCount(1, 1))
        g, _, _ = gram_matrix(mixed, ev2, QuadratureSpec.for_config(config2))
        assert g[0, 1] == 0
        assert g[1, 0] == 0


class TestQuadraticForm:
    def test_true_mode_annihilated(self):
        config = FieldConfig(
            (Bump(0j, 1.0, Fraction(3, 4)),), (Solenoid(0j, Fraction(1, 2)),)
        )
        ev = PotentialEvaluator(config)
        mode = build_basis(config).modes[0]

        def psi(z):
            from pauliab.modes import evaluate_mode

            return evaluate_mode(mode, ev, z)

        val = form_value_annulus(psi, SPIN_DOWN, ev, 1e-3, 4.0)
        ref = form_value_annulus(
            lambda z: np.abs(np.asarray(z)) ** 2 * psi(z), SPIN_DOWN, ev, 1e-3, 4.0
        )
        assert val < 1e-6 * max(ref, 1.0)

    def test_known_value_for_empty_field(self):
        # with h = 0 the spin-up form of psi = conj(z) is 4 * area
        config = FieldConfig()
        ev = PotentialEvaluator(config)
        val = form_value_annulus(np.conj, SPIN_UP, ev, 1e-3, 2.0)
        assert val == pytest.approx(16.0 * math.pi, rel=1e-3)
