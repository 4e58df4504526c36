"""Command-line interface: count, modes, verify, classify, potential.

Configs are JSON documents with exact rationals written as "p/q" strings and
complex coordinates as [re, im] pairs.  Reports are JSON; grid exports are
CSV with a one-line header; optional figures are rendered next to the CSV.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .field import (
    Bump,
    ExtensionKind,
    FieldConfig,
    FieldError,
    Solenoid,
    count_zero_modes,
    negate_field,
    regular_flux,
    total_flux,
)
from .modes import (
    SPIN_UP,
    FactoredMode,
    ZeroMode,
    basis_for_config,
    mode_tail_exponent,
)
from .numerics import (
    QuadratureSpec,
    VerificationReport,
    gauge_modulus_defect,
    gram_matrix,
    kernel_residual,
    l2_norm_with_tail,
    mode_scale,
    residual_sample_points,
    _eval,
)
from .boundary import (
    UnsupportedRangeError,
    classify_approximable,
    extension_reference_params,
    nu_params_agree,
    probe_extension,
)
from .modes import ZeroModeBasis, build_basis
from .field import normalize_to_unit_interval
from .potential import PotentialEvaluator


class ConfigError(ValueError):
    """Malformed configuration document; message carries the field path."""


@dataclass
class RunConfig:
    field: FieldConfig
    extension: ExtensionKind = ExtensionKind.MAXIMAL
    grid: tuple[int, int, float] | None = None
    seed: int = 0
    residual_tol: float = 1e-6
    gram_tol: float = 1e-6
    modulus_tol: float = 1e-10
    radii_scale: float = 1.0
    out: str | None = None
    figures: str | None = None


def _parse_rational(value, path: str) -> Fraction:
    try:
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, int):
            return Fraction(value)
    except (ValueError, ZeroDivisionError) as err:
        raise ConfigError(f"{path}: not a valid rational: {value!r} ({err})")
    raise ConfigError(f"{path}: rationals must be 'p/q' strings or integers, got {value!r}")


def _parse_point(value, path: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError(f"{path}: coordinates must be [re, im] pairs, got {value!r}")
    return complex(float(value[0]), float(value[1]))


def parse_field(doc: dict, path: str = "") -> FieldConfig:
    bumps = []
    for i, b in enumerate(doc.get("bumps", [])):
        p = f"{path}bumps[{i}]"
        if not isinstance(b, dict):
            raise ConfigError(f"{p}: expected an object")
        try:
            bumps.append(
                Bump(
                    _parse_point(b.get("center"), f"{p}.center"),
                    float(b.get("radius", 0)),
                    _parse_rational(b.get("flux_over_2pi"), f"{p}.flux_over_2pi"),
                )
            )
        except FieldError as err:
            raise ConfigError(f"{p}: {err}")
    solenoids = []
    for i, s in enumerate(doc.get("solenoids", [])):
        p = f"{path}solenoids[{i}]"
        if not isinstance(s, dict):
            raise ConfigError(f"{p}: expected an object")
        try:
            solenoids.append(
                Solenoid(
                    _parse_point(s.get("position"), f"{p}.position"),
                    _parse_rational(s.get("intensity"), f"{p}.intensity"),
                )
            )
        except FieldError as err:
            raise ConfigError(f"{p}.intensity: {err}")
    try:
        return FieldConfig(tuple(bumps), tuple(solenoids))
    except FieldError as err:
        raise ConfigError(f"{path}solenoids: {err}")


def parse_config(text: str) -> RunConfig:
    """Parse a JSON config document into a validated RunConfig."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"document is not valid JSON: {err}")
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object")
    run = RunConfig(field=parse_field(doc))
    if "extension" in doc:
        try:
            run.extension = ExtensionKind(doc["extension"])
        except ValueError:
            raise ConfigError(
                f"extension: expected one of "
                f"{[k.value for k in ExtensionKind]}, got {doc['extension']!r}"
            )
    if "grid" in doc:
        g = doc["grid"]
        if not (isinstance(g, list) and len(g) == 3):
            raise ConfigError("grid: expected [nx, ny, extent]")
        run.grid = (int(g[0]), int(g[1]), float(g[2]))
        if run.grid[2] <= 0:
            raise ConfigError("grid: extent must be positive")
    if "seed" in doc:
        run.seed = int(doc["seed"])
    return run


def emit_field(config: FieldConfig) -> dict:
    return {
        "bumps": [
            {
                "center": [b.center.real, b.center.imag],
                "radius": b.radius,
                "flux_over_2pi": str(b.flux_over_2pi),
            }
            for b in config.bumps
        ],
        "solenoids": [
            {
                "position": [s.position.real, s.position.imag],
                "intensity": str(s.intensity),
            }
            for s in config.solenoids
        ],
    }


def emit_config(config: FieldConfig) -> str:
    return json.dumps(emit_field(config), indent=2, sort_keys=True)


def _complex_pair(c: complex) -> list[float]:
    return [c.real, c.imag]


def _mode_document(mode) -> dict:
    if isinstance(mode, FactoredMode):
        doc = _mode_document(mode.base)
        doc["gauge_exponents"] = list(mode.exponents)
        doc["representation"] = "factored"
        return doc
    return {
        "spin": mode.spin,
        "pole_coeffs": [_complex_pair(c) for c in mode.pole_coeffs],
        "poly_coeffs": [_complex_pair(c) for c in mode.poly_coeffs],
        "representation": "pole-polynomial",
    }


def _write_report(doc: dict, out: str | None):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _grid_points(grid: tuple[int, int, float]):
    nx, ny, extent = grid
    xs = np.linspace(-extent, extent, nx)
    ys = np.linspace(-extent, extent, ny)
    zz = xs[None, :] + 1j * ys[:, None]
    return xs, ys, zz


def _exclusion_mask(zz, config: FieldConfig, radius: float = 1e-6):
    mask = np.zeros(zz.shape, dtype=bool)
    for s in config.solenoids:
        mask |= np.abs(zz - s.position) <= radius
    return mask


def cmd_count(run: RunConfig) -> int:
    config = run.field
    count = count_zero_modes(config, run.extension)
    doc = {
        "phi0": str(regular_flux(config)),
        "phi": str(total_flux(config)),
        "n": config.n_solenoids,
        "kind": run.extension.value,
        "spin_up": count.spin_up,
        "spin_down": count.spin_down,
        "total": count.total,
    }
    _write_report(doc, run.out)
    return 0


def cmd_modes(run: RunConfig) -> int:
    config = run.field
    modes, counts = basis_for_config(config)
    doc = {
        "phi": str(total_flux(config)),
        "spin_up": counts.spin_up,
        "spin_down": counts.spin_down,
        "total": counts.total,
        "modes": [_mode_document(m) for m in modes],
    }
    if run.grid is not None:
        evaluator = PotentialEvaluator(config)
        xs, ys, zz = _grid_points(run.grid)
        mask = _exclusion_mask(zz, config)
        placeholder = evaluator.support_radius() + 1.0 + 0j
        safe = np.where(mask, placeholder, zz)
        columns = ["x", "y"]
        data = [np.broadcast_to(zz.real, zz.shape), np.broadcast_to(zz.imag, zz.shape)]
        for k, mode in enumerate(modes):
            vals = np.asarray(_eval(mode, evaluator, safe), dtype=complex)
            vals = np.where(mask, np.nan + 1j * np.nan, vals)
            up = mode.spin == SPIN_UP
            psi_plus = vals if up else np.zeros_like(vals)
            psi_minus = np.zeros_like(vals) if up else vals
            columns += [
                f"re_psi_plus_{k}",
                f"im_psi_plus_{k}",
                f"re_psi_minus_{k}",
                f"im_psi_minus_{k}",
            ]
            data += [psi_plus.real, psi_plus.imag, psi_minus.real, psi_minus.imag]
        table_path = (run.out or "modes.json") + ".csv" if run.out else "modes_grid.csv"
        _write_csv(table_path, columns, data)
        doc["grid_file"] = table_path
        if run.figures:
            from . import plots

            for k, mode in enumerate(modes):
                vals = np.asarray(_eval(mode, evaluator, safe), dtype=complex)
                vals = np.where(mask, np.nan, np.abs(vals))
                path = os.path.join(run.figures, f"mode_{k}_abs.png")
                plots.render_heatmap(xs, ys, vals, f"|psi| mode {k} ({mode.spin})", path)
            doc["figure_dir"] = run.figures
    _write_report(doc, run.out)
    return 0


def _write_csv(path: str, columns, data):
    rows = np.column_stack([np.asarray(d, dtype=float).ravel() for d in data])
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(
                ",".join("" if math.isnan(v) else repr(float(v)) for v in row) + "\n"
            )


def cmd_potential(run: RunConfig) -> int:
    config = run.field
    if run.grid is None:
        raise ConfigError("the potential command needs --grid NX,NY,EXTENT")
    evaluator = PotentialEvaluator(config)
    xs, ys, zz = _grid_points(run.grid)
    mask = _exclusion_mask(zz, config)
    placeholder = evaluator.support_radius() + 1.0 + 0j
    safe = np.where(mask, placeholder, zz)
    h = np.asarray(evaluator.h(safe), dtype=float)
    h = np.where(mask, np.nan, h)
    columns = ["x", "y", "h", "exp_h", "exp_minus_h"]
    data = [zz.real, zz.imag, h, np.exp(h), np.exp(-h)]
    path = run.out or "potential.csv"
    _write_csv(path, columns, data)
    if run.figures:
        from . import plots

        plots.render_heatmap(xs, ys, h, "scalar potential h", os.path.join(run.figures, "potential_h.png"))
    print(f"wrote {path}")
    return 0


def cmd_verify(run: RunConfig) -> int:
    config = run.field
    rng = np.random.default_rng(run.seed)
    report = VerificationReport(
        residual_threshold=run.residual_tol,
        gram_threshold=run.gram_tol,
        modulus_threshold=run.modulus_tol,
    )

    normalized, _ = normalize_to_unit_interval(config)
    evaluator = PotentialEvaluator(normalized)
    basis = build_basis(normalized)
    expected = count_zero_modes(config, ExtensionKind.MAXIMAL)
    if basis.counts.total != expected.total:
        report.failures.append(
            f"basis size {basis.counts.total} != counted {expected.total}"
        )

    scale = max(1.0, evaluator.support_radius())
    step = 1e-3 * scale
    grid = residual_sample_points(evaluator, rng)

    for k, mode in enumerate(basis.modes):
        resid = kernel_residual(mode, evaluator, grid, step)
        ref = mode_scale(mode, evaluator, grid)
        report.kernel_residuals.append(resid / ref)
        if resid > run.residual_tol * ref:
            report.failures.append(f"mode {k}: kernel residual {resid / ref:.2e}")
        e = mode_tail_exponent(mode)
        report.tail_exponents.append(e)
        if not e < -1:
            report.failures.append(f"mode {k}: tail exponent {e} >= -1")

    if basis.modes:
        spec = QuadratureSpec.for_config(normalized)
        for mode in basis.modes:
            result = l2_norm_with_tail(mode, evaluator, spec)
            report.l2_values.append(result.value)
            if not result.finite:
                report.failures.append("constructed mode flagged non-integrable")
        _, smin, smax = gram_matrix(basis, evaluator, spec)
        report.gram_ratio = smin / smax if smax > 0 else 0.0
        if report.gram_ratio <= run.gram_tol:
            report.failures.append(f"gram ratio {report.gram_ratio:.2e} too small")

    # gauge invariance: counts and pointwise moduli
    n = normalized.n_solenoids
    worst = 0.0
    for _ in range(3):
        shifts = [int(m) for m in rng.integers(-3, 4, size=n)]
        from .field import gauge_shift

        shifted = gauge_shift(normalized, shifts)
        if (
            count_zero_modes(shifted, ExtensionKind.MAXIMAL).total
            != basis.counts.total
        ):
            report.failures.append(f"count changed under gauge shift {shifts}")
        if basis.modes and n:
            pts = _sample_points(rng, normalized, scale, 100, margin=1e-3 * scale)
            for mode in basis.modes:
                worst = max(
                    worst, gauge_modulus_defect(mode, evaluator, shifts, pts)
                )
    report.gauge_modulus_defect = worst
    if worst > run.modulus_tol:
        report.failures.append(f"gauge modulus defect {worst:.2e}")

    flipped_total = count_zero_modes(
        negate_field(config), ExtensionKind.MAXIMAL
    ).total
    report.sign_flip_totals = (expected.total, flipped_total)
    if flipped_total != expected.total:
        report.failures.append("sign flip changed the total count")

    doc = {
        "passed": report.passed,
        "failures": report.failures,
        "kernel_residuals": report.kernel_residuals,
        "l2_values": report.l2_values,
        "tail_exponents": [str(e) for e in report.tail_exponents],
        "gram_ratio": report.gram_ratio,
        "gauge_modulus_defect": report.gauge_modulus_defect,
        "sign_flip_totals": report.sign_flip_totals,
        "thresholds": {
            "kernel_residual": run.residual_tol,
            "gram_ratio": run.gram_tol,
            "gauge_modulus": run.modulus_tol,
        },
        "seed": run.seed,
    }
    _write_report(doc, run.out)
    return 0 if report.passed else 1


def _sample_points(rng, config: FieldConfig, scale: float, count: int, margin: float):
    """Random points in a disc of radius 2*scale, away from all solenoids."""
    points = []
    positions = config.solenoid_positions()
    while len(points) < count:
        z = complex(*(rng.uniform(-2 * scale, 2 * scale, size=2)))
        if all(abs(z - p) > margin for p in positions):
            points.append(z)
    return np.array(points, dtype=complex)


def cmd_classify(run: RunConfig, alpha: Fraction) -> int:
    kind = run.extension
    config = FieldConfig((), (Solenoid(0j, alpha),))
    evaluator = PotentialEvaluator(config)
    doc = {"alpha": str(alpha), "kind": kind.value, "spins": {}}
    status = 0
    for spin in ("up", "down"):
        try:
            reference = extension_reference_params(kind, spin, alpha)
            measured = probe_extension(kind, spin, alpha, evaluator)
        except UnsupportedRangeError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
        agree = nu_params_agree(measured, reference)
        doc["spins"][spin] = {
            "measured": {"nu0": _nu_str(measured.nu0), "nu1": _nu_str(measured.nu1)},
            "reference": {"nu0": _nu_str(reference.nu0), "nu1": _nu_str(reference.nu1)},
            "match": agree,
            "approximable": classify_approximable(reference),
        }
        if not agree:
            status = 1
    _write_report(doc, run.out)
    return status


def _nu_str(v: float) -> str:
    return "inf" if math.isinf(v) else repr(v)


def _load_run(args) -> RunConfig:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            run = parse_config(fh.read())
    else:
        run = RunConfig(field=FieldConfig())
    if getattr(args, "extension", None):
        run.extension = ExtensionKind(args.extension)
    if getattr(args, "grid", None):
        parts = args.grid.split(",")
        if len(parts) != 3:
            raise ConfigError("--grid expects NX,NY,EXTENT")
        run.grid = (int(parts[0]), int(parts[1]), float(parts[2]))
    if getattr(args, "seed", None) is not None:
        run.seed = args.seed
    if getattr(args, "tol", None) is not None:
        run.residual_tol = args.tol
    if getattr(args, "radii_scale", None) is not None:
        run.radii_scale = args.radii_scale
    run.out = getattr(args, "out", None)
    run.figures = getattr(args, "figures", None)
    return run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pauliab",
        description="Zero modes of the 2D Pauli operator with AB solenoids",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON field config")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument(
            "--extension",
            choices=[k.value for k in ExtensionKind],
            help="self-adjoint extension kind",
        )
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument("--tol", type=float, help="kernel residual tolerance override")
        p.add_argument("--radii-scale", dest="radii_scale", type=float, help="probe radii scale")

    p = sub.add_parser("count", help="zero-mode counts for an extension")
    common(p)

    p = sub.add_parser("modes", help="symbolic zero-mode coefficients and grid export")
    common(p)
    p.add_argument("--grid", help="NX,NY,EXTENT sampling grid")
    p.add_argument("--figures", help="directory for rendered figures")

    p = sub.add_parser("verify", help="run the full invariant suite")
    common(p)

    p = sub.add_parser("classify", help="boundary-condition classification at one solenoid")
    common(p, config_required=False)
    p.add_argument("--alpha", required=True, help="solenoid intensity as p/q")

    p = sub.add_parser("potential", help="sample the scalar potential on a grid")
    common(p)
    p.add_argument("--grid", required=True, help="NX,NY,EXTENT sampling grid")
    p.add_argument("--figures", help="directory for rendered figures")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = _load_run(args)
        if args.command == "count":
            return cmd_count(run)
        if args.command == "modes":
            return cmd_modes(run)
        if args.command == "verify":
            return cmd_verify(run)
        if args.command == "classify":
            try:
                alpha = Fraction(args.alpha)
            except (ValueError, ZeroDivisionError) as err:
                raise ConfigError(f"--alpha: not a valid rational: {err}")
            return cmd_classify(run, alpha)
        if args.command == "potential":
            return cmd_potential(run)
    except (ConfigError, FieldError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
