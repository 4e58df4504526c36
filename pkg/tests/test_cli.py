"""Command-line interface: config parsing, subcommands, exit codes, exports."""

import json
import os
from fractions import Fraction

import numpy as np
import pytest

from pauliab import Bump, FieldConfig, Solenoid
from pauliab.cli import (
    ConfigError,
    emit_config,
    main,
    parse_config,
)


EXAMPLE = {
    "bumps": [{"center": [0.0, 0.0], "radius": 1.0, "flux_over_2pi": "3/4"}],
    "solenoids": [{"position": [0.0, 0.0], "intensity": "1/2"}],
}


def write_config(tmp_path, doc=None, name="field.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc if doc is not None else EXAMPLE))
    return str(path)


class TestParsing:
    def test_round_trip(self):
        config = FieldConfig(
            (Bump(0.5 + 0.25j, 1.5, Fraction(-5, 3)),),
            (Solenoid(1 - 1j, Fraction(7, 4)),),
        )
        parsed = parse_config(emit_config(config))
        assert parsed.field == config

    def test_full_document(self):
        doc = dict(EXAMPLE, extension="ev", grid=[8, 8, 2.0], seed=7)
        run = parse_config(json.dumps(doc))
        assert run.extension.value == "ev"
        assert run.grid == (8, 8, 2.0)
        assert run.seed == 7

    @pytest.mark.parametrize(
        "mangle, fragment",
        [
            (lambda d: d["solenoids"][0].update(intensity="2"), "solenoids[0]"),
            (lambda d: d["solenoids"][0].update(intensity="1/0"), "solenoids[0]"),
            (lambda d: d["bumps"][0].update(center=[1.0]), "bumps[0].center"),
            (lambda d: d["bumps"][0].update(radius=-1.0), "bumps[0]"),
            (lambda d: d.update(extension="huge"), "extension"),
            (lambda d: d.update(grid=[4, 4]), "grid"),
            (lambda d: d.update(grid=[4, 4, -1.0]), "extent"),
        ],
    )
    def test_bad_documents(self, mangle, fragment):
        doc = json.loads(json.dumps(EXAMPLE))
        mangle(doc)
        with pytest.raises(ConfigError) as info:
            parse_config(json.dumps(doc))
        assert fragment in str(info.value)

    def test_not_json(self):
        with pytest.raises(ConfigError):
            parse_config("{nope")

    def test_duplicate_solenoids(self):
        doc = json.loads(json.dumps(EXAMPLE))
        doc["solenoids"].append(doc["solenoids"][0].copy())
        with pytest.raises(ConfigError):
            parse_config(json.dumps(doc))


class TestCountCommand:
    def test_counts_and_flux(self, tmp_path, capsys):
        rc = main(["count", "--config", write_config(tmp_path)])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["phi"] == "5/4"
        assert (doc["spin_up"], doc["spin_down"], doc["total"]) == (0, 1, 1)

    def test_ev_extension_flag(self, tmp_path, capsys):
        rc = main(
            ["count", "--config", write_config(tmp_path), "--extension", "ev"]
        )
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["total"] == 0

    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["count", "--config", str(tmp_path / "absent.json")])
        assert rc == 2

    def test_invalid_config_exit_code(self, tmp_path):
        bad = dict(EXAMPLE, solenoids=[{"position": [0, 0], "intensity": "3"}])
        rc = main(["count", "--config", write_config(tmp_path, bad)])
        assert rc == 2


class TestModesCommand:
    def test_symbolic_output(self, tmp_path):
        out = str(tmp_path / "modes.json")
        rc = main(["modes", "--config", write_config(tmp_path), "--out", out])
        assert rc == 0
        doc = json.loads(open(out).read())
        assert doc["total"] == 1
        mode = doc["modes"][0]
        assert mode["spin"] == "down"
        assert mode["poly_coeffs"] == [[1.0, 0.0]]

    def test_grid_export(self, tmp_path):
        out = str(tmp_path / "modes.json")
        rc = main(
            [
                "modes",
                "--config",
                write_config(tmp_path),
                "--out",
                out,
                "--grid",
                "5,5,2",
            ]
        )
        assert rc == 0
        doc = json.loads(open(out).read())
        csv_path = doc["grid_file"]
        lines = open(csv_path).read().splitlines()
        header = lines[0].split(",")
        assert header[:2] == ["x", "y"]
        assert "re_psi_minus_0" in header
        assert len(lines) == 26
        # the grid point on the solenoid is masked to an empty cell in the
        # spin-down value columns (the spin-up columns are identically zero)
        masked = [l for l in lines[1:] if l.split(",")[4] == ""]
        assert len(masked) == 1

    def test_figures(self, tmp_path):
        figdir = tmp_path / "figs"
        figdir.mkdir()
        out = str(tmp_path / "modes.json")
        rc = main(
            [
                "modes",
                "--config",
                write_config(tmp_path),
                "--out",
                out,
                "--grid",
                "6,6,2",
                "--figures",
                str(figdir),
            ]
        )
        assert rc == 0
        assert (figdir / "mode_0_abs.png").exists()


class TestVerifyCommand:
    def test_passes_on_valid_config(self, tmp_path):
        out = str(tmp_path / "verify.json")
        rc = main(["verify", "--config", write_config(tmp_path), "--out", out])
        doc = json.loads(open(out).read())
        assert rc == 0
        assert doc["passed"] is True
        assert doc["failures"] == []
        assert doc["tail_exponents"] == ["-5/4"]
        assert all(r < 1e-6 for r in doc["kernel_residuals"])
        assert doc["gauge_modulus_defect"] < 1e-10
        assert doc["sign_flip_totals"] == [1, 1]

    def test_deterministic_given_seed(self, tmp_path):
        outs = []
        for name in ("a.json", "b.json"):
            out = str(tmp_path / name)
            rc = main(
                [
                    "verify",
                    "--config",
                    write_config(tmp_path),
                    "--out",
                    out,
                    "--seed",
                    "3",
                ]
            )
            assert rc == 0
            outs.append(open(out).read())
        assert outs[0] == outs[1]


class TestClassifyCommand:
    def test_maximal(self, capsys):
        rc = main(["classify", "--alpha", "3/10"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["spins"]["up"]["match"] is True
        assert doc["spins"]["up"]["approximable"] is True
        assert doc["spins"]["down"]["approximable"] is True

    def test_ev(self, capsys):
        rc = main(["classify", "--alpha", "3/10", "--extension", "ev"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["spins"]["up"]["approximable"] is False
        assert doc["spins"]["down"]["approximable"] is True
        assert doc["spins"]["up"]["measured"]["nu0"] == "inf"

    def test_ev_out_of_range(self, capsys):
        rc = main(["classify", "--alpha", "3/5", "--extension", "ev"])
        assert rc == 2

    def test_bad_alpha(self, capsys):
        rc = main(["classify", "--alpha", "nope"])
        assert rc == 2


class TestPotentialCommand:
    def test_csv_export(self, tmp_path, capsys):
        out = str(tmp_path / "potential.csv")
        rc = main(
            [
                "potential",
                "--config",
                write_config(tmp_path),
                "--grid",
                "5,5,2",
                "--out",
                out,
            ]
        )
        assert rc == 0
        lines = open(out).read().splitlines()
        assert lines[0] == "x,y,h,exp_h,exp_minus_h"
        assert len(lines) == 26
        # h at (2, 2) must match the far-field logarithm of flux 5/4
        row = [l.split(",") for l in lines[1:] if l.startswith("2.0,2.0")][0]
        expected = 1.25 * np.log(abs(2 + 2j))
        assert float(row[2]) == pytest.approx(expected, rel=1e-12)

    def test_needs_grid(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["potential", "--config", write_config(tmp_path)])


class TestPlots:
    def test_heatmap_and_profile(self, tmp_path):
        from pauliab import plots

        xs = np.linspace(-1, 1, 8)
        vals = np.random.default_rng(0).uniform(size=(8, 8))
        vals[0, 0] = np.nan
        p1 = str(tmp_path / "map.png")
        plots.render_heatmap(xs, xs, vals, "test map", p1, log_scale=True)
        p2 = str(tmp_path / "profile.png")
        plots.render_radial_profile(
            np.linspace(0.1, 2, 30), np.linspace(1, 2, 30), "test profile", p2
        )
        assert os.path.getsize(p1) > 0
        assert os.path.getsize(p2) > 0
