"""Command-line behavior: exit codes, files written, config precedence."""

import json

import numpy as np
import pytest

from shadowup.cli import ConfigFileError, load_config_file, run
from shadowup.curve import export_curve
from shadowup.image import ColorSpace, PlanarImage, load_image, rgb_to_hsv, save_image
from shadowup.pipeline import EnhanceConfig, enhance, enhance_stages
from shadowup.synth import Pattern, SyntheticSpec, generate


@pytest.fixture
def scene(tmp_path):
    spec = SyntheticSpec(pattern=Pattern.TWO_BAND, size=48, noise_std=0.05, seed=2)
    _, noisy = generate(spec)
    path = tmp_path / "scene.ppm"
    save_image(noisy, path)
    return path


class TestEnhanceCommand:
    def test_happy_path(self, scene, tmp_path):
        out = tmp_path / "out.ppm"
        assert run(["enhance", str(scene), "-o", str(out)]) == 0
        assert out.exists()

    def test_output_matches_library(self, scene, tmp_path):
        out = tmp_path / "out.ppm"
        run(["enhance", str(scene), "-o", str(out)])
        expected, _ = enhance(load_image(scene))
        reference = tmp_path / "ref.ppm"
        save_image(expected, reference)
        assert out.read_bytes() == reference.read_bytes()

    def test_default_output_name(self, scene):
        assert run(["enhance", str(scene)]) == 0
        assert (scene.parent / "scene_enhanced.ppm").exists()

    def test_missing_input(self, tmp_path, capsys):
        missing = tmp_path / "absent.ppm"
        assert run(["enhance", str(missing), "-o", str(tmp_path / "x.ppm")]) == 1
        err = capsys.readouterr().err
        assert "error: io:" in err
        assert "absent.ppm" in err

    def test_unknown_flag(self, scene, capsys):
        assert run(["enhance", str(scene), "--frobnicate"]) == 1
        err = capsys.readouterr().err
        assert "usage" in err
        assert "error: usage:" in err

    def test_no_arguments_is_usage_error(self, capsys):
        assert run([]) == 1
        assert "error: usage:" in capsys.readouterr().err

    def test_report_json(self, scene, tmp_path):
        out = tmp_path / "out.ppm"
        run(["enhance", str(scene), "-o", str(out), "--report"])
        payload = json.loads((tmp_path / "out.ppm.report.json").read_text())
        assert set(payload) == {
            "threshold_bin",
            "percentile_value",
            "s_count",
            "residual",
            "timings_ms",
        }
        assert set(payload["timings_ms"]) == {
            "decompose",
            "histogram",
            "curve",
            "apply",
            "total",
        }

    def test_dump_layers(self, scene, tmp_path):
        out = tmp_path / "out.ppm"
        run(["enhance", str(scene), "-o", str(out), "--dump-layers"])
        assert (tmp_path / "out_illumination.pgm").exists()
        assert (tmp_path / "out_reflectance.pgm").exists()

    def test_dump_histogram(self, scene, tmp_path):
        out = tmp_path / "out.ppm"
        assert run(["enhance", str(scene), "-o", str(out), "--dump-histogram"]) == 0
        lines = (tmp_path / "out_histogram.csv").read_text().strip().splitlines()
        assert len(lines) == 256
        probs = [float(line.split(",")[1]) for line in lines]
        assert sum(probs) == pytest.approx(1.0, abs=1e-6)
        # Dumping intermediates must not change the image itself.
        plain = tmp_path / "plain.ppm"
        run(["enhance", str(scene), "-o", str(plain)])
        assert out.read_bytes() == plain.read_bytes()

    def test_batch_into_directory(self, scene, tmp_path):
        second = tmp_path / "other.ppm"
        second.write_bytes(scene.read_bytes())
        out_dir = tmp_path / "batch"
        code = run(
            ["enhance", str(scene), str(second), "-o", str(out_dir), "--workers", "2"]
        )
        assert code == 0
        assert (out_dir / "scene_enhanced.ppm").exists()
        assert (out_dir / "other_enhanced.ppm").exists()

    def test_gray_input_gives_gray_output(self, tmp_path):
        rng = np.random.default_rng(101)
        gray = PlanarImage.from_gray(rng.uniform(0, 0.4, (24, 24)))
        src = tmp_path / "gray.pgm"
        save_image(gray, src)
        out = tmp_path / "gray_out.pgm"
        assert run(["enhance", str(src), "-o", str(out)]) == 0
        assert load_image(out).space is ColorSpace.GRAY

    def test_solver_failure_exits_two(self, scene, tmp_path, capsys):
        code = run(
            [
                "enhance", str(scene), "-o", str(tmp_path / "x.ppm"),
                "--max-iters", "1", "--tolerance", "1e-14",
            ]
        )
        assert code == 2
        assert "error: convergence:" in capsys.readouterr().err

    def test_baseline_flag_matches_subcommand(self, scene, tmp_path):
        via_flag = tmp_path / "flag.ppm"
        via_sub = tmp_path / "sub.ppm"
        assert run(["enhance", str(scene), "-o", str(via_flag), "--baseline"]) == 0
        assert run(["baseline", str(scene), "-o", str(via_sub)]) == 0
        assert via_flag.read_bytes() == via_sub.read_bytes()


class TestHelp:
    def test_top_level_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "enhance" in capsys.readouterr().out

    def test_enhance_help_lists_defaults(self, capsys):
        assert run(["enhance", "--help"]) == 0
        text = capsys.readouterr().out
        for flag, default in [
            ("--percentile", "75"),
            ("--alpha", "0.5"),
            ("--lambda", "0.5"),
            ("--sigma", "3.0"),
            ("--noise-a", "0.01"),
            ("--noise-b", "0.0004"),
            ("--tolerance", "1e-5"),
            ("--max-iters", "500"),
        ]:
            assert flag in text
            assert default in text


class TestCurveCommand:
    def test_matches_library_export(self, scene, tmp_path):
        out = tmp_path / "curve.csv"
        assert run(["curve", str(scene), "-o", str(out)]) == 0
        stages = enhance_stages(rgb_to_hsv(load_image(scene)), EnhanceConfig())
        reference = tmp_path / "ref.csv"
        export_curve(stages.curve, reference)
        assert out.read_bytes() == reference.read_bytes()
        assert len(out.read_text().strip().splitlines()) == 256


class TestDecomposeCommand:
    def test_writes_both_planes(self, scene, tmp_path):
        base = tmp_path / "layers.ppm"
        assert run(["decompose", str(scene), "-o", str(base)]) == 0
        illum = load_image(tmp_path / "layers_illumination.pgm")
        refl = load_image(tmp_path / "layers_reflectance.pgm")
        assert illum.space is ColorSpace.GRAY
        assert refl.space is ColorSpace.GRAY
        assert illum.planes.shape == refl.planes.shape


class TestEvalCommand:
    def test_writes_benchmark_csv(self, tmp_path):
        out = tmp_path / "bench.csv"
        code = run(["eval", "-o", str(out), "--seeds", "2", "--size", "48"])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "seed,method,psnr,dark_std,entropy"
        assert len(lines) == 5


class TestConfigFile:
    def test_parses_flat_key_values(self, tmp_path):
        path = tmp_path / "params.conf"
        path.write_text("# comment\nalpha = 0.7\nnoise-b=0.002\nmax_iters=99\n\n")
        assert load_config_file(path) == {
            "alpha": 0.7,
            "noise_b": 0.002,
            "max_iters": 99,
        }

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "params.conf"
        path.write_text("gamma=2.2\n")
        with pytest.raises(ConfigFileError, match="gamma"):
            load_config_file(path)

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "params.conf"
        path.write_text("alpha=soft\n")
        with pytest.raises(ConfigFileError, match="alpha"):
            load_config_file(path)

    def test_missing_separator_rejected(self, tmp_path):
        path = tmp_path / "params.conf"
        path.write_text("alpha 0.7\n")
        with pytest.raises(ConfigFileError):
            load_config_file(path)

    def test_unreadable_file_exits_one(self, scene, tmp_path, capsys):
        code = run(
            [
                "enhance", str(scene), "-o", str(tmp_path / "x.ppm"),
                "--config", str(tmp_path / "absent.conf"),
            ]
        )
        assert code == 1
        assert "error: config:" in capsys.readouterr().err

    def test_precedence_defaults_file_flags(self, scene, tmp_path):
        config = tmp_path / "params.conf"
        config.write_text("percentile=25\n")
        from_file = tmp_path / "file.csv"
        overridden = tmp_path / "flag.csv"
        run(["curve", str(scene), "-o", str(from_file), "--config", str(config)])
        run(
            [
                "curve", str(scene), "-o", str(overridden),
                "--config", str(config), "--percentile", "75",
            ]
        )
        stages = enhance_stages(rgb_to_hsv(load_image(scene)), EnhanceConfig(percentile=75.0))
        reference = tmp_path / "ref.csv"
        export_curve(stages.curve, reference)
        # Flag wins over file; file value actually changes the result.
        assert overridden.read_bytes() == reference.read_bytes()
        assert from_file.read_bytes() != reference.read_bytes()
