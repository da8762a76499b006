import json

import numpy as np
import pytest

from teleportsim.cli import main
from teleportsim.config import ExperimentConfig
from teleportsim.experiment import CSV_COLUMNS


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTeleportCommand:
    def test_outcome_statistics(self, capsys):
        n = 4000
        code, out, _ = run_cli(
            capsys, "teleport", "--state", "+45", "--trials", str(n), "--seed", "5"
        )
        assert code == 0
        lines = out.splitlines()
        freqs = {}
        for line in lines:
            parts = line.split()
            if parts and parts[0] in ("psi-", "psi+", "phi-", "phi+"):
                freqs[parts[0]] = float(parts[2])
        sigma = np.sqrt(0.25 * 0.75 / n)
        assert set(freqs) == {"psi-", "psi+", "phi-", "phi+"}
        for value in freqs.values():
            assert abs(value - 0.25) < 4 * sigma
        assert "mean corrected fidelity: 1.000000000000" in out

    def test_deterministic(self, capsys):
        args = ("teleport", "--state", "H", "--trials", "50", "--seed", "7")
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_postselect(self, capsys):
        code, out, _ = run_cli(
            capsys, "teleport", "--state", "R", "--trials", "2000",
            "--seed", "11", "--postselect",
        )
        assert code == 0
        assert "postselected successes" in out
        assert "mean output fidelity: 1.000000000000" in out

    def test_invalid_state_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "teleport", "--state", "0.6,0.9i", "--trials", "5")
        assert code == 2
        assert "expected 1" in err


class TestScanCommand:
    def test_preset_outputs(self, tmp_path, capsys):
        code, out, _ = run_cli(
            capsys, "scan", "--preset", "fig3-ideal", "--out", str(tmp_path),
            "--pulses-per-delay", "20000", "--seed", "3",
        )
        assert code == 0
        scan_csv = tmp_path / "scan_+45.csv"
        assert scan_csv.exists()
        assert (tmp_path / "visibility.csv").exists()
        assert (tmp_path / "manifest.json").exists()

        lines = scan_csv.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 12  # header + 11 delays
        # zero-delay row: orthogonal channel exactly zero in the ideal model
        rows = {float(line.split(",")[0]): line.split(",") for line in lines[1:]}
        zero_row = rows[0.0]
        assert float(zero_row[CSV_COLUMNS.index("d1f1f2")]) == 0.0
        assert float(zero_row[CSV_COLUMNS.index("d2f1f2")]) > 0.0

    def test_manifest_rerun_byte_identical(self, tmp_path, capsys):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        code, _, _ = run_cli(
            capsys, "scan", "--preset", "fig3-ideal", "--out", str(out_a),
            "--pulses-per-delay", "10000", "--seed", "21",
        )
        assert code == 0
        code, _, _ = run_cli(
            capsys, "scan", "--config", str(out_a / "manifest.json"), "--out", str(out_b)
        )
        assert code == 0
        for name in ("scan_+45.csv", "visibility.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_config_file_run(self, tmp_path, capsys):
        config = {
            "source": {"mean_pairs_pass1": 0.5, "mean_pairs_pass2": 0.5,
                       "max_pairs_per_pass": 1},
            "prep": {"chi": "R"},
            "delays_fs": [-1000.0, 0.0, 1000.0],
            "pulses_per_delay": 5000,
            "seed": 17,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        code, _, _ = run_cli(capsys, "scan", "--config", str(path), "--out", str(tmp_path / "out"))
        assert code == 0
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["seed"] == 17
        assert manifest["chis"] == ["R"]
        # analysis basis defaults to (chi, orthogonal)
        restored = ExperimentConfig.from_dict(manifest["config"])
        assert restored.prep.chi.label == "R"

    def test_config_precedence_three_layers(self, tmp_path, capsys, monkeypatch):
        config = {
            "source": {"mean_pairs_pass1": 0.5, "mean_pairs_pass2": 0.5,
                       "max_pairs_per_pass": 1},
            "prep": {"chi": "+45"},
            "delays_fs": [-1000.0, 0.0, 1000.0],
            "pulses_per_delay": 600,
            "seed": 100,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        monkeypatch.setenv("TELEPORTSIM_SEED", "900")

        # file values beat the env fallback and built-in defaults
        code, _, _ = run_cli(capsys, "scan", "--config", str(path), "--out", str(tmp_path / "o1"))
        assert code == 0
        m1 = json.loads((tmp_path / "o1" / "manifest.json").read_text())
        assert m1["seed"] == 100
        assert m1["config"]["pulses_per_delay"] == 600

        # CLI flags beat file values
        code, _, _ = run_cli(
            capsys, "scan", "--config", str(path), "--out", str(tmp_path / "o2"),
            "--seed", "7", "--pulses-per-delay", "800",
        )
        m2 = json.loads((tmp_path / "o2" / "manifest.json").read_text())
        assert m2["seed"] == 7
        assert m2["config"]["pulses_per_delay"] == 800

        # env fallback applies when neither flag nor file provides a seed
        del config["seed"]
        path.write_text(json.dumps(config))
        code, _, _ = run_cli(capsys, "scan", "--config", str(path), "--out", str(tmp_path / "o3"))
        m3 = json.loads((tmp_path / "o3" / "manifest.json").read_text())
        assert m3["seed"] == 900

    def test_bad_config_exits_2(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code, _, err = run_cli(capsys, "scan", "--config", str(path), "--out", str(tmp_path / "o"))
        assert code == 2
        assert "error" in err

    def test_missing_config_exits_3(self, tmp_path, capsys):
        code, _, _ = run_cli(
            capsys, "scan", "--config", str(tmp_path / "absent.json"),
            "--out", str(tmp_path / "o"),
        )
        assert code == 3

    def test_unwritable_out_dir_exits_3(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, _ = run_cli(
            capsys, "scan", "--preset", "fig3-ideal",
            "--out", str(blocker / "sub"), "--pulses-per-delay", "100",
        )
        assert code == 3


class TestOtherPresets:
    @pytest.mark.parametrize(
        "preset,n_rows,files",
        [
            ("fig4-spurious", 2, ("scan_+45.csv", "scan_-45.csv")),
            ("fig5-fourfold", 2, ("scan_+45.csv", "scan_V.csv")),
            ("table1", 5, ("scan_+45.csv", "scan_-45.csv", "scan_H.csv",
                           "scan_V.csv", "scan_R.csv")),
        ],
    )
    def test_preset_smoke(self, tmp_path, capsys, preset, n_rows, files):
        code, _, _ = run_cli(
            capsys, "scan", "--preset", preset, "--out", str(tmp_path),
            "--pulses-per-delay", "4000", "--seed", "19",
        )
        assert code == 0
        for name in files:
            assert (tmp_path / name).exists()
        rows = (tmp_path / "visibility.csv").read_text().splitlines()
        assert len(rows) == n_rows + 1  # header + one row per polarization


class TestCalibrateCommand:
    def test_spurious_fragment(self, capsys):
        code, out, _ = run_cli(capsys, "calibrate", "--spurious-target", "0.68")
        assert code == 0
        fragment = json.loads(out)
        assert 0 < fragment["source"]["mean_pairs_pass1"] <= 0.5
        assert fragment["source"]["max_pairs_per_pass"] == 2

    def test_fourfold_fragment(self, capsys):
        code, out, _ = run_cli(capsys, "calibrate", "--fourfold-visibility", "0.70")
        assert code == 0
        fragment = json.loads(out)
        assert 0.9 < fragment["max_overlap"] <= 1.0

    def test_out_of_range_target_exits_4(self, capsys):
        code, _, err = run_cli(capsys, "calibrate", "--spurious-target", "1.5")
        assert code == 4
        assert "error" in err

    def test_unreachable_visibility_exits_4(self, capsys):
        code, _, _ = run_cli(capsys, "calibrate", "--fourfold-visibility", "0.99")
        assert code == 4
