import json

import pytest

from pairchar.main import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from pairchar.sweeps import CSV_COLUMNS

TYPICAL = ["--eta", "0.01", "--pdc", "1e-6"]


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def tiny_grid(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps({
        "validate": {"p": [0.1], "eta": [0.5], "p_dc": [0.0], "quick_n_modes": [1],
                     "identity_p": [0.1], "identity_x": [0.5], "ideal_p": [0.1]},
    }))
    return str(path)


class TestCompute:
    def test_closed_form(self, capsys):
        code, out = run(capsys, "compute", "--metric", "r_tilde", "--p", "0.1", *TYPICAL)
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["engine"] == "closed_form"
        assert 25 <= payload["value"] <= 35
        assert payload["params"]["p_bar"] == 0.1

    def test_ideal_ratio_diverges(self, capsys):
        code, out = run(capsys, "compute", "--metric", "r_ideal", "--p", "0", *TYPICAL)
        assert code == EXIT_DOMAIN
        assert json.loads(out)["code"] == "divergent_metric"

    def test_vanishing_rates(self, capsys):
        code, out = run(capsys, "compute", "--metric", "g2_auto", "--p", "0", "--eta", "0.5")
        assert code == EXIT_DOMAIN
        assert json.loads(out)["code"] == "indeterminate_ratio"

    def test_invalid_parameter(self, capsys):
        code, out = run(capsys, "compute", "--metric", "g2_cross", "--p", "0.1", "--eta", "1.5")
        assert code == EXIT_USAGE
        assert json.loads(out)["code"] == "invalid_parameter"

    def test_missing_metric(self):
        with pytest.raises(SystemExit) as exc:
            main(["compute", "--p", "0.1"])
        assert exc.value.code == EXIT_USAGE

    def test_oracle_engine(self, capsys):
        code, out = run(capsys, "compute", "--metric", "g2_cross", "--p", "0.1", "--eta", "0.5",
                        "--engine", "oracle")
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["value"] == pytest.approx(1 + 0.9 / (0.1 * (1 - 0.1 * 0.25)), rel=1e-8)
        assert payload["diagnostics"]["cutoff"] >= 16


class TestSweep:
    def test_csv_to_stdout(self, capsys):
        code, out = run(capsys, "sweep", "--metric", "g2_cross", "--axis", "p", "--values", "0.01", "0.1",
                        *TYPICAL)
        lines = out.strip().split("\n")
        assert code == EXIT_OK
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 3
        assert lines[1].startswith("g2_cross,closed_form,0.01,")

    def test_failed_rows_reported(self, capsys, tmp_path):
        out_file = tmp_path / "sweep.csv"
        code, _ = run(capsys, "sweep", "--metric", "g2_auto", "--axis", "p", "--values", "0", "0.1",
                      "--eta", "0.5", "--out", str(out_file))
        rows = out_file.read_text().strip().split("\n")
        assert code == EXIT_DOMAIN
        assert rows[1].endswith("indeterminate_ratio: g2_auto: every count rate vanishes")

    def test_rejects_unordered_values(self, capsys):
        code, _ = run(capsys, "sweep", "--metric", "g2_cross", "--axis", "eta", "--values", "0.5", "0.1",
                      "--p", "0.1")
        assert code == EXIT_USAGE

    def test_csv_is_byte_stable(self, capsys, tmp_path):
        argv = ["sweep", "--metric", "g2_cross", "--axis", "eta", "--values", "0.2", "0.5", "--p", "0.1",
                "--pdc", "1e-4", "--engine", "closed_form", "oracle", "monte_carlo",
                "--trials", "20000", "--seed", "5"]
        for name in ("first.csv", "second.csv"):
            code, _ = run(capsys, *argv, "--out", str(tmp_path / name))
            assert code == EXIT_OK
        first = (tmp_path / "first.csv").read_bytes()
        assert first == (tmp_path / "second.csv").read_bytes()
        assert len(first.decode().strip().split("\n")) == 7


class TestFigure:
    def test_cross_correlation_bundle(self, capsys, tmp_path):
        code, out = run(capsys, "figure", "--figure", "7", "--out", str(tmp_path))
        assert code == EXIT_OK
        names = {p.name for p in tmp_path.iterdir()}
        assert names == {"fig7_pdc1e-06.csv", "fig7_pdc1e-05.csv", "fig7_pdc1e-04.csv",
                         "fig7_ideal.csv", "fig7_manifest.json"}
        ideal = (tmp_path / "fig7_ideal.csv").read_text().strip().split("\n")
        assert ideal[0] == "p,value"
        p, value = map(float, ideal[1].split(","))
        assert value == pytest.approx(1 + 1 / p, rel=1e-15)
        manifest = json.loads(out)
        extremum = manifest["curves"][0]["extremum"]
        assert extremum["interior"]
        assert 1e-4 / 3 <= extremum["p"] <= 3e-4

    @pytest.mark.parametrize("figure", [2, 4, 7, 9, 11])
    def test_extremum_tracks_dark_counts(self, capsys, tmp_path, figure):
        code, out = run(capsys, "figure", "--figure", str(figure), "--out", str(tmp_path))
        assert code == EXIT_OK
        curves = json.loads(out)["curves"]
        assert [curve["p_dc"] for curve in curves] == [1e-6, 1e-5, 1e-4]
        for curve in curves:
            extremum = curve["extremum"]
            assert extremum["interior"]
            assert extremum["heuristic_p"] / 3 <= extremum["p"] <= 3 * extremum["heuristic_p"]

    @pytest.mark.parametrize("figure", [9, 11])
    def test_visibility_peaks_fall_with_dark_counts(self, capsys, tmp_path, figure):
        code, out = run(capsys, "figure", "--figure", str(figure), "--out", str(tmp_path))
        peaks = [curve["extremum"]["value"] for curve in json.loads(out)["curves"]]
        assert code == EXIT_OK
        assert 0.99 < peaks[0] < 1
        assert peaks == sorted(peaks, reverse=True)

    def test_ideal_cauchy_schwarz_curve(self, capsys, tmp_path):
        code, _ = run(capsys, "figure", "--figure", "2", "--out", str(tmp_path))
        assert code == EXIT_OK
        rows = (tmp_path / "fig2_ideal.csv").read_text().strip().split("\n")[1:]
        for row in rows[::50]:
            p, value = map(float, row.split(","))
            assert value == pytest.approx(0.25 * (1 + 1 / p) ** 2, rel=1e-12)
        assert (tmp_path / "fig2_classical_bound.csv").exists()

    def test_noise_reduces_autocorrelation_to_one(self, capsys, tmp_path):
        code, out = run(capsys, "figure", "--figure", "5", "--out", str(tmp_path))
        curves = json.loads(out)["curves"]
        assert code == EXIT_OK
        assert all("extremum" not in curve for curve in curves)
        assert all(abs(curve["small_p_value"] - 1) < 1e-2 for curve in curves)
        assert abs(curves[-1]["small_p_value"] - 1) < 1e-3
        assert {"fig5_thermal.csv", "fig5_coherent.csv"} <= {p.name for p in tmp_path.iterdir()}

    def test_bundle_is_byte_stable(self, capsys, tmp_path):
        for name in ("first", "second"):
            code, _ = run(capsys, "figure", "--figure", "4", "--out", str(tmp_path / name))
            assert code == EXIT_OK
        first = sorted((tmp_path / "first").iterdir())
        assert [p.name for p in first] == sorted(p.name for p in (tmp_path / "second").iterdir())
        for path in first:
            assert path.read_bytes() == (tmp_path / "second" / path.name).read_bytes()


class TestOptimum:
    def test_cross_correlation(self, capsys):
        code, out = run(capsys, "optimum", "--metric", "g2_cross", *TYPICAL)
        payload = json.loads(out)
        assert code == EXIT_OK
        assert 1e-4 / 3 <= payload["p_opt"] <= 3e-4

    def test_monotone_without_dark_counts(self, capsys):
        code, out = run(capsys, "optimum", "--metric", "r_tilde", "--eta", "0.01")
        assert code == EXIT_DOMAIN
        assert json.loads(out)["code"] == "no_extremum"


class TestValidate:
    def test_quick_grid_passes(self, capsys, tiny_grid):
        code, out = run(capsys, "validate", "--quick", "--config", tiny_grid)
        report = json.loads(out)
        assert code == EXIT_OK
        assert report["passed"]
        assert report["closed_form_vs_oracle"]["metrics"]["v_hom"]["cells"] == 1

    def test_zero_tolerance_fails(self, capsys, tiny_grid):
        code, out = run(capsys, "validate", "--quick", "--tolerance", "0", "--config", tiny_grid)
        assert code == EXIT_VALIDATION
        assert not json.loads(out)["passed"]

    def test_missing_config(self, capsys, tmp_path):
        code, out = run(capsys, "validate", "--config", str(tmp_path / "absent.json"))
        assert code == EXIT_USAGE
        assert json.loads(out)["code"] == "config_error"


class TestMonteCarlo:
    ARGS = ("mc", "--metric", "g2_cross", "--p", "0.1", "--eta", "0.5", "--pdc", "1e-3",
            "--trials", "2000", "--seed", "3")

    def test_deterministic(self, capsys):
        first = run(capsys, *self.ARGS)
        second = run(capsys, *self.ARGS)
        assert first == second
        payload = json.loads(first[1])
        assert payload["seed"] == 3
        assert payload["trials"] == 2000
        assert payload["std_error"] > 0

    def test_click_records(self, capsys, tmp_path):
        clicks = tmp_path / "clicks.csv"
        code, _ = run(capsys, *self.ARGS, "--clicks-out", str(clicks))
        assert code == EXIT_OK
        lines = clicks.read_text().strip().split("\n")
        assert lines[0] == "trial_id,a,b"
        assert len(lines) == 2001
