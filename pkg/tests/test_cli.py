"""End-to-end command-line behavior, including exit codes."""

import io
import json
from pathlib import Path

import pytest

from cdranks.cli import main

FIXTURES = Path(__file__).parent / "fixtures"
RESULTS = str(FIXTURES / "results_31x8.csv")
MANIFEST = str(FIXTURES / "manifest_31x8.json")
REPORT = str(FIXTURES / "report_31x8.json")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_manifest(tmp_path, *labels, alpha=0.05):
    path = tmp_path / "manifest.json"
    path.write_text(
        json.dumps(
            {
                "metric_name": "accuracy",
                "direction": "maximize",
                "alpha": alpha,
                "models": [{"label": l} for l in labels],
            }
        )
    )
    return str(path)


class TestAnalyze:
    def test_fixture_report(self, capsys):
        code, out, err = run(capsys, "analyze", RESULTS, "--manifest", MANIFEST)
        assert code == 0 and err == ""
        report = json.loads(out)
        assert report["df"] == 7
        assert report["n_datasets"] == 31
        assert abs(report["cd"] - 1.886) <= 0.001
        assert report["reject_null"] and report["posthoc_licensed"]
        assert len(report["average_ranks"]) == 8

    def test_out_file(self, capsys, tmp_path):
        out_path = tmp_path / "report.json"
        code, out, _ = run(
            capsys, "analyze", RESULTS, "--manifest", MANIFEST, "--out", str(out_path)
        )
        assert code == 0 and out == ""
        assert json.loads(out_path.read_text())["df"] == 7

    def test_constant_scores_accept_null(self, capsys, tmp_path):
        csv = tmp_path / "flat.csv"
        csv.write_text(
            "dataset,a,b,c\n" + "".join(f"d{i:02d},0.5,0.5,0.5\n" for i in range(16))
        )
        code, out, _ = run(
            capsys, "analyze", str(csv), "--manifest", write_manifest(tmp_path, "a", "b", "c")
        )
        assert code == 0
        report = json.loads(out)
        assert report["p_value"] == 1.0
        assert not report["posthoc_licensed"]
        assert report["significant_pairs"] == []

    def test_long_format_autodetected_and_folds_averaged(self, capsys, tmp_path):
        rows = ["dataset,model,fold,value"]
        for d in ("d1", "d2"):
            for m, base in (("a", 0.9), ("b", 0.6), ("c", 0.3)):
                rows += [f"{d},{m},0,{base}", f"{d},{m},1,{base + 0.1}"]
        csv = tmp_path / "folds.csv"
        csv.write_text("\n".join(rows) + "\n")
        with pytest.warns(UserWarning):
            code, out, _ = run(
                capsys,
                "analyze",
                str(csv),
                "--manifest",
                write_manifest(tmp_path, "a", "b", "c"),
            )
        assert code == 0
        report = json.loads(out)
        assert report["n_datasets"] == 2
        assert [e["rank"] for e in report["average_ranks"]] == [1.0, 2.0, 3.0]

    def test_format_override_rejects_wrong_layout(self, capsys, tmp_path):
        code, _, err = run(
            capsys,
            "analyze",
            RESULTS,
            "--manifest",
            MANIFEST,
            "--format",
            "long",
        )
        assert code == 2
        assert "header must be 'dataset,model,fold,value'" in err

    def test_missing_pair_exit_code_and_message(self, capsys, tmp_path):
        csv = tmp_path / "gappy.csv"
        csv.write_text(
            "dataset,model,fold,value\n"
            "d1,a,0,0.1\nd1,b,0,0.2\nd1,c,0,0.3\n"
            "d2,a,0,0.4\nd2,b,0,0.5\n"
        )
        code, _, err = run(
            capsys, "analyze", str(csv), "--manifest", write_manifest(tmp_path, "a", "b", "c")
        )
        assert code == 2
        assert "(d2, c)" in err

    def test_drop_incomplete_reduces_n(self, capsys, tmp_path):
        lines = ["dataset,model,fold,value"]
        for i in range(16):
            for m, v in (("a", 0.9), ("b", 0.6), ("c", 0.3)):
                lines.append(f"d{i:02d},{m},0,{v + i * 1e-4}")
        lines.append("d99,a,0,0.5")
        csv = tmp_path / "gappy.csv"
        csv.write_text("\n".join(lines) + "\n")
        manifest = write_manifest(tmp_path, "a", "b", "c")
        with pytest.warns(UserWarning, match="dropped 1"):
            code, out, _ = run(
                capsys, "analyze", str(csv), "--manifest", manifest, "--drop-incomplete"
            )
        assert code == 0
        assert json.loads(out)["n_datasets"] == 16

    def test_alpha_defaults_to_manifest_and_flag_overrides(self, capsys, tmp_path):
        manifest = write_manifest(tmp_path, "a", "b", "c", alpha=0.1)
        csv = tmp_path / "w.csv"
        csv.write_text(
            "dataset,a,b,c\n"
            + "".join(f"d{i:02d},{0.9 + i * 1e-4},{0.6},{0.3}\n" for i in range(16))
        )
        code, out, _ = run(capsys, "analyze", str(csv), "--manifest", manifest)
        assert code == 0 and json.loads(out)["alpha"] == 0.1
        code, out, _ = run(
            capsys, "analyze", str(csv), "--manifest", manifest, "--alpha", "0.05"
        )
        assert code == 0 and json.loads(out)["alpha"] == 0.05

    def test_iman_davenport_variant(self, capsys):
        code, out, _ = run(
            capsys,
            "analyze",
            RESULTS,
            "--manifest",
            MANIFEST,
            "--variant",
            "iman-davenport",
        )
        assert code == 0
        report = json.loads(out)
        assert report["variant"] == "iman_davenport"
        assert report["df2"] == 7 * 30

    def test_degenerate_statistic_exits_3(self, capsys, tmp_path):
        csv = tmp_path / "consistent.csv"
        csv.write_text(
            "dataset,a,b,c\n" + "".join(f"d{i:02d},3,2,1\n" for i in range(16))
        )
        code, _, err = run(
            capsys,
            "analyze",
            str(csv),
            "--manifest",
            write_manifest(tmp_path, "a", "b", "c"),
            "--variant",
            "iman-davenport",
        )
        assert code == 3
        assert "error:" in err

    def test_summarize_tag(self, capsys):
        code, out, _ = run(
            capsys,
            "analyze",
            RESULTS,
            "--manifest",
            MANIFEST,
            "--summarize-tag",
            "feature_set",
        )
        assert code == 0
        summaries = json.loads(out)["tag_summaries"]
        assert summaries[0]["tag_value"] == "clickstream"
        assert summaries[0]["fully_separated"]

    def test_summarize_unknown_tag_exits_2(self, capsys):
        code, _, err = run(
            capsys,
            "analyze",
            RESULTS,
            "--manifest",
            MANIFEST,
            "--summarize-tag",
            "flavor",
        )
        assert code == 2
        assert "missing tag 'flavor'" in err

    def test_stdin_input(self, capsys, monkeypatch, tmp_path):
        monkeypatch.setattr(
            "sys.stdin", io.StringIO(Path(RESULTS).read_text(encoding="utf-8"))
        )
        code, out, _ = run(capsys, "analyze", "-", "--manifest", MANIFEST)
        assert code == 0
        assert json.loads(out)["n_datasets"] == 31

    def test_nonexistent_input_exits_2(self, capsys):
        code, _, err = run(capsys, "analyze", "/no/such/file.csv", "--manifest", MANIFEST)
        assert code == 2
        assert "error:" in err


class TestDiagram:
    def test_fixture_renders_golden(self, capsys):
        code, out, err = run(capsys, "diagram", REPORT)
        assert code == 0 and err == ""
        assert out == (FIXTURES / "golden_cd.svg").read_text(encoding="utf-8")

    def test_width_flag(self, capsys):
        code, out, _ = run(capsys, "diagram", REPORT, "--width", "400")
        assert code == 0
        assert 'width="400"' in out

    def test_out_file(self, capsys, tmp_path):
        svg = tmp_path / "d.svg"
        code, out, _ = run(capsys, "diagram", REPORT, "--out", str(svg))
        assert code == 0 and out == ""
        assert svg.read_bytes() == (FIXTURES / "golden_cd.svg").read_bytes()

    @staticmethod
    def marginal_report(**overrides):
        report = {
            "p_value": 0.07,
            "alpha": 0.05,
            "cd": 1.5,
            "posthoc_licensed": False,
            "n_datasets": 20,
            "average_ranks": [
                {"label": "a", "rank": 1.4},
                {"label": "b", "rank": 2.2},
                {"label": "c", "rank": 2.4},
            ],
        }
        report.update(overrides)
        return report

    def write_report(self, tmp_path, **overrides):
        path = tmp_path / "report.json"
        path.write_text(json.dumps(self.marginal_report(**overrides)))
        return str(path)

    def test_unlicensed_report_gets_annotation(self, capsys, tmp_path):
        code, out, _ = run(capsys, "diagram", self.write_report(tmp_path))
        assert code == 0
        assert "no significant differences at alpha = 0.05" in out

    def test_alpha_flag_relicenses(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "diagram", self.write_report(tmp_path), "--alpha", "0.1"
        )
        assert code == 0
        assert "no significant differences" not in out

    def test_alpha_flag_needs_n_datasets(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        report = self.marginal_report()
        del report["n_datasets"]
        path.write_text(json.dumps(report))
        code, _, err = run(capsys, "diagram", str(path), "--alpha", "0.1")
        assert code == 2
        assert "n_datasets" in err
        # without --alpha the same report renders fine
        code, _, _ = run(capsys, "diagram", str(path))
        assert code == 0

    def test_invalid_json_exits_2(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        path.write_text("{nope")
        code, _, err = run(capsys, "diagram", str(path))
        assert code == 2
        assert "not valid JSON" in err

    @pytest.mark.parametrize("key", ["average_ranks", "cd", "alpha", "p_value", "posthoc_licensed"])
    def test_missing_key_exits_2(self, capsys, tmp_path, key):
        report = self.marginal_report()
        del report[key]
        path = tmp_path / "r.json"
        path.write_text(json.dumps(report))
        code, _, err = run(capsys, "diagram", str(path))
        assert code == 2
        assert key in err

    def test_stdin_report(self, capsys, monkeypatch):
        monkeypatch.setattr(
            "sys.stdin", io.StringIO(Path(REPORT).read_text(encoding="utf-8"))
        )
        code, out, _ = run(capsys, "diagram", "-")
        assert code == 0
        assert out == (FIXTURES / "golden_cd.svg").read_text(encoding="utf-8")


class TestSimulate:
    def test_null_run_shape(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--n", "10", "--k", "3", "--trials", "20", "--seed", "1"
        )
        assert code == 0
        result = json.loads(out)
        assert set(result) == {"config", "rejection_rate", "ci_low", "ci_high", "trials"}
        assert result["trials"] == 20
        assert result["config"]["effect"] == [0.0, 0.0, 0.0]

    def test_rerun_is_byte_identical(self, capsys, tmp_path):
        argv = ["simulate", "--n", "8", "--k", "4", "--trials", "30", "--seed", "5"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(capsys, *argv, "--out", str(a))[0] == 0
        assert run(capsys, *argv, "--out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_effect_switches_to_power(self, capsys):
        code, out, _ = run(
            capsys,
            "simulate",
            "--n",
            "10",
            "--k",
            "3",
            "--trials",
            "10",
            "--effect",
            "1.0,0,0",
        )
        assert code == 0
        result = json.loads(out)
        assert "omnibus_rate" in result and "pairwise_detection" in result

    def test_wrong_effect_length_exits_2(self, capsys):
        code, _, err = run(
            capsys, "simulate", "--n", "10", "--k", "3", "--effect", "1.0,0"
        )
        assert code == 2
        assert "effect" in err

    def test_workers_flag_matches_serial(self, capsys):
        argv = ("simulate", "--n", "8", "--k", "4", "--trials", "24", "--seed", "2")
        _, serial, _ = run(capsys, *argv)
        _, parallel, _ = run(capsys, *argv, "--workers", "3")
        assert serial == parallel

    def test_zero_trials_rejected_by_parser(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--n", "10", "--k", "3", "--trials", "0"])
        assert exc.value.code == 2


class TestParser:
    def test_no_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["analyze", "x.csv", "--manifest", "m.json", "--frobnicate"])
        assert exc.value.code == 2

    def test_bad_variant_value(self):
        with pytest.raises(SystemExit) as exc:
            main(["analyze", "x.csv", "--manifest", "m.json", "--variant", "anova"])
        assert exc.value.code == 2

    def test_bad_alpha_value(self):
        with pytest.raises(SystemExit) as exc:
            main(["analyze", "x.csv", "--manifest", "m.json", "--alpha", "1.5"])
        assert exc.value.code == 2
