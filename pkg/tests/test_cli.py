"""CLI behaviour: artifacts, config precedence, exit codes, determinism."""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from l2gtx.cli import main
from l2gtx.data import save_ucr_tsv, synthetic_ecg_dataset

FIXTURE_ADAPTER = Path(__file__).parent / "fixtures" / "toy_adapter.py"


@pytest.fixture(scope="module")
def demo_tsv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "demo.tsv"
    save_ucr_tsv(synthetic_ecg_dataset(n_per_class=8, length=64, seed=5), path)
    return path


def fast_args(demo_tsv, out, **over):
    args = {
        "--data": str(demo_tsv),
        "--n-inst": "4",
        "--samples": "40",
        "--seed": "3",
        "--out": str(out),
        "--percentiles": "50,95",
    }
    args.update(over)
    flat = []
    for k, v in args.items():
        if v is not None:
            flat.extend([k, v])
    return flat


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestExplainGlobal:
    def test_artifact_layout_and_exit(self, demo_tsv, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["explain-global", *fast_args(demo_tsv, out)]) == 0
        root = out / "demo" / "3"
        assert (root / "metrics.json").is_file()
        for p in ("50", "95"):
            assert (root / f"plot_{p}.csv").is_file()
            for label in ("1", "2"):
                assert (root / f"class_{label}" / f"summary_p{p}.json").is_file()
        printed = capsys.readouterr().out
        assert "macro GF" in printed

    def test_metrics_content(self, demo_tsv, tmp_path):
        out = tmp_path / "out"
        main(["explain-global", *fast_args(demo_tsv, out)])
        metrics = json.loads((out / "demo" / "3" / "metrics.json").read_text())
        assert metrics["seed"] == 3
        assert set(metrics["per_percentile"]) == {"50.0", "95.0"}
        for data in metrics["per_percentile"].values():
            assert 0 <= len(data["per_class_gf"]) == 2
        assert metrics["config"]["n_samples"] == 40

    def test_plot_csv_schema(self, demo_tsv, tmp_path):
        out = tmp_path / "out"
        main(["explain-global", *fast_args(demo_tsv, out)])
        lines = (out / "demo" / "3" / "plot_95.csv").read_text().splitlines()
        assert lines[0] == (
            "class,global_id,pep_kind,normalised_importance,attr,mean,std,count"
        )
        assert len(lines) > 1
        for line in lines[1:]:
            assert len(line.split(",")) == 8

    def test_byte_identical_reruns(self, demo_tsv, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert main(["explain-global", *fast_args(demo_tsv, out_a)]) == 0
        assert main(["explain-global", *fast_args(demo_tsv, out_b)]) == 0
        assert tree_bytes(out_a) == tree_bytes(out_b)

    def test_missing_dataset_exit_2_no_partial_output(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(
            ["explain-global", "--data", str(tmp_path / "nope.tsv"), "--out", str(out)]
        )
        assert code == 2
        assert not out.exists()
        assert "not found" in capsys.readouterr().err

    def test_seed_env_fallback(self, demo_tsv, tmp_path, monkeypatch):
        out = tmp_path / "out"
        monkeypatch.setenv("L2GTX_SEED", "3")
        args = fast_args(demo_tsv, out)
        idx = args.index("--seed")
        del args[idx : idx + 2]
        assert main(["explain-global", *args]) == 0
        assert (out / "demo" / "3").is_dir()

    def test_bad_predictor_spec_exit_2(self, demo_tsv, tmp_path):
        code = main(
            ["explain-global", *fast_args(demo_tsv, tmp_path / "o"),
             "--predictor", "oracle-of-delphi"]
        )
        assert code == 2

    def test_protocol_error_exit_3(self, demo_tsv, tmp_path, capsys):
        spec = f"external:{sys.executable} {FIXTURE_ADAPTER} --model bad-row --classes 2"
        code = main(
            ["explain-global", *fast_args(demo_tsv, tmp_path / "o"),
             "--predictor", spec]
        )
        assert code == 3
        assert "external predictor" in capsys.readouterr().err

    def test_class_count_mismatch_exit_3(self, demo_tsv, tmp_path):
        spec = f"external:{sys.executable} {FIXTURE_ADAPTER} --model uniform --classes 5"
        code = main(
            ["explain-global", *fast_args(demo_tsv, tmp_path / "o"),
             "--predictor", spec]
        )
        assert code == 3


class TestExplainLocal:
    def test_writes_explanation_json(self, demo_tsv, tmp_path):
        out = tmp_path / "out"
        code = main(
            ["explain-local", *fast_args(demo_tsv, out), "--index", "2"]
        )
        assert code == 0
        payload = json.loads(
            (out / "demo" / "3" / "local_instance_2.json").read_text()
        )
        assert payload["instance_id"] == 2
        assert "fidelity" in payload
        assert len(payload["clusters"]) <= 5
        assert "weights_histogram" in payload["diagnostics"]

    def test_top_n_respected(self, demo_tsv, tmp_path):
        out = tmp_path / "out"
        main(["explain-local", *fast_args(demo_tsv, out), "--index", "0",
              "--top-n", "1"])
        payload = json.loads(
            (out / "demo" / "3" / "local_instance_0.json").read_text()
        )
        assert len(payload["clusters"]) == 1

    def test_out_of_range_index(self, demo_tsv, tmp_path):
        code = main(
            ["explain-local", *fast_args(demo_tsv, tmp_path / "o"), "--index", "99"]
        )
        assert code == 2


class TestConfigPrecedence:
    def test_flag_beats_file_beats_default(self, demo_tsv, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "\n".join(
                [
                    f"data = {demo_tsv}",
                    "seed = 9",
                    "n_inst = 4",
                    "samples = 40",
                    "percentiles = 95  # file value",
                    f"out = {tmp_path / 'out'}",
                ]
            )
        )
        assert main(["explain-global", "--config", str(cfg), "--seed", "4"]) == 0
        # CLI seed (4) wins over file seed (9)
        assert (tmp_path / "out" / "demo" / "4").is_dir()
        metrics = json.loads(
            (tmp_path / "out" / "demo" / "4" / "metrics.json").read_text()
        )
        assert metrics["config"]["n_samples"] == 40  # from file
        assert metrics["config"]["top_n"] == 5  # default

    def test_unknown_key_rejected(self, demo_tsv, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"data = {demo_tsv}\nwarp_speed = 9\n")
        assert main(["explain-global", "--config", str(cfg)]) == 2

    def test_malformed_line_rejected(self, demo_tsv, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just some words\n")
        assert main(["explain-global", "--config", str(cfg)]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["explain-global", "--config", str(tmp_path / "no.cfg")]) == 2


class TestSelftest:
    def test_passes_clean(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 5

    def test_corruption_hook_detected(self, monkeypatch, capsys):
        monkeypatch.setenv("L2GTX_SELFTEST_CORRUPT", "ridge")
        assert main(["selftest"]) == 1
        streams = capsys.readouterr()
        assert "FAIL  ridge" in streams.out
        assert "ridge" in streams.err

    def test_subprocess_entry_point_under_time_budget(self):
        import time

        start = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "l2gtx.cli", "selftest"],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        assert time.perf_counter() - start < 60.0


class TestInputsUntouched:
    def test_explain_global_does_not_mutate_dataset(self, demo_tsv, tmp_path):
        before = demo_tsv.read_bytes()
        assert main(["explain-global", *fast_args(demo_tsv, tmp_path / "o")]) == 0
        assert demo_tsv.read_bytes() == before
