import json
from pathlib import Path

import pytest

from ymhlab import cli


def run(args):
    return cli.main(args)


class TestValidation:
    def test_unknown_experiment(self, tmp_path):
        assert run(["run", "frobnicate", "--out", str(tmp_path)]) == 2

    def test_unknown_key(self, tmp_path):
        assert run(["run", "bps-energy", "--out", str(tmp_path),
                    "--set", "wibble=3"]) == 2

    def test_increasing_ladder_rejected(self, tmp_path):
        assert run(["run", "recovery-gamma", "--out", str(tmp_path),
                    "--set", "ladder=0.1 0.2"]) == 2

    def test_bad_set_syntax(self, tmp_path):
        assert run(["run", "bps-energy", "--out", str(tmp_path),
                    "--set", "nodes"]) == 2

    def test_missing_config_file(self, tmp_path):
        assert run(["run", "bps-energy", "--out", str(tmp_path),
                    "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_config_file_and_overrides(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nnodes = 21\nradius = 5\n")
        out = tmp_path / "out"
        assert run(["run", "bps-energy", "--config", str(cfg),
                    "--set", "box_half=2", "--out", str(out)]) == 0
        used = (out / "config_used.txt").read_text()
        assert "nodes = 21" in used and "box_half = 2" in used


class TestRunsAndOutputs:
    def test_bps_energy_outputs(self, tmp_path):
        out = tmp_path / "bps"
        assert run(["run", "bps-energy", "--out", str(out),
                    "--set", "nodes=21", "--set", "box_half=2",
                    "--set", "radius=10"]) == 0
        recs = [json.loads(line) for line in
                (out / "results.jsonl").read_text().splitlines()]
        kinds = {r["kind"] for r in recs}
        assert {"radial_oracle", "grid_vs_box_oracle"} <= kinds
        assert all("config_hash" in r and "version" in r for r in recs)
        assert (out / "radial_energy_density.png").exists()
        assert (out / "radial_energy_density.csv").exists()
        head = (out / "energy_growth.csv").read_text().splitlines()[0]
        assert head.startswith("# config=")

    def test_deterministic_rerun(self, tmp_path):
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            assert run(["run", "inequality-audit", "--out", str(out),
                        "--set", "seeds=4", "--set", "nodes=7"]) == 0
            outs.append(out)
        for name in ("results.jsonl", "margins.csv"):
            assert (outs[0] / name).read_bytes() == \
                (outs[1] / name).read_bytes()

    def test_numerical_failure_exit_code(self, tmp_path):
        # omega on a sphere where |Phi| < 3/4 is a numerical failure
        out = tmp_path / "bad"
        code = run(["run", "quantization", "--out", str(out),
                    "--set", "radii=0.1", "--set", "nodes=9 11"])
        assert code == 3
        recs = [json.loads(line) for line in
                (out / "results.jsonl").read_text().splitlines()]
        assert recs[-1]["kind"] == "failure"

    def test_slices_small(self, tmp_path):
        out = tmp_path / "slices"
        assert run(["run", "slices", "--out", str(out),
                    "--set", "nodes3=9", "--set", "nodes4=5"]) == 0
        recs = {json.loads(line)["kind"]
                for line in (out / "results.jsonl").read_text().splitlines()}
        assert {"fubini", "coarea", "slice_match"} <= recs
