import csv
import json

import pytest

from groupopt.cli import main

PANEL = "\n".join(
    ["id,gender,age,consent"]
    + [
        f"p{i:02d},{'m' if i % 2 else 'f'},{'young' if i % 3 else 'old'},{'no' if i < 15 else 'yes'}"
        for i in range(30)
    ]
) + "\n"


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "panel.csv").write_text(PANEL)
    config = {
        "id_column": "id",
        "demographic_columns": ["gender", "age"],
        "cluster_column": "consent",
        "cluster_value": "no",
        "num_tables": 3,
        "num_cluster_tables": 2,
        "num_rounds": 3,
        "rng_seed": 7,
    }
    (tmp_path / "config.json").write_text(json.dumps(config))
    return tmp_path


def allocate(workdir, out="out", extra=()):
    return main([
        "allocate",
        "--panel", str(workdir / "panel.csv"),
        "--config", str(workdir / "config.json"),
        "--out", str(workdir / out),
        *extra,
    ])


class TestAllocate:
    def test_valid_run_writes_both_files(self, workdir, capsys):
        assert allocate(workdir) == 0
        assert (workdir / "out" / "allocations.csv").exists()
        assert (workdir / "out" / "report.json").exists()
        printed = capsys.readouterr().out
        assert "geometric score" in printed
        assert "excess" in printed

    def test_infeasible_cluster_tables_exit_2_with_suggestion(self, workdir, capsys):
        code = allocate(workdir, extra=["--cluster-tables", "1"])
        assert code == 2
        err = capsys.readouterr().err
        assert "suggestion" in err
        assert "at least 2" in err  # 15 cluster agents need two 10-seat tables

    def test_same_seed_twice_is_byte_identical(self, workdir):
        assert allocate(workdir, out="a", extra=["--seed", "7"]) == 0
        assert allocate(workdir, out="b", extra=["--seed", "7"]) == 0
        assert (workdir / "a" / "allocations.csv").read_bytes() == (
            workdir / "b" / "allocations.csv"
        ).read_bytes()
        assert (workdir / "a" / "report.json").read_bytes() == (
            workdir / "b" / "report.json"
        ).read_bytes()

    def test_flag_overrides_beat_config(self, workdir):
        assert allocate(workdir, extra=["--rounds", "5"]) == 0
        report = json.loads((workdir / "out" / "report.json").read_text())
        assert report["config"]["num_rounds"] == 5

    def test_env_seed_is_the_default(self, workdir, monkeypatch):
        config = json.loads((workdir / "config.json").read_text())
        del config["rng_seed"]
        (workdir / "config.json").write_text(json.dumps(config))
        monkeypatch.setenv("GROUPOPT_SEED", "99")
        assert allocate(workdir) == 0
        report = json.loads((workdir / "out" / "report.json").read_text())
        assert report["config"]["rng_seed"] == 99

    def test_missing_panel_file_exits_1(self, workdir, capsys):
        code = main([
            "allocate",
            "--panel", str(workdir / "nope.csv"),
            "--config", str(workdir / "config.json"),
            "--out", str(workdir / "out"),
        ])
        assert code == 1

    def test_clustered_summary_shows_na_excess(self, workdir, capsys):
        assert allocate(workdir) == 0
        assert "n/a (clustering)" in capsys.readouterr().out


class TestEvaluate:
    def test_evaluating_own_output_reproduces_the_report(self, workdir):
        assert allocate(workdir) == 0
        code = main([
            "evaluate",
            "--allocations", str(workdir / "out" / "allocations.csv"),
            "--panel", str(workdir / "panel.csv"),
            "--config", str(workdir / "config.json"),
            "--out", str(workdir / "report2.json"),
        ])
        assert code == 0
        assert (workdir / "report2.json").read_bytes() == (
            workdir / "out" / "report.json"
        ).read_bytes()

    def test_cluster_agent_on_wrong_table_exits_2(self, workdir, capsys):
        assert allocate(workdir) == 0
        path = workdir / "out" / "allocations.csv"
        rows = list(csv.reader(path.read_text().splitlines()))
        # p00 is a cluster participant: trade places with a round-1
        # occupant of the non-cluster table 3 to keep occupancies exact
        p00_row = next(r for r in rows[1:] if r[0] == "1" and r[1] == "p00")
        original_table = p00_row[2]
        partner = next(r for r in rows[1:] if r[0] == "1" and r[2] == "3")
        p00_row[2], p00_row[3] = "3", "false"
        partner[2], partner[3] = original_table, "true"
        path.write_text("\n".join(",".join(r) for r in rows) + "\n")
        code = main([
            "evaluate",
            "--allocations", str(path),
            "--panel", str(workdir / "panel.csv"),
            "--config", str(workdir / "config.json"),
        ])
        assert code == 2
        assert "cluster" in capsys.readouterr().err

    def test_external_allocation_import(self, workdir, capsys):
        # hand-written allocation honouring all constraints
        lines = ["round,id,table,cluster_table"]
        for i in range(30):
            table = (i % 2) + 1 if i < 15 else 3 if i < 25 else (i % 2) + 1
            lines.append(f"1,p{i:02d},{table},{'true' if table < 3 else 'false'}")
        # rebalance: tables need exactly 10 each; easiest valid split is
        # cluster agents p00..p14 on tables 1-2, rest fills
        rows = ["round,id,table,cluster_table"]
        for i in range(30):
            if i < 15:
                table = 1 if i < 10 else 2
            else:
                table = 2 if i < 20 else 3
            rows.append(f"1,p{i:02d},{table},{'true' if table < 3 else 'false'}")
        path = workdir / "external.csv"
        path.write_text("\n".join(rows) + "\n")
        config = json.loads((workdir / "config.json").read_text())
        config["num_rounds"] = 1
        (workdir / "config1.json").write_text(json.dumps(config))
        code = main([
            "evaluate",
            "--allocations", str(path),
            "--panel", str(workdir / "panel.csv"),
            "--config", str(workdir / "config1.json"),
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["schema_version"] == "1"


class TestBench:
    def test_small_grid_produces_nine_cells_per_dataset(self, workdir):
        suite = {
            "seeds": 1,
            "rounds": [1, 2, 3],
            "table_deltas": [-1, 0, 1],
            "datasets": [{"name": "tiny", "instance": "synth30"}],
        }
        (workdir / "suite.json").write_text(json.dumps(suite))
        out = workdir / "bench"
        assert main(["bench", "--suite", str(workdir / "suite.json"), "--out", str(out)]) == 0
        with open(out / "summary.csv") as f:
            cells = list(csv.DictReader(f))
        assert len(cells) == 9
        assert {c["tables"] for c in cells} == {"2", "3", "4"}
        with open(out / "results.csv") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 9
        assert (out / "curves.json").exists()

    def test_empty_grid_exits_zero_with_empty_outputs(self, workdir):
        (workdir / "suite.json").write_text(json.dumps({"datasets": []}))
        out = workdir / "bench"
        assert main(["bench", "--suite", str(workdir / "suite.json"), "--out", str(out)]) == 0
        assert (out / "results.csv").read_text().strip().count("\n") == 0

    def test_excess_file_limited_to_non_clustering_cells(self, workdir):
        suite = {
            "seeds": 1,
            "rounds": [2],
            "table_deltas": [0],
            "datasets": [
                {"name": "open", "instance": "synth30", "clustered": False},
                {"name": "closed", "instance": "synth30", "clustered": True},
            ],
        }
        (workdir / "suite.json").write_text(json.dumps(suite))
        out = workdir / "bench"
        assert main(["bench", "--suite", str(workdir / "suite.json"), "--out", str(out)]) == 0
        with open(out / "excess.csv") as f:
            rows = list(csv.DictReader(f))
        assert rows and all(r["dataset"] == "open" for r in rows)
        with open(out / "results.csv") as f:
            all_rows = list(csv.DictReader(f))
        assert any(r["dataset"] == "closed" for r in all_rows)

    def test_failed_cells_reported_and_exit_1(self, workdir, capsys):
        suite = {
            "seeds": 1,
            "rounds": [1],
            "table_deltas": [0],
            "datasets": [
                {"name": "good", "instance": "synth30"},
                {"name": "bad", "instance": "no-such-instance"},
            ],
        }
        (workdir / "suite.json").write_text(json.dumps(suite))
        out = workdir / "bench"
        code = main(["bench", "--suite", str(workdir / "suite.json"), "--out", str(out)])
        assert code == 1
        assert "bad" in capsys.readouterr().err
        with open(out / "summary.csv") as f:
            assert len(list(csv.DictReader(f))) == 1  # the good cell still ran
