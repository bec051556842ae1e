import json

import pytest

from src.census_app import main
from src.model.run_config import GridSpec, RunConfig
from src.model.shape import Shape


@pytest.fixture
def run(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("PERSYM_FREE_BIT_LIMIT", raising=False)

    def invoke(*args):
        status = main([*args, "--config-dir", str(tmp_path / "config"), "--no-progress"])
        captured = capsys.readouterr()
        return status, captured.out, captured.err
    return invoke


# ==================== formula ====================

def test_formula_worked_example(run):
    status, out, _ = run("formula", "[2,3,3]x10")
    assert status == 0
    assert "3255 · 2^23" in out
    assert "7 · 15 · 31" in out
    assert "three-block expansions" in out


def test_formula_accepts_triple(run):
    status, out, _ = run("formula", "3", "8", "10")
    assert status == 0
    assert "[2,3,3]x10" in out
    assert "3255 · 2^23" in out


def test_formula_trivial_family(run):
    status, out, _ = run("formula", "[1]x1")
    assert status == 0
    assert "conjecture: 1\n" in out
    assert "invertible fraction: 1/2" in out


def test_formula_json(run):
    status, out, _ = run("formula", "[2,2]x4", "--format", "json")
    payload = json.loads(out)
    assert status == 0
    assert payload["conjecture"] == "384"
    assert payload["odd_part"] == "3" and payload["power_of_two"] == 7
    assert payload["theorem_count"] == "384"


def test_formula_power_of_two_style(run):
    _, out, _ = run("formula", "[2,2]x4")
    assert "384 = 3 · 2^7" in out


def test_formula_rejects_bad_shape(run):
    status, _, err = run("formula", "[4,4]x5")
    assert status == 2
    assert "error:" in err


# ==================== verify ====================

def test_verify_small_shapes(run):
    status, out, _ = run("verify", "[2,2]x4", "[1,2]x5", "[1,1,1]x3", "--format", "json")
    records = json.loads(out)
    assert status == 0
    assert [r["shape"] for r in records] == ["[2,2]x4", "[1,2]x5", "[1,1,1]x3"]
    assert all(r["match"] and r["moment_ok"] for r in records)


def test_verify_refuses_big_family(run):
    status, out, err = run("verify", "[2,3,3]x10")
    assert status == 2
    assert out == ""
    assert "--big" in err


def test_verify_grid(run):
    status, out, _ = run("verify", "--grid", "m<=2,k<=5", "--format", "json")
    records = json.loads(out)
    assert status == 0
    assert len(records) == len(GridSpec.parse("m<=2,k<=5").shapes())
    assert all(r["match"] for r in records)


def test_verify_csv(run):
    status, out, _ = run("verify", "[1,1]x2", "--format", "csv")
    lines = out.strip().splitlines()
    assert status == 0
    assert lines[0].split(",")[:4] == ["shape", "F", "delta", "k"]
    assert lines[1].startswith('"[1,1]x2",4,2,2,6,6,True,True')


def test_verify_sharded_with_checkpoints(run, tmp_path):
    checkpoint = tmp_path / "cp.json"
    status, out, _ = run("verify", "[1,2]x5", "[2,2]x4", "--shards", "4",
                         "--checkpoint", str(checkpoint), "--format", "json")
    assert status == 0
    assert {r["engine"] for r in json.loads(out)} == {"prefix/4x1"}
    assert (tmp_path / "cp.1-2x5.json").exists()
    assert (tmp_path / "cp.2-2x4.json").exists()


# ==================== census ====================

def test_census_two_unit_rows(run):
    status, out, _ = run("census", "[1,1]x2")
    assert status == 0
    assert "rank 0: 1\nrank 1: 9\nrank 2: 6\n" in out
    assert "dual moment: ok" in out


def test_census_one_by_one(run):
    _, out, _ = run("census", "[1]x1", "--engine", "naive")
    assert "rank 0: 1\nrank 1: 1\n" in out


def test_census_json_uses_decimal_strings(run):
    status, out, _ = run("census", "[2,2]x4", "--format", "json")
    payload = json.loads(out)
    assert status == 0
    assert payload["counts"]["4"] == "384"
    assert payload["total"] == "1024"
    assert payload["conserved"] and payload["moment_ok"]


def test_census_writes_to_file(run, tmp_path):
    target = tmp_path / "hist.csv"
    status, out, _ = run("census", "[1,1]x2", "--format", "csv", "--out", str(target))
    assert status == 0
    assert out == ""
    assert target.read_text().splitlines() == ["rank,count", "0,1", "1,9", "2,6"]


def test_census_unwritable_checkpoint_is_refused(run, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    status, out, err = run("census", "[1,2]x5", "--shards", "4",
                           "--checkpoint", str(blocker / "cp.json"))
    assert status == 2
    assert out == ""
    assert "cannot write checkpoint" in err.lower()


# ==================== example ====================

def test_example_worked_case_skips_census(run):
    status, out, _ = run("example", "3", "8", "10")
    assert status == 0
    assert "[2,3,3]x10" in out
    assert "3255 · 2^23" in out
    assert "census skipped" in out


def test_example_small_case_agrees(run):
    status, out, _ = run("example", "2", "3", "4", "--format", "json")
    payload = json.loads(out)
    assert status == 0
    assert payload["shape"] == "[1,2]x4"
    assert payload["paths_agree"] and payload["match"]


def test_example_single_block(run):
    _, out, _ = run("example", "1", "2", "2", "--format", "json")
    payload = json.loads(out)
    assert payload["shape"] == "[2]x2"
    assert payload["family_counts"][-1] == "4"


def test_example_rejects_bad_dimensions(run):
    status, _, _ = run("example", "3", "2", "4")
    assert status == 2


# ==================== sweep ====================

def test_sweep_small_range(run):
    status, out, _ = run("sweep", "--max-k", "10", "--max-m", "5", "--format", "json")
    payload = json.loads(out)
    assert status == 0
    assert payload["ok"]
    assert payload["triple_corrected_mismatches"] == 0
    assert payload["triple_sum_mismatches"] == payload["triple_checks"]


# ==================== argument handling ====================

def test_unknown_command_is_usage_error(run):
    with pytest.raises(SystemExit) as excinfo:
        run("factor", "[1]x1")
    assert excinfo.value.code == 2


def test_bad_grid_is_refused(run):
    status, _, err = run("verify", "--grid", "m<3")
    assert status == 2
    assert "grid" in err.lower()


@pytest.mark.parametrize("flag", ["--shards", "--workers"])
def test_zero_shards_or_workers_refused(run, flag):
    status, out, err = run("census", "[1,1]x2", flag, "0")
    assert status == 2
    assert out == ""
    assert "error:" in err


def test_grid_spec_parse():
    grid = GridSpec.parse("k<=6, m<=3, s<=3, F<=22")
    assert grid == GridSpec(max_m=3, max_height=3, max_k=6, max_free_bits=22)
    assert str(grid) == "m<=3,s<=3,k<=6,F<=22"
    with pytest.raises(ValueError):
        GridSpec.parse("m<=2,m<=3")


def test_run_config_deduplicates_shapes():
    config = RunConfig("verify", shapes=[Shape((1, 1), 2)], grid=GridSpec(max_m=2, max_k=2))
    shapes = config.all_shapes()
    assert shapes.count(Shape((1, 1), 2)) == 1
    with pytest.raises(ValueError):
        RunConfig("factor")
