import json

import pandas as pd
import pytest

from fair_topk import EXIT_OK, EXIT_USAGE, main

HEADER = "id,score,income_decile,school_type,region\n"


@pytest.fixture
def worked(data_dir):
    return ["--input", str(data_dir / "worked_example.csv"), "--coding", str(data_dir / "coding_ses_school_region.json")]


def write(tmp_path, text, name="pool.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.mark.parametrize("solver", ["dp", "greedy", "greedy-merged", "lp"])
def test_solve_worked_example(capsys, worked, solver):
    assert main(["solve", *worked, "--k", "2", "--lambda", "2", "--solver", solver]) == EXIT_OK
    out = capsys.readouterr().out
    assert "J = 14.000000" in out
    assert out.endswith("a1\nb1\n")


def test_solve_without_tradeoff_is_top_k(capsys, worked):
    assert main(["solve", *worked, "--rate", "0.5"]) == EXIT_OK
    assert capsys.readouterr().out.endswith("a1\na2\n")


def test_solve_writes_selection_file(tmp_path, capsys, worked):
    out = tmp_path / "selected.csv"
    assert main(["solve", *worked, "--k", "2", "--lambda", "2", "--out", str(out), "--format", "csv"]) == EXIT_OK
    assert out.read_text(encoding="utf-8") == "id,score,class_label\na1,10,1Aa\nb1,4,3Bb\n"
    out_text = capsys.readouterr().out
    assert "J = 14.000000" in out_text
    assert "a1" not in out_text


def test_dump_table(tmp_path, worked):
    table = tmp_path / "table.csv"
    assert main(["solve", *worked, "--k", "2", "--lambda", "2", "--dump-table", str(table)]) == EXIT_OK
    frame = pd.read_csv(table)
    assert list(frame.columns) == ["class", "0", "1", "2"]
    assert frame["class"].tolist() == ["-", "1Aa", "3Bb"]
    assert frame["2"].iloc[-1] == 14.0


def test_dump_table_needs_dp(capsys, worked):
    assert main(["solve", *worked, "--k", "2", "--solver", "lp", "--dump-table", "t.csv"]) == EXIT_USAGE
    assert "--dump-table" in capsys.readouterr().err


def test_missing_score_column_is_reported(tmp_path, capsys, data_dir):
    path = write(tmp_path, "id,income_decile,school_type,region\na,1,private,high\n")
    code = main(["solve", "--input", path, "--coding", str(data_dir / "coding_ses_school_region.json"), "--k", "1"])
    assert code == EXIT_USAGE
    assert "score" in capsys.readouterr().err


def test_missing_input_file(tmp_path, capsys, data_dir):
    code = main(["stats", "--input", str(tmp_path / "absent.csv"), "--coding", str(data_dir / "coding_ses_school_region.json")])
    assert code == EXIT_USAGE
    assert capsys.readouterr().err.startswith("error:")


def test_non_utf8_input_is_a_usage_error(tmp_path, capsys, data_dir):
    path = tmp_path / "pool.csv"
    path.write_bytes(HEADER.encode() + b"x\xff,700,1,private,high\n")
    code = main(["solve", "--input", str(path), "--coding", str(data_dir / "coding_ses_school_region.json"), "--k", "1"])
    assert code == EXIT_USAGE
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "UTF-8" in err


def test_quota_above_pool(capsys, worked):
    assert main(["solve", *worked, "--k", "9"]) == EXIT_USAGE


def test_unknown_flag_exits_with_usage():
    with pytest.raises(SystemExit) as info:
        main(["solve", "--bogus"])
    assert info.value.code == 2


def test_k_and_rate_are_exclusive(worked):
    with pytest.raises(SystemExit):
        main(["solve", *worked, "--k", "2", "--rate", "0.5"])


def test_sweep_with_loose_threshold_stops_at_baseline(tmp_path, capsys, worked):
    out_dir = tmp_path / "out"
    code = main(["sweep", *worked, "--rates", "0.5", "--threshold", "1.0", "--out-dir", str(out_dir)])
    assert code == EXIT_OK
    frame = pd.read_csv(out_dir / "sweep_p0.50.csv")
    assert len(frame) == 1
    assert frame["lambda"].iloc[0] == 0.0
    assert "1 points, parity" in capsys.readouterr().out


def test_sweep_outputs_are_reproducible(tmp_path, worked):
    first, second = tmp_path / "a", tmp_path / "b"
    for out_dir in (first, second):
        assert main(["sweep", *worked, "--rates", "0.5,0.25", "--out-dir", str(out_dir)]) == EXIT_OK
    names = sorted(p.name for p in first.iterdir())
    assert len(names) == 8
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_sweep_rejects_bad_rates(capsys, tmp_path, worked):
    assert main(["sweep", *worked, "--rates", "1.5", "--out-dir", str(tmp_path)]) == EXIT_USAGE


def test_gen_then_stats(tmp_path, capsys, data_dir):
    pool = tmp_path / "synthetic.csv"
    coding = tmp_path / "coding.json"
    code = main(["gen", "--spec", str(data_dir / "synthetic_12class.json"), "--out", str(pool),
                 "--coding-out", str(coding)])
    assert code == EXIT_OK
    assert "10000 candidates in 12 classes" in capsys.readouterr().out

    stats_out = tmp_path / "stats.csv"
    assert main(["stats", "--input", str(pool), "--coding", str(coding), "--out", str(stats_out)]) == EXIT_OK
    frame = pd.read_csv(stats_out)
    assert len(frame) == 12
    assert frame["size"].sum() == 10_000


def test_gen_seed_override_changes_scores(tmp_path, data_dir):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"class_specs": [
        {"label": "X", "size": 30, "score_mean": 700, "score_stddev": 40}]}), encoding="utf-8")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["gen", "--spec", str(spec), "--out", str(a), "--seed", "1"]) == EXIT_OK
    assert main(["gen", "--spec", str(spec), "--out", str(b), "--seed", "2"]) == EXIT_OK
    assert a.read_bytes() != b.read_bytes()


def test_stats_single_class(tmp_path, capsys, data_dir):
    path = write(tmp_path, HEADER + "a,700,1,private,high\nb,800,2,private,high\n")
    assert main(["stats", "--input", path, "--coding", str(data_dir / "coding_ses_school_region.json")]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    assert lines[2].split()[:3] == ["1Aa", "2", "750.00"]


def test_oracle_on_worked_example(capsys, worked):
    assert main(["oracle", *worked, "--k", "2", "--lambda", "2", "--subsets"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "J = 14.000000" in out
    assert "subset oracle J = 14.000000" in out


def test_oracle_guard_is_a_usage_error(tmp_path, capsys, data_dir):
    rows = "".join(f"x{i},{600 + i},1,private,high\n" for i in range(21))
    path = write(tmp_path, HEADER + rows)
    code = main(["oracle", "--input", path, "--coding", str(data_dir / "coding_ses_school_region.json"),
                 "--k", "3", "--subsets"])
    assert code == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_tracks(tmp_path, capsys, data_dir):
    out_dir = tmp_path / "tracks"
    code = main(["tracks", "--manifest", str(data_dir / "pools" / "manifest.json"),
                 "--coding", str(data_dir / "coding_ses_school_region.json"), "--out-dir", str(out_dir)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("P1: p=0.25")
    assert "P4: p=0.17" in out
    summary = pd.read_csv(out_dir / "tracks.csv")
    assert summary["program_id"].tolist() == ["P1", "P4"]
    assert (out_dir / "tracks_summary.svg").exists()
    assert (out_dir / "sweep_P4.csv").exists()


def test_bench(tmp_path, data_dir):
    pool = tmp_path / "synthetic.csv"
    coding = tmp_path / "coding.json"
    assert main(["gen", "--spec", str(data_dir / "synthetic_12class.json"), "--out", str(pool),
                 "--coding-out", str(coding)]) == EXIT_OK
    out = tmp_path / "bench.csv"
    code = main(["bench", "--input", str(pool), "--coding", str(coding), "--sizes", "200,100",
                 "--rate", "0.1", "--lambda", "50", "--out", str(out)])
    assert code == EXIT_OK
    frame = pd.read_csv(out)
    assert frame["n"].tolist() == [100, 100, 200, 200]
    assert frame["solver"].tolist() == ["dp", "greedy-merged"] * 2
    assert frame["objective"].iloc[0] == pytest.approx(frame["objective"].iloc[1])
