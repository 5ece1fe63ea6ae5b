import json

import numpy as np
import pytest

from clmeval.cli import main
from clmeval.io import write_dataset_csv

from conftest import blobs


@pytest.fixture
def datasets(tmp_path):
    X, labels = blobs(0, sizes=[60, 60], dim=3, spread=4.0)
    write_dataset_csv(tmp_path / "sep.csv", X, labels)
    shuffled = np.random.default_rng(0).permutation(labels)
    write_dataset_csv(tmp_path / "shuf.csv", X, shuffled)
    return tmp_path


def test_score_json(datasets, capsys):
    code = main(["score", "--input", str(datasets / "sep.csv"), "--measure", "ch_adj",
                 "--k", "1", "--seed", "7"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert 0.0 <= report["score"] <= 1.0
    assert report["seed"] == 7 and report["config"]["k"] == 1.0


def test_uncalibrated_k_warns(datasets, capsys):
    assert main(["score", "--input", str(datasets / "sep.csv"), "--measure", "ch_adj"]) == 0
    assert "not calibrated" in capsys.readouterr().err


def test_unknown_measure_exits_2(datasets, capsys):
    with pytest.raises(SystemExit) as info:
        main(["score", "--input", str(datasets / "sep.csv"), "--measure", "nope"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_singleton_class_exits_3(tmp_path, capsys):
    (tmp_path / "s.csv").write_text("x,label\n0,a\n1,a\n5,b\n")
    assert main(["score", "--input", str(tmp_path / "s.csv"), "--measure", "sc_adj"]) == 3
    assert "'b'" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    assert main(["score", "--input", str(tmp_path / "none.csv"), "--measure", "ch"]) == 2


def test_monte_carlo_requires_seed(datasets):
    assert main(["score", "--input", str(datasets / "sep.csv"), "--measure", "ch_adj",
                 "--min-mode", "monte_carlo"]) == 2


def test_rank_orders_and_reports_failures(datasets, capsys):
    (datasets / "broken.csv").write_text("x,label\n1,a\n2,a\n")
    out = datasets / "rank.json"
    assert main(["rank", str(datasets), "--k", "1", "--output", str(out)]) == 0
    report = json.loads(out.read_text())
    assert [r["dataset"] for r in report["rows"]] == ["sep", "shuf"]
    assert report["failures"][0]["dataset"] == "broken"


def test_rank_single_and_none(datasets, tmp_path):
    out = tmp_path / "r.csv"
    assert main(["rank", str(datasets / "sep.csv"), "--format", "csv", "--output", str(out)]) == 0
    assert len(out.read_text().strip().splitlines()) == 2
    (tmp_path / "empty").mkdir()
    assert main(["rank", str(tmp_path / "empty")]) == 2


def test_rank_ties_by_name(tmp_path):
    X, labels = blobs(1, sizes=[20, 20])
    for name in ("b", "a", "c"):
        write_dataset_csv(tmp_path / f"{name}.csv", X, labels)
    out = tmp_path / "r.json"
    assert main(["rank", str(tmp_path), "--k", "1", "--output", str(out)]) == 0
    assert [r["dataset"] for r in json.loads(out.read_text())["rows"]] == ["a", "b", "c"]


def test_generate_and_reproducible(tmp_path):
    argv = ["generate", "--count", "3", "--n", "200", "--dim", "10", "--seed", "1",
            "--outdir", str(tmp_path / "g")]
    assert main(argv) == 0
    files = sorted(p.name for p in (tmp_path / "g").iterdir())
    assert files == ["dataset_000.csv", "dataset_001.csv", "dataset_002.csv", "manifest.json"]
    first = {f: (tmp_path / "g" / f).read_bytes() for f in files}
    assert main(argv) == 0
    assert first == {f: (tmp_path / "g" / f).read_bytes() for f in files}


def test_seed_is_mandatory_for_random_commands(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["generate", "--count", "1", "--outdir", str(tmp_path / "x")])
    assert info.value.code == 2
    assert not (tmp_path / "x").exists()


def test_improve(tmp_path):
    X, labels = blobs(2, sizes=[50, 50], dim=2, spread=3.0)
    noise = np.random.default_rng(0).normal(scale=4.0, size=(100, 10))
    write_dataset_csv(tmp_path / "p.csv", np.hstack([X, noise]), labels)
    assert main(["improve", "--input", str(tmp_path / "p.csv"), "--k", "1", "--candidates", "200",
                 "--seed", "3", "--outdir", str(tmp_path / "out")]) == 0
    report = json.loads((tmp_path / "out" / "improve.json").read_text())
    assert report["score"] >= report["original_score"]
    assert (tmp_path / "out" / "manifest.json").exists()


def test_stability(tmp_path, capsys):
    rows = ["dataset,A,B,C"] + [f"d{i},{0.5 + i / 100},{i / 100},{(i * 7 % 10) / 10}" for i in range(20)]
    (tmp_path / "t.csv").write_text("\n".join(rows) + "\n")
    assert main(["stability", "--scores", str(tmp_path / "t.csv"), "--subset", "10",
                 "--sims", "100", "--seed", "5"]) == 0
    P = np.array(json.loads(capsys.readouterr().out)["matrix"])
    assert np.allclose(P, P.T) and np.all((P >= 0.5) & (P <= 1))
    assert P[0, 1] == 1.0


def test_calibrate(tmp_path):
    lines = ["dataset,score"]
    for i in range(6):
        X, labels = blobs(i, sizes=[30, 30], dim=2, spread=0.5 + i)
        write_dataset_csv(tmp_path / f"d{i}.csv", X, labels)
        lines.append(f"d{i}.csv,{min(1.0, 0.15 * i + 0.05)}")
    (tmp_path / "s.csv").write_text("\n".join(lines) + "\n")
    assert main(["calibrate", "--scores", str(tmp_path / "s.csv"), "--outdir", str(tmp_path / "c")]) == 0
    result = json.loads((tmp_path / "c" / "calibration.json").read_text())
    assert result["k"] > 0 and result["measure"] == "ch_adj"


def test_ablation_small(tmp_path):
    assert main(["ablation", "--axis", "dimensionality", "--bases", "2", "--base-n", "60",
                 "--base-dim", "10", "--seed", "1", "--workers", "1",
                 "--outdir", str(tmp_path / "a")]) == 0
    report = json.loads((tmp_path / "a" / "ablation_dimensionality.json").read_text())
    assert set(report["averages"]) == {"ch", "ch_adj"}


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as info:
        main(["score", "--help"])
    assert info.value.code == 0
    assert "--measure" in capsys.readouterr().out
