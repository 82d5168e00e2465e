import json
import math
import os
from pathlib import Path

import pytest

import fairpareto as fp

DATA = Path(os.environ.get("FAIRPARETO_TEST_DATA", Path(__file__).resolve().parents[2] / "tests" / "data"))


def test_worked_example_metrics():
    m = fp.embedding_metrics(str(DATA / "worked_example.csv"))
    assert m["rank_disparity"] == 1.0
    assert m["disparity"] == 1.0
    assert m["error_ratio"] == 1.0
    assert m["ratio"] is None
    assert m["error"] == pytest.approx(0.5)


def test_ranks_count_closer_non_mates():
    ranks = fp.identification_ranks(
        [[0.0], [0.1], [1.0], [1.3], [1.1]],
        ["m1", "m1", "f1", "f1", "f2"],
        ["M", "M", "F", "F", "F"],
    )
    assert ranks == [0, 0, 1, 1, None]
    with pytest.raises(fp.DataError):
        fp.identification_ranks([[0.0]], ["a", "b"], ["g"])


def test_pareto_and_hypervolume():
    pts = [[0.1, 0.5], [0.2, 0.3], [0.3, 0.6], [0.2, 0.3]]
    assert fp.pareto_front_indices(pts) == [0, 1, 3]
    assert fp.hypervolume2d([[0.1, 0.5], [0.2, 0.3]], [1.0, 1.0]) == pytest.approx(0.61, abs=1e-12)
    with pytest.raises(fp.DataError):
        fp.hypervolume2d([[2.0, 0.1]], [1.0, 1.0])


def test_parego_and_ladder():
    assert fp.parego([0.3, 0.9], [1.0, 0.0], 0.05) == pytest.approx(0.315, abs=1e-12)
    assert fp.parego([0.2, 0.4], [0.5, 0.5]) == pytest.approx(0.215, abs=1e-12)
    assert fp.ladder(25, 100, 2) == [25, 50, 100]
    assert fp.pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert fp.pearson([1, 1], [2, 3]) is None


def test_zdt1_fidelity_bias():
    f1, f2 = fp.zdt1_mf([0.25] + [0.0] * 5, 1.0)
    assert f1 == pytest.approx(0.25)
    assert f2 == pytest.approx(0.5)
    g1, _ = fp.zdt1_mf([0.25] + [0.0] * 5, 0.5)
    assert g1 == pytest.approx(0.5)
    with pytest.raises(fp.ConfigError):
        fp.zdt1_mf([0.5], 1.0)


def test_config_space():
    configs = fp.sample_configs("dpn_fair_v1", 200, seed=1)
    assert len(configs) == 200
    for c in configs:
        assert fp.validate_config("dpn_fair_v1", c) == []
        lo, hi = (0.09, 0.8) if c["optimizer"] == "SGD" else (1e-4, 1e-2)
        assert lo <= c["lr"] <= hi
    bad = dict(configs[0], lr=5.0)
    assert fp.validate_config("dpn_fair_v1", bad)
    with pytest.raises(fp.ConfigError):
        fp.sample_configs("no_such_space")


def test_search_round_trip(tmp_path):
    out = tmp_path / "run.jsonl"
    result = fp.run_search(space="box6", max_trials=40, seed=2, out=str(out))
    assert len(result["history"]) == 40
    assert result["objectives"] == ["f1", "f2"]
    assert result["front_indices"]
    assert fp.load_run_log(str(out)) == result["history"]
    for line in out.read_text().splitlines():
        assert json.loads(line)["v"] == 1
    with pytest.raises(fp.ConfigError):
        fp.run_search()


def test_cli_in_process(tmp_path):
    code, out, _ = fp.cli(["eval-embeddings", "--file", str(DATA / "worked_example.csv"), "--metrics", "ratio"])
    assert code == 0
    assert out.splitlines() == ["metric,value", "ratio,undefined"]
    code, _, err = fp.cli(["search", "--backend", "nope"])
    assert code == 2
    assert err
    run = tmp_path / "cli.jsonl"
    code, out, _ = fp.cli(["search", "--backend", "builtin:zdt1", "--budget-trials", "30", "--out", str(run)])
    assert code == 0
    code, out, _ = fp.cli(["pareto", "--runs", str(run), "--objectives", "f1,f2"])
    assert code == 0
    assert out.startswith("config_key,f1_mean")
    assert not math.isnan(float(out.splitlines()[1].split(",")[1]))
