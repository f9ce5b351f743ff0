import csv
import json

import pytest

from congest_sssp import harness
from congest_sssp.cli import main as cli_main, parse_seeds
from congest_sssp.errors import InsufficientData, ParamError
from congest_sssp.graph_model import GeneratorSpec, generate, load
from congest_sssp.harness import (ExperimentConfig, ReportRecord, complexity_report,
                                  fit_exponent, read_records, replay, run_algorithm,
                                  run_experiment, store_artifact)


def planted(exponent, ns=(64, 128, 256, 512, 1024), family="expander"):
    return [ReportRecord(n, 4, 1, 1, "auto", 0, int(round(n ** exponent * 10)), 1, True, 0.0,
                         family, "main") for n in ns]


@pytest.mark.parametrize("exponent", [1.0, 0.75])
def test_planted_slopes(exponent):
    fits = complexity_report(planted(exponent))
    assert len(fits) == 1
    assert abs(fits[0].slope - exponent) <= 0.01
    assert fits[0].r2 > 0.999
    assert fits[0].regression_failure == (exponent > 0.95)


def test_too_few_sizes():
    with pytest.raises(InsufficientData):
        complexity_report(planted(1.0, ns=(10, 20, 40)))
    with pytest.raises(InsufficientData):
        fit_exponent([1, 2, 3], [1, 2, 3])
    # a small group is skipped unless strict
    rows = planted(1.0) + planted(1.0, ns=(8, 16), family="other")
    assert len(complexity_report(rows)) == 1
    with pytest.raises(InsufficientData):
        complexity_report(rows, strict=True)


def test_config_validation(tmp_path):
    with pytest.raises(ParamError):
        ExperimentConfig(instances=[], seeds=[])
    with pytest.raises(ParamError):
        ExperimentConfig(instances=[], algorithms=["dijkstra"])
    with pytest.raises(ParamError):
        ExperimentConfig(instances=[], variant="fast")
    cfg = ExperimentConfig(instances=[{"family": "path", "n": 5, "lam": 2}], seeds=[1, 2])
    p = tmp_path / "c.json"
    p.write_text(cfg.to_json())
    assert ExperimentConfig.from_file(p) == cfg


def test_baseline_record(tmp_path):
    cfg = ExperimentConfig(instances=[{"family": "cycle", "n": 40, "lam": 5, "seed": 1}],
                           algorithms=["bellman_ford_baseline"], out=str(tmp_path / "r"))
    (rec,) = run_experiment(cfg)
    assert rec.rounds == 39 and rec.exact_match is True
    assert (tmp_path / "r.csv").exists() and (tmp_path / "r.jsonl").exists()


def test_sweep_records_all_exact(tmp_path):
    inst = [{"family": "low_diameter_expander", "n": n, "lam": 4, "seed": 0} for n in (64, 128)]
    cfg = ExperimentConfig(instances=inst, algorithms=["main"], seeds=[0, 1, 2],
                           out=str(tmp_path / "sweep"))
    recs = run_experiment(cfg)
    assert len(recs) == 6
    assert all(r.exact_match for r in recs if not r.error)
    assert all(r.rounds > 0 and r.d_hat >= 1 for r in recs)


def test_corrupted_instance_continues(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2 5\n0 1 1 1\n")
    good = {"family": "path", "n": 6, "lam": 3, "seed": 0}
    cfg = ExperimentConfig(instances=[str(bad), good], algorithms=["main"],
                           out=str(tmp_path / "rep"))
    recs = run_experiment(cfg)
    assert recs[0].error.startswith("ParseError")
    assert recs[1].error == "" and recs[1].exact_match is True


def _strip_wall(path):
    rows = list(csv.DictReader(open(path)))
    for r in rows:
        r.pop("wall_time")
    return rows


def test_batch_determinism(tmp_path):
    inst = [{"family": "erdos_renyi_connected", "n": 60, "lam": 30, "seed": 2}]
    a = ExperimentConfig(instances=inst, algorithms=["main", "multi_source"], seeds=[0, 1],
                         kappa=2, out=str(tmp_path / "a"))
    b = ExperimentConfig(**{**a.__dict__, "out": str(tmp_path / "b")})
    run_experiment(a)
    run_experiment(b)
    assert _strip_wall(tmp_path / "a.csv") == _strip_wall(tmp_path / "b.csv")
    recs = read_records(tmp_path / "a.jsonl")
    assert [r.rounds for r in recs] == [r.rounds for r in read_records(tmp_path / "a.csv")]


def test_mismatch_leaves_artifact(tmp_path, monkeypatch):
    real = harness.run_algorithm

    def broken(*args, **kw):
        tables, met, sources = real(*args, **kw)
        return tables + 1, met, sources

    monkeypatch.setattr(harness, "run_algorithm", broken)
    cfg = ExperimentConfig(instances=[{"family": "path", "n": 8, "lam": 3}], seeds=[4],
                           out=str(tmp_path / "rep"))
    (rec,) = run_experiment(cfg)
    assert rec.exact_match is False
    (art,) = (tmp_path / "failures").iterdir()
    meta = json.loads((art / "meta.json").read_text())
    assert meta["seed"] == 4 and meta["below_oracle"] is False
    assert load(art / "instance.txt").n == 8
    monkeypatch.setattr(harness, "run_algorithm", real)
    assert replay(art)["identical"] is False


def test_store_and_replay_identical(tmp_path):
    inst = generate(GeneratorSpec("erdos_renyi_connected", 50, 20, 5))
    tables, met, sources = run_algorithm(inst, "multi_source", 3, kappa=3)
    art = store_artifact(tmp_path / "art", inst, "multi_source", 3, tables, met, sources,
                         kappa=3)
    res = replay(art)
    assert res["identical"] and res["sources"] == sources


# --- CLI --------------------------------------------------------------------

def test_parse_seeds():
    assert parse_seeds("0-3,7") == [0, 1, 2, 3, 7]
    assert parse_seeds("5") == [5]


def test_cli_end_to_end(tmp_path, capsys):
    g = tmp_path / "g.txt"
    assert cli_main(["gen", "--family", "cycle", "--n", "12", "--lam", "9", "--seed", "3",
                     "--out", str(g)]) == 0
    assert load(g).n == 12
    out = tmp_path / "run"
    assert cli_main(["run", "--instance", str(g), "--algorithm", "main",
                     "bellman_ford_baseline", "--seeds", "0-1", "--oracle-check",
                     "--round-cap-multiplier", "64", "--out", str(out)]) == 0
    recs = read_records(tmp_path / "run.csv")
    assert len(recs) == 4 and all(r.exact_match for r in recs)

    sweep = tmp_path / "sweep"
    assert cli_main(["run", "--family", "low_diameter_expander", "--n", "32", "64", "128",
                     "256", "--lam", "2", "--seeds", "0", "--variant", "queue",
                     "--no-oracle-check", "--out", str(sweep)]) == 0
    capsys.readouterr()
    fits_json = tmp_path / "fits.json"
    assert cli_main(["report", str(tmp_path / "sweep.jsonl"), "--ignore-diameter",
                     "--out", str(fits_json)]) == 0
    assert "slope=" in capsys.readouterr().out
    assert json.loads(fits_json.read_text())[0]["points"] == 4
    assert cli_main(["report", str(tmp_path / "run.csv")]) == 3


def test_cli_replay(tmp_path, capsys):
    inst = generate(GeneratorSpec("grid", 25, 7, 1))
    tables, met, sources = run_algorithm(inst, "main", 0)
    art = store_artifact(tmp_path / "a", inst, "main", 0, tables, met, sources)
    assert cli_main(["replay", str(art)]) == 0
    assert json.loads(capsys.readouterr().out)["identical"] is True
    meta = json.loads((art / "meta.json").read_text())
    meta["digest"] = "0" * 64
    (art / "meta.json").write_text(json.dumps(meta))
    assert cli_main(["replay", str(art)]) == 1


def test_cli_run_needs_input(capsys):
    assert cli_main(["run"]) == 2
