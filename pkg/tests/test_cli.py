import json
import math

import numpy as np
import pytest

from evogate import files, genome
from evogate.cli import main


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def read_table(path):
    """Parse metadata block plus the first CSV section."""
    meta = {}
    rows = []
    header = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# ") and " = " in line:
                key, _, value = line[2:].partition(" = ")
                meta[key] = value
            elif line.startswith("#"):
                continue
            elif header is None:
                header = line.split(",")
            else:
                cells = line.split(",")
                if len(cells) != len(header) or cells[0] == header[0]:
                    break  # a second header row starts the summary section
                rows.append(dict(zip(header, cells)))
    return meta, header, rows


# ------------------------------------------------------------ config format

def test_parse_config_text():
    parsed = files.parse_config_text("# comment\n npop = 30 \n\nthreshold=0.01\n")
    assert parsed == {"npop": "30", "threshold": "0.01"}
    with pytest.raises(ValueError):
        files.parse_config_text("npop 30")
    with pytest.raises(ValueError):
        files.parse_config_text("npop =")
    with pytest.raises(ValueError):
        files.parse_config_text("npop = 1\nnpop = 2")


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text("npop = 24\nthreshold = 0.5\nseeds = 2\n")
    out = tmp_path / "out"
    rc = main([
        "sweep", "--config", str(cfg_file), "--npop", "12",
        "--base-seed", "5", "--out", str(out),
    ])
    assert rc == 0
    echoed = capsys.readouterr().out
    assert "npop = 12" in echoed  # flag wins over file
    assert "threshold = 0.5" in echoed  # file wins over default
    meta, _, _ = read_table(out / "runs.csv")
    assert meta["npop"] == "12"
    assert meta["threshold"] == "0.5"
    assert meta["seeds"] == "2"


def test_unknown_config_key_fails(tmp_path):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("population = 10\n")
    assert main(["run", "--config", str(cfg_file), "--out", str(tmp_path / "o")]) == 1


def test_usage_error_exit_code():
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["--version"]) == 0


# -------------------------------------------------------------------- run

def test_run_writes_all_outputs(tmp_path):
    out = tmp_path / "single"
    rc = main([
        "run", "--task", "deutsch", "--npop", "40", "--base-seed", "7",
        "--out", str(out),
    ])
    assert rc == 0
    run_csv = out / "run_7.csv"
    genome_json = out / "genome_7.json"
    analysis_json = out / "analysis_7.json"
    assert run_csv.exists() and genome_json.exists() and analysis_json.exists()

    meta, header, rows = read_table(run_csv)
    assert meta["seed"] == "7"
    assert "rounding_bound" in meta
    assert header == ["run_id", "seed", "generation", "mean_fitness",
                      "fluctuation", "best_fitness"]
    assert [r["generation"] for r in rows] == [str(g + 1) for g in range(len(rows))]

    # the trailing summary row carries the serialized best genome
    lines = run_csv.read_text().splitlines()
    assert lines[-2].split(",")[0] == "run_id"
    summary = dict(zip(lines[-2].split(","), lines[-1].split(",")))
    assert summary["q_c"] == str(len(rows))
    assert summary["termination_reason"] in ("converged", "generation-cap")
    best = genome.genome_from_field(summary["best_genome"])
    assert best.shape == (2, 3, 15)

    payload = json.loads(genome_json.read_text())
    assert genome.genome_from_strings(payload["slots"]).shape == (2, 3, 15)
    assert np.array_equal(genome.genome_from_strings(payload["slots"]), best)

    side = json.loads(analysis_json.read_text())
    assert side["metadata"]["seed"] == 7
    assert len(side["rotations"]) == 2
    assert 0.0 <= side["prepared_state"]["alpha"] <= 1.0
    assert "orthogonality_defect" in side["decision"]


def test_run_trivial_threshold_converges_immediately(tmp_path):
    out = tmp_path / "fast"
    rc = main(["run", "--threshold", "1.0", "--npop", "10", "--out", str(out)])
    assert rc == 0
    _, _, rows = read_table(out / "run_1.csv")
    assert len(rows) == 1


def test_run_generation_cap_exit_code(tmp_path):
    out = tmp_path / "capped"
    rc = main([
        "run", "--npop", "6", "--threshold", "1e-12", "--max-gen", "3",
        "--out", str(out),
    ])
    assert rc == 2


def test_run_missing_task_writes_nothing(tmp_path):
    out = tmp_path / "nothing"
    rc = main(["run", "--task", str(tmp_path / "no_such_task.json"), "--out", str(out)])
    assert rc == 1
    assert not out.exists()


def test_run_accepts_task_file(tmp_path):
    from evogate import tasks

    task_path = tmp_path / "deutsch_copy.json"
    tasks.save_task(tasks.deutsch_task(), task_path)
    out = tmp_path / "fromfile"
    rc = main(["run", "--task", str(task_path), "--npop", "20", "--out", str(out)])
    assert rc in (0, 2)
    assert (out / "run_1.csv").exists()


# ------------------------------------------------------------------ sweep

def test_sweep_zero_seeds_fails(tmp_path):
    assert main(["sweep", "--seeds", "0", "--out", str(tmp_path / "o")]) == 1


def test_sweep_outputs_and_worker_determinism(tmp_path):
    args = ["sweep", "--npop", "16", "--seeds", "4", "--base-seed", "3"]
    out1 = tmp_path / "w1"
    out2 = tmp_path / "w2"
    assert main(args + ["--out", str(out1), "--workers", "1"]) == 0
    assert main(args + ["--out", str(out2), "--workers", "2"]) == 0
    for name in ("runs.csv", "stats.csv", "alpha_phi.csv"):
        assert read_bytes(out1 / name) == read_bytes(out2 / name), name

    meta, header, rows = read_table(out1 / "runs.csv")
    assert header == ["run_id", "seed", "q_c", "epsilon_opt", "best_fitness",
                      "termination_reason", "best_genome"]
    assert [r["seed"] for r in rows] == ["3", "4", "5", "6"]
    assert "workers" not in meta and "out" not in meta

    _, _, alpha_rows = read_table(out1 / "alpha_phi.csv")
    assert len(alpha_rows) == 4
    for row in alpha_rows:
        assert 0.0 <= float(row["alpha"]) <= 1.0
        assert -math.pi < float(row["phi"]) <= math.pi


def test_sweep_records_failures_and_continues(tmp_path, monkeypatch):
    import evogate.cli as cli_mod

    real_run = cli_mod.ga_run

    def flaky(ga_cfg, task, seed):
        if seed == 2:
            raise RuntimeError("forced failure")
        return real_run(ga_cfg, task, seed)

    monkeypatch.setattr(cli_mod, "ga_run", flaky)
    out = tmp_path / "flaky"
    rc = main(["sweep", "--npop", "12", "--seeds", "3", "--base-seed", "1",
               "--out", str(out)])
    assert rc == 0  # two runs still succeeded
    _, _, rows = read_table(out / "runs.csv")
    assert [r["termination_reason"] for r in rows] == ["converged", "error", "converged"]
    assert rows[1]["epsilon_opt"] == "nan"
    _, _, stats_rows = read_table(out / "stats.csv")
    assert stats_rows  # aggregates cover the surviving runs


def test_sweep_all_failures_exits_nonzero(tmp_path, monkeypatch):
    import evogate.cli as cli_mod

    def always_fail(ga_cfg, task, seed):
        raise RuntimeError("forced failure")

    monkeypatch.setattr(cli_mod, "ga_run", always_fail)
    out = tmp_path / "dead"
    rc = main(["sweep", "--npop", "12", "--seeds", "2", "--out", str(out)])
    assert rc == 1
    _, _, rows = read_table(out / "runs.csv")
    assert all(r["termination_reason"] == "error" for r in rows)
    assert not (out / "stats.csv").exists()


def test_sweep_horizon_pads_stats(tmp_path):
    out = tmp_path / "padded"
    rc = main([
        "sweep", "--npop", "12", "--seeds", "3", "--horizon", "40",
        "--out", str(out),
    ])
    assert rc == 0
    _, _, rows = read_table(out / "stats.csv")
    assert len(rows) == 40
    assert all(r["n"] == "3" for r in rows)


# -------------------------------------------------------------------- fit

def write_points(path, eps, q, eps_col="epsilon", q_col="q"):
    lines = ["# synthetic", f"{eps_col},{q_col}"]
    lines += [f"{float(e)!r},{float(v)!r}" for e, v in zip(eps, q)]
    path.write_text("\n".join(lines) + "\n")


def test_fit_recovers_synthetic_model(tmp_path):
    eps = np.linspace(0.0, 0.2, 30)
    q = 16.0 * np.exp(-22.0 * eps) + 15.0
    src = tmp_path / "points.csv"
    write_points(src, eps, q)
    out = tmp_path / "fit_out"
    rc = main(["fit", str(src), "--bins", "0", "--out", str(out)])
    assert rc == 0
    meta, header, rows = read_table(out / "fit.csv")
    assert header == ["a", "b", "c", "a_err", "b_err", "c_err", "rss", "converged"]
    row = rows[0]
    assert abs(float(row["a"]) - 16.0) / 16.0 <= 1e-6
    assert abs(float(row["b"]) - 22.0) / 22.0 <= 1e-6
    assert abs(float(row["c"]) - 15.0) / 15.0 <= 1e-6
    assert row["converged"] == "1"
    assert meta["bins"] == "0"


def test_fit_applies_quantile_binning(tmp_path):
    rng = np.random.default_rng(0)
    eps = np.sort(rng.uniform(0, 0.2, 200))
    q = 16.0 * np.exp(-22.0 * eps) + 15.0 + rng.normal(0, 0.1, eps.size)
    src = tmp_path / "noisy.csv"
    write_points(src, eps, q)
    out = tmp_path / "fit_binned"
    rc = main(["fit", str(src), "--bins", "20", "--out", str(out)])
    assert rc == 0
    meta, _, rows = read_table(out / "fit.csv")
    assert meta["bins"] == "20"
    assert meta["n_points"] == "20"
    assert abs(float(rows[0]["b"]) - 22.0) <= 3.0


def test_fit_too_few_points(tmp_path):
    src = tmp_path / "three.csv"
    write_points(src, [0.0, 0.1, 0.2], [30.0, 20.0, 16.0])
    assert main(["fit", str(src), "--bins", "0", "--out", str(tmp_path / "o")]) == 1


def test_fit_reads_sweep_summaries(tmp_path):
    out = tmp_path / "sweep_for_fit"
    assert main(["sweep", "--npop", "20", "--seeds", "6", "--out", str(out)]) == 0
    eps, q = files.read_points_csv(out / "runs.csv")
    assert eps.shape == q.shape == (6,)
    assert np.all(q >= 1)


def test_fit_missing_input(tmp_path):
    assert main(["fit", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "o")]) == 1


# -------------------------------------------------------------- reproduce

def test_reproduce_fig5_smoke(tmp_path):
    out = tmp_path / "fig5"
    rc = main([
        "reproduce", "fig5", "--seeds", "3", "--horizon", "30", "--out", str(out),
    ])
    assert rc == 0
    for npop in (10, 50, 100):
        stats = out / f"fig5_npop{npop}_stats.csv"
        assert stats.exists()
        _, _, rows = read_table(stats)
        assert len(rows) == 30
        mean = np.array([float(r["mean_fitness"]) for r in rows])
        assert mean[-1] >= mean[0]  # the curve climbs


def test_reproduce_fig6_smoke(tmp_path):
    out = tmp_path / "fig6"
    rc = main(["reproduce", "fig6", "--seeds", "2", "--npop", "30", "--out", str(out)])
    assert rc == 0
    _, _, rows = read_table(out / "fig6_alpha_phi.csv")
    assert len(rows) == 2


def test_reproduce_fig7_smoke(tmp_path):
    out = tmp_path / "fig7"
    rc = main([
        "reproduce", "fig7", "--seeds", "8", "--npop", "40", "--out", str(out),
    ])
    assert rc in (0, 2)  # tiny ensembles may flag a non-converged fit
    assert (out / "fig7_npop40_runs.csv").exists()
    assert (out / "fig7_npop40_fit.csv").exists()


# ------------------------------------------------------------ file helpers

def test_run_csv_round_trip(tmp_path):
    from evogate import ga, tasks
    from evogate.genome import CodecConfig

    codec = CodecConfig(depth=15)
    cfg = ga.GAConfig(n_pop=12, threshold=1e-4, codec=codec, n_slots=2, max_generations=60)
    record = ga.run(cfg, tasks.deutsch_task(), seed=9)
    path = tmp_path / "run.csv"
    files.write_run_csv(path, record, run_id=4, metadata={"npop": 12, "seed": 9})

    meta, table, summary = files.read_run_csv(path)
    assert meta["npop"] == "12"
    assert np.array_equal(table["generation"], np.arange(1, record.q_c + 1))
    assert np.array_equal(table["mean_fitness"], record.mean_fitness)
    assert np.array_equal(table["fluctuation"], record.fluctuation)
    assert np.array_equal(table["best_fitness"], record.best_fitness_series)
    assert summary["run_id"] == 4
    assert summary["seed"] == 9
    assert summary["q_c"] == record.q_c
    assert summary["epsilon_opt"] == record.epsilon_opt
    assert summary["termination_reason"] == record.termination_reason
    assert np.array_equal(summary["best_genome"], record.best_genome)
    with pytest.raises(ValueError):
        files.read_run_csv(__file__)


def test_fmt_is_round_trip_stable():
    values = [math.pi, 1.0, 1e-300, 0.1, 2.0 / 3.0]
    for v in values:
        assert float(files.fmt(v)) == v
    assert files.fmt(True) == "1"
    assert files.fmt(np.int64(7)) == "7"


def test_read_points_requires_known_columns(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    with pytest.raises(ValueError):
        files.read_points_csv(bad)
