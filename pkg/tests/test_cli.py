import csv
import math

import pytest

from dynmix import environments as envs
from dynmix.cli import CSV_HEADER, SWEEP_HEADER, RunConfig, main, read_config_file, schedule_lines
from dynmix.errors import InvalidConfigError


def run(*argv):
    return main(list(argv))


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run("run", "--algo", "recursive", "--T", "16", "--C", "2", "--seed", "1", "--out", str(out)) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.splitlines()[0] == CSV_HEADER
    assert "\r" not in text and len(text.splitlines()) == 17
    summary = capsys.readouterr().out.strip()
    assert summary.startswith("algorithm=recursive T=16 C=2 seed=1 final_regret=")
    assert "active_learners=5" in summary


def test_zero_loss_environment(tmp_path, capsys):
    env = tmp_path / "zero.env"
    env.write_text("kind=piecewise-mean-squared\nT=8\nC=1\nnoise=0\nmeans=0.5\n")
    out = tmp_path / "z.csv"
    assert run("run", "--algo", "base", "--env", str(env), "--out", str(out)) == 0
    assert "final_regret=0.000000000000" in capsys.readouterr().out
    assert all(float(r[4]) == 0.0 for r in read_rows(out)[1:])


def test_parallel_reports_expert_count(tmp_path, capsys):
    assert run("run", "--algo", "parallel", "--T", "16", "--out", str(tmp_path / "p.csv")) == 0
    assert "experts=4" in capsys.readouterr().out


def test_csv_schema_is_shared(tmp_path, capsys):
    for algo in ("base", "reset", "parallel", "first-level", "second-level", "recursive",
                 "doubling:parallel", "doubling:recursive"):
        out = tmp_path / f"{algo.replace(':', '_')}.csv"
        assert run("run", "--algo", algo, "--T", "32", "--C", "2", "--out", str(out)) == 0
        rows = read_rows(out)
        assert rows[0] == CSV_HEADER.split(",")
        assert [int(r[0]) for r in rows[1:]] == list(range(1, 33))
        for r in rows[1:]:
            assert float(r[4]) == pytest.approx(float(r[2]) - float(r[3]), abs=1e-11)


def test_invalid_configurations_exit_nonzero(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert run("run", "--algo", "first-level", "--T", "8", "--C", "8", "--out", out) == 2
    assert "C < T" in capsys.readouterr().err
    assert run("run", "--algo", "recursive", "--T", "8") == 2
    assert "--out" in capsys.readouterr().err
    assert run("run", "--algo", "parallel", "--T", "8", "--sigma", "0.1", "--out", out) == 2
    assert "sigma" in capsys.readouterr().err
    assert run("run", "--algo", "mystery", "--T", "8", "--out", out) == 2
    assert run("run", "--T", "8", "--C", "9", "--out", out) == 2
    assert run("run", "--env", "moon", "--out", out) == 2
    captured = capsys.readouterr()
    assert captured.out == "" and "dynmix run:" in captured.err


def test_overrides_reach_the_algorithm(tmp_path, capsys):
    out = str(tmp_path / "o.csv")
    assert run("run", "--algo", "reset", "--T", "64", "--t-r", "4", "--out", out) == 0
    assert run("run", "--algo", "first-level", "--T", "64", "--C", "3", "--eta", "0.5", "--sigma", "0.2",
               "--out", out) == 0
    assert run("run", "--algo", "reset", "--T", "64", "--t-r", "1", "--out", out) == 2


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nalgorithm=parallel\nT=32\nseed=4\n\nout=%s\n" % (tmp_path / "c.csv"))
    assert read_config_file(str(cfg))["T"] == 32
    assert run("run", "--config", str(cfg)) == 0
    assert "algorithm=parallel T=32" in capsys.readouterr().out
    assert run("run", "--config", str(cfg), "--T", "16") == 0
    assert "T=16" in capsys.readouterr().out
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour=blue\n")
    with pytest.raises(InvalidConfigError):
        read_config_file(str(bad))
    assert run("run", "--config", str(bad)) == 2
    assert RunConfig().algorithm == "recursive"


def test_sweep_planted_dry_run(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert run("sweep", "--horizons", "256,512,1024,2048", "--plant", "0.5", "--out", str(out)) == 0
    rows = read_rows(out)
    assert rows[0] == SWEEP_HEADER.split(",")
    assert [r[0] for r in rows[1:]] == ["256", "512", "1024", "2048", "fit"]
    assert float(rows[-1][3]) == pytest.approx(0.5, abs=1e-9)
    assert float(rows[1][1]) == pytest.approx(16.0)


def test_sweep_single_seed_has_zero_std_err(tmp_path, capsys):
    out = tmp_path / "one.csv"
    assert run("sweep", "--algo", "base", "--horizons", "16,32,64,128", "--seeds-per-point", "1",
               "--C", "2", "--out", str(out)) == 0
    assert all(float(r[2]) == 0.0 for r in read_rows(out)[1:-1])


@pytest.mark.slow
def test_sweep_schemas_match(tmp_path, capsys):
    headers = []
    for algo in ("recursive", "parallel"):
        out = tmp_path / f"{algo}.csv"
        assert run("sweep", "--algo", algo, "--horizons", "256,512,1024,2048", "--C", "4",
                   "--seeds-per-point", "10", "--out", str(out)) == 0
        rows = read_rows(out)
        headers.append(rows[0])
        assert len(rows) == 6 and math.isfinite(float(rows[-1][3]))
    assert headers[0] == headers[1] == SWEEP_HEADER.split(",")


def test_sweep_needs_four_horizons(tmp_path, capsys):
    assert run("sweep", "--horizons", "16,32,64", "--out", str(tmp_path / "f.csv")) == 2
    assert "at least 4" in capsys.readouterr().err


def test_schedule_listing(capsys):
    assert run("schedule", "--T", "8") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "expert 1 period=2 first=1 resets: 1 3 5 7"
    assert lines[1] == "expert 2 period=4 first=2 resets: 2 6"
    assert lines[2] == "expert 3 period=8 first=4 resets: 4"
    targets = [l for l in lines if l.startswith("t=")]
    assert len(targets) == 7
    assert targets[6] == "t=7 next=8 target=none"
    assert targets[0] == "t=1 next=2 target=2"


def test_schedule_targets_partition():
    for T in (2, 8, 33, 100):
        lines = schedule_lines(T)
        resets = {}
        for line in lines:
            if line.startswith("expert"):
                i = int(line.split()[1])
                for t in line.split("resets:")[1].split():
                    resets.setdefault(int(t), []).append(i)
        assert all(len(v) == 1 for v in resets.values())
        for line in lines:
            if line.startswith("t="):
                parts = dict(p.split("=") for p in line.split())
                nxt, target = int(parts["next"]), parts["target"]
                assert (resets.get(nxt, ["none"])[0] if target != "none" else "none") == \
                       (int(target) if target != "none" else "none")
    with pytest.raises(InvalidConfigError):
        schedule_lines(1)


def test_schedule_requires_T(capsys):
    assert run("schedule") == 2


def test_logging_goes_to_stderr(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RE_LOG", "info")
    assert run("run", "--algo", "base", "--T", "16", "--out", str(tmp_path / "l.csv")) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("algorithm=base") and "CSV" not in captured.out


def test_environment_file_round_trip(tmp_path, capsys):
    cfg = envs.EnvironmentConfig(T=64, C=3, boundaries=(10, 40), seed=3, noise=0.05)
    path = tmp_path / "e.env"
    path.write_text(envs.dumps(cfg))
    out = tmp_path / "e.csv"
    assert run("run", "--algo", "recursive", "--env", str(path), "--out", str(out)) == 0
    assert "T=64 C=3 seed=3" in capsys.readouterr().out
