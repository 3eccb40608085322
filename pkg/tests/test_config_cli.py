import csv
import json

import pytest

from crowd_mpc import cli
from crowd_mpc.config import (ConfigError, RunConfig, dump_config, load_config, parse_config,
                              set_key)


def test_defaults_validate():
    cfg = RunConfig().validate()
    assert cfg.vehicle.u_max == 8000.0 and cfg.mpc.horizon == 15 and cfg.pid.kp == 300.0


def test_dump_roundtrip():
    cfg = RunConfig()
    cfg.crowd.a_veh = 0.1 + 0.2
    cfg.scenario.n_pedestrians = 20
    cfg.trace = True
    again = parse_config(dump_config(cfg))
    assert again == cfg


def test_parse_comments_and_types(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# densities\nscenario.n_pedestrians = 10  # fewer\nmpc.d_safe = 9.5\n"
                    "trace = yes\n\n")
    cfg = load_config(path)
    assert cfg.scenario.n_pedestrians == 10 and cfg.mpc.d_safe == 9.5 and cfg.trace is True


@pytest.mark.parametrize("text", ["mpc.nope = 1", "bogus.x = 1", "dt 0.05", "episodes = many",
                                  "trace = maybe", "vehicle = 3"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


@pytest.mark.parametrize("key, value", [
    ("dt", "0"), ("episodes", "0"), ("controller", "lqr"), ("seed", str(2**64)),
    ("vehicle.mass", "-1"), ("mpc.horizon", "0"), ("pid.d_buffer", "0"),
    ("crowd.tau", "0"), ("scenario.n_pedestrians", "-3"), ("solver.max_iter", "0"),
    ("vehicle.v_min", "30"), ("dt", "20"),
])
def test_validation_rejects(key, value):
    cfg = RunConfig()
    set_key(cfg, key, value)
    with pytest.raises(ConfigError):
        cfg.validate()


def run_cli(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_zero_episodes_fails(capsys, tmp_path):
    code, _, err = run_cli(["run", "--episodes", "0", "--out", str(tmp_path)], capsys)
    assert code != 0 and "episodes" in err


def test_run_bad_config_file(capsys, tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("mpc.horizon = 0\n")
    code, _, _ = run_cli(["run", "--config", str(path), "--out", str(tmp_path / "o")], capsys)
    assert code != 0


def test_run_unwritable_output(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run_cli(["run", "--n-ped", "0", "--episodes", "1", "--out",
                            str(blocker / "sub")], capsys)
    assert code != 0 and "cannot write" in err


def test_single_pid_episode(capsys, tmp_path):
    out = tmp_path / "pid"
    code, text, _ = run_cli(["run", "--controller", "pid", "--n-ped", "0", "--episodes", "1",
                             "--out", str(out)], capsys)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["episodes"] == 1 and summary["collisions"] == 0
    assert (out / "episodes" / "seed7_pid.csv").exists()
    assert not (out / "pairs.csv").exists()


def test_seed_env_overrides_flag(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "123")
    out = tmp_path / "env"
    code, _, _ = run_cli(["run", "--controller", "pid", "--n-ped", "0", "--episodes", "1",
                          "--seed", "5", "--out", str(out)], capsys)
    assert code == 0
    assert (out / "episodes" / "seed123_pid.csv").exists()
    assert "seed = 123" in (out / "config.txt").read_text()


def test_full_scale_flag():
    args = cli.build_parser().parse_args(["run", "--full-scale", "--episodes", "3"])
    assert cli.config_from_args(args).episodes == cli.FULL_SCALE


def test_paired_run_and_report(capsys, tmp_path):
    root = tmp_path / "res"
    code, text, _ = run_cli(["run", "--n-ped", "10", "--episodes", "2", "--seed", "3",
                             "--out", str(root / "n10"), "--trace"], capsys)
    assert code == 0
    assert "General" in text and "Stop-and-Wait" in text and "Non-stop" in text
    run_dir = root / "n10"
    summary = json.loads((run_dir / "summary.json").read_text())
    assert summary["pairs"] == 2 and summary["n_pedestrians"] == 10
    for key in ("mean_dt_total", "mean_dt_longest_wait", "mean_dt_total_non_stop"):
        assert key in summary
    with open(run_dir / "pairs.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["seed"]) for r in rows] == [3, 4]
    with open(run_dir / "hist_general.csv") as fh:
        hist = list(csv.reader(fh))
    assert hist[0] == ["bin_left", "bin_right", "count"]
    assert sum(int(r[2]) for r in hist[1:]) == 2
    assert any((run_dir / "trace" / "qp").rglob("*_constraints.mtx"))
    assert (run_dir / "trace" / "seed3_mpc_forces.csv").exists()

    code, table, _ = run_cli(["report", str(root)], capsys)
    assert code == 0
    lines = table.strip().splitlines()
    assert lines[0].split() == ["pedestrians", "General", "Stop-and-Wait", "Non-stop"]
    assert [line.split()[0] for line in lines[1:]] == ["30", "20", "10"]
    assert lines[1].split()[1:] == ["N.A."] * 3
    assert (root / "density_table.txt").exists()


def test_report_errors(capsys, tmp_path):
    code, _, _ = run_cli(["report", str(tmp_path)], capsys)
    assert code != 0
    code, _, _ = run_cli(["report", str(tmp_path / "missing")], capsys)
    assert code != 0


def test_collision_exits_nonzero(capsys, tmp_path, monkeypatch):
    from crowd_mpc import harness

    real = harness.run_episode

    def crashing(scenario, kind, cfg, trace_dir=None):
        rec = real(scenario, kind, cfg, trace_dir)
        rec.collided = True
        return rec

    monkeypatch.setattr(harness, "run_episode", crashing)
    code, _, err = run_cli(["run", "--controller", "pid", "--n-ped", "0", "--episodes", "1",
                            "--out", str(tmp_path / "c")], capsys)
    assert code != 0 and "collision" in err
