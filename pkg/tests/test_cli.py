import csv
import json

import pytest

from dqdcompile import cli, demos, scheduler


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def sched_path(lib_path, tmp_path, capsys):
    ir = tmp_path / "ir.json"
    ir.write_text(json.dumps(scheduler.circuit_to_json(demos.grover_reference_ir())))
    out = tmp_path / "s.json"
    assert run(capsys, "compile-circuit", ir, "--lib", lib_path, "--out", out)[0] == 0
    return out


def test_verify_scheduler_output(sched_path, capsys):
    code, out, _ = run(capsys, "verify", sched_path)
    assert code == 0 and "adjacency" in out


def test_verify_corrupt_schedule(tmp_path, capsys):
    s = scheduler.Schedule(1, (scheduler.PulseSegment(1.0, (None,)),))
    p = tmp_path / "bad.json"
    scheduler.save_schedule(s, p)
    assert run(capsys, "verify", p)[0] == 2
    assert run(capsys, "run", p)[0] == 2


def test_run_idle_schedule_csv(tmp_path, capsys):
    from dqdcompile.executor import all_idle_schedule
    p = tmp_path / "idle.json"
    scheduler.save_schedule(all_idle_schedule(2), p)
    out_csv = tmp_path / "d.csv"
    code, out, _ = run(capsys, "--json", "run", p, "--init", "00", "--csv", out_csv)
    assert code == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert rows[0]["basis"] == "00" and float(rows[0]["probability"]) == pytest.approx(1.0)
    assert json.loads(out)["distribution"]["00"] == pytest.approx(1.0)


def test_demo_grover_json(lib_path, capsys):
    code, out, _ = run(capsys, "demo", "grover", "--lib", lib_path, "--json")
    assert code == 0
    assert json.loads(out)["distribution"]["11"] >= 0.99


def test_demo_maxcut(lib_path, tmp_path, capsys):
    c = tmp_path / "mc.csv"
    code, out, _ = run(capsys, "demo", "maxcut", "--lib", lib_path, "--max-rounds", 60, "--csv", c, "--json")
    assert code == 0
    rep = json.loads(out)
    assert len(rep["loss_history"]) == 60
    assert next(csv.reader(c.open())) == ["round", "loss", "cut"]


def test_compile_gate_and_library_output(tmp_path, capsys):
    out = tmp_path / "h.json"
    code, text, _ = run(capsys, "--seed", 0, "compile-gate", "H", "--out", out, "--json")
    assert code == 0 and json.loads(text)["epsilon"] <= 1e-5
    from dqdcompile import library
    assert library.load(out).names() == ["H"]


def test_build_library_subset(tmp_path, capsys):
    out = tmp_path / "l.json"
    code, _, _ = run(capsys, "build-library", "--names", "X,Z", "--out", out)
    assert code == 0


@pytest.mark.parametrize("argv", [[], ["bogus"], ["demo"], ["compile-circuit", "x.json"], ["run", "--init"]])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 1


def test_bad_init_is_usage_error(sched_path, capsys):
    assert run(capsys, "run", sched_path, "--init", "0")[0] == 1


def test_non_convergence_exit_3(capsys):
    assert run(capsys, "compile-gate", "Y", "--max-rounds", 2)[0] == 3


def test_config_overrides(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# two rounds only\nmax_rounds = 2\n")
    assert run(capsys, "--config", cfg, "compile-gate", "T")[0] == 3
    cfg.write_text("no equals sign\n")
    assert run(capsys, "--config", cfg, "compile-gate", "T")[0] == 1


def test_invalid_inputs_exit_2(tmp_path, capsys):
    assert run(capsys, "compile-gate", "SWAP")[0] == 2
    assert run(capsys, "verify", tmp_path / "missing.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert run(capsys, "verify", bad)[0] == 2
