import math

import numpy as np
import pytest

from aapass.cli import main, parse_angular_frequency, parse_seconds
from aapass.serialization import read_schedule, report_from_text, trace_from_csv


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.split(), err


def _trace(path):
    return trace_from_csv(path.read_text())


def test_unit_parsing():
    assert parse_angular_frequency("0.2MHz") == pytest.approx(2 * math.pi * 0.2e6)
    assert parse_angular_frequency("200 kHz") == pytest.approx(2 * math.pi * 0.2e6)
    assert parse_angular_frequency("1.5e6rad_s") == 1.5e6
    assert parse_seconds("0.25ns") == pytest.approx(0.25e-9)
    assert parse_seconds("6.4 ns") == pytest.approx(6.4e-9)


def test_simulate_defaults(tmp_path, capsys):
    code, paths, _ = _run(capsys, "simulate", "--out", str(tmp_path))
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert len(paths) == 6 and len(names) == 6
    assert "trace_analog_cd-on_b2.csv" in names
    trace, meta = _trace(tmp_path / "trace_analog_cd-on_b2.csv")
    assert trace.p0[0] == pytest.approx(0.9975, abs=1e-3)
    assert trace.p0[-1] == pytest.approx(0.0025, abs=1e-3)
    assert meta["config.command"] == "simulate"
    assert float(meta["loss.final_loss"]) < 1e-4
    assert all(line.startswith("#") for line in (tmp_path / names[0]).read_text().splitlines()[: len(meta)])


def test_simulate_cd_off_is_flat(tmp_path, capsys):
    code, paths, _ = _run(capsys, "simulate", "--out", str(tmp_path), "--b", "2", "--cd", "off", "--mode", "both")
    assert code == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "trace_analog_cd-off_b2.csv",
        "trace_rapid_cd-off_b2.csv",
    ]
    for path in tmp_path.iterdir():
        trace, _ = _trace(path)
        assert np.abs(trace.p0 - trace.p0[0]).max() < 0.05


def test_simulate_oracle_source(tmp_path, capsys):
    code, _, _ = _run(capsys, "simulate", "--out", str(tmp_path), "--b", "0.6", "--source", "oracle", "--rows", "50")
    assert code == 0
    trace, meta = _trace(tmp_path / "trace_analog_cd-on_b0.6.csv")
    assert meta["job.source"] == "oracle"
    assert trace.p0[-1] == pytest.approx(math.sin(math.atan2(0.2, 0.6) / 2) ** 2, abs=1e-6)


def test_compile_rapid_table(tmp_path, capsys):
    code, _, _ = _run(capsys, "compile", "--out", str(tmp_path), "--b", "2", "--mode", "rapid")
    assert code == 0
    path = tmp_path / "schedule_rapid_cd-on_b2.csv"
    s = read_schedule(path)
    assert len(s) == 56
    assert s.quantized
    assert 1.9e-6 <= s.total_duration <= 2.6e-6
    body = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert len(body) == 57


def test_compile_analog_duration(tmp_path, capsys):
    code, _, _ = _run(capsys, "compile", "--out", str(tmp_path), "--b", "0.6")
    assert code == 0
    s = read_schedule(tmp_path / "schedule_analog_cd-on_b0.6.csv")
    tau = 2 * math.sqrt(0.04 + 0.36 / 0.04) / (2 * math.pi * 0.2e6)
    assert 0 <= s.total_duration - tau < 0.25e-9 + 1e-18
    assert float(s.extra["config.grid"]) == 0.25e-9


def test_outputs_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["simulate", "--out", str(out), "--b", "1.6", "--mode", "both"]) == 0
        assert main(["compile", "--out", str(out), "--b", "1.6", "--mode", "both"]) == 0
    capsys.readouterr()
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        # only the echoed output directory may differ
        strip = lambda d: [l for l in (d / name).read_bytes().splitlines() if not l.startswith(b"# config.out=")]
        assert strip(a) == strip(b)


def test_rerun_into_same_directory_is_byte_identical(tmp_path, capsys):
    argv = ["simulate", "--out", str(tmp_path), "--b", "4", "--mode", "rapid"]
    assert main(argv) == 0
    first = (tmp_path / "trace_rapid_cd-on_b4.csv").read_bytes()
    assert main(argv) == 0
    capsys.readouterr()
    assert (tmp_path / "trace_rapid_cd-on_b4.csv").read_bytes() == first


def test_config_file_and_override(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# rapid scan only\nb = 3\nmode = rapid\nomega = 0.4MHz\n")
    out = tmp_path / "out"
    code, _, _ = _run(capsys, "compile", "--config", str(conf), "--b", "1", "--out", str(out))
    assert code == 0
    s = read_schedule(out / "schedule_rapid_cd-on_b1.csv")
    assert s.config.omega_cap == pytest.approx(2 * math.pi * 0.4e6)
    assert s.extra["config.b_list"] == "1.0"


def test_multipass(tmp_path, capsys):
    code, paths, _ = _run(capsys, "multipass", "--out", str(tmp_path))
    assert code == 0
    s = read_schedule(tmp_path / "schedule_rapid_cd-on_b2_x5.csv")
    assert s.n_passes == 5 and len(s) == 5 * 56
    trace, meta = _trace(tmp_path / "trace_rapid_cd-on_b2_x5.csv")
    assert float(meta["loss.final_loss"]) < 5e-3
    assert trace.p0[-1] == pytest.approx(0.0025, abs=2e-3)


@pytest.mark.parametrize("args", [
    ("--omega", "5"),
    ("--omega", "0.2 parsecs"),
    ("--grid", "0.25"),
    ("--mode", "digital"),
    ("--b", "0"),
    ("--delta", "-1"),
    ("--segments", "many"),
])
def test_config_errors_exit_2(tmp_path, capsys, args):
    code, _, err = _run(capsys, "compile", "--out", str(tmp_path), *args)
    assert code == 2
    assert "config error" in err
    assert list(tmp_path.iterdir()) == []


def test_unwritable_out_exits_before_work(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = _run(capsys, "simulate", "--out", str(blocker / "sub"))
    assert code == 2
    assert "out" in err


def test_unknown_config_key(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    code, _, err = _run(capsys, "compile", "--config", str(conf), "--out", str(tmp_path / "o"))
    assert code == 2
    assert "colour" in err


def test_coarse_grid_rapid_exits_3(tmp_path, capsys):
    code, _, err = _run(capsys, "compile", "--out", str(tmp_path), "--mode", "rapid", "--grid", "1us")
    assert code == 3
    assert err


def test_analog_coarse_step_is_config_error(tmp_path, capsys):
    # a 1 us grid turns the whole analog scan into a handful of long segments
    code, _, _ = _run(capsys, "compile", "--out", str(tmp_path), "--b", "0.6", "--grid", "1us")
    assert code == 2


def test_bench_lower_target_shorter(tmp_path, capsys):
    lo, hi = tmp_path / "lo", tmp_path / "hi"
    assert main(["bench", "--b", "2", "--target", "0.5", "--out", str(lo)]) == 0
    assert main(["bench", "--b", "2", "--target", "0.99", "--out", str(hi)]) == 0
    capsys.readouterr()
    r_lo = report_from_text((lo / "speedup_b2.txt").read_text())
    r_hi = report_from_text((hi / "speedup_b2.txt").read_text())
    assert float(r_lo["unassisted_duration_s"]) < float(r_hi["unassisted_duration_s"])
    assert float(r_hi["speedup_analog"]) == pytest.approx(150, rel=0.2)
    summary = (hi / "speedup_summary.csv").read_text().splitlines()
    assert summary[0].startswith("#")
    assert sum(1 for l in summary if not l.startswith("#")) == 2
