import io
import json
import subprocess
import sys

import pytest

from regbip.cli import BENCH_HEADER, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def k64(tmp_path, capsys):
    path = tmp_path / "k64.edges"
    assert run(["generate", "complete:n=64", "--out", str(path)], capsys)[0] == 0
    return path


def test_generate_to_stdout(capsys):
    code, out, _ = run(["generate", "complete:n=4"], capsys)
    assert code == 0 and out.splitlines()[0] == "4 6"


def test_certify_k6(tmp_path, capsys):
    path = tmp_path / "k6.edges"
    run(["generate", "complete:n=6", "--out", str(path)], capsys)
    code, out, _ = run(["certify", "--in", str(path), "--budget", "0.0833", "--no-timestamp"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["lambda"] == pytest.approx(1.0) and data["satisfied"] is False


def test_decompose_verify_round_trip(k64, tmp_path, capsys):
    dec = tmp_path / "dec.json"
    trace = tmp_path / "trace.json"
    code, _, _ = run(
        ["decompose", "--in", str(k64), "--mode", "practical", "--seed", "1", "--out", str(dec), "--trace", str(trace)],
        capsys,
    )
    assert code == 0
    data = json.loads(dec.read_text())
    assert data["verified"] and "timestamp" in data
    assert "resamples" in json.loads(trace.read_text())
    code, out, _ = run(["verify", "--graph", str(k64), "--dec", str(dec)], capsys)
    assert code == 0 and json.loads(out)["ok"]

    data["parts"][1]["edges"] = data["parts"][1]["edges"][1:]
    dec.write_text(json.dumps(data))
    code, out, _ = run(["verify", "--graph", str(k64), "--dec", str(dec)], capsys)
    assert code == 1 and not json.loads(out)["ok"]


def test_no_timestamp_is_byte_stable(k64, tmp_path, capsys):
    outs = []
    for i in range(2):
        p = tmp_path / f"d{i}.json"
        run(["decompose", "--in", str(k64), "--seed", "3", "--no-timestamp", "--out", str(p)], capsys)
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    assert b"timestamp" not in outs[0]


def test_config_file_and_flags(k64, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "stop_degree": 6}))
    code, out, _ = run(["decompose", "--in", str(k64), "--config", str(cfg), "--seed", "2", "--no-timestamp"], capsys)
    assert code == 0 and json.loads(out)["seed"] == 2


def test_bad_config_key_is_usage_error(k64, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    code, _, err = run(["decompose", "--in", str(k64), "--config", str(cfg)], capsys)
    assert code == 2 and "nonsense" in err


def test_stdin_graph(monkeypatch, capsys):
    main(["generate", "complete:n=4"])
    text = capsys.readouterr().out
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    code, out, _ = run(["decompose", "--in", "-", "--no-timestamp"], capsys)
    assert code == 0 and json.loads(out)["part_count"] >= 1


def test_factorize(capsys, tmp_path):
    path = tmp_path / "k4.edges"
    run(["generate", "complete:n=4", "--out", str(path)], capsys)
    code, out, _ = run(["factorize", "--in", str(path), "--no-timestamp"], capsys)
    data = json.loads(out)
    assert code == 0 and len(data["matchings"]) == 3


def test_stage_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "r.edges"
    run(["generate", "random_regular:n=200,d=32,seed=1", "--out", str(path)], capsys)
    code, _, err = run(["decompose", "--in", str(path), "--attempts", "1"], capsys)
    assert code == 3 and err.startswith("stage failure: ")


def test_strict_precondition_exit_code(k64, capsys):
    code, _, err = run(["decompose", "--in", str(k64), "--mode", "strict"], capsys)
    assert code == 3 and "precondition" in err


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["explode"])
    assert info.value.code == 2
    capsys.readouterr()
    assert run(["decompose", "--in", str(tmp_path / "missing.edges")], capsys)[0] == 2
    bad = tmp_path / "bad.edges"
    bad.write_text("3 1\n0 9\n")
    code, _, err = run(["decompose", "--in", str(bad)], capsys)
    assert code == 2 and "line 2" in err
    assert run(["generate", "blob:n=3"], capsys)[0] == 2


def test_bench_csv(capsys):
    code, out, _ = run(["bench", "--graphs", "complete:n=4", "complete:n=64", "--seeds", "1", "--workers", "2", "--no-timestamp"], capsys)
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == ",".join(BENCH_HEADER)
    assert len(lines) == 3
    assert all(line.endswith("True") for line in lines[1:])


def test_probe(capsys, tmp_path):
    path = tmp_path / "r.edges"
    run(["generate", "random_regular:n=100,d=16,seed=2", "--out", str(path)], capsys)
    code, out, _ = run(["probe", "--in", str(path), "--trials", "20", "--no-timestamp"], capsys)
    data = json.loads(out)
    assert code == 0 and data["successes"] == 20


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "regbip", "generate", "complete:n=4"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("4 6")
