import json
import subprocess
import sys

import pytest

from brentlab.ensembles import enumerate_pairs
from brentlab.gcd import Branch, binary_gcd_trace
from brentlab.cli import EXIT_ACCEPTANCE, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_USAGE, main


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_census_ratio(capsys):
    code, out = run(["census", "--ensemble", "2", "--n", "100000"], capsys)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("#brentlab-v1")
    assert lines[1] == "ensemble,n,count,ratio,cost,mean,mean_over_logn,second_moment"
    ratio = float(lines[2].split(",")[3])
    assert abs(ratio / 0.125 - 1) <= 0.005


def test_stats_table_and_fit(capsys):
    code, out = run(["stats", "--ensemble", "2", "--n", "5,64,128,256", "--cost", "S", "--cost", "T"], capsys)
    assert code == EXIT_OK
    rows = [l.split(",") for l in out.splitlines()[2:] if not l.startswith("#")]
    first = rows[0]
    assert first[:3] == ["2", "5", "3"] and first[4] == "S" and float(first[5]) == pytest.approx(4 / 3)
    assert sum(l.startswith("# slope") for l in out.splitlines()) == 2


def test_stats_json_and_cost_file(tmp_path, capsys):
    cost = tmp_path / "c.txt"
    cost.write_text("# brentlab-cost C=1 extend=constant\n1 1 1\n")
    code, out = run(["stats", "--n", "9", "--cost", str(cost), "--format", "json"], capsys)
    assert code == EXIT_OK
    data = json.loads(out)
    # constant extension: every exchange step costs 1, so the sum counts exchanges
    exchanges = sum(st.branch == Branch.EXCHANGE for u, v in enumerate_pairs(2, 9)
                    for st in binary_gcd_trace(u, v).steps)
    assert exchanges == 5
    assert data["rows"][0]["sum_cost"] == exchanges
    code, _ = run(["stats", "--n", "9", "--cost", "bogus"], capsys)
    assert code == EXIT_USAGE


def test_sampling_mode(capsys):
    argv = ["stats", "--n", "2000000", "--samples", "2000", "--seed", "4", "--format", "json"]
    code, out = run(argv, capsys)
    assert code == EXIT_OK
    again = run(argv, capsys)[1]
    assert out == again
    assert json.loads(out)["rows"][0]["stderr"] > 0


def test_verify_theta_and_trace(capsys):
    code, out = run(["verify-theta", "--n-max", "2", "--v-max", "9", "--cost", "E"], capsys)
    assert code == EXIT_OK and json.loads(out)["status"] == "pass"
    code, out = run(["trace", "6", "20", "--dump-trace"], capsys)
    data = json.loads(out)
    assert (data["gcd"], data["S"], data["E"], data["trace"]) == (2, 2.0, 1.0, "(1,1);(2,1)")


def test_dirichlet_commands(capsys):
    code, out = run(["dirichlet", "--check", "series", "--s", "1.5", "--v-max", "9"], capsys)
    assert code == EXIT_OK and json.loads(out)["value"] == pytest.approx(0.0672703612, abs=1e-10)
    code, out = run(["dirichlet", "--check", "numthy", "--s", "2", "--v-max", "10000"], capsys)
    assert code == EXIT_OK and all(c["passed"] for c in json.loads(out)["checks"])
    code, out = run(["dirichlet", "--check", "convolution", "--p", "1", "--v-max", "2000"], capsys)
    assert code == EXIT_OK


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["census"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == EXIT_USAGE
    assert main(["census", "--n", "abc"]) == EXIT_USAGE
    assert main(["dirichlet", "--s", "1.1"]) == EXIT_USAGE
    assert main(["density", "--x-min", "0.01"]) == EXIT_USAGE


def test_nonconvergence_exit(monkeypatch, capsys):
    import brentlab.density as dens

    monkeypatch.setattr(dens, "MAX_ITERATIONS", 2)
    assert main(["density", "--m-geometric", "32", "--m-uniform", "32", "--format", "json"]) == EXIT_NONCONVERGENCE


def test_theta_failure_exit(monkeypatch, capsys):
    import brentlab.theta as theta

    real = theta.theta_brute_force
    monkeypatch.setattr(theta, "theta_brute_force", lambda n, v, c: {**real(n, v, c), 1: {(1, 3): 1.0}})
    assert main(["verify-theta", "--n-max", "2", "--v-max", "9"]) == EXIT_ACCEPTANCE


def test_density_and_constants_outputs(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    small = ["--m-geometric", "256", "--m-uniform", "256"]
    assert main(["density", *small, "--out", str(a)]) == EXIT_OK
    assert main(["density", *small, "--out", str(b), "--threads", "1"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("#brentlab-v1")
    code, out = run(["constants", "--format", "json"], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["residuals"]["lambda_s_max_pairwise"] < 1e-5


def test_stats_byte_identical_across_threads(tmp_path):
    outs = []
    for threads in ("1", "1", "3"):
        p = tmp_path / f"s{len(outs)}.csv"
        main(["stats", "--ensemble", "4", "--n", "300,600,1200", "--cost", "T", "--threads", threads,
              "--out", str(p)])
        outs.append(p.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "brentlab", "census", "--ensemble", "1", "--n", "10"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "1,10,9,0.09" in r.stdout
