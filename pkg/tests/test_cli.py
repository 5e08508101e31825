import json

import numpy as np
import pytest

from eigenrelax.cli import main
from eigenrelax.fileio import read_matrix, write_matrix
from eigenrelax import RawMatrix, gen_uniform


@pytest.fixture
def two(tmp_path):
    path = tmp_path / "two.txt"
    path.write_text("n 2\n0 1\n1 0\n")
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_solve_spectral(capsys, two):
    code, out = run(capsys, "solve", two)
    doc = json.loads(out.out)
    assert code == 0 and doc["outcome"]["best_energy"] == -2.0
    assert doc["schema_version"]


def test_solve_raw_matches_symmetrized(capsys, tmp_path, rng):
    a = rng.uniform(-4, 4, size=(8, 8))
    np.fill_diagonal(a, 0)
    raw = tmp_path / "raw.txt"
    write_matrix(raw, RawMatrix(a))
    sym = tmp_path / "sym.txt"
    from eigenrelax import symmetrize

    write_matrix(sym, symmetrize(RawMatrix(a)))
    _, out_raw = run(capsys, "solve", raw, "--raw", "--strategy", "exhaustive")
    _, out_sym = run(capsys, "solve", sym, "--strategy", "exhaustive")
    assert json.loads(out_raw.out)["outcome"]["best_energy"] == json.loads(out_sym.out)["outcome"]["best_energy"]


def test_solve_raw_without_flag_is_parse_error(capsys, tmp_path):
    path = tmp_path / "raw.txt"
    path.write_text("raw n 2\n0 2\n0 0\n")
    code, out = run(capsys, "solve", path)
    assert code == 2


def test_solve_linear_term(capsys, two, tmp_path):
    h = tmp_path / "h.txt"
    h.write_text("-10 -10\n")
    code, out = run(capsys, "solve", two, "--linear", h, "--strategy", "exhaustive")
    doc = json.loads(out.out)
    # E = -(Js,s) - (h,s) is minimized at (-1,-1) with value -2 - 20
    assert doc["outcome"]["problem_state"] == [-1, -1]
    assert doc["outcome"]["best_energy"] == pytest.approx(-22.0)


def test_solve_oracle_flag(capsys, tmp_path):
    path = tmp_path / "m.txt"
    write_matrix(path, gen_uniform(15, seed=2))
    code, out = run(capsys, "solve", path, "--check-oracle")
    doc = json.loads(out.out)
    assert code == 0
    assert doc["found_global"] == (doc["outcome"]["best_energy"] <= doc["oracle_energy"] + 1e-6)


def test_solve_exhaustive_above_cap(capsys, tmp_path, monkeypatch):
    path = tmp_path / "m.txt"
    write_matrix(path, gen_uniform(12, seed=2))
    monkeypatch.setenv("EXHAUSTIVE_CAP", "8")
    code, _ = run(capsys, "solve", path, "--strategy", "exhaustive")
    assert code == 3


def test_solve_parse_error(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("n 2\n0 1\n1 zz\n")
    code, out = run(capsys, "solve", path)
    assert code == 2 and "bad.txt:3" in out.err


def test_gen_deterministic(capsys, tmp_path):
    for d in ("a", "b"):
        assert run(capsys, "gen", "--ensemble", "uniform", "--n", 15, "--count", 3, "--seed", 7,
                   "--out-dir", tmp_path / d)[0] == 0
    for i in range(3):
        name = f"uniform_n15_{i:04d}.txt"
        assert (tmp_path / "a" / name).read_text() == (tmp_path / "b" / name).read_text()


def test_gen_hebb(capsys, tmp_path):
    code, _ = run(capsys, "gen", "--ensemble", "hebb", "--n", 500, "--p", 10, "--seed", 7, "--out-dir", tmp_path)
    assert code == 0
    J = read_matrix(tmp_path / "hebb_n500_p10_0000.txt")
    assert J.n == 500
    assert (tmp_path / "hebb_n500_p10_0000.patterns").read_text().startswith("500 10\n")


def test_gen_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["gen", "--ensemble", "uniform"])
    assert info.value.code == 1
    assert run(capsys, "gen", "--ensemble", "hebb", "--n", 10)[0] == 1


def test_spectrum(capsys, two):
    code, out = run(capsys, "spectrum", two, "--closest", 1)
    assert code == 0
    assert "eigenvalues: 1 -1" in out.out
    assert "lower bound: -2" in out.out
    assert "positive eigenvalues: 1" in out.out


def test_spectrum_json_hebb(capsys, tmp_path):
    run(capsys, "gen", "--ensemble", "hebb", "--n", 40, "--p", 1, "--out-dir", tmp_path)
    code, out = run(capsys, "spectrum", tmp_path / "hebb_n40_p1_0000.txt", "--json")
    doc = json.loads(out.out)
    assert doc["eigenvalues"][0] == pytest.approx(39 / 40)
    assert np.allclose(doc["eigenvalues"][1:], -1 / 40)
    assert abs(doc["eigenvalue_sum"]) < 1e-10


def test_bench_and_verify(capsys, tmp_path):
    out_dir = tmp_path / "run"
    code, out = run(capsys, "bench", "--n", 12, "--trials", 3, "--oracle", "--strategy", "spectral:k=3,policy=c",
                    "--strategy", "random", "--out-dir", out_dir, "--seed", 4)
    assert code == 0 and "P_global" in out.out
    assert run(capsys, "verify", out_dir / "trials.csv", out_dir / "report.json")[0] == 0


def test_bench_config_file(capsys, tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"ensemble": "uniform", "n": 10, "trials": 2, "oracle": True,
                               "strategies": ["spectral:k=3,policy=positive", "random"]}))
    code, _ = run(capsys, "bench", "--config", cfg, "--out-dir", tmp_path / "o")
    assert code == 0
    doc = json.loads((tmp_path / "o" / "report.json").read_text())
    assert doc["spec"]["strategies"] == ["spectral(k=3,policy=positive)", "random"]


def test_bench_infeasible(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("EXHAUSTIVE_CAP", "10")
    code, out = run(capsys, "bench", "--n", 15, "--oracle", "--out-dir", tmp_path)
    assert code == 3 and not (tmp_path / "trials.csv").exists()


def test_bench_missing_n(capsys, tmp_path):
    assert run(capsys, "bench", "--out-dir", tmp_path)[0] == 1
