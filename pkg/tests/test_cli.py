import json

import pytest

from treegibbs import cli


@pytest.fixture(autouse=True)
def out_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env-out"))
    return tmp_path / "env-out"


def run(*argv):
    return cli.main(list(argv))


def test_catalog_lists_five_families(capsys):
    assert run("catalog") == 0
    out = capsys.readouterr().out
    assert len(out.strip().splitlines()) == 5
    k3 = next(line for line in out.splitlines() if line.startswith("k3_family"))
    assert "at least two periodic Gibbs measures" in k3
    four = next(line for line in out.splitlines() if line.startswith("four_cycle_family"))
    assert "at least four periodic Gibbs measures" in four


def test_verify_k4_success_writes_reports(out_env):
    assert run("verify", "--family", "k_ge4_family", "--k", "4") == 0
    doc = json.loads((out_env / "verify_k_ge4_family.json").read_text())
    assert doc["passed"] and doc["refines"]
    assert (out_env / "verify_k_ge4_family_kge4_k4.csv").read_text().startswith("t,f,g,Hf,Hg")


def test_verify_k2_n1_reports_positivity(capsys):
    assert run("verify", "--family", "k2_family", "--n", "1") == 2
    assert "not positive" in capsys.readouterr().err


def test_verify_unknown_family(capsys):
    assert run("verify", "--family", "nope") == 2
    assert "usage" in capsys.readouterr().err


def test_verify_failure_exit_one(monkeypatch):
    monkeypatch.setattr(cli, "verify_catalog", lambda *a, **k: _FailingReport())
    assert run("verify", "--family", "k3_family") == 1


class _FailingReport:
    positive = True
    passed = False
    tolerance = 1e-6
    nodes = 200
    scheme = "gauss_legendre"
    checks = []

    def to_dict(self):
        return {"passed": False}


def test_solve_unit_kernel_single_fixed_point(tmp_path, capsys):
    out = tmp_path / "solve"
    assert run("solve", "--family", "generic_xi", "--xi", "zero", "--k", "3", "--out", str(out)) == 0
    doc = json.loads((out / "solve.json").read_text())
    assert len(doc["cycles"]) == 1 and doc["cycles"][0]["classification"] == "fixed_point"


def test_solve_four_cycle(tmp_path):
    out = tmp_path / "s"
    assert run("solve", "--family", "four_cycle_family", "--k", "100", "--out", str(out)) == 0
    kinds = [c["classification"] for c in json.loads((out / "solve.json").read_text())["cycles"]]
    assert kinds.count("two_cycle") >= 2 and "fixed_point" in kinds


def test_solve_k1_warns(tmp_path, capsys):
    assert run("solve", "--family", "generic_xi", "--xi", "cos_diff", "--k", "1", "--starts", "2",
               "--out", str(tmp_path)) == 0
    assert "linear case" in capsys.readouterr().err


def test_solve_is_bit_reproducible(tmp_path):
    for sub in ("a", "b"):
        assert run("solve", "--family", "k_ge4_family", "--k", "5", "--seed", "7", "--starts", "3",
                   "--out", str(tmp_path / sub)) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_uniq_exit_codes():
    assert run("uniq", "--family", "generic_xi", "--xi", "zero", "--k", "2") == 0
    assert run("uniq", "--family", "k3_family", "--k", "3") == 3
    assert run("uniq", "--family", "k2_family", "--n", "1") == 2


def test_uniq_from_xi_file(tmp_path):
    from treegibbs.grid import build_rule
    from treegibbs.kernels.base import write_matrix_csv
    import numpy as np

    rule = build_rule(30)
    write_matrix_csv(tmp_path / "xi.csv", rule, np.zeros((30, 30)), np.zeros(30))
    assert run("uniq", "--family", "generic_xi", "--xi-file", str(tmp_path / "xi.csv"), "--nodes", "30",
               "--k", "4") == 0


def test_k0(capsys):
    assert run("k0", "--k-max", "2") == 4
    assert run("k0", "--k-max", "1000") == 0
    first = capsys.readouterr().out.splitlines()[-1]
    assert run("k0", "--k-max", "1000") == 0
    assert capsys.readouterr().out.splitlines()[-1] == first
    assert first.startswith("k0=100 ")


def test_export_kernel_and_reuse(out_env):
    assert run("export-kernel", "--family", "k3_family", "--nodes", "40") == 0
    path = out_env / "kernel_k3_family.csv"
    assert path.exists() and path.with_suffix(".json").exists()
    assert run("uniq", "--kernel-file", str(path), "--k", "3") == 3


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "uniq", "family": "generic_xi", "xi": "product", "J": 5.0, "k": 2}))
    assert run("uniq", "--config", str(cfg)) == 3
    assert run("uniq", "--config", str(cfg), "--J", "0.01") == 0


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"family": "k3_family", "colour": "red"}))
    assert run("uniq", "--config", str(cfg)) == 2
    assert "colour" in capsys.readouterr().err


def test_config_wrong_command(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "solve"}))
    assert run("uniq", "--config", str(cfg)) == 2


def test_bad_flag_is_config_error():
    assert run("solve", "--bogus") == 2
