from __future__ import annotations

import json

from hofa.cli import format_lambda, main, parse_lambda


def run(capsys, *argv):
    code = main(list(argv) + ["--json"])
    return code, json.loads(capsys.readouterr().out)


def test_sigma(capsys):
    code, out = run(capsys, "homog", "sigma", "--p", "3", "--d", "3", "--k", "1")
    assert code == 0 and out["sigma"] == 8


def test_global_flags_before_subcommand(capsys):
    code, out = run(capsys, "--p", "3", "poly", "eval", "--poly", "1/9 x1 + 1/3 x1^2", "--x", "2")
    assert out["value"] == "5/9"


def test_parse_error_is_reported(capsys):
    code, out = run(capsys, "poly", "eval", "--p", "2", "--poly", "1/6 x1^1", "--x", "1")
    assert code == 2 and "denominator not a power of p=2" in out["message"]


def test_rewrite_and_complexity(capsys):
    _, out = run(capsys, "forms", "rewrite", "--p", "3", "--d", "3", "--k", "1", "--terms", "1*(2)")
    assert out["normal_form"] == "8*(1)"
    _, out = run(capsys, "forms", "cs-complexity", "--p", "5", "--system", "1,0;1,1;1,2;1,3")
    assert out["cs_complexity"] == 2


def test_phi_and_northo(capsys, tmp_path):
    _, out = run(capsys, "consist", "phi", "--p", "3", "--d", "1", "--k", "0", "--system", "1,0;0,1;1,1")
    assert out["order"] == 9 and out["matches_duality"]
    fac = tmp_path / "b.txt"
    fac.write_text("1/3 x1 x2\n")
    lam = tmp_path / "lam.txt"
    lam.write_text("1,1,2\n")
    code, out = run(capsys, "consist", "northo", "--p", "3", "--factor", str(fac), "--system",
                    "1,0;0,1;1,1", "--lambda", str(lam), "--eps", "0.7")
    assert code == 0 and out["verdict"] == "NONZERO" and out["bias"] < 0.7


def test_violation_record_exit_code(capsys):
    code, out = run(capsys, "consist", "equidist", "--p", "3", "--factor", "1/3 x1 x2", "--system",
                    "1,0;0,1;1,1", "--eps", "0.01")
    assert code == 1 and out["violation"].startswith("equidistribution")


def test_determinism(capsys):
    args = ["homog", "sample", "--p", "3", "--d", "3", "--k", "1", "--n", "2", "--seed", "4"]
    _, a = run(capsys, *args)
    _, b = run(capsys, *args)
    assert a == b and a["verified"]


def test_factor_commands(capsys):
    _, out = run(capsys, "factor", "atoms", "--p", "3", "--factor", "1/3 x1^2")
    assert out["atoms"] == 2
    _, out = run(capsys, "factor", "condexp", "--p", "3", "--factor", "1/3 x1^2", "--table", "1 0 1")
    assert out["real"] == [1.0, 0.5, 0.5]


def test_lambda_roundtrip():
    assert format_lambda(parse_lambda("1,1,2;0,1,0")) == "1,1,2;0,1,0"
