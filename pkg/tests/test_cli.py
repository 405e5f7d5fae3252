import io
import json
import math
import subprocess
import sys

import pytest

from trigon.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv, "--format", "json")
    return code, json.loads(out), out


def test_check_text():
    code, out, _ = run("check", "weitzenbock", "--triangle", "3,4,5")
    assert code == 0
    assert "lhs = 50" in out and "holds" in out


def test_check_json_record():
    code, rec, _ = run_json("check", "finsler_hadwiger", "--triangle", "3,4,5")
    assert code == 0
    assert rec["command"] == "check"
    assert rec["entries"] == ["finsler_hadwiger"]
    assert rec["status"] == "holds"
    assert rec["result"]["abs_gap"] == pytest.approx(50 - 24 * math.sqrt(3) - 6, abs=1e-4)


def test_check_inline_violated():
    code, rec, _ = run_json("check", "a >= b", "--triangle", "3,4,5")
    assert code == 2
    assert rec["status"] == "violated"


def test_check_triple():
    code, rec, _ = run_json("check", "schur_general", "--triple", "2,1,1", "--t", "2")
    assert code == 0
    assert rec["result"]["lhs"] == 4 and rec["result"]["t"] == 2


def test_check_degenerate_is_error():
    code, out, err = run("check", "weitzenbock", "--triangle", "1,1,2")
    assert code == 1
    assert err.startswith("error:") and "a + b > c" in err


def test_error_record_in_json():
    code, rec, _ = run_json("check", "nope_id", "--triangle", "3,4,5")
    assert code == 1
    assert rec["status"] == "error" and "error" in rec


def test_parse_error_reports_position():
    code, _, err = run("eval", "a + * b", "--triangle", "3,4,5")
    assert code == 1
    assert "position 5" in err


def test_bad_usage_exit_code(capsys):
    assert main(["frobnicate"]) == 1
    assert main(["scan"]) == 1


def test_eval():
    code, out, _ = run("eval", "3 + 4*(R - 2*r)/(4*R + r)", "--triangle", "3,4,5")
    assert code == 0
    assert float(out) == pytest.approx(3 + 2 / 11, rel=1e-14)


def test_scan_json_deterministic():
    argv = ("scan", "refinement_2", "--samples", "3000", "--seed", "42")
    code1, rec, raw1 = run_json(*argv)
    code2, _, raw2 = run_json(*argv)
    assert code1 == code2 == 0
    assert raw1 == raw2
    assert rec["seed"] == 42 and rec["result"]["violations"] == 0


def test_scan_workers_do_not_change_output():
    base = ("scan", "weitzenbock", "--samples", "70000", "--seed", "1")
    _, one, _ = run_json(*base)
    _, many, _ = run_json(*base, "--workers", "4")
    assert one["result"] == many["result"]


def test_minimize_json_deterministic():
    _, rec, raw1 = run_json("minimize", "euler", "--grid", "60")
    _, _, raw2 = run_json("minimize", "euler", "--grid", "60")
    assert raw1 == raw2
    assert abs(rec["result"]["min_normalized_gap"]) <= 1e-8


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("TRIGON_SEED", "17")
    _, rec, _ = run_json("scan", "euler", "--samples", "100")
    assert rec["seed"] == 17
    _, explicit, _ = run_json("scan", "euler", "--samples", "100", "--seed", "17")
    assert rec["result"] == explicit["result"]


def test_scan_csv():
    code, out, _ = run("scan", "weitzenbock", "--samples", "5", "--format", "csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "index,a,b,c,normalized_gap"
    assert len(lines) == 6
    assert all(float(row.split(",")[4]) >= 0 for row in lines[1:])


def test_scan_triple_default_sampler():
    code, rec, _ = run_json("scan", "schur_general", "--t", "-0.5", "--samples", "2000")
    assert code == 0
    assert rec["result"]["sampler"] == "log_uniform"


def test_scan_sampler_mismatch():
    code, _, err = run("scan", "schur_t1", "--sampler", "ravi_uniform", "--samples", "10")
    assert code == 1 and "sampler" in err


def test_scan_violation_exit_code():
    code, rec, _ = run_json("scan", "a^2 + b^2 + c^2 >= 18*R*r + cyc((a - b)^2)", "--samples", "200")
    assert code == 2
    assert rec["result"]["violations"] > 0


def test_compare():
    code, rec, _ = run_json("compare", "refinement_2", "finsler_hadwiger", "--samples", "3000")
    assert code == 0
    assert rec["result"]["relation"] == "first_dominates"
    assert rec["result"]["witness_second"] is None


def test_identities():
    code, rec, _ = run_json("identities", "--samples", "2000", "--seed", "42")
    assert code == 0
    assert set(rec["result"]["max_residual"]) == {f"I{k}" for k in range(1, 18)}


def test_find_violation():
    code, rec, _ = run_json("find-violation", "a^2 + b^2 + c^2 >= 18*R*r + cyc((a - b)^2)", "--samples", "100")
    assert code == 2
    assert rec["result"]["witness"]["index"] < 100
    code, rec, _ = run_json("find-violation", "euler", "--samples", "1000")
    assert code == 0 and rec["result"]["witness"] is None


def test_defs_file(tmp_path):
    p = tmp_path / "mine.txt"
    p.write_text("myineq : triangle : a^2 + b^2 >= 2*a*b\n", encoding="utf-8")
    code, rec, _ = run_json("check", "myineq", "--triangle", "3,4,5", "--defs", str(p))
    assert code == 0 and rec["result"]["abs_gap"] == 1
    dup = tmp_path / "dup.txt"
    dup.write_text("euler : triangle : R >= r\n", encoding="utf-8")
    code, _, err = run("catalog", "list", "--defs", str(dup))
    assert code == 1 and "line 1" in err


def test_defs_inhomogeneous_flag(tmp_path):
    p = tmp_path / "inh.txt"
    p.write_text("inh : triangle : a >= 0.1\n", encoding="utf-8")
    assert run("check", "inh", "--triangle", "3,4,5", "--defs", str(p))[0] == 1
    assert run("check", "inh", "--triangle", "3,4,5", "--defs", str(p), "--allow-inhomogeneous")[0] == 0


def test_catalog_list_and_export(tmp_path):
    code, rec, _ = run_json("catalog", "list")
    assert code == 0
    ids = [r["id"] for r in rec["result"]["entries"]]
    assert "weitzenbock" in ids and "refinement_2" in ids
    target = tmp_path / "all.txt"
    code, out, _ = run("catalog", "export", "-o", str(target))
    assert code == 0 and str(target) in out
    code, _, _ = run_json("catalog", "list", "--defs", str(target))
    assert code == 1  # every id collides with a built-in


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "trigon", "eval", "s", "--triangle", "3,4,5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "6"
