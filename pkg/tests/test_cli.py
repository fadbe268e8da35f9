import mpmath
import pytest

from chistar.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_psi1_file(tmp_path, capsys):
    code, out = run(capsys, "psi", "1", "--out", str(tmp_path))
    assert code == 0 and out.rstrip().endswith("status = PASS")
    body = (tmp_path / "psi_1.txt").read_text().splitlines()
    assert "1 0 0 : 1" in body and "0 0 1 : -1" in body


def test_eval_j_at_i(tmp_path, capsys):
    code, out = run(capsys, "eval", "--fn", "j", "--tau", "i", "--out", str(tmp_path))
    assert code == 0
    line = next(ln for ln in out.splitlines() if ln.startswith("value = "))
    real = mpmath.mpf(line.split("=")[1].split()[0])
    assert abs(real - 1728) < mpmath.mpf("1e-30")
    assert (tmp_path / "eval_j.txt").read_text() == out


def test_verify_psi_after_build(tmp_path, capsys):
    assert run(capsys, "psi", "2", "--out", str(tmp_path))[0] == 0
    code, out = run(capsys, "verify", "psi", "--n", "2", "--samples", "3", "--out", str(tmp_path))
    assert code == 0 and "status = PASS" in out


def test_verify_chi_expectations(tmp_path, capsys):
    code, out = run(capsys, "verify", "chi", "--n", "2", "--g", "1 0 1 2", "--out", str(tmp_path))
    assert code == 0 and "verdict = FAILS" in out


def test_dn_and_phi(tmp_path, capsys):
    code, out = run(capsys, "dn", "4", "--out", str(tmp_path))
    assert code == 0 and "size = 6" in out
    code, out = run(capsys, "phi", "3", "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "phi_3.txt").exists()


def test_cm_and_special(tmp_path, capsys):
    code, out = run(capsys, "cm", "-7", "--samples", "4", "--out", str(tmp_path))
    assert code == 0 and "j_e1 = -3375" in out
    desc = tmp_path / "diag.txt"
    desc.write_text("n 2\nrel 1 2 1 0 0 1\n")
    code, out = run(capsys, "special", "push", "--desc", str(desc), "--samples", "2", "--out", str(tmp_path))
    assert code == 0
    code, out = run(capsys, "special", "vn", "--n", "2", "--samples", "4", "--out", str(tmp_path))
    assert code == 0


def test_usage_errors(tmp_path, capsys):
    for argv in (["eval", "--fn", "j"], ["eval", "--fn", "j", "--tau", "x"], ["psi", "2", "--prec", "10"],
                 ["psi", "2", "--trunc", "4"], ["special", "push"], ["verify", "chi", "--g", "1 1 0 1"],
                 ["nope"]):
        with pytest.raises(SystemExit) as exc:
            main(argv + ["--out", str(tmp_path)] if argv != ["nope"] else argv)
        assert exc.value.code == 2


def test_computation_failure_exit_code(tmp_path, capsys):
    code, out = run(capsys, "eval", "--fn", "j", "--tau=0-i", "--out", str(tmp_path))
    assert code == 1 and "DomainError" in out and out.rstrip().endswith("status = FAIL")
    code, out = run(capsys, "cm", "-5", "--out", str(tmp_path))
    assert code == 1 and "InvalidDiscriminant" in out


def test_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(capsys, "psi", "2", "--out", str(out))[0] == 0
        assert run(capsys, "verify", "psi", "--n", "2", "--samples", "2", "--out", str(out))[0] == 0
    for name in ("psi_2.txt", "psi_2_build.txt", "verify_psi_2.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
