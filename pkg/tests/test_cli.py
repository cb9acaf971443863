import json
import subprocess
import sys

import pytest

from hamprobe.cli import LEARNER_COMMANDS, TESTER_COMMANDS, main
from hamprobe.hamiltonian import Hamiltonian


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("command", sorted(TESTER_COMMANDS))
def test_tester_commands_print_decisions(command, capsys):
    code, out, _ = run(capsys, command, "--n", "3", "--s", "2", "--eps2", "0.7", "--mode", "exact")
    assert code == 0
    payload = json.loads(out)
    assert payload["verdict"] in ("close", "far", "undecided")
    assert "instance" in payload


def test_tester_on_file(tmp_path, capsys):
    Hamiltonian.from_labels({"ZII": 1.0}).save(tmp_path / "h.txt")
    code, out, _ = run(capsys, "test-locality", "--hamiltonian", str(tmp_path / "h.txt"), "--c-T", "100")
    assert code == 0 and json.loads(out)["verdict"] == "close"


def test_support_with_several_candidates(capsys):
    code, out, _ = run(
        capsys, "test-support", "--instance", "k_local", "--n", "2", "--k", "1", "--support", "ZI,IZ", "--support", "XX"
    )
    assert code == 0
    assert len(json.loads(out)["decisions"]) == 2


@pytest.mark.parametrize("command", sorted(LEARNER_COMMANDS))
def test_learner_commands(command, capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, command, "--n", "3", "--s", "2", "--mode", "exact", "--report", str(report))
    assert code == 0
    Hamiltonian.from_text(out, n=3)
    assert json.loads(report.read_text())["achieved_error"] <= 0.15


def test_verify_lemmas(capsys):
    code, out, _ = run(capsys, "verify-lemmas", "mub_design")
    assert code == 0 and "mub_design" in out


def test_config_defaults_and_run(tmp_path, capsys):
    code, out, _ = run(capsys, "config", "--defaults")
    assert code == 0 and out.startswith("[experiment]")
    cfg = tmp_path / "exp.ini"
    cfg.write_text(out.replace("seed_stop = 10", "seed_stop = 0"))
    code, out, _ = run(capsys, "run", "--config", str(cfg), "--output", str(tmp_path / "res"))
    assert code == 0 and json.loads(out)["trials"] == 0
    assert (tmp_path / "res.csv").exists()


def test_errors_exit_with_code_2(tmp_path, capsys):
    code, _, err = run(capsys, "run", "--config", str(tmp_path / "missing.ini"))
    assert code == 2 and err.startswith("hamprobe: error:")
    (tmp_path / "h.txt").write_text("ZZ 2.0\n")
    code, _, err = run(capsys, "test-locality", "--hamiltonian", str(tmp_path / "h.txt"))
    assert code == 2
    code, _, _ = run(capsys, "test-locality", "--instance", "far_from_k_local", "--n", "2", "--k", "2")
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hamprobe", "config", "--defaults"], capture_output=True, text=True)
    assert proc.returncode == 0 and "[experiment]" in proc.stdout
