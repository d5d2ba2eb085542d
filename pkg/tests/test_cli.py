import json

from slap.cli import EXIT_CONFIG, EXIT_OK, main


def test_run_bundled(tmp_path, capsys):
    assert main(["run", "honest_ap_query", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "ACCEPTED" in out and "size reconciliation: exact" in out
    report = json.loads((tmp_path / "honest_ap_query.json").read_text())
    assert report["reconciliation"] == "exact"
    assert (tmp_path / "honest_ap_query.trace.jsonl").read_text()


def test_bad_scenario_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("version: 1\nid: x\nregions: [r]\nentities:\n  - {id: a, kind: blimp, position: [0, 0]}\n")
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert "bad.yaml:5" in capsys.readouterr().err


def test_bad_profile_env(monkeypatch):
    monkeypatch.setenv("SLAP_PROFILE", "bogus")
    assert main(["attack", "stale_ts", "--trials", "1"]) == EXIT_CONFIG


def test_argparse_errors_exit_2():
    assert main(["attack", "teleport"]) == EXIT_CONFIG
    assert main([]) == EXIT_CONFIG


def test_help_exit_0():
    assert main(["--help"]) == EXIT_OK


def test_bench_requires_ten_reps():
    assert main(["bench", "pol_ap", "--reps", "3"]) == EXIT_CONFIG


def test_attack_runs(capsys):
    assert main(["attack", "forge_gs", "--trials", "5", "--seed", "3"]) == EXIT_OK
    assert "forge_gs" in capsys.readouterr().out


def test_vectors_cmd(tmp_path):
    assert main(["vectors", "--module", "tlp", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "tlp.jsonl").exists()
