import json
import os
from pathlib import Path

import pytest

from ztpm import documents
from ztpm.cli import EX_OK, EX_SCENARIO, EX_USAGE, EX_VALIDATION, main
from ztpm.sim import topology

REPO = Path(__file__).parent.parent


def test_usage_error_exits_64(capsys):
    assert main(["no-such-command"]) == EX_USAGE


def test_missing_subcommand_exits_64(capsys):
    assert main([]) == EX_USAGE


def test_validate_bundled_descriptor(capsys):
    code = main(["validate", str(REPO / "configs" / "workcell.yaml")])
    assert code == EX_OK
    assert "ok" in capsys.readouterr().out


def test_validate_reports_escalating_chain(tmp_path, capsys):
    plain = documents.descriptor_to_plain(topology.workcell_descriptor())
    plain["chains"] = [
        {
            "id": "bad",
            "root": "operator",
            "links": [
                {"from": "operator", "to": "orchestrator",
                 "scope": {"move_arm": {"bounds": {"speed": [0.0, 0.3]}, "max_pit": 3}}},
                {"from": "orchestrator", "to": "robotic",
                 "scope": {"move_arm": {"bounds": {"speed": [0.0, 0.5]}, "max_pit": 3}}},
            ],
        }
    ]
    path = tmp_path / "descriptor.yaml"
    documents.save_yaml(str(path), plain)
    code = main(["validate", str(path)])
    out = capsys.readouterr().out
    assert code == EX_VALIDATION
    assert "escalation" in out


def test_validate_scenario_document(capsys):
    assert main(["validate", str(REPO / "scenarios" / "benign.yaml")]) == EX_OK


def test_run_benign_scenario(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code = main(["run", str(REPO / "scenarios" / "benign.yaml"), "--seed", "3", "--out", str(out_dir)])
    assert code == EX_OK
    stdout = capsys.readouterr().out
    assert "decisions PERMIT" in stdout
    audit = (out_dir / "audit.jsonl").read_text().strip().splitlines()
    assert all(json.loads(line) for line in audit)
    report = json.loads((out_dir / "report.json").read_text())
    assert report["scenario"] == "benign-c0"
    assert report["executed"] > 0


def test_run_attack_with_enforcement_flags(capsys):
    code = main(["run", str(REPO / "scenarios" / "attack_ac2.yaml"), "--enforce", "none"])
    assert code == EX_OK
    assert "attack AC-2: SUCCEEDED" in capsys.readouterr().out

    code = main(["run", str(REPO / "scenarios" / "attack_ac2.yaml"), "--enforce", "CII-1,CATP-4"])
    assert code == EX_OK
    assert "did not succeed" in capsys.readouterr().out


def test_experiment_blind_table(capsys):
    code = main(["experiment", "--backend", "blind", "--seed", "1"])
    assert code == EX_OK
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "condition,mean,sd,min,max"
    for line in lines[1:4]:
        mean = float(line.split(",")[1])
        assert abs(mean - 0.5) < 0.005


def test_experiment_tea4_reports_denials(capsys):
    code = main(["experiment", "--backend", "sensitive", "--seed", "1", "--tea4", "on"])
    assert code == EX_OK
    out = capsys.readouterr().out
    assert "denied over-bound commands:" in out
    assert "executed over-bound commands with human present: 0" in out


def test_coverage_full_matrix(capsys, tmp_path):
    out = tmp_path / "coverage.csv"
    code = main(["coverage", "--out", str(out)])
    assert code == EX_OK
    stdout = capsys.readouterr().out
    assert "total,15/15" in stdout
    assert out.read_text().strip().endswith("total,15/15")


def test_validate_missing_file_exits_1():
    assert main(["validate", "/nonexistent/nope.yaml"]) == EX_VALIDATION


def test_run_with_deny_all_approver_flag(capsys):
    code = main(["run", str(REPO / "scenarios" / "benign.yaml"), "--approver", "deny-all"])
    assert code == EX_OK
    out = capsys.readouterr().out
    assert "decisions DEFER: 1" in out
    # the denied configuration change never executes: one fewer command
    # than the approve-all baseline's eleven
    assert "executed commands: 10" in out


def test_env_var_supplies_default_scenario(monkeypatch, capsys):
    monkeypatch.setenv("ZTPM_CONFIG", str(REPO / "scenarios" / "benign.yaml"))
    code = main(["run", "-"])
    assert code == EX_OK
    assert "benign-c0 finished" in capsys.readouterr().out


def test_malformed_yaml_is_a_validation_failure(tmp_path, capsys):
    bad = tmp_path / "broken.yaml"
    bad.write_text("agents: [{id: x, role: Robotic")  # unclosed flow mapping
    assert main(["validate", str(bad)]) == EX_VALIDATION
    assert "malformed document" in capsys.readouterr().err


def test_scenario_with_bad_predicate_surfaces_position(tmp_path, capsys):
    import yaml

    doc = {
        "name": "bad-predicate",
        "operator_script": ["inspect the workspace"],
        "policies": [
            {"id": "p", "subject": "*", "object": "*", "predicate": "and and",
             "ep": "e4", "effect": "PERMIT"},
        ],
    }
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump(doc))
    assert main(["validate", str(path)]) == EX_VALIDATION
    err = capsys.readouterr().err
    assert "bad predicate" in err
    assert "1:1:" in err


@pytest.mark.parametrize(
    "name", sorted(p.name for p in (REPO / "scenarios").glob("*.yaml"))
)
def test_every_bundled_scenario_validates_and_runs(name, capsys):
    path = str(REPO / "scenarios" / name)
    assert main(["validate", path]) == EX_OK
    # headless runs finish even for the console demo: unresolved deferrals
    # expire into denials
    assert main(["run", path]) == EX_OK
