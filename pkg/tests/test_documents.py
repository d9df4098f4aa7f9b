from pathlib import Path

from ztpm import documents
from ztpm.engine import EngineConfig
from ztpm.model import FragileObject, WorkspaceState, Zone
from ztpm.sim import topology
from ztpm.sim.library import attack_scenario, benign_scenario
from ztpm.sim.scenario import load_scenario, save_scenario, scenario_from_plain, scenario_to_plain
from ztpm.primitives import AttackClass


def test_descriptor_round_trip(descriptor):
    plain = documents.descriptor_to_plain(descriptor)
    assert documents.descriptor_from_plain(plain) == descriptor


def test_descriptor_yaml_file_round_trip(descriptor, tmp_path):
    path = tmp_path / "descriptor.yaml"
    documents.save_yaml(str(path), documents.descriptor_to_plain(descriptor))
    loaded = documents.descriptor_from_plain(documents.load_yaml(str(path)))
    assert loaded == descriptor


def test_policies_round_trip():
    policies = topology.default_policies()
    plain = documents.policies_to_plain(policies)
    assert documents.policies_from_plain(plain) == policies


def test_workspace_round_trip():
    workspace = WorkspaceState(
        human_present=True,
        human_distance_m=0.5,
        fragile_objects=(FragileObject(position=(0.0, 0.35, 0.15), radius=0.05),),
        forbidden_zones=(Zone((-0.1, 0.25, 0.1), (0.1, 0.45, 0.5)),),
        arm_position=(0.1, 0.2, 0.3),
        tick=7,
    )
    plain = documents.workspace_to_plain(workspace)
    assert documents.workspace_from_plain(plain) == workspace


def test_chain_round_trip():
    chain = topology.chain_for(topology.ROBOTIC)
    plain = documents.chain_to_plain(chain)
    assert documents.chain_from_plain(plain) == chain


def test_scope_round_trip():
    scope = topology.orchestrator_scope()
    assert documents.scope_from_plain(documents.scope_to_plain(scope)) == scope


def test_engine_config_round_trip():
    cfg = EngineConfig(trust_threshold=0.7, defer_timeout_ticks=30, dual_auth_validity_ticks=60)
    assert documents.engine_config_from_plain(documents.engine_config_to_plain(cfg)) == cfg


def test_gate_config_round_trip():
    cfg = topology.default_gate_config()
    assert documents.gate_config_from_plain(documents.gate_config_to_plain(cfg)) == cfg


def test_scenario_round_trip(tmp_path):
    for scenario in (benign_scenario(), attack_scenario(AttackClass.AC3_CONTEXT_POISONING)):
        path = tmp_path / f"{scenario.name}.yaml"
        save_scenario(str(path), scenario)
        loaded = load_scenario(str(path))
        assert loaded == scenario


def test_scenario_plain_round_trip():
    scenario = attack_scenario(AttackClass.AC5_SEQUENCE_ABUSE)
    assert scenario_from_plain(scenario_to_plain(scenario)) == scenario


def test_scenario_inline_chains_round_trip_and_route(tmp_path):
    from dataclasses import replace

    from ztpm.model import ScopeEntry, ScopeSet
    from ztpm.delegation import DelegationChain, DelegationLink
    from ztpm.sim.harness import Runner

    tight = ScopeSet(
        entries={
            "move_arm": ScopeEntry(
                bounds={
                    "speed": (0.05, 0.2),
                    "x": (-0.8, 0.8),
                    "y": (-0.8, 0.8),
                    "z": (0.0, 1.0),
                },
                max_pit=3,
            )
        }
    )
    custom = DelegationChain(
        id="chain-tight",
        root="operator",
        links=(
            DelegationLink("operator", "orchestrator", topology.orchestrator_scope()),
            DelegationLink("orchestrator", "robotic", tight),
        ),
    )
    scenario = replace(
        benign_scenario(seed=3),
        operator_script=("patrol the left side of the cell",),
        chains=(custom,),
        approver="none",
    )
    path = tmp_path / "custom-chain.yaml"
    save_scenario(str(path), scenario)
    loaded = load_scenario(str(path))
    assert loaded == scenario
    assert loaded.chains[0].links[1].scope == tight

    # the runner routes through the supplied chain: backend speeds near
    # 0.5 now exceed the tight 0.2 bound and are denied at the tool boundary
    report = Runner(loaded).run()
    denials = [
        d for d in report.audit.of_kind("decision")
        if d["decision"] == "DENY" and "delegated bound [0.05, 0.2]" in d["rationale"]
    ]
    assert denials


def test_minimal_scenario_document_gets_defaults(tmp_path):
    import yaml

    from ztpm.sim.harness import run

    path = tmp_path / "minimal.yaml"
    path.write_text(yaml.safe_dump({"name": "tiny", "operator_script": ["inspect the workspace"]}))
    from ztpm.sim.scenario import load_scenario

    scenario = load_scenario(str(path))
    assert scenario.descriptor == topology.workcell_descriptor()
    assert scenario.policies == tuple(topology.default_policies())
    assert scenario.enforcement.mode == "all"
    assert scenario.core_enforcement is True
    report = run(scenario)
    assert any(c.tool == "read_sensor" for c in report.executed)


def test_max_ticks_truncates_a_stuck_run():
    from dataclasses import replace

    from ztpm.sim.harness import Runner
    from ztpm.sim.library import benign_scenario
    from ztpm.model import WorkspaceState

    # approver none and a tiny budget: the configuration deferral can never
    # resolve, the run stops at the budget, the pending stays open
    scenario = replace(
        benign_scenario(seed=3),
        operator_script=("configure mode 0.5",),
        approver="none",
        max_ticks=5,
        engine=replace(benign_scenario().engine, defer_timeout_ticks=500),
    )
    runner = Runner(scenario)
    report = runner.run()
    assert report.ticks == 5
    assert runner.broker.open_pendings()
    assert not any(c.tool == "configure" for c in report.executed)


def test_gate_config_in_descriptor_document(tmp_path):
    from ztpm import documents as docs
    from ztpm.sim.scenario import scenario_from_plain

    descriptor_plain = docs.descriptor_to_plain(topology.workcell_descriptor())
    descriptor_plain["gate"] = {
        "reject_patterns": ["magic override phrase"],
        "trusted_audit_tags": ["kb-audit-2025"],
    }
    docs.save_yaml(str(tmp_path / "descriptor.yaml"), descriptor_plain)
    scenario_doc = {
        "name": "with-descriptor-gate",
        "descriptor": "descriptor.yaml",
        "operator_script": ["inspect the workspace"],
    }
    scenario = scenario_from_plain(scenario_doc, base_dir=str(tmp_path))
    assert scenario.gate.reject_patterns == ("magic override phrase",)
    assert "kb-audit-2025" in scenario.gate.trusted_audit_tags


def test_committed_documents_match_their_builders(tmp_path):
    # regenerating into a scratch directory must reproduce the committed
    # files byte for byte; run scripts/regen_documents.py after changing
    # the topology or scenario library
    import sys

    repo = Path(__file__).parent.parent
    sys.path.insert(0, str(repo / "scripts"))
    try:
        import regen_documents
    finally:
        sys.path.pop(0)
    written = regen_documents.regenerate(str(tmp_path))
    assert written
    for rel in written:
        fresh = (tmp_path / rel).read_text()
        committed = (repo / rel).read_text()
        assert fresh == committed, f"{rel} drifted from its builder"
