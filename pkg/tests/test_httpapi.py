import json
import urllib.error
import urllib.request

import pytest

from ztpm.audit import AuditLog
from ztpm.broker import DeferBroker
from ztpm.engine import Decision, Effect, EngineConfig
from ztpm.httpapi import ApiServer, BrokerFacade
from ztpm.model import EnforcementPoint, Invocation
from ztpm.sim import topology


def _inv(n=1):
    return Invocation(
        id=f"inv-{n}",
        subject="robotic",
        chain="c",
        tool="move_arm",
        params={"speed": 0.3, "x": 0.0, "y": 0.2, "z": 0.3},
        ep=EnforcementPoint.E5_PRE_ACTUATION,
        timestamp=n,
        session="s",
    )


@pytest.fixture
def server():
    descriptor = topology.workcell_descriptor()
    broker = DeferBroker({h.id: h for h in descriptor.humans}, EngineConfig())
    audit = AuditLog()
    facade = BrokerFacade(broker, descriptor, audit, scenario_name="api-test")
    api = ApiServer(facade, host="127.0.0.1", port=0)
    api.start()
    yield api, facade, broker, audit
    api.stop()


def _get(api, path):
    with urllib.request.urlopen(f"http://127.0.0.1:{api.port}{path}") as response:
        return json.loads(response.read())


def _post(api, path, payload):
    data = json.dumps(payload).encode()
    request = urllib.request.Request(
        f"http://127.0.0.1:{api.port}{path}",
        data=data,
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    with urllib.request.urlopen(request) as response:
        return json.loads(response.read())


def test_status_lists_humans(server):
    api, facade, broker, audit = server
    facade.update(5, {"robotic": 0.8}, [])
    status = _get(api, "/api/v1/status")
    assert status["scenario"] == "api-test"
    assert status["tick"] == 5
    assert {h["id"] for h in status["humans"]} == {"operator", "supervisor"}


def test_trust_snapshot(server):
    api, facade, broker, audit = server
    facade.update(3, {"robotic": 0.75, "vision": 0.8}, ["robotic"])
    snap = _get(api, "/api/v1/trust")
    assert snap["trust"]["robotic"] == 0.75
    assert _get(api, "/api/v1/status")["contracted_agents"] == ["robotic"]


def test_pending_listing_and_decision_flow(server):
    api, facade, broker, audit = server
    pid = broker.submit(Decision(outcome=Effect.DEFER, runtime_pit=3), _inv(), now=0)
    facade.update(1, {}, [])
    listed = _get(api, "/api/v1/pending")["pending"]
    assert [p["pending_id"] for p in listed] == [pid]
    assert listed[0]["required_approvals"] == 1

    result = _post(api, f"/api/v1/pending/{pid}/decision", {"human_id": "operator", "verdict": "approve"})
    assert result["status"] == "resolved"
    assert result["outcome"] == "PERMIT"
    assert _get(api, "/api/v1/pending")["pending"] == []


def test_dual_authorisation_needs_distinct_humans(server):
    api, facade, broker, audit = server
    pid = broker.submit(Decision(outcome=Effect.DEFER, runtime_pit=4), _inv(), now=0)
    facade.update(1, {}, [])
    first = _post(api, f"/api/v1/pending/{pid}/decision", {"human_id": "operator", "verdict": "approve"})
    assert first["status"] == "still-pending"
    again = _post(api, f"/api/v1/pending/{pid}/decision", {"human_id": "operator", "verdict": "approve"})
    assert again["status"] == "still-pending"
    second = _post(api, f"/api/v1/pending/{pid}/decision", {"human_id": "supervisor", "verdict": "approve"})
    assert second["status"] == "resolved"
    assert second["outcome"] == "PERMIT"


def test_error_codes(server):
    api, facade, broker, audit = server
    with pytest.raises(urllib.error.HTTPError) as err:
        _post(api, "/api/v1/pending/pend-9999/decision", {"human_id": "operator", "verdict": "approve"})
    assert err.value.code == 404

    pid = broker.submit(Decision(outcome=Effect.DEFER, runtime_pit=3), _inv(), now=0)
    facade.update(1, {}, [])
    with pytest.raises(urllib.error.HTTPError) as err:
        _post(api, f"/api/v1/pending/{pid}/decision", {"human_id": "ghost", "verdict": "approve"})
    assert err.value.code == 403

    _post(api, f"/api/v1/pending/{pid}/decision", {"human_id": "operator", "verdict": "approve"})
    with pytest.raises(urllib.error.HTTPError) as err:
        _post(api, f"/api/v1/pending/{pid}/decision", {"human_id": "supervisor", "verdict": "approve"})
    assert err.value.code == 409


def test_expired_pending_returns_410(server):
    api, facade, broker, audit = server
    pid = broker.submit(Decision(outcome=Effect.DEFER, runtime_pit=3), _inv(), now=0)
    facade.update(100, {}, [])  # past the deadline of 50
    with pytest.raises(urllib.error.HTTPError) as err:
        _post(api, f"/api/v1/pending/{pid}/decision", {"human_id": "operator", "verdict": "approve"})
    assert err.value.code == 410


def test_audit_since_filter(server):
    api, facade, broker, audit = server
    audit.append("decision", tick=1, invocation_id="a")
    audit.append("decision", tick=9, invocation_id="b")
    records = _get(api, "/api/v1/audit?since=5")["records"]
    assert [r["invocation_id"] for r in records] == ["b"]


def test_unknown_endpoint_404(server):
    api, facade, broker, audit = server
    with pytest.raises(urllib.error.HTTPError) as err:
        _get(api, "/api/v1/nothing")
    assert err.value.code == 404


def test_cors_headers_present(server):
    api, facade, broker, audit = server
    with urllib.request.urlopen(f"http://127.0.0.1:{api.port}/api/v1/status") as response:
        assert response.headers["Access-Control-Allow-Origin"] == "*"


def test_concurrent_reads_during_writes_stay_consistent(server):
    import threading

    api, facade, broker, audit = server
    stop = threading.Event()
    errors = []

    def writer():
        tick = 0
        while not stop.is_set():
            tick += 1
            audit.append("exec", tick=tick, invocation_id=f"inv-{tick}", tool="move_arm")
            facade.update(tick, {"robotic": 0.5 + (tick % 10) / 100}, [])

    def reader():
        try:
            while not stop.is_set():
                records = _get(api, "/api/v1/audit?since=0")["records"]
                for record in records:
                    assert record["kind"] == "exec"
                snap = _get(api, "/api/v1/trust")
                assert 0.0 <= snap["trust"].get("robotic", 0.5) <= 1.0
        except Exception as exc:  # surfaced after join
            errors.append(exc)

    w = threading.Thread(target=writer)
    readers = [threading.Thread(target=reader) for _ in range(3)]
    w.start()
    for r in readers:
        r.start()
    import time

    time.sleep(0.5)
    stop.set()
    w.join()
    for r in readers:
        r.join()
    assert errors == []
