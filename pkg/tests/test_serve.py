"""End-to-end check of the serve command: a real subprocess, real HTTP,
a human decision feeding back into the running simulation."""

import json
import re
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import pytest

REPO = Path(__file__).parent.parent
SCENARIO = REPO / "scenarios" / "console_demo.yaml"


def _get(base, path):
    with urllib.request.urlopen(f"{base}{path}", timeout=5) as response:
        return json.loads(response.read())


def _post(base, path, payload):
    request = urllib.request.Request(
        f"{base}{path}",
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    with urllib.request.urlopen(request, timeout=5) as response:
        return json.loads(response.read())


@pytest.fixture
def served():
    process = subprocess.Popen(
        [sys.executable, "-u", "-m", "ztpm.cli", "serve", str(SCENARIO),
         "--port", "0", "--tick-rate", "10", "--linger"],
        cwd=str(REPO),
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
    )
    base = None
    deadline = time.time() + 15
    while time.time() < deadline:
        line = process.stdout.readline()
        match = re.search(r"approval API at (http://[\d.]+:\d+)/api/v1", line or "")
        if match:
            base = match.group(1)
            break
        if process.poll() is not None:
            break
    if base is None:
        process.kill()
        pytest.fail(f"serve never announced its port: {process.stderr.read()}")
    yield base
    process.terminate()
    process.wait(timeout=10)


def _wait_for_pending(base, predicate, timeout=15.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        for pending in _get(base, "/api/v1/pending")["pending"]:
            if predicate(pending):
                return pending
        time.sleep(0.1)
    pytest.fail("no matching pending appeared")


def test_serve_approval_releases_execution(served):
    base = served
    status = _get(base, "/api/v1/status")
    assert {h["id"] for h in status["humans"]} == {"operator", "supervisor"}

    pending = _wait_for_pending(base, lambda p: p["runtime_pit"] == 3)
    seen_at = time.time()

    result = _post(
        base,
        f"/api/v1/pending/{pending['pending_id']}/decision",
        {"human_id": "operator", "verdict": "approve"},
    )
    assert result["status"] == "resolved"
    assert result["outcome"] == "PERMIT"

    # the release reaches the audit log within a second
    deadline = time.time() + 1.0
    released = None
    while time.time() < deadline and released is None:
        for record in _get(base, "/api/v1/audit?since=0")["records"]:
            if (
                record["kind"] == "resolution"
                and record["pending_id"] == pending["pending_id"]
                and record["outcome"] == "PERMIT"
            ):
                released = record
                break
        time.sleep(0.05)
    assert released is not None
    assert time.time() - seen_at < 5.0

    # and the invocation actually executes shortly after
    deadline = time.time() + 2.0
    executed = False
    while time.time() < deadline and not executed:
        executed = any(
            r["kind"] == "exec" and r["invocation_id"] == pending["invocation_id"]
            for r in _get(base, "/api/v1/audit?since=0")["records"]
        )
        time.sleep(0.05)
    assert executed


def test_serve_rejects_duplicate_dual_approver(served):
    base = served
    grant = _wait_for_pending(base, lambda p: p["runtime_pit"] >= 4, timeout=20.0)
    assert grant["required_approvals"] == 2
    first = _post(
        base,
        f"/api/v1/pending/{grant['pending_id']}/decision",
        {"human_id": "operator", "verdict": "approve"},
    )
    assert first["status"] == "still-pending"
    repeat = _post(
        base,
        f"/api/v1/pending/{grant['pending_id']}/decision",
        {"human_id": "operator", "verdict": "approve"},
    )
    assert repeat["status"] == "still-pending"
    assert repeat["pending"]["obtained_approvals"] == 1
    second = _post(
        base,
        f"/api/v1/pending/{grant['pending_id']}/decision",
        {"human_id": "supervisor", "verdict": "approve"},
    )
    assert second["status"] == "resolved"
    assert second["outcome"] == "PERMIT"
