"""HTTP interface to a running simulation for the approval console.

JSON over HTTP under /api/v1: list pendings, post a human decision, read
trust and contraction status, and tail the audit log. Reads serve
consistent snapshots; the one write endpoint funnels into the broker's
serialized resolve path. Simulation-only: there is deliberately no
authentication, and responses carry permissive CORS headers so the console
can be served from anywhere.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Dict, Optional
from urllib.parse import parse_qs, urlparse

from .broker import (
    AlreadyResolvedError,
    DeferBroker,
    ExpiredError,
    NotAHumanError,
    NotDualAuthorizerError,
    UnknownPendingError,
)


class BrokerFacade:
    """What the API needs from a running simulation, behind one object so
    `serve` can swap state snapshots in atomically."""

    def __init__(self, broker: DeferBroker, descriptor, audit, scenario_name: str = ""):
        self.broker = broker
        self.descriptor = descriptor
        self.audit = audit
        self.scenario_name = scenario_name
        self.current_tick = 0
        self.contracted_agents: list[str] = []
        self.trust: Dict[str, float] = {}
        self._lock = threading.Lock()

    def update(self, tick: int, trust: Dict[str, float], contracted: list[str]) -> None:
        with self._lock:
            self.current_tick = tick
            self.trust = dict(trust)
            self.contracted_agents = list(contracted)

    def status(self) -> Dict[str, Any]:
        with self._lock:
            return {
                "scenario": self.scenario_name,
                "tick": self.current_tick,
                "humans": [
                    {"id": h.id, "can_dual_authorize": h.can_dual_authorize}
                    for h in self.descriptor.humans
                ],
                "contracted_agents": list(self.contracted_agents),
            }

    def trust_snapshot(self) -> Dict[str, Any]:
        with self._lock:
            return {"tick": self.current_tick, "trust": dict(self.trust)}


class _Handler(BaseHTTPRequestHandler):
    facade: BrokerFacade  # injected by make_server

    def log_message(self, fmt: str, *args: Any) -> None:  # quiet server
        pass

    def _send(self, code: int, payload: Any) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self) -> None:  # CORS preflight: 204 must carry no body
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self) -> None:
        parsed = urlparse(self.path)
        path = parsed.path.rstrip("/")
        facade = self.facade
        if path == "/api/v1/pending":
            self._send(200, {"pending": [p.summary() for p in facade.broker.open_pendings()]})
        elif path == "/api/v1/trust":
            self._send(200, facade.trust_snapshot())
        elif path == "/api/v1/status":
            self._send(200, facade.status())
        elif path == "/api/v1/audit":
            query = parse_qs(parsed.query)
            try:
                since = int(query.get("since", ["0"])[0])
            except ValueError:
                self._send(400, {"error": "since must be an integer tick"})
                return
            self._send(200, {"records": facade.audit.since(since)})
        else:
            self._send(404, {"error": f"no such endpoint {path}"})

    def do_POST(self) -> None:
        parsed = urlparse(self.path)
        parts = [p for p in parsed.path.split("/") if p]
        # /api/v1/pending/{id}/decision
        if len(parts) == 5 and parts[:2] == ["api", "v1"] and parts[2] == "pending" and parts[4] == "decision":
            pending_id = parts[3]
            length = int(self.headers.get("Content-Length", "0"))
            try:
                body = json.loads(self.rfile.read(length) or b"{}")
            except json.JSONDecodeError:
                self._send(400, {"error": "body must be JSON"})
                return
            human_id = body.get("human_id", "")
            verdict = body.get("verdict", "")
            facade = self.facade
            now = facade.current_tick
            try:
                result = facade.broker.resolve(pending_id, human_id, verdict, now)
            except UnknownPendingError:
                self._send(404, {"error": f"unknown pending {pending_id}"})
            except NotAHumanError as exc:
                self._send(403, {"error": str(exc)})
            except NotDualAuthorizerError as exc:
                self._send(403, {"error": str(exc)})
            except AlreadyResolvedError:
                self._send(409, {"error": f"pending {pending_id} already resolved"})
            except ExpiredError:
                self._send(410, {"error": f"pending {pending_id} expired"})
            except ValueError as exc:
                self._send(400, {"error": str(exc)})
            else:
                self._send(
                    200,
                    {
                        "status": result.status,
                        "outcome": result.outcome.value if result.outcome else None,
                        "pending": result.pending.summary() if result.pending else None,
                    },
                )
        else:
            self._send(404, {"error": "no such endpoint"})


def make_server(facade: BrokerFacade, host: str = "127.0.0.1", port: int = 8787) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"facade": facade})
    return ThreadingHTTPServer((host, port), handler)


class ApiServer:
    """Background-thread wrapper around the HTTP server."""

    def __init__(self, facade: BrokerFacade, host: str = "127.0.0.1", port: int = 8787):
        self.server = make_server(facade, host, port)
        self.thread: Optional[threading.Thread] = None

    @property
    def port(self) -> int:
        return self.server.server_address[1]

    def start(self) -> None:
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    def stop(self) -> None:
        self.server.shutdown()
        self.server.server_close()
        if self.thread is not None:
            self.thread.join(timeout=5)


__all__ = ["BrokerFacade", "ApiServer", "make_server"]
