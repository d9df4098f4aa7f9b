"""Append-only audit log.

Every policy decision emits exactly one decision record; admissions,
gate firings, drift verdicts, broker activity, and executed commands are
logged as their own record kinds. Records are serialized as canonical JSON
(sorted keys, no whitespace), one per line, so identical runs produce
byte-identical logs.
"""

from __future__ import annotations

import json
from typing import Any, Dict, Iterable, List, Optional, TextIO


def canonical_json(record: Dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class AuditLog:
    """In-memory audit trail with an optional newline-delimited file sink,
    flushed per record."""

    def __init__(self, sink: Optional[TextIO] = None):
        self.records: List[Dict[str, Any]] = []
        self._sink = sink

    def append(self, kind: str, **fields: Any) -> Dict[str, Any]:
        record = {"kind": kind, **fields}
        self.records.append(record)
        if self._sink is not None:
            self._sink.write(canonical_json(record) + "\n")
            self._sink.flush()
        return record

    def decision(
        self,
        *,
        tick: int,
        invocation_id: str,
        ep: str,
        runtime_pit: int,
        decision: str,
        fired_policies: Iterable[str],
        obligations_executed: Iterable[str],
        trust_before: float,
        trust_after: float,
        rationale: str = "",
        pending_id: Optional[str] = None,
    ) -> Dict[str, Any]:
        return self.append(
            "decision",
            tick=tick,
            invocation_id=invocation_id,
            ep=ep,
            runtime_pit=runtime_pit,
            decision=decision,
            fired_policies=list(fired_policies),
            obligations_executed=list(obligations_executed),
            trust_before=round(trust_before, 9),
            trust_after=round(trust_after, 9),
            rationale=rationale,
            pending_id=pending_id,
        )

    def of_kind(self, kind: str) -> List[Dict[str, Any]]:
        return [r for r in tuple(self.records) if r["kind"] == kind]

    def since(self, tick: int) -> List[Dict[str, Any]]:
        # tuple() snapshots the list atomically so concurrent readers (the
        # console API) never race the single writer.
        return [r for r in tuple(self.records) if r.get("tick", 0) >= tick]

    def lines(self) -> List[str]:
        return [canonical_json(r) for r in self.records]

    def to_bytes(self) -> bytes:
        return ("\n".join(self.lines()) + "\n").encode("utf-8") if self.records else b""

    def write_file(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


__all__ = ["AuditLog", "canonical_json"]
