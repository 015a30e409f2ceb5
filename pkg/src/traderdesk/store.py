"""Append-log JSON store for scenarios and solve records.

One line per write (put or delete); the full state is replayed on open and
rewritten as a snapshot once the log grows past ``compact_every`` operations.
Writes are serialized through a lock, so concurrent callers cannot interleave
partial lines; the last writer wins on id collisions.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from pathlib import Path

from .errors import NotFound
from .schema import validate_scenario


def _now_iso() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()) + f".{int(time.time_ns() % 1_000_000_000):09d}Z"


class ScenarioStore:
    def __init__(self, path: str | os.PathLike, compact_every: int = 500):
        self.path = Path(path)
        self.compact_every = compact_every
        self._lock = threading.Lock()
        self._scenarios: dict[str, dict] = {}
        self._solves: dict[str, dict] = {}
        self._ops_since_compact = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._replay()

    # -- log plumbing -------------------------------------------------------

    def _replay(self):
        if not self.path.exists():
            return
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    op = json.loads(line)
                except json.JSONDecodeError:
                    continue  # torn tail write; ignore
                self._apply(op)

    def _apply(self, op: dict):
        kind = op.get("kind")
        target = self._scenarios if kind == "scenario" else self._solves
        if op.get("op") == "put":
            target[op["payload"]["id"]] = op["payload"]
        elif op.get("op") == "delete":
            target.pop(op.get("id"), None)

    def _append(self, op: dict):
        self._apply(op)
        with open(self.path, "a") as fh:
            fh.write(json.dumps(op, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._ops_since_compact += 1
        if self._ops_since_compact >= self.compact_every:
            self._compact_locked()

    def _compact_locked(self):
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            for payload in self._scenarios.values():
                fh.write(json.dumps({"op": "put", "kind": "scenario",
                                     "payload": payload}, sort_keys=True) + "\n")
            for payload in self._solves.values():
                fh.write(json.dumps({"op": "put", "kind": "solve",
                                     "payload": payload}, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)
        self._ops_since_compact = 0

    def compact(self):
        with self._lock:
            self._compact_locked()

    # -- scenarios ----------------------------------------------------------

    def save_scenario(self, payload: dict) -> dict:
        normalized = validate_scenario(payload)
        with self._lock:
            sid = normalized.get("id") or uuid.uuid4().hex
            normalized["id"] = sid
            prev = self._scenarios.get(sid)
            now = _now_iso()
            normalized["created_at"] = prev["created_at"] if prev else now
            normalized["updated_at"] = max(now, prev["updated_at"]) if prev else now
            if prev and normalized["updated_at"] == prev["updated_at"]:
                normalized["updated_at"] = prev["updated_at"] + "+"
            self._append({"op": "put", "kind": "scenario", "payload": normalized})
            return dict(normalized)

    def load_scenario(self, scenario_id: str) -> dict:
        with self._lock:
            if scenario_id not in self._scenarios:
                raise NotFound(f"scenario {scenario_id!r} not found")
            return dict(self._scenarios[scenario_id])

    def list_scenarios(self) -> list[dict]:
        with self._lock:
            return sorted(self._scenarios.values(), key=lambda s: s["id"])

    def delete_scenario(self, scenario_id: str):
        with self._lock:
            if scenario_id not in self._scenarios:
                raise NotFound(f"scenario {scenario_id!r} not found")
            self._append({"op": "delete", "kind": "scenario", "id": scenario_id})

    # -- solve records ------------------------------------------------------

    def save_solve(self, record: dict) -> dict:
        with self._lock:
            rid = record.get("id") or uuid.uuid4().hex
            record = dict(record)
            record["id"] = rid
            record.setdefault("created_at", _now_iso())
            self._append({"op": "put", "kind": "solve", "payload": record})
            return dict(record)

    def load_solve(self, solve_id: str) -> dict:
        with self._lock:
            if solve_id not in self._solves:
                raise NotFound(f"solve {solve_id!r} not found")
            return dict(self._solves[solve_id])

    def list_solves(self, scenario_id: str | None = None) -> list[dict]:
        with self._lock:
            out = [dict(r) for r in self._solves.values()
                   if scenario_id is None or r.get("scenario_id") == scenario_id]
            return sorted(out, key=lambda r: (r.get("created_at", ""), r["id"]))
