"""Content-addressed artifact store and run manifests.

Artifacts are serialized to canonical JSON bytes (sorted keys, no spaces)
and addressed by their sha256; the manifest maps file names to hashes, logs
the operations performed, and carries the run seed so that replays are
byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def canonical_bytes(data) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":")).encode()


def content_hash(data) -> str:
    return hashlib.sha256(canonical_bytes(data)).hexdigest()


class Manifest:
    def __init__(self, seed: int = 0):
        self.seed = seed
        self.artifacts: dict[str, str] = {}
        self.oplog: list[str] = []

    def log(self, message: str):
        self.oplog.append(message)

    def write_artifact(self, directory: Path, name: str, data) -> str:
        raw = canonical_bytes(data)
        digest = hashlib.sha256(raw).hexdigest()
        (directory / name).write_bytes(raw)
        self.artifacts[name] = digest
        return digest

    def save(self, directory: Path):
        payload = {"version": 1, "seed": self.seed,
                   "artifacts": dict(sorted(self.artifacts.items())),
                   "oplog": self.oplog}
        (directory / "manifest.json").write_bytes(canonical_bytes(payload))

    @staticmethod
    def verify(directory: Path) -> list[str]:
        out = []
        path = directory / "manifest.json"
        if not path.exists():
            return ["manifest.json missing"]
        payload = json.loads(path.read_bytes())
        for name, digest in payload.get("artifacts", {}).items():
            f = directory / name
            if not f.exists():
                out.append(f"{name}: missing")
            elif hashlib.sha256(f.read_bytes()).hexdigest() != digest:
                out.append(f"{name}: hash mismatch")
        return out
