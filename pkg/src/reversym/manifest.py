"""Run manifests: resolved config, seed, and completion state per run.

The manifest is written before the run body starts and finalized (completed
flag, end timestamp) only on success.  Run directories are named by the
manifest id, a hash of the command and its resolved configuration, so rerun
outputs land in the same place; timestamps live only inside the manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
import time

from . import __version__


def manifest_id(command: str, config: dict) -> str:
    blob = json.dumps({"command": command, "config": config}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


class RunManifest:
    def __init__(self, command: str, config: dict, seed: int, out_dir: str):
        self.command = command
        self.config = dict(config)
        self.seed = seed
        self.out_dir = out_dir
        self.id = manifest_id(command, self.config)
        self.started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        self.completed = False
        self.ended = None
        self.outputs: list[str] = []

    @property
    def path(self) -> str:
        return os.path.join(self.out_dir, "manifest.json")

    def _payload(self) -> dict:
        return {
            "id": self.id,
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": __version__,
            "started": self.started,
            "ended": self.ended,
            "completed": self.completed,
            "outputs": self.outputs,
        }

    def write(self) -> None:
        os.makedirs(self.out_dir, exist_ok=True)
        with open(self.path, "w") as fh:
            json.dump(self._payload(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def finish(self, outputs: list[str]) -> None:
        self.outputs = list(outputs)
        self.completed = True
        self.ended = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        self.write()
