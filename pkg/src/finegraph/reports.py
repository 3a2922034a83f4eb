"""Self-describing JSON reports of measured constants."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

MONOTONE = {"delta", "sigma", "distortion", "M", "L", "eps"}


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def digest(obj) -> str:
    """sha256 of canonical JSON, or of a file's bytes for a path."""
    if isinstance(obj, Path):
        data = obj.read_bytes()
    else:
        data = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str).encode()
    return "sha256:" + hashlib.sha256(data).hexdigest()


class MonotoneError(ValueError):
    pass


@dataclass
class ConstantReport:
    command: str
    inputs: dict = field(default_factory=dict)  # name -> digest
    seed: int = 0
    rows: list = field(default_factory=list)
    monotone: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    verdict: str | None = None
    extra: dict = field(default_factory=dict)

    def add_input(self, name: str, obj) -> None:
        self.inputs[name] = digest(obj)

    def append(self, radius: int, complete: bool, **constants) -> None:
        """Add one radius row; monotone constants must not decrease."""
        for key, val in constants.items():
            if key not in MONOTONE or val is None:
                continue
            if key not in self.monotone:
                self.monotone.append(key)
            prev = [r[key] for r in self.rows if r.get(key) is not None and r["radius"] <= radius]
            if prev and val < prev[-1]:
                raise MonotoneError(f"{key} decreased from {prev[-1]} to {val} at radius {radius}")
        self.rows.append({"radius": radius, "complete": complete, **constants})

    def series(self, key: str) -> list:
        return [r[key] for r in self.rows if key in r]

    @property
    def complete(self) -> bool:
        return all(r["complete"] for r in self.rows)

    def to_json(self) -> dict:
        out = {
            "command": self.command,
            "version": tool_version(),
            "inputs": dict(sorted(self.inputs.items())),
            "seed": self.seed,
            "complete": self.complete,
            "monotone": sorted(self.monotone),
            "rows": self.rows,
        }
        if self.verdict is not None:
            out["verdict"] = self.verdict
        if self.witnesses:
            out["witnesses"] = self.witnesses
        out.update(self.extra)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, default=str) + "\n"
