"""Shipped fixtures: graph specs under ``graphs/`` and (G, P, H) triples under ``triples/``."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from ..cayley import ConedOffSpec
from ..eqgraph import materialize_ball
from ..specfiles import (SpecError, graph_from_json, group_from_json, load_json,
                         peripherals_from_json, subgroup_from_json)

ROOT = Path(__file__).parent


def graph_names() -> list[str]:
    return sorted(p.stem for p in (ROOT / "graphs").glob("*.json"))


def triple_names() -> list[str]:
    return sorted(p.stem for p in (ROOT / "triples").glob("*.json"))


def graph_path(name: str) -> Path:
    path = ROOT / "graphs" / f"{name}.json"
    if not path.exists():
        raise SpecError(f"no graph fixture {name!r}; have {graph_names()}")
    return path


def triple_path(name: str) -> Path:
    path = ROOT / "triples" / f"{name}.json"
    if not path.exists():
        raise SpecError(f"no triple fixture {name!r}; have {triple_names()}")
    return path


def load_graph(name: str):
    return graph_from_json(load_json(graph_path(name)))


def _plain(spec):
    return spec.spec if isinstance(spec, ConedOffSpec) else spec


@dataclass
class Triple:
    """A (G, P, H) fixture together with a Q-0 witness path."""

    data: dict

    @property
    def name(self) -> str:
        return self.data["name"]

    @property
    def expect(self) -> str:
        return self.data.get("expect", "positive")

    @cached_property
    def group(self):
        return group_from_json(self.data["group"])

    @cached_property
    def S(self) -> list:
        return [self.group.parse(w) for w in self.data.get("S", [])]

    @cached_property
    def peripherals(self):
        return peripherals_from_json(self.group, self.data.get("peripherals"))

    @cached_property
    def H(self):
        return subgroup_from_json(self.group, self.data["subgroup"], name="H")

    @cached_property
    def ambient(self):
        """The graph of the witness (a ``ConedOffSpec`` for coned ambients)."""
        return graph_from_json(self.data["ambient"], self.group)

    def witness(self, spec=None, key: str = "witness"):
        from ..quasiconvex import path_witness

        block = self.data[key]
        K = _plain(spec if spec is not None else self.ambient)
        G = self.group
        path = [K.parse_vertex(x) for x in block["path"]]
        C = [K.parse_vertex(x) for x in block.get("C", [])]
        w = materialize_ball(K, path[0], len(path), valence_budget=16)
        return path_witness(K, self.H, w, path, [G.parse(x) for x in block["T"]], C)

    def transfer_inputs(self):
        """``(source witness, target spec)`` for the transfer pipeline."""
        block = self.data.get("transfer")
        if block is None:
            raise SpecError(f"fixture {self.name} has no transfer data")
        source = _plain(graph_from_json(block["source"], self.group))
        target = _plain(graph_from_json(block["target"], self.group))
        self.data.setdefault("_src", {"path": block["path"], "T": self.data["witness"]["T"]})
        return self.witness(source, key="_src"), target


def load_triple(name: str) -> Triple:
    return Triple(load_json(triple_path(name)))
