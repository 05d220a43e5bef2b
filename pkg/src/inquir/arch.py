"""Target architectures and cost models.

An architecture is a set of processors (each with a data-qubit capacity) and
undirected links (each with a per-side communication-qubit capacity: a link
with ``comm_qubits = 2`` gives *each* endpoint 2 comm qubits for that link).

Presets
-------
``linear(m, q, e)``   m processors in a chain.
``cube(q, e)``        2x2x2 cube: 8 processors, ids are 3-bit coordinates,
                      links between ids differing in one bit (degree 3).
``torus3x3(q, e)``    3x3 torus: 9 processors, wrap-around grid (degree 4).

The CLI accepts inline specs like ``linear:8x2,2`` (8 processors, 2 data
qubits each, 2 comm qubits per link side), ``cube:2,3``, ``torus3x3:2,4``,
or a path to a JSON file with explicit ``processors`` / ``links`` arrays.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field

from .errors import DisconnectedTopology, SchemaError

__all__ = [
    "Processor", "Link", "Architecture", "CostModel",
    "linear", "cube", "torus3x3", "parse_arch_spec", "load_arch",
    "DEFAULT_COSTS", "load_cost_model",
]


@dataclass(frozen=True, slots=True)
class Processor:
    id: int
    data_qubits: int

    def __post_init__(self):
        if self.id < 0 or self.data_qubits < 0:
            raise ValueError(f"bad processor {self.id}: negative field")


@dataclass(frozen=True, slots=True)
class Link:
    a: int
    b: int
    comm_qubits: int  # per side

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"link {self.a}-{self.b} is a self-loop")
        if self.comm_qubits < 1:
            raise ValueError(f"link {self.a}-{self.b} has no comm qubits")

    @property
    def ends(self) -> frozenset[int]:
        return frozenset((self.a, self.b))


@dataclass(frozen=True)
class Architecture:
    processors: tuple[Processor, ...]
    links: tuple[Link, ...]
    name: str = "custom"

    def __post_init__(self):
        ids = [p.id for p in self.processors]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate processor ids")
        idset = set(ids)
        seen = set()
        for ln in self.links:
            if ln.a not in idset or ln.b not in idset:
                raise ValueError(f"link {ln.a}-{ln.b} references unknown processor")
            if ln.ends in seen:
                raise ValueError(f"duplicate link {ln.a}-{ln.b}")
            seen.add(ln.ends)

    # -- queries ------------------------------------------------------------

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(p.id for p in self.processors)

    def processor(self, pid: int) -> Processor:
        for p in self.processors:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def data_capacity(self, pid: int) -> int:
        return self.processor(pid).data_qubits

    def link(self, a: int, b: int) -> Link | None:
        key = frozenset((a, b))
        for ln in self.links:
            if ln.ends == key:
                return ln
        return None

    def neighbors(self, pid: int) -> tuple[int, ...]:
        out = []
        for ln in self.links:
            if ln.a == pid:
                out.append(ln.b)
            elif ln.b == pid:
                out.append(ln.a)
        return tuple(sorted(out))

    def shortest_path(self, src: int, dst: int) -> list[int]:
        """BFS shortest path; ties broken toward lower processor ids.

        Raises :class:`DisconnectedTopology` when no path exists.
        """
        if src == dst:
            return [src]
        prev: dict[int, int] = {src: src}
        frontier = deque([src])
        while frontier:
            cur = frontier.popleft()
            for nxt in self.neighbors(cur):  # sorted, so lowest id wins ties
                if nxt not in prev:
                    prev[nxt] = cur
                    if nxt == dst:
                        path = [dst]
                        while path[-1] != src:
                            path.append(prev[path[-1]])
                        return path[::-1]
                    frontier.append(nxt)
        raise DisconnectedTopology(f"no path between processors {src} and {dst}")

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "processors": [{"id": p.id, "data_qubits": p.data_qubits}
                           for p in self.processors],
            "links": [{"a": ln.a, "b": ln.b, "comm_qubits": ln.comm_qubits}
                      for ln in self.links],
        }

    @classmethod
    def from_json(cls, obj: dict, name: str = "custom") -> "Architecture":
        try:
            procs = tuple(Processor(int(p["id"]), int(p["data_qubits"]))
                          for p in obj["processors"])
            links = tuple(Link(int(l["a"]), int(l["b"]), int(l["comm_qubits"]))
                          for l in obj["links"])
            return cls(procs, links, name)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad architecture description: {exc}") from exc


# -- presets ---------------------------------------------------------------

def linear(m: int, q: int, e: int) -> Architecture:
    procs = tuple(Processor(i, q) for i in range(m))
    links = tuple(Link(i, i + 1, e) for i in range(m - 1))
    return Architecture(procs, links, name=f"linear:{m}x{q},{e}")


def cube(q: int, e: int) -> Architecture:
    procs = tuple(Processor(i, q) for i in range(8))
    links = []
    for i in range(8):
        for bit in (1, 2, 4):
            j = i ^ bit
            if i < j:
                links.append(Link(i, j, e))
    return Architecture(procs, tuple(links), name=f"cube:{q},{e}")


def torus3x3(q: int, e: int) -> Architecture:
    procs = tuple(Processor(i, q) for i in range(9))
    links = []
    seen = set()
    for r in range(3):
        for c in range(3):
            i = 3 * r + c
            for j in (3 * r + (c + 1) % 3, 3 * ((r + 1) % 3) + c):
                key = frozenset((i, j))
                if key not in seen:
                    seen.add(key)
                    links.append(Link(min(i, j), max(i, j), e))
    return Architecture(procs, tuple(links), name=f"torus3x3:{q},{e}")


_LINEAR_RE = re.compile(r"linear[:(](\d+)[x,](\d+),(\d+)\)?$")
_CUBE_RE = re.compile(r"cube[:(](\d+),(\d+)\)?$")
_TORUS_RE = re.compile(r"torus3x3[:(](\d+),(\d+)\)?$")


def parse_arch_spec(spec: str) -> Architecture:
    """Parse an inline preset spec (``linear:MxQ,E`` / ``linear(M,Q,E)`` etc.)."""
    if (m := _LINEAR_RE.match(spec)):
        return linear(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    if (m := _CUBE_RE.match(spec)):
        return cube(int(m.group(1)), int(m.group(2)))
    if (m := _TORUS_RE.match(spec)):
        return torus3x3(int(m.group(1)), int(m.group(2)))
    raise SchemaError(
        f"bad architecture spec {spec!r}; expected linear:MxQ,E / cube:Q,E / "
        f"torus3x3:Q,E or a JSON file path")


def load_arch(spec: str) -> Architecture:
    """Load an architecture from an inline spec or a JSON file path."""
    if spec.endswith(".json"):
        try:
            with open(spec) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise SchemaError(f"cannot read architecture file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaError(f"bad JSON in {spec}: {exc}") from exc
        return Architecture.from_json(obj, name=spec)
    return parse_arch_spec(spec)


# ---------------------------------------------------------------------------
# cost model
# ---------------------------------------------------------------------------

DEFAULT_COSTS = {
    "single_qubit_ns": 30,
    "two_qubit_ns": 60,
    "measure_ns": 240,
    "classical_send_ns": 30,
    "ent_gen_ns": 1000,
}

_COST_KEYS = frozenset(DEFAULT_COSTS)


@dataclass(frozen=True)
class CostModel:
    """Operation latencies in nanoseconds, with optional per-processor
    overrides (``per_processor[pid][key]``)."""

    default: dict = field(default_factory=lambda: dict(DEFAULT_COSTS))
    per_processor: dict = field(default_factory=dict)

    def __post_init__(self):
        for k in self.default:
            if k not in _COST_KEYS:
                raise ValueError(f"unknown cost key {k!r}")
        merged = dict(DEFAULT_COSTS)
        merged.update(self.default)
        object.__setattr__(self, "default", merged)
        for pid, over in self.per_processor.items():
            for k in over:
                if k not in _COST_KEYS:
                    raise ValueError(f"unknown cost key {k!r} for processor {pid}")

    def cost(self, pid: int, key: str) -> float:
        over = self.per_processor.get(pid)
        if over and key in over:
            return over[key]
        return self.default[key]

    def ent_gen(self, a: int, b: int) -> float:
        """Generation latency for a link: the slower endpoint's figure."""
        return max(self.cost(a, "ent_gen_ns"), self.cost(b, "ent_gen_ns"))

    def to_json(self) -> dict:
        return {
            "default": dict(self.default),
            "per_processor": {str(k): dict(v) for k, v in self.per_processor.items()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CostModel":
        try:
            default = dict(obj.get("default", {}))
            per = {int(k): dict(v)
                   for k, v in obj.get("per_processor", {}).items()}
            return cls(default, per)
        except (TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(f"bad cost model: {exc}") from exc


def load_cost_model(path: str | None) -> CostModel:
    if path is None:
        return CostModel()
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read cost model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"bad JSON in {path}: {exc}") from exc
    return CostModel.from_json(obj)
