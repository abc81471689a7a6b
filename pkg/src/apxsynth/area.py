"""Structural area estimation with a small configurable cell library.

The model stands in for an external synthesis flow: it constant-folds the
netlist, then prices the live logic in 2-input AND/OR cells and inverters.
Costing rules:

* k-input AND -> (k-1) AND2 cells, k-input OR -> (k-1) OR2 cells; single-input
  gates are wires.
* a negated primary input costs one NOT, shared across every use;
  other NOT gates cost one NOT each.
* gates feeding several sinks are priced once.
* constant outputs (and logic feeding only constants) cost nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exceptions import ConfigurationError
from .netlist import Circuit

_CELL_KINDS = ("NOT", "AND2", "OR2")


@dataclass(frozen=True)
class CellLibrary:
    name: str
    areas: dict[str, float]

    def __post_init__(self):
        for kind in _CELL_KINDS:
            if kind not in self.areas:
                raise ConfigurationError(f"cell library {self.name!r} is missing {kind}")
            if self.areas[kind] <= 0:
                raise ConfigurationError(f"cell area for {kind} must be positive")

    def area(self, kind: str) -> float:
        return self.areas[kind]


def default_library() -> CellLibrary:
    return CellLibrary("unit-nand-equivalent", {"NOT": 1.0, "AND2": 2.0, "OR2": 2.0})


def parse_library(text: str, name: str = "user") -> CellLibrary:
    """Parse the `KIND AREA` line format ('#' starts a comment)."""
    areas: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in _CELL_KINDS:
            raise ConfigurationError(f"bad library line {raw!r} (line {lineno})")
        try:
            areas[parts[0]] = float(Fraction(parts[1]))
        except (ValueError, ZeroDivisionError):
            raise ConfigurationError(f"bad area value on line {lineno}: {parts[1]!r}")
    return CellLibrary(name, areas)


def load_library(path) -> CellLibrary:
    with open(path, encoding="utf-8") as handle:
        return parse_library(handle.read(), name=str(path))


@dataclass(frozen=True)
class AreaReport:
    total: float
    breakdown: dict[str, int]
    shared_products_counted_once: bool = True


def _propagate_constants(circuit: Circuit) -> dict[str, object]:
    """Resolve every signal to True/False (a known constant) or a surviving
    gate description ('NOT', src) / (kind, live_fanins) / ('wire', src)."""
    value: dict[str, object] = {name: ("input", name) for name in circuit.inputs}
    resolved: dict[str, object] = {}

    def resolve(name: str):
        # Follow wire chains so fanins always point at inputs or real gates.
        while True:
            entry = resolved.get(name)
            if entry is None:
                return name
            if isinstance(entry, bool):
                return entry
            if entry[0] == "wire":
                name = entry[1]
                continue
            return name

    for gate in circuit.gates:
        if gate.kind == "CONST0":
            resolved[gate.name] = False
            continue
        if gate.kind == "CONST1":
            resolved[gate.name] = True
            continue
        fanins = [resolve(ref) for ref in gate.fanins]
        if gate.kind == "NOT":
            src = fanins[0]
            resolved[gate.name] = (not src) if isinstance(src, bool) else ("NOT", src)
            continue
        identity = gate.kind == "AND"  # AND drops true fanins, OR drops false
        live = []
        dead = False
        for src in fanins:
            if isinstance(src, bool):
                if src == identity:
                    continue
                dead = True  # annihilating constant
                break
            if src not in live:
                live.append(src)
        if dead:
            resolved[gate.name] = not identity
        elif not live:
            resolved[gate.name] = identity  # all fanins were identity constants
        elif len(live) == 1:
            resolved[gate.name] = ("wire", live[0])
        else:
            resolved[gate.name] = (gate.kind, tuple(live))

    resolved.update(value)
    return resolved


def estimate_area(circuit: Circuit, lib: CellLibrary | None = None) -> AreaReport:
    lib = lib or default_library()
    resolved = _propagate_constants(circuit)

    def resolve(name: str):
        while True:
            entry = resolved[name]
            if isinstance(entry, bool):
                return entry
            if entry[0] == "wire":
                name = entry[1]
                continue
            return name

    counts = {"NOT": 0, "AND2": 0, "OR2": 0}
    negated_inputs: set[str] = set()
    visited: set[str] = set()
    inputs = set(circuit.inputs)

    def walk(name: str):
        if name in visited or name in inputs:
            return
        visited.add(name)
        entry = resolved[name]
        kind = entry[0]
        if kind == "input":
            return
        if kind == "NOT":
            src = entry[1]
            if isinstance(src, bool):
                return
            if src in inputs:
                negated_inputs.add(src)
            else:
                counts["NOT"] += 1
                walk(src)
            return
        fanins = entry[1]
        cell = "AND2" if kind == "AND" else "OR2"
        counts[cell] += len(fanins) - 1
        for src in fanins:
            walk(src)

    for ref in circuit.outputs:
        target = resolve(ref)
        if not isinstance(target, bool):
            walk(target)

    counts["NOT"] += len(negated_inputs)
    total = sum(counts[kind] * lib.area(kind) for kind in counts)
    return AreaReport(total, counts)
