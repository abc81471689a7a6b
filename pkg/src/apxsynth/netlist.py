"""Combinational gate-level netlists: representation, evaluation, generators, text I/O.

Circuits use a single bit-ordering convention throughout the package:
index 0 of the input list and of the output list is the least significant bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .exceptions import (
    ArityError,
    ConfigurationError,
    CyclicDefinitionError,
    DuplicateIdentifierError,
    NetlistSyntaxError,
    ResourceGuardError,
    UndefinedSignalError,
)

GATE_KINDS = ("AND", "OR", "NOT", "CONST0", "CONST1")

# Exhaustive operations (truth tables, worst-case error) refuse larger circuits.
MAX_EXHAUSTIVE_INPUTS = 16

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Gate:
    """One gate: `name = kind(fanins...)`. Fanins name primary inputs or earlier gates."""

    name: str
    kind: str
    fanins: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ConfigurationError(f"unknown gate kind {self.kind!r}")
        n = len(self.fanins)
        if self.kind == "NOT" and n != 1:
            raise ArityError(f"NOT gate {self.name!r} needs exactly 1 fanin, got {n}")
        if self.kind in ("AND", "OR") and n < 1:
            raise ArityError(f"{self.kind} gate {self.name!r} needs at least 1 fanin")
        if self.kind in ("CONST0", "CONST1") and n != 0:
            raise ArityError(f"{self.kind} gate {self.name!r} takes no fanins")


@dataclass(frozen=True)
class Circuit:
    """An acyclic netlist with ordered primary inputs and outputs (LSB first).

    Gates must be topologically ordered; every name (inputs and gates) is unique,
    and outputs refer to inputs or gates.
    """

    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        seen = set()
        for ident in self.inputs:
            if ident in seen:
                raise DuplicateIdentifierError(f"duplicate input {ident!r}")
            seen.add(ident)
        for gate in self.gates:
            if gate.name in seen:
                raise DuplicateIdentifierError(f"duplicate identifier {gate.name!r}")
            for ref in gate.fanins:
                if ref not in seen:
                    raise UndefinedSignalError(
                        f"gate {gate.name!r} reads {ref!r} before it is defined"
                    )
            seen.add(gate.name)
        for ref in self.outputs:
            if ref not in seen:
                raise UndefinedSignalError(f"output refers to undefined signal {ref!r}")

    @property
    def n(self) -> int:
        return len(self.inputs)

    @property
    def m(self) -> int:
        return len(self.outputs)

    def gate_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(GATE_KINDS, 0)
        for gate in self.gates:
            counts[gate.kind] += 1
        return counts


def evaluate(circuit: Circuit, bits) -> tuple[int, ...]:
    """Evaluate the circuit on one input vector (sequence of 0/1, LSB first)."""
    bits = tuple(bits)
    if len(bits) != circuit.n:
        raise ArityError(
            f"circuit {circuit.name!r} has {circuit.n} inputs, got vector of width {len(bits)}"
        )
    values = dict(zip(circuit.inputs, (b & 1 for b in bits)))
    for gate in circuit.gates:
        if gate.kind == "AND":
            v = 1
            for ref in gate.fanins:
                v &= values[ref]
        elif gate.kind == "OR":
            v = 0
            for ref in gate.fanins:
                v |= values[ref]
        elif gate.kind == "NOT":
            v = 1 - values[gate.fanins[0]]
        elif gate.kind == "CONST0":
            v = 0
        else:
            v = 1
        values[gate.name] = v
    return tuple(values[ref] for ref in circuit.outputs)


def signal_masks(circuit: Circuit) -> dict[str, int]:
    """Bit-parallel exhaustive simulation.

    Returns, per signal, an integer whose bit k is the signal's value when the
    primary inputs encode k (input j carries bit j of k). One pass over the
    gates simulates all 2^n input vectors at once.
    """
    n = circuit.n
    if n > MAX_EXHAUSTIVE_INPUTS:
        raise ResourceGuardError(
            f"exhaustive simulation capped at {MAX_EXHAUSTIVE_INPUTS} inputs, circuit has {n}"
        )
    rows = 1 << n
    full = (1 << rows) - 1
    masks: dict[str, int] = {}
    for j, ident in enumerate(circuit.inputs):
        # Periodic pattern: 2^j zeros, then 2^j ones.
        block = ((1 << (1 << j)) - 1) << (1 << j)
        period = 1 << (j + 1)
        mask = 0
        for start in range(0, rows, period):
            mask |= block << start
        masks[ident] = mask & full
    for gate in circuit.gates:
        if gate.kind == "AND":
            v = full
            for ref in gate.fanins:
                v &= masks[ref]
        elif gate.kind == "OR":
            v = 0
            for ref in gate.fanins:
                v |= masks[ref]
        elif gate.kind == "NOT":
            v = masks[gate.fanins[0]] ^ full
        elif gate.kind == "CONST0":
            v = 0
        else:
            v = full
        masks[gate.name] = v
    return masks


def output_masks(circuit: Circuit) -> list[int]:
    """Exhaustive simulation restricted to the outputs (see signal_masks)."""
    masks = signal_masks(circuit)
    return [masks[ref] for ref in circuit.outputs]


def truth_table(circuit: Circuit) -> list[tuple[int, ...]]:
    """All 2^n output vectors, row k for the input vector encoding k."""
    omasks = output_masks(circuit)
    rows = 1 << circuit.n
    return [tuple((mask >> k) & 1 for mask in omasks) for k in range(rows)]


def int_to_bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> j) & 1 for j in range(width))


def bits_to_int(bits) -> int:
    out = 0
    for j, b in enumerate(bits):
        out |= (b & 1) << j
    return out


# ---------------------------------------------------------------------------
# Benchmark generators
# ---------------------------------------------------------------------------


class _Builder:
    """Accumulates gates with unique generated names."""

    def __init__(self, inputs):
        self.gates: list[Gate] = []
        self._used = set(inputs)
        self._counter = 0

    def add(self, kind: str, *fanins: str, hint: str = "g") -> str:
        name = f"{hint}{self._counter}"
        while name in self._used:
            self._counter += 1
            name = f"{hint}{self._counter}"
        self._counter += 1
        self._used.add(name)
        self.gates.append(Gate(name, kind, tuple(fanins)))
        return name

    def xor(self, x: str, y: str) -> str:
        nx = self.add("NOT", x)
        ny = self.add("NOT", y)
        p = self.add("AND", x, ny)
        q = self.add("AND", nx, y)
        return self.add("OR", p, q)


def ripple_adder(bitwidth: int) -> Circuit:
    """Unsigned ripple-carry adder: inputs a then b (LSB first), outputs sum bits then carry."""
    if not 1 <= bitwidth <= 8:
        raise ConfigurationError(f"adder bitwidth must be in 1..8, got {bitwidth}")
    a = [f"a{i}" for i in range(bitwidth)]
    b = [f"b{i}" for i in range(bitwidth)]
    build = _Builder(a + b)
    outputs = []
    carry = None
    for i in range(bitwidth):
        axb = build.xor(a[i], b[i])
        ab = build.add("AND", a[i], b[i])
        if carry is None:
            outputs.append(axb)
            carry = ab
        else:
            outputs.append(build.xor(axb, carry))
            keep = build.add("AND", axb, carry)
            carry = build.add("OR", ab, keep)
    outputs.append(carry)
    name = f"adder_i{2 * bitwidth}_o{bitwidth + 1}"
    return Circuit(name, tuple(a + b), tuple(outputs), tuple(build.gates))


def array_multiplier(bitwidth: int) -> Circuit:
    """Unsigned array multiplier built by column compression of partial products."""
    if not 1 <= bitwidth <= 4:
        raise ConfigurationError(f"multiplier bitwidth must be in 1..4, got {bitwidth}")
    a = [f"a{i}" for i in range(bitwidth)]
    b = [f"b{i}" for i in range(bitwidth)]
    build = _Builder(a + b)
    width = 2 * bitwidth
    columns: list[list[str]] = [[] for _ in range(width + 1)]
    for i in range(bitwidth):
        for j in range(bitwidth):
            columns[i + j].append(build.add("AND", a[i], b[j], hint="pp"))
    outputs = []
    for k in range(width):
        col = columns[k]
        while len(col) > 1:
            if len(col) == 2:
                x, y = col.pop(0), col.pop(0)
                col.insert(0, build.xor(x, y))
                columns[k + 1].append(build.add("AND", x, y))
            else:
                x, y, z = col.pop(0), col.pop(0), col.pop(0)
                xy = build.xor(x, y)
                col.insert(0, build.xor(xy, z))
                g1 = build.add("AND", x, y)
                g2 = build.add("AND", xy, z)
                columns[k + 1].append(build.add("OR", g1, g2))
        if col:
            outputs.append(col[0])
        else:
            outputs.append(build.add("CONST0", hint="z"))
    name = f"mul_i{2 * bitwidth}_o{width}"
    return Circuit(name, tuple(a + b), tuple(outputs), tuple(build.gates))


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_GATE_LINE_RE = re.compile(
    r"\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*(?P<kind>[A-Z0-9]+)\s*\(\s*(?P<args>[^)]*)\)\s*\Z"
)


def parse_netlist(text: str) -> Circuit:
    """Parse the package's netlist format (see emit_netlist) into a Circuit.

    Gate lines may appear in any order; the parser topologically sorts them and
    reports cycles, undefined signals and duplicate identifiers with line numbers.
    """
    model = None
    inputs: list[str] = []
    outputs: list[str] = []
    raw_gates: list[tuple[str, str, tuple[str, ...], int]] = []
    seen_sections = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("."):
            parts = line.split()
            directive = parts[0]
            if directive == ".model":
                if len(parts) != 2:
                    raise NetlistSyntaxError(".model expects exactly one name", lineno)
                _check_ident(parts[1], lineno)
                if ".model" in seen_sections:
                    raise NetlistSyntaxError("repeated .model", lineno)
                model = parts[1]
            elif directive == ".inputs":
                if ".inputs" in seen_sections:
                    raise NetlistSyntaxError("repeated .inputs", lineno)
                for ident in parts[1:]:
                    _check_ident(ident, lineno)
                inputs = parts[1:]
            elif directive == ".outputs":
                if ".outputs" in seen_sections:
                    raise NetlistSyntaxError("repeated .outputs", lineno)
                for ident in parts[1:]:
                    _check_ident(ident, lineno)
                outputs = parts[1:]
            elif directive == ".end":
                seen_sections.add(".end")
                break
            else:
                raise NetlistSyntaxError(f"unknown directive {directive!r}", lineno)
            seen_sections.add(directive)
            continue
        match = _GATE_LINE_RE.match(line)
        if match is None:
            col = len(raw) - len(raw.lstrip()) + 1
            raise NetlistSyntaxError(f"cannot parse gate line {line!r}", lineno, col)
        kind = match.group("kind")
        if kind not in GATE_KINDS:
            raise NetlistSyntaxError(f"unknown gate kind {kind!r}", lineno, raw.find(kind) + 1)
        args = match.group("args").strip()
        fanins = tuple(s.strip() for s in args.split(",")) if args else ()
        for ident in fanins:
            _check_ident(ident, lineno)
        raw_gates.append((match.group("name"), kind, fanins, lineno))

    if model is None:
        raise NetlistSyntaxError("missing .model line", 1)
    if ".end" not in seen_sections:
        raise NetlistSyntaxError("missing .end line", len(text.splitlines()) or 1)

    defined_at: dict[str, int] = {}
    for ident in inputs:
        if ident in defined_at:
            raise DuplicateIdentifierError(f"duplicate input {ident!r}", 1)
        defined_at[ident] = 0
    by_name: dict[str, tuple[str, str, tuple[str, ...], int]] = {}
    for name, kind, fanins, lineno in raw_gates:
        if name in defined_at or name in by_name:
            raise DuplicateIdentifierError(f"duplicate identifier {name!r}", lineno)
        by_name[name] = (name, kind, fanins, lineno)

    # Topological order by depth-first search; grey nodes mark cycles.
    order: list[Gate] = []
    state: dict[str, int] = {}  # 1 = visiting, 2 = done

    def visit(name: str, via_line: int):
        if name in defined_at:
            return
        if name not in by_name:
            raise UndefinedSignalError(f"undefined signal {name!r}", via_line)
        mark = state.get(name)
        if mark == 2:
            return
        if mark == 1:
            raise CyclicDefinitionError(f"cyclic definition through {name!r}", by_name[name][3])
        state[name] = 1
        _, kind, fanins, lineno = by_name[name]
        for ref in fanins:
            visit(ref, lineno)
        state[name] = 2
        order.append(Gate(name, kind, fanins))

    for name, _, _, lineno in raw_gates:
        visit(name, lineno)
    for ref in outputs:
        if ref not in defined_at and ref not in by_name:
            raise UndefinedSignalError(f"output refers to undefined signal {ref!r}")

    return Circuit(model, tuple(inputs), tuple(outputs), tuple(order))


def _check_ident(ident: str, lineno: int):
    if not _IDENT_RE.match(ident):
        raise NetlistSyntaxError(f"invalid identifier {ident!r}", lineno)


def emit_netlist(circuit: Circuit) -> str:
    """Render a Circuit in the package's netlist format."""
    lines = [f".model {circuit.name}"]
    lines.append(".inputs " + " ".join(circuit.inputs) if circuit.inputs else ".inputs")
    lines.append(".outputs " + " ".join(circuit.outputs) if circuit.outputs else ".outputs")
    for gate in circuit.gates:
        lines.append(f"{gate.name} = {gate.kind}({', '.join(gate.fanins)})")
    lines.append(".end")
    return "\n".join(lines) + "\n"


def emit_verilog(circuit: Circuit, module_name: str | None = None) -> str:
    """Structural Verilog-2001 using and/or/not primitives and constant assigns."""
    module = module_name or circuit.name
    ports = list(circuit.inputs) + [f"o{i}" for i in range(circuit.m)]
    lines = [f"module {module}({', '.join(ports)});"]
    for ident in circuit.inputs:
        lines.append(f"  input {ident};")
    for i in range(circuit.m):
        lines.append(f"  output o{i};")
    for gate in circuit.gates:
        lines.append(f"  wire {gate.name};")
    for gate in circuit.gates:
        if gate.kind == "CONST0":
            lines.append(f"  assign {gate.name} = 1'b0;")
        elif gate.kind == "CONST1":
            lines.append(f"  assign {gate.name} = 1'b1;")
        else:
            prim = gate.kind.lower()
            args = ", ".join((gate.name,) + gate.fanins)
            lines.append(f"  {prim} {gate.name}_g({args});")
    for i, ref in enumerate(circuit.outputs):
        lines.append(f"  assign o{i} = {ref};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"
