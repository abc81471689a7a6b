import random

import pytest

from apxsynth.area import default_library, estimate_area, load_library, parse_library
from apxsynth.exceptions import ConfigurationError
from apxsynth.netlist import Circuit, Gate
from apxsynth.template import (
    NonsharedTemplate,
    ProxyBounds,
    Selector,
    SharedTemplate,
    TemplateFamily,
    assignment_from_cubes,
    instantiate,
    random_assignment,
)


def independent_cell_count(circuit):
    """Second opinion on the costing rules, written as a plain recount:
    fold constants by simulation-free reachability, then count 2-input
    decompositions and globally shared input inverters."""
    const = {}
    for gate in circuit.gates:
        if gate.kind == "CONST0":
            const[gate.name] = 0
        elif gate.kind == "CONST1":
            const[gate.name] = 1
        elif gate.kind == "NOT" and gate.fanins[0] in const:
            const[gate.name] = 1 - const[gate.fanins[0]]
        elif gate.kind in ("AND", "OR"):
            known = [const[f] for f in gate.fanins if f in const]
            live = [f for f in gate.fanins if f not in const]
            if gate.kind == "AND" and 0 in known:
                const[gate.name] = 0
            elif gate.kind == "OR" and 1 in known:
                const[gate.name] = 1
            elif not live:
                const[gate.name] = 1 if gate.kind == "AND" else 0

    by_name = {g.name: g for g in circuit.gates}
    inputs = set(circuit.inputs)
    counts = {"NOT": 0, "AND2": 0, "OR2": 0}
    neg_inputs = set()
    seen = set()

    def live_fanins(gate):
        out, dedup = [], set()
        for ref in gate.fanins:
            ref = chase(ref)
            if ref in const or ref in dedup:
                continue
            dedup.add(ref)
            out.append(ref)
        return out

    def chase(name):
        # skip through single-live-fanin AND/OR (wires)
        while name not in inputs and name not in const:
            gate = by_name[name]
            if gate.kind in ("AND", "OR"):
                live = live_fanins(gate)
                if len(live) == 1:
                    name = live[0]
                    continue
            break
        return name

    def walk(name):
        name = chase(name)
        if name in inputs or name in const or name in seen:
            return
        seen.add(name)
        gate = by_name[name]
        if gate.kind == "NOT":
            src = chase(gate.fanins[0])
            if src in inputs:
                neg_inputs.add(src)
            else:
                counts["NOT"] += 1
                walk(src)
            return
        if gate.kind in ("AND", "OR"):
            live = live_fanins(gate)
            counts["AND2" if gate.kind == "AND" else "OR2"] += len(live) - 1
            for ref in live:
                walk(ref)

    for ref in circuit.outputs:
        walk(ref)
    counts["NOT"] += len(neg_inputs)
    return counts


class TestLibrary:
    def test_default_values(self):
        lib = default_library()
        assert lib.area("AND2") == 2.0
        assert lib.area("OR2") == 2.0
        assert lib.area("NOT") == 1.0
        assert lib.name == "unit-nand-equivalent"
        assert all(v > 0 for v in lib.areas.values())

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "cells.lib"
        path.write_text("# comment\nNOT 1\nAND2 2.0\nOR2 2\n", encoding="utf-8")
        lib = load_library(path)
        assert lib.areas == default_library().areas

    def test_bad_lines_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_library("NAND3 4\n")
        with pytest.raises(ConfigurationError):
            parse_library("AND2 plenty\n")

    def test_missing_cell_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_library("AND2 2\nOR2 2\n")

    def test_nonpositive_area_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_library("NOT 0\nAND2 2\nOR2 2\n")


class TestEstimate:
    def test_all_constant_outputs_cost_nothing(self):
        c = Circuit("z", ("a",), ("k0", "k1"), (Gate("k0", "CONST0"), Gate("k1", "CONST1")))
        report = estimate_area(c)
        assert report.total == 0
        assert report.shared_products_counted_once

    def test_one_two_literal_product(self):
        tp = SharedTemplate(2, 1, 1)
        params = assignment_from_cubes(tp, [["11"]])
        report = estimate_area(instantiate(params))
        assert report.breakdown == {"NOT": 0, "AND2": 1, "OR2": 0}
        assert report.total == 2.0

    def test_worked_sharing_example(self):
        # one 3-literal product (one negated) feeding both sums, plus one
        # private 2-literal product per sum:
        #   NOT: 1, AND2: (3-1)+(2-1)+(2-1) = 4, OR2: (2-1)+(2-1) = 2 -> 13
        tp = SharedTemplate(4, 2, 3)
        params = assignment_from_cubes(tp, [["110-", "--11"], ["110-", "1--1"]])
        circuit = instantiate(params)
        report = estimate_area(circuit)
        assert independent_cell_count(circuit) == report.breakdown
        assert report.breakdown == {"NOT": 1, "AND2": 4, "OR2": 2}
        assert report.total == 13.0

    def test_matches_independent_walker_on_random_instantiations(self):
        tp = SharedTemplate(4, 3, 6)
        for seed in range(150):
            params = random_assignment(tp, ProxyBounds(TemplateFamily.SHARED, 6, 12), seed)
            circuit = instantiate(params)
            assert estimate_area(circuit).breakdown == independent_cell_count(circuit)

    def test_benchmarks_match_independent_walker(self, adder2, adder3, mul2):
        for circuit in (adder2, adder3, mul2):
            assert estimate_area(circuit).breakdown == independent_cell_count(circuit)

    def test_constant_fanin_propagates(self):
        c = Circuit("cp", ("a", "b"), ("y",), (
            Gate("k", "CONST0"),
            Gate("g", "AND", ("a", "k")),
            Gate("y", "OR", ("g", "b")),
        ))
        # g folds to 0, the OR becomes a wire to b
        assert estimate_area(c).total == 0

    def test_fanout_counted_once(self):
        c = Circuit("fo", ("a", "b"), ("y0", "y1"), (
            Gate("g", "AND", ("a", "b")),
            Gate("y0", "OR", ("g", "a")),
            Gate("y1", "OR", ("g", "b")),
        ))
        assert estimate_area(c).breakdown == {"NOT": 0, "AND2": 1, "OR2": 2}

    def test_input_negations_shared(self):
        c = Circuit("nn", ("a",), ("y0", "y1"), (
            Gate("n1", "NOT", ("a",)),
            Gate("n2", "NOT", ("a",)),
            Gate("y0", "AND", ("n1", "a")),
            Gate("y1", "OR", ("n2", "a")),
        ))
        assert estimate_area(c).breakdown["NOT"] == 1


class TestModelProperties:
    def test_sharing_strictly_cheaper(self):
        rng = random.Random(8)
        for trial in range(120):
            n = rng.randint(2, 4)
            m = rng.randint(2, 3)
            lits = rng.randint(2, n)
            positions = rng.sample(range(n), lits)
            cube = "".join(
                (rng.choice("10") if j in positions else "-") for j in range(n)
            )
            fanout = rng.randint(2, m)
            shared_tp = SharedTemplate(n, m, 1)
            covers = [[cube] if i < fanout else [] for i in range(m)]
            shared_area = estimate_area(instantiate(assignment_from_cubes(shared_tp, covers))).total
            dup_tp = NonsharedTemplate(n, m, 1)
            dup_area = estimate_area(instantiate(assignment_from_cubes(dup_tp, covers))).total
            assert shared_area < dup_area

    def test_adding_a_product_never_decreases_area(self):
        rng = random.Random(13)
        tp = SharedTemplate(4, 3, 5)
        for seed in range(120):
            params = random_assignment(tp, ProxyBounds(TemplateFamily.SHARED, 4, 8), seed)
            free = [t for t in range(tp.t) if t not in params.linked_products()]
            if not free:
                continue
            t = rng.choice(free)
            i = rng.randrange(tp.m)
            lits = rng.randint(1, tp.n)
            positions = rng.sample(range(tp.n), lits)
            row = tuple(
                (Selector.PASS if rng.random() < 0.5 else Selector.NEGATE)
                if j in positions
                else Selector.IGNORE
                for j in range(tp.n)
            )
            selectors = list(params.product_selectors)
            selectors[t] = row
            links = [list(r) for r in params.output_links]
            links[i][t] = True
            bigger = type(params)(
                tp, tuple(selectors), tuple(tuple(r) for r in links), params.output_constants
            )
            before = estimate_area(instantiate(params)).total
            after = estimate_area(instantiate(bigger)).total
            assert after >= before
