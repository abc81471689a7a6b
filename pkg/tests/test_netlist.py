import random

import pytest

from apxsynth.exceptions import (
    ArityError,
    ConfigurationError,
    CyclicDefinitionError,
    DuplicateIdentifierError,
    NetlistSyntaxError,
    ResourceGuardError,
    UndefinedSignalError,
)
from apxsynth.netlist import (
    Circuit,
    Gate,
    array_multiplier,
    bits_to_int,
    emit_netlist,
    emit_verilog,
    evaluate,
    int_to_bits,
    parse_netlist,
    ripple_adder,
    truth_table,
)

from conftest import const_outputs_circuit, make_random_circuit


def adder_eval(circuit, a, b, width):
    bits = int_to_bits(a, width) + int_to_bits(b, width)
    return bits_to_int(evaluate(circuit, bits))


class TestEvaluate:
    def test_adder_one_plus_one(self, adder2):
        assert adder_eval(adder2, 1, 1, 2) == 2

    def test_multiplier_three_times_three(self, mul2):
        bits = int_to_bits(3, 2) + int_to_bits(3, 2)
        assert bits_to_int(evaluate(mul2, bits)) == 9

    def test_constant_outputs_all_zero(self, adder2):
        c = const_outputs_circuit(adder2)
        for k in range(16):
            assert evaluate(c, int_to_bits(k, 4)) == (0, 0, 0)

    def test_width_mismatch_rejected(self, adder2):
        with pytest.raises(ArityError):
            evaluate(adder2, (0, 1, 0))

    def test_evaluation_is_pure(self, adder2):
        x = (1, 0, 1, 1)
        assert evaluate(adder2, x) == evaluate(adder2, x)


class TestGenerators:
    @pytest.mark.parametrize("width", [1, 2, 3, 4])
    def test_adder_matches_arithmetic(self, width):
        circuit = ripple_adder(width)
        assert circuit.n == 2 * width and circuit.m == width + 1
        for a in range(1 << width):
            for b in range(1 << width):
                assert adder_eval(circuit, a, b, width) == a + b

    @pytest.mark.parametrize("width", [1, 2, 3, 4])
    def test_multiplier_matches_arithmetic(self, width):
        circuit = array_multiplier(width)
        assert circuit.n == 2 * width and circuit.m == 2 * width
        for a in range(1 << width):
            for b in range(1 << width):
                bits = int_to_bits(a, width) + int_to_bits(b, width)
                assert bits_to_int(evaluate(circuit, bits)) == a * b

    def test_benchmark_names(self):
        assert ripple_adder(2).name == "adder_i4_o3"
        assert ripple_adder(3).name == "adder_i6_o4"
        assert array_multiplier(2).name == "mul_i4_o4"
        assert array_multiplier(3).name == "mul_i6_o6"

    @pytest.mark.parametrize("width", [0, 9, -1])
    def test_adder_width_range(self, width):
        with pytest.raises(ConfigurationError):
            ripple_adder(width)

    @pytest.mark.parametrize("width", [0, 5])
    def test_multiplier_width_range(self, width):
        with pytest.raises(ConfigurationError):
            array_multiplier(width)


class TestTruthTable:
    def test_identity_single_input(self):
        c = Circuit("id", ("a",), ("a",))
        assert truth_table(c) == [(0,), (1,)]

    def test_adder_table_matches_arithmetic(self, adder2):
        table = truth_table(adder2)
        for k, row in enumerate(table):
            a, b = k & 3, k >> 2
            assert bits_to_int(row) == a + b

    def test_matches_per_input_evaluation_on_random_circuits(self):
        rng = random.Random(11)
        for _ in range(60):
            c = make_random_circuit(rng)
            table = truth_table(c)
            for k in range(1 << c.n):
                assert table[k] == evaluate(c, int_to_bits(k, c.n))

    def test_equivalent_structures_equal_tables(self):
        # two different XOR constructions
        x1 = Circuit("x1", ("a", "b"), ("y",), (
            Gate("na", "NOT", ("a",)),
            Gate("nb", "NOT", ("b",)),
            Gate("p", "AND", ("a", "nb")),
            Gate("q", "AND", ("na", "b")),
            Gate("y", "OR", ("p", "q")),
        ))
        x2 = Circuit("x2", ("a", "b"), ("y",), (
            Gate("o", "OR", ("a", "b")),
            Gate("g", "AND", ("a", "b")),
            Gate("ng", "NOT", ("g",)),
            Gate("y", "AND", ("o", "ng")),
        ))
        assert truth_table(x1) == truth_table(x2)

    def test_input_cap(self):
        wide = Circuit("wide", tuple(f"i{j}" for j in range(17)), ("i0",))
        with pytest.raises(ResourceGuardError):
            truth_table(wide)


ONE_GATE = """\
.model tiny
.inputs a b
.outputs y
y = AND(a, b)  # conjunction
.end
"""


class TestParse:
    def test_one_gate_netlist(self):
        c = parse_netlist(ONE_GATE)
        assert c.n == 2 and c.m == 1
        assert truth_table(c) == [(0,), (0,), (0,), (1,)]

    def test_round_trip_preserves_truth_table(self, adder2, mul2):
        for circuit in (adder2, mul2):
            again = parse_netlist(emit_netlist(circuit))
            assert truth_table(again) == truth_table(circuit)

    def test_round_trip_random_circuits(self):
        rng = random.Random(5)
        for _ in range(40):
            c = make_random_circuit(rng)
            assert truth_table(parse_netlist(emit_netlist(c))) == truth_table(c)

    def test_emit_is_deterministic(self, adder2):
        assert emit_netlist(adder2) == emit_netlist(adder2)

    def test_gates_in_any_order(self):
        text = ".model t\n.inputs a\n.outputs y\ny = NOT(n)\nn = NOT(a)\n.end\n"
        c = parse_netlist(text)
        assert truth_table(c) == [(0,), (1,)]

    def test_self_cycle_rejected(self):
        text = ".model t\n.inputs a\n.outputs y\ny = AND(a, y)\n.end\n"
        with pytest.raises(CyclicDefinitionError):
            parse_netlist(text)

    def test_mutual_cycle_rejected(self):
        text = ".model t\n.inputs a\n.outputs p\np = NOT(q)\nq = NOT(p)\n.end\n"
        with pytest.raises(CyclicDefinitionError):
            parse_netlist(text)

    def test_undefined_signal(self):
        text = ".model t\n.inputs a\n.outputs y\ny = AND(a, ghost)\n.end\n"
        with pytest.raises(UndefinedSignalError):
            parse_netlist(text)

    def test_duplicate_identifier(self):
        text = ".model t\n.inputs a\n.outputs y\ny = NOT(a)\ny = AND(a, a)\n.end\n"
        with pytest.raises(DuplicateIdentifierError):
            parse_netlist(text)

    def test_syntax_error_carries_line(self):
        text = ".model t\n.inputs a\n.outputs y\ny == NOT(a)\n.end\n"
        with pytest.raises(NetlistSyntaxError) as err:
            parse_netlist(text)
        assert err.value.line == 4

    def test_unknown_kind(self):
        text = ".model t\n.inputs a\n.outputs y\ny = NAND(a, a)\n.end\n"
        with pytest.raises(NetlistSyntaxError):
            parse_netlist(text)

    def test_missing_end(self):
        with pytest.raises(NetlistSyntaxError):
            parse_netlist(".model t\n.inputs a\n.outputs a\n")

    def test_missing_model(self):
        with pytest.raises(NetlistSyntaxError):
            parse_netlist(".inputs a\n.outputs a\n.end\n")


class TestGateInvariants:
    def test_not_arity(self):
        with pytest.raises(ArityError):
            Gate("g", "NOT", ("a", "b"))

    def test_const_arity(self):
        with pytest.raises(ArityError):
            Gate("g", "CONST0", ("a",))

    def test_and_needs_fanins(self):
        with pytest.raises(ArityError):
            Gate("g", "AND", ())

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            Gate("g", "XOR", ("a", "b"))

    def test_forward_reference_rejected_in_circuit(self):
        with pytest.raises(UndefinedSignalError):
            Circuit("t", ("a",), ("g",), (Gate("g", "AND", ("a", "h")), Gate("h", "NOT", ("a",))))


class TestVerilog:
    def test_constant_zero_assign(self):
        c = Circuit("z", ("a",), ("k",), (Gate("k", "CONST0"),))
        text = emit_verilog(c)
        assert "assign o0 = k;" in text and "assign k = 1'b0;" in text

    def test_adder_port_counts(self, adder2):
        text = emit_verilog(adder2)
        assert text.count("input ") == 4
        assert text.count("output ") == 3
        assert text.startswith("module adder_i4_o3(")

    def test_structural_only(self, adder2, mul2):
        for circuit in (adder2, mul2, ripple_adder(4), array_multiplier(3)):
            text = emit_verilog(circuit)
            assert "always" not in text
            assert "reg " not in text

    def test_module_name_override(self, adder2):
        assert emit_verilog(adder2, "top").startswith("module top(")
