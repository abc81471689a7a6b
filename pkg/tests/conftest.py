import random

import pytest

from apxsynth.netlist import Circuit, Gate, array_multiplier, ripple_adder


@pytest.fixture(scope="session")
def adder2():
    return ripple_adder(2)


@pytest.fixture(scope="session")
def adder3():
    return ripple_adder(3)


@pytest.fixture(scope="session")
def mul2():
    return array_multiplier(2)


def make_random_circuit(
    rng: random.Random, n_inputs=3, n_gates=6, n_outputs=2, inputs=None
) -> Circuit:
    """Small random acyclic circuit over the package's gate vocabulary."""
    inputs = tuple(inputs) if inputs is not None else tuple(f"x{i}" for i in range(n_inputs))
    signals = list(inputs)
    gates = []
    for g in range(n_gates):
        kind = rng.choice(("AND", "OR", "NOT", "AND", "OR", "CONST0", "CONST1"))
        name = f"n{g}"
        if kind == "NOT":
            fanins = (rng.choice(signals),)
        elif kind in ("CONST0", "CONST1"):
            fanins = ()
        else:
            width = rng.randint(1, min(3, len(signals)))
            fanins = tuple(rng.sample(signals, width))
        gates.append(Gate(name, kind, fanins))
        signals.append(name)
    outputs = tuple(rng.choice(signals) for _ in range(n_outputs))
    return Circuit("rand", inputs, outputs, tuple(gates))


def const_outputs_circuit(reference: Circuit, kind: str = "CONST0") -> Circuit:
    """Same interface as `reference` but every output tied to one constant."""
    gate = Gate("k", kind)
    return Circuit(
        f"{reference.name}_const",
        reference.inputs,
        tuple("k" for _ in reference.outputs),
        (gate,),
    )
