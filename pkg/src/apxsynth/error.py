"""Worst-case error semantics: output interpretation, distance, threshold checks.

The exhaustive checks here are the ground-truth oracle the solver-based path
is validated against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

from .exceptions import ArityError
from .netlist import Circuit, int_to_bits, output_masks


class MapKind(Enum):
    UNSIGNED = "unsigned"


class DistKind(Enum):
    ABSOLUTE_DIFFERENCE = "absolute-difference"


@dataclass(frozen=True)
class ErrorSpec:
    """Error model of the miter: value interpretation, distance, and threshold."""

    et: int
    map_kind: MapKind = MapKind.UNSIGNED
    dist_kind: DistKind = DistKind.ABSOLUTE_DIFFERENCE

    def __post_init__(self):
        if self.et < 0:
            raise ValueError(f"error threshold must be non-negative, got {self.et}")

    def check_width(self, m: int):
        """Warn when the threshold already admits every m-bit circuit."""
        if self.et >= (1 << m) - 1:
            warnings.warn(
                f"error threshold {self.et} is at least the maximum distance of "
                f"{m}-bit outputs; every circuit is sound",
                stacklevel=3,
            )


def map_value(bits) -> int:
    """Interpret an output vector as an unsigned integer (bit i has weight 2^i)."""
    value = 0
    for i, b in enumerate(bits):
        value |= (b & 1) << i
    return value


def dist(a: int, b: int) -> int:
    """Distance between two mapped output values."""
    return abs(a - b)


@dataclass(frozen=True)
class SoundnessReport:
    sound: bool
    worst_case: int
    witness: tuple[int, ...] | None  # first input vector exceeding the threshold


def mapped_values(circuit: Circuit) -> list[int]:
    """Mapped output value for every input index, by exhaustive simulation."""
    masks = output_masks(circuit)
    rows = 1 << circuit.n
    return [map_value((mask >> k) & 1 for mask in masks) for k in range(rows)]


def _check_interfaces(exact: Circuit, approx: Circuit):
    if exact.n != approx.n:
        raise ArityError(f"input counts differ: {exact.n} vs {approx.n}")
    if exact.m != approx.m:
        raise ArityError(f"output counts differ: {exact.m} vs {approx.m}")


def worst_case_error(exact: Circuit, approx: Circuit) -> int:
    """Maximum distance between the two circuits over all 2^n input vectors."""
    _check_interfaces(exact, approx)
    ev = mapped_values(exact)
    av = mapped_values(approx)
    return max(abs(e - a) for e, a in zip(ev, av))


def is_sound(exact: Circuit, approx: Circuit, spec: ErrorSpec) -> SoundnessReport:
    """Exhaustively check that approx stays within spec.et of exact everywhere.

    The witness, present iff the check fails, is the first violating input
    vector in ascending index order.
    """
    _check_interfaces(exact, approx)
    spec.check_width(exact.m)
    ev = mapped_values(exact)
    av = mapped_values(approx)
    worst = 0
    witness = None
    for k, (e, a) in enumerate(zip(ev, av)):
        d = abs(e - a)
        if d > worst:
            worst = d
        if witness is None and d > spec.et:
            witness = int_to_bits(k, exact.n)
    return SoundnessReport(worst <= spec.et, worst, witness)
