"""Design-space exploration over proxy-bound grids.

Cells are visited from most to least restrictive (ascending bound sum); each
cell is one solver problem. Every decoded solution is re-verified against the
exhaustive oracle before it is accepted, so a miscompiled or buggy external
solver can never smuggle an unsound circuit into a result.
"""

from __future__ import annotations

import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

from .area import CellLibrary, default_library, estimate_area
from .error import ErrorSpec, is_sound
from .exceptions import SolverProtocolError
from .netlist import Circuit
from .smt import MiterProblem, SolverStatus, solve
from .template import (
    NonsharedTemplate,
    ParameterAssignment,
    ProxyBounds,
    Template,
    TemplateFamily,
    instantiate,
    proxy_values,
)


class StopPolicy(Enum):
    FIRST_SAT = "first-sat"
    EXHAUST_GRID = "exhaust-grid"


@dataclass(frozen=True)
class Schedule:
    family: TemplateFamily
    cells: tuple[ProxyBounds, ...]
    per_cell_timeout: float = 60.0
    solutions_per_cell: int = 1
    stop_policy: StopPolicy = StopPolicy.FIRST_SAT

    def __post_init__(self):
        if not self.cells:
            raise ValueError("schedule needs at least one cell")
        for cell in self.cells:
            if cell.family is not self.family:
                raise ValueError(f"cell {cell} does not match schedule family")


def default_schedule(
    template: Template,
    max_bounds: tuple[int, int],
    per_cell_timeout: float = 60.0,
    solutions_per_cell: int = 1,
    stop_policy: StopPolicy = StopPolicy.FIRST_SAT,
) -> Schedule:
    """Grid {0..max_a} x {0..max_b}, tightest cells first.

    Ordered by ascending bound sum, ties by ascending first bound, so every
    prefix is downward closed up to ties. Shared-family cells that allow
    connections but no products (PIT bound 0 with ITS bound > 0) are pruned
    as vacuous; bounds are clamped to what the template can reach at all.
    """
    max_a, max_b = max_bounds
    if max_a < 0 or max_b < 0:
        raise ValueError("max bounds must be non-negative")
    family = template.family
    if isinstance(template, NonsharedTemplate):
        max_a = min(max_a, template.n)
        max_b = min(max_b, template.k)
    else:
        max_a = min(max_a, template.t)
        max_b = min(max_b, template.m * template.t)
    cells = [
        ProxyBounds(family, a, b)
        for a in range(max_a + 1)
        for b in range(max_b + 1)
        if not (family is TemplateFamily.SHARED and a == 0 and b > 0)
    ]
    cells.sort(key=lambda c: (c.bound_a + c.bound_b, c.bound_a))
    return Schedule(family, tuple(cells), per_cell_timeout, solutions_per_cell, stop_policy)


@dataclass(frozen=True)
class Solution:
    index: int
    params: ParameterAssignment
    circuit: Circuit
    area: float
    wce: int


@dataclass(frozen=True)
class LogEntry:
    bounds: ProxyBounds
    status: SolverStatus
    wall_time: float
    solutions: tuple[Solution, ...] = ()


@dataclass(frozen=True)
class Best:
    circuit: Circuit
    params: ParameterAssignment | None
    area: float


@dataclass(frozen=True)
class ExplorationResult:
    best: Best
    log: tuple[LogEntry, ...]
    fallback_used: bool


def _solve_cell(exact, template, spec, schedule, bounds, lib, solver, dump_dir) -> LogEntry:
    problem = MiterProblem(
        exact,
        template,
        spec,
        bounds,
        solutions_to_enumerate=schedule.solutions_per_cell,
        timeout=schedule.per_cell_timeout,
    )
    tag = f"cell_{bounds.bound_a}_{bounds.bound_b}"
    outcome = solve(problem, solver=solver, dump_dir=dump_dir, dump_tag=tag)
    solutions = []
    for index, params in enumerate(outcome.models):
        circuit = instantiate(params)
        report = is_sound(exact, circuit, spec)
        if not report.sound:
            raise SolverProtocolError(
                f"solver model violates the threshold at cell {bounds}: "
                f"worst-case error {report.worst_case} > {spec.et}"
            )
        area = estimate_area(circuit, lib).total
        solutions.append(Solution(index, params, circuit, area, report.worst_case))
    return LogEntry(bounds, outcome.status, outcome.wall_time, tuple(solutions))


def explore(
    exact: Circuit,
    template: Template,
    spec: ErrorSpec,
    schedule: Schedule,
    area_model: CellLibrary | None = None,
    solver: str | None = None,
    dump_dir=None,
    global_budget: float = 10800.0,
    workers: int = 1,
) -> ExplorationResult:
    """Walk the schedule, solving one miter per cell.

    FIRST_SAT stops at the first satisfiable cell and returns its cheapest
    solution; EXHAUST_GRID visits every cell and returns the global minimum.
    When nothing sound is found the exact circuit itself is returned with
    fallback_used set (it trivially meets any threshold).
    """
    if template.family is not schedule.family:
        raise ValueError("schedule family does not match template")
    lib = area_model or default_library()
    started = time.monotonic()
    log: list[LogEntry] = []

    def budget_left() -> bool:
        return time.monotonic() - started < global_budget

    if schedule.stop_policy is StopPolicy.FIRST_SAT or workers <= 1:
        for bounds in schedule.cells:
            if not budget_left():
                break
            entry = _solve_cell(exact, template, spec, schedule, bounds, lib, solver, dump_dir)
            log.append(entry)
            if schedule.stop_policy is StopPolicy.FIRST_SAT and entry.solutions:
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = []
            for bounds in schedule.cells:
                if not budget_left():
                    break
                futures.append(
                    pool.submit(
                        _solve_cell, exact, template, spec, schedule, bounds, lib, solver, dump_dir
                    )
                )
            log = [f.result() for f in futures]

    candidates = [sol for entry in log for sol in entry.solutions]
    if not candidates:
        return ExplorationResult(
            Best(exact, None, estimate_area(exact, lib).total), tuple(log), True
        )
    best = min(candidates, key=lambda sol: sol.area)
    return ExplorationResult(Best(best.circuit, best.params, best.area), tuple(log), False)


def pareto_front(log) -> list[tuple[ProxyBounds, float]]:
    """Non-dominated (bounds, area) pairs over all logged solutions, all three
    coordinates minimised; deterministic ascending order."""
    points = []
    for entry in log:
        for sol in entry.solutions:
            points.append((entry.bounds, sol.area))
    front = []
    for bounds, area in points:
        dominated = False
        for ob, oa in points:
            if (
                ob.bound_a <= bounds.bound_a
                and ob.bound_b <= bounds.bound_b
                and oa <= area
                and (ob.bound_a, ob.bound_b, oa) != (bounds.bound_a, bounds.bound_b, area)
            ):
                dominated = True
                break
        if not dominated and (bounds, area) not in front:
            front.append((bounds, area))
    front.sort(key=lambda pair: (pair[0].bound_a, pair[0].bound_b, pair[1]))
    return front


# ---------------------------------------------------------------------------
# CSV serialisation
# ---------------------------------------------------------------------------

LOG_CSV_COLUMNS = (
    "family",
    "bound_a",
    "bound_b",
    "status",
    "wall_time_s",
    "solution_index",
    "pit",
    "its",
    "lpp",
    "ppo",
    "area",
    "wce",
)


def format_area(value: float) -> str:
    return f"{value:g}"


def log_rows(log, include_timings: bool = False):
    """Rows (dicts) for the exploration-log CSV schema.

    Wall times are volatile, so the wall_time_s column is left blank unless
    include_timings is set; everything else is reproducible byte for byte.
    """
    for entry in log:
        family = entry.bounds.family
        base = {
            "family": family.value,
            "bound_a": str(entry.bounds.bound_a),
            "bound_b": str(entry.bounds.bound_b),
            "status": entry.status.value,
            "wall_time_s": f"{entry.wall_time:.3f}" if include_timings else "",
        }
        if not entry.solutions:
            yield {**base, "solution_index": "", "pit": "", "its": "", "lpp": "",
                   "ppo": "", "area": "", "wce": ""}
            continue
        for sol in entry.solutions:
            a, b = proxy_values(sol.params)
            shared = family is TemplateFamily.SHARED
            yield {
                **base,
                "solution_index": str(sol.index),
                "pit": str(a) if shared else "",
                "its": str(b) if shared else "",
                "lpp": "" if shared else str(a),
                "ppo": "" if shared else str(b),
                "area": format_area(sol.area),
                "wce": str(sol.wce),
            }


def log_to_csv(log, include_timings: bool = False) -> str:
    import csv

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=LOG_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in log_rows(log, include_timings):
        writer.writerow(row)
    return buffer.getvalue()
