"""Experiment runners: benchmark generation, random sound baselines, CSV datasets.

Two experiment families are reproduced: area against proxy values at a fixed
error threshold (exact circuit + random sound baseline + all solver solutions)
and best area against a sweep of error thresholds.

The random baseline is built constructively: perturb the exact circuit's value
table anywhere within the threshold, then realise the perturbed table with a
randomised two-level cover. Uniform rejection sampling over raw assignments
finds essentially no sound circuits at tight thresholds, so it would starve
the baseline; the constructive sampler keeps every sample sound while still
spreading widely over proxy values and area. Every sample is re-verified with
the exhaustive oracle before it is reported.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from random import Random

from .area import CellLibrary, default_library, estimate_area
from .error import ErrorSpec, is_sound, mapped_values
from .exceptions import ConfigurationError
from .explore import (
    LOG_CSV_COLUMNS,
    StopPolicy,
    default_schedule,
    explore,
    format_area,
    log_rows,
)
from .netlist import Circuit, array_multiplier, ripple_adder
from .template import (
    NonsharedTemplate,
    ParameterAssignment,
    SharedTemplate,
    Template,
    TemplateFamily,
    assignment_from_cubes,
    instantiate,
    proxy_values,
)

BENCHMARK_OPS = ("adder", "mul")


def benchmark_circuit(op: str, bits: int) -> Circuit:
    if op == "adder":
        return ripple_adder(bits)
    if op == "mul":
        return array_multiplier(bits)
    raise ConfigurationError(f"unknown benchmark op {op!r} (expected one of {BENCHMARK_OPS})")


@dataclass(frozen=True)
class ExperimentConfig:
    op: str
    bits: int
    et_values: tuple[int, ...]
    families: tuple[TemplateFamily, ...] = (TemplateFamily.SHARED, TemplateFamily.NONSHARED)
    random_samples: int = 1000
    seed: int = 0
    shared_products: int | None = None  # default: 2 * output count
    nonshared_k: int = 2
    max_bounds: tuple[int, int] | None = None  # default derived per family
    per_cell_timeout: float = 60.0
    solutions_per_cell: int = 3
    global_budget: float = 10800.0
    workers: int = 1
    solver: str | None = None
    include_timings: bool = False

    def __post_init__(self):
        if not self.et_values:
            raise ConfigurationError("et_values must not be empty")
        if self.op not in BENCHMARK_OPS:
            raise ConfigurationError(f"unknown benchmark op {self.op!r}")

    def template_for(self, family: TemplateFamily, circuit: Circuit) -> Template:
        if family is TemplateFamily.SHARED:
            products = self.shared_products or 2 * circuit.m
            return SharedTemplate(circuit.n, circuit.m, products)
        return NonsharedTemplate(circuit.n, circuit.m, self.nonshared_k)

    def bounds_for(self, template: Template) -> tuple[int, int]:
        if self.max_bounds is not None:
            return self.max_bounds
        if isinstance(template, SharedTemplate):
            return template.t, min(2 * template.t, template.m * template.t)
        return template.n, template.k


# ---------------------------------------------------------------------------
# Random sound baseline
# ---------------------------------------------------------------------------


def _input_value_masks(n: int) -> list[int]:
    rows = 1 << n
    masks = []
    for j in range(n):
        block = ((1 << (1 << j)) - 1) << (1 << j)
        period = 1 << (j + 1)
        mask = 0
        for start in range(0, rows, period):
            mask |= block << start
        masks.append(mask & ((1 << rows) - 1))
    return masks


def _cube_mask(cube: str, input_masks: list[int], full: int) -> int:
    mask = full
    for j, ch in enumerate(cube):
        if ch == "1":
            mask &= input_masks[j]
        elif ch == "0":
            mask &= ~input_masks[j]
    return mask & full


def _random_cover(on_mask: int, n: int, rng: Random) -> list[str]:
    """Random irredundant-ish cube cover of the on-set (as a 2^n-bit mask)."""
    input_masks = _input_value_masks(n)
    full = (1 << (1 << n)) - 1
    cubes = [
        "".join("1" if (k >> j) & 1 else "0" for j in range(n))
        for k in range(1 << n)
        if (on_mask >> k) & 1
    ]

    def inside(cube: str) -> bool:
        return _cube_mask(cube, input_masks, full) & ~on_mask == 0

    for _ in range(3 * len(cubes)):
        if len(cubes) < 2:
            break
        i, j = sorted(rng.sample(range(len(cubes)), 2))
        merged = "".join(a if a == b else "-" for a, b in zip(cubes[i], cubes[j]))
        if inside(merged):
            cubes[i] = merged
            cubes.pop(j)
    for idx in range(len(cubes)):
        for pos in range(n):
            if cubes[idx][pos] != "-" and rng.random() < 0.5:
                widened = cubes[idx][:pos] + "-" + cubes[idx][pos + 1 :]
                if inside(widened):
                    cubes[idx] = widened
    seen = set()
    out = []
    for cube in cubes:
        if cube not in seen:
            seen.add(cube)
            out.append(cube)
    return out


def sample_sound_assignments(
    exact: Circuit,
    family: TemplateFamily,
    spec: ErrorSpec,
    count: int,
    seed: int,
    max_attempts: int | None = None,
) -> list[tuple[ParameterAssignment, int]]:
    """Random approximations sound by construction, oracle-verified.

    Each sample perturbs the exact value table within the threshold and covers
    the perturbed table with randomised cubes; the template is sized to fit
    the sample. Returns (assignment, worst-case error) pairs; may return fewer
    than `count` if the attempt cap is hit.
    """
    n, m = exact.n, exact.m
    rng = Random(seed)
    exact_values = mapped_values(exact)
    maxval = (1 << m) - 1
    attempts_left = max_attempts if max_attempts is not None else 100 * count
    samples: list[tuple[ParameterAssignment, int]] = []
    while len(samples) < count and attempts_left > 0:
        attempts_left -= 1
        table = [
            rng.randint(max(0, e - spec.et), min(maxval, e + spec.et)) for e in exact_values
        ]
        covers: list[list[str]] = []
        constants = []
        for i in range(m):
            on_mask = 0
            for k, value in enumerate(table):
                if (value >> i) & 1:
                    on_mask |= 1 << k
            if on_mask == (1 << (1 << n)) - 1:
                covers.append([])
                constants.append(True)
            else:
                covers.append(_random_cover(on_mask, n, rng))
                constants.append(False)
        if family is TemplateFamily.SHARED:
            distinct = []
            for cubes in covers:
                for cube in cubes:
                    if cube not in distinct:
                        distinct.append(cube)
            template: Template = SharedTemplate(n, m, max(len(distinct), 1))
        else:
            template = NonsharedTemplate(n, m, max(max(map(len, covers)), 1))
        params = assignment_from_cubes(template, covers, tuple(constants))
        report = is_sound(exact, instantiate(params), spec)
        if not report.sound:
            continue
        samples.append((params, report.worst_case))
    return samples


# ---------------------------------------------------------------------------
# Experiment: area against proxy values at a fixed threshold
# ---------------------------------------------------------------------------

PROXY_CSV_COLUMNS = LOG_CSV_COLUMNS + ("source",)


def _blank_row() -> dict[str, str]:
    return {column: "" for column in PROXY_CSV_COLUMNS}


def run_area_vs_proxy(config: ExperimentConfig, lib: CellLibrary | None = None) -> str:
    """CSV with the exact circuit, the random sound baseline, and every solver
    solution of a full-grid exploration, at a single error threshold."""
    if len(config.et_values) != 1:
        raise ConfigurationError("area-vs-proxy runs use exactly one error threshold")
    lib = lib or default_library()
    exact = benchmark_circuit(config.op, config.bits)
    spec = ErrorSpec(et=config.et_values[0])
    rows: list[dict[str, str]] = []

    row = _blank_row()
    row.update(area=format_area(estimate_area(exact, lib).total), wce="0", source="EXACT")
    rows.append(row)

    for family in config.families:
        samples = sample_sound_assignments(
            exact, family, spec, config.random_samples, config.seed
        )
        for index, (params, wce) in enumerate(samples):
            a, b = proxy_values(params)
            shared = family is TemplateFamily.SHARED
            row = _blank_row()
            row.update(
                family=family.value,
                solution_index=str(index),
                pit=str(a) if shared else "",
                its=str(b) if shared else "",
                lpp="" if shared else str(a),
                ppo="" if shared else str(b),
                area=format_area(estimate_area(instantiate(params), lib).total),
                wce=str(wce),
                source="RANDOM",
            )
            rows.append(row)

    for family in config.families:
        template = config.template_for(family, exact)
        schedule = default_schedule(
            template,
            config.bounds_for(template),
            per_cell_timeout=config.per_cell_timeout,
            solutions_per_cell=config.solutions_per_cell,
            stop_policy=StopPolicy.EXHAUST_GRID,
        )
        result = explore(
            exact,
            template,
            spec,
            schedule,
            area_model=lib,
            solver=config.solver,
            global_budget=config.global_budget,
            workers=config.workers,
        )
        for row in log_rows(result.log, include_timings=config.include_timings):
            rows.append({**row, "source": "SOLVER"})

    return _rows_to_csv(PROXY_CSV_COLUMNS, rows)


# ---------------------------------------------------------------------------
# Experiment: best area against the error threshold
# ---------------------------------------------------------------------------

ET_CSV_COLUMNS = ("family", "et", "area", "fallback_used", "source")


def run_area_vs_et(config: ExperimentConfig, lib: CellLibrary | None = None) -> str:
    """CSV with, per family and threshold, the best area a full-grid
    exploration found; a circuit found at a smaller threshold stays a valid
    candidate for every larger one, so reported best areas are the running
    minimum over ascending thresholds (feasible sets only grow)."""
    if len(config.et_values) < 2:
        raise ConfigurationError("area-vs-threshold runs need at least two thresholds")
    lib = lib or default_library()
    exact = benchmark_circuit(config.op, config.bits)
    exact_area = estimate_area(exact, lib).total
    rows = [
        {
            "family": "",
            "et": "",
            "area": format_area(exact_area),
            "fallback_used": "",
            "source": "EXACT",
        }
    ]
    for family in config.families:
        template = config.template_for(family, exact)
        carried: float | None = None
        for et in sorted(config.et_values):
            schedule = default_schedule(
                template,
                config.bounds_for(template),
                per_cell_timeout=config.per_cell_timeout,
                solutions_per_cell=config.solutions_per_cell,
                stop_policy=StopPolicy.EXHAUST_GRID,
            )
            result = explore(
                exact,
                template,
                ErrorSpec(et=et),
                schedule,
                area_model=lib,
                solver=config.solver,
                global_budget=config.global_budget,
                workers=config.workers,
            )
            candidates = []
            if not result.fallback_used:
                candidates.append(result.best.area)
            if carried is not None:
                candidates.append(carried)
            fallback = not candidates
            best = min(candidates) if candidates else exact_area
            carried = best if not fallback else carried
            rows.append(
                {
                    "family": family.value,
                    "et": str(et),
                    "area": format_area(best),
                    "fallback_used": "1" if fallback else "0",
                    "source": "SOLVER",
                }
            )
    return _rows_to_csv(ET_CSV_COLUMNS, rows)


def _rows_to_csv(columns, rows) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Rank correlation (for the proxy-vs-area analysis)
# ---------------------------------------------------------------------------


def _average_ranks(values) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Spearman rank correlation with average ranks for ties."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need two sequences of equal length >= 2")
    rx = _average_ranks(list(xs))
    ry = _average_ranks(list(ys))
    mean_x = sum(rx) / len(rx)
    mean_y = sum(ry) / len(ry)
    cov = sum((a - mean_x) * (b - mean_y) for a, b in zip(rx, ry))
    var_x = sum((a - mean_x) ** 2 for a in rx)
    var_y = sum((b - mean_y) ** 2 for b in ry)
    if var_x == 0 or var_y == 0:
        raise ValueError("rank correlation undefined for constant input")
    return cov / (var_x * var_y) ** 0.5
