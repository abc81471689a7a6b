"""Command-line interface.

Subcommands: gen, show, verify, synth, sample, bench. Exit codes: 0 success,
1 negative verification, 2 usage or environment error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .area import default_library, estimate_area, load_library
from .error import ErrorSpec, is_sound
from .exceptions import ApxsynthError
from .explore import StopPolicy, default_schedule, explore, log_to_csv
from .harness import (
    ExperimentConfig,
    benchmark_circuit,
    run_area_vs_et,
    run_area_vs_proxy,
    sample_sound_assignments,
)
from .netlist import emit_netlist, emit_verilog, parse_netlist
from .template import (
    NonsharedTemplate,
    SharedTemplate,
    TemplateFamily,
    format_assignment,
    instantiate,
    proxy_values,
)


def _read_circuit(path: str):
    return parse_netlist(Path(path).read_text(encoding="utf-8"))


def _load_benchmark(args):
    if getattr(args, "exact", None):
        return _read_circuit(args.exact)
    if args.op is None or args.bits is None:
        raise ApxsynthError("give either --exact FILE or --op and --bits")
    return benchmark_circuit(args.op, args.bits)


def _parse_bounds(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise ApxsynthError(f"--max-bounds expects A:B, got {text!r}")


def _write_or_print(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    circuit = benchmark_circuit(args.op, args.bits)
    text = emit_verilog(circuit) if args.format == "verilog" else emit_netlist(circuit)
    _write_or_print(text, args.output)
    return 0


def cmd_show(args) -> int:
    circuit = _read_circuit(args.netlist)
    lib = load_library(args.library) if args.library else default_library()
    report = estimate_area(circuit, lib)
    print(f"name:    {circuit.name}")
    print(f"inputs:  {circuit.n}")
    print(f"outputs: {circuit.m}")
    counts = circuit.gate_counts()
    print("gates:   " + " ".join(f"{kind}={counts[kind]}" for kind in counts))
    print("cells:   " + " ".join(f"{kind}={report.breakdown[kind]}" for kind in report.breakdown))
    print(f"area:    {report.total:g} ({lib.name})")
    return 0


def cmd_verify(args) -> int:
    exact = _read_circuit(args.exact)
    approx = _read_circuit(args.approx)
    report = is_sound(exact, approx, ErrorSpec(et=args.et))
    if report.sound:
        print(f"sound: worst-case error {report.worst_case} <= {args.et}")
        return 0
    witness = "".join(str(b) for b in report.witness)
    print(f"unsound: worst-case error {report.worst_case} > {args.et} "
          f"(first violation at input {witness}, LSB first)")
    return 1


def _make_template(args, circuit):
    family = TemplateFamily(args.family)
    if family is TemplateFamily.SHARED:
        products = args.products or 2 * circuit.m
        return SharedTemplate(circuit.n, circuit.m, products)
    return NonsharedTemplate(circuit.n, circuit.m, args.k)


def cmd_synth(args) -> int:
    exact = _load_benchmark(args)
    template = _make_template(args, exact)
    if args.max_bounds:
        max_bounds = _parse_bounds(args.max_bounds)
    elif isinstance(template, SharedTemplate):
        max_bounds = (template.t, min(2 * template.t, template.m * template.t))
    else:
        max_bounds = (template.n, template.k)
    lib = load_library(args.library) if args.library else default_library()
    schedule = default_schedule(
        template,
        max_bounds,
        per_cell_timeout=args.cell_timeout,
        solutions_per_cell=args.solutions,
        stop_policy=StopPolicy(args.policy),
    )
    result = explore(
        exact,
        template,
        ErrorSpec(et=args.et),
        schedule,
        area_model=lib,
        solver=args.solver,
        dump_dir=args.dump_smt,
        global_budget=args.budget,
        workers=args.workers,
    )
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "best.netlist").write_text(emit_netlist(result.best.circuit), encoding="utf-8")
    (outdir / "best.v").write_text(emit_verilog(result.best.circuit), encoding="utf-8")
    (outdir / "exact.netlist").write_text(emit_netlist(exact), encoding="utf-8")
    (outdir / "log.csv").write_text(
        log_to_csv(result.log, include_timings=args.timings), encoding="utf-8"
    )
    if result.best.params is not None:
        (outdir / "best.params").write_text(
            format_assignment(result.best.params), encoding="utf-8"
        )
    if result.fallback_used:
        print(f"no sound approximation found; falling back to the exact circuit "
              f"(area {result.best.area:g})")
    else:
        a, b = proxy_values(result.best.params)
        print(f"best area {result.best.area:g} at proxies ({a}, {b}); "
              f"wrote {outdir}/best.netlist")
    return 0


def cmd_sample(args) -> int:
    exact = _load_benchmark(args)
    samples = sample_sound_assignments(
        exact,
        TemplateFamily(args.family),
        ErrorSpec(et=args.et),
        args.count,
        args.seed,
    )
    lib = default_library()
    lines = ["family,solution_index,pit,its,lpp,ppo,area,wce"]
    shared = TemplateFamily(args.family) is TemplateFamily.SHARED
    for index, (params, wce) in enumerate(samples):
        a, b = proxy_values(params)
        area = estimate_area(instantiate(params), lib).total
        pit, its = (str(a), str(b)) if shared else ("", "")
        lpp, ppo = ("", "") if shared else (str(a), str(b))
        lines.append(f"{args.family},{index},{pit},{its},{lpp},{ppo},{area:g},{wce}")
    _write_or_print("\n".join(lines) + "\n", args.output)
    if len(samples) < args.count:
        print(f"note: produced {len(samples)} of {args.count} requested samples",
              file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    families = tuple(TemplateFamily(f) for f in args.families.split(","))
    config = ExperimentConfig(
        op=args.op,
        bits=args.bits,
        et_values=tuple(int(v) for v in args.et.split(",")),
        families=families,
        random_samples=args.samples,
        seed=args.seed,
        shared_products=args.products,
        nonshared_k=args.k,
        max_bounds=_parse_bounds(args.max_bounds) if args.max_bounds else None,
        per_cell_timeout=args.cell_timeout,
        solutions_per_cell=args.solutions,
        global_budget=args.budget,
        workers=args.workers,
        solver=args.solver,
        include_timings=args.timings,
    )
    if args.experiment == "proxy":
        text = run_area_vs_proxy(config)
    else:
        text = run_area_vs_et(config)
    _write_or_print(text, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apxsynth",
        description="Approximate logic synthesis over sum-of-products templates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_benchmark_args(p, need_et=True):
        p.add_argument("--op", choices=("adder", "mul"), help="benchmark operation")
        p.add_argument("--bits", type=int, help="operand bitwidth")
        p.add_argument("--exact", help="exact circuit netlist file (instead of --op/--bits)")
        if need_et:
            p.add_argument("--et", type=int, required=True, help="worst-case error threshold")

    p = sub.add_parser("gen", help="emit a benchmark circuit")
    p.add_argument("--op", choices=("adder", "mul"), required=True)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--format", choices=("netlist", "verilog"), default="netlist")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("show", help="print circuit statistics")
    p.add_argument("netlist")
    p.add_argument("--library", help="cell library file (KIND AREA lines)")
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("verify", help="exhaustive soundness check")
    p.add_argument("--exact", required=True)
    p.add_argument("--approx", required=True)
    p.add_argument("--et", type=int, required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("synth", help="search for a sound approximation")
    add_benchmark_args(p)
    p.add_argument("--family", choices=("shared", "nonshared"), default="shared")
    p.add_argument("--products", type=int, help="shared template product count")
    p.add_argument("--k", type=int, default=2, help="nonshared products per output")
    p.add_argument("--max-bounds", help="grid limits as A:B")
    p.add_argument("--policy", choices=("first-sat", "exhaust-grid"), default="first-sat")
    p.add_argument("--solutions", type=int, default=1, help="solutions enumerated per cell")
    p.add_argument("--cell-timeout", type=float, default=60.0)
    p.add_argument("--budget", type=float, default=10800.0, help="global time budget (s)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--solver", help="external solver command (overrides APXSYNTH_SOLVER)")
    p.add_argument("--dump-smt", help="directory for emitted SMT-LIB problems")
    p.add_argument("--library", help="cell library file")
    p.add_argument("--timings", action="store_true", help="include wall times in log.csv")
    p.add_argument("-o", "--output", default="synth_out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sample", help="random sound baseline")
    add_benchmark_args(p)
    p.add_argument("--family", choices=("shared", "nonshared"), default="shared")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bench", help="run an experiment, emit its CSV")
    p.add_argument("--experiment", choices=("proxy", "et"), required=True)
    p.add_argument("--op", choices=("adder", "mul"), required=True)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--et", required=True, help="comma-separated threshold list")
    p.add_argument("--families", default="shared,nonshared")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--products", type=int)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--max-bounds")
    p.add_argument("--cell-timeout", type=float, default=60.0)
    p.add_argument("--solutions", type=int, default=3)
    p.add_argument("--budget", type=float, default=10800.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--solver")
    p.add_argument("--timings", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ApxsynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
