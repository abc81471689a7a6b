"""Miter encoding to SMT-LIB v2 and external-solver orchestration.

The universal condition "within the error threshold for all inputs" is made
quantifier-free by full expansion: for each concrete input vector the exact
circuit's value is folded to a constant and the template's output value is
expressed symbolically over the parameter variables. Proxy limits become
cardinality constraints over indicator terms.

The solver is an external process that must read an SMT-LIB file, print
``sat``/``unsat``/``unknown`` and answer ``(get-model)``. Which executable to
run comes from, in order: an explicit command string, the APXSYNTH_SOLVER
environment variable, or the bundled fallback solver shipped with the package.
"""

from __future__ import annotations

import os
import re
import shlex
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from . import refsolver
from .error import ErrorSpec, mapped_values
from .exceptions import (
    ArityError,
    FamilyMismatchError,
    ResourceGuardError,
    SolverNotFoundError,
    SolverProtocolError,
)
from .netlist import Circuit, int_to_bits
from .template import (
    NonsharedTemplate,
    ParameterAssignment,
    ProxyBounds,
    Selector,
    SharedTemplate,
    Template,
)

# Full expansion emits 2^n blocks; refuse to build monsters.
MAX_ENCODING_INPUTS = 10


@dataclass(frozen=True)
class MiterProblem:
    exact: Circuit
    template: Template
    spec: ErrorSpec
    bounds: ProxyBounds
    solutions_to_enumerate: int = 1
    timeout: float = 60.0

    def __post_init__(self):
        if self.template.n != self.exact.n:
            raise ArityError(f"template has {self.template.n} inputs, circuit {self.exact.n}")
        if self.template.m != self.exact.m:
            raise ArityError(f"template has {self.template.m} outputs, circuit {self.exact.m}")
        if self.bounds.family is not self.template.family:
            raise FamilyMismatchError(
                f"bounds family {self.bounds.family.value} does not match template"
            )
        if self.solutions_to_enumerate < 1:
            raise ValueError("solutions_to_enumerate must be positive")
        self.spec.check_width(self.template.m)


class SolverStatus(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"
    TIMEOUT = "timeout"


@dataclass
class SolverOutcome:
    status: SolverStatus
    models: list[ParameterAssignment] = field(default_factory=list)
    wall_time: float = 0.0


# ---------------------------------------------------------------------------
# Variable naming (stable; decode relies on it)
# ---------------------------------------------------------------------------


def sel_pass(t: int, j: int) -> str:
    return f"p_sel_{t}_{j}_pass"


def sel_neg(t: int, j: int) -> str:
    return f"p_sel_{t}_{j}_neg"


def link_var(i: int, t: int) -> str:
    return f"p_link_{i}_{t}"


def const_var(i: int) -> str:
    return f"p_const_{i}"


def _link_pairs(template: Template):
    """(output, product) pairs that have a link variable, in emission order."""
    if isinstance(template, NonsharedTemplate):
        return [(i, t) for i in range(template.m) for t in template.block(i)]
    return [(i, t) for i in range(template.m) for t in range(template.t)]


def parameter_variables(template: Template) -> list[str]:
    names = []
    for t in range(template.total_products):
        for j in range(template.n):
            names.append(sel_pass(t, j))
            names.append(sel_neg(t, j))
    for i, t in _link_pairs(template):
        names.append(link_var(i, t))
    for i in range(template.m):
        names.append(const_var(i))
    return names


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def _or_expr(args: list[str]) -> str:
    return args[0] if len(args) == 1 else "(or " + " ".join(args) + ")"


def _and_expr(args: list[str]) -> str:
    return args[0] if len(args) == 1 else "(and " + " ".join(args) + ")"


def _sum_expr(args: list[str]) -> str:
    return args[0] if len(args) == 1 else "(+ " + " ".join(args) + ")"


def encode_miter(problem: MiterProblem) -> str:
    tp = problem.template
    exact = problem.exact
    et = problem.spec.et
    if tp.n > MAX_ENCODING_INPUTS:
        raise ResourceGuardError(
            f"full expansion capped at {MAX_ENCODING_INPUTS} inputs, template has {tp.n}"
        )
    n, m, total = tp.n, tp.m, tp.total_products
    exact_values = mapped_values(exact)

    out = []
    push = out.append
    push(f"; approximation miter for {exact.name}")
    push(f"; family={tp.family.value} products={total} et={et} "
         f"bound_a={problem.bounds.bound_a} bound_b={problem.bounds.bound_b}")
    push("(set-option :produce-models true)")
    push("(set-logic QF_LIA)")

    for name in parameter_variables(tp):
        push(f"(declare-const {name} Bool)")

    push("; three-valued selectors: pass & neg simultaneously is forbidden")
    for t in range(total):
        for j in range(n):
            push(f"(assert (not (and {sel_pass(t, j)} {sel_neg(t, j)})))")

    def indicator(expr: str) -> str:
        return f"(ite {expr} 1 0)"

    push("; proxy limits as cardinality constraints")
    if isinstance(tp, SharedTemplate):
        if total:
            linked_exprs = [
                _or_expr([link_var(i, t) for i in range(m)]) for t in range(total)
            ]
            pit_sum = _sum_expr([indicator(e) for e in linked_exprs])
            push(f"(assert (<= {pit_sum} {problem.bounds.bound_a}))")
            its_terms = [indicator(link_var(i, t)) for i, t in _link_pairs(tp)]
            push(f"(assert (<= {_sum_expr(its_terms)} {problem.bounds.bound_b}))")
    else:
        for t in range(total):
            lits = [indicator(f"(or {sel_pass(t, j)} {sel_neg(t, j)})") for j in range(n)]
            push(f"(assert (<= {_sum_expr(lits)} {problem.bounds.bound_a}))")
        for i in range(m):
            if tp.k == 0:
                continue
            terms = []
            for t in tp.block(i):
                nonconst = _or_expr(
                    [f"(or {sel_pass(t, j)} {sel_neg(t, j)})" for j in range(n)]
                )
                terms.append(indicator(f"(and {link_var(i, t)} {nonconst})"))
            push(f"(assert (<= {_sum_expr(terms)} {problem.bounds.bound_b}))")

    push("; one block per concrete input vector; exact side folded to a constant")
    for k in range(1 << n):
        bits = int_to_bits(k, n)
        prods = []
        for t in range(total):
            terms = [
                f"(not {sel_neg(t, j)})" if bits[j] else f"(not {sel_pass(t, j)})"
                for j in range(n)
            ]
            prods.append(_and_expr(terms))
        value_terms = []
        for i in range(m):
            candidates = tp.block(i) if isinstance(tp, NonsharedTemplate) else range(total)
            parts = [const_var(i)]
            parts.extend(f"(and {link_var(i, t)} {prods[t]})" for t in candidates)
            value_terms.append(f"(ite {_or_expr(parts)} {1 << i} 0)")
        value = _sum_expr(value_terms)
        push(f"(assert (<= {value} {exact_values[k] + et}))")
        push(f"(assert (>= {value} {exact_values[k] - et}))")

    push("(check-sat)")
    push("(get-model)")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Model decoding
# ---------------------------------------------------------------------------

_DEFINE_RE = re.compile(r"\(\s*define-fun\s+(\S+)\s*\(\s*\)\s*Bool\s+(true|false)\s*\)")
_SEL_RE = re.compile(r"p_sel_(\d+)_(\d+)_(pass|neg)\Z")
_LINK_RE = re.compile(r"p_link_(\d+)_(\d+)\Z")
_CONST_RE = re.compile(r"p_const_(\d+)\Z")


def decode_model(model_text: str, template: Template) -> ParameterAssignment:
    """Map solver model output back to an assignment.

    Variables the model does not mention default to IGNORE / unlinked / no
    constant; names outside the miter's naming scheme are a protocol error.
    """
    total, n, m = template.total_products, template.n, template.m
    passes = [[False] * n for _ in range(total)]
    negs = [[False] * n for _ in range(total)]
    links = [[False] * total for _ in range(m)]
    consts = [False] * m
    link_ok = set(_link_pairs(template))

    for name, raw in _DEFINE_RE.findall(model_text):
        value = raw == "true"
        sel = _SEL_RE.match(name)
        if sel:
            t, j, which = int(sel.group(1)), int(sel.group(2)), sel.group(3)
            if t >= total or j >= n:
                raise SolverProtocolError(f"selector {name} outside template dimensions")
            (passes if which == "pass" else negs)[t][j] = value
            continue
        link = _LINK_RE.match(name)
        if link:
            i, t = int(link.group(1)), int(link.group(2))
            if (i, t) not in link_ok:
                raise SolverProtocolError(f"link {name} outside template dimensions")
            links[i][t] = value
            continue
        const = _CONST_RE.match(name)
        if const:
            i = int(const.group(1))
            if i >= m:
                raise SolverProtocolError(f"constant {name} outside template dimensions")
            consts[i] = value
            continue
        raise SolverProtocolError(f"unexpected variable {name!r} in solver model")

    selectors = []
    for t in range(total):
        row = []
        for j in range(n):
            if passes[t][j] and negs[t][j]:
                raise SolverProtocolError(f"selector ({t},{j}) is both pass and neg")
            if passes[t][j]:
                row.append(Selector.PASS)
            elif negs[t][j]:
                row.append(Selector.NEGATE)
            else:
                row.append(Selector.IGNORE)
        selectors.append(tuple(row))
    return ParameterAssignment(
        template, tuple(selectors), tuple(tuple(r) for r in links), tuple(consts)
    )


def _model_literals(params: ParameterAssignment) -> list[str]:
    """One literal per parameter variable, true under `params`, negated.

    Their disjunction blocks exactly this assignment during enumeration.
    """
    tp = params.template
    lits = []
    for t in range(tp.total_products):
        for j, sel in enumerate(params.product_selectors[t]):
            for name, active in ((sel_pass(t, j), sel is Selector.PASS),
                                 (sel_neg(t, j), sel is Selector.NEGATE)):
                lits.append(f"(not {name})" if active else name)
    for i, t in _link_pairs(tp):
        name = link_var(i, t)
        lits.append(f"(not {name})" if params.output_links[i][t] else name)
    for i in range(tp.m):
        name = const_var(i)
        lits.append(f"(not {name})" if params.output_constants[i] else name)
    return lits


def blocking_clause(params: ParameterAssignment) -> str:
    return "(assert (or " + " ".join(_model_literals(params)) + "))"


# ---------------------------------------------------------------------------
# Solver invocation
# ---------------------------------------------------------------------------


def solver_command(solver: str | None = None) -> list[str]:
    """Argv prefix for the external solver; the problem file path is appended."""
    configured = solver or os.environ.get("APXSYNTH_SOLVER")
    if configured:
        return shlex.split(configured)
    return [sys.executable, str(Path(refsolver.__file__).resolve())]


def _run_solver(command: list[str], text: str, timeout: float, keep_path=None) -> str | None:
    """One solver call; returns stdout, or None on timeout."""
    if keep_path is not None:
        path = Path(keep_path)
        path.write_text(text, encoding="utf-8")
        cleanup = False
    else:
        handle = tempfile.NamedTemporaryFile(
            mode="w", suffix=".smt2", prefix="apxsynth_", delete=False, encoding="utf-8"
        )
        handle.write(text)
        handle.close()
        path = Path(handle.name)
        cleanup = True
    try:
        try:
            proc = subprocess.Popen(
                command + [str(path)],
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                start_new_session=True,
            )
        except FileNotFoundError as exc:
            raise SolverNotFoundError(f"cannot start solver {command[0]!r}: {exc}")
        try:
            stdout, stderr = proc.communicate(timeout=timeout)
        except subprocess.TimeoutExpired:
            try:
                os.killpg(proc.pid, signal.SIGKILL)
            except (ProcessLookupError, PermissionError):
                proc.kill()
            proc.wait()
            return None
        if proc.returncode not in (0, 1) and not stdout.strip():
            raise SolverProtocolError(
                f"solver exited with {proc.returncode}: {stderr.strip()[:500]}"
            )
        return stdout
    finally:
        if cleanup:
            try:
                path.unlink()
            except OSError:
                pass


def _parse_status(stdout: str) -> SolverStatus:
    for line in stdout.splitlines():
        word = line.strip()
        if word in ("sat", "unsat", "unknown"):
            return SolverStatus(word)
        if word.startswith("(error"):
            raise SolverProtocolError(f"solver error: {word[:500]}")
    raise SolverProtocolError(f"no sat/unsat/unknown in solver output: {stdout[:200]!r}")


def solve(
    problem: MiterProblem,
    solver: str | None = None,
    dump_dir=None,
    dump_tag: str = "miter",
) -> SolverOutcome:
    """Encode, run the external solver, decode; enumerate via blocking clauses.

    Each requested extra solution re-invokes the solver with an added clause
    excluding every previously decoded assignment. The per-call timeout is
    problem.timeout; a timeout before the first model yields status TIMEOUT,
    later ones simply end the enumeration.
    """
    command = solver_command(solver)
    base_text = encode_miter(problem)
    started = time.monotonic()
    models: list[ParameterAssignment] = []
    blockers: list[str] = []
    status = SolverStatus.UNSAT

    for round_index in range(problem.solutions_to_enumerate):
        text = base_text
        if blockers:
            suffix = "\n".join(blockers) + "\n(check-sat)\n(get-model)\n"
            text = base_text.replace("(check-sat)\n(get-model)\n", suffix)
        keep = None
        if dump_dir is not None:
            keep = Path(dump_dir) / f"{dump_tag}_{round_index}.smt2"
            keep.parent.mkdir(parents=True, exist_ok=True)
        stdout = _run_solver(command, text, problem.timeout, keep_path=keep)
        if stdout is None:
            if not models:
                status = SolverStatus.TIMEOUT
            break
        verdict = _parse_status(stdout)
        if verdict is SolverStatus.SAT:
            params = decode_model(stdout, problem.template)
            models.append(params)
            blockers.append(blocking_clause(params))
            status = SolverStatus.SAT
            continue
        if not models:
            status = verdict
        break

    return SolverOutcome(status, models, time.monotonic() - started)
