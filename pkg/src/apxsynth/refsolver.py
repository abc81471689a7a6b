#!/usr/bin/env python3
"""Fallback SMT solver for the quantifier-free fragment this package emits.

Reads one SMT-LIB v2 problem (file argument or stdin), prints ``sat``,
``unsat`` or ``unknown``, and answers ``(get-model)`` with ``define-fun``
entries for the declared Boolean constants.

Supported fragment: Boolean constants; assertions built from and/or/not/=>/
=/ite over Bool; linear integer arithmetic restricted to sums of integer
literals and ``(ite <bool> <int> <int>)`` terms compared against each other
(every comparison must normalise to a pseudo-boolean constraint). That covers
everything the miter encoder produces, plus the blocking clauses used for
solution enumeration. Anything else is rejected loudly rather than guessed at.

The core is a small CDCL engine (two-watched-literal clauses, first-UIP
learning, VSIDS, Luby restarts, phase saving) extended with counter-based
propagation for pseudo-boolean constraints. It is deliberately dependency-free
so the main package can spawn it as an external solver process; any SMT-LIB
compliant solver can be dropped in its place via configuration.
"""

from __future__ import annotations

import heapq
import re
import sys
import time

UNDEF, TRUE, FALSE = 0, 1, 2
_TOKEN_RE = re.compile(r"[()]|[^\s();]+")


class SolverInputError(Exception):
    pass


def tokenize(text: str):
    # ';' comments run to end of line
    lines = []
    for raw in text.split("\n"):
        cut = raw.find(";")
        lines.append(raw if cut < 0 else raw[:cut])
    return _TOKEN_RE.findall("\n".join(lines))


def parse_forms(tokens):
    stack = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SolverInputError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SolverInputError("unbalanced '('")
    return stack[0]


# ---------------------------------------------------------------------------
# Boolean structure: hash-consed AND/inverter graph.
# Literal encoding: node_id * 2 + sign (sign 1 = negated). Node 0 is constant
# true, so literal 0 is TRUE and literal 1 is FALSE.
# ---------------------------------------------------------------------------

LIT_TRUE = 0
LIT_FALSE = 1


class Formula:
    def __init__(self):
        self.node_kids: list[tuple[int, ...] | None] = [None]  # node 0: constant
        self.node_name: list[str | None] = [None]
        self.hash: dict[tuple[int, ...], int] = {}
        self.vars: dict[str, int] = {}
        self.decl_order: list[str] = []

    def mk_var(self, name: str) -> int:
        if name in self.vars:
            raise SolverInputError(f"redeclared constant {name}")
        node = len(self.node_kids)
        self.node_kids.append(None)
        self.node_name.append(name)
        self.vars[name] = node
        self.decl_order.append(name)
        return node * 2

    def var_lit(self, name: str) -> int:
        try:
            return self.vars[name] * 2
        except KeyError:
            raise SolverInputError(f"undeclared constant {name}")

    def mk_and(self, lits) -> int:
        flat = []
        for lit in lits:
            if lit == LIT_FALSE:
                return LIT_FALSE
            if lit == LIT_TRUE:
                continue
            flat.append(lit)
        flat = sorted(set(flat))
        for lit in flat:
            if lit ^ 1 in set(flat):
                return LIT_FALSE
        if not flat:
            return LIT_TRUE
        if len(flat) == 1:
            return flat[0]
        key = tuple(flat)
        node = self.hash.get(key)
        if node is None:
            node = len(self.node_kids)
            self.node_kids.append(key)
            self.node_name.append(None)
            self.hash[key] = node
        return node * 2

    def mk_or(self, lits) -> int:
        return self.mk_and(lit ^ 1 for lit in lits) ^ 1

    def mk_ite(self, c: int, t: int, e: int) -> int:
        return self.mk_or((self.mk_and((c, t)), self.mk_and((c ^ 1, e))))

    def mk_iff(self, a: int, b: int) -> int:
        return self.mk_and((self.mk_or((a ^ 1, b)), self.mk_or((b ^ 1, a))))


# ---------------------------------------------------------------------------
# CDCL engine with pseudo-boolean counters.
# ---------------------------------------------------------------------------


class CDCL:
    def __init__(self, nvars: int):
        self.nvars = nvars
        self.val = bytearray(nvars)  # per var: UNDEF/TRUE/FALSE
        self.level = [0] * nvars
        self.reason: list = [None] * nvars  # clause list | ('pb', idx, cached lits) | None
        self.phase = bytearray(nvars)  # saved polarity, 0 = sign bit of preferred literal? 0 -> false
        for v in range(nvars):
            self.phase[v] = 1  # prefer assigning variables false
        self.activity = [0.0] * nvars
        self.var_inc = 1.0
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.watch: list[list[list[int]]] = [[] for _ in range(2 * nvars)]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.root_units: list[int] = []
        self.unsat = False
        # PB constraints: parallel arrays
        self.pb_lits: list[list[int]] = []
        self.pb_weights: list[list[int]] = []
        self.pb_bound: list[int] = []
        self.pb_slack: list[int] = []
        self.pb_occur: list[list[tuple[int, int]]] = [[] for _ in range(2 * nvars)]
        self.conflicts = 0
        self.propagations = 0

    # -- assignment helpers ------------------------------------------------

    def lit_value(self, lit: int) -> int:
        v = self.val[lit >> 1]
        if v == UNDEF:
            return UNDEF
        return v if not lit & 1 else (TRUE if v == FALSE else FALSE)

    def decision_level(self) -> int:
        return len(self.trail_lim)

    def enqueue(self, lit: int, reason=None) -> bool:
        cur = self.lit_value(lit)
        if cur == TRUE:
            return True
        if cur == FALSE:
            return False
        var = lit >> 1
        self.val[var] = TRUE if not lit & 1 else FALSE
        self.level[var] = self.decision_level()
        self.reason[var] = reason
        self.trail.append(lit)
        # PB counters must mirror the trail exactly (cancel_until walks the
        # trail to restore them), so account for the literal here and not at
        # propagation time: a conflict can leave trail entries unprocessed.
        for idx, term in self.pb_occur[lit]:
            self.pb_slack[idx] -= self.pb_weights[idx][term]
        return True

    # -- constraint intake ---------------------------------------------------

    def add_clause(self, lits, learnt=False):
        lits = list(lits)
        if not learnt:
            out = []
            for lit in sorted(set(lits)):
                if lit ^ 1 in out:
                    return  # tautology
                out.append(lit)
            lits = out
        if not lits:
            self.unsat = True
            return
        if len(lits) == 1:
            self.root_units.append(lits[0])
            return
        store = self.learnts if learnt else self.clauses
        store.append(lits)
        self.watch[lits[0]].append(lits)
        self.watch[lits[1]].append(lits)
        return lits

    def add_pb(self, lits, weights, bound):
        """Install sum(weights[i] * [lits[i] is true]) <= bound."""
        if bound < 0:
            self.unsat = True
            return
        pairs = sorted(zip(weights, lits), reverse=True)
        lits = [lit for _, lit in pairs]
        weights = [w for w, _ in pairs]
        while lits and weights[0] > bound:
            self.root_units.append(lits[0] ^ 1)
            lits.pop(0)
            weights.pop(0)
        if sum(weights) <= bound:
            return
        idx = len(self.pb_lits)
        self.pb_lits.append(lits)
        self.pb_weights.append(weights)
        self.pb_bound.append(bound)
        self.pb_slack.append(bound)
        for term, lit in enumerate(lits):
            self.pb_occur[lit].append((idx, term))

    # -- propagation -------------------------------------------------------

    def propagate(self):
        """Returns a conflict as a list of false literals, or None."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            falsified = lit ^ 1
            watchers = self.watch[falsified]
            i = 0
            while i < len(watchers):
                clause = watchers[i]
                if clause[0] == falsified:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self.lit_value(first) == TRUE:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(clause)):
                    if self.lit_value(clause[k]) != FALSE:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watch[clause[1]].append(clause)
                        watchers[i] = watchers[-1]
                        watchers.pop()
                        moved = True
                        break
                if moved:
                    continue
                if not self.enqueue(first, clause):
                    return clause
                i += 1
            # pseudo-boolean propagation for the literal that just became true
            for idx, _ in self.pb_occur[lit]:
                conflict = self._pb_propagate(idx)
                if conflict is not None:
                    return conflict
        return None

    def _pb_reason(self, idx: int, needed: int, skip_var: int = -1):
        """True literals of PB idx whose weight sum exceeds `needed`, negated."""
        out = []
        acc = 0
        for w, lit in zip(self.pb_weights[idx], self.pb_lits[idx]):
            if lit >> 1 == skip_var:
                continue
            if self.lit_value(lit) == TRUE:
                out.append(lit ^ 1)
                acc += w
                if acc > needed:
                    break
        return out

    def _pb_propagate(self, idx: int):
        slack = self.pb_slack[idx]
        if slack < 0:
            return self._pb_reason(idx, self.pb_bound[idx])
        for w, lit in zip(self.pb_weights[idx], self.pb_lits[idx]):
            if w <= slack:
                break  # weights sorted descending
            if self.lit_value(lit) == UNDEF:
                reason = self._pb_reason(idx, self.pb_bound[idx] - w, skip_var=lit >> 1)
                reason.insert(0, lit ^ 1)
                if not self.enqueue(lit ^ 1, reason):
                    return reason
        return None

    # -- backtracking --------------------------------------------------------

    def cancel_until(self, target_level: int):
        if self.decision_level() <= target_level:
            return
        limit = self.trail_lim[target_level]
        for pos in range(len(self.trail) - 1, limit - 1, -1):
            lit = self.trail[pos]
            var = lit >> 1
            self.phase[var] = lit & 1
            self.val[var] = UNDEF
            self.reason[var] = None
            for idx, term in self.pb_occur[lit]:
                self.pb_slack[idx] += self.pb_weights[idx][term]
        del self.trail[limit:]
        del self.trail_lim[target_level:]
        self.qhead = len(self.trail)

    # -- learning ------------------------------------------------------------

    def bump(self, var: int):
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            for v in range(self.nvars):
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100

    def analyze(self, conflict):
        learnt = [0]
        seen = bytearray(self.nvars)
        counter = 0
        reason = conflict
        p = -1
        idx = len(self.trail) - 1
        while True:
            for q in reason:
                if q == p:
                    continue
                var = q >> 1
                if not seen[var] and self.level[var] > 0:
                    seen[var] = True
                    self.bump(var)
                    if self.level[var] == self.decision_level():
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            var = p >> 1
            seen[var] = False
            counter -= 1
            if counter == 0:
                learnt[0] = p ^ 1
                break
            reason = self.reason[var]
        if len(learnt) == 1:
            return learnt, 0
        # move the highest-level tail literal into the second slot
        best = max(range(1, len(learnt)), key=lambda i: self.level[learnt[i] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[learnt[1] >> 1]

    # -- decisions -----------------------------------------------------------

    def pick_branch(self):
        heap = self._heap
        while heap:
            negact, var = heap[0]
            if self.val[var] == UNDEF and -negact == self.activity[var]:
                return var
            heapq.heappop(heap)
        best = -1
        for var in range(self.nvars):
            if self.val[var] == UNDEF and (best < 0 or self.activity[var] > self.activity[best]):
                best = var
        return best

    def _heap_push(self, var):
        heapq.heappush(self._heap, (-self.activity[var], var))

    # -- main search -----------------------------------------------------------

    def solve(self, deadline=None):
        """Returns True (sat), False (unsat) or None (deadline hit)."""
        if self.unsat:
            return False
        for lit in self.root_units:
            if not self.enqueue(lit):
                return False
        self.root_units.clear()
        if self.propagate() is not None:
            return False
        self._heap = []
        for var in range(self.nvars):
            self._heap_push(var)
        restart_index = 0
        while True:
            budget = 128 * _luby(restart_index)
            restart_index += 1
            result = self._search(int(budget), deadline)
            if result is not None:
                return result
            if deadline is not None and time.monotonic() > deadline:
                return None
            self.cancel_until(0)

    def _search(self, conflict_budget: int, deadline):
        local_conflicts = 0
        while True:
            conflict = self.propagate()
            if conflict is not None:
                self.conflicts += 1
                local_conflicts += 1
                if self.decision_level() == 0:
                    return False
                learnt, back_level = self.analyze(conflict)
                self.cancel_until(back_level)
                if len(learnt) == 1:
                    if not self.enqueue(learnt[0]):
                        return False
                else:
                    clause = self.add_clause(learnt, learnt=True)
                    self.enqueue(learnt[0], clause)
                for lit in learnt:
                    self._heap_push(lit >> 1)
                self.var_inc *= 1.053
                if local_conflicts >= conflict_budget:
                    return None
                if self.conflicts % 256 == 0 and deadline is not None:
                    if time.monotonic() > deadline:
                        return None
            else:
                var = self.pick_branch()
                if var < 0:
                    return True
                self.trail_lim.append(len(self.trail))
                self.enqueue(var * 2 + self.phase[var])


def _luby(i: int) -> int:
    size, power = 1, 0
    while size < i + 1:
        power += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) // 2
        power -= 1
        i %= size
    return 1 << power


# ---------------------------------------------------------------------------
# SMT-LIB front end
# ---------------------------------------------------------------------------

_CMP_OPS = {"<=", "<", ">=", ">"}


class Problem:
    def __init__(self):
        self.formula = Formula()
        self.asserted_lits: list[int] = []
        self.pbs: list[tuple[list[int], list[int], int]] = []
        self.trivially_unsat = False

    # -- expression translation ----------------------------------------------

    def build_bool(self, ast) -> int:
        f = self.formula
        if isinstance(ast, str):
            if ast == "true":
                return LIT_TRUE
            if ast == "false":
                return LIT_FALSE
            return f.var_lit(ast)
        if not ast:
            raise SolverInputError("empty expression")
        head = ast[0]
        args = ast[1:]
        if head == "not":
            return self.build_bool(args[0]) ^ 1
        if head == "and":
            return f.mk_and(self.build_bool(a) for a in args)
        if head == "or":
            return f.mk_or(self.build_bool(a) for a in args)
        if head == "=>":
            lits = [self.build_bool(a) for a in args]
            out = lits[-1]
            for lit in reversed(lits[:-1]):
                out = f.mk_or((lit ^ 1, out))
            return out
        if head == "ite":
            return f.mk_ite(*(self.build_bool(a) for a in args))
        if head == "xor":
            out = self.build_bool(args[0])
            for a in args[1:]:
                out = f.mk_iff(out, self.build_bool(a)) ^ 1
            return out
        if head == "=":
            if self._is_arith(args[0]) or self._is_arith(args[1]):
                raise SolverInputError("integer equality must appear as <=/>= pairs")
            lits = [self.build_bool(a) for a in args]
            return f.mk_and(f.mk_iff(lits[i], lits[i + 1]) for i in range(len(lits) - 1))
        if head == "distinct":
            lits = [self.build_bool(a) for a in args]
            if len(lits) != 2:
                raise SolverInputError("distinct supported for two booleans only")
            return f.mk_iff(lits[0], lits[1]) ^ 1
        if head in _CMP_OPS:
            raise SolverInputError("comparisons are only supported as top-level assertions")
        raise SolverInputError(f"unsupported boolean operator {head!r}")

    def _is_arith(self, ast) -> bool:
        if isinstance(ast, str):
            return bool(re.fullmatch(r"-?\d+", ast))
        return bool(ast) and ast[0] in ("+", "-", "*") or (bool(ast) and ast[0] == "ite" and self._is_arith(ast[2]))

    def build_linear(self, ast) -> tuple[int, dict[int, int]]:
        """Integer term -> (constant, {bool literal: coefficient})."""
        if isinstance(ast, str):
            if re.fullmatch(r"-?\d+", ast):
                return int(ast), {}
            raise SolverInputError(f"integer variables are not supported: {ast!r}")
        head = ast[0]
        args = ast[1:]
        if head == "+":
            const, terms = 0, {}
            for a in args:
                c, t = self.build_linear(a)
                const += c
                for lit, coef in t.items():
                    terms[lit] = terms.get(lit, 0) + coef
            return const, terms
        if head == "-":
            if len(args) == 1:
                c, t = self.build_linear(args[0])
                return -c, {lit: -coef for lit, coef in t.items()}
            const, terms = self.build_linear(args[0])
            for a in args[1:]:
                c, t = self.build_linear(a)
                const -= c
                for lit, coef in t.items():
                    terms[lit] = terms.get(lit, 0) - coef
            return const, terms
        if head == "*":
            if len(args) != 2:
                raise SolverInputError("only binary * is supported")
            scale = None
            other = None
            for a in args:
                if isinstance(a, str) and re.fullmatch(r"-?\d+", a):
                    scale = int(a)
                else:
                    other = a
            if scale is None or other is None:
                raise SolverInputError("one factor of * must be an integer literal")
            c, t = self.build_linear(other)
            return c * scale, {lit: coef * scale for lit, coef in t.items()}
        if head == "ite":
            then_c, then_t = self.build_linear(args[1])
            else_c, else_t = self.build_linear(args[2])
            if then_t or else_t:
                raise SolverInputError("ite branches must be integer constants")
            cond = self.build_bool(args[0])
            if then_c == else_c:
                return then_c, {}
            return else_c, {cond: then_c - else_c}
        raise SolverInputError(f"unsupported arithmetic operator {head!r}")

    def assert_ast(self, ast):
        if isinstance(ast, list) and ast and ast[0] == "and":
            for sub in ast[1:]:
                self.assert_ast(sub)
            return
        if isinstance(ast, list) and ast and ast[0] in _CMP_OPS:
            self._assert_comparison(ast)
            return
        self.asserted_lits.append(self.build_bool(ast))

    def _assert_comparison(self, ast):
        head, lhs, rhs = ast[0], ast[1], ast[2]
        lc, lt = self.build_linear(lhs)
        rc, rt = self.build_linear(rhs)
        # normalise to sum(coef * lit) <= bound
        if head in (">=", ">"):
            lc, rc, lt, rt = rc, lc, rt, lt
            head = "<=" if head == ">=" else "<"
        terms: dict[int, int] = dict(lt)
        for lit, coef in rt.items():
            terms[lit] = terms.get(lit, 0) - coef
        bound = rc - lc
        if head == "<":
            bound -= 1
        lits, weights = [], []
        for lit, coef in terms.items():
            if coef == 0:
                continue
            if coef < 0:
                bound -= coef
                lit ^= 1
                coef = -coef
            lits.append(lit)
            weights.append(coef)
        if bound < 0:
            self.trivially_unsat = True
            return
        if sum(weights) <= bound:
            return
        self.pbs.append((lits, weights, bound))

    # -- CNF/engine construction ----------------------------------------------

    def compile(self) -> CDCL:
        nvars = len(self.formula.node_kids)
        engine = CDCL(nvars)
        if self.trivially_unsat:
            engine.unsat = True
            return engine
        needed: set[int] = set()

        def require(lit: int):
            stack = [lit >> 1]
            while stack:
                node = stack.pop()
                if node in needed:
                    continue
                needed.add(node)
                kids = self.formula.node_kids[node]
                if kids:
                    for kid in kids:
                        stack.append(kid >> 1)

        def assert_lit(lit: int):
            node = lit >> 1
            kids = self.formula.node_kids[node]
            if kids is None or node == 0:
                if lit == LIT_FALSE:
                    engine.unsat = True
                elif lit != LIT_TRUE:
                    engine.add_clause([lit])
                return
            if not lit & 1:
                for kid in kids:  # AND node true: assert every child
                    assert_lit(kid)
            else:
                clause = [kid ^ 1 for kid in kids]
                engine.add_clause(clause)
                for kid in kids:
                    require(kid)

        for lit in self.asserted_lits:
            assert_lit(lit)
        for lits, _, _ in self.pbs:
            for lit in lits:
                require(lit)
        # Tseitin definitions for every structurally referenced AND node
        for node in sorted(needed):
            kids = self.formula.node_kids[node]
            if not kids or node == 0:
                continue
            g = node * 2
            big = [g]
            for kid in kids:
                engine.add_clause([g ^ 1, kid])
                big.append(kid ^ 1)
            engine.add_clause(big)
        for lits, weights, bound in self.pbs:
            engine.add_pb(lits, weights, bound)
        # pin the constant node
        engine.add_clause([LIT_TRUE])
        return engine


def run(text: str, out=sys.stdout, deadline=None) -> int:
    problem = Problem()
    status = None
    engine = None
    for form in parse_forms(tokenize(text)):
        if not isinstance(form, list) or not form:
            raise SolverInputError(f"unexpected top-level token {form!r}")
        cmd = form[0]
        if cmd in ("set-option", "set-logic", "set-info", "push", "pop"):
            continue
        if cmd in ("declare-const", "declare-fun"):
            name = form[1]
            sort = form[-1]
            if cmd == "declare-fun" and form[2] != []:
                raise SolverInputError("only zero-arity declare-fun is supported")
            if sort != "Bool":
                raise SolverInputError(f"only Bool constants are supported, got {sort}")
            problem.formula.mk_var(name)
        elif cmd == "assert":
            problem.assert_ast(form[1])
        elif cmd == "check-sat":
            engine = problem.compile()
            result = engine.solve(deadline)
            status = {True: "sat", False: "unsat", None: "unknown"}[result]
            print(status, file=out)
        elif cmd == "get-model":
            if status != "sat":
                print('(error "model is not available")', file=out)
                continue
            lines = ["("]
            for name in problem.formula.decl_order:
                node = problem.formula.vars[name]
                value = "true" if engine.val[node] == TRUE else "false"
                lines.append(f"  (define-fun {name} () Bool {value})")
            lines.append(")")
            print("\n".join(lines), file=out)
        elif cmd == "exit":
            break
        else:
            raise SolverInputError(f"unsupported command {cmd!r}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    deadline = None
    if "--timeout" in argv:
        pos = argv.index("--timeout")
        deadline = time.monotonic() + float(argv[pos + 1])
        del argv[pos : pos + 2]
    if argv:
        with open(argv[0], encoding="utf-8") as handle:
            text = handle.read()
    else:
        text = sys.stdin.read()
    try:
        return run(text, deadline=deadline)
    except SolverInputError as exc:
        print(f'(error "{exc}")')
        return 1


if __name__ == "__main__":
    sys.exit(main())
