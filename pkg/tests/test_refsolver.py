"""The bundled solver is validated against brute-force enumeration: random
formulas in the supported fragment are ground-truth checked over every
assignment, and returned models are re-evaluated on the original text."""

import io
import itertools
import random
import time

import pytest

from apxsynth import refsolver
from apxsynth.refsolver import SolverInputError, parse_forms, run, tokenize


def solve_text(text):
    out = io.StringIO()
    run(text, out=out)
    lines = out.getvalue().splitlines()
    model = {}
    for line in lines:
        parts = line.replace("(", " ").replace(")", " ").split()
        if parts[:1] == ["define-fun"]:
            model[parts[1]] = parts[-1] == "true"
    return lines[0], model


class TestFrontEnd:
    def test_tokenize(self):
        assert tokenize("(assert (or a b)) ; comment\n(check-sat)") == [
            "(", "assert", "(", "or", "a", "b", ")", ")", "(", "check-sat", ")",
        ]

    def test_parse_nesting(self):
        forms = parse_forms(tokenize("(a (b c) d) (e)"))
        assert forms == [["a", ["b", "c"], "d"], ["e"]]

    def test_unbalanced(self):
        with pytest.raises(SolverInputError):
            parse_forms(tokenize("(a (b)"))
        with pytest.raises(SolverInputError):
            parse_forms(tokenize("(a))"))

    def test_unsupported_sort(self):
        with pytest.raises(SolverInputError):
            run("(declare-const x Int)\n(check-sat)\n", out=io.StringIO())

    def test_unsupported_command(self):
        with pytest.raises(SolverInputError):
            run("(define-fun f () Bool true)\n", out=io.StringIO())

    def test_undeclared_variable(self):
        with pytest.raises(SolverInputError):
            run("(assert missing)\n(check-sat)\n", out=io.StringIO())

    def test_model_unavailable_after_unsat(self):
        out = io.StringIO()
        run("(declare-const a Bool)\n(assert a)\n(assert (not a))\n(check-sat)\n(get-model)\n",
            out=out)
        lines = out.getvalue().splitlines()
        assert lines[0] == "unsat"
        assert "model is not available" in lines[1]


class TestSmallProblems:
    def test_sat_with_model(self):
        status, model = solve_text(
            "(declare-const a Bool)\n(declare-const b Bool)\n"
            "(assert (or a b))\n(assert (not a))\n(check-sat)\n(get-model)\n"
        )
        assert status == "sat"
        assert model == {"a": False, "b": True}

    def test_unsat_functional_square(self):
        text = "\n".join(
            ["(declare-const a Bool)", "(declare-const b Bool)"]
            + [f"(assert (or {x} {y}))" for x, y in
               [("a", "b"), ("(not a)", "b"), ("a", "(not b)"), ("(not a)", "(not b)")]]
            + ["(check-sat)"]
        )
        assert solve_text(text)[0] == "unsat"

    def test_cardinality_window(self):
        lits = " ".join(f"(ite b{i} 1 0)" for i in range(6))
        text = "\n".join(
            [f"(declare-const b{i} Bool)" for i in range(6)]
            + [f"(assert (<= (+ {lits}) 2))", f"(assert (>= (+ {lits}) 2))",
               "(check-sat)", "(get-model)"]
        )
        status, model = solve_text(text)
        assert status == "sat"
        assert sum(model[f"b{i}"] for i in range(6)) == 2

    def test_weighted_bound_forces_literal(self):
        text = (
            "(declare-const a Bool)\n(declare-const b Bool)\n"
            "(assert (<= (+ (ite a 5 0) (ite b 1 0)) 3))\n"
            "(assert b)\n(check-sat)\n(get-model)\n"
        )
        status, model = solve_text(text)
        assert status == "sat" and model["a"] is False and model["b"] is True

    def test_negative_bound_unsat(self):
        text = "(declare-const a Bool)\n(assert (<= (+ (ite a 1 0) 1) 0))\n(assert a)\n(check-sat)\n"
        assert solve_text(text)[0] == "unsat"

    def test_strict_comparisons(self):
        text = (
            "(declare-const a Bool)\n"
            "(assert (< (ite a 1 0) 1))\n(assert (> (+ (ite a 1 0) 1) 0))\n"
            "(check-sat)\n(get-model)\n"
        )
        status, model = solve_text(text)
        assert status == "sat" and model["a"] is False

    def test_stdin_style_multiple_checks_not_needed(self):
        # single check-sat then exit is the only flow the package uses
        status, _ = solve_text("(set-logic QF_LIA)\n(check-sat)\n(exit)\n")
        assert status == "sat"


def pigeonhole(n):
    decls, clauses = [], []
    for p in range(n + 1):
        for h in range(n):
            decls.append(f"(declare-const x_{p}_{h} Bool)")
    for p in range(n + 1):
        clauses.append("(assert (or " + " ".join(f"x_{p}_{h}" for h in range(n)) + "))")
    for h in range(n):
        for p1 in range(n + 1):
            for p2 in range(p1 + 1, n + 1):
                clauses.append(f"(assert (or (not x_{p1}_{h}) (not x_{p2}_{h})))")
    return "\n".join(decls + clauses) + "\n(check-sat)\n"


class TestSearchStress:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_pigeonhole_unsat(self, n):
        assert solve_text(pigeonhole(n))[0] == "unsat"

    def test_deadline_reports_unknown(self):
        out = io.StringIO()
        run(pigeonhole(7), out=out, deadline=time.monotonic() + 0.2)
        assert out.getvalue().split()[0] in ("unknown", "unsat")


# ---------------------------------------------------------------------------
# Randomised ground-truth fuzz
# ---------------------------------------------------------------------------


def random_bool_ast(rng, names, depth):
    if depth == 0 or rng.random() < 0.3:
        name = rng.choice(names)
        return name if rng.random() < 0.7 else ["not", name]
    op = rng.choice(["and", "or", "not", "=>", "=", "ite", "xor"])
    if op == "not":
        return ["not", random_bool_ast(rng, names, depth - 1)]
    if op == "ite":
        return ["ite"] + [random_bool_ast(rng, names, depth - 1) for _ in range(3)]
    arity = rng.randint(2, 3) if op in ("and", "or") else 2
    return [op] + [random_bool_ast(rng, names, depth - 1) for _ in range(arity)]


def random_pb_ast(rng, names):
    chosen = rng.sample(names, rng.randint(1, len(names)))
    terms, total = [], 0
    for name in chosen:
        weight = rng.randint(-4, 6)
        arg = name if rng.random() < 0.5 else ["not", name]
        if rng.random() < 0.3:
            arg = random_bool_ast(rng, names, 1)
        terms.append(["ite", arg, str(weight), "0"])
        total += abs(weight)
    bound = rng.randint(-2, max(2, total))
    return [rng.choice(["<=", ">=", "<", ">"]), ["+"] + terms, str(bound)]


def ast_to_str(ast):
    if isinstance(ast, str):
        return ast
    return "(" + " ".join(ast_to_str(a) for a in ast) + ")"


def eval_bool(ast, env):
    if isinstance(ast, str):
        return {"true": True, "false": False}.get(ast, env.get(ast))
    op = ast[0]
    if op == "not":
        return not eval_bool(ast[1], env)
    if op == "and":
        return all(eval_bool(a, env) for a in ast[1:])
    if op == "or":
        return any(eval_bool(a, env) for a in ast[1:])
    if op == "=>":
        return (not eval_bool(ast[1], env)) or eval_bool(ast[2], env)
    if op == "=":
        return eval_bool(ast[1], env) == eval_bool(ast[2], env)
    if op == "xor":
        return eval_bool(ast[1], env) != eval_bool(ast[2], env)
    if op == "ite":
        return eval_bool(ast[2], env) if eval_bool(ast[1], env) else eval_bool(ast[3], env)
    raise ValueError(op)


def eval_arith(ast, env):
    if isinstance(ast, str):
        return int(ast)
    op = ast[0]
    if op == "+":
        return sum(eval_arith(a, env) for a in ast[1:])
    if op == "ite":
        return eval_arith(ast[2], env) if eval_bool(ast[1], env) else eval_arith(ast[3], env)
    raise ValueError(op)


def eval_assertion(ast, env):
    if isinstance(ast, list) and ast[0] in ("<=", "<", ">=", ">"):
        lhs, rhs = eval_arith(ast[1], env), eval_arith(ast[2], env)
        return {"<=": lhs <= rhs, "<": lhs < rhs, ">=": lhs >= rhs, ">": lhs > rhs}[ast[0]]
    return eval_bool(ast, env)


@pytest.mark.parametrize("block", range(8))
def test_fuzz_against_brute_force(block):
    for trial in range(block * 50, block * 50 + 50):
        rng = random.Random(trial)
        names = [f"v{i}" for i in range(rng.randint(2, 6))]
        asserts = []
        for _ in range(rng.randint(1, 6)):
            if rng.random() < 0.4:
                asserts.append(random_pb_ast(rng, names))
            else:
                asserts.append(random_bool_ast(rng, names, rng.randint(1, 3)))
        text = "\n".join(f"(declare-const {n} Bool)" for n in names)
        text += "\n" + "\n".join(f"(assert {ast_to_str(a)})" for a in asserts)
        text += "\n(check-sat)\n(get-model)\n"

        truth = any(
            all(eval_assertion(a, dict(zip(names, combo))) for a in asserts)
            for combo in itertools.product([False, True], repeat=len(names))
        )
        status, model = solve_text(text)
        assert status == ("sat" if truth else "unsat"), f"trial {trial}"
        if status == "sat":
            assert all(eval_assertion(a, model) for a in asserts), f"bad model, trial {trial}"


def test_determinism():
    text = pigeonhole(3) + "(get-model)\n"
    first, second = io.StringIO(), io.StringIO()
    refsolver.run(text, out=first)
    refsolver.run(text, out=second)
    assert first.getvalue() == second.getvalue()
