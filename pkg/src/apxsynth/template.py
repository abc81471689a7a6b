"""Sum-of-products template families, parameter assignments, and proxy counters.

Two families are supported:

* nonshared: each output owns a private block of K products; a product can
  only feed its owning sum.
* shared: T global products; any product can feed any subset of the sums,
  and a product feeding several sums is materialised once.

A parameter assignment fixes, per product, how each input enters it (as is,
negated, or ignored), which products feed which sums, and optional per-output
constant-one terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import comb
from random import Random

from .exceptions import (
    FamilyMismatchError,
    InfeasibleBoundsError,
    NetlistSyntaxError,
    ParameterShapeError,
)
from .netlist import Circuit, Gate


class TemplateFamily(Enum):
    NONSHARED = "nonshared"
    SHARED = "shared"


class Selector(Enum):
    """How one input enters one product."""

    PASS = "1"
    NEGATE = "0"
    IGNORE = "-"


_SELECTOR_BY_CHAR = {s.value: s for s in Selector}


@dataclass(frozen=True)
class NonsharedTemplate:
    n: int
    m: int
    k: int  # products per output sum

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.k < 0:
            raise ParameterShapeError(f"invalid nonshared template ({self.n}, {self.m}, {self.k})")

    @property
    def family(self) -> TemplateFamily:
        return TemplateFamily.NONSHARED

    @property
    def total_products(self) -> int:
        return self.m * self.k

    def block(self, output: int) -> range:
        """Product indices owned by one output sum."""
        return range(output * self.k, (output + 1) * self.k)


@dataclass(frozen=True)
class SharedTemplate:
    n: int
    m: int
    t: int  # total products in the template

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.t < 0:
            raise ParameterShapeError(f"invalid shared template ({self.n}, {self.m}, {self.t})")

    @property
    def family(self) -> TemplateFamily:
        return TemplateFamily.SHARED

    @property
    def total_products(self) -> int:
        return self.t


Template = NonsharedTemplate | SharedTemplate


@dataclass(frozen=True)
class ProxyBounds:
    """One cell of the exploration grid.

    bound_a / bound_b are upper bounds on (LPP, PPO) for the nonshared family
    and on (PIT, ITS) for the shared family.
    """

    family: TemplateFamily
    bound_a: int
    bound_b: int

    def __post_init__(self):
        if self.bound_a < 0 or self.bound_b < 0:
            raise ParameterShapeError(f"bounds must be non-negative, got {self}")


@dataclass(frozen=True)
class ParameterAssignment:
    """Concrete values for every template parameter.

    product_selectors is indexed [product][input]; output_links [output][product].
    For the nonshared family, links outside an output's own block must be False.
    """

    template: Template
    product_selectors: tuple[tuple[Selector, ...], ...]
    output_links: tuple[tuple[bool, ...], ...]
    output_constants: tuple[bool, ...]

    def __post_init__(self):
        tp = self.template
        total = tp.total_products
        if len(self.product_selectors) != total:
            raise ParameterShapeError(
                f"expected {total} selector rows, got {len(self.product_selectors)}"
            )
        for row in self.product_selectors:
            if len(row) != tp.n:
                raise ParameterShapeError(f"selector row of width {len(row)}, expected {tp.n}")
        if len(self.output_links) != tp.m:
            raise ParameterShapeError(f"expected {tp.m} link rows, got {len(self.output_links)}")
        for row in self.output_links:
            if len(row) != total:
                raise ParameterShapeError(f"link row of width {len(row)}, expected {total}")
        if len(self.output_constants) != tp.m:
            raise ParameterShapeError(
                f"expected {tp.m} output constants, got {len(self.output_constants)}"
            )
        if isinstance(tp, NonsharedTemplate):
            for i, row in enumerate(self.output_links):
                block = tp.block(i)
                for t, linked in enumerate(row):
                    if linked and t not in block:
                        raise ParameterShapeError(
                            f"nonshared link outside block: output {i}, product {t}"
                        )

    @property
    def family(self) -> TemplateFamily:
        return self.template.family

    def cube(self, product: int) -> str:
        return "".join(s.value for s in self.product_selectors[product])

    def linked_products(self) -> list[int]:
        """Products that feed at least one sum, ascending."""
        total = self.template.total_products
        return [t for t in range(total) if any(row[t] for row in self.output_links)]


def empty_assignment(template: Template) -> ParameterAssignment:
    """All selectors IGNORE, no links, no constants: every output is constant 0."""
    total = template.total_products
    return ParameterAssignment(
        template,
        tuple(tuple(Selector.IGNORE for _ in range(template.n)) for _ in range(total)),
        tuple(tuple(False for _ in range(total)) for _ in range(template.m)),
        tuple(False for _ in range(template.m)),
    )


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------


def instantiate(params: ParameterAssignment) -> Circuit:
    """Build the two-level circuit a parameter assignment describes.

    Each linked product becomes one AND over its selected literals (a product
    ignoring every input degenerates to constant 1); each output ORs its
    linked products, plus a constant-one term when its flag is set. A product
    feeding several sums is built once and fans out. Unlinked products are
    not materialised.
    """
    tp = params.template
    inputs = tuple(f"in{j}" for j in range(tp.n))
    gates: list[Gate] = []
    not_of: dict[int, str] = {}
    const1: str | None = None
    const_gates: list[Gate] = []

    def negated(j: int) -> str:
        if j not in not_of:
            name = f"ni{j}"
            gates.append(Gate(name, "NOT", (inputs[j],)))
            not_of[j] = name
        return not_of[j]

    def one() -> str:
        nonlocal const1
        if const1 is None:
            const1 = "one"
            const_gates.append(Gate(const1, "CONST1"))
        return const1

    product_signal: dict[int, str] = {}
    for t in params.linked_products():
        lits = []
        for j, sel in enumerate(params.product_selectors[t]):
            if sel is Selector.PASS:
                lits.append(inputs[j])
            elif sel is Selector.NEGATE:
                lits.append(negated(j))
        if not lits:
            product_signal[t] = one()
        elif len(lits) == 1:
            product_signal[t] = lits[0]
        else:
            name = f"p{t}"
            gates.append(Gate(name, "AND", tuple(lits)))
            product_signal[t] = name

    outputs = []
    for i in range(tp.m):
        terms = [product_signal[t] for t in range(tp.total_products) if params.output_links[i][t]]
        if params.output_constants[i]:
            terms.append(one())
        if not terms:
            name = f"zero{i}"
            const_gates.append(Gate(name, "CONST0"))
            outputs.append(name)
        elif len(terms) == 1:
            outputs.append(terms[0])
        else:
            name = f"y{i}"
            gates.append(Gate(name, "OR", tuple(terms)))
            outputs.append(name)

    # Constant gates carry no fanins, so they can safely lead the gate list.
    all_gates = tuple(const_gates) + tuple(gates)
    return Circuit(f"sop{tp.n}x{tp.m}", inputs, tuple(outputs), all_gates)


# ---------------------------------------------------------------------------
# Proxy counters
# ---------------------------------------------------------------------------


def _require_family(params: ParameterAssignment, family: TemplateFamily):
    if params.family is not family:
        raise FamilyMismatchError(f"expected {family.value} params, got {params.family.value}")


def _is_constant_product(params: ParameterAssignment, t: int) -> bool:
    return all(s is Selector.IGNORE for s in params.product_selectors[t])


def count_lpp(params: ParameterAssignment) -> int:
    """Literals per product: maximum count of non-ignored inputs in any product."""
    _require_family(params, TemplateFamily.NONSHARED)
    return max(
        (sum(1 for s in row if s is not Selector.IGNORE) for row in params.product_selectors),
        default=0,
    )


def count_ppo(params: ParameterAssignment) -> int:
    """Products per output: maximum count of linked, non-constant products in any sum."""
    _require_family(params, TemplateFamily.NONSHARED)
    best = 0
    for row in params.output_links:
        c = sum(
            1 for t, linked in enumerate(row) if linked and not _is_constant_product(params, t)
        )
        best = max(best, c)
    return best


def count_pit(params: ParameterAssignment) -> int:
    """Products in total: products feeding at least one sum."""
    _require_family(params, TemplateFamily.SHARED)
    return len(params.linked_products())


def count_its(params: ParameterAssignment) -> int:
    """Inputs to sums: total number of product-to-sum connections."""
    _require_family(params, TemplateFamily.SHARED)
    return sum(sum(1 for linked in row if linked) for row in params.output_links)


def proxy_values(params: ParameterAssignment) -> tuple[int, int]:
    """(LPP, PPO) for nonshared params, (PIT, ITS) for shared params."""
    if params.family is TemplateFamily.SHARED:
        return count_pit(params), count_its(params)
    return count_lpp(params), count_ppo(params)


def satisfies(params: ParameterAssignment, bounds: ProxyBounds) -> bool:
    if bounds.family is not params.family:
        raise FamilyMismatchError(
            f"bounds are {bounds.family.value}, params are {params.family.value}"
        )
    a, b = proxy_values(params)
    return a <= bounds.bound_a and b <= bounds.bound_b


# ---------------------------------------------------------------------------
# Random sampling
# ---------------------------------------------------------------------------


def random_assignment(template: Template, bounds: ProxyBounds, rng_seed: int) -> ParameterAssignment:
    """Sample an assignment uniformly among those satisfying the bounds.

    Deterministic for a fixed seed. Shared-family bounds that allow
    connections but no products (PIT bound 0 with ITS bound > 0) are rejected,
    mirroring the vacuous-cell pruning of exploration schedules.
    """
    if bounds.family is not template.family:
        raise FamilyMismatchError(
            f"bounds are {bounds.family.value}, template is {template.family.value}"
        )
    if bounds.family is TemplateFamily.SHARED and bounds.bound_a == 0 and bounds.bound_b > 0:
        raise InfeasibleBoundsError(
            f"ITS bound {bounds.bound_b} cannot be exercised when the PIT bound is 0"
        )
    rng = Random(rng_seed)
    if isinstance(template, SharedTemplate):
        return _random_shared(template, bounds, rng)
    return _random_nonshared(template, bounds, rng)


def _random_shared(tp: SharedTemplate, bounds: ProxyBounds, rng: Random) -> ParameterAssignment:
    # Selectors and constants are unconstrained by (PIT, ITS); links are sampled
    # exactly uniformly over matrices within the bounds via a counting walk.
    selectors = tuple(
        tuple(rng.choice((Selector.PASS, Selector.NEGATE, Selector.IGNORE)) for _ in range(tp.n))
        for _ in range(tp.t)
    )
    columns = _sample_link_columns(tp.t, tp.m, bounds.bound_a, bounds.bound_b, rng)
    # columns are per-product output sets; links are indexed [output][product]
    links = tuple(tuple(columns[t][i] for t in range(tp.t)) for i in range(tp.m))
    constants = tuple(rng.random() < 0.5 for _ in range(tp.m))
    return ParameterAssignment(tp, selectors, links, constants)


def _sample_link_columns(total: int, m: int, max_products: int, max_links: int, rng: Random):
    """Uniform sample of per-product link columns with at most max_products
    nonempty columns and at most max_links links overall."""
    cache: dict[tuple[int, int, int], int] = {}

    def ways(t: int, used_p: int, used_s: int) -> int:
        if used_p > max_products or used_s > max_links:
            return 0
        if t == total:
            return 1
        key = (t, used_p, used_s)
        if key not in cache:
            acc = ways(t + 1, used_p, used_s)
            for c in range(1, m + 1):
                acc += comb(m, c) * ways(t + 1, used_p + 1, used_s + c)
            cache[key] = acc
        return cache[key]

    columns = []
    used_p = used_s = 0
    for t in range(total):
        r = rng.randrange(ways(t, used_p, used_s))
        r -= ways(t + 1, used_p, used_s)
        if r < 0:
            columns.append(tuple(False for _ in range(m)))
            continue
        for c in range(1, m + 1):
            w = comb(m, c) * ways(t + 1, used_p + 1, used_s + c)
            if r < w:
                chosen = rng.sample(range(m), c)
                columns.append(tuple(i in chosen for i in range(m)))
                used_p += 1
                used_s += c
                break
            r -= w
    return columns


def _random_selector_row(n: int, max_literals: int, rng: Random) -> tuple[Selector, ...]:
    weights = [comb(n, c) * (2**c) for c in range(min(max_literals, n) + 1)]
    r = rng.randrange(sum(weights))
    count = 0
    for c, w in enumerate(weights):
        if r < w:
            count = c
            break
        r -= w
    positions = set(rng.sample(range(n), count))
    return tuple(
        (Selector.PASS if rng.random() < 0.5 else Selector.NEGATE)
        if j in positions
        else Selector.IGNORE
        for j in range(n)
    )


def _random_nonshared(tp: NonsharedTemplate, bounds: ProxyBounds, rng: Random) -> ParameterAssignment:
    selectors = tuple(
        _random_selector_row(tp.n, bounds.bound_a, rng) for _ in range(tp.total_products)
    )
    links = [[False] * tp.total_products for _ in range(tp.m)]
    for i in range(tp.m):
        block = list(tp.block(i))
        weights = [comb(len(block), c) for c in range(min(bounds.bound_b, len(block)) + 1)]
        r = rng.randrange(sum(weights))
        size = 0
        for c, w in enumerate(weights):
            if r < w:
                size = c
                break
            r -= w
        for t in rng.sample(block, size):
            links[i][t] = True
    constants = tuple(rng.random() < 0.5 for _ in range(tp.m))
    return ParameterAssignment(tp, selectors, tuple(tuple(row) for row in links), constants)


# ---------------------------------------------------------------------------
# Family conversion and cube-list construction
# ---------------------------------------------------------------------------


def as_shared(params: ParameterAssignment) -> ParameterAssignment:
    """Embed a nonshared assignment into the shared family (T = m*K, same links)."""
    _require_family(params, TemplateFamily.NONSHARED)
    tp = params.template
    shared = SharedTemplate(tp.n, tp.m, tp.total_products)
    return ParameterAssignment(
        shared, params.product_selectors, params.output_links, params.output_constants
    )


def cube_to_selectors(cube: str) -> tuple[Selector, ...]:
    try:
        return tuple(_SELECTOR_BY_CHAR[ch] for ch in cube)
    except KeyError as exc:
        raise ParameterShapeError(f"invalid cube character in {cube!r}") from exc


def assignment_from_cubes(
    template: Template,
    cubes_per_output: list[list[str]],
    constants: tuple[bool, ...] | None = None,
) -> ParameterAssignment:
    """Build an assignment from explicit per-output cube lists.

    Shared family: identical cubes used by several outputs are merged into a
    single linked product. Nonshared family: each output's cubes fill its own
    block. Raises ParameterShapeError if the cubes do not fit the template.
    """
    m = template.m
    if len(cubes_per_output) != m:
        raise ParameterShapeError(f"expected {m} cube lists, got {len(cubes_per_output)}")
    constants = constants if constants is not None else tuple(False for _ in range(m))
    total = template.total_products
    selectors = [tuple(Selector.IGNORE for _ in range(template.n)) for _ in range(total)]
    links = [[False] * total for _ in range(m)]

    if isinstance(template, SharedTemplate):
        index: dict[str, int] = {}
        for i, cubes in enumerate(cubes_per_output):
            for cube in cubes:
                if cube not in index:
                    if len(index) >= total:
                        raise ParameterShapeError(
                            f"{len(index) + 1} distinct cubes exceed template capacity {total}"
                        )
                    index[cube] = len(index)
                    selectors[index[cube]] = cube_to_selectors(cube)
                links[i][index[cube]] = True
    else:
        for i, cubes in enumerate(cubes_per_output):
            if len(cubes) > template.k:
                raise ParameterShapeError(
                    f"output {i} uses {len(cubes)} cubes, block holds {template.k}"
                )
            for offset, cube in enumerate(cubes):
                t = i * template.k + offset
                selectors[t] = cube_to_selectors(cube)
                links[i][t] = True
    return ParameterAssignment(
        template, tuple(selectors), tuple(tuple(row) for row in links), constants
    )


# ---------------------------------------------------------------------------
# Text serialisation
# ---------------------------------------------------------------------------


def format_assignment(params: ParameterAssignment) -> str:
    """Stable text form of an assignment (grammar documented in the README)."""
    tp = params.template
    lines = [f".family {tp.family.value}"]
    if isinstance(tp, SharedTemplate):
        lines.append(f".template n {tp.n} m {tp.m} t {tp.t}")
    else:
        lines.append(f".template n {tp.n} m {tp.m} k {tp.k}")
    for t in range(tp.total_products):
        lines.append(f".product {t} {params.cube(t)}")
    for i in range(tp.m):
        linked = [str(t) for t in range(tp.total_products) if params.output_links[i][t]]
        flag = 1 if params.output_constants[i] else 0
        lines.append(f".sum {i} const {flag} products {' '.join(linked)}".rstrip())
    lines.append(".end")
    return "\n".join(lines) + "\n"


def parse_assignment(text: str) -> ParameterAssignment:
    family = None
    template: Template | None = None
    cubes: dict[int, str] = {}
    sums: dict[int, tuple[bool, list[int]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        if key == ".family":
            try:
                family = TemplateFamily(parts[1])
            except (IndexError, ValueError):
                raise NetlistSyntaxError("expected '.family shared|nonshared'", lineno)
        elif key == ".template":
            if family is None:
                raise NetlistSyntaxError(".family must precede .template", lineno)
            fields = dict(zip(parts[1::2], parts[2::2]))
            try:
                if family is TemplateFamily.SHARED:
                    template = SharedTemplate(int(fields["n"]), int(fields["m"]), int(fields["t"]))
                else:
                    template = NonsharedTemplate(
                        int(fields["n"]), int(fields["m"]), int(fields["k"])
                    )
            except (KeyError, ValueError):
                raise NetlistSyntaxError(f"malformed .template line {line!r}", lineno)
        elif key == ".product":
            if template is None:
                raise NetlistSyntaxError(".template must precede .product", lineno)
            if len(parts) != 3 or len(parts[2]) != template.n:
                raise NetlistSyntaxError(f"malformed .product line {line!r}", lineno)
            cubes[int(parts[1])] = parts[2]
        elif key == ".sum":
            if template is None:
                raise NetlistSyntaxError(".template must precede .sum", lineno)
            try:
                i = int(parts[1])
                assert parts[2] == "const"
                const = bool(int(parts[3]))
                assert parts[4:5] == ["products"] or len(parts) == 4
                linked = [int(tok) for tok in parts[5:]]
            except (AssertionError, IndexError, ValueError):
                raise NetlistSyntaxError(f"malformed .sum line {line!r}", lineno)
            sums[i] = (const, linked)
        elif key == ".end":
            break
        else:
            raise NetlistSyntaxError(f"unknown directive {key!r}", lineno)
    if template is None:
        raise NetlistSyntaxError("missing .template line", 1)
    total = template.total_products
    selectors = []
    for t in range(total):
        cube = cubes.get(t, Selector.IGNORE.value * template.n)
        selectors.append(cube_to_selectors(cube))
    links = []
    constants = []
    for i in range(template.m):
        const, linked = sums.get(i, (False, []))
        links.append(tuple(t in linked for t in range(total)))
        constants.append(const)
    return ParameterAssignment(template, tuple(selectors), tuple(links), tuple(constants))
