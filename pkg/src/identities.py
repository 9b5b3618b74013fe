"""Lattice terms, identities and the exhaustive identity checker.

Terms are immutable trees of Variable, Meet and Join nodes. For checking, the
two sides of an identity are compiled into one straight-line program over
binary meets and joins (shared subterms are compiled once) and run on numpy
arrays of element ids through the lattice's operation tables.

Assignments are enumerated as a mixed-radix counter with variable 0 slowest,
so the first failing assignment found is the lexicographically least one.
Work is sharded on the first two variables; shards run in order, either in
this process or in a multiprocessing pool, and the first failing shard wins.
"""

import itertools
import logging
import math
import re
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Any, Iterable, Optional, Protocol, Sequence, Union

import numpy as np

from cambrian import CambrianSpec, build_cambrian, ji_element, tamari
from config import DEFAULT_EVALUATION_BUDGET
from errors import ArityMismatchError, BadParamsError, BudgetExceededError, ParseError
from lattice import FiniteLattice
from weak_order import PairSet, PairSetAlgebra, closure

logger = logging.getLogger(__name__)

CHUNK = 1 << 16
MEET, JOIN = 0, 1


@dataclass(frozen=True)
class Variable:
    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("variable indices start at 0")


@dataclass(frozen=True)
class Meet:
    args: tuple["Term", ...]

    def __post_init__(self) -> None:
        if len(self.args) < 2:
            raise ValueError("a meet needs at least two arguments")


@dataclass(frozen=True)
class Join:
    args: tuple["Term", ...]

    def __post_init__(self) -> None:
        if len(self.args) < 2:
            raise ValueError("a join needs at least two arguments")


Term = Union[Variable, Meet, Join]


def meet_of(*terms: Term) -> Term:
    """Meet of the distinct given terms; a single term is returned unchanged."""
    unique = tuple(dict.fromkeys(terms))
    return unique[0] if len(unique) == 1 else Meet(unique)


def join_of(*terms: Term) -> Term:
    unique = tuple(dict.fromkeys(terms))
    return unique[0] if len(unique) == 1 else Join(unique)


@dataclass(frozen=True)
class Identity:
    """lhs <= rhs (relation "leq") or lhs = rhs (relation "eq")."""

    lhs: Term
    rhs: Term
    relation: str
    varcount: int
    name: str = ""

    def __post_init__(self) -> None:
        if self.relation not in ("leq", "eq"):
            raise ValueError(f"unknown relation {self.relation!r}")
        used = max(max_variable(self.lhs), max_variable(self.rhs))
        if used >= self.varcount:
            raise ArityMismatchError(
                f"identity uses x{used} but declares {self.varcount} variables"
            )


def max_variable(term: Term) -> int:
    if isinstance(term, Variable):
        return term.index
    return max(max_variable(arg) for arg in term.args)


def dual_term(term: Term) -> Term:
    """Swap meets and joins."""
    if isinstance(term, Variable):
        return term
    args = tuple(dual_term(arg) for arg in term.args)
    return Join(args) if isinstance(term, Meet) else Meet(args)


def dual_identity(identity: Identity) -> Identity:
    """The identity holding in exactly the duals of the lattices satisfying the given one."""
    if identity.relation == "leq":
        return Identity(
            dual_term(identity.rhs), dual_term(identity.lhs), "leq",
            identity.varcount, f"dual {identity.name}".strip(),
        )
    return Identity(
        dual_term(identity.lhs), dual_term(identity.rhs), "eq",
        identity.varcount, f"dual {identity.name}".strip(),
    )


def substitute(term: Term, mapping: Sequence[int]) -> Term:
    """Rename variable i to variable mapping[i]."""
    if isinstance(term, Variable):
        return Variable(mapping[term.index])
    args = tuple(substitute(arg, mapping) for arg in term.args)
    return meet_of(*args) if isinstance(term, Meet) else join_of(*args)


def substitute_identity(identity: Identity, mapping: Sequence[int], varcount: int) -> Identity:
    return Identity(
        substitute(identity.lhs, mapping), substitute(identity.rhs, mapping),
        identity.relation, varcount, identity.name,
    )


# -- text format ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def format_term(term: Term) -> str:
    if isinstance(term, Variable):
        return f"x{term.index}"
    head = "meet" if isinstance(term, Meet) else "join"
    return f"({head} " + " ".join(format_term(arg) for arg in term.args) + ")"


def parse_term(text: str) -> Term:
    """Parse "(meet (join x0 x1) x2)"-style text.

    Raises:
        ParseError: On malformed input.
    """
    tokens = _TOKEN.findall(text)
    if "".join(tokens) != re.sub(r"\s+", "", text):
        raise ParseError(f"unexpected characters in term {text!r}")
    term, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise ParseError(f"trailing input after term in {text!r}")
    return term


def _parse(tokens: list[str], pos: int) -> tuple[Term, int]:
    if pos >= len(tokens):
        raise ParseError("unexpected end of term")
    token = tokens[pos]
    if token == "(":
        if pos + 1 >= len(tokens) or tokens[pos + 1] not in ("meet", "join"):
            raise ParseError("expected 'meet' or 'join' after '('")
        head = tokens[pos + 1]
        pos += 2
        args = []
        while pos < len(tokens) and tokens[pos] != ")":
            arg, pos = _parse(tokens, pos)
            args.append(arg)
        if pos >= len(tokens):
            raise ParseError("missing ')'")
        if len(args) < 2:
            raise ParseError(f"'{head}' needs at least two arguments")
        node = Meet(tuple(args)) if head == "meet" else Join(tuple(args))
        return node, pos + 1
    match = re.fullmatch(r"x(\d+)", token)
    if not match:
        raise ParseError(f"unexpected token {token!r}")
    return Variable(int(match.group(1))), pos + 1


def identity_from_dict(data: dict[str, Any]) -> Identity:
    try:
        return Identity(
            parse_term(data["lhs"]), parse_term(data["rhs"]),
            data.get("rel", "leq"), int(data["vars"]), data.get("name", ""),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"invalid identity description: {e}") from e


def identity_to_dict(identity: Identity) -> dict[str, Any]:
    return {
        "name": identity.name,
        "vars": identity.varcount,
        "lhs": format_term(identity.lhs),
        "rhs": format_term(identity.rhs),
        "rel": identity.relation,
    }


# -- evaluation -------------------------------------------------------------------


class LatticeOperations(Protocol):
    def meet(self, x: Any, y: Any) -> Any: ...

    def join(self, x: Any, y: Any) -> Any: ...


def eval_term(term: Term, lattice: LatticeOperations, assignment: Sequence[Any]) -> Any:
    """Evaluate bottom-up; repeated subterms are computed once.

    Raises:
        ArityMismatchError: If the term uses a variable the assignment lacks.
    """
    if max_variable(term) >= len(assignment):
        raise ArityMismatchError(
            f"term uses x{max_variable(term)} but only {len(assignment)} values were given"
        )
    cache: dict[Term, Any] = {}

    def walk(node: Term) -> Any:
        if isinstance(node, Variable):
            return assignment[node.index]
        if node in cache:
            return cache[node]
        values = [walk(arg) for arg in node.args]
        result = values[0]
        combine = lattice.meet if isinstance(node, Meet) else lattice.join
        for value in values[1:]:
            result = combine(result, value)
        cache[node] = result
        return result

    return walk(term)


def eval_identity(
    identity: Identity, lattice: LatticeOperations, assignment: Sequence[Any]
) -> tuple[Any, Any]:
    if len(assignment) != identity.varcount:
        raise ArityMismatchError(
            f"{identity.varcount} values expected, {len(assignment)} given"
        )
    return eval_term(identity.lhs, lattice, assignment), eval_term(identity.rhs, lattice, assignment)


@dataclass(frozen=True)
class Program:
    """Straight-line code: slots 0..varcount-1 hold variables, op k writes slot varcount + k."""

    varcount: int
    ops: tuple[tuple[int, int, int], ...]
    lhs: int
    rhs: int
    relation: str


def compile_identity(identity: Identity) -> Program:
    slots: dict[Term, int] = {Variable(i): i for i in range(identity.varcount)}
    ops: list[tuple[int, int, int]] = []

    def emit(node: Term) -> int:
        if node in slots:
            return slots[node]
        code = MEET if isinstance(node, Meet) else JOIN
        current = emit(node.args[0])
        for arg in node.args[1:]:
            ops.append((code, current, emit(arg)))
            current = identity.varcount + len(ops) - 1
        slots[node] = current
        return current

    lhs = emit(identity.lhs)
    rhs = emit(identity.rhs)
    return Program(identity.varcount, tuple(ops), lhs, rhs, identity.relation)


@dataclass
class Verdict:
    holds: bool
    counterexample: Optional[tuple[int, ...]] = None
    lhs_value: Optional[int] = None
    rhs_value: Optional[int] = None
    evaluations: int = 0


@dataclass
class _ScanState:
    program: Program
    meet: np.ndarray
    join: np.ndarray
    order: np.ndarray
    size: int
    shard_vars: int


_WORKER_STATE: Optional[_ScanState] = None


def _init_worker(state: _ScanState) -> None:
    global _WORKER_STATE
    _WORKER_STATE = state


def _run_program(state: _ScanState, columns: list[Any]) -> tuple[Any, Any]:
    slots = list(columns)
    for code, a, b in state.program.ops:
        table = state.meet if code == MEET else state.join
        slots.append(table[slots[a], slots[b]])
    return slots[state.program.lhs], slots[state.program.rhs]


def _scan_shard(state: _ScanState, shard: int) -> Optional[tuple[int, ...]]:
    """Least failing assignment inside one shard, or None."""
    size, k, s = state.size, state.program.varcount, state.shard_vars
    fixed = list(np.unravel_index(shard, (size,) * s)) if s else []
    free = k - s
    total = size**free
    for start in range(0, total, CHUNK):
        stop = min(total, start + CHUNK)
        flat = np.arange(start, stop, dtype=np.int64)
        if free:
            columns = [int(v) for v in fixed] + list(np.unravel_index(flat, (size,) * free))
        else:
            columns = [int(v) for v in fixed]
        lhs, rhs = _run_program(state, columns)
        if state.program.relation == "leq":
            good = state.order[lhs, rhs]
        else:
            good = lhs == rhs
        good = np.broadcast_to(good, flat.shape)
        if not good.all():
            pos = int(np.argmin(good))
            rest = [int(column[pos]) if np.ndim(column) else int(column) for column in columns[s:]]
            return tuple(int(v) for v in fixed) + tuple(rest)
    return None


def _scan_shard_in_worker(shard: int) -> Optional[tuple[int, ...]]:
    return _scan_shard(_WORKER_STATE, shard)


def _evaluations(identity: Identity, program: Program, size: int, budget: int) -> int:
    evaluations = size**identity.varcount * max(1, len(program.ops))
    if evaluations > budget:
        raise BudgetExceededError(
            f"{identity.name or 'identity'} on {size} elements needs {evaluations:.3g} "
            f"evaluations, budget is {budget:.3g}"
        )
    return evaluations


def holds(
    lattice: FiniteLattice,
    identity: Identity,
    parallel: bool = False,
    threads: int = 1,
    budget: int = DEFAULT_EVALUATION_BUDGET,
) -> Verdict:
    """Check the identity on every assignment.

    Raises:
        BudgetExceededError: If |L|^varcount times the program length exceeds budget.
    """
    program = compile_identity(identity)
    size, k = lattice.size, identity.varcount
    evaluations = _evaluations(identity, program, size, budget)
    meet, join = lattice.operation_tables()
    shard_vars = min(2, k)
    state = _ScanState(program, meet, join, lattice.order, size, shard_vars)
    shards = range(size**shard_vars)
    started = time.monotonic()
    logger.info(
        f"Checking {identity.name or 'identity'} on {size} elements: "
        f"{size**k} assignments, {len(program.ops)} operations"
    )

    found: Optional[tuple[int, ...]] = None
    if parallel and threads > 1 and len(shards) > 1:
        with Pool(threads, initializer=_init_worker, initargs=(state,)) as pool:
            for result in pool.imap(_scan_shard_in_worker, shards, chunksize=max(1, len(shards) // (threads * 8))):
                if result is not None:
                    found = result
                    break
    else:
        for shard in shards:
            found = _scan_shard(state, shard)
            if found is not None:
                break

    elapsed = time.monotonic() - started
    if found is None:
        logger.info(f"{identity.name or 'identity'} holds ({elapsed:.2f}s)")
        return Verdict(True, evaluations=evaluations)
    lhs, rhs = eval_identity(identity, lattice, found)
    logger.info(f"{identity.name or 'identity'} fails at {found} ({elapsed:.2f}s)")
    return Verdict(False, found, lhs, rhs, evaluations)


def failure_mask(
    lattice: FiniteLattice, identity: Identity, budget: int = DEFAULT_EVALUATION_BUDGET
) -> np.ndarray:
    """Boolean array over all assignments in lexicographic order, True where the identity fails.

    Raises:
        BudgetExceededError: If |L|^varcount times the program length exceeds budget.
    """
    program = compile_identity(identity)
    size, k = lattice.size, identity.varcount
    _evaluations(identity, program, size, budget)
    meet, join = lattice.operation_tables()
    state = _ScanState(program, meet, join, lattice.order, size, 0)
    flat = np.arange(size**k, dtype=np.int64)
    columns = list(np.unravel_index(flat, (size,) * k)) if k else []
    lhs, rhs = _run_program(state, columns)
    good = state.order[lhs, rhs] if program.relation == "leq" else lhs == rhs
    return ~np.broadcast_to(good, flat.shape)


# -- named identities ---------------------------------------------------------------


def _variables(count: int, offset: int = 0) -> list[Variable]:
    return [Variable(offset + i) for i in range(count)]


def veg1() -> Identity:
    """(a1 ∨ b1) ∧ (a2 ∨ b2) <= ((a1 ∨ b1) ∧ (a1 ∨ b̃2)) ∨ ((a2 ∨ b̃1) ∧ (a2 ∨ b2)).

    Variables: a1, a2, b1, b2 = x0..x3, and b̃i = (b1 ∨ b2) ∧ (ai ∨ bi).
    """
    a1, a2, b1, b2 = _variables(4)
    ab1, ab2 = Join((a1, b1)), Join((a2, b2))
    bb = Join((b1, b2))
    bt1, bt2 = Meet((bb, ab1)), Meet((bb, ab2))
    lhs = Meet((ab1, ab2))
    rhs = Join((Meet((ab1, Join((a1, bt2)))), Meet((Join((a2, bt1)), ab2))))
    return Identity(lhs, rhs, "leq", 4, "veg1")


def veg2() -> Identity:
    """(a1 ∨ a2 ∨ b1) ∧ (a1 ∨ a2 ∨ b2) = ⋁ ((ai ∨ b̃j) ∧ (a1 ∨ a2 ∨ b_{3-j})).

    Variables: a1, a2, b1, b2 = x0..x3, and b̃j = (b1 ∨ b2) ∧ (a1 ∨ a2 ∨ bj).
    """
    a1, a2, b1, b2 = _variables(4)
    a = (a1, a2)
    b = (b1, b2)
    aab = [Join((a1, a2, bj)) for bj in b]
    bb = Join((b1, b2))
    bt = [Meet((bb, aab[j])) for j in range(2)]
    lhs = Meet((aab[0], aab[1]))
    rhs = Join(tuple(Meet((Join((a[i], bt[j])), aab[1 - j])) for i in range(2) for j in range(2)))
    return Identity(lhs, rhs, "eq", 4, "veg2")


def splitting_b33() -> Identity:
    """⋀_j (x1 ∨ x2 ∨ x3 ∨ yj) <= ⋁_i (x̂i ∧ ŷ1 ∧ ŷ2 ∧ ŷ3).

    Variables: x1, x2, x3, y1, y2, y3 = x0..x5, with
    x̂i = x_i' ∨ x_i'' ∨ (y1 ∨ y2 ∨ y3) and ŷi = y_i' ∨ y_i'' ∨ (x1 ∨ x2 ∨ x3),
    where {i, i', i''} = {1, 2, 3}.
    """
    xs = _variables(3)
    ys = _variables(3, 3)
    x_all, y_all = Join(tuple(xs)), Join(tuple(ys))
    lhs = Meet(tuple(Join((*xs, y)) for y in ys))
    others = [[j for j in range(3) if j != i] for i in range(3)]
    x_hat = [Join((xs[o[0]], xs[o[1]], y_all)) for o in others]
    y_hat = [Join((ys[o[0]], ys[o[1]], x_all)) for o in others]
    rhs = Join(tuple(Meet((x_hat[i], *y_hat)) for i in range(3)))
    return Identity(lhs, rhs, "leq", 6, "split-b33")


@dataclass(frozen=True)
class GazpachoIndex:
    m: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.m) < 2 or any(mi < 1 for mi in self.m):
            raise BadParamsError(f"gazpacho index needs d >= 2 positive entries, got {self.m}")

    @classmethod
    def parse(cls, text: str) -> "GazpachoIndex":
        try:
            return cls(tuple(int(part) for part in text.split(",")))
        except ValueError as e:
            raise BadParamsError(f"invalid gazpacho index {text!r}") from e

    def __str__(self) -> str:
        return f"Gzp({','.join(map(str, self.m))})"


def gazpacho(index: Union[GazpachoIndex, Sequence[int]], max_branches: int = 100_000) -> Identity:
    """The Gazpacho identity e <= e* ∨ ⋁ f_2^{σ,τ} over σ in S_d and τ in ∏[m_i].

    Variables: a_{i,j} in order (i, j), then b_1..b_d.

    Raises:
        BudgetExceededError: If d! * ∏ m_i exceeds max_branches.
    """
    if not isinstance(index, GazpachoIndex):
        index = GazpachoIndex(tuple(index))
    m = index.m
    d = len(m)
    branches = math.factorial(d) * math.prod(m)
    if branches > max_branches:
        raise BudgetExceededError(f"{index} has {branches} branches, limit is {max_branches}")

    offsets = list(itertools.accumulate(m, initial=0))
    a_var = [[Variable(offsets[i] + j) for j in range(m[i])] for i in range(d)]
    b_var = _variables(d, offsets[-1])
    a = [join_of(*a_var[i]) for i in range(d)]
    big_b = join_of(*b_var)
    ab = [Join((a[i], b_var[i])) for i in range(d)]
    b_tilde = [Meet((big_b, ab[i])) for i in range(d)]
    e = meet_of(*ab)
    e_star = Meet((big_b, e))

    memo: dict[tuple, Term] = {}

    def f(k: int, sigma: tuple[int, ...], tau: tuple[int, ...]) -> Term:
        key = (k, sigma[0], sigma[k:], tuple(tau[v] for v in sigma[k:]))
        if key in memo:
            return memo[key]
        s = sigma[k]
        pick = a_var[s][tau[s]]
        parts = [Join((pick, b_tilde[sigma[0]])), ab[s]]
        parts += [Join((pick, f(j, sigma, tau))) for j in range(k + 1, d)]
        memo[key] = meet_of(*parts)
        return memo[key]

    tails = [
        f(1, sigma, tau)
        for sigma in itertools.permutations(range(d))
        for tau in itertools.product(*(range(mi) for mi in m))
    ]
    rhs = join_of(e_star, *tails)
    return Identity(e, rhs, "leq", offsets[-1] + d, str(index))


def veg2_from_gazpacho() -> Identity:
    """Gzp(2,2) with a_{1,j} and a_{2,j} both renamed a_j, in the variable order of veg2()."""
    identity = substitute_identity(gazpacho((2, 2)), (0, 1, 0, 1, 2, 3), 4)
    return Identity(identity.lhs, identity.rhs, identity.relation, 4, "gzp(2,2) with a_ij = a_j")


def named_identity(name: str) -> Identity:
    """veg1, veg2 or split-b33.

    Raises:
        BadParamsError: For unknown names.
    """
    builders = {"veg1": veg1, "veg2": veg2, "split-b33": splitting_b33}
    if name not in builders:
        raise BadParamsError(f"unknown identity {name!r}; expected one of {sorted(builders)}")
    return builders[name]()


# -- the A_U(12) witness ---------------------------------------------------------------

WITNESS_U = (5, 6, 9, 10, 11)
WITNESS_GENERATORS = {
    "a1": ((1, 5), (2, 3), (8, 12), (10, 11)),
    "a2": ((3, 4), (5, 9)),
    "a3": ((4, 8), (9, 10)),
    "b1": ((1, 2),),
    "b2": ((6, 7),),
    "b3": ((11, 12),),
}
WITNESS_SUBDIVISIONS = (
    ((1, 2, 3, 4, 8, 12), ("b1", "a1", "a2", "a3", "a1")),
    ((1, 5, 6, 7, 8, 12), ("a1", "a2", "b2", "a3", "a1")),
    ((1, 5, 9, 10, 11, 12), ("a1", "a2", "a3", "a1", "b3")),
)


@dataclass
class WitnessReport:
    lhs: Any
    rhs: Any
    pair_in_lhs: bool
    pair_in_rhs: bool
    subdivisions_valid: list[bool] = field(default_factory=list)

    @property
    def confirms_failure(self) -> bool:
        return self.pair_in_lhs and not self.pair_in_rhs and all(self.subdivisions_valid)


def witness_elements() -> dict[str, Any]:
    spec = CambrianSpec.of(12, WITNESS_U)
    values = {}
    for name, pairs in WITNESS_GENERATORS.items():
        bits = 0
        for i, j in pairs:
            bits |= ji_element(spec, i, j).bits
        values[name] = closure(PairSet(12, bits))
    return values


def eval_witness_12(identity: Optional[Identity] = None) -> WitnessReport:
    """Evaluate the B(3,3) splitting identity at the six witness elements of A_U(12)."""
    identity = identity or splitting_b33()
    values = witness_elements()
    assignment = [values[k] for k in ("a1", "a2", "a3", "b1", "b2", "b3")]
    lhs, rhs = eval_identity(identity, PairSetAlgebra(12), assignment)
    checks = []
    for chain_, labels in WITNESS_SUBDIVISIONS:
        steps = zip(chain_, chain_[1:])
        checks.append(all(step in values[label] for step, label in zip(steps, labels)))
    return WitnessReport(lhs, rhs, (1, 12) in lhs, (1, 12) in rhs, checks)


# -- the Gazpacho family on Tamari lattices ----------------------------------------------


@dataclass
class FamilyCase:
    index: str
    lattice: str
    verdict: Verdict


@dataclass
class FamilyReport:
    cases: list[FamilyCase] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(case.verdict.holds for case in self.cases)


def check_gazpacho_family(
    n_max: int = 5,
    budget: int = DEFAULT_EVALUATION_BUDGET,
    parallel: bool = True,
    threads: int = 1,
) -> FamilyReport:
    """Gzp(1,1) and Gzp(2,1) on A(n) for 3 <= n <= n_max; Gzp(2,2) and Gzp(1,1,1) on A(4)."""
    plan: list[tuple[tuple[int, ...], int]] = []
    for n in range(3, n_max + 1):
        plan.append(((1, 1), n))
        plan.append(((2, 1), n))
    if n_max >= 4:
        plan += [((2, 2), 4), ((1, 1, 1), 4)]
    report = FamilyReport()
    lattices: dict[int, FiniteLattice] = {}
    for m, n in plan:
        if n not in lattices:
            lattices[n] = build_cambrian(tamari(n))
        identity = gazpacho(m)
        verdict = holds(lattices[n], identity, parallel=parallel, threads=threads, budget=budget)
        report.cases.append(FamilyCase(identity.name, f"A({n})", verdict))
    return report
