"""The reproduce battery: every claim re-derived from scratch.

Each claim is a function returning (passed, detail). Claims run in a fixed
order, each timed and logged; an exception inside a claim fails that claim
only. The report lists claim id, topic, verdict and wall time.
"""

import logging
import math
import random
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from bmn import bmn_dual_iso, build_bmn
from cambrian import (
    CambrianSpec,
    all_specs,
    build_bracket_lattice,
    build_cambrian,
    bracket_dual,
    cambrian_congruence,
    cambrian_duality,
    diagonal_is_injective,
    enumerate_brackets,
    from_bracket,
    ji_element,
    kernel_pi_u,
    pi_u,
    projection,
    subdirect_decomposition,
    tamari,
    three_generated_size,
    to_bracket,
    top_triple,
)
from config import Config
from identities import (
    Identity,
    Join,
    check_gazpacho_family,
    eval_identity,
    eval_witness_12,
    failure_mask,
    holds,
    splitting_b33,
    veg1,
    veg2,
    veg2_from_gazpacho,
)
from lattice import (
    FiniteLattice,
    LatticeMap,
    boolean_lattice,
    chain,
    is_bounded,
    is_semidistributive,
    is_subdirectly_irreducible,
    m3,
    minimal_meet_irreducible_congruences,
    n5,
    psi,
    sublattice_closure,
    verify_embedding,
)
from measures import (
    bm0_embedding,
    bm1_measure,
    bm2_measure,
    cambrian_measure,
    embedding_from_measure,
    generator_embedding_search,
    hom_properties,
    hom_to_measure,
    measure_to_hom,
    random_dual_pair,
    si_embedding_scan,
    tamari_measure,
)
from weak_order import PairSet, PairSetAlgebra, build_permutohedron, closed_form_mismatches, triple_set
from weak_order import join as pairset_join

logger = logging.getLogger(__name__)

Outcome = tuple[bool, str]

# Size of the sublattice of A(n) generated by <1, n> and the even and odd adjacent pairs.
THREE_GENERATED_SIZES = {4: 10, 5: 12, 6: 14, 7: 16, 8: 18, 9: 20}


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


@dataclass
class ClaimResult:
    claim_id: str
    topic: str
    passed: bool
    seconds: float
    detail: str = ""


@dataclass
class ReproduceReport:
    claims: list[ClaimResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.claims) and all(c.passed for c in self.claims)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "passed": self.passed,
            "claims": [asdict(c) for c in self.claims],
        }

    def changes_since(self, previous: dict) -> list[str]:
        """Claims whose verdict differs from the previous report; claims absent there are skipped."""
        before = {
            c.get("claim_id"): c.get("passed")
            for c in previous.get("claims", [])
            if isinstance(c, dict)
        }
        changes = []
        for claim in self.claims:
            old = before.get(claim.claim_id)
            if old is None or bool(old) == claim.passed:
                continue
            changes.append(
                f"{claim.claim_id}: {'PASS' if old else 'FAIL'} -> {'PASS' if claim.passed else 'FAIL'}"
            )
        return changes


@dataclass
class ReproduceOptions:
    evaluation_budget: int
    search_budget: int
    parallel: bool = True
    threads: int = 1
    random_seed: int = 20240601
    duality_cases: int = 1000
    corrupt_splitting: bool = False

    @classmethod
    def from_config(cls, config: Config, **overrides) -> "ReproduceOptions":
        options = cls(
            evaluation_budget=config.evaluation_budget,
            search_budget=config.search_budget,
            threads=config.threads,
            random_seed=config.random_seed,
        )
        for key, value in overrides.items():
            setattr(options, key, value)
        return options


def _failures(checks: dict[str, bool]) -> Outcome:
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        return False, "failed: " + ", ".join(failed)
    return True, f"{len(checks)} checks"


# -- claims -----------------------------------------------------------------------


def claim_counts(options: ReproduceOptions) -> Outcome:
    checks = {}
    for n in range(1, 7):
        checks[f"|P({n})|"] = build_permutohedron(n).size == math.factorial(n)
        checks[f"|A({n})|"] = build_cambrian(tamari(n)).size == catalan(n)
    for spec in all_specs(4):
        checks[f"|{spec}|"] = build_cambrian(spec).size == 14
    for k in range(0, 9):
        for m in range(0, k + 1):
            checks[f"|B({m},{k - m})|"] = build_bmn(m, k - m).lattice.size == 2**k + 1
    return _failures(checks)


def claim_boundedness(options: ReproduceOptions) -> Outcome:
    checks = {}
    for n in range(1, 6):
        perm = build_permutohedron(n)
        checks[f"P({n}) bounded"] = is_bounded(perm)
        checks[f"P({n}) semidistributive"] = is_semidistributive(perm)
    checks["M3 not bounded"] = not is_bounded(m3())
    checks["N5 bounded"] = is_bounded(n5())
    return _failures(checks)


def claim_closed_forms(options: ReproduceOptions) -> Outcome:
    problems = []
    for n in range(2, 6):
        problems += closed_form_mismatches(n, check_covers=n <= 4)
    if problems:
        return False, f"{len(problems)} mismatches, first: {problems[0]}"
    return True, "formulas agree with brute force for n <= 5"


def _is_retraction(spec: CambrianSpec, perm: FiniteLattice, cambrian: FiniteLattice) -> bool:
    mapping = projection(spec, perm, cambrian)
    for x in range(perm.size):
        for y in range(x + 1, perm.size):
            if mapping(perm.meet(x, y)) != cambrian.meet(mapping(x), mapping(y)):
                return False
            if mapping(perm.join(x, y)) != cambrian.join(mapping(x), mapping(y)):
                return False
    return all(pi_u(spec, x) == x for x in cambrian.elements)


def claim_cambrian_structure(options: ReproduceOptions) -> Outcome:
    perm = build_permutohedron(4)
    checks = {}
    kernels = []
    for spec in all_specs(4):
        cambrian = build_cambrian(spec)
        members = {perm.index_of(x) for x in cambrian.elements}
        checks[f"{spec} sublattice"] = sublattice_closure(perm, members) == members
        checks[f"{spec} retraction"] = _is_retraction(spec, perm, cambrian)
        checks[f"{spec} subdirectly irreducible"] = is_subdirectly_irreducible(cambrian)
        kernel = kernel_pi_u(spec, perm)
        kernels.append(kernel)
        top = perm.index_of(ji_element(spec, 1, 4))
        checks[f"{spec} kernel is psi"] = kernel == psi(perm, top)
        checks[f"{spec} top triple"] = triple_set(top_triple(spec)) == ji_element(spec, 1, 4)
        checks[f"{spec} kernel is generated"] = kernel == cambrian_congruence(spec, perm)
        checks[f"{spec} duality"] = verify_embedding(cambrian_duality(spec))
    checks["diagonal injective"] = diagonal_is_injective(subdirect_decomposition(4, perm))
    minimal = minimal_meet_irreducible_congruences(perm)
    checks["minimal congruences are the kernels"] = set(minimal) == set(kernels)
    for n in range(1, 6):
        tam = build_cambrian(tamari(n))
        brackets = build_bracket_lattice(n)
        images = tuple(brackets.index_of(to_bracket(x)) for x in tam.elements)
        mapping = LatticeMap(tam, brackets, images)
        checks[f"A({n}) bracket round trip"] = all(
            from_bracket(to_bracket(x)) == x for x in tam.elements
        )
        checks[f"A({n}) ≅ bracket lattice"] = verify_embedding(mapping) and mapping.is_surjective()
        checks[f"bracket dual involution n={n}"] = all(
            bracket_dual(bracket_dual(f)) == f for f in enumerate_brackets(n)
        )
    return _failures(checks)


def claim_gazpacho(options: ReproduceOptions) -> Outcome:
    report = check_gazpacho_family(
        n_max=5, budget=options.evaluation_budget, parallel=options.parallel, threads=options.threads
    )
    failed = [f"{c.index} on {c.lattice}" for c in report.cases if not c.verdict.holds]
    if failed:
        return False, "fails: " + ", ".join(failed)
    return True, ", ".join(f"{c.index} on {c.lattice}" for c in report.cases)


VEG1_WITNESS = {"a1": (1, 3), "a2": (2, 4), "b1": (3, 4), "b2": (1, 2)}
VEG1_A1_JOIN_B1 = [(1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
VEG1_LHS = [(1, 3), (1, 4), (2, 3), (2, 4)]


def veg1_witness_values() -> list[PairSet]:
    spec = CambrianSpec.of(4, {3})
    return [ji_element(spec, *VEG1_WITNESS[k]) for k in ("a1", "a2", "b1", "b2")]


def claim_veg1_cambrian(options: ReproduceOptions) -> Outcome:
    identity = veg1()
    a1, a2, b1, b2 = veg1_witness_values()
    lhs, rhs = eval_identity(identity, PairSetAlgebra(4), [a1, a2, b1, b2])
    cambrian = build_cambrian(CambrianSpec.of(4, {3}))
    perm = build_permutohedron(4)
    checks = {
        "a1 ∨ b1": pairset_join(a1, b1) == PairSet.from_pairs(4, VEG1_A1_JOIN_B1),
        "lhs": lhs == PairSet.from_pairs(4, VEG1_LHS),
        "lhs not below rhs": not lhs <= rhs,
        "fails on A_{3}(4)": not holds(cambrian, identity, budget=options.evaluation_budget).holds,
        "fails on P(4)": not holds(perm, identity, budget=options.evaluation_budget).holds,
    }
    return _failures(checks)


def claim_veg2_bmn(options: ReproduceOptions) -> Outcome:
    b22 = build_bmn(2, 2)
    lat = b22.lattice
    atoms = [b22.element(a=(1,)), b22.element(a=(2,)), b22.element(b=(1,)), b22.element(b=(2,))]
    lhs, rhs = eval_identity(veg2(), lat, atoms)
    budget = options.evaluation_budget
    checks = {
        "veg2 lhs = p on B(2,2)": lhs == b22.p,
        "veg2 rhs = a1 ∨ a2 on B(2,2)": rhs == b22.element(a=(1, 2)),
        "veg2 fails on B(2,2)": not holds(lat, veg2(), budget=budget).holds,
        "veg2 holds on P(4)": holds(build_permutohedron(4), veg2(), budget=budget).holds,
        "gzp(2,2) with a_ij = a_j agrees with veg2 on B(2,2)": bool(
            (failure_mask(lat, veg2_from_gazpacho(), budget) == failure_mask(lat, veg2(), budget)).all()
        ),
    }
    for m in range(0, 4):
        for n in range(0, 4):
            if m == n == 0:
                continue
            checks[f"veg1 holds on B({m},{n})"] = holds(
                build_bmn(m, n).lattice, veg1(), parallel=options.parallel,
                threads=options.threads, budget=budget,
            ).holds
            checks[f"B({m},{n}) ≅ dual B({n},{m})"] = bmn_dual_iso(m, n).is_surjective()
    return _failures(checks)


def _duality_targets() -> list[FiniteLattice]:
    return [
        chain(2), chain(3), n5(), m3(), boolean_lattice(2),
        build_bmn(1, 1).lattice, build_cambrian(tamari(3)),
    ]


def claim_measure_duality(options: ReproduceOptions) -> Outcome:
    rng = random.Random(options.random_seed)
    targets = _duality_targets()
    specs = [spec for n in range(2, 6) for spec in all_specs(n)]
    cambrians = {spec: build_cambrian(spec) for spec in specs}
    failures = 0
    for _ in range(options.duality_cases):
        spec = rng.choice(specs)
        target = rng.choice(targets)
        mu, phi = random_dual_pair(spec, target, rng, cambrians[spec])
        again = measure_to_hom(mu, cambrians[spec])
        back = hom_to_measure(again, spec)
        if again.images != phi.images or not back.agrees_with(mu):
            failures += 1
            continue
        hom_properties(mu, phi)
    checks = {f"{options.duality_cases} random round trips": failures == 0}
    for spec in all_specs(3):
        mu = cambrian_measure(spec, ambient="permutohedron")
        checks[f"{spec} measure into P(3) not generating"] = not hom_properties(
            mu, measure_to_hom(mu)
        ).injective
    for n in range(2, 7):
        mu = tamari_measure(n)
        phi = measure_to_hom(mu)
        props = hom_properties(mu, phi)
        checks[f"A({n}) measure generates"] = props.injective and phi.is_surjective()
    return _failures(checks)


def claim_measure_embeddings(options: ReproduceOptions) -> Outcome:
    checks = {}
    for m in range(1, 5):
        checks[f"B({m},0) into A({m + 2})"] = verify_embedding(bm0_embedding(m))
        phi = embedding_from_measure(bm1_measure(m))
        checks[f"B({m},1) into A({m + 2})"] = phi.target.size == catalan(m + 2) and verify_embedding(phi)
    for m in range(1, 4):
        mu = bm2_measure(m)
        expected = CambrianSpec.of(2 * m + 2, range(m + 2, 2 * m + 2))
        checks[f"B({m},2) spec"] = mu.spec() == expected
        phi = embedding_from_measure(mu)
        props = hom_properties(mu, phi)
        checks[f"B({m},2) into {expected}"] = props.injective and props.lattice_hom
    return _failures(checks)


def claim_non_embedding(options: ReproduceOptions) -> Outcome:
    b22 = build_bmn(2, 2).lattice
    checks = {}
    for n in range(2, 6):
        found = si_embedding_scan(
            b22, n, budget=options.search_budget, parallel=options.parallel, threads=options.threads
        )
        checks[f"B(2,2) not into P({n})"] = found is None
    control = CambrianSpec.of(6, {4, 5})
    found = generator_embedding_search(
        b22, build_cambrian(control), budget=options.search_budget,
        parallel=options.parallel, threads=options.threads,
    )
    checks[f"B(2,2) into {control} by search"] = found is not None
    for spec in all_specs(3):
        found = generator_embedding_search(m3(), build_cambrian(spec), budget=options.search_budget)
        checks[f"M3 not into {spec}"] = found is None
    return _failures(checks)


def corrupted_splitting() -> Identity:
    """The splitting identity with its right side widened by its left side."""
    identity = splitting_b33()
    return Identity(
        identity.lhs, Join((identity.rhs, identity.lhs)), identity.relation,
        identity.varcount, "split-b33 (corrupted)",
    )


def claim_splitting(options: ReproduceOptions) -> Outcome:
    identity = corrupted_splitting() if options.corrupt_splitting else splitting_b33()
    witness = eval_witness_12(identity)
    b33 = build_bmn(3, 3)
    atoms = [b33.element(a=(i,)) for i in (1, 2, 3)] + [b33.element(b=(j,)) for j in (1, 2, 3)]
    lhs, rhs = eval_identity(identity, b33.lattice, atoms)
    checks = {
        "(1,12) in lhs": witness.pair_in_lhs,
        "(1,12) not in rhs": not witness.pair_in_rhs,
        "subdivisions valid": all(witness.subdivisions_valid),
        "B(3,3) lhs = p": lhs == b33.p,
        "B(3,3) rhs = a": rhs == b33.a,
    }
    return _failures(checks)


def claim_three_generated(options: ReproduceOptions) -> Outcome:
    checks = {}
    for n, expected in THREE_GENERATED_SIZES.items():
        size = three_generated_size(n)
        logger.info(f"A({n}): three-generated sublattice has {size} elements")
        checks[f"A({n}) three-generated size {size} == {expected}"] = size == expected
    return _failures(checks)


CLAIMS: list[tuple[str, str, Callable[[ReproduceOptions], Outcome]]] = [
    ("counts", "sizes of P(n), A(n), A_U(4) and B(m,n)", claim_counts),
    ("boundedness", "P(n) bounded and semidistributive; M3 unbounded; N5 bounded", claim_boundedness),
    ("closed-forms", "F_n formulas for covers, kappa, D and join-covers in P(n)", claim_closed_forms),
    ("cambrian-structure", "A_U(4) as sublattice, retract, quotient and dual; brackets", claim_cambrian_structure),
    ("gazpacho-tamari", "Gazpacho identities hold on small Tamari lattices", claim_gazpacho),
    ("veg1-cambrian", "veg1 fails on A_{3}(4) and P(4)", claim_veg1_cambrian),
    ("veg2-bmn", "veg2 fails on B(2,2), holds on P(4); veg1 holds on B(m,n)", claim_veg2_bmn),
    ("measure-duality", "measures and meet homomorphisms are dual", claim_measure_duality),
    ("measure-embeddings", "B(m,0), B(m,1), B(m,2) embed through measures", claim_measure_embeddings),
    ("non-embedding", "B(2,2) avoids P(n) for n <= 5 but reaches A_{4,5}(6); M3 avoids A_U(3)", claim_non_embedding),
    ("splitting-witness", "the B(3,3) splitting identity fails in A_U(12)", claim_splitting),
    ("three-generated", "3-generated sublattice sizes of A(n) for n = 4..9", claim_three_generated),
]


def run_reproduce(options: ReproduceOptions, only: Optional[list[str]] = None) -> ReproduceReport:
    """Run the claims in order; an exception fails its claim and the run continues."""
    report = ReproduceReport()
    for claim_id, topic, claim in CLAIMS:
        if only and claim_id not in only:
            continue
        logger.info(f"Claim {claim_id}: {topic}")
        started = time.monotonic()
        try:
            passed, detail = claim(options)
        except Exception as e:
            logger.error(f"Claim {claim_id} raised: {e}", exc_info=True)
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.monotonic() - started
        logger.info(f"Claim {claim_id}: {'pass' if passed else 'FAIL'} ({elapsed:.2f}s) {detail}")
        report.claims.append(ClaimResult(claim_id, topic, passed, round(elapsed, 3), detail))
    return report
