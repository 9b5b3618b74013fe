import random

import numpy as np
import pytest

from bmn import build_bmn
from cambrian import CambrianSpec, build_cambrian, projection
from conftest import SUITE
from errors import ArityMismatchError, BadParamsError, BudgetExceededError, ParseError
from identities import (
    GazpachoIndex,
    Identity,
    Join,
    Meet,
    Variable,
    check_gazpacho_family,
    compile_identity,
    dual_identity,
    eval_identity,
    eval_term,
    eval_witness_12,
    failure_mask,
    format_term,
    gazpacho,
    holds,
    identity_from_dict,
    identity_to_dict,
    join_of,
    named_identity,
    parse_term,
    splitting_b33,
    substitute,
    substitute_identity,
    veg1,
    veg2,
    veg2_from_gazpacho,
)
from lattice import boolean_lattice, dual, induced_sublattice, sublattice_closure, verify_embedding

x0, x1, x2 = Variable(0), Variable(1), Variable(2)

DISTRIBUTIVE = Identity(
    Meet((x0, Join((x1, x2)))),
    Join((Meet((x0, x1)), Meet((x0, x2)))),
    "leq",
    3,
    "distributive",
)


class TestTerms:
    def test_parse_and_format(self):
        text = "(meet (join x0 x1) x2)"
        term = parse_term(text)
        assert term == Meet((Join((x0, x1)), x2))
        assert format_term(term) == text

    @pytest.mark.parametrize("text", ["(meet x0)", "(foo x0 x1)", "x0 x1", "(join x0 x1", "y0", ""])
    def test_malformed_terms(self, text):
        with pytest.raises(ParseError):
            parse_term(text)

    def test_join_of_collapses_duplicates(self):
        assert join_of(x0, x0) == x0
        assert join_of(x0, x1, x0) == Join((x0, x1))

    def test_substitute(self):
        assert substitute(Meet((x0, x1)), [2, 2]) == x2

    def test_arity(self):
        with pytest.raises(ArityMismatchError):
            Identity(x2, x0, "leq", 2)
        with pytest.raises(ArityMismatchError):
            eval_identity(DISTRIBUTIVE, boolean_lattice(2), [0, 1])

    def test_dual_swaps_sides_of_inequalities(self):
        dual = dual_identity(DISTRIBUTIVE)
        assert dual.lhs == Meet((Join((x0, x1)), Join((x0, x2))))
        assert dual.rhs == Join((x0, Meet((x1, x2))))
        assert dual.name == "dual distributive"

    def test_dict_form(self):
        data = identity_to_dict(DISTRIBUTIVE)
        assert data["lhs"] == "(meet x0 (join x1 x2))"
        assert identity_from_dict(data) == DISTRIBUTIVE
        with pytest.raises(ParseError):
            identity_from_dict({"lhs": "x0", "rhs": "x1"})

    def test_shared_subterms_compile_once(self):
        shared = Join((x0, x1))
        program = compile_identity(Identity(shared, Meet((shared, x2)), "leq", 3))
        assert len(program.ops) == 2


class TestChecker:
    def test_distributive_law_holds_on_boolean(self):
        assert holds(boolean_lattice(3), DISTRIBUTIVE).holds

    def test_least_counterexample_on_pentagon(self, pentagon):
        verdict = holds(pentagon, DISTRIBUTIVE)
        assert not verdict.holds
        assert verdict.counterexample == (2, 1, 3)
        assert (verdict.lhs_value, verdict.rhs_value) == (2, 1)

    def test_parallel_scan_finds_the_same_counterexample(self, pentagon):
        verdict = holds(pentagon, DISTRIBUTIVE, parallel=True, threads=2)
        assert verdict.counterexample == (2, 1, 3)

    def test_budget(self, pentagon):
        with pytest.raises(BudgetExceededError):
            holds(pentagon, DISTRIBUTIVE, budget=10)


class TestNamedIdentities:
    def test_veg2_on_b22_atoms(self, b22):
        atoms = [b22.element(a=(1,)), b22.element(a=(2,)), b22.element(b=(1,)), b22.element(b=(2,))]
        lhs, rhs = eval_identity(veg2(), b22.lattice, atoms)
        assert lhs == b22.p
        assert rhs == b22.a

    def test_veg2_fails_on_b22(self, b22):
        assert not holds(b22.lattice, veg2()).holds

    def test_veg1_holds_on_b22(self, b22):
        assert holds(b22.lattice, veg1()).holds

    def test_veg1_fails_on_a3_4(self, a3_4):
        assert not holds(a3_4, veg1()).holds

    def test_dual_veg1_fails_on_a2_4(self):
        assert not holds(build_cambrian(CambrianSpec.of(4, {2})), dual_identity(veg1())).holds

    def test_splitting_identity_on_b33_atoms(self):
        b33 = build_bmn(3, 3)
        atoms = [b33.element(a=(i,)) for i in (1, 2, 3)] + [b33.element(b=(j,)) for j in (1, 2, 3)]
        lhs, rhs = eval_identity(splitting_b33(), b33.lattice, atoms)
        assert lhs == b33.p
        assert rhs == b33.a

    def test_named_lookup(self):
        assert named_identity("split-b33").varcount == 6
        with pytest.raises(BadParamsError):
            named_identity("veg3")

    def test_witness_in_a_u_12(self):
        assert eval_witness_12().confirms_failure


class TestGazpacho:
    def test_index(self):
        index = GazpachoIndex.parse("2,1")
        assert index.m == (2, 1)
        assert str(index) == "Gzp(2,1)"
        with pytest.raises(BadParamsError):
            GazpachoIndex.parse("2")
        with pytest.raises(BadParamsError):
            GazpachoIndex.parse("2,x")

    def test_variables(self):
        identity = gazpacho((2, 1))
        assert identity.varcount == 5
        assert identity.name == "Gzp(2,1)"

    def test_branch_limit(self):
        with pytest.raises(BudgetExceededError):
            gazpacho((1, 1), max_branches=1)

    def test_holds_on_a4(self, tamari4):
        assert holds(tamari4, gazpacho((1, 1))).holds

    @pytest.mark.slow
    def test_family_on_small_tamari_lattices(self):
        assert check_gazpacho_family(n_max=4, parallel=False).all_hold


class TestPointwiseAgreement:
    def test_gazpacho_11_and_veg1_fail_on_the_same_assignments(self, suite_lattice):
        mask = failure_mask(suite_lattice, veg1())
        assert (failure_mask(suite_lattice, gazpacho((1, 1))) == mask).all()

    def test_veg1_failures_on_a3_4(self, a3_4):
        assert failure_mask(a3_4, veg1()).sum() == 2
        assert failure_mask(a3_4, gazpacho((1, 1))).sum() == 2

    def test_substituted_gazpacho_22_is_veg2(self, suite_lattice):
        assert (failure_mask(suite_lattice, veg2_from_gazpacho()) == failure_mask(suite_lattice, veg2())).all()

    def test_substituted_gazpacho_22_on_permutohedron(self, perm4):
        assert not failure_mask(perm4, veg2_from_gazpacho()).any()
        assert not failure_mask(perm4, veg2()).any()

    def test_substitution_merges_the_a_variables(self, b22):
        identity = veg2_from_gazpacho()
        assert identity.varcount == 4
        atoms = [b22.element(a=(1,)), b22.element(a=(2,)), b22.element(b=(1,)), b22.element(b=(2,))]
        lhs, rhs = eval_identity(identity, b22.lattice, atoms)
        assert (lhs, rhs) == (b22.p, b22.a)

    def test_substitute_identity_renames_both_sides(self):
        renamed = substitute_identity(DISTRIBUTIVE, [0, 1, 1], 2)
        assert renamed.varcount == 2
        assert renamed.rhs == Meet((x0, x1))

    def test_veg2_right_side_is_below_left_side(self, suite_lattice):
        identity = veg2()
        reversed_ = Identity(identity.rhs, identity.lhs, "leq", 4)
        assert not failure_mask(suite_lattice, reversed_).any()

    def test_mask_agrees_with_least_counterexample(self, pentagon):
        mask = failure_mask(pentagon, DISTRIBUTIVE)
        first = int(np.argmax(mask))
        assert np.unravel_index(first, (5, 5, 5)) == (2, 1, 3)

    def test_mask_budget(self, pentagon):
        with pytest.raises(BudgetExceededError):
            failure_mask(pentagon, DISTRIBUTIVE, budget=10)


class TestGenericInvariants:
    @pytest.mark.parametrize("identity", [DISTRIBUTIVE, veg1(), veg2()], ids=lambda i: i.name)
    def test_identity_in_lattice_is_dual_identity_in_dual(self, suite_lattice, identity):
        mask = failure_mask(suite_lattice, identity)
        assert (failure_mask(dual(suite_lattice), dual_identity(identity)) == mask).all()

    @pytest.mark.parametrize("term", [veg1().lhs, veg1().rhs, gazpacho((1, 1)).rhs, veg2().rhs])
    def test_evaluation_commutes_with_projection(self, perm4, a3_4, term):
        spec = CambrianSpec.of(4, {3})
        phi = projection(spec, perm4, a3_4)
        rng = random.Random(5)
        for _ in range(200):
            xs = [rng.randrange(perm4.size) for _ in range(4)]
            assert eval_term(term, a3_4, [phi(x) for x in xs]) == phi(eval_term(term, perm4, xs))

    @pytest.mark.parametrize(
        "name, identity",
        [("tamari4", veg1()), ("tamari4", gazpacho((1, 1))), ("b22", veg1()), ("square", DISTRIBUTIVE)],
    )
    def test_identity_passes_to_sublattices(self, name, identity):
        lattice = SUITE[name]()
        assert holds(lattice, identity).holds
        rng = random.Random(3)
        for _ in range(10):
            members = sublattice_closure(lattice, rng.sample(range(lattice.size), 3))
            sub, inclusion = induced_sublattice(lattice, members)
            assert verify_embedding(inclusion)
            assert holds(sub, identity).holds
