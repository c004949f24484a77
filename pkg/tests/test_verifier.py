import itertools
from fractions import Fraction

import pytest

from nspcplab.batteries import constant_fn, flipped_fn, linear_strategy
from nspcplab.circuits import (
    Circuit,
    Gate,
    arithmetize,
    evaluate,
    intended_proof,
)
from nspcplab.errors import InvalidInput, ScopeExceeded
from nspcplab.gf2 import BitVector, diag, tensor
from nspcplab.strategy import (
    ClassicalStrategy,
    Domain,
    MixtureStrategy,
    TableStrategy,
    flatten,
    fold,
    from_classical_proof,
    linear_base_fn,
    repeated_classical,
    subsets_of_domain,
    tabulate,
)
from nspcplab.verifier import (
    AlmssVerifier,
    ConsistencyTestVerifier,
    FullVerifier,
    LinearityTestVerifier,
    RepeatedAlmssVerifier,
    acceptance_classical,
    acceptance_exact,
    acceptance_mc,
    consistency_test,
    first_coordinate_acceptance,
    full_verifier,
    hoeffding_half_width,
    linearity_test,
    query_set_distribution,
    run_report,
)

WIRE = Circuit(1, 1, ())
NOT2 = Circuit(1, 2, (Gate("NOT", 2, (1,)),))
AND3 = Circuit(2, 3, (Gate("AND", 3, (1, 2)),))


def bv(s):
    return BitVector.from_string(s)


def intended_strategy(circuit, x, t=1):
    cs = arithmetize(circuit, x)
    proof = intended_proof(evaluate(circuit, x))
    base = Domain("bitmatrix", cs.n_vars)
    return cs, repeated_classical(proof, base, t, base_linear=True)


class TestAlmss:
    def test_queries_shape(self):
        cs = arithmetize(AND3, bv("11"))
        v = AlmssVerifier(cs)
        u, w, s = bv("100"), bv("010"), bv("0000")
        q = v.query_set((u, w, s))
        assert q == (diag(u), diag(w), tensor(u, w), cs.combine(s))
        assert len(set(q)) <= 4

    def test_collapsed_queries_still_decided(self):
        cs = arithmetize(WIRE, bv("1"))
        v = AlmssVerifier(cs)
        z = BitVector.zero(1)
        r = (z, z, BitVector.zero(2))
        assert len(set(v.query_set(r))) == 1
        proof = intended_proof(evaluate(WIRE, bv("1")))
        answers = {p: (proof(p),) for p in v.query_set(r)}
        assert v.decide(r, answers)

    def test_intended_proof_accepted_everywhere(self):
        for circuit, x in [(WIRE, "1"), (NOT2, "0"), (AND3, "11")]:
            cs, strat = intended_strategy(circuit, BitVector.from_string(x))
            v = AlmssVerifier(cs)
            assert acceptance_exact(strat, v) == 1
            assert acceptance_classical(strat, v) == 1

    def test_zero_proof_fails_half_the_selectors(self):
        cs, _ = intended_strategy(NOT2, bv("0"))
        v = AlmssVerifier(cs)
        zero = from_classical_proof(constant_fn(0), Domain("bitmatrix", 2))
        # multiplicative check passes trivially; the satisfiability check
        # fails exactly when sum s_j c_j = 1, i.e. for half the selectors
        assert acceptance_exact(zero, v) == Fraction(1, 2)
        assert acceptance_classical(zero, v) == Fraction(1, 2)

    def test_multiplicative_failure(self):
        cs = arithmetize(AND3, bv("11"))
        v = AlmssVerifier(cs)
        u, w = bv("100"), bv("010")
        s = BitVector.zero(4)
        r = (u, w, s)
        answers = {
            diag(u): (1,),
            diag(w): (1,),
            tensor(u, w): (0,),
            cs.combine(s): (0,),
        }
        assert not v.decide(r, answers)

    def test_factored_matches_joint_exhaustively(self):
        # the two checks read disjoint randomness, so the product rule is
        # exact for deterministic proofs; cross-check on a corrupted one
        cs, _ = intended_strategy(NOT2, bv("0"))
        v = AlmssVerifier(cs)
        base = linear_base_fn(tensor(bv("01"), bv("01")))
        bad = from_classical_proof(
            flipped_fn(base, {diag(bv("10"))}), Domain("bitmatrix", 2)
        )
        direct = 0
        for r in v.randomness():
            answers = {p: bad.value(p) for p in set(v.query_set(r))}
            direct += v.decide(r, answers)
        assert acceptance_exact(bad, v) == Fraction(direct, v.randomness_count())
        assert v.acceptance_deterministic(bad) == acceptance_exact(bad, v)


class TestRepeated:
    def test_t1_reduces_to_single(self):
        cs = arithmetize(NOT2, bv("0"))
        with pytest.raises(InvalidInput):
            RepeatedAlmssVerifier(cs, 1)

    def test_coordinates_match_independent_draws(self):
        cs = arithmetize(NOT2, bv("0"))
        v2 = RepeatedAlmssVerifier(cs, 2)
        v1 = AlmssVerifier(cs)
        r1 = (bv("10"), bv("01"), bv("100"))
        r2 = (bv("11"), bv("00"), bv("010"))
        q1, q2, q3, q4 = v2.queries((r1, r2))
        s1 = v1.query_set(r1)
        s2 = v1.query_set(r2)
        for i, q in enumerate((q1, q2, q3, q4)):
            assert q.coords == (s1[i], s2[i])

    def test_distribution_equals_two_independent_draws(self):
        cs = arithmetize(WIRE, bv("1"))
        v2 = RepeatedAlmssVerifier(cs, 2)
        v1 = AlmssVerifier(cs)
        singles = list(v1.randomness())
        pairs = list(v2.randomness())
        assert len(pairs) == len(singles) ** 2
        from collections import Counter

        got = Counter(
            tuple(q.coords for q in v2.queries(r)) for r in v2.randomness()
        )
        want = Counter(
            tuple(zip(v1.query_set(ra), v1.query_set(rb)))
            for ra in singles
            for rb in singles
        )
        assert got == want

    def test_classical_repetition_accepted(self):
        for t in (2, 3):
            cs, strat = intended_strategy(NOT2, bv("0"), t=t)
            v = RepeatedAlmssVerifier(cs, t)
            assert acceptance_classical(strat, v) == 1
        cs, strat = intended_strategy(NOT2, bv("0"), t=2)
        assert acceptance_exact(strat, RepeatedAlmssVerifier(cs, 2)) == 1

    def test_factored_matches_joint_for_coordinatewise(self):
        cs, _ = intended_strategy(NOT2, bv("0"))
        v = RepeatedAlmssVerifier(cs, 2)
        base = linear_base_fn(tensor(bv("10"), bv("10")))
        bad = repeated_classical(
            flipped_fn(base, {diag(bv("11"))}),
            Domain("bitmatrix", 2),
            2,
        )
        assert v.acceptance_deterministic(bad) == acceptance_exact(bad, v)

    def test_one_corrupted_coordinate_rejects(self):
        cs = arithmetize(NOT2, bv("0"))
        v = RepeatedAlmssVerifier(cs, 2)
        proof = intended_proof(evaluate(NOT2, bv("0")))

        def fn(q):
            good = tuple(proof(c) for c in q.coords)
            return (good[0], good[1] ^ 1)

        bad = ClassicalStrategy(Domain("bitmatrix", 2, 2), fn)
        for r in itertools.islice(v.randomness(), 40):
            answers = {p: bad.value(p) for p in set(v.query_set(r))}
            good = {
                p: repeated_classical(
                    proof, Domain("bitmatrix", 2), 2
                ).value(p)
                for p in set(v.query_set(r))
            }
            if v.decide(r, good):
                assert not v.decide(r, answers)

    def test_first_coordinate_equals_flattened_acceptance(self):
        # exactly linear, exactly consistent, folded strategy: the flattened
        # strategy's 4-query acceptance equals the repeated verifier's
        # first-coordinate acceptance, exactly
        cs = arithmetize(WIRE, bv("0"))  # unsatisfiable: acceptance < 1
        dom = Domain("bitmatrix", 1)
        lin0 = repeated_classical(
            linear_base_fn(dom.base_zero()), dom, 2, base_linear=True
        )
        lin1 = repeated_classical(
            linear_base_fn(tensor(bv("1"), bv("1"))), dom, 2, base_linear=True
        )
        strat = fold(MixtureStrategy(
            [(Fraction(1, 3), lin0), (Fraction(2, 3), lin1)]
        ))
        v2 = RepeatedAlmssVerifier(cs, 2)
        v1 = AlmssVerifier(cs)
        first = first_coordinate_acceptance(strat, v2)
        flat = acceptance_exact(flatten(strat), v1)
        assert first == flat
        assert acceptance_exact(strat, v2) <= first < 1


class TestStandaloneTests:
    def test_linear_strategy_passes(self):
        f = linear_strategy(bv("10"), 2)
        assert linearity_test(f) == 1

    def test_flipped_point_gives_five_eighths(self):
        base = linear_base_fn(BitVector.zero(2))
        f = from_classical_proof(
            flipped_fn(base, {bv("11")}), Domain("bitvector", 2)
        )
        assert linearity_test(f) == Fraction(5, 8)

    def test_uniform_answers_pass_half(self):
        dom = Domain("bitvector", 2)
        table = {}
        for s in subsets_of_domain(dom, 3):
            keys = list(itertools.product([(0,), (1,)], repeat=len(s)))
            table[s] = {k: Fraction(1, len(keys)) for k in keys}
        from nspcplab.distributions import LocalDistribution

        strat = TableStrategy(
            dom,
            {s: LocalDistribution(s, p) for s, p in table.items()},
            3,
        )
        assert linearity_test(strat) == Fraction(1, 2)

    def test_consistency_classical_passes(self):
        f = repeated_classical(linear_base_fn(bv("01")), Domain("bitvector", 2), 2)
        assert consistency_test(f) == 1

    def test_consistency_uniform_answers(self):
        # independent uniform answer bits: distinct stacked queries agree on
        # the shared block with probability 1/2; colliding ones (Z1 = Z2,
        # probability 2^-n) agree with probability 1: total 5/8 at n = 2
        dom = Domain("bitvector", 2, 2)
        from nspcplab.distributions import LocalDistribution

        table = {}
        for s in subsets_of_domain(dom, 2, max_sets=400):
            syms = list(itertools.product((0, 1), repeat=2))
            keys = list(itertools.product(syms, repeat=len(s)))
            table[s] = LocalDistribution(
                s, {k: Fraction(1, len(keys)) for k in keys}
            )
        strat = TableStrategy(dom, table, 2)
        assert consistency_test(strat) == Fraction(5, 8)

    def test_consistency_needs_even_repetition(self):
        f = repeated_classical(constant_fn(0), Domain("bitvector", 2), 3)
        with pytest.raises(InvalidInput):
            consistency_test(f)


class TestAcceptanceOps:
    def test_budget_refusal(self):
        cs = arithmetize(AND3, bv("11"))
        v = RepeatedAlmssVerifier(cs, 3)
        _, strat = intended_strategy(AND3, bv("11"), t=3)
        with pytest.raises(ScopeExceeded):
            acceptance_exact(strat, v, budget=1 << 10)

    def test_mc_zero_samples_rejected(self):
        cs, strat = intended_strategy(AND3, bv("11"))
        with pytest.raises(InvalidInput):
            acceptance_mc(strat, AlmssVerifier(cs), 0, 1)

    def test_mc_intended_proof_estimates_one(self):
        cs, strat = intended_strategy(AND3, bv("11"))
        est = acceptance_mc(strat, AlmssVerifier(cs), 200, 7)
        assert est.estimate == 1
        assert est.half_width == hoeffding_half_width(200)

    def test_mc_reproducible(self):
        cs, _ = intended_strategy(NOT2, bv("0"))
        zero = from_classical_proof(constant_fn(0), Domain("bitmatrix", 2))
        a = acceptance_mc(zero, AlmssVerifier(cs), 500, 42)
        b = acceptance_mc(zero, AlmssVerifier(cs), 500, 42)
        assert a == b

    def test_mc_calibration(self):
        # the true value 1/2 should land within the 99% half-width for
        # (nearly) all seeds; with 100 seeds allow one miss
        cs, _ = intended_strategy(NOT2, bv("0"))
        zero = from_classical_proof(constant_fn(0), Domain("bitmatrix", 2))
        v = AlmssVerifier(cs)
        misses = 0
        for seed in range(100):
            est = acceptance_mc(zero, v, 400, seed)
            if abs(float(est.estimate) - 0.5) > est.half_width:
                misses += 1
        assert misses <= 1

    def test_table_strategy_acceptance_matches_values(self):
        # LP-shaped table strategies run through the generic exact path
        cs = arithmetize(WIRE, bv("0"))
        v = AlmssVerifier(cs)
        dom = Domain("bitmatrix", 1)
        mix = MixtureStrategy([
            (Fraction(1, 2), from_classical_proof(constant_fn(0), dom)),
            (Fraction(1, 2), from_classical_proof(constant_fn(1), dom)),
        ])
        table = tabulate(mix, subsets_of_domain(dom, 2))
        assert acceptance_exact(table, v) == acceptance_exact(mix, v)


class TestFullVerifier:
    def test_completeness_exact_joint_at_n1(self):
        cs, strat = intended_strategy(WIRE, bv("1"), t=2)
        v = FullVerifier(cs, 1)
        assert v.randomness_count() <= 1 << 22
        assert acceptance_exact(strat, v) == 1

    def test_completeness_factored_matches(self):
        cs, strat = intended_strategy(AND3, bv("11"), t=2)
        res = full_verifier(strat, cs, 1)
        assert res.mode == "exact"
        assert res.acceptance == 1
        assert all(p == 1 for p in res.sub_tests.values())

    def test_acceptance_bounded_by_subtests(self):
        cs = arithmetize(WIRE, bv("0"))
        dom = Domain("bitmatrix", 1)
        base = linear_base_fn(tensor(bv("1"), bv("1")))
        bad = repeated_classical(
            flipped_fn(base, {dom.base_zero()}), dom, 2
        )
        v = FullVerifier(cs, 1)
        total = acceptance_exact(bad, v)
        for _, comp in v.components():
            assert total <= acceptance_exact(bad, comp)

    def test_corrupted_proof_subtest_bounds(self):
        cs = arithmetize(NOT2, bv("0"))
        dom = Domain("bitmatrix", 2)
        base = linear_base_fn(tensor(bv("10"), bv("01")))
        bad = repeated_classical(flipped_fn(base, {diag(bv("11"))}), dom, 2)
        v = FullVerifier(cs, 1)
        lin = v.lin.acceptance_deterministic(
            bad.decompose_classical()[0][1]
        )
        # one flipped point out of 16: the BLR pass rate stays near 1
        assert lin >= 1 - Fraction(8, 16)
        assert v.cons.acceptance_deterministic(
            bad.decompose_classical()[0][1]
        ) == 1

    def test_locality_gate(self):
        cs = arithmetize(WIRE, bv("1"))
        dom = Domain("bitmatrix", 1, 2)
        fam = subsets_of_domain(dom, 2, max_sets=400)
        source = repeated_classical(constant_fn(0), Domain("bitmatrix", 1), 2)
        table = TableStrategy(
            dom, {s: source.answer(s) for s in fam}, locality=12,
            validate=False,
        )
        with pytest.raises(InvalidInput):
            full_verifier(table, cs, 1)

    def test_wrong_repetition_rejected(self):
        cs, strat = intended_strategy(WIRE, bv("1"), t=3)
        with pytest.raises(InvalidInput):
            full_verifier(strat, cs, 1)


class TestObliviousness:
    def test_query_distribution_ignores_input(self):
        d0 = query_set_distribution(AlmssVerifier(arithmetize(NOT2, bv("0"))))
        d1 = query_set_distribution(AlmssVerifier(arithmetize(NOT2, bv("1"))))
        assert d0 == d1

    def test_query_distribution_ignores_input_repeated(self):
        a = query_set_distribution(
            RepeatedAlmssVerifier(arithmetize(WIRE, bv("0")), 2)
        )
        b = query_set_distribution(
            RepeatedAlmssVerifier(arithmetize(WIRE, bv("1")), 2)
        )
        assert a == b


def test_run_report_shapes():
    rep = run_report("almss", "circ", 1, 4, Fraction(1, 3),
                     sub_tests={"linearity": Fraction(1, 2)},
                     wall_time_ms=1.25)
    assert rep["acceptance"] == "1/3"
    assert rep["mode"] == "exact"
    assert rep["sub_tests"]["linearity"] == "1/2"
    est = acceptance_mc(
        from_classical_proof(constant_fn(0), Domain("bitmatrix", 1)),
        AlmssVerifier(arithmetize(WIRE, bv("1"))),
        50,
        3,
    )
    rep2 = run_report("almss", "circ", 1, 4, est)
    assert rep2["mode"] == "mc"
    assert isinstance(rep2["acceptance"], float)
