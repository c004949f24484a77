import itertools
from fractions import Fraction

import pytest

from nspcplab.batteries import (
    constant_fn,
    flipped_fn,
    linear_strategy,
    scrambler,
)
from nspcplab.distributions import LocalDistribution, tv_distance
from nspcplab.errors import InvalidInput, ScopeExceeded
from nspcplab.gf2 import BitVector, Permutation, RepeatedQuery, all_permutations
from nspcplab.strategy import (
    ClassicalStrategy,
    Domain,
    MixtureStrategy,
    TableStrategy,
    consistency_probability,
    distance_l,
    dumps_strategy,
    flatten,
    fold,
    from_classical_proof,
    linear_base_fn,
    linearity_probability,
    loads_strategy,
    ns_defect,
    repeated_classical,
    restriction_gap,
    self_correct,
    subsets_of_domain,
    tabulate,
    zero_on_zeros_probability,
)

D2 = Domain("bitvector", 2)
H = Fraction(1, 2)


def bv(s):
    return BitVector.from_string(s)


def uniform_strategy(domain, k):
    """Every answer bit independently uniform: non-signaling by symmetry."""
    table = {}
    for s in subsets_of_domain(domain, k):
        syms = list(itertools.product((0, 1), repeat=domain.t))
        keys = list(itertools.product(syms, repeat=len(s)))
        w = Fraction(1, len(keys))
        table[s] = LocalDistribution(s, {key: w for key in keys})
    return TableStrategy(domain, table, k)


class TestClassical:
    def test_point_distribution(self):
        f = from_classical_proof(linear_base_fn(bv("10")), D2)
        d = f.answer([bv("10"), bv("11")])
        assert d.probs == {((1,), (1,)): 1}

    def test_marginal_consistency_everywhere(self):
        f = from_classical_proof(lambda p: p.mask & 1, D2)
        eps, _ = ns_defect(f, k=3)
        assert eps == 0

    def test_mixture_singleton_marginal_is_average(self):
        f = MixtureStrategy(
            [
                (H, from_classical_proof(constant_fn(0), D2)),
                (H, from_classical_proof(constant_fn(1), D2)),
            ]
        )
        d = f.answer([bv("00")])
        assert d.probs == {((0,),): H, ((1,),): H}

    def test_mixture_is_non_signaling(self):
        f = MixtureStrategy(
            [
                (Fraction(1, 4), from_classical_proof(constant_fn(1), D2)),
                (Fraction(3, 4), from_classical_proof(linear_base_fn(bv("01")), D2)),
            ]
        )
        eps, _ = ns_defect(f, k=4)
        assert eps == 0

    def test_locality_enforced(self):
        f = from_classical_proof(constant_fn(0), D2, locality=2)
        with pytest.raises(InvalidInput):
            f.answer([bv("00"), bv("01"), bv("10")])


class TestTableValidation:
    def test_perturbed_marginal_measures_delta(self):
        a, b, c = bv("00"), bv("01"), bv("10")
        delta = Fraction(1, 8)
        s1 = (a, b)
        s2 = (a, c)
        d1 = LocalDistribution(s1, {((0,), (0,)): 1})
        d2 = LocalDistribution(
            s2, {((0,), (0,)): 1 - delta, ((1,), (0,)): delta}
        )
        strat = TableStrategy(
            D2, {s1: d1, s2: d2}, 2, mode=("almost", delta)
        )
        eps, witness = ns_defect(strat, family=[s1, s2])
        assert eps == delta
        assert witness == (s1, s2)

    def test_exact_mode_rejects_gap(self):
        a, b, c = bv("00"), bv("01"), bv("10")
        d1 = LocalDistribution((a, b), {((0,), (0,)): 1})
        d2 = LocalDistribution((a, c), {((1,), (0,)): 1})
        with pytest.raises(InvalidInput):
            TableStrategy(D2, {(a, b): d1, (a, c): d2}, 2, mode="exact")


class TestDistances:
    def test_distance_zero_to_self(self):
        f = from_classical_proof(constant_fn(0), D2)
        assert distance_l(f, f, 2) == 0

    def test_distance_monotone_in_ell(self):
        f = from_classical_proof(linear_base_fn(bv("10")), D2)
        g = MixtureStrategy(
            [(H, f), (H, from_classical_proof(constant_fn(1), D2))]
        )
        vals = [distance_l(f, g, ell) for ell in (1, 2, 3, 4)]
        assert vals == sorted(vals)

    def test_flipped_point_distance_is_one(self):
        base = linear_base_fn(bv("10"))
        f = from_classical_proof(base, D2)
        g = from_classical_proof(flipped_fn(base, {bv("11")}), D2)
        assert distance_l(f, g, 4) == 1
        assert distance_l(f, g, 1) == 1  # a singleton already distinguishes


class TestLinearityProbability:
    def test_linear_proof_passes(self):
        f = from_classical_proof(linear_base_fn(bv("11")), D2)
        for x in D2.points():
            for y in D2.points():
                assert linearity_probability(f, x, y) == 1

    def test_equal_arguments_reduce_to_zero_query(self):
        f = from_classical_proof(constant_fn(1), D2)
        # X = Y makes X + Y the zero query; the check becomes F(0) = 0
        assert linearity_probability(f, bv("10"), bv("10")) == 0
        g = from_classical_proof(constant_fn(0), D2)
        assert linearity_probability(g, bv("10"), bv("10")) == 1

    def test_corrupted_proof_fails_some_triple(self):
        base = linear_base_fn(bv("00"))
        f = from_classical_proof(flipped_fn(base, {bv("11")}), D2)
        probs = [
            linearity_probability(f, x, y)
            for x in D2.points()
            for y in D2.points()
        ]
        assert min(probs) == 0

    def test_uniform_answers_pass_half(self):
        f = uniform_strategy(D2, 3)
        assert linearity_probability(f, bv("10"), bv("01")) == H


class TestConsistencyProbability:
    def test_same_query_always_agrees(self):
        f = uniform_strategy(D2, 3)
        q = bv("10")
        assert consistency_probability(f, q, q) == 1

    def test_classical_repeated_always_agrees(self):
        f = repeated_classical(linear_base_fn(bv("10")), D2, 2)
        pts = list(f.domain.points())
        for q in pts[:6]:
            for qp in pts[:6]:
                assert consistency_probability(f, q, qp) == 1

    def test_independent_uniform_agrees_half(self):
        f = uniform_strategy(D2, 2)
        assert consistency_probability(f, bv("00"), bv("01")) == 1
        # single-coordinate domain: J = {0} when the queries are equal only;
        # distinct points share no coordinate, so build a 2-repeated case
        f2 = uniform_strategy(Domain("bitvector", 2, 2), 2)
        q = RepeatedQuery([bv("00"), bv("01")])
        qp = RepeatedQuery([bv("00"), bv("10")])
        assert consistency_probability(f2, q, qp) == H


class TestFold:
    def test_fold_of_classical_repetition_unchanged(self):
        f = repeated_classical(linear_base_fn(bv("01")), D2, 2)
        ff = fold(f)
        for s in subsets_of_domain(f.domain, 2, max_sets=400)[:40]:
            assert ff.answer(s) == f.answer(s)

    def test_fold_equivariance_on_deterministic_answers(self):
        dom = Domain("bitvector", 2, 2)
        q = RepeatedQuery([bv("00"), bv("01")])
        pi = Permutation([1, 0])
        qp = q.permute(pi)

        def fn(p):
            return (0, 1) if p == q else (1, 1)

        ff = fold(ClassicalStrategy(dom, fn))
        d_q = ff.answer([q])
        d_qp = ff.answer([qp])
        for key, p in d_q.support():
            permuted = pi.apply(key[0])
            assert d_qp.probs.get((permuted,), 0) == p

    def test_folding_equality_verbatim_t2(self):
        # for all 2-point sets S, all permutation pairs, all answer pairs:
        # Pr[forall i: F_S(Q_i) = b_i] = Pr[forall i: F_T(pi_i Q_i) = pi_i(b_i)]
        dom = Domain("bitvector", 2, 2)
        f = fold(
            MixtureStrategy(
                [
                    (Fraction(5, 8), linear_strategy(bv("10"), 2)),
                    (Fraction(3, 8), scrambler(dom)),
                ]
            )
        )
        pts = list(dom.points())
        perms = all_permutations(2)
        import itertools as it

        syms = list(it.product((0, 1), repeat=2))
        for q1, q2 in it.combinations(pts[:8], 2):
            d_s = f.answer([q1, q2])
            for pi1, pi2 in it.product(perms, repeat=2):
                tq1, tq2 = q1.permute(pi1), q2.permute(pi2)
                d_t = f.answer([tq1, tq2])
                for b1, b2 in it.product(syms, repeat=2):
                    lhs = d_s.prob_of(
                        lambda m: m[q1] == b1 and m[q2] == b2
                    )
                    pb1, pb2 = pi1.apply(b1), pi2.apply(b2)
                    rhs = d_t.prob_of(
                        lambda m: m[tq1] == pb1 and m[tq2] == pb2
                    )
                    assert lhs == rhs

    def test_fold_idempotent_exhaustive_t2(self):
        dom = Domain("bitvector", 2, 2)
        f = fold(
            MixtureStrategy(
                [
                    (Fraction(3, 4), linear_strategy(bv("10"), 2)),
                    (Fraction(1, 4), scrambler(dom)),
                ]
            )
        )
        ff = fold(f)
        for s in subsets_of_domain(dom, 2, max_sets=400):
            assert ff.answer(s) == f.answer(s)


class TestFlatten:
    def test_flatten_of_classical_repetition_is_base(self):
        base_fn = linear_base_fn(bv("10"))
        f = repeated_classical(base_fn, D2, 2)
        flat = flatten(f)
        base = from_classical_proof(base_fn, D2)
        for s in subsets_of_domain(D2, 2):
            assert flat.answer(s) == base.answer(s)

    def test_flatten_rejects_oversized_sets(self):
        f = repeated_classical(constant_fn(0), D2, 2)
        flat = flatten(f)
        with pytest.raises(InvalidInput):
            flat.answer([bv("00"), bv("01"), bv("10")])

    def test_flatten_locality_is_t(self):
        f = repeated_classical(constant_fn(0), D2, 3)
        assert flatten(f).locality == 3


class TestSelfCorrect:
    def test_linear_base_corrects_to_itself(self):
        f2 = linear_strategy(bv("10"), 2)
        corrected = self_correct(fold(f2))
        base = from_classical_proof(linear_base_fn(bv("10")), D2)
        for s in subsets_of_domain(D2, 2):
            assert corrected.answer(s) == base.answer(s)

    def test_zero_on_zeros_for_linear(self):
        corrected = self_correct(fold(linear_strategy(bv("11"), 2)))
        for q in D2.points():
            assert zero_on_zeros_probability(corrected, q) == 1

    def test_no_zero_coordinates_vacuous(self):
        corrected = self_correct(fold(linear_strategy(bv("11"), 2)))
        assert zero_on_zeros_probability(corrected, bv("10")) == 1

    def test_locality_is_half(self):
        dom = Domain("bitvector", 3, 2)
        f = ClassicalStrategy(dom, lambda q: (0, 0), locality=8)
        corrected = self_correct(f)
        assert corrected.locality == 4
        assert corrected.guaranteed_locality == max(0, 8 // 2 - 5)
        with pytest.raises(InvalidInput):
            corrected.answer(list(Domain("bitvector", 3).points())[:5])

    def test_odd_repetition_rejected(self):
        with pytest.raises(InvalidInput):
            self_correct(linear_strategy(bv("10"), 3))


class TestClaims:
    def test_restriction_gap_bounded_by_consistency(self):
        # claim: (1-eps)-consistent implies every restricted-event gap <= eps
        dom = Domain("bitvector", 2, 2)
        f = fold(
            MixtureStrategy(
                [
                    (Fraction(13, 16), linear_strategy(bv("01"), 2)),
                    (Fraction(3, 16), scrambler(dom)),
                ]
            )
        )
        pts = list(dom.points())
        eps = max(
            1 - consistency_probability(f, q, qp) for q in pts for qp in pts
        )
        worst = max(restriction_gap(f, q, qp) for q in pts for qp in pts)
        assert worst <= eps

    def test_lin_implies_consistent(self):
        # (1-eps)-linear + zero-on-zeros(1-eps) => (1-2eps)-consistent
        dom = Domain("bitvector", 2, 2)
        for weight in (Fraction(1), Fraction(7, 8)):
            f = fold(
                MixtureStrategy(
                    [
                        (weight, linear_strategy(bv("10"), 2)),
                        (1 - weight, scrambler(dom)),
                    ]
                )
                if weight != 1
                else linear_strategy(bv("10"), 2)
            )
            pts = list(dom.points())
            eps_lin = max(
                1 - linearity_probability(f, x, y) for x in pts for y in pts
            )
            eps_zero = max(
                1 - zero_on_zeros_probability(f, q) for q in pts
            )
            eps = max(eps_lin, eps_zero)
            worst = min(
                consistency_probability(f, q, qp) for q in pts for qp in pts
            )
            assert worst >= 1 - 2 * eps


class TestSerialization:
    def test_round_trip_bit_exact(self):
        f = MixtureStrategy(
            [
                (Fraction(1, 3), from_classical_proof(constant_fn(1), D2)),
                (Fraction(2, 3), from_classical_proof(linear_base_fn(bv("10")), D2)),
            ]
        )
        table = tabulate(f, subsets_of_domain(D2, 2))
        text = dumps_strategy(table)
        back = loads_strategy(text)
        assert back.domain == table.domain
        assert back.locality == table.locality
        for s in subsets_of_domain(D2, 2):
            assert back.answer(s) == table.answer(s)
        assert dumps_strategy(back) == text

    def test_repeated_round_trip(self):
        dom = Domain("bitvector", 2, 2)
        f = fold(
            MixtureStrategy(
                [
                    (Fraction(5, 8), linear_strategy(bv("01"), 2)),
                    (Fraction(3, 8), scrambler(dom)),
                ]
            )
        )
        fam = subsets_of_domain(dom, 2, max_sets=400)[:10]
        table = tabulate(f, fam, mode=("almost", Fraction(1)))
        text = dumps_strategy(table)
        back = loads_strategy(text)
        for s in fam:
            assert back.answer(s) == table.answer(s)


def test_ns_defect_requires_scope():
    f = from_classical_proof(constant_fn(0), Domain("bitvector", 4))
    with pytest.raises(InvalidInput):
        ns_defect(f)
    big = Domain("bitvector", 8)
    with pytest.raises(ScopeExceeded):
        ns_defect(from_classical_proof(constant_fn(0), big), k=2)
