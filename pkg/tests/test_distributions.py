from fractions import Fraction

import pytest

from nspcplab.distributions import LocalDistribution, marginalize, tv_distance
from nspcplab.errors import InvalidInput
from nspcplab.gf2 import BitVector

A = BitVector.from_string("00")
B = BitVector.from_string("10")
C = BitVector.from_string("01")

H = Fraction(1, 2)


def test_sums_to_one_enforced():
    with pytest.raises(InvalidInput):
        LocalDistribution([A], {((0,),): H})
    with pytest.raises(InvalidInput):
        LocalDistribution([A], {((0,),): Fraction(3, 2), ((1,),): Fraction(-1, 2)})


def test_points_canonicalized():
    d1 = LocalDistribution([B, A], {((1,), (0,)): 1})
    d2 = LocalDistribution([A, B], {((0,), (1,)): 1})
    assert d1 == d2
    assert d1.points == (A, B)


def test_marginal_to_full_set_is_identity():
    d = LocalDistribution([A, B], {((0,), (1,)): H, ((1,), (0,)): H})
    assert d.marginal([A, B]) == d


def test_marginal_of_point_mass():
    d = LocalDistribution.point_mass([A, B], {A: (0,), B: (1,)})
    m = d.marginal([B])
    assert m == LocalDistribution([B], {((1,),): 1})


def test_marginal_uniform_pair():
    d = LocalDistribution([A, B], {((0,), (0,)): H, ((1,), (1,)): H})
    m = d.marginal([A])
    assert m.probs == {((0,),): H, ((1,),): H}


def test_marginal_requires_containment():
    d = LocalDistribution([A], {((0,),): 1})
    with pytest.raises(InvalidInput):
        d.marginal([B])


def test_tv_identical_is_zero():
    d = LocalDistribution([A], {((0,),): H, ((1,),): H})
    assert tv_distance(d, d) == 0


def test_tv_disjoint_point_masses():
    d1 = LocalDistribution([A], {((0,),): 1})
    d2 = LocalDistribution([A], {((1,),): 1})
    assert tv_distance(d1, d2) == 1


def test_tv_uniform_vs_point():
    d1 = LocalDistribution([A], {((0,),): H, ((1,),): H})
    d2 = LocalDistribution([A], {((0,),): 1})
    assert tv_distance(d1, d2) == H


def test_tv_requires_same_set():
    d1 = LocalDistribution([A], {((0,),): 1})
    d2 = LocalDistribution([B], {((0,),): 1})
    with pytest.raises(InvalidInput):
        tv_distance(d1, d2)


def test_mixture():
    d1 = LocalDistribution([A], {((0,),): 1})
    d2 = LocalDistribution([A], {((1,),): 1})
    mix = LocalDistribution.mixture([(H, d1), (H, d2)])
    assert mix.probs == {((0,),): H, ((1,),): H}


def test_marginalize_alias():
    d = LocalDistribution([A, C], {((0,), (1,)): 1})
    assert marginalize(d, [C]).probs == {((1,),): 1}


def test_prob_of_predicate():
    d = LocalDistribution(
        [A, B],
        {((0,), (1,)): Fraction(1, 4), ((1,), (1,)): Fraction(3, 4)},
    )
    assert d.prob_of(lambda m: m[B] == (1,)) == 1
    assert d.prob_of(lambda m: m[A] == (0,)) == Fraction(1, 4)
