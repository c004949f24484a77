"""Constructed strategy families used by the test battery and the CLI.

These are the small, hand-built adversaries on which the transformation
guarantees are exercised: corrupted linear proofs, mixtures with deliberately
inconsistent components, and signaling rogue tables for the rounding probes.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

from .distributions import LocalDistribution
from .gf2 import BitVector, point_coords
from .strategy import (
    ClassicalStrategy,
    Domain,
    MixtureStrategy,
    Strategy,
    TableStrategy,
    fold,
    from_classical_proof,
    linear_base_fn,
    repeated_classical,
    subsets_of_domain,
    tabulate,
)


def flipped_fn(base_fn: Callable, flips) -> Callable:
    flips = set(flips)

    def fn(p):
        v = base_fn(p)
        return v ^ 1 if p in flips else v

    return fn


def constant_fn(value: int) -> Callable:
    return lambda p: value


def linear_strategy(coeff: BitVector, t: int) -> Strategy:
    """Coordinate-wise repetition of the linear form <coeff, .>."""
    base = Domain("bitvector", coeff.n)
    return repeated_classical(linear_base_fn(coeff), base, t, base_linear=True)


def scrambler(domain: Domain) -> ClassicalStrategy:
    """A deterministic proof over a repeated domain that is not coordinate-wise:
    answers depend on the whole query tuple, so block agreement fails often."""

    def fn(q):
        coords = point_coords(q)
        total = sum(c.mask for c in coords)
        return tuple(((total >> j) ^ j) & 1 for j in range(len(coords)))

    return ClassicalStrategy(domain, fn)


def self_correction_battery(n: int = 2):
    """Folded 2-repeated strategies over {0,1}^n for the correction theorem."""
    base = Domain("bitvector", n)
    dom2 = Domain("bitvector", n, 2)
    c1 = BitVector.from_mask(1, n)
    c2 = BitVector.from_mask((1 << n) - 1, n)
    lin1 = linear_strategy(c1, 2)
    lin2 = linear_strategy(c2, 2)
    flip = BitVector.from_mask(3, n)
    corrupted = repeated_classical(
        flipped_fn(linear_base_fn(c1), {flip}), base, 2
    )
    battery = [
        ("pure-linear", fold(lin1)),
        ("two-linear-mixture", fold(MixtureStrategy(
            [(Fraction(1, 2), lin1), (Fraction(1, 2), lin2)]
        ))),
        ("corrupted-light", fold(MixtureStrategy(
            [(Fraction(15, 16), lin1), (Fraction(1, 16), corrupted)]
        ))),
        ("constant-heavy", fold(MixtureStrategy(
            [(Fraction(7, 8), lin2),
             (Fraction(1, 8), repeated_classical(constant_fn(1), base, 2))]
        ))),
        ("scrambled", fold(MixtureStrategy(
            [(Fraction(13, 16), lin1), (Fraction(3, 16), scrambler(dom2))]
        ))),
    ]
    return battery


def flatten_battery(n: int = 2, t: int = 2):
    """Folded t-repeated strategies for the flattening claims."""
    base = Domain("bitvector", n)
    domt = Domain("bitvector", n, t)
    c1 = BitVector.from_mask(1, n)
    c2 = BitVector.from_mask(2, n)
    lin1 = linear_strategy(c1, t)
    lin2 = linear_strategy(c2, t)
    battery = [
        ("pure-linear", fold(lin1)),
        ("two-linear-mixture", fold(MixtureStrategy(
            [(Fraction(3, 4), lin1), (Fraction(1, 4), lin2)]
        ))),
        ("lightly-scrambled", fold(MixtureStrategy(
            [(Fraction(7, 8), lin1), (Fraction(1, 8), scrambler(domt))]
        ))),
        ("corrupted-linear", fold(MixtureStrategy(
            [(Fraction(15, 16), lin2),
             (Fraction(1, 16), repeated_classical(
                 flipped_fn(linear_base_fn(c2), {c1}), base, t))]
        ))),
        ("constant-mixture", fold(MixtureStrategy(
            [(Fraction(13, 16), lin1),
             (Fraction(3, 16), repeated_classical(constant_fn(1), base, t))]
        ))),
    ]
    return battery


def inconsistent_rogue(domain: Domain, k: int) -> TableStrategy:
    """Maximally signaling table: singletons answer all-ones, larger sets
    answer all-zeros, so marginals disagree outright."""
    ones = (1,) * domain.t
    zeros = (0,) * domain.t
    table = {}
    for s in subsets_of_domain(domain, k):
        sym = ones if len(s) == 1 else zeros
        table[s] = LocalDistribution(s, {tuple(sym for _ in s): Fraction(1)})
    return TableStrategy(domain, table, k, mode=("almost", Fraction(1)),
                         validate=False)


def exact_base_table(domain: Domain, k: int) -> TableStrategy:
    """An exactly non-signaling table: a mixture of two linear proofs."""
    c1 = BitVector.from_mask(1, domain.side)
    c2 = BitVector.from_mask((1 << domain.side) - 1, domain.side)
    mix = MixtureStrategy([
        (Fraction(1, 2), from_classical_proof(linear_base_fn(c1), domain)),
        (Fraction(1, 2), from_classical_proof(linear_base_fn(c2), domain)),
    ])
    return tabulate(mix, subsets_of_domain(domain, k))
