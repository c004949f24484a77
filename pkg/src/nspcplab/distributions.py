"""Exact-rational distributions over answer assignments of a query set.

An assignment gives every point of the set a symbol (a tuple of bits whose
length is the strategy's repetition count). Points are kept in canonical
sorted order so distributions over the same set always align.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import InvalidInput

ZERO = Fraction(0)
ONE = Fraction(1)


def canonical_points(points: Iterable) -> tuple:
    """Sorted, deduplicated tuple of points: the canonical form of a query set."""
    return tuple(sorted(set(points), key=lambda p: p.sort_key()))


class LocalDistribution:
    """A distribution over assignments of one query set, probabilities exact.

    `points` is the canonical ordering of the set; each key of `probs` is a
    tuple of symbols aligned with it. Only nonzero probabilities are stored.
    """

    __slots__ = ("points", "probs", "meta")

    def __init__(self, points, probs: Mapping, meta: dict | None = None,
                 validate: bool = True):
        pts = canonical_points(points)
        given = tuple(points)
        if len(given) != len(pts):
            raise InvalidInput("duplicate points in query set")
        if given != pts:
            order = [given.index(p) for p in pts]
            probs = {
                tuple(key[i] for i in order): p for key, p in probs.items()
            }
        self.points = pts
        self.probs = {k: Fraction(p) for k, p in probs.items() if p != 0}
        self.meta = meta or {"exact": True}
        if validate:
            total = ZERO
            for key, p in self.probs.items():
                if len(key) != len(pts):
                    raise InvalidInput("assignment arity mismatch")
                if p < 0:
                    raise InvalidInput("negative probability")
                total += p
            if total != 1:
                raise InvalidInput(f"probabilities sum to {total}, not 1")

    @classmethod
    def point_mass(cls, points, assignment: Mapping) -> "LocalDistribution":
        pts = canonical_points(points)
        key = tuple(assignment[p] for p in pts)
        return cls(pts, {key: ONE})

    def support(self):
        return self.probs.items()

    def as_mapping(self, key) -> dict:
        return dict(zip(self.points, key))

    def prob_of(self, predicate: Callable[[dict], bool]) -> Fraction:
        """Total mass of assignments satisfying the predicate.

        The predicate receives a point -> symbol mapping.
        """
        total = ZERO
        for key, p in self.probs.items():
            if predicate(dict(zip(self.points, key))):
                total += p
        return total

    def marginal(self, subset) -> "LocalDistribution":
        sub = canonical_points(subset)
        if not set(sub) <= set(self.points):
            raise InvalidInput("marginal subset must be contained in the set")
        idx = [self.points.index(p) for p in sub]
        out: dict = {}
        for key, p in self.probs.items():
            mkey = tuple(key[i] for i in idx)
            out[mkey] = out.get(mkey, ZERO) + p
        return LocalDistribution(sub, out, meta=dict(self.meta), validate=False)

    def sample(self, rng):
        """Draw one assignment key; deterministic given the rng state."""
        r = Fraction(rng.getrandbits(64), 1 << 64)
        acc = ZERO
        items = sorted(self.probs.items())
        for key, p in items:
            acc += p
            if r < acc:
                return key
        return items[-1][0]

    @staticmethod
    def mixture(components: Sequence) -> "LocalDistribution":
        """Convex combination of distributions over the same point set."""
        if not components:
            raise InvalidInput("empty mixture")
        pts = components[0][1].points
        out: dict = {}
        exact = True
        for w, d in components:
            if d.points != pts:
                raise InvalidInput("mixture components disagree on the query set")
            exact = exact and d.meta.get("exact", True)
            for key, p in d.probs.items():
                out[key] = out.get(key, ZERO) + w * p
        meta = {"exact": exact}
        return LocalDistribution(pts, out, meta=meta, validate=False)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LocalDistribution)
            and other.points == self.points
            and other.probs == self.probs
        )

    def __repr__(self) -> str:
        return f"LocalDistribution(points={len(self.points)}, atoms={len(self.probs)})"


def tv_distance(d1: LocalDistribution, d2: LocalDistribution) -> Fraction:
    """Total variation distance, computed as half the L1 distance."""
    if d1.points != d2.points:
        raise InvalidInput("distributions are over different query sets")
    keys = set(d1.probs) | set(d2.probs)
    total = ZERO
    for k in keys:
        total += abs(d1.probs.get(k, ZERO) - d2.probs.get(k, ZERO))
    return total / 2


def marginalize(d: LocalDistribution, subset) -> LocalDistribution:
    return d.marginal(subset)
