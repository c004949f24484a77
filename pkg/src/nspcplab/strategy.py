"""Non-signaling strategies: backings, wrappers, and exact measurements.

A strategy answers a whole query set at once with a LocalDistribution; it can
never be queried adaptively, and combinators (folding, flattening,
self-correction) batch all of their base queries into a single set. Wrapper
strategies compute their answer distributions exactly by enumerating their
internal randomness whenever that space has at most 2^20 outcomes; beyond
that they fall back to seeded sampling and mark the result's metadata.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .distributions import (
    ONE,
    ZERO,
    LocalDistribution,
    canonical_points,
    tv_distance,
)
from .errors import InvalidInput, ScopeExceeded
from .gf2 import (
    BitMatrix,
    BitVector,
    Permutation,
    RepeatedQuery,
    all_permutations,
    concat_points,
    make_point,
    point_coords,
)

EXACT_ENUM_BUDGET = 1 << 20
DEFAULT_SAMPLE_COUNT = 4096


@dataclass(frozen=True)
class Domain:
    """Description of a strategy's query domain.

    kind is "bitvector" or "bitmatrix", side the vector length or matrix side,
    and t the repetition count. Points are bare vectors/matrices when t == 1
    and t-tuples (RepeatedQuery) otherwise.
    """

    kind: str
    side: int
    t: int = 1

    def __post_init__(self):
        if self.kind not in ("bitvector", "bitmatrix"):
            raise InvalidInput(f"unknown domain kind {self.kind!r}")
        if self.side < 1 or self.t < 1:
            raise InvalidInput("domain parameters must be positive")

    @property
    def base_bits(self) -> int:
        return self.side if self.kind == "bitvector" else self.side * self.side

    def base_count(self) -> int:
        return 1 << self.base_bits

    def count(self) -> int:
        return self.base_count() ** self.t

    def base_points(self) -> Iterator:
        cls = BitVector if self.kind == "bitvector" else BitMatrix
        for mask in range(self.base_count()):
            yield cls.from_mask(mask, self.side)

    def points(self) -> Iterator:
        if self.t == 1:
            yield from self.base_points()
        else:
            for coords in itertools.product(list(self.base_points()), repeat=self.t):
                yield RepeatedQuery(coords)

    def base_zero(self):
        cls = BitVector if self.kind == "bitvector" else BitMatrix
        return cls.from_mask(0, self.side)

    def zero_point(self):
        if self.t == 1:
            return self.base_zero()
        return RepeatedQuery([self.base_zero()] * self.t)

    def sample_base(self, rng: random.Random):
        cls = BitVector if self.kind == "bitvector" else BitMatrix
        return cls.from_mask(rng.getrandbits(self.base_bits), self.side)

    def sample_point(self, rng: random.Random):
        if self.t == 1:
            return self.sample_base(rng)
        return RepeatedQuery([self.sample_base(rng) for _ in range(self.t)])

    def contains(self, p) -> bool:
        if self.t == 1:
            cls = BitVector if self.kind == "bitvector" else BitMatrix
            return isinstance(p, cls) and p.n == self.side
        return (
            isinstance(p, RepeatedQuery)
            and p.t == self.t
            and all(Domain(self.kind, self.side, 1).contains(c) for c in p.coords)
        )

    def base_domain(self) -> "Domain":
        return Domain(self.kind, self.side, 1)

    def repeated(self, factor: int) -> "Domain":
        return Domain(self.kind, self.side, self.t * factor)


def xor_symbols(a: tuple, b: tuple) -> tuple:
    return tuple(x ^ y for x, y in zip(a, b))


class Strategy:
    """Base class: deterministic answerer keyed by canonical query sets."""

    claims_folded = False

    def __init__(self, domain: Domain, locality: Optional[int] = None,
                 mode="exact"):
        self.domain = domain
        self.locality = locality
        self.mode = mode
        self._memo: dict = {}

    @property
    def t(self) -> int:
        return self.domain.t

    def zero_symbol(self) -> tuple:
        return (0,) * self.t

    def answer(self, points) -> LocalDistribution:
        key = canonical_points(points)
        if not key:
            raise InvalidInput("empty query set")
        if self.locality is not None and len(key) > self.locality:
            raise InvalidInput(
                f"query set of size {len(key)} exceeds locality {self.locality}"
            )
        for p in key:
            if not self.domain.contains(p):
                raise InvalidInput(f"point {p!r} outside the strategy domain")
        hit = self._memo.get(key)
        if hit is None:
            hit = self._answer(key)
            self._memo[key] = hit
        return hit

    def _answer(self, key: tuple) -> LocalDistribution:
        raise NotImplementedError

    def sample_answer(self, points, rng: random.Random) -> dict:
        d = self.answer(points)
        atom = d.sample(rng)
        return d.as_mapping(atom)

    def decompose_classical(self):
        """Mixture-of-deterministic view: [(weight, ClassicalStrategy)] or None."""
        return None


class ClassicalStrategy(Strategy):
    """A deterministic proof: every query set gets a point distribution.

    Exactly non-signaling at every locality since all answers are restrictions
    of one global function.
    """

    def __init__(self, domain: Domain, fn: Callable, base_fn=None,
                 base_linear: bool = False, locality: Optional[int] = None):
        super().__init__(domain, locality)
        self.fn = fn
        self.base_fn = base_fn
        self.base_linear = base_linear
        self._values: dict = {}

    def value(self, p) -> tuple:
        hit = self._values.get(p)
        if hit is not None:
            return hit
        v = self.fn(p)
        if isinstance(v, int):
            v = (v,)
        if len(v) != self.t:
            raise InvalidInput("classical proof returned a wrong-length symbol")
        v = tuple(v)
        self._values[p] = v
        return v

    def _answer(self, key: tuple) -> LocalDistribution:
        return LocalDistribution(key, {tuple(self.value(p) for p in key): ONE})

    def sample_answer(self, points, rng) -> dict:
        return {p: self.value(p) for p in canonical_points(points)}

    def decompose_classical(self):
        return [(ONE, self)]


def from_classical_proof(f, domain: Domain,
                         locality: Optional[int] = None) -> ClassicalStrategy:
    """Wrap a total function (callable or mapping) as a strategy."""
    if isinstance(f, dict):
        mapping = f
        return ClassicalStrategy(domain, lambda p: mapping[p], locality=locality)
    return ClassicalStrategy(domain, f, locality=locality)


def repeated_classical(base_fn: Callable, base: Domain, t: int,
                       base_linear: bool = False) -> ClassicalStrategy:
    """Coordinate-wise repetition of a base proof; permutation invariant."""
    if base.t != 1:
        raise InvalidInput("base domain must be non-repeated")
    domain = Domain(base.kind, base.side, t)

    def fn(q):
        return tuple(base_fn(c) for c in point_coords(q))

    s = ClassicalStrategy(domain, fn, base_fn=base_fn, base_linear=base_linear)
    s.claims_folded = True
    return s


def linear_base_fn(coeff) -> Callable:
    """The linear form p -> <coeff, p> over GF(2)."""
    cmask = coeff.mask

    def fn(p):
        return (cmask & p.mask).bit_count() & 1

    return fn


class MixtureStrategy(Strategy):
    """Finite convex mixture of strategies over a common domain."""

    def __init__(self, components: Sequence):
        components = [(Fraction(w), s) for w, s in components]
        if not components:
            raise InvalidInput("empty mixture")
        if sum(w for w, _ in components) != 1:
            raise InvalidInput("mixture weights must sum to 1")
        domain = components[0][1].domain
        if any(s.domain != domain for _, s in components):
            raise InvalidInput("mixture components over different domains")
        locs = [s.locality for _, s in components]
        locality = None if all(l is None for l in locs) else min(
            l for l in locs if l is not None
        )
        super().__init__(domain, locality)
        self.components = components
        self.claims_folded = all(s.claims_folded for _, s in components)

    def _answer(self, key: tuple) -> LocalDistribution:
        return LocalDistribution.mixture(
            [(w, s.answer(key)) for w, s in self.components]
        )

    def sample_answer(self, points, rng) -> dict:
        r = Fraction(rng.getrandbits(64), 1 << 64)
        acc = ZERO
        for w, s in self.components:
            acc += w
            if r < acc:
                return s.sample_answer(points, rng)
        return self.components[-1][1].sample_answer(points, rng)

    def decompose_classical(self):
        out = []
        for w, s in self.components:
            sub = s.decompose_classical()
            if sub is None:
                return None
            out.extend((w * wi, si) for wi, si in sub)
        return out


class TableStrategy(Strategy):
    """A strategy given extensionally on a finite family of query sets."""

    def __init__(self, domain: Domain, table: dict, locality: Optional[int],
                 mode="exact", validate: bool = True):
        super().__init__(domain, locality, mode)
        self.table = {canonical_points(k): d for k, d in table.items()}
        if validate:
            self._validate_mode()

    def _validate_mode(self):
        eps = ZERO if self.mode == "exact" else Fraction(self.mode[1])
        keys = sorted(self.table)
        for i, s in enumerate(keys):
            for tt in keys[i + 1:]:
                common = tuple(p for p in s if p in set(tt))
                if not common:
                    continue
                gap = tv_distance(
                    self.table[s].marginal(common),
                    self.table[tt].marginal(common),
                )
                if gap > eps:
                    raise InvalidInput(
                        f"marginal gap {gap} exceeds the declared mode bound {eps}"
                    )

    @property
    def family(self) -> tuple:
        return tuple(sorted(self.table))

    def _answer(self, key: tuple) -> LocalDistribution:
        try:
            return self.table[key]
        except KeyError:
            raise ScopeExceeded(
                "query set not present in the strategy table"
            ) from None


class FoldedStrategy(Strategy):
    """Permutation folding: answer a query through a uniformly permuted
    representative of its coordinate-permutation orbit.

    Queries in the same orbit share one uniform permutation (they read the
    same permuted representative of the base), and each query additionally
    gets independent uniform noise from the stabilizer of the representative.
    For queries with pairwise-distinct orbits and no repeated coordinates this
    is exactly "pick an independent uniform permutation per query point and
    conjugate"; the orbit coupling is what makes the folding equality hold
    verbatim on sets that contain two permutations of the same query.
    """

    claims_folded = True

    def __init__(self, base: Strategy, sample_seed: int = 0,
                 sample_count: int = DEFAULT_SAMPLE_COUNT):
        super().__init__(base.domain, base.locality)
        self.base = base
        self.sample_seed = sample_seed
        self.sample_count = sample_count

    def _orbits(self, key: tuple):
        perms = all_permutations(self.t)
        reps: list = []
        kappa: dict = {}
        rep_of: dict = {}
        for p in key:
            orbit = {pi: _permute_point(p, pi) for pi in perms}
            rep = min(orbit.values(), key=lambda q: q.sort_key())
            rep_of[p] = rep
            kappa[p] = next(
                pi for pi in perms if _permute_point(rep, pi) == p
            )
            if rep not in reps:
                reps.append(rep)
        reps.sort(key=lambda q: q.sort_key())
        stab = {
            rep: tuple(
                pi for pi in all_permutations(self.t)
                if _permute_point(rep, pi) == rep
            )
            for rep in reps
        }
        return reps, rep_of, kappa, stab

    def _answer(self, key: tuple) -> LocalDistribution:
        if self.t == 1:
            return self.base.answer(key)
        perms = all_permutations(self.t)
        reps, rep_of, kappa, stab = self._orbits(key)
        n_outcomes = len(perms) ** len(reps)
        for p in key:
            n_outcomes *= len(stab[rep_of[p]])
        if n_outcomes > EXACT_ENUM_BUDGET:
            return _sampled_distribution(self, key)
        weight = Fraction(1, n_outcomes)
        acc: dict = {}
        tau_spaces = [stab[rep_of[p]] for p in key]
        for sigmas in itertools.product(perms, repeat=len(reps)):
            base_pts = [
                _permute_point(rep, sg) for rep, sg in zip(reps, sigmas)
            ]
            base_d = self.base.answer(base_pts)
            inv = [sg.inverse() for sg in sigmas]
            for bkey, bp in base_d.support():
                bmap = dict(zip(base_d.points, bkey))
                cval = {
                    rep: inv[i].apply(bmap[base_pts[i]])
                    for i, rep in enumerate(reps)
                }
                for taus in itertools.product(*tau_spaces):
                    out = tuple(
                        kappa[p].apply(tau.apply(cval[rep_of[p]]))
                        for p, tau in zip(key, taus)
                    )
                    acc[out] = acc.get(out, ZERO) + bp * weight
        return LocalDistribution(key, acc, validate=False)

    def sample_answer(self, points, rng) -> dict:
        key = canonical_points(points)
        if self.t == 1:
            return self.base.sample_answer(key, rng)
        perms = all_permutations(self.t)
        reps, rep_of, kappa, stab = self._orbits(key)
        sigmas = {rep: perms[rng.randrange(len(perms))] for rep in reps}
        base_pts = {rep: _permute_point(rep, sigmas[rep]) for rep in reps}
        bmap = self.base.sample_answer(list(base_pts.values()), rng)
        out = {}
        for p in key:
            rep = rep_of[p]
            cval = sigmas[rep].inverse().apply(bmap[base_pts[rep]])
            taus = stab[rep]
            tau = taus[rng.randrange(len(taus))]
            out[p] = kappa[p].apply(tau.apply(cval))
        return out


def _permute_point(p, pi: Permutation):
    if isinstance(p, RepeatedQuery):
        return p.permute(pi)
    return p  # t == 1: the only permutation is the identity


class FlattenedStrategy(Strategy):
    """Pack a query set into one repeated query and read back coordinates.

    The base strategy is folded first (mandatory); a set {q_1..q_s} with
    s <= t becomes the t-tuple (q_1, ..., q_s, q_s, ..., q_s), padding with
    copies of the last query in canonical order.
    """

    def __init__(self, base: Strategy):
        folded = base if base.claims_folded else FoldedStrategy(base)
        super().__init__(base.domain.base_domain(), locality=base.t)
        self.base = folded

    def _answer(self, key: tuple) -> LocalDistribution:
        s = len(key)
        base_t = self.base.t
        if s > base_t:
            raise InvalidInput("flattened query set larger than the repetition")
        padded = key + (key[-1],) * (base_t - s)
        q = make_point(padded)
        base_d = self.base.answer([q])
        acc: dict = {}
        for (sym,), bp in base_d.support():
            out = tuple((sym[i],) for i in range(s))
            acc[out] = acc.get(out, ZERO) + bp
        return LocalDistribution(key, acc, validate=False,
                                 meta=dict(base_d.meta))

    def sample_answer(self, points, rng) -> dict:
        key = canonical_points(points)
        padded = key + (key[-1],) * (self.base.t - len(key))
        q = make_point(padded)
        sym = self.base.sample_answer([q], rng)[q]
        return {p: (sym[i],) for i, p in enumerate(key)}


class SelfCorrectedStrategy(Strategy):
    """Answer a query Q through the random pair [R; W], [Q + R; W].

    The base strategy is 2t-repeated; each corrected query draws its own
    independent uniform (R, W) over the t-fold base domain, all base queries
    are batched into one set, and the corrected answer is the first t
    coordinates of the sum of the two base answers.
    """

    def __init__(self, base: Strategy, sample_seed: int = 0,
                 sample_count: int = DEFAULT_SAMPLE_COUNT):
        if base.t % 2 != 0:
            raise InvalidInput("self-correction needs an even repetition count")
        half = Domain(base.domain.kind, base.domain.side, base.t // 2)
        locality = None if base.locality is None else base.locality // 2
        super().__init__(half, locality)
        self.base = base
        self.claims_folded = base.claims_folded
        self.sample_seed = sample_seed
        self.sample_count = sample_count

    @property
    def guaranteed_locality(self) -> Optional[int]:
        # the structural guarantee is 5 below the mechanical answering bound
        if self.base.locality is None:
            return None
        return max(0, self.base.locality // 2 - 5)

    def _rw_space(self) -> list:
        return list(self.domain.points())

    def _answer(self, key: tuple) -> LocalDistribution:
        s = len(key)
        half_count = self.domain.count()
        n_outcomes = (half_count * half_count) ** s
        if n_outcomes > EXACT_ENUM_BUDGET:
            return _sampled_distribution(self, key)
        pts = self._rw_space()
        weight = Fraction(1, n_outcomes)
        acc: dict = {}
        t = self.t
        for combo in itertools.product(pts, repeat=2 * s):
            base_pts = []
            pairs = []
            for i, q in enumerate(key):
                r, w = combo[2 * i], combo[2 * i + 1]
                a = concat_points(r, w)
                b = concat_points(_add_points(q, r), w)
                pairs.append((a, b))
                base_pts.append(a)
                base_pts.append(b)
            base_d = self.base.answer(base_pts)
            for bkey, bp in base_d.support():
                bmap = dict(zip(base_d.points, bkey))
                out = tuple(
                    xor_symbols(bmap[a], bmap[b])[:t] for a, b in pairs
                )
                acc[out] = acc.get(out, ZERO) + bp * weight
        return LocalDistribution(key, acc, validate=False)

    def sample_answer(self, points, rng) -> dict:
        key = canonical_points(points)
        t = self.t
        pairs = []
        base_pts = []
        for q in key:
            r = self.domain.sample_point(rng)
            w = self.domain.sample_point(rng)
            a = concat_points(r, w)
            b = concat_points(_add_points(q, r), w)
            pairs.append((a, b))
            base_pts.extend((a, b))
        bmap = self.base.sample_answer(base_pts, rng)
        return {
            q: xor_symbols(bmap[a], bmap[b])[:t]
            for q, (a, b) in zip(key, pairs)
        }


def _add_points(a, b):
    return a + b


def _sampled_distribution(strategy, key: tuple) -> LocalDistribution:
    rng = random.Random(strategy.sample_seed)
    n = strategy.sample_count
    acc: dict = {}
    w = Fraction(1, n)
    for _ in range(n):
        m = strategy.sample_answer(key, rng)
        out = tuple(m[p] for p in key)
        acc[out] = acc.get(out, ZERO) + w
    return LocalDistribution(
        key, acc, validate=False,
        meta={"exact": False, "samples": n, "seed": strategy.sample_seed},
    )


def fold(strategy: Strategy) -> FoldedStrategy:
    return FoldedStrategy(strategy)


def flatten(strategy: Strategy) -> FlattenedStrategy:
    return FlattenedStrategy(strategy)


def self_correct(strategy: Strategy) -> SelfCorrectedStrategy:
    return SelfCorrectedStrategy(strategy)


# ---------------------------------------------------------------------------
# measurements


def linearity_probability(strategy: Strategy, x, y) -> Fraction:
    """Mass of answers with F(x) + F(y) = F(x+y) in every coordinate."""
    z = _add_points(x, y)
    d = strategy.answer([x, y, z])

    def ok(m):
        return xor_symbols(m[x], m[y]) == m[z]

    return d.prob_of(ok)


def consistency_probability(strategy: Strategy, q, qp) -> Fraction:
    """Mass of answers agreeing on every coordinate where the queries agree."""
    if q == qp:
        return ONE
    cq, cqp = point_coords(q), point_coords(qp)
    shared = [j for j in range(len(cq)) if cq[j] == cqp[j]]
    d = strategy.answer([q, qp])

    def ok(m):
        return all(m[q][j] == m[qp][j] for j in shared)

    return d.prob_of(ok)


def zero_on_zeros_probability(strategy: Strategy, q) -> Fraction:
    """Mass of answers that are 0 on every coordinate where the query is 0^n."""
    zero = strategy.domain.base_zero()
    coords = point_coords(q)
    js = [j for j in range(len(coords)) if coords[j] == zero]
    if not js:
        return ONE
    d = strategy.answer([q])
    return d.prob_of(lambda m: all(m[q][j] == 0 for j in js))


def restriction_gap(strategy: Strategy, q, qp) -> Fraction:
    """Max over events of the gap between the two answers restricted to the
    coordinates where the queries agree, within the joint query {q, q'}."""
    cq, cqp = point_coords(q), point_coords(qp)
    shared = [j for j in range(len(cq)) if cq[j] == cqp[j]]
    if not shared or q == qp:
        return ZERO
    d = strategy.answer([q, qp])
    left: dict = {}
    right: dict = {}
    for key, p in d.support():
        m = d.as_mapping(key)
        lk = tuple(m[q][j] for j in shared)
        rk = tuple(m[qp][j] for j in shared)
        left[lk] = left.get(lk, ZERO) + p
        right[rk] = right.get(rk, ZERO) + p
    keys = set(left) | set(right)
    return sum(abs(left.get(k, ZERO) - right.get(k, ZERO)) for k in keys) / 2


def subsets_of_domain(domain: Domain, k: int, max_sets: int = 20000) -> list:
    """All query sets of size <= k, canonical, smallest first."""
    if domain.count() > 64:
        raise ScopeExceeded(
            f"domain of {domain.count()} points is beyond the exhaustive bound (64)"
        )
    pts = sorted(domain.points(), key=lambda p: p.sort_key())
    fam = []
    for size in range(1, min(k, len(pts)) + 1):
        for combo in itertools.combinations(pts, size):
            fam.append(tuple(combo))
            if len(fam) > max_sets:
                raise ScopeExceeded(
                    f"query-set family exceeds the exhaustive bound ({max_sets})"
                )
    return fam


def ns_defect(strategy: Strategy, k: Optional[int] = None,
              family: Optional[Iterable] = None):
    """Largest marginal gap over pairs of query sets, with a witness pair.

    Returns (epsilon, (S, T)) where epsilon is the max total-variation gap of
    the two marginals on S intersect T; (epsilon, None) when no pair of sets
    in scope intersects. Exhaustive over all size-<=k sets unless an explicit
    family is supplied.
    """
    if family is None:
        if k is None:
            raise InvalidInput("ns_defect needs a locality bound or a family")
        family = subsets_of_domain(strategy.domain, k)
    family = [canonical_points(s) for s in family]
    best = ZERO
    witness = None
    dists = {s: strategy.answer(s) for s in family}
    for i, s in enumerate(family):
        set_s = set(s)
        for tt in family[i + 1:]:
            common = tuple(p for p in tt if p in set_s)
            if not common:
                continue
            gap = tv_distance(
                dists[s].marginal(common), dists[tt].marginal(common)
            )
            if gap > best:
                best, witness = gap, (s, tt)
    return best, witness


def distance_l(f: Strategy, g: Strategy, ell: int,
               family: Optional[Iterable] = None) -> Fraction:
    """Max over size-<=ell query sets of the TV distance between answers."""
    if f.domain != g.domain:
        raise InvalidInput("strategies live on different domains")
    if family is None:
        family = subsets_of_domain(f.domain, ell)
    best = ZERO
    for s in family:
        s = canonical_points(s)
        if len(s) > ell:
            continue
        best = max(best, tv_distance(f.answer(s), g.answer(s)))
    return best


def linearity_defect(strategy: Strategy, max_pairs: int = 4096):
    """(epsilon, witness) with epsilon = max over (x, y) of the linearity miss."""
    count = strategy.domain.count()
    if count * count > max_pairs:
        raise ScopeExceeded("too many point pairs for an exhaustive sweep")
    pts = list(strategy.domain.points())
    worst, witness = ZERO, None
    for x in pts:
        for y in pts:
            miss = ONE - linearity_probability(strategy, x, y)
            if miss > worst:
                worst, witness = miss, (x, y)
    return worst, witness


def consistency_defect(strategy: Strategy, max_pairs: int = 4096):
    count = strategy.domain.count()
    if count * count > max_pairs:
        raise ScopeExceeded("too many point pairs for an exhaustive sweep")
    pts = list(strategy.domain.points())
    worst, witness = ZERO, None
    for q in pts:
        for qp in pts:
            miss = ONE - consistency_probability(strategy, q, qp)
            if miss > worst:
                worst, witness = miss, (q, qp)
    return worst, witness


def zero_on_zeros_defect(strategy: Strategy, max_points: int = 4096):
    count = strategy.domain.count()
    if count > max_points:
        raise ScopeExceeded("too many points for an exhaustive sweep")
    worst, witness = ZERO, None
    for q in strategy.domain.points():
        miss = ONE - zero_on_zeros_probability(strategy, q)
        if miss > worst:
            worst, witness = miss, q
    return worst, witness


# ---------------------------------------------------------------------------
# serialization (bit-exact JSON round trip for table strategies)


def point_to_json(p):
    if isinstance(p, RepeatedQuery):
        return [point_to_json(c) for c in p.coords]
    return p.to_string()


def point_from_json(obj, domain: Domain):
    if isinstance(obj, list):
        base = domain.base_domain()
        return RepeatedQuery([point_from_json(c, base) for c in obj])
    if domain.kind == "bitvector":
        return BitVector.from_string(obj)
    return BitMatrix.from_string(obj)


def _symbol_to_json(sym: tuple) -> str:
    return "".join(str(b) for b in sym)


def strategy_to_json(strategy: TableStrategy) -> dict:
    if not isinstance(strategy, TableStrategy):
        raise InvalidInput("only table strategies serialize; tabulate() first")
    mode = (
        "exact"
        if strategy.mode == "exact"
        else {"almost": str(Fraction(strategy.mode[1]))}
    )
    table = []
    for key in strategy.family:
        d = strategy.table[key]
        table.append(
            {
                "set": [point_to_json(p) for p in key],
                "distribution": [
                    {
                        "assignment": [_symbol_to_json(s) for s in akey],
                        "p": str(p),
                    }
                    for akey, p in sorted(d.support())
                ],
            }
        )
    return {
        "format": "nspcplab-strategy-v1",
        "domain": {
            "kind": strategy.domain.kind,
            "side": strategy.domain.side,
        },
        "alphabet": {"symbol_len": strategy.t},
        "t": strategy.t,
        "k": strategy.locality,
        "mode": mode,
        "table": table,
    }


def strategy_from_json(doc: dict) -> TableStrategy:
    if doc.get("format") != "nspcplab-strategy-v1":
        raise InvalidInput("unrecognized strategy document")
    domain = Domain(doc["domain"]["kind"], doc["domain"]["side"], doc["t"])
    mode = doc["mode"]
    if mode != "exact":
        mode = ("almost", Fraction(mode["almost"]))
    table = {}
    for entry in doc["table"]:
        pts = [point_from_json(p, domain) for p in entry["set"]]
        probs = {
            tuple(
                tuple(int(c) for c in s) for s in row["assignment"]
            ): Fraction(row["p"])
            for row in entry["distribution"]
        }
        table[tuple(pts)] = LocalDistribution(pts, probs)
    return TableStrategy(domain, table, doc["k"], mode=mode, validate=False)


def dumps_strategy(strategy: TableStrategy) -> str:
    return json.dumps(strategy_to_json(strategy), indent=2, sort_keys=True) + "\n"


def loads_strategy(text: str) -> TableStrategy:
    return strategy_from_json(json.loads(text))


def tabulate(strategy: Strategy, family: Iterable,
             mode=None) -> TableStrategy:
    """Record a strategy's answers on a family of sets into a table."""
    table = {}
    for s in family:
        key = canonical_points(s)
        table[key] = strategy.answer(key)
    return TableStrategy(
        strategy.domain,
        table,
        strategy.locality,
        mode=mode or strategy.mode,
        validate=False,
    )
