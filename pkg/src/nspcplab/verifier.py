"""Query-sampler / decision-predicate pairs and their acceptance probabilities.

Verifiers are input oblivious: the query distribution depends on the instance
only through sizes and the (input-independent) constraint matrix structure,
never through the input bits. Acceptance is computed three ways:

- `acceptance_exact`: full enumeration of the verifier randomness (refused
  above a budget), valid for any strategy;
- `acceptance_classical`: exact factored computation for strategies that are
  mixtures of deterministic proofs, using independence of the randomness
  components consumed by each sub-check;
- `acceptance_mc`: seeded Monte Carlo with a Hoeffding confidence half-width.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .circuits import ConstraintSystem
from .distributions import ONE, ZERO, canonical_points
from .errors import InvalidInput, ScopeExceeded
from .gf2 import BitVector, RepeatedQuery, concat_points, diag, make_point, tensor
from .strategy import (
    ClassicalStrategy,
    Domain,
    Strategy,
    xor_symbols,
)

EXACT_ACCEPTANCE_BUDGET = 1 << 22


class VerifierSpec:
    """Interface: enumerable randomness, a query set per outcome, a predicate."""

    name = "verifier"

    def randomness_count(self) -> int:
        raise NotImplementedError

    def randomness(self) -> Iterator:
        raise NotImplementedError

    def sample(self, rng: random.Random):
        raise NotImplementedError

    def query_set(self, r) -> tuple:
        raise NotImplementedError

    def decide(self, r, answers: dict) -> bool:
        raise NotImplementedError

    def acceptance_deterministic(self, proof: ClassicalStrategy) -> Fraction:
        """Exact acceptance for one deterministic proof; default enumerates."""
        count = self.randomness_count()
        if count > EXACT_ACCEPTANCE_BUDGET:
            raise ScopeExceeded(
                f"randomness space {count} exceeds the enumeration budget "
                f"{EXACT_ACCEPTANCE_BUDGET}"
            )
        hits = 0
        for r in self.randomness():
            answers = {p: proof.value(p) for p in set(self.query_set(r))}
            if self.decide(r, answers):
                hits += 1
        return Fraction(hits, count)


def _vectors(n: int) -> Iterator[BitVector]:
    for mask in range(1 << n):
        yield BitVector.from_mask(mask, n)


class AlmssVerifier(VerifierSpec):
    """The 4-query linear PCP verifier on Hadamard-coded proofs.

    Samples u, v over the wire space and a selector s over the constraints,
    queries {diag(u), diag(v), u (x) v, sum_j s_j P_j}, and accepts iff the
    multiplicativity check and the random-combination satisfiability check
    both pass.
    """

    name = "almss"

    def __init__(self, cs: ConstraintSystem):
        self.cs = cs
        self.n = cs.n_vars
        self.m = cs.m
        # the point space at desk scale is tiny; memoize construction
        self._diag: dict = {}
        self._tensor: dict = {}
        self._combine: dict = {}

    def diag_of(self, u):
        hit = self._diag.get(u)
        if hit is None:
            hit = self._diag[u] = diag(u)
        return hit

    def tensor_of(self, u, v):
        hit = self._tensor.get((u, v))
        if hit is None:
            hit = self._tensor[(u, v)] = tensor(u, v)
        return hit

    def combine_of(self, s):
        hit = self._combine.get(s)
        if hit is None:
            hit = self._combine[s] = self.cs.combine(s)
        return hit

    def randomness_count(self) -> int:
        return 1 << (2 * self.n + self.m)

    def randomness(self):
        for u in _vectors(self.n):
            for v in _vectors(self.n):
                for s in _vectors(self.m):
                    yield (u, v, s)

    def sample(self, rng):
        return (
            BitVector.from_mask(rng.getrandbits(self.n), self.n),
            BitVector.from_mask(rng.getrandbits(self.n), self.n),
            BitVector.from_mask(rng.getrandbits(self.m), self.m),
        )

    def query_set(self, r) -> tuple:
        u, v, s = r
        return (self.diag_of(u), self.diag_of(v), self.tensor_of(u, v),
                self.combine_of(s))

    def decide(self, r, answers) -> bool:
        u, v, s = r
        a_u = answers[self.diag_of(u)][0]
        a_v = answers[self.diag_of(v)][0]
        a_uv = answers[self.tensor_of(u, v)][0]
        a_comb = answers[self.combine_of(s)][0]
        return a_u * a_v == a_uv and a_comb == self.cs.combine_target(s)

    # The two checks read disjoint independent randomness, so for a fixed
    # deterministic proof the acceptance probability factors.
    def acceptance_deterministic(self, proof: ClassicalStrategy) -> Fraction:
        fn = proof.base_fn if proof.base_fn is not None else (
            lambda p: proof.value(p)[0]
        )
        return self._mult_factor(fn) * self._sat_factor(fn)

    def _mult_factor(self, fn) -> Fraction:
        hits = 0
        vecs = list(_vectors(self.n))
        dvals = {u: fn(diag(u)) for u in vecs}
        for u in vecs:
            for v in vecs:
                if dvals[u] * dvals[v] == fn(tensor(u, v)):
                    hits += 1
        return Fraction(hits, len(vecs) ** 2)

    def _sat_factor(self, fn) -> Fraction:
        hits = 0
        for s in _vectors(self.m):
            if fn(self.cs.combine(s)) == self.cs.combine_target(s):
                hits += 1
        return Fraction(hits, 1 << self.m)


class RepeatedAlmssVerifier(VerifierSpec):
    """Parallel repetition: t independent copies, accept iff all pass."""

    def __init__(self, cs: ConstraintSystem, t: int):
        if t < 2:
            raise InvalidInput("use AlmssVerifier for t = 1")
        self.cs = cs
        self.t = t
        self.n = cs.n_vars
        self.m = cs.m
        self.name = f"almss-rep-t{t}"
        self._single = AlmssVerifier(cs)

    def randomness_count(self) -> int:
        return 1 << (self.t * (2 * self.n + self.m))

    def randomness(self):
        singles = list(self._single.randomness())
        for combo in itertools.product(singles, repeat=self.t):
            yield combo

    def sample(self, rng):
        return tuple(self._single.sample(rng) for _ in range(self.t))

    def queries(self, r) -> tuple:
        single = self._single
        q1 = RepeatedQuery([single.diag_of(u) for (u, _, _) in r])
        q2 = RepeatedQuery([single.diag_of(v) for (_, v, _) in r])
        q3 = RepeatedQuery([single.tensor_of(u, v) for (u, v, _) in r])
        q4 = RepeatedQuery([single.combine_of(s) for (_, _, s) in r])
        return q1, q2, q3, q4

    def query_set(self, r) -> tuple:
        return self.queries(r)

    def _coord_ok(self, queries, r, answers, i: int) -> bool:
        q1, q2, q3, q4 = queries
        _, _, s = r[i]
        mult_ok = answers[q1][i] * answers[q2][i] == answers[q3][i]
        sat_ok = answers[q4][i] == self.cs.combine_target(s)
        return mult_ok and sat_ok

    def coordinate_accepts(self, r, answers, i: int) -> bool:
        return self._coord_ok(self.queries(r), r, answers, i)

    def decide(self, r, answers) -> bool:
        queries = self.queries(r)
        return all(
            self._coord_ok(queries, r, answers, i) for i in range(self.t)
        )

    def acceptance_deterministic(self, proof: ClassicalStrategy) -> Fraction:
        if proof.base_fn is not None:
            # coordinate-wise proof, independent per-coordinate randomness
            return self._single.acceptance_deterministic(
                ClassicalStrategy(
                    Domain("bitmatrix", self.n, 1),
                    lambda p: (proof.base_fn(p),),
                    base_fn=proof.base_fn,
                    base_linear=proof.base_linear,
                )
            ) ** self.t
        return super().acceptance_deterministic(proof)


class LinearityTestVerifier(VerifierSpec):
    """Query {X, Y, X+Y} for uniform X, Y; accept on coordinate-wise additivity."""

    name = "linearity-test"

    def __init__(self, domain: Domain):
        self.domain = domain

    def randomness_count(self) -> int:
        return self.domain.count() ** 2

    def randomness(self):
        pts = list(self.domain.points())
        for x in pts:
            for y in pts:
                yield (x, y)

    def sample(self, rng):
        return (self.domain.sample_point(rng), self.domain.sample_point(rng))

    def query_set(self, r) -> tuple:
        x, y = r
        return (x, y, x + y)

    def decide(self, r, answers) -> bool:
        x, y = r
        return xor_symbols(answers[x], answers[y]) == answers[x + y]

    def acceptance_deterministic(self, proof: ClassicalStrategy) -> Fraction:
        if proof.base_fn is not None:
            base = self.domain.base_domain()
            if proof.base_linear:
                return ONE
            if base.count() ** 2 <= EXACT_ACCEPTANCE_BUDGET:
                fn = proof.base_fn
                hits = 0
                pts = list(base.points())
                vals = {p: fn(p) for p in pts}
                for x in pts:
                    for y in pts:
                        if vals[x] ^ vals[y] == fn(x + y):
                            hits += 1
                return Fraction(hits, len(pts) ** 2) ** self.domain.t
        return super().acceptance_deterministic(proof)


class ConsistencyTestVerifier(VerifierSpec):
    """Query the pair {[W; Z1], [W; Z2]}; accept if answers agree on the W block."""

    name = "consistency-test"

    def __init__(self, base: Domain, t: int):
        if base.t != 1:
            raise InvalidInput("base domain must be non-repeated")
        self.base = base
        self.t = t
        self.half = Domain(base.kind, base.side, t)
        self._concat: dict = {}

    def _concat_of(self, a, b):
        hit = self._concat.get((a, b))
        if hit is None:
            hit = self._concat[(a, b)] = concat_points(a, b)
        return hit

    def randomness_count(self) -> int:
        return self.half.count() ** 3

    def randomness(self):
        pts = list(self.half.points())
        for w in pts:
            for z1 in pts:
                for z2 in pts:
                    yield (w, z1, z2)

    def sample(self, rng):
        return tuple(self.half.sample_point(rng) for _ in range(3))

    def query_set(self, r) -> tuple:
        w, z1, z2 = r
        return (self._concat_of(w, z1), self._concat_of(w, z2))

    def decide(self, r, answers) -> bool:
        w, z1, z2 = r
        a1 = answers[self._concat_of(w, z1)]
        a2 = answers[self._concat_of(w, z2)]
        return a1[: self.t] == a2[: self.t]

    def acceptance_deterministic(self, proof: ClassicalStrategy) -> Fraction:
        if proof.base_fn is not None:
            return ONE  # both blocks evaluate the same base on the same W
        return super().acceptance_deterministic(proof)


class LinearPcpSubVerifier(VerifierSpec):
    """The linear-PCP step of the composed verifier: run the repeated 4-query
    decision predicate on self-corrected answers.

    Randomness: one repeated-verifier draw plus an independent (R_i, W_i)
    pair per logical query Q_1..Q_4; the base proof is queried on the batch
    union of {[R_i; W_i], [Q_i + R_i; W_i]}.
    """

    name = "linear-pcp-on-corrected"

    def __init__(self, cs: ConstraintSystem, t: int):
        self.cs = cs
        self.t = t
        self.n = cs.n_vars
        self.m = cs.m
        self.half = Domain("bitmatrix", cs.n_vars, t)
        self._single = AlmssVerifier(cs)
        self._roles: dict = {}
        self._concat: dict = {}
        self._qadd: dict = {}

    def _rep_count(self) -> int:
        return 1 << (self.t * (2 * self.n + self.m))

    def _concat_of(self, a, b):
        hit = self._concat.get((a, b))
        if hit is None:
            hit = self._concat[(a, b)] = concat_points(a, b)
        return hit

    def _qadd_of(self, q, rr):
        hit = self._qadd.get((q, rr))
        if hit is None:
            hit = self._qadd[(q, rr)] = q + rr
        return hit

    def randomness_count(self) -> int:
        return self._rep_count() * (self.half.count() ** 8)

    def _rep_randomness(self):
        singles = list(self._single.randomness())
        yield from itertools.product(singles, repeat=self.t)

    def randomness(self):
        half_pts = list(self.half.points())
        for rep in self._rep_randomness():
            for rw in itertools.product(half_pts, repeat=8):
                yield (rep, tuple(zip(rw[0::2], rw[1::2])))

    def sample(self, rng):
        rep = tuple(self._single.sample(rng) for _ in range(self.t))
        rw = tuple(
            (self.half.sample_point(rng), self.half.sample_point(rng))
            for _ in range(4)
        )
        return (rep, rw)

    def roles(self, rep) -> tuple:
        hit = self._roles.get(rep)
        if hit is None:
            single = self._single
            q1 = make_point([single.diag_of(u) for (u, _, _) in rep])
            q2 = make_point([single.diag_of(v) for (_, v, _) in rep])
            q3 = make_point([single.tensor_of(u, v) for (u, v, _) in rep])
            q4 = make_point([single.combine_of(s) for (_, _, s) in rep])
            hit = self._roles[rep] = (q1, q2, q3, q4)
        return hit

    def base_pairs(self, r) -> tuple:
        rep, rw = r
        pairs = []
        for q, (rr, w) in zip(self.roles(rep), rw):
            pairs.append(
                (self._concat_of(rr, w),
                 self._concat_of(self._qadd_of(q, rr), w))
            )
        return tuple(pairs)

    def query_set(self, r) -> tuple:
        pts = []
        for a, b in self.base_pairs(r):
            pts.extend((a, b))
        return tuple(pts)

    def corrected_symbols(self, r, answers) -> tuple:
        return tuple(
            xor_symbols(answers[a], answers[b])[: self.t]
            for a, b in self.base_pairs(r)
        )

    def decide(self, r, answers) -> bool:
        rep, _ = r
        a1, a2, a3, a4 = self.corrected_symbols(r, answers)
        for i in range(self.t):
            _, _, s = rep[i]
            if a1[i] * a2[i] != a3[i]:
                return False
            if a4[i] != self.cs.combine_target(s):
                return False
        return True

    def acceptance_deterministic(self, proof: ClassicalStrategy) -> Fraction:
        if proof.base_fn is not None and proof.base_linear:
            # F([R;W]) + F([Q+R;W]) telescopes to the base value at Q, so the
            # corrected answers are exactly the repeated linear proof's.
            single = ClassicalStrategy(
                Domain("bitmatrix", self.n, 1),
                lambda p: (proof.base_fn(p),),
                base_fn=proof.base_fn,
                base_linear=True,
            )
            return self._single.acceptance_deterministic(single) ** self.t
        return super().acceptance_deterministic(proof)


class FullVerifier(VerifierSpec):
    """Composed verifier: linearity test, block-consistency test, and the
    linear PCP on the self-corrected proof; accept iff all three accept."""

    def __init__(self, cs: ConstraintSystem, t: int):
        self.cs = cs
        self.t = t
        self.name = f"full-t{t}"
        self.domain = Domain("bitmatrix", cs.n_vars, 2 * t)
        self.lin = LinearityTestVerifier(self.domain)
        self.cons = ConsistencyTestVerifier(Domain("bitmatrix", cs.n_vars), t)
        self.dlin = LinearPcpSubVerifier(cs, t)
        self.required_locality = 13

    def components(self) -> tuple:
        return (("linearity", self.lin), ("consistency", self.cons),
                ("linear-pcp", self.dlin))

    def randomness_count(self) -> int:
        return (
            self.lin.randomness_count()
            * self.cons.randomness_count()
            * self.dlin.randomness_count()
        )

    def randomness(self):
        for rl in self.lin.randomness():
            for rc in self.cons.randomness():
                for rd in self.dlin.randomness():
                    yield (rl, rc, rd)

    def sample(self, rng):
        return (self.lin.sample(rng), self.cons.sample(rng),
                self.dlin.sample(rng))

    def query_set(self, r) -> tuple:
        rl, rc, rd = r
        return (
            self.dlin.query_set(rd)
            + self.lin.query_set(rl)
            + self.cons.query_set(rc)
        )

    def decide(self, r, answers) -> bool:
        rl, rc, rd = r
        return (
            self.lin.decide(rl, answers)
            and self.cons.decide(rc, answers)
            and self.dlin.decide(rd, answers)
        )

    def acceptance_deterministic(self, proof: ClassicalStrategy) -> Fraction:
        # The three checks read disjoint independent randomness components.
        out = ONE
        for _, comp in self.components():
            out *= comp.acceptance_deterministic(proof)
        return out


# ---------------------------------------------------------------------------
# acceptance computations


def acceptance_exact(strategy: Strategy, verifier: VerifierSpec,
                     budget: int = EXACT_ACCEPTANCE_BUDGET) -> Fraction:
    """Exact acceptance probability by enumerating verifier randomness."""
    count = verifier.randomness_count()
    if count > budget:
        raise ScopeExceeded(
            f"randomness space {count} exceeds the enumeration budget {budget}"
        )
    parts = strategy.decompose_classical()
    if parts is not None:
        # same enumeration, but answers are deterministic per component
        total = ZERO
        for w, proof in parts:
            hits = 0
            for r in verifier.randomness():
                answers = {p: proof.value(p) for p in set(verifier.query_set(r))}
                if verifier.decide(r, answers):
                    hits += 1
            total += w * Fraction(hits, count)
        return total
    total = ZERO
    for r in verifier.randomness():
        pts = verifier.query_set(r)
        d = strategy.answer(pts)
        total += d.prob_of(lambda m: verifier.decide(r, m))
    return total / count


def acceptance_classical(strategy: Strategy,
                         verifier: VerifierSpec) -> Optional[Fraction]:
    """Exact acceptance for mixtures of deterministic proofs, or None.

    Conditioned on a mixture component the answers are deterministic, so the
    verifier's per-component acceptance (computed by factored enumeration
    where the verifier supports it) averages exactly.
    """
    parts = strategy.decompose_classical()
    if parts is None:
        return None
    total = ZERO
    for w, proof in parts:
        total += w * verifier.acceptance_deterministic(proof)
    return total


def acceptance_auto(strategy: Strategy, verifier: VerifierSpec,
                    budget: int = EXACT_ACCEPTANCE_BUDGET) -> Fraction:
    value = acceptance_classical(strategy, verifier)
    if value is not None:
        return value
    return acceptance_exact(strategy, verifier, budget)


def hoeffding_half_width(samples: int, confidence: float = 0.99) -> float:
    return math.sqrt(math.log(2 / (1 - confidence)) / (2 * samples))


@dataclass(frozen=True)
class McEstimate:
    estimate: Fraction
    half_width: float
    samples: int
    seed: int


def acceptance_mc(strategy: Strategy, verifier: VerifierSpec, samples: int,
                  seed: int) -> McEstimate:
    """Monte-Carlo acceptance estimate with a 99% Hoeffding half-width."""
    if samples < 1:
        raise InvalidInput("samples must be positive")
    rng = random.Random(seed)
    hits = 0
    for _ in range(samples):
        r = verifier.sample(rng)
        pts = verifier.query_set(r)
        answers = strategy.sample_answer(pts, rng)
        if verifier.decide(r, answers):
            hits += 1
    return McEstimate(
        Fraction(hits, samples), hoeffding_half_width(samples), samples, seed
    )


def first_coordinate_acceptance(strategy: Strategy,
                                verifier: RepeatedAlmssVerifier,
                                budget: int = EXACT_ACCEPTANCE_BUDGET) -> Fraction:
    """Exact probability that coordinate 1 of the repeated verifier accepts."""
    count = verifier.randomness_count()
    if count > budget:
        raise ScopeExceeded(
            f"randomness space {count} exceeds the enumeration budget {budget}"
        )
    total = ZERO
    for r in verifier.randomness():
        pts = verifier.query_set(r)
        d = strategy.answer(pts)
        total += d.prob_of(lambda m: verifier.coordinate_accepts(r, m, 0))
    return total / count


def linearity_test(strategy: Strategy,
                   budget: int = EXACT_ACCEPTANCE_BUDGET) -> Fraction:
    """Exact pass probability of the 3-query additivity test."""
    return acceptance_auto(strategy, LinearityTestVerifier(strategy.domain),
                           budget)


def consistency_test(strategy: Strategy,
                     budget: int = EXACT_ACCEPTANCE_BUDGET) -> Fraction:
    """Exact pass probability of the shared-block agreement test."""
    if strategy.t % 2 != 0:
        raise InvalidInput("consistency test needs a 2t-repeated strategy")
    verifier = ConsistencyTestVerifier(
        strategy.domain.base_domain(), strategy.t // 2
    )
    return acceptance_auto(strategy, verifier, budget)


@dataclass(frozen=True)
class FullVerifierResult:
    acceptance: object  # Fraction or McEstimate
    sub_tests: dict
    mode: str


def full_verifier(strategy: Strategy, cs: ConstraintSystem, t: int,
                  mode: str = "auto", budget: int = EXACT_ACCEPTANCE_BUDGET,
                  samples: int = 2000, seed: int = 0) -> FullVerifierResult:
    """Run the composed verifier; returns acceptance plus sub-test marginals."""
    if strategy.t != 2 * t:
        raise InvalidInput("the composed verifier needs a 2t-repeated strategy")
    if strategy.locality is not None and strategy.locality < 13:
        raise InvalidInput(
            "the composed verifier queries up to 13 points per interaction; "
            f"strategy locality {strategy.locality} is insufficient"
        )
    v = FullVerifier(cs, t)
    subs = {}
    if mode == "mc":
        est = acceptance_mc(strategy, v, samples, seed)
        for name, comp in v.components():
            subs[name] = acceptance_mc(strategy, comp, samples, seed + 1)
        return FullVerifierResult(est, subs, "mc")
    value = acceptance_classical(strategy, v)
    if value is not None:
        for name, comp in v.components():
            subs[name] = acceptance_classical(strategy, comp)
        return FullVerifierResult(value, subs, "exact")
    if mode == "exact" or v.randomness_count() <= budget:
        value = acceptance_exact(strategy, v, budget)
        for name, comp in v.components():
            subs[name] = acceptance_exact(strategy, comp, budget)
        return FullVerifierResult(value, subs, "exact")
    est = acceptance_mc(strategy, v, samples, seed)
    for name, comp in v.components():
        subs[name] = acceptance_mc(strategy, comp, samples, seed + 1)
    return FullVerifierResult(est, subs, "mc")


def query_set_distribution(verifier: VerifierSpec,
                           budget: int = EXACT_ACCEPTANCE_BUDGET) -> dict:
    """Distribution over canonical query sets; used for obliviousness checks."""
    count = verifier.randomness_count()
    if count > budget:
        raise ScopeExceeded(
            f"randomness space {count} exceeds the enumeration budget {budget}"
        )
    out: dict = {}
    w = Fraction(1, count)
    for r in verifier.randomness():
        key = canonical_points(verifier.query_set(r))
        out[key] = out.get(key, ZERO) + w
    return out


def run_report(verifier_name: str, instance: str, t: int, k,
               acceptance, sub_tests: Optional[dict] = None,
               seed: Optional[int] = None, samples: Optional[int] = None,
               wall_time_ms: Optional[float] = None) -> dict:
    """Assemble the standard verifier run report."""
    if isinstance(acceptance, McEstimate):
        mode = "mc"
        value = float(acceptance.estimate)
        seed = acceptance.seed if seed is None else seed
        samples = acceptance.samples if samples is None else samples
    else:
        mode = "exact"
        value = str(Fraction(acceptance))
    subs = {}
    for name, v in (sub_tests or {}).items():
        subs[name] = (
            float(v.estimate) if isinstance(v, McEstimate) else str(Fraction(v))
        )
    return {
        "verifier": verifier_name,
        "instance": instance,
        "t": t,
        "k": k,
        "mode": mode,
        "acceptance": value,
        "sub_tests": subs,
        "seed": seed,
        "samples": samples,
        "wall_time_ms": wall_time_ms,
    }
