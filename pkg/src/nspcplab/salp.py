"""Sherali-Adams polytopes as exact LPs: optimal adversaries and rounding probes.

Feasible points of the exact program are precisely the locality-k
non-signaling families on the given query-set family; the noisy program
relaxes every pairwise marginal-agreement constraint to a total-variation
ball of radius epsilon (linearized as half the L1 distance with one auxiliary
variable per assignment of the intersection).

Whenever the family is not the complete collection of size-<=k sets, the
optimum only upper-bounds the true locality-k value; such results carry a
RELAXATION label.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .distributions import ONE, ZERO, LocalDistribution, canonical_points, tv_distance
from .errors import InvalidInput, ScopeExceeded
from .simplex import EQ, GE, LE, LinearProgram, LPSolution, solve, verify_certificate
from .strategy import Domain, Strategy, TableStrategy, subsets_of_domain, xor_symbols
from .verifier import EXACT_ACCEPTANCE_BUDGET, VerifierSpec

F0 = Fraction(0)


def symbols_for(t: int) -> list:
    return list(itertools.product((0, 1), repeat=t))


def assignments_for(n_points: int, t: int) -> list:
    return list(itertools.product(symbols_for(t), repeat=n_points))


@dataclass
class SAProgram:
    program: LinearProgram
    domain: Domain
    k: int
    family: tuple
    mode: object
    consistency: str
    complete: bool
    var_names: dict = field(default_factory=dict)  # (set_index, akey) -> name

    @property
    def label(self) -> str:
        return "COMPLETE" if self.complete else "RELAXATION"

    def var(self, set_index: int, akey) -> str:
        return self.var_names[(set_index, akey)]

    def set_index(self, points) -> int:
        key = canonical_points(points)
        return self.family.index(key)

    def strategy_from(self, assignment: dict, locality: Optional[int] = None,
                      mode="exact") -> TableStrategy:
        table = {}
        for si, s in enumerate(self.family):
            probs = {}
            for akey in assignments_for(len(s), self.domain.t):
                p = assignment.get(self.var(si, akey), F0)
                if p:
                    probs[akey] = p
            table[s] = LocalDistribution(s, probs)
        return TableStrategy(
            self.domain, table, locality if locality is not None else self.k,
            mode=mode, validate=False,
        )


def _is_complete(domain: Domain, k: int, family: Sequence) -> bool:
    size = min(k, domain.count())
    expected = sum(
        _comb(domain.count(), i) for i in range(1, size + 1)
    )
    return len(family) == expected


def _comb(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def build_sa_lp(domain: Domain, k: int, family: Optional[Iterable] = None,
                mode="exact", consistency: str = "pairwise",
                linear_pins: bool = False,
                value_pins: Sequence = ()) -> SAProgram:
    """Assemble the locality-k polytope LP over a query-set family.

    mode is "exact" or ("noisy", eps). consistency chooses the constraint
    encoding: "pairwise" emits one marginal-equality block per pair of sets
    (the definition, and the only valid choice for noisy mode or families not
    closed under subsets); "nested" links each set to its one-smaller subsets,
    which is equivalent on subset-closed families and much smaller.
    """
    if family is None:
        family = subsets_of_domain(domain, k)
    family = tuple(sorted({canonical_points(s) for s in family}))
    for s in family:
        if len(s) > k:
            raise InvalidInput(f"family set of size {len(s)} exceeds locality {k}")
        for p in s:
            if not domain.contains(p):
                raise InvalidInput("family point outside the domain")
    t = domain.t
    noisy = mode != "exact"
    eps = Fraction(mode[1]) if noisy else F0
    if noisy and consistency != "pairwise":
        raise InvalidInput("noisy mode requires pairwise consistency")

    lp = LinearProgram(maximize=True)
    sap = SAProgram(
        program=lp, domain=domain, k=k, family=family, mode=mode,
        consistency=consistency,
        complete=_is_complete(domain, k, family),
    )
    index_of = {s: i for i, s in enumerate(family)}

    for si, s in enumerate(family):
        for ai, akey in enumerate(assignments_for(len(s), t)):
            name = f"y_s{si}_a{ai}"
            lp.add_variable(name)
            sap.var_names[(si, akey)] = name

    for si, s in enumerate(family):
        lp.add_constraint(
            {sap.var(si, a): 1 for a in assignments_for(len(s), t)}, EQ, 1
        )

    def marginal_terms(si: int, s: tuple, positions: tuple) -> dict:
        """sub-assignment -> list of variable names summing to its marginal."""
        groups: dict = {}
        for akey in assignments_for(len(s), t):
            sub = tuple(akey[i] for i in positions)
            groups.setdefault(sub, []).append(sap.var(si, akey))
        return groups

    if consistency == "nested":
        fam_set = set(family)
        for si, s in enumerate(family):
            if len(s) == 1:
                continue
            for drop in range(len(s)):
                child = s[:drop] + s[drop + 1:]
                if child not in fam_set:
                    raise InvalidInput(
                        "nested consistency needs a subset-closed family"
                    )
                ci = index_of[child]
                positions = tuple(i for i in range(len(s)) if i != drop)
                groups = marginal_terms(si, s, positions)
                for sub, names in groups.items():
                    coeffs = {nm: Fraction(1) for nm in names}
                    coeffs[sap.var(ci, sub)] = (
                        coeffs.get(sap.var(ci, sub), F0) - 1
                    )
                    lp.add_constraint(coeffs, EQ, 0)
    else:
        for si in range(len(family)):
            s = family[si]
            sset = set(s)
            for ti in range(si + 1, len(family)):
                tt = family[ti]
                common = tuple(p for p in tt if p in sset)
                if not common:
                    continue
                pos_s = tuple(s.index(p) for p in common)
                pos_t = tuple(tt.index(p) for p in common)
                gs = marginal_terms(si, s, pos_s)
                gt = marginal_terms(ti, tt, pos_t)
                subs = sorted(set(gs) | set(gt))
                if not noisy:
                    for sub in subs:
                        coeffs: dict = {}
                        for nm in gs.get(sub, ()):
                            coeffs[nm] = coeffs.get(nm, F0) + 1
                        for nm in gt.get(sub, ()):
                            coeffs[nm] = coeffs.get(nm, F0) - 1
                        lp.add_constraint(coeffs, EQ, 0)
                else:
                    gap_names = []
                    for bi, sub in enumerate(subs):
                        g = lp.add_variable(f"g_s{si}_s{ti}_b{bi}")
                        gap_names.append(g)
                        plus: dict = {g: Fraction(-1)}
                        minus: dict = {g: Fraction(-1)}
                        for nm in gs.get(sub, ()):
                            plus[nm] = plus.get(nm, F0) + 1
                            minus[nm] = minus.get(nm, F0) - 1
                        for nm in gt.get(sub, ()):
                            plus[nm] = plus.get(nm, F0) - 1
                            minus[nm] = minus.get(nm, F0) + 1
                        lp.add_constraint(plus, LE, 0)
                        lp.add_constraint(minus, LE, 0)
                    lp.add_constraint(
                        {nm: 1 for nm in gap_names}, LE, 2 * eps
                    )

    if linear_pins:
        _add_linear_pins(sap)

    for point, symbol, prob in value_pins:
        hit = False
        for si, s in enumerate(family):
            if point not in s:
                continue
            hit = True
            pos = s.index(point)
            names = [
                sap.var(si, akey)
                for akey in assignments_for(len(s), t)
                if akey[pos] == tuple(symbol)
            ]
            lp.add_constraint({nm: 1 for nm in names}, EQ, Fraction(prob))
        if not hit:
            raise InvalidInput("value pin names a point outside the family")

    return sap


def _add_linear_pins(sap: SAProgram):
    """Probability-1 additivity on every triple {x, y, x+y} inside a family set."""
    t = sap.domain.t
    seen = set()
    pts = list(sap.domain.points())
    triples = []
    for x in pts:
        for y in pts:
            z = x + y
            support = canonical_points([x, y, z])
            key = (support, x, y) if x.sort_key() <= y.sort_key() else (support, y, x)
            if key in seen:
                continue
            seen.add(key)
            triples.append((x, y, z, support))
    emitted = set()
    for si, s in enumerate(sap.family):
        sset = set(s)
        for x, y, z, support in triples:
            if not set(support) <= sset:
                continue
            ix, iy, iz = s.index(x), s.index(y), s.index(z)
            bad = []
            for akey in assignments_for(len(s), t):
                if xor_symbols(akey[ix], akey[iy]) != akey[iz]:
                    bad.append(sap.var(si, akey))
            row_key = (si, tuple(sorted(bad)))
            if not bad or row_key in emitted:
                continue
            emitted.add(row_key)
            sap.program.add_constraint({nm: 1 for nm in bad}, EQ, 0)


def acceptance_objective(sap: SAProgram, verifier: VerifierSpec,
                         budget: int = EXACT_ACCEPTANCE_BUDGET) -> dict:
    """Objective coefficients: expected acceptance as a linear functional."""
    count = verifier.randomness_count()
    if count > budget:
        raise ScopeExceeded(
            f"randomness space {count} exceeds the enumeration budget {budget}"
        )
    index_of = {s: i for i, s in enumerate(sap.family)}
    w = Fraction(1, count)
    obj: dict = {}
    for r in verifier.randomness():
        key = canonical_points(verifier.query_set(r))
        si = index_of.get(key)
        if si is None:
            raise InvalidInput("verifier issued a set outside the family")
        for akey in assignments_for(len(key), sap.domain.t):
            if verifier.decide(r, dict(zip(key, akey))):
                nm = sap.var(si, akey)
                obj[nm] = obj.get(nm, F0) + w
    return obj


@dataclass
class SAResult:
    value: Fraction
    solution: LPSolution
    sap: SAProgram
    strategy: TableStrategy
    certificate_ok: bool

    @property
    def label(self) -> str:
        return self.sap.label


def max_acceptance(verifier: VerifierSpec, domain: Domain, k: int,
                   family: str = "issued", mode="exact",
                   linear_pins: bool = False,
                   consistency: Optional[str] = None) -> SAResult:
    """Optimal acceptance over the locality-k polytope restricted to a family.

    family="issued" restricts to the sets the verifier can issue (an upper
    bound on the true value, labeled RELAXATION); family="complete" uses all
    size-<=k sets, which is exact but only feasible on tiny domains.
    """
    issued = sorted(
        {canonical_points(verifier.query_set(r)) for r in verifier.randomness()}
    )
    for s in issued:
        if len(s) > k:
            raise InvalidInput(
                f"verifier issues sets of size {len(s)}; locality {k} too small"
            )
    if family == "complete":
        fam = subsets_of_domain(domain, min(k, domain.count()))
        if consistency is None:
            consistency = "nested" if mode == "exact" else "pairwise"
    elif family == "issued":
        fam = issued
        if consistency is None:
            consistency = "pairwise"
    else:
        raise InvalidInput("family must be 'issued' or 'complete'")
    sap = build_sa_lp(domain, k, family=fam, mode=mode,
                      consistency=consistency, linear_pins=linear_pins)
    sap.program.set_objective(acceptance_objective(sap, verifier))
    sol = solve(sap.program)
    if not sol.optimal:
        raise AssertionError(
            f"acceptance LP came back {sol.status}; the polytope is never empty"
        )
    ok = verify_certificate(sap.program, sol)
    witness = sap.strategy_from(sol.assignment, locality=k, mode=(
        "exact" if mode == "exact" else ("almost", Fraction(mode[1]))
    ))
    return SAResult(sol.objective, sol, sap, witness, ok)


@dataclass
class NearestResult:
    delta: Fraction
    solution: LPSolution
    sap: SAProgram
    strategy: TableStrategy
    scope: tuple
    certificate_ok: bool
    per_set: list = field(default_factory=list)


def _scope_distributions(f: Strategy, scope: Iterable) -> dict:
    return {canonical_points(s): f.answer(s) for s in scope}


def nearest_exact(f: Strategy, k_prime: int, ell: int,
                  scope_family: Optional[Iterable] = None,
                  polytope_family: Optional[Iterable] = None) -> NearestResult:
    """Closest exactly non-signaling family of locality k' in max-over-sets TV.

    The distance scope is every supplied set of size <= min(ell, k'); an F'
    of locality k' has no marginals on larger sets. Epigraph LP: minimize tau
    subject to TV(F_S, F'_S) <= tau on the scope and F' in the exact polytope.
    """
    if scope_family is None:
        if isinstance(f, TableStrategy):
            scope_family = f.family
        else:
            scope_family = subsets_of_domain(f.domain, min(ell, k_prime))
    limit = min(ell, k_prime)
    scope = tuple(
        sorted(
            {
                canonical_points(s)
                for s in scope_family
                if len(canonical_points(s)) <= limit
            }
        )
    )
    if not scope:
        raise InvalidInput("empty distance scope")
    targets = _scope_distributions(f, scope)
    sap = build_sa_lp(
        f.domain, k_prime, family=polytope_family, mode="exact",
        consistency="nested" if polytope_family is None else "pairwise",
    )
    lp = sap.program
    tau = lp.add_variable("tau")
    index_of = {s: i for i, s in enumerate(sap.family)}
    for s in scope:
        si = index_of.get(s)
        if si is None:
            raise InvalidInput("scope set missing from the polytope family")
        d_names = []
        for ai, akey in enumerate(assignments_for(len(s), f.domain.t)):
            target = targets[s].probs.get(akey, F0)
            dv = lp.add_variable(f"d_s{si}_a{ai}")
            d_names.append(dv)
            nm = sap.var(si, akey)
            lp.add_constraint({nm: 1, dv: -1}, LE, target)
            lp.add_constraint({nm: -1, dv: -1}, LE, -target)
        coeffs = {nm: Fraction(1) for nm in d_names}
        coeffs[tau] = Fraction(-2)
        lp.add_constraint(coeffs, LE, 0)
    lp.maximize = False
    lp.set_objective({tau: 1})
    sol = solve(lp)
    if not sol.optimal:
        raise AssertionError("nearest-point LP is always feasible and bounded")
    ok = verify_certificate(lp, sol)
    strat = sap.strategy_from(sol.assignment, locality=k_prime)
    per_set = [
        (s, tv_distance(targets[s], strat.answer(s))) for s in scope
    ]
    return NearestResult(sol.objective, sol, sap, strat, scope, ok, per_set)


def bound_holds_sqrt(value: Fraction, multiplier: int, eps: Fraction) -> bool:
    """Exact check of value <= multiplier * sqrt(eps) by squaring."""
    if value < 0:
        return True
    return value * value <= multiplier * multiplier * Fraction(eps)


def nearest_linear(f: Strategy, k_bar: int, eps: Fraction,
                   scope_family: Optional[Iterable] = None,
                   polytope_family: Optional[Iterable] = None) -> NearestResult:
    """Closest exactly linear, exactly non-signaling family of locality k-bar.

    Same epigraph LP as nearest_exact plus probability-1 additivity pins.
    per_set rows are (set, tv, bound, holds) with bound multiplier 6|S|+3
    checked exactly against sqrt(eps) by squaring.
    """
    if scope_family is None:
        if isinstance(f, TableStrategy):
            scope_family = f.family
        else:
            scope_family = subsets_of_domain(f.domain, k_bar)
    scope = tuple(
        sorted(
            {
                canonical_points(s)
                for s in scope_family
                if len(canonical_points(s)) <= k_bar
            }
        )
    )
    targets = _scope_distributions(f, scope)
    sap = build_sa_lp(
        f.domain, k_bar, family=polytope_family, mode="exact",
        consistency="nested" if polytope_family is None else "pairwise",
        linear_pins=True,
    )
    lp = sap.program
    tau = lp.add_variable("tau")
    index_of = {s: i for i, s in enumerate(sap.family)}
    for s in scope:
        si = index_of.get(s)
        if si is None:
            raise InvalidInput("scope set missing from the polytope family")
        d_names = []
        for ai, akey in enumerate(assignments_for(len(s), f.domain.t)):
            target = targets[s].probs.get(akey, F0)
            dv = lp.add_variable(f"d_s{si}_a{ai}")
            d_names.append(dv)
            nm = sap.var(si, akey)
            lp.add_constraint({nm: 1, dv: -1}, LE, target)
            lp.add_constraint({nm: -1, dv: -1}, LE, -target)
        coeffs = {nm: Fraction(1) for nm in d_names}
        coeffs[tau] = Fraction(-2)
        lp.add_constraint(coeffs, LE, 0)
    lp.maximize = False
    lp.set_objective({tau: 1})
    sol = solve(lp)
    if not sol.optimal:
        raise AssertionError("the linear polytope always contains a point")
    ok = verify_certificate(lp, sol)
    strat = sap.strategy_from(sol.assignment, locality=k_bar)
    per_set = []
    for s in scope:
        gap = tv_distance(targets[s], strat.answer(s))
        mult = 6 * len(s) + 3
        per_set.append((s, gap, mult, bound_holds_sqrt(gap, mult, eps)))
    return NearestResult(sol.objective, sol, sap, strat, scope, ok, per_set)


def make_noisy_family(domain: Domain, k: int, eps: Fraction,
                      base: Strategy, rogue: Strategy) -> TableStrategy:
    """Tablewise mixture (1-eps) base + eps rogue over all size-<=k sets.

    With a non-signaling base and a deliberately inconsistent rogue the
    marginal defect scales linearly, so the result is (eps', k)-non-signaling
    with eps' proportional to eps; callers measure the exact defect.
    """
    eps = Fraction(eps)
    fam = subsets_of_domain(domain, k)
    table = {}
    for s in fam:
        table[s] = LocalDistribution.mixture(
            [(1 - eps, base.answer(s)), (eps, rogue.answer(s))]
        )
    return TableStrategy(domain, table, k, mode=("almost", ONE), validate=False)
