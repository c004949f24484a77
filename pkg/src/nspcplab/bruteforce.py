"""Independent brute-force oracles for validating the other modules.

Everything here recomputes results from first principles, sharing only the
GF(2) primitives with the code under test: wrapper distributions are
re-derived by direct enumeration of internal randomness, classical maxima by
enumerating every deterministic proof, total variation by the literal
max-over-events definition, and tiny LP optima by vertex enumeration. Budgets
are enforced by refusal, never by silent sampling.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InvalidInput, ScopeExceeded
from .gf2 import (
    BitMatrix,
    BitVector,
    RepeatedQuery,
    all_bitmatrices,
    all_bitvectors,
    concat_points,
)

F0 = Fraction(0)
F1 = Fraction(1)


@dataclass(frozen=True)
class ExhaustiveScope:
    """Budget limits for the oracles; exceeding any of them raises."""

    max_domain: int = 16
    max_proofs: int = 1 << 16
    max_outcomes: int = 1 << 22
    max_event_atoms: int = 20


DEFAULT_SCOPE = ExhaustiveScope()


def _base_points(kind: str, side: int) -> list:
    if kind == "bitvector":
        return list(all_bitvectors(side))
    return list(all_bitmatrices(side))


def _domain_points(domain) -> list:
    base = _base_points(domain.kind, domain.side)
    if domain.t == 1:
        return base
    return [
        RepeatedQuery(c) for c in itertools.product(base, repeat=domain.t)
    ]


def _sorted_points(points) -> tuple:
    return tuple(sorted(set(points), key=lambda p: p.sort_key()))


def classical_max_acceptance(verifier, domain,
                             scope: ExhaustiveScope = DEFAULT_SCOPE):
    """Exact maximum acceptance over all deterministic binary proofs.

    Returns (value, witness) with the witness as a point -> bit mapping.
    """
    if domain.t != 1:
        raise ScopeExceeded("classical enumeration only covers binary alphabets")
    pts = _domain_points(domain)
    if len(pts) > scope.max_domain:
        raise ScopeExceeded(
            f"domain of {len(pts)} points exceeds the bound {scope.max_domain}"
        )
    n_proofs = 1 << len(pts)
    if n_proofs > scope.max_proofs:
        raise ScopeExceeded(
            f"{n_proofs} proofs exceed the bound {scope.max_proofs}"
        )
    outcomes = list(verifier.randomness())
    if n_proofs * len(outcomes) > scope.max_outcomes:
        raise ScopeExceeded(
            f"{n_proofs * len(outcomes)} proof/outcome pairs exceed the bound "
            f"{scope.max_outcomes}"
        )
    queries = [tuple(set(verifier.query_set(r))) for r in outcomes]
    best, best_mask = -1, 0
    for mask in range(n_proofs):
        values = {p: ((mask >> i) & 1,) for i, p in enumerate(pts)}
        hits = 0
        for r, q in zip(outcomes, queries):
            if verifier.decide(r, {p: values[p] for p in q}):
                hits += 1
        if hits > best:
            best, best_mask = hits, mask
    witness = {p: (best_mask >> i) & 1 for i, p in enumerate(pts)}
    return Fraction(best, len(outcomes)), witness


def wrapper_distribution(strategy, points,
                         scope: ExhaustiveScope = DEFAULT_SCOPE):
    """Recompute a strategy's answer by direct enumeration, independently of
    the strategy module's own computation path.

    Returns (canonical_points, {assignment: probability}).
    """
    key = _sorted_points(points)
    return key, _distribution(strategy, key, scope)


def _distribution(strategy, key: tuple, scope: ExhaustiveScope) -> dict:
    from . import strategy as sm  # class tags only; no computation reused

    if isinstance(strategy, sm.ClassicalStrategy):
        return {tuple(strategy.value(p) for p in key): F1}
    if isinstance(strategy, sm.TableStrategy):
        d = strategy.table[key]
        return dict(d.probs)
    if isinstance(strategy, sm.MixtureStrategy):
        out: dict = {}
        for w, comp in strategy.components:
            for akey, p in _distribution(comp, key, scope).items():
                out[akey] = out.get(akey, F0) + w * p
        return out
    if isinstance(strategy, sm.FoldedStrategy):
        return _folded(strategy, key, scope)
    if isinstance(strategy, sm.FlattenedStrategy):
        return _flattened(strategy, key, scope)
    if isinstance(strategy, sm.SelfCorrectedStrategy):
        return _self_corrected(strategy, key, scope)
    raise InvalidInput(f"no oracle path for {type(strategy).__name__}")


def _apply_perm(pi, seq):
    return tuple(seq[i] for i in pi)


def _inv_perm(pi):
    inv = [0] * len(pi)
    for i, img in enumerate(pi):
        inv[img] = i
    return tuple(inv)


def _permuted(p, pi):
    if isinstance(p, RepeatedQuery):
        return RepeatedQuery(_apply_perm(pi, p.coords))
    return p


def _folded(strategy, key: tuple, scope: ExhaustiveScope) -> dict:
    # orbit-coupled folding: one shared permutation per coordinate-permutation
    # orbit, plus independent stabilizer noise per query
    t = strategy.t
    if t == 1:
        return _distribution(strategy.base, key, scope)
    perms = list(itertools.permutations(range(t)))
    rep_of, kappa = {}, {}
    reps = []
    for p in key:
        images = {pi: _permuted(p, pi) for pi in perms}
        rep = min(images.values(), key=lambda q: q.sort_key())
        rep_of[p] = rep
        kappa[p] = next(pi for pi in perms if _permuted(rep, pi) == p)
        if rep not in reps:
            reps.append(rep)
    reps.sort(key=lambda q: q.sort_key())
    stabs = {
        rep: [pi for pi in perms if _permuted(rep, pi) == rep] for rep in reps
    }
    total = len(perms) ** len(reps)
    for p in key:
        total *= len(stabs[rep_of[p]])
    if total > scope.max_outcomes:
        raise ScopeExceeded("folding randomness exceeds the oracle budget")
    out: dict = {}
    w = Fraction(1, total)
    tau_spaces = [stabs[rep_of[p]] for p in key]
    for sigmas in itertools.product(perms, repeat=len(reps)):
        base_pts = [_permuted(r, sg) for r, sg in zip(reps, sigmas)]
        sub_key = _sorted_points(base_pts)
        base = _distribution(strategy.base, sub_key, scope)
        pos = {q: sub_key.index(q) for q in base_pts}
        for bkey, bp in base.items():
            cval = {
                rep: _apply_perm(_inv_perm(sg), bkey[pos[pt]])
                for rep, sg, pt in zip(reps, sigmas, base_pts)
            }
            for taus in itertools.product(*tau_spaces):
                akey = tuple(
                    _apply_perm(kappa[p], _apply_perm(tau, cval[rep_of[p]]))
                    for p, tau in zip(key, taus)
                )
                out[akey] = out.get(akey, F0) + bp * w
    return out


def _flattened(strategy, key: tuple, scope: ExhaustiveScope) -> dict:
    base_t = strategy.base.t
    if len(key) > base_t:
        raise InvalidInput("flattened query set larger than the repetition")
    coords = list(key) + [key[-1]] * (base_t - len(key))
    q = coords[0] if len(coords) == 1 else RepeatedQuery(coords)
    base = _distribution(strategy.base, (q,), scope)
    out: dict = {}
    for (sym,), bp in base.items():
        akey = tuple((sym[i],) for i in range(len(key)))
        out[akey] = out.get(akey, F0) + bp
    return out


def _self_corrected(strategy, key: tuple, scope: ExhaustiveScope) -> dict:
    t = strategy.t
    half_pts = _domain_points(strategy.domain)
    total = (len(half_pts) ** 2) ** len(key)
    if total > scope.max_outcomes:
        raise ScopeExceeded("correction randomness exceeds the oracle budget")
    out: dict = {}
    w = Fraction(1, total)
    for combo in itertools.product(half_pts, repeat=2 * len(key)):
        pairs = []
        base_points = []
        for i, q in enumerate(key):
            r, wv = combo[2 * i], combo[2 * i + 1]
            a = concat_points(r, wv)
            b = concat_points(q + r, wv)
            pairs.append((a, b))
            base_points.extend((a, b))
        sub_key = _sorted_points(base_points)
        base = _distribution(strategy.base, sub_key, scope)
        pos = {p: sub_key.index(p) for p in sub_key}
        for bkey, bp in base.items():
            answer = tuple(
                tuple(
                    x ^ y
                    for x, y in zip(bkey[pos[a]][:t], bkey[pos[b]][:t])
                )
                for a, b in pairs
            )
            out[answer] = out.get(answer, F0) + bp * w
    return out


def tv_by_events(p: Mapping, q: Mapping,
                 scope: ExhaustiveScope = DEFAULT_SCOPE) -> Fraction:
    """Literal total variation: max over all events of the probability gap.

    Accepts plain mappings or LocalDistribution-like objects with .probs.
    """
    p = getattr(p, "probs", p)
    q = getattr(q, "probs", q)
    atoms = sorted(set(p) | set(q))
    if len(atoms) > scope.max_event_atoms:
        raise ScopeExceeded(
            f"{len(atoms)} atoms exceed the event-enumeration bound "
            f"{scope.max_event_atoms}"
        )
    best = F0
    for mask in range(1 << len(atoms)):
        gap = F0
        for i, a in enumerate(atoms):
            if (mask >> i) & 1:
                gap += p.get(a, F0) - q.get(a, F0)
        best = max(best, abs(gap))
    return best


def _solve_square(rows: list, rhs: list):
    """Gaussian elimination over the rationals; None when singular."""
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = F1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def lp_max_by_vertices(program) -> Fraction:
    """Optimum of a small bounded LP by enumerating basic solutions.

    Every vertex of the feasible region lies on n linearly independent
    constraint hyperplanes (including the x_i >= 0 bounds); enumerate the
    candidates, keep the feasible ones, and take the best objective. Only
    valid for bounded feasible programs with few variables.
    """
    names = program.variables
    n = len(names)
    if n > 10:
        raise ScopeExceeded("vertex enumeration limited to 10 variables")
    rows = []
    for c in program.constraints:
        rows.append(([c.coeffs.get(nm, F0) for nm in names], c.sense, c.rhs))
    for i in range(n):
        e = [F0] * n
        e[i] = F1
        rows.append((e, ">=", F0))
    best = None
    for chosen in itertools.combinations(range(len(rows)), n):
        mat = [rows[i][0] for i in chosen]
        rhs = [rows[i][2] for i in chosen]
        x = _solve_square(mat, rhs)
        if x is None:
            continue
        feasible = True
        for coeffs, sense, b in rows:
            lhs = sum((c * v for c, v in zip(coeffs, x)), start=F0)
            if sense == "<=" and lhs > b:
                feasible = False
            elif sense == ">=" and lhs < b:
                feasible = False
            elif sense == "==" and lhs != b:
                feasible = False
            if not feasible:
                break
        if not feasible:
            continue
        obj = sum(
            (program.objective.get(nm, F0) * v for nm, v in zip(names, x)),
            start=F0,
        )
        if best is None:
            best = obj
        elif program.maximize:
            best = max(best, obj)
        else:
            best = min(best, obj)
    if best is None:
        raise InvalidInput("no feasible vertex found")
    return best
