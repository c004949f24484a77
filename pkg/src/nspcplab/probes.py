"""Experiment drivers shared by the CLI and the acceptance suite.

Each probe returns a list of plain-dict rows (JSON- and CSV-friendly, exact
rationals as "p/q" strings) so reports are reproducible byte for byte.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .batteries import (
    exact_base_table,
    flatten_battery,
    inconsistent_rogue,
    self_correction_battery,
)
from .salp import make_noisy_family, nearest_exact, nearest_linear
from .strategy import (
    Domain,
    MixtureStrategy,
    Strategy,
    consistency_probability,
    flatten,
    from_classical_proof,
    linearity_probability,
    ns_defect,
    self_correct,
    subsets_of_domain,
    tabulate,
    zero_on_zeros_probability,
)
from .batteries import constant_fn, linear_base_fn
from .gf2 import BitVector
from .verifier import consistency_test, linearity_test

F1 = Fraction(1)


def _frac(x: Fraction) -> str:
    return str(Fraction(x))


def worst_linearity(strategy: Strategy) -> Fraction:
    pts = list(strategy.domain.points())
    return min(
        linearity_probability(strategy, x, y) for x in pts for y in pts
    )


def worst_consistency(strategy: Strategy) -> Fraction:
    pts = list(strategy.domain.points())
    return min(
        consistency_probability(strategy, q, qp) for q in pts for qp in pts
    )


def worst_zero_on_zeros(strategy: Strategy) -> Fraction:
    return min(
        zero_on_zeros_probability(strategy, q)
        for q in strategy.domain.points()
    )


def self_correction_probe(n: int = 2, battery=None) -> list:
    """Measure test-pass probabilities, correct, and check the worst-case
    guarantees of the corrected strategy against its 4x / 8x bounds."""
    rows = []
    for name, f2t in battery or self_correction_battery(n):
        lin_pass = linearity_test(f2t)
        cons_pass = consistency_test(f2t)
        eps = max(F1 - lin_pass, F1 - cons_pass)
        corrected = self_correct(f2t)
        wl = worst_linearity(corrected)
        wc = worst_consistency(corrected)
        wz = worst_zero_on_zeros(corrected)
        rows.append(
            {
                "strategy": name,
                "lin_pass": _frac(lin_pass),
                "cons_pass": _frac(cons_pass),
                "eps": _frac(eps),
                "corrected_worst_linearity": _frac(wl),
                "corrected_worst_consistency": _frac(wc),
                "corrected_worst_zero_on_zeros": _frac(wz),
                "linear_bound_ok": wl >= F1 - 4 * eps,
                "consistent_bound_ok": wc >= F1 - 8 * eps,
                "zero_bound_ok": wz >= F1 - 4 * eps,
            }
        )
    return rows


def flatten_probe(n: int = 2, t: int = 3, battery=None) -> list:
    """Flattening claims: the flattened strategy is (eps2, t)-non-signaling
    and (1 - eps1 - 3*eps2)-linear."""
    rows = []
    for name, ft in battery or flatten_battery(n, t):
        pts = list(ft.domain.points())
        eps1 = max(
            F1 - linearity_probability(ft, x, y) for x in pts for y in pts
        )
        eps2 = max(
            F1 - consistency_probability(ft, q, qp)
            for q in pts
            for qp in pts
        )
        flat = flatten(ft)
        defect, _ = ns_defect(flat, k=ft.t)
        flat_worst_lin = worst_linearity(flat) if ft.t >= 3 else None
        bound = F1 - eps1 - 3 * eps2
        rows.append(
            {
                "strategy": name,
                "eps1": _frac(eps1),
                "eps2": _frac(eps2),
                "flat_ns_defect": _frac(defect),
                "ns_bound_ok": defect <= eps2,
                "flat_worst_linearity": (
                    _frac(flat_worst_lin) if flat_worst_lin is not None else None
                ),
                "linear_bound_ok": (
                    flat_worst_lin >= bound if flat_worst_lin is not None else None
                ),
            }
        )
    return rows


def hypothesis_probe(n: int = 2, k: int = 3, k_prime: int = 2,
                     eps_grid=(Fraction(0), Fraction(1, 16), Fraction(1, 8)),
                     ell: int = 4) -> list:
    """Distance from noisy families to the exact polytope, as an eps curve.

    Reports the measured marginal defect of each constructed family, the LP
    distance to the nearest exactly non-signaling family of locality k', and
    the measured ratio against the 4^k * eps envelope. The curve is measured,
    never asserted to confirm or refute anything about the map's constants.
    """
    domain = Domain("bitvector", n)
    base = exact_base_table(domain, k)
    rogue = inconsistent_rogue(domain, k)
    rows = []
    for eps in eps_grid:
        eps = Fraction(eps)
        fam = make_noisy_family(domain, k, eps, base, rogue)
        measured, _ = ns_defect(fam, k=k)
        res = nearest_exact(fam, k_prime, ell)
        envelope = 4**k * measured
        rows.append(
            {
                "eps": _frac(eps),
                "measured_defect": _frac(measured),
                "k": k,
                "k_prime": k_prime,
                "ell": min(ell, k_prime),
                "delta": _frac(res.delta),
                "envelope_4k_eps": _frac(envelope),
                "within_envelope": res.delta <= envelope,
                "certificate_ok": res.certificate_ok,
            }
        )
    return rows


def rounding_probe(n: int = 2, k_bar: int = 4,
                   eps_grid=(Fraction(1, 64), Fraction(1, 16))) -> list:
    """Nearest exactly-linear family for almost-linear inputs, with the
    (6|Q|+3) * sqrt(eps) per-set bound checked exactly by squaring."""
    domain = Domain("bitvector", n)
    coeff = BitVector.from_mask(1, n)
    fam = subsets_of_domain(domain, k_bar)
    rows = []
    for eps in eps_grid:
        eps = Fraction(eps)
        mix = MixtureStrategy(
            [
                (1 - eps, from_classical_proof(linear_base_fn(coeff), domain)),
                (eps, from_classical_proof(constant_fn(1), domain)),
            ]
        )
        table = tabulate(mix, fam)
        pts = list(domain.points())
        measured = max(
            F1 - linearity_probability(table, x, y) for x in pts for y in pts
        )
        res = nearest_linear(table, k_bar, measured)
        all_ok = all(ok for (_, _, _, ok) in res.per_set)
        singleton_mult = 6 * 1 + 3
        rows.append(
            {
                "eps": _frac(eps),
                "measured_linearity_defect": _frac(measured),
                "k_bar": k_bar,
                "tau": _frac(res.delta),
                "per_set_bound_ok": all_ok,
                "singleton_multiplier": singleton_mult,
                "certificate_ok": res.certificate_ok,
            }
        )
    return rows
