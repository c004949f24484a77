"""Exact-rational linear programming: two-phase primal simplex, Bland's rule.

No floating point anywhere. Every optimal solve carries dual values forming a
zero-duality-gap certificate that `verify_certificate` rechecks by direct
substitution. Bland's smallest-index pivoting rule guarantees termination on
degenerate programs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InvalidInput

F0 = Fraction(0)
F1 = Fraction(1)

LE, GE, EQ = "<=", ">=", "=="


@dataclass
class Constraint:
    coeffs: dict
    sense: str
    rhs: Fraction

    def __post_init__(self):
        if self.sense not in (LE, GE, EQ):
            raise InvalidInput(f"unknown sense {self.sense!r}")
        self.coeffs = {k: Fraction(v) for k, v in self.coeffs.items() if v != 0}
        self.rhs = Fraction(self.rhs)


class LinearProgram:
    """max/min of a linear objective over named nonnegative variables."""

    def __init__(self, maximize: bool = True):
        self.maximize = maximize
        self.variables: list = []
        self._var_index: dict = {}
        self.objective: dict = {}
        self.constraints: list = []

    def add_variable(self, name: str) -> str:
        if name in self._var_index:
            raise InvalidInput(f"duplicate variable {name!r}")
        self._var_index[name] = len(self.variables)
        self.variables.append(name)
        return name

    def ensure_variable(self, name: str) -> str:
        if name not in self._var_index:
            self.add_variable(name)
        return name

    def set_objective(self, coeffs: dict):
        for name in coeffs:
            if name not in self._var_index:
                raise InvalidInput(f"objective references unknown {name!r}")
        self.objective = {k: Fraction(v) for k, v in coeffs.items()}

    def add_constraint(self, coeffs: dict, sense: str, rhs) -> int:
        for name in coeffs:
            if name not in self._var_index:
                raise InvalidInput(f"constraint references unknown {name!r}")
        self.constraints.append(Constraint(dict(coeffs), sense, rhs))
        return len(self.constraints) - 1

    def objective_value(self, assignment: dict) -> Fraction:
        return sum(
            (c * assignment.get(v, F0) for v, c in self.objective.items()),
            start=F0,
        )


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: Optional[Fraction] = None
    assignment: dict = field(default_factory=dict)
    duals: list = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Dense simplex tableau in equality form with a full artificial basis.

    Column order: structural variables, slacks, artificials; the artificial
    columns double as B^{-1}, which is where the duals are read from.
    """

    def __init__(self, rows, rhs, cost):
        self.m = len(rows)
        self.cost = cost  # minimization costs for structural+slack columns
        self.n_real = len(cost)
        self.n_total = self.n_real + self.m
        self.tab = []
        for i in range(self.m):
            art = [F0] * self.m
            art[i] = F1
            self.tab.append(list(rows[i]) + art + [rhs[i]])
        self.basis = [self.n_real + i for i in range(self.m)]
        # phase-1 objective row: minimize the sum of artificials
        self.z1 = [F0] * (self.n_total + 1)
        for i in range(self.m):
            for j in range(self.n_total + 1):
                self.z1[j] -= self.tab[i][j]
        for i in range(self.m):
            self.z1[self.n_real + i] = F0
        # phase-2 objective row, kept up to date during phase 1
        self.z2 = [Fraction(c) for c in cost] + [F0] * (self.m + 1)

    def _pivot(self, row: int, col: int):
        tab = self.tab
        piv = tab[row][col]
        inv = F1 / piv
        tab[row] = [a * inv for a in tab[row]]
        prow = tab[row]
        for i in range(self.m):
            if i == row:
                continue
            f = tab[i][col]
            if f:
                tab[i] = [a - f * b for a, b in zip(tab[i], prow)]
        for z in (self.z1, self.z2):
            f = z[col]
            if f:
                for j in range(self.n_total + 1):
                    z[j] -= f * prow[j]
        self.basis[row] = col

    def _bland_step(self, z, allowed) -> str:
        col = -1
        for j in range(self.n_total):
            if j in allowed and z[j] < 0:
                col = j
                break
        if col < 0:
            return "optimal"
        row, best, best_var = -1, None, None
        for i in range(self.m):
            a = self.tab[i][col]
            if a > 0:
                ratio = self.tab[i][-1] / a
                key = (ratio, self.basis[i])
                if best is None or key < (best, best_var):
                    best, best_var, row = ratio, self.basis[i], i
        if row < 0:
            return "unbounded"
        self._pivot(row, col)
        return "pivoted"

    def run(self, z, allowed) -> str:
        while True:
            res = self._bland_step(z, allowed)
            if res != "pivoted":
                return res


def solve(program: LinearProgram) -> LPSolution:
    """Two-phase primal simplex with Bland's rule; exact rationals throughout."""
    n = len(program.variables)
    rows, rhs, senses = [], [], []
    slack_cols = []  # (column, constraint index, sign)
    n_slacks = sum(1 for c in program.constraints if c.sense != EQ)
    width = n + n_slacks
    slack_at = n
    for ci, c in enumerate(program.constraints):
        row = [F0] * width
        for name, coef in c.coeffs.items():
            row[program._var_index[name]] = coef
        b = c.rhs
        if c.sense != EQ:
            sign = F1 if c.sense == LE else -F1
            row[slack_at] = sign
            slack_cols.append((slack_at, ci, sign))
            slack_at += 1
        if b < 0:
            row = [-a for a in row]
            b = -b
            flipped = True
        else:
            flipped = False
        rows.append(row)
        rhs.append(b)
        senses.append((c.sense, flipped))

    sign = -1 if program.maximize else 1
    cost = [F0] * width
    for name, coef in program.objective.items():
        cost[program._var_index[name]] = sign * coef

    t = _Tableau(rows, rhs, cost)
    real = set(range(t.n_real))

    status = t.run(t.z1, real)
    # phase-1 objective is -(sum of artificials); infeasible iff it stays < 0
    if status == "unbounded" or t.z1[-1] < 0:
        if t.z1[-1] < 0:
            return LPSolution("infeasible")
        raise AssertionError("phase 1 cannot be unbounded")
    # drive lingering artificials out of the basis where possible
    for i in range(t.m):
        if t.basis[i] >= t.n_real:
            for j in range(t.n_real):
                if t.tab[i][j] != 0:
                    t._pivot(i, j)
                    break

    status = t.run(t.z2, real)
    if status == "unbounded":
        return LPSolution("unbounded")

    assignment = {name: F0 for name in program.variables}
    for i, b in enumerate(t.basis):
        if b < n:
            assignment[program.variables[b]] = t.tab[i][-1]
    # duals: y = c_B B^{-1}, read off the artificial columns of the cost row;
    # z2 holds c_j - y'A_j there with c_art = 0, so y_i = -z2[art_i]
    duals = []
    for ci in range(t.m):
        y = -t.z2[t.n_real + ci]
        csense, flipped = senses[ci]
        if flipped:
            y = -y
        duals.append(sign * y)

    objective = program.objective_value(assignment)
    return LPSolution("optimal", objective, assignment, duals)


def verify_certificate(program: LinearProgram, sol: LPSolution) -> bool:
    """Recheck optimality by substitution: primal feasibility, dual
    feasibility, and equality of the primal and dual objectives."""
    if not sol.optimal:
        return False
    x = sol.assignment
    if any(v < 0 for v in x.values()):
        return False
    for c in program.constraints:
        lhs = sum((coef * x.get(nm, F0) for nm, coef in c.coeffs.items()),
                  start=F0)
        if c.sense == LE and lhs > c.rhs:
            return False
        if c.sense == GE and lhs < c.rhs:
            return False
        if c.sense == EQ and lhs != c.rhs:
            return False
    y = sol.duals
    if len(y) != len(program.constraints):
        return False
    # dual sign conditions (for a maximization: y >= 0 on <=, y <= 0 on >=)
    for yi, c in zip(y, program.constraints):
        if c.sense == EQ:
            continue
        want_nonneg = (c.sense == LE) == program.maximize
        if want_nonneg and yi < 0:
            return False
        if not want_nonneg and yi > 0:
            return False
    # reduced costs: for max, y'A_j >= c_j for every variable; for min, <=
    col: dict = {name: F0 for name in program.variables}
    for yi, c in zip(y, program.constraints):
        for nm, coef in c.coeffs.items():
            col[nm] += yi * coef
    for name in program.variables:
        cj = program.objective.get(name, F0)
        if program.maximize and col[name] < cj:
            return False
        if not program.maximize and col[name] > cj:
            return False
    dual_obj = sum(
        (yi * c.rhs for yi, c in zip(y, program.constraints)), start=F0
    )
    return dual_obj == sol.objective


def _decimal_exact(x: Fraction) -> Optional[str]:
    """Finite decimal expansion of x, or None when there is none."""
    den = x.denominator
    two = five = 0
    while den % 2 == 0:
        den //= 2
        two += 1
    while den % 5 == 0:
        den //= 5
        five += 1
    if den != 1:
        return None
    shift = max(two, five)
    scaled = x * 10**shift
    s = str(scaled.numerator)
    if shift == 0:
        return s
    sign = "-" if scaled.numerator < 0 else ""
    digits = s.lstrip("-").rjust(shift + 1, "0")
    return f"{sign}{digits[:-shift]}.{digits[-shift:]}"


def export_lp_text(program: LinearProgram, name: str = "program"):
    """Render in the textual LP interchange format.

    Coefficients with finite decimal expansions are written exactly; the rest
    are written as rounded decimals and recorded as exact "p/q" strings in the
    returned sidecar, keyed by constraint and variable.
    """
    sidecar: dict = {}

    def fmt(x: Fraction, where: str) -> str:
        d = _decimal_exact(x)
        if d is not None:
            return d
        sidecar[where] = f"{x.numerator}/{x.denominator}"
        return repr(float(x))

    def terms(coeffs: dict, where: str) -> str:
        parts = []
        for nm in program.variables:
            if nm not in coeffs or coeffs[nm] == 0:
                continue
            c = coeffs[nm]
            s = fmt(abs(c), f"{where}:{nm}")
            parts.append(("- " if c < 0 else "+ ") + f"{s} {nm}")
        if not parts:
            return "0 " + program.variables[0]
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else out

    lines = [f"\\ {name}", "Maximize" if program.maximize else "Minimize",
             " obj: " + terms(program.objective, "obj"), "Subject To"]
    for i, c in enumerate(program.constraints):
        sense = {LE: "<=", GE: ">=", EQ: "="}[c.sense]
        lines.append(
            f" c{i}: " + terms(c.coeffs, f"c{i}")
            + f" {sense} " + fmt(c.rhs, f"c{i}:rhs")
        )
    lines.append("Bounds")
    for nm in program.variables:
        lines.append(f" 0 <= {nm}")
    lines.append("End")
    return "\n".join(lines) + "\n", sidecar
