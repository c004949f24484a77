"""Boolean circuits and their compilation to quadratic constraints over GF(2).

A circuit with N wires and n inputs becomes M = N + 1 constraints
<P_j, W (x) W> = c_j on the wire vector W: one per input wire (pinning it to
the input bit), one per gate, and one forcing the output wire to 1. Each P_j
is upper triangular, touches at most three wire variables, and is independent
of the input x; only the constants c_1..c_n depend on x.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import InvalidInput
from .gf2 import BitMatrix, BitVector, inner, tensor

GATE_KINDS = ("AND", "OR", "NOT")


@dataclass(frozen=True)
class Gate:
    kind: str
    out: int
    ins: tuple

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise InvalidInput(f"unknown gate kind {self.kind!r}")
        arity = 1 if self.kind == "NOT" else 2
        if len(self.ins) != arity:
            raise InvalidInput(f"{self.kind} gate takes {arity} input(s)")


@dataclass(frozen=True)
class Circuit:
    """Fan-in <= 2 boolean circuit; wires 1..n are inputs, wire N is the output.

    Gates are keyed by output wire; every wire index used as a gate input must
    be smaller than the gate's output wire, which makes any listing order
    topological.
    """

    n_inputs: int
    n_wires: int
    gates: tuple

    def __post_init__(self):
        n, N = self.n_inputs, self.n_wires
        if not 1 <= n <= N:
            raise InvalidInput("need 1 <= inputs <= wires")
        outs = sorted(g.out for g in self.gates)
        if outs != list(range(n + 1, N + 1)):
            raise InvalidInput("gates must define wires n+1..N exactly once")
        for g in self.gates:
            for w in g.ins:
                if not 1 <= w < g.out:
                    raise InvalidInput(
                        f"gate on wire {g.out} reads wire {w}; inputs must "
                        f"be earlier wires"
                    )

    @property
    def n_constraints(self) -> int:
        return self.n_wires + 1


def evaluate(circuit: Circuit, x: BitVector) -> BitVector:
    """Honest wire values of the circuit run on input x."""
    if len(x) != circuit.n_inputs:
        raise InvalidInput("input length does not match circuit")
    w = list(x.bits) + [0] * (circuit.n_wires - circuit.n_inputs)
    for g in sorted(circuit.gates, key=lambda g: g.out):
        ins = [w[i - 1] for i in g.ins]
        if g.kind == "AND":
            val = ins[0] & ins[1]
        elif g.kind == "OR":
            val = ins[0] | ins[1]
        else:
            val = 1 - ins[0]
        w[g.out - 1] = val
    return BitVector(w)


def output(circuit: Circuit, x: BitVector) -> int:
    return evaluate(circuit, x)[circuit.n_wires - 1]


class ConstraintSystem:
    """The M = N + 1 quadratic constraints of one circuit run.

    Each constraint is (P_j, c_j) with P_j an upper-triangular BitMatrix over
    the N wire variables. A sparse per-constraint view is kept so random
    combinations sum in time proportional to the number of nonzero entries.
    """

    def __init__(self, n_vars: int, constraints: Iterable):
        self.n_vars = n_vars
        self.constraints = tuple(constraints)
        for p, c in self.constraints:
            if p.n != n_vars:
                raise InvalidInput("constraint matrix size mismatch")
            if not p.is_upper_triangular():
                raise InvalidInput("constraint matrices must be upper triangular")
            if c not in (0, 1):
                raise InvalidInput("constraint constants are bits")
        self._cmask = sum((c << j) for j, (_, c) in enumerate(self.constraints))

    @property
    def m(self) -> int:
        return len(self.constraints)

    def sparse(self, j: int) -> tuple:
        """Nonzero coordinates of P_j."""
        return tuple(self.constraints[j][0].nonzero())

    def combine(self, s: BitVector) -> BitMatrix:
        """The random combination sum_j s_j P_j."""
        if len(s) != self.m:
            raise InvalidInput("selector length must equal constraint count")
        mask = 0
        sm = s.mask
        while sm:
            low = sm & -sm
            j = low.bit_length() - 1
            mask ^= self.constraints[j][0].mask
            sm ^= low
        return BitMatrix.from_mask(mask, self.n_vars)

    def combine_target(self, s: BitVector) -> int:
        """sum_j s_j c_j mod 2."""
        return (s.mask & self._cmask).bit_count() & 1

    def holds_on(self, w: BitVector) -> bool:
        ww = tensor(w, w)
        return all(inner(p, ww) == c for p, c in self.constraints)


def arithmetize(circuit: Circuit, x: BitVector) -> ConstraintSystem:
    """Compile a circuit run into its quadratic constraint system.

    Over GF(2) subtraction is addition, so the gate polynomials collapse:
    AND gives w_j + w_a w_b, OR gives w_j + w_a + w_b + w_a w_b, and NOT
    gives w_j + w_a with constant 1. Linear terms and squares land on the
    diagonal; cross terms w_i w_i' with i < i' land at (i, i').
    """
    if len(x) != circuit.n_inputs:
        raise InvalidInput("input length does not match circuit")
    N = circuit.n_wires
    constraints = []

    def matrix(linear=(), quadratic=()):
        mask = 0
        for i in linear:
            mask ^= 1 << ((i - 1) * N + (i - 1))
        for i, j in quadratic:
            if i == j:
                mask ^= 1 << ((i - 1) * N + (i - 1))
            else:
                lo, hi = min(i, j), max(i, j)
                mask ^= 1 << ((lo - 1) * N + (hi - 1))
        return BitMatrix.from_mask(mask, N)

    for j in range(1, circuit.n_inputs + 1):
        constraints.append((matrix(linear=[j]), x[j - 1]))
    for g in sorted(circuit.gates, key=lambda g: g.out):
        if g.kind == "AND":
            p = matrix(linear=[g.out], quadratic=[tuple(g.ins)])
            c = 0
        elif g.kind == "OR":
            p = matrix(linear=[g.out, *g.ins], quadratic=[tuple(g.ins)])
            c = 0
        else:
            p = matrix(linear=[g.out, g.ins[0]])
            c = 1
        constraints.append((p, c))
    constraints.append((matrix(linear=[N]), 1))
    return ConstraintSystem(N, constraints)


class LinearProof:
    """The intended Hadamard proof L(M) = <M, w (x) w>, linear by construction."""

    __slots__ = ("coeff",)

    def __init__(self, w: BitVector):
        self.coeff = tensor(w, w)

    @property
    def n(self) -> int:
        return self.coeff.n

    def __call__(self, m: BitMatrix) -> int:
        return inner(self.coeff, m)


def intended_proof(w: BitVector) -> LinearProof:
    return LinearProof(w)


class CircuitFormatError(InvalidInput):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_circuit(text: str) -> Circuit:
    """Parse the one-gate-per-line circuit format.

    Header `inputs n wires N`, then lines `AND out in1 in2`, `OR out in1 in2`,
    or `NOT out in1`. Blank lines and lines starting with '#' are ignored.
    """
    lines = text.splitlines()
    header = None
    gates = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 4 or parts[0] != "inputs" or parts[2] != "wires":
                raise CircuitFormatError(
                    "expected header 'inputs n wires N'", lineno
                )
            try:
                header = (int(parts[1]), int(parts[3]))
            except ValueError:
                raise CircuitFormatError("header counts must be integers", lineno)
            continue
        kind = parts[0].upper()
        if kind not in GATE_KINDS:
            raise CircuitFormatError(f"unknown gate {parts[0]!r}", lineno)
        arity = 1 if kind == "NOT" else 2
        if len(parts) != 2 + arity:
            raise CircuitFormatError(
                f"{kind} expects {arity + 1} wire indices", lineno
            )
        try:
            idx = [int(p) for p in parts[1:]]
        except ValueError:
            raise CircuitFormatError("wire indices must be integers", lineno)
        if any(i < 1 for i in idx):
            raise CircuitFormatError("wire indices start at 1", lineno)
        gates.append((lineno, Gate(kind, idx[0], tuple(idx[1:]))))
    if header is None:
        raise CircuitFormatError("missing header", len(lines) or 1)
    n, N = header
    for lineno, g in gates:
        if g.out <= n or g.out > N:
            raise CircuitFormatError(
                f"gate output wire {g.out} outside n+1..N", lineno
            )
        if any(w >= g.out for w in g.ins):
            raise CircuitFormatError(
                f"gate on wire {g.out} reads a later wire (non-topological)",
                lineno,
            )
    try:
        return Circuit(n, N, tuple(g for _, g in gates))
    except InvalidInput as e:
        raise CircuitFormatError(str(e), gates[-1][0] if gates else 1) from None


def format_circuit(circuit: Circuit) -> str:
    lines = [f"inputs {circuit.n_inputs} wires {circuit.n_wires}"]
    for g in sorted(circuit.gates, key=lambda g: g.out):
        lines.append(" ".join([g.kind, str(g.out), *[str(i) for i in g.ins]]))
    return "\n".join(lines) + "\n"


def all_circuits(max_wires: int) -> Iterable[Circuit]:
    """Every circuit with at most max_wires wires, for exhaustive checks."""
    for n in range(1, max_wires + 1):
        for N in range(n, max_wires + 1):
            yield from _circuits_with(n, N)


def _circuits_with(n: int, N: int):
    def extend(gates, out):
        if out > N:
            yield Circuit(n, N, tuple(gates))
            return
        prev = range(1, out)
        for a in prev:
            yield from extend(gates + [Gate("NOT", out, (a,))], out + 1)
        for a in prev:
            for b in prev:
                if b < a:
                    continue
                for kind in ("AND", "OR"):
                    yield from extend(gates + [Gate(kind, out, (a, b))], out + 1)

    yield from extend([], n + 1)
