"""Exact GF(2) vectors and matrices, repeated queries, and index permutations.

Everything here is immutable, hashable, and totally ordered (lexicographically
on bits), so domain points can be deduplicated into canonical query sets and
used as distribution keys. Bits are stored as integer masks; bit i of the mask
is coordinate i.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence, Union

from .errors import InvalidInput


def _parity(x: int) -> int:
    return x.bit_count() & 1


class BitVector:
    """A vector in {0,1}^n with coordinate-wise addition mod 2."""

    __slots__ = ("n", "mask", "_hash")

    def __init__(self, bits: Iterable[int]):
        mask = 0
        n = 0
        for b in bits:
            if b not in (0, 1):
                raise InvalidInput(f"bit out of range: {b!r}")
            mask |= b << n
            n += 1
        self.n = n
        self.mask = mask
        self._hash = hash(("bv", n, mask))

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "BitVector":
        v = object.__new__(cls)
        v.n = n
        v.mask = mask & ((1 << n) - 1)
        v._hash = hash(("bv", n, v.mask))
        return v

    @classmethod
    def zero(cls, n: int) -> "BitVector":
        return cls.from_mask(0, n)

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        return cls(int(c) for c in s)

    @property
    def bits(self) -> tuple:
        return tuple((self.mask >> i) & 1 for i in range(self.n))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        return (self.mask >> i) & 1

    def __add__(self, other: "BitVector") -> "BitVector":
        if not isinstance(other, BitVector) or other.n != self.n:
            raise InvalidInput("dimension mismatch in BitVector addition")
        return BitVector.from_mask(self.mask ^ other.mask, self.n)

    __xor__ = __add__

    def inner(self, other: "BitVector") -> int:
        if other.n != self.n:
            raise InvalidInput("dimension mismatch in inner product")
        return _parity(self.mask & other.mask)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVector)
            and other.n == self.n
            and other.mask == self.mask
        )

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "BitVector") -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        return ("bv", self.n, self.bits)

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __repr__(self) -> str:
        return f"BitVector('{self.to_string()}')"


class BitMatrix:
    """An N x N matrix over GF(2), stored row-major as an integer mask."""

    __slots__ = ("n", "mask", "_hash")

    def __init__(self, rows: Iterable[Iterable[int]]):
        rows = [list(r) for r in rows]
        n = len(rows)
        mask = 0
        for i, row in enumerate(rows):
            if len(row) != n:
                raise InvalidInput("BitMatrix must be square")
            for j, b in enumerate(row):
                if b not in (0, 1):
                    raise InvalidInput(f"bit out of range: {b!r}")
                mask |= b << (i * n + j)
        self.n = n
        self.mask = mask
        self._hash = hash(("bm", n, mask))

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "BitMatrix":
        m = object.__new__(cls)
        m.n = n
        m.mask = mask & ((1 << (n * n)) - 1)
        m._hash = hash(("bm", n, m.mask))
        return m

    @classmethod
    def zero(cls, n: int) -> "BitMatrix":
        return cls.from_mask(0, n)

    @classmethod
    def from_string(cls, s: str) -> "BitMatrix":
        return cls([[int(c) for c in row] for row in s.split("|")])

    def entry(self, i: int, j: int) -> int:
        return (self.mask >> (i * self.n + j)) & 1

    @property
    def rows(self) -> tuple:
        n = self.n
        return tuple(
            tuple((self.mask >> (i * n + j)) & 1 for j in range(n)) for i in range(n)
        )

    def nonzero(self) -> Iterator[tuple]:
        mask = self.mask
        n = self.n
        while mask:
            low = mask & -mask
            pos = low.bit_length() - 1
            yield divmod(pos, n)
            mask ^= low

    def is_upper_triangular(self) -> bool:
        return all(i <= j for i, j in self.nonzero())

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if not isinstance(other, BitMatrix) or other.n != self.n:
            raise InvalidInput("dimension mismatch in BitMatrix addition")
        return BitMatrix.from_mask(self.mask ^ other.mask, self.n)

    __xor__ = __add__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and other.n == self.n
            and other.mask == self.mask
        )

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "BitMatrix") -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        n = self.n
        bits = tuple((self.mask >> p) & 1 for p in range(n * n))
        return ("bm", n, bits)

    def to_string(self) -> str:
        return "|".join("".join(str(b) for b in row) for row in self.rows)

    def __repr__(self) -> str:
        return f"BitMatrix('{self.to_string()}')"


def tensor(u: BitVector, v: BitVector) -> BitMatrix:
    """Rank-one matrix u (x) v with entry (i, j) = u_i * v_j."""
    if u.n != v.n:
        raise InvalidInput("dimension mismatch in tensor")
    n = u.n
    mask = 0
    um = u.mask
    while um:
        low = um & -um
        i = low.bit_length() - 1
        mask |= v.mask << (i * n)
        um ^= low
    return BitMatrix.from_mask(mask, n)


def diag(a: BitVector) -> BitMatrix:
    """Diagonal matrix with a on the diagonal and 0 elsewhere."""
    n = a.n
    mask = 0
    am = a.mask
    while am:
        low = am & -am
        i = low.bit_length() - 1
        mask |= 1 << (i * n + i)
        am ^= low
    return BitMatrix.from_mask(mask, n)


def inner(a: BitMatrix, b: BitMatrix) -> int:
    """Entry-wise product summed mod 2."""
    if a.n != b.n:
        raise InvalidInput("dimension mismatch in inner product")
    return _parity(a.mask & b.mask)


def all_bitvectors(n: int) -> Iterator[BitVector]:
    for mask in range(1 << n):
        yield BitVector.from_mask(mask, n)


def all_bitmatrices(n: int) -> Iterator[BitMatrix]:
    for mask in range(1 << (n * n)):
        yield BitMatrix.from_mask(mask, n)


Point = Union[BitVector, BitMatrix, "RepeatedQuery"]


class RepeatedQuery:
    """An ordered t-tuple of domain points, all from one base domain.

    Addition is coordinate-wise; two t-tuples concatenate to a 2t-tuple.
    """

    __slots__ = ("coords", "_hash")

    def __init__(self, coords: Iterable[Point]):
        coords = tuple(coords)
        if len(coords) < 2:
            raise InvalidInput("RepeatedQuery needs at least 2 coordinates")
        first = coords[0]
        for c in coords[1:]:
            if type(c) is not type(first) or c.n != first.n:
                raise InvalidInput("RepeatedQuery coordinates must share one domain")
        self.coords = coords
        self._hash = hash(("rq", coords))

    @property
    def t(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i: int):
        return self.coords[i]

    def __add__(self, other: "RepeatedQuery") -> "RepeatedQuery":
        if not isinstance(other, RepeatedQuery) or other.t != self.t:
            raise InvalidInput("dimension mismatch in RepeatedQuery addition")
        return RepeatedQuery(a + b for a, b in zip(self.coords, other.coords))

    __xor__ = __add__

    def concat(self, other: "RepeatedQuery") -> "RepeatedQuery":
        return RepeatedQuery(self.coords + other.coords)

    def permute(self, perm: "Permutation") -> "RepeatedQuery":
        return RepeatedQuery(perm.apply(self.coords))

    def __eq__(self, other) -> bool:
        return isinstance(other, RepeatedQuery) and other.coords == self.coords

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "RepeatedQuery") -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        return ("rq", tuple(c.sort_key() for c in self.coords))

    def __repr__(self) -> str:
        return f"RepeatedQuery({list(self.coords)!r})"


class Permutation:
    """A bijection on [t]; mapping[i] is the image of index i (0-based).

    Applied to a query tuple Q it yields (q_{pi(0)}, ..., q_{pi(t-1)}), and
    the same rule applies to answer tuples.
    """

    __slots__ = ("mapping",)

    def __init__(self, mapping: Iterable[int]):
        mapping = tuple(mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise InvalidInput(f"not a permutation: {mapping!r}")
        self.mapping = mapping

    @classmethod
    def identity(cls, t: int) -> "Permutation":
        return cls(range(t))

    @property
    def t(self) -> int:
        return len(self.mapping)

    def apply(self, seq: Sequence) -> tuple:
        if len(seq) != len(self.mapping):
            raise InvalidInput("permutation length mismatch")
        return tuple(seq[i] for i in self.mapping)

    def __call__(self, obj):
        if isinstance(obj, RepeatedQuery):
            return obj.permute(self)
        return self.apply(obj)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for i, p in enumerate(self.mapping):
            inv[p] = i
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self.compose(other))(i) = self(other(i))."""
        return Permutation(self.mapping[j] for j in other.mapping)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and other.mapping == self.mapping

    def __hash__(self) -> int:
        return hash(("perm", self.mapping))

    def __repr__(self) -> str:
        return f"Permutation({list(self.mapping)!r})"


def all_permutations(t: int) -> tuple:
    return tuple(Permutation(p) for p in itertools.permutations(range(t)))


def point_coords(p: Point) -> tuple:
    """Coordinates of a point: a t-tuple for repeated queries, (p,) otherwise."""
    if isinstance(p, RepeatedQuery):
        return p.coords
    return (p,)


def make_point(coords: Sequence) -> Point:
    """Inverse of point_coords: bare point for length 1, RepeatedQuery above."""
    if len(coords) == 1:
        return coords[0]
    return RepeatedQuery(coords)


def concat_points(a: Point, b: Point) -> RepeatedQuery:
    """The stacked query [a; b] over the doubled repetition."""
    return RepeatedQuery(point_coords(a) + point_coords(b))
