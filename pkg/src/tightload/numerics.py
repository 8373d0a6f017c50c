"""Exact scalars and finitely supported vectors.

Scalars are :class:`fractions.Fraction`; nothing in this package ever touches a
float.  A :class:`SparseVector` is an immutable map from positive integer
indices to nonzero fractions, so its support is exactly its key set.
"""

from __future__ import annotations

import re
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Union

Rational = Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_rational(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` with integer ``p`` and positive ``q``."""
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"not a rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(num, den)


def render_rational(r: Fraction) -> str:
    r = Fraction(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


def as_rational(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact scalars")
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, _RationalABC):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as a rational scalar")


class UnderspecifiedAssignment(KeyError):
    """An assignment is missing a value for an index in a vector's support."""


DenseAssignment = Union[Mapping[int, object], Sequence[object], Callable[[int], object]]


def _lookup(x: DenseAssignment, k: int) -> Fraction:
    if isinstance(x, SparseVector):
        return x.coeff(k)
    if callable(x) and not isinstance(x, (Mapping, Sequence)):
        return as_rational(x(k))
    if isinstance(x, Mapping):
        if k not in x:
            raise UnderspecifiedAssignment(k)
        return as_rational(x[k])
    if not 1 <= k <= len(x):
        raise UnderspecifiedAssignment(k)
    return as_rational(x[k - 1])


class SparseVector(Mapping):
    """Finitely supported vector indexed by positive integers.

    Zero entries are dropped on construction, so ``len(v)`` is the size of the
    support and ``bool(v)`` is false exactly for the zero vector.  Indexing a
    key outside the support raises ``KeyError`` like any mapping; use
    :meth:`coeff` for the total function.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[int, object] | Iterable[tuple[int, object]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        clean: dict[int, Fraction] = {}
        for k, v in items:
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise ValueError(f"indices are positive integers, got {k!r}")
            v = as_rational(v)
            if v:
                clean[k] = v
        self._entries = dict(sorted(clean.items()))
        self._hash = None

    @classmethod
    def _trusted(cls, entries: dict[int, Fraction]) -> SparseVector:
        # entries already pruned; only sorted here
        obj = cls.__new__(cls)
        obj._entries = dict(sorted(entries.items()))
        obj._hash = None
        return obj

    def __getitem__(self, k: int) -> Fraction:
        return self._entries[k]

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, SparseVector):
            return self._entries == other._entries
        if isinstance(other, Mapping):
            return self._entries == SparseVector(other)._entries
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {render_rational(v)}" for k, v in self._entries.items())
        return f"SparseVector({{{body}}})"

    def coeff(self, k: int) -> Fraction:
        return self._entries.get(k, ZERO)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._entries)

    def max_index(self) -> int:
        return max(self._entries) if self._entries else 0

    def scale(self, c) -> SparseVector:
        c = as_rational(c)
        if not c:
            return SparseVector()
        return SparseVector._trusted({k: c * v for k, v in self._entries.items()})

    def __add__(self, other: SparseVector) -> SparseVector:
        return add_scaled(self, ONE, other)

    def __sub__(self, other: SparseVector) -> SparseVector:
        return add_scaled(self, -ONE, other)

    def __neg__(self) -> SparseVector:
        return self.scale(-1)

    def __mul__(self, c) -> SparseVector:
        return self.scale(c)

    __rmul__ = __mul__


def add_scaled(u: SparseVector, c, v: SparseVector) -> SparseVector:
    """Return ``u + c*v`` with zero entries pruned."""
    c = as_rational(c)
    if not c or not v:
        return u
    out = dict(u._entries)
    for k, vk in v._entries.items():
        s = out.get(k, ZERO) + c * vk
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return SparseVector._trusted(out)


def dot(u: SparseVector, x: DenseAssignment) -> Fraction:
    """Sum of ``u[k] * x[k]`` over the support of ``u``.

    ``x`` may be a mapping, a 1-based sequence or a callable on indices.  Only
    indices in the support of ``u`` are looked up, which is what makes the
    product well defined for infinite assignments.
    """
    total = ZERO
    for k, uk in u._entries.items():
        total += uk * _lookup(x, k)
    return total


def unit_vector(j: int) -> SparseVector:
    if j < 1:
        raise ValueError(f"unit vector index must be >= 1, got {j}")
    return SparseVector._trusted({j: ONE})


def linear_combination(coeffs: Mapping[int, Fraction], vectors: Callable[[int], SparseVector]) -> SparseVector:
    acc = SparseVector()
    for i, c in coeffs.items():
        acc = add_scaled(acc, c, vectors(i))
    return acc
