"""Finite and lazily streamed row-finite matrices, and exact elimination on them.

Rows are :class:`SparseVector` values indexed from 1.  Two independent
elimination routines live here on purpose:

* :func:`row_echelon` is a textbook column-by-column reduced row echelon form,
  used for kernels and tightness verdicts;
* :class:`RowSpace` is an incremental echelon basis over a growing list of rows
  that remembers how each basis row was combined from the original rows.  It
  answers "is ``e_j`` in the row span, and with which coefficients?" and backs
  the lazy expanding-window search.

Agreement between the two is one of the checks the test-suite leans on.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .numerics import (
    ONE,
    DenseAssignment,
    SparseVector,
    add_scaled,
    as_rational,
    dot,
    unit_vector,
)


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteMatrix:
    n_rows: int
    n_cols: int
    rows: tuple[SparseVector, ...]

    def __post_init__(self):
        rows = tuple(r if isinstance(r, SparseVector) else SparseVector(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != self.n_rows:
            raise DimensionError(f"expected {self.n_rows} rows, got {len(rows)}")
        for i, r in enumerate(rows, 1):
            if r and r.max_index() > self.n_cols:
                raise DimensionError(f"row {i} has support outside 1..{self.n_cols}")

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[object]], n_cols: int | None = None) -> FiniteMatrix:
        if n_cols is None:
            n_cols = max((len(r) for r in data), default=0)
        rows = [SparseVector((j, as_rational(v)) for j, v in enumerate(r, 1)) for r in data]
        return cls(len(rows), n_cols, tuple(rows))

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping[int, object]], n_cols: int | None = None) -> FiniteMatrix:
        rows = tuple(SparseVector(r) for r in rows)
        if n_cols is None:
            n_cols = max((r.max_index() for r in rows), default=0)
        return cls(len(rows), n_cols, rows)

    @classmethod
    def identity(cls, n: int) -> FiniteMatrix:
        return cls(n, n, tuple(unit_vector(i) for i in range(1, n + 1)))

    @classmethod
    def zero(cls, n_rows: int, n_cols: int) -> FiniteMatrix:
        return cls(n_rows, n_cols, tuple(SparseVector() for _ in range(n_rows)))

    def row(self, i: int) -> SparseVector:
        if not 1 <= i <= self.n_rows:
            raise IndexError(f"row {i} outside 1..{self.n_rows}")
        return self.rows[i - 1]

    def entry(self, i: int, j: int) -> Fraction:
        return self.row(i).coeff(j)

    def column(self, j: int) -> SparseVector:
        return SparseVector((i, r.coeff(j)) for i, r in enumerate(self.rows, 1))

    def dense(self) -> list[list[Fraction]]:
        return [[r.coeff(j) for j in range(1, self.n_cols + 1)] for r in self.rows]

    def transpose(self) -> FiniteMatrix:
        cols: list[dict[int, Fraction]] = [{} for _ in range(self.n_cols)]
        for i, r in enumerate(self.rows, 1):
            for j, v in r.items():
                cols[j - 1][i] = v
        return FiniteMatrix(self.n_cols, self.n_rows, tuple(SparseVector(c) for c in cols))

    def with_row(self, i: int, row: SparseVector) -> FiniteMatrix:
        rows = list(self.rows)
        rows[i - 1] = row
        return FiniteMatrix(self.n_rows, self.n_cols, tuple(rows))

    def __repr__(self) -> str:
        return f"FiniteMatrix({self.n_rows}x{self.n_cols}, rows={list(self.rows)})"


class StreamEnded(IndexError):
    """A finite row stream was asked for a row past its end."""


class LazyMatrix:
    """Row stream of a matrix with countably many rows and columns.

    ``row_fn(i)`` defines row ``i``; it must be deterministic so that every
    consumer can replay the stream from the start.  ``n_rows`` is set for
    finite streams.  ``column_rows(j)``, when given, returns the full (finite)
    set of rows whose support contains ``j``, or ``None`` when that set is
    infinite or unknown; the matching layer uses it to tell closed columns from
    open ones.
    """

    def __init__(
        self,
        row_fn: Callable[[int], Mapping[int, object]],
        *,
        name: str = "lazy",
        n_rows: int | None = None,
        column_rows: Callable[[int], Optional[frozenset[int]]] | None = None,
    ):
        self._row_fn = row_fn
        self.name = name
        self.n_rows = n_rows
        self._column_rows = column_rows
        self._cache: dict[int, SparseVector] = {}

    @classmethod
    def from_finite(cls, A: FiniteMatrix, name: str = "finite") -> LazyMatrix:
        cols: dict[int, set[int]] = {}
        for i, r in enumerate(A.rows, 1):
            for j in r:
                cols.setdefault(j, set()).add(i)
        return cls(
            lambda i: A.rows[i - 1],
            name=name,
            n_rows=A.n_rows,
            column_rows=lambda j: frozenset(cols.get(j, ())),
        )

    def row(self, i: int) -> SparseVector:
        if i < 1 or (self.n_rows is not None and i > self.n_rows):
            raise StreamEnded(f"row {i} is not in the stream {self.name!r}")
        r = self._cache.get(i)
        if r is None:
            raw = self._row_fn(i)
            r = raw if isinstance(raw, SparseVector) else SparseVector(raw)
            self._cache[i] = r
        return r

    def rows(self) -> Iterator[tuple[int, SparseVector]]:
        """Fresh generator over ``(index, row)`` from row 1; each call replays."""
        for i in itertools.count(1):
            if self.n_rows is not None and i > self.n_rows:
                return
            yield i, self.row(i)

    def has_row(self, i: int) -> bool:
        return i >= 1 and (self.n_rows is None or i <= self.n_rows)

    def column_rows(self, j: int) -> Optional[frozenset[int]]:
        if self._column_rows is None:
            return None
        return self._column_rows(j)

    def prefix(self, n: int, n_cols: int | None = None) -> FiniteMatrix:
        if self.n_rows is not None:
            n = min(n, self.n_rows)
        rows = tuple(self.row(i) for i in range(1, n + 1))
        if n_cols is None:
            n_cols = max((r.max_index() for r in rows), default=0)
        return FiniteMatrix(n, n_cols, rows)

    def __repr__(self) -> str:
        size = "inf" if self.n_rows is None else self.n_rows
        return f"LazyMatrix({self.name!r}, rows={size})"


# -- certificates --------------------------------------------------------------


@dataclass(frozen=True)
class RowCombination:
    """``sum(coeffs[i] * A_i) == e_target``."""

    target: int
    coeffs: SparseVector

    def combine(self, row: Callable[[int], SparseVector]) -> SparseVector:
        acc = SparseVector()
        for i, c in self.coeffs.items():
            acc = add_scaled(acc, c, row(i))
        return acc


@dataclass(frozen=True)
class KernelWitness:
    x: SparseVector
    index: int

    def __post_init__(self):
        if not self.x.coeff(self.index):
            raise ValueError("distinguished index must carry a nonzero entry")


@dataclass(frozen=True)
class Tight:
    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class NotTight:
    witness: KernelWitness

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class LeftInverse:
    Z: FiniteMatrix


@dataclass(frozen=True)
class Found:
    combination: RowCombination
    rows_consumed: int


@dataclass(frozen=True)
class Exhausted:
    """Search ran out of budget (or of stream).

    ``complete`` is set only when a finite stream was read to the end, in
    which case the negative answer is definitive.
    """

    rows_consumed: int
    step: int | None = None
    complete: bool = False


# -- basic products ------------------------------------------------------------


def mat_vec(A: FiniteMatrix, x: DenseAssignment) -> list[Fraction]:
    if isinstance(x, Sequence) and len(x) != A.n_cols:
        raise DimensionError(f"assignment has {len(x)} entries, matrix has {A.n_cols} columns")
    return [dot(r, x) for r in A.rows]


def verify_row_combination(row: Callable[[int], SparseVector], comb: RowCombination) -> bool:
    return comb.combine(row) == unit_vector(comb.target)


def verify_kernel_witness(A: FiniteMatrix, w: KernelWitness) -> bool:
    if not w.x or not w.x.coeff(w.index):
        return False
    if w.x.max_index() > A.n_cols:
        return False
    return all(dot(r, w.x.coeff) == 0 for r in A.rows)


# -- reduced row echelon form --------------------------------------------------


def row_echelon(A: FiniteMatrix) -> tuple[list[SparseVector], list[int]]:
    """Reduced row echelon form: nonzero rows and their pivot columns.

    Pivots are chosen column by column in ascending order, each normalised
    to 1 and cleared from every other row.  The result depends only on the
    row span, so it doubles as a canonical form for span comparisons.
    """
    pending = [r for r in A.rows if r]
    basis: list[SparseVector] = []
    pivots: list[int] = []
    for c in range(1, A.n_cols + 1):
        idx = next((k for k, r in enumerate(pending) if r.coeff(c)), None)
        if idx is None:
            continue
        p = pending.pop(idx)
        p = p.scale(1 / p[c])
        basis = [add_scaled(b, -b.coeff(c), p) for b in basis]
        pending = [q for q in (add_scaled(r, -r.coeff(c), p) for r in pending) if q]
        basis.append(p)
        pivots.append(c)
    return basis, pivots


def _primitive(v: SparseVector) -> SparseVector:
    # integer entries with gcd 1 and positive leading entry
    lcm = 1
    for x in v.values():
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    ints = {k: int(x * lcm) for k, x in v.items()}
    g = 0
    for n in ints.values():
        g = math.gcd(g, n)
    first = next(iter(ints.values()))
    if first < 0:
        g = -g
    return SparseVector({k: Fraction(n, g) for k, n in ints.items()})


def kernel_basis(A: FiniteMatrix) -> list[SparseVector]:
    """Basis of ``{x : Ax = 0}``, one vector per free column, in column order.

    Each vector is scaled to primitive integers with a positive first entry.
    """
    basis, pivots = row_echelon(A)
    pivot_set = set(pivots)
    out = []
    for f in range(1, A.n_cols + 1):
        if f in pivot_set:
            continue
        entries = {f: ONE}
        for row, p in zip(basis, pivots):
            v = row.coeff(f)
            if v:
                entries[p] = -v
        out.append(_primitive(SparseVector(entries)))
    return out


def is_tight(A: FiniteMatrix) -> Union[Tight, NotTight]:
    ker = kernel_basis(A)
    if not ker:
        return Tight()
    x = ker[0]
    return NotTight(KernelWitness(x, min(x.support)))


# -- incremental row space -----------------------------------------------------


class RowSpace:
    """Echelon basis of the span of rows added so far, with provenance.

    Each basis row is keyed by its pivot, the largest column in its support,
    and carries the combination of original row indices producing it.  Rows
    are only ever appended, so the rows that become basis rows are exactly the
    ones independent of their predecessors, and the coefficient vector
    returned by :meth:`express` is the unique one supported on them.
    """

    def __init__(self):
        self._basis: dict[int, tuple[SparseVector, SparseVector]] = {}
        self.rows_added = 0

    @property
    def rank(self) -> int:
        return len(self._basis)

    def _reduce(self, t: SparseVector, comb: SparseVector, sign) -> tuple[SparseVector, SparseVector]:
        while t:
            c = t.max_index()
            entry = self._basis.get(c)
            if entry is None:
                break
            prow, pcomb = entry
            f = t[c] / prow[c]
            t = add_scaled(t, -f, prow)
            comb = add_scaled(comb, sign * f, pcomb)
        return t, comb

    def add(self, index: int, row: SparseVector) -> bool:
        """Append original row ``index``; return whether it enlarged the span."""
        self.rows_added += 1
        t, comb = self._reduce(row, SparseVector({index: 1}), -1)
        if not t:
            return False
        self._basis[t.max_index()] = (t, comb)
        return True

    def express(self, target: SparseVector) -> SparseVector | None:
        """Coefficients ``lam`` over original rows with ``sum lam_i A_i == target``."""
        t, lam = self._reduce(target, SparseVector(), 1)
        if t:
            return None
        return lam

    def contains(self, target: SparseVector) -> bool:
        return self.express(target) is not None


def express_unit_vector(A: FiniteMatrix, j: int) -> RowCombination | None:
    if not 1 <= j <= A.n_cols:
        raise IndexError(f"column {j} outside 1..{A.n_cols}")
    space = RowSpace()
    for i, r in enumerate(A.rows, 1):
        space.add(i, r)
    lam = space.express(unit_vector(j))
    return None if lam is None else RowCombination(j, lam)


def stubborn_search_lazy(A: LazyMatrix, j: int, budget: int) -> Union[Found, Exhausted]:
    """Expanding-window search for ``e_j`` in the span of a row prefix.

    Rows are pulled one at a time in stream order; after each row that
    enlarges the span the target is tested.  ``Exhausted`` only says the
    budget ran out; it never proves that ``x_j`` is free, except when a finite
    stream has been read completely (``complete=True``).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    target = unit_vector(j)
    space = RowSpace()
    consumed = 0
    for i, row in itertools.islice(A.rows(), budget):
        consumed += 1
        if space.add(i, row):
            lam = space.express(target)
            if lam is not None:
                return Found(RowCombination(j, lam), consumed)
    return Exhausted(consumed, complete=not A.has_row(consumed + 1))


def left_inverse(A: FiniteMatrix) -> LeftInverse | None:
    space = RowSpace()
    for i, r in enumerate(A.rows, 1):
        space.add(i, r)
    z_rows = []
    for j in range(1, A.n_cols + 1):
        lam = space.express(unit_vector(j))
        if lam is None:
            return None
        z_rows.append(lam)
    return LeftInverse(FiniteMatrix(A.n_cols, A.n_rows, tuple(z_rows)))


def mat_mul(Z: FiniteMatrix, A: FiniteMatrix) -> FiniteMatrix:
    if Z.n_cols != A.n_rows:
        raise DimensionError(f"cannot multiply {Z.n_rows}x{Z.n_cols} by {A.n_rows}x{A.n_cols}")
    out = []
    for zr in Z.rows:
        acc = SparseVector()
        for i, c in zr.items():
            acc = add_scaled(acc, c, A.rows[i - 1])
        out.append(acc)
    return FiniteMatrix(Z.n_rows, A.n_cols, tuple(out))


def verify_left_inverse(A: FiniteMatrix, Z: FiniteMatrix | LeftInverse) -> bool:
    if isinstance(Z, LeftInverse):
        Z = Z.Z
    if Z.n_cols != A.n_rows or Z.n_rows != A.n_cols:
        raise DimensionError("left inverse of an IxJ matrix must be JxI")
    return mat_mul(Z, A) == FiniteMatrix.identity(A.n_cols)


# -- closed subsystems ---------------------------------------------------------


@dataclass(frozen=True)
class Block:
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def submatrix(self, A: FiniteMatrix) -> FiniteMatrix:
        relabel = {c: k for k, c in enumerate(self.cols, 1)}
        rows = tuple(SparseVector({relabel[j]: v for j, v in A.rows[i - 1].items()}) for i in self.rows)
        return FiniteMatrix(len(self.rows), len(self.cols), rows)

    def embed(self, x: SparseVector) -> SparseVector:
        return SparseVector({self.cols[k - 1]: v for k, v in x.items()})


def decompose_closed_subsystems(A: FiniteMatrix | LazyMatrix, n_rows: int | None = None) -> list[Block]:
    """Connected components of the row/column incidence structure.

    Every variable of a block's equations lies in that block, so ``A`` is
    tight exactly when every block is.  A lazy matrix is decomposed on its
    first ``n_rows`` rows.  Columns that meet no row form row-less blocks;
    zero rows form column-less blocks.  Blocks come out ordered by their
    smallest column (breadth-first from column 1), row-only blocks last.
    """
    if isinstance(A, LazyMatrix):
        if n_rows is None:
            raise ValueError("decomposing a lazy matrix needs a row prefix length")
        A = A.prefix(n_rows)
    col_rows: dict[int, list[int]] = {j: [] for j in range(1, A.n_cols + 1)}
    for i, r in enumerate(A.rows, 1):
        for j in r:
            col_rows[j].append(i)
    seen_rows: set[int] = set()
    seen_cols: set[int] = set()
    blocks = []
    for start in range(1, A.n_cols + 1):
        if start in seen_cols:
            continue
        rows, cols = set(), {start}
        seen_cols.add(start)
        frontier = [start]
        while frontier:
            nxt = []
            for c in frontier:
                for i in col_rows[c]:
                    if i in seen_rows:
                        continue
                    seen_rows.add(i)
                    rows.add(i)
                    for c2 in A.rows[i - 1]:
                        if c2 not in seen_cols:
                            seen_cols.add(c2)
                            cols.add(c2)
                            nxt.append(c2)
            frontier = nxt
        blocks.append(Block(tuple(sorted(rows)), tuple(sorted(cols))))
    for i in range(1, A.n_rows + 1):
        if i not in seen_rows:
            blocks.append(Block((i,), ()))
    return blocks
