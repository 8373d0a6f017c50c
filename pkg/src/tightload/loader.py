"""Loading injections and proud row-diagonalization.

The construction walks the columns in order.  At step ``j`` it writes
``e_j`` as a combination of the current rows, picks an unused row whose
coefficient and ``j``-th entry are both nonzero, records it as ``phi(j)`` and
overwrites that row with ``e_j``.  Overwriting with a vector in which the
replaced row has nonzero weight keeps the row span unchanged, and untouched
rows keep their original entries, so the loading condition can always be
read off the original matrix.

No rows are physically permuted for the injection; the used-row set carries
that bookkeeping so the same loop runs against lazy row streams.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Union

from .matrices import (
    Exhausted,
    FiniteMatrix,
    LazyMatrix,
    NotTight,
    RowSpace,
    is_tight,
)
from .numerics import SparseVector, add_scaled, unit_vector


class LoaderInvariantError(AssertionError):
    """The row-choice step found no usable row; this contradicts the algebra."""


@dataclass(frozen=True)
class Injection:
    """Column -> row map; ``pairs`` lists ``(column, row)`` in column order."""

    phi: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "phi", dict(sorted(self.phi.items())))

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(self.phi.items())

    @property
    def domain(self) -> list[int]:
        return list(self.phi)

    def restrict(self, cols) -> Injection:
        return Injection({j: i for j, i in self.phi.items() if j in set(cols)})

    def __getitem__(self, j: int) -> int:
        return self.phi[j]

    def __len__(self) -> int:
        return len(self.phi)


@dataclass
class EliminationState:
    """Rows of the current matrix after ``step`` columns have been loaded.

    ``rows`` holds the full current matrix for finite inputs; ``used`` is the
    set ``{phi(1), ..., phi(step)}`` and each used row equals its unit vector.
    """

    rows: list[SparseVector]
    phi: dict[int, int] = field(default_factory=dict)
    step: int = 0

    @property
    def used(self) -> set[int]:
        return set(self.phi.values())

    def matrix(self, n_cols: int) -> FiniteMatrix:
        return FiniteMatrix(len(self.rows), n_cols, tuple(self.rows))


def _choose_row(lam: SparseVector, col: int, used: set[int], row) -> int:
    for i in lam:  # ascending
        if i not in used and row(i).coeff(col):
            return i
    raise LoaderInvariantError(f"no unused row with nonzero weight and entry in column {col}")


def loading_steps(A: FiniteMatrix) -> Iterator[EliminationState]:
    """Yield the elimination state after each column is loaded.

    Stops early (without raising) at the first column whose unit vector is
    not in the row span.
    """
    state = EliminationState(list(A.rows))
    for col in range(1, A.n_cols + 1):
        space = RowSpace()
        for i, r in enumerate(state.rows, 1):
            space.add(i, r)
        lam = space.express(unit_vector(col))
        if lam is None:
            return
        i = _choose_row(lam, col, state.used, lambda k: state.rows[k - 1])
        state.phi[col] = i
        state.rows[i - 1] = unit_vector(col)
        state.step = col
        yield state


def construct_injection_finite(A: FiniteMatrix) -> Union[Injection, NotTight]:
    state = None
    for state in loading_steps(A):
        pass
    done = state.step if state is not None else 0
    if done < A.n_cols:
        verdict = is_tight(A)
        assert isinstance(verdict, NotTight), "a column failed to load on a tight matrix"
        return verdict
    return Injection(state.phi if state is not None else {})


def construct_injection_lazy(A: LazyMatrix, k: int, budget: int) -> Union[Injection, Exhausted]:
    """Load columns ``1..k`` of a row stream, pulling at most ``budget`` rows per step.

    Each step restarts its window at row 1 of the current matrix (original
    rows, with used rows replaced by their unit vectors), so the result for
    ``k`` is the restriction of the result for ``k + 1``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    phi: dict[int, int] = {}
    unit_of: dict[int, int] = {}

    def current(i: int) -> SparseVector:
        if i in unit_of:
            return unit_vector(unit_of[i])
        return A.row(i)

    for col in range(1, k + 1):
        target = unit_vector(col)
        space = RowSpace()
        lam = None
        consumed = 0
        for i in itertools.islice(itertools.count(1), budget):
            if not A.has_row(i):
                break
            consumed += 1
            if space.add(i, current(i)):
                lam = space.express(target)
                if lam is not None:
                    break
        if lam is None:
            return Exhausted(consumed, step=col, complete=not A.has_row(consumed + 1))
        i = _choose_row(lam, col, set(unit_of), current)
        phi[col] = i
        unit_of[i] = col
    return Injection(phi)


def verify_injection(A: FiniteMatrix | LazyMatrix, phi: Injection | Mapping[int, int]) -> bool:
    """Injective and ``a[phi(j), j] != 0`` for every ``j`` in the domain.

    Against a finite matrix, out-of-range indices make the map invalid.  A lazy
    stream raises :class:`StreamEnded` for rows it cannot produce.
    """
    pairs = phi.phi if isinstance(phi, Injection) else dict(phi)
    if len(set(pairs.values())) != len(pairs):
        return False
    for j, i in pairs.items():
        if isinstance(A, FiniteMatrix):
            if not (1 <= i <= A.n_rows and 1 <= j <= A.n_cols):
                return False
            if not A.rows[i - 1].coeff(j):
                return False
        else:
            if not A.row(i).coeff(j):
                return False
    return True


# -- proud diagonalization -----------------------------------------------------


@dataclass(frozen=True)
class Swap:
    i: int
    k: int


@dataclass(frozen=True)
class Replace:
    """Row ``row`` becomes ``sum(coeffs[k] * B_k)`` over the current rows."""

    row: int
    coeffs: SparseVector


Operation = Union[Swap, Replace]


@dataclass(frozen=True)
class TraceStep:
    k: int
    ops: tuple[Operation, ...]
    checkpoint: FiniteMatrix


@dataclass(frozen=True)
class DiagonalizationTrace:
    steps: tuple[TraceStep, ...]

    @property
    def operations(self) -> list[Operation]:
        return [op for s in self.steps for op in s.ops]

    def checkpoint(self, k: int) -> FiniteMatrix:
        for s in self.steps:
            if s.k == k:
                return s.checkpoint
        raise KeyError(k)

    @property
    def final(self) -> FiniteMatrix | None:
        return self.steps[-1].checkpoint if self.steps else None


def _apply(rows: list[SparseVector], op: Operation) -> None:
    if isinstance(op, Swap):
        rows[op.i - 1], rows[op.k - 1] = rows[op.k - 1], rows[op.i - 1]
        return
    acc = SparseVector()
    for k, c in op.coeffs.items():
        acc = add_scaled(acc, c, rows[k - 1])
    rows[op.row - 1] = acc


def proudly_diagonalize(A: FiniteMatrix, k: int | None = None) -> Union[DiagonalizationTrace, NotTight]:
    """Row-reduce ``A`` so that its first ``k`` rows become ``e_1 .. e_k``.

    Step ``c`` writes ``e_c`` over the current rows, replaces the chosen row
    ``p >= c`` by that combination and swaps it into position ``c``; a row
    that is already ``e_c`` costs nothing.  When ``k`` is the number of
    columns, the remaining rows (which now lie in the span of the first
    ``n_cols``) are cleared to zero one step each, so the final checkpoint is
    proudly diagonal.
    """
    if k is None:
        k = A.n_cols
    if not 0 <= k <= A.n_cols:
        raise ValueError(f"k must lie in 0..{A.n_cols}")
    rows = list(A.rows)
    steps = []
    for col in range(1, k + 1):
        target = unit_vector(col)
        ops: list[Operation] = []
        if col > A.n_rows:
            return is_tight(A)
        if rows[col - 1] != target:
            space = RowSpace()
            for i, r in enumerate(rows, 1):
                space.add(i, r)
            lam = space.express(target)
            if lam is None:
                verdict = is_tight(A)
                assert isinstance(verdict, NotTight)
                return verdict
            p = next((i for i in lam if i >= col and rows[i - 1].coeff(col)), None)
            if p is None:
                raise LoaderInvariantError(f"no pivot row for column {col}")
            if rows[p - 1] != target:
                ops.append(Replace(p, lam))
            if p != col:
                ops.append(Swap(col, p))
            for op in ops:
                _apply(rows, op)
        steps.append(TraceStep(col, tuple(ops), FiniteMatrix(A.n_rows, A.n_cols, tuple(rows))))
    if k == A.n_cols:
        for i in range(A.n_cols + 1, A.n_rows + 1):
            ops = []
            if rows[i - 1]:
                coeffs = {i: 1}
                for c, v in rows[i - 1].items():
                    coeffs[c] = -v
                ops.append(Replace(i, SparseVector(coeffs)))
                _apply(rows, ops[0])
            steps.append(TraceStep(i, tuple(ops), FiniteMatrix(A.n_rows, A.n_cols, tuple(rows))))
    return DiagonalizationTrace(tuple(steps))


@dataclass(frozen=True)
class TraceCheck:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_trace(A: FiniteMatrix, trace: DiagonalizationTrace) -> TraceCheck:
    """Replay every operation from ``A`` and check legality and prefix stability."""
    rows = list(A.rows)
    n = A.n_rows
    prev: FiniteMatrix = A
    for expected_k, step in enumerate(trace.steps, 1):
        if step.k != expected_k:
            return TraceCheck(False, f"step labelled {step.k} where {expected_k} was expected")
        for op in step.ops:
            if isinstance(op, Swap):
                if not (1 <= op.i <= n and 1 <= op.k <= n):
                    return TraceCheck(False, f"step {step.k}: swap {op.i},{op.k} out of range")
            else:
                if not 1 <= op.row <= n or any(not 1 <= r <= n for r in op.coeffs):
                    return TraceCheck(False, f"step {step.k}: replace touches a row outside 1..{n}")
                if not op.coeffs.coeff(op.row):
                    return TraceCheck(False, f"step {step.k}: replaced row {op.row} has zero coefficient")
            _apply(rows, op)
        if tuple(rows) != step.checkpoint.rows:
            return TraceCheck(False, f"step {step.k}: checkpoint does not match replay")
        if step.checkpoint.rows[: step.k - 1] != prev.rows[: step.k - 1]:
            return TraceCheck(False, f"step {step.k}: leading rows changed")
        prev = step.checkpoint
    return TraceCheck(True)


def is_proudly_diagonal(B: FiniteMatrix) -> bool:
    """Columns ``1..n_cols`` sit on the diagonal with nonzero entries, all else zero."""
    if B.n_cols > B.n_rows:
        return False
    for i, r in enumerate(B.rows, 1):
        if i <= B.n_cols:
            if set(r) != {i}:
                return False
        elif r:
            return False
    return True


def diagonal_prefix_length(B: FiniteMatrix) -> int:
    k = 0
    while k < min(B.n_rows, B.n_cols) and set(B.rows[k]) == {k + 1}:
        k += 1
    return k
