"""Named matrix families, seeded random generators and brute-force oracles.

The oracles deliberately avoid the machinery they are used to check: they
enumerate injections, matchings and waves directly, with hard size guards.

Random draws come from SplitMix64 (Steele, Lea and Flood's 64-bit mixer), so
a ``(family, params, seed)`` triple names the same matrix in any language:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)              # all arithmetic mod 2**64

``below(n)`` is ``next() % n`` and a unit-interval draw is ``(next() >> 11) / 2**53``.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from fractions import Fraction

from .loader import Injection
from .matching import BipartiteGraph, Impediment, as_matching
from .matrices import FiniteMatrix, LazyMatrix
from .numerics import SparseVector, add_scaled

_MASK = (1 << 64) - 1


class SizeGuardExceeded(ValueError):
    pass


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next() % n

    def unit(self) -> float:
        return (self.next() >> 11) / float(1 << 53)

    def rational(self) -> Fraction:
        """Nonzero rational with numerator in [-9, 9] and denominator in [1, 9]."""
        num = self.below(18) - 9
        if num >= 0:
            num += 1
        return Fraction(num, self.below(9) + 1)


# -- families --------------------------------------------------------------------


def family_identity() -> LazyMatrix:
    return LazyMatrix(lambda i: {i: 1}, name="identity", column_rows=lambda j: frozenset({j}))


def family_donjuan() -> LazyMatrix:
    """Row ``i`` is ``e_1 - e_{i+1}``: independent columns, yet ``A @ 1 == 0``."""

    def col_rows(j):
        return None if j == 1 else frozenset({j - 1})

    return LazyMatrix(lambda i: {1: 1, i + 1: -1}, name="donjuan", column_rows=col_rows)


def _chain_row(i: int) -> dict[int, int]:
    if i % 2:
        return {i: 1, i + 1: 1, i + 2: 1}
    return {i: 1, i + 1: 1}


def _chain_col_rows(j: int) -> frozenset[int]:
    if j == 1:
        return frozenset({1})
    if j % 2 == 0:
        return frozenset({j - 1, j})
    return frozenset({j - 2, j - 1, j})


def family_impediment_chain() -> LazyMatrix:
    """Odd rows ``x_{2k-1} + x_{2k} + x_{2k+1}``, even rows ``x_{2k} + x_{2k+1}``."""
    return LazyMatrix(_chain_row, name="impediment-chain", column_rows=_chain_col_rows)


def family_random_tight(seed: int, n: int, extra: int = 0) -> FiniteMatrix:
    """A tight ``(n + extra) x n`` matrix.

    Start from an upper triangular matrix with nonzero diagonal (about half of
    the off-diagonal entries set), apply ``n`` random row operations that keep
    the span (add a multiple of another row, or swap), then append ``extra``
    random combinations of two or three existing rows.
    """
    if n < 1 or extra < 0:
        raise ValueError("need n >= 1 and extra >= 0")
    rng = SplitMix64(seed)
    rows = []
    for i in range(1, n + 1):
        entries = {i: rng.rational()}
        for j in range(i + 1, n + 1):
            if rng.below(2):
                entries[j] = rng.rational()
        rows.append(SparseVector(entries))
    for _ in range(n if n > 1 else 0):
        i, k = rng.below(n), rng.below(n - 1)
        if k >= i:
            k += 1
        if rng.below(3) == 0:
            rows[i], rows[k] = rows[k], rows[i]
        else:
            rows[i] = add_scaled(rows[i], rng.rational(), rows[k])
    for _ in range(extra):
        acc = SparseVector()
        for _ in range(2 + rng.below(2)):
            acc = add_scaled(acc, rng.rational(), rows[rng.below(len(rows))])
        rows.append(acc)
    return FiniteMatrix(len(rows), n, tuple(rows))


def family_random_sparse(seed: int, n_rows: int, n_cols: int, density: float) -> FiniteMatrix:
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    rng = SplitMix64(seed)
    rows = []
    for _ in range(n_rows):
        entries = {}
        for j in range(1, n_cols + 1):
            if rng.unit() < density:
                entries[j] = rng.rational()
        rows.append(SparseVector(entries))
    return FiniteMatrix(n_rows, n_cols, tuple(rows))


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0


LAZY_FAMILIES: dict[str, Callable[[], LazyMatrix]] = {
    "identity": family_identity,
    "donjuan": family_donjuan,
    "impediment-chain": family_impediment_chain,
}

FINITE_FAMILIES = ("random-tight", "random-sparse")


def instantiate(spec: FamilySpec) -> LazyMatrix | FiniteMatrix:
    p = spec.params
    if spec.name in LAZY_FAMILIES:
        if p:
            raise ValueError(f"family {spec.name!r} takes no parameters")
        return LAZY_FAMILIES[spec.name]()
    if spec.name == "random-tight":
        return family_random_tight(spec.seed, int(p["n"]), int(p.get("extra", 0)))
    if spec.name == "random-sparse":
        density = Fraction(p["density"]) if "density" in p else Fraction(1, 2)
        return family_random_sparse(spec.seed, int(p["rows"]), int(p["cols"]), float(density))
    raise KeyError(f"unknown family {spec.name!r}")


def parse_family_spec(text: str) -> FamilySpec:
    """``NAME`` or ``NAME:key=value,key=value``; a ``seed`` key sets the seed."""
    name, _, rest = text.partition(":")
    params: dict[str, str] = {}
    seed = 0
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"malformed family parameter {item!r}")
        if key == "seed":
            seed = int(value)
        else:
            params[key] = value
    if name not in LAZY_FAMILIES and name not in FINITE_FAMILIES:
        raise KeyError(f"unknown family {name!r}")
    return FamilySpec(name, params, seed)


def donjuan_truncation(n: int) -> FiniteMatrix:
    return family_donjuan().prefix(n, n + 1)


def chain_truncation(n_rows: int) -> FiniteMatrix:
    return family_impediment_chain().prefix(n_rows)


def finite_corpus() -> Iterator[tuple[str, FiniteMatrix]]:
    """The fixed mixed corpus the property checks run over."""
    for n in range(1, 5):
        yield f"identity-{n}", FiniteMatrix.identity(n)
    for n in range(1, 7):
        yield f"donjuan-{n}", donjuan_truncation(n)
    for n in range(1, 9):
        yield f"chain-{n}", chain_truncation(n)
    for seed in range(300):
        n = 1 + seed % 8
        yield f"random-tight-{seed}", family_random_tight(seed, n, seed % 5)
    for seed in range(300):
        rows = 1 + seed % 8
        cols = 1 + (seed // 8) % 8
        density = (0.25, 0.4, 0.6, 0.9)[seed % 4]
        yield f"random-sparse-{seed}", family_random_sparse(1000 + seed, rows, cols, density)


# -- oracles ---------------------------------------------------------------------


def _distinct_choices(options: list[list[int]]) -> Iterator[tuple[int, ...]]:
    # every tuple picking one entry per list, no entry twice
    chosen: list[int] = []
    used: set[int] = set()

    def rec(k):
        if k == len(options):
            yield tuple(chosen)
            return
        for v in options[k]:
            if v not in used:
                used.add(v)
                chosen.append(v)
                yield from rec(k + 1)
                chosen.pop()
                used.discard(v)

    return rec(0)


def oracle_loaded(A: FiniteMatrix) -> Injection | None:
    """Exhaustive search for an injection ``phi`` with ``a[phi(j), j] != 0``."""
    if A.n_cols > 8:
        raise SizeGuardExceeded(f"oracle_loaded handles at most 8 columns, got {A.n_cols}")
    options = [[i for i in range(1, A.n_rows + 1) if A.rows[i - 1].coeff(j)] for j in range(1, A.n_cols + 1)]
    for choice in _distinct_choices(options):
        return Injection(dict(zip(range(1, A.n_cols + 1), choice)))
    return None


def oracle_espousable(G: BipartiteGraph) -> bool:
    """True iff some choice of distinct neighbours covers every ``M`` vertex."""
    if len(G.m_side) > 8:
        raise SizeGuardExceeded(f"oracle_espousable handles |M| <= 8, got {len(G.m_side)}")
    return next(_distinct_choices([list(G.adj[m]) for m in G.m_side]), None) is not None


def oracle_critical_wave(G: BipartiteGraph, F) -> bool:
    """Definition check: every matching of the wave's ``M`` side covers its ``W`` side."""
    F = as_matching(F)
    if len(F) > 7:
        raise SizeGuardExceeded(f"oracle_critical_wave handles |F| <= 7, got {len(F)}")
    target = set(F.values())
    return all(set(choice) == target for choice in _distinct_choices([list(G.adj[m]) for m in F]))


def oracle_impediments(G: BipartiteGraph) -> Iterator[Impediment]:
    """Every impediment of a small finite graph, by enumerating all matchings."""
    if len(G.m_side) > 6:
        raise SizeGuardExceeded("oracle_impediments handles |M| <= 6")
    ms = G.m_side
    for size in range(len(ms) + 1):
        for subset in itertools.combinations(ms, size):
            for choice in _distinct_choices([list(G.adj[m]) for m in subset]):
                F = dict(zip(subset, choice))
                wf = set(choice)
                if G.neighborhood(subset) != wf:
                    continue
                for a in ms:
                    if a not in F and set(G.adj[a]) <= wf:
                        yield Impediment(F, a)
