"""Bipartite graphs of matrices, matchings, waves and Podewski-Steffens obstructions.

Vertices on each side are positive integers: for the graph of a matrix the
``M`` side is the set of columns and the ``W`` side the set of rows, with an
edge ``(j, i)`` whenever ``a[i, j] != 0``.  Matchings are plain ``dict``
objects mapping ``M`` vertices to ``W`` vertices.

On finite graphs every wave is critical, so an impediment is already an
obstruction, and an obstruction exists exactly when the graph is not
espousable.  Criticality is still computed two ways (enumerating saturating
matchings, and searching for an alternating path that escapes the wave) so
the two can be checked against each other.  On lazily explored graphs
criticality can only ever be reported as partial evidence up to a bound.
"""

from __future__ import annotations

import itertools
from collections import deque
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from typing import Optional, Union

from .matrices import FiniteMatrix, LazyMatrix

ENUMERATION_LIMIT = 7


def _wkey(w: int) -> tuple[bool, int]:
    # real vertices (positive) before placeholder ones (negative)
    return (w < 0, abs(w))


class NotAMatching(ValueError):
    pass


class NotAWave(ValueError):
    pass


class Obstructed(ValueError):
    """Raised by :func:`ps_step` when its input graph already has an obstruction."""

    def __init__(self, certificate: ObstructionCertificate):
        super().__init__(f"graph is obstructed at vertex {certificate.impediment.vertex}")
        self.certificate = certificate


@dataclass(frozen=True)
class BipartiteGraph:
    m_side: tuple[int, ...]
    w_side: tuple[int, ...]
    adj: Mapping[int, tuple[int, ...]]
    _wadj: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        m_side = tuple(sorted(set(self.m_side)))
        w_side = tuple(sorted(set(self.w_side), key=_wkey))
        wset = set(w_side)
        adj = {}
        for m in m_side:
            nb = tuple(sorted(set(self.adj.get(m, ())), key=_wkey))
            for w in nb:
                if w not in wset:
                    raise ValueError(f"edge ({m}, {w}) leaves the W side")
            adj[m] = nb
        for m in self.adj:
            if m not in adj:
                raise ValueError(f"adjacency given for unknown M vertex {m}")
        wadj: dict[int, list[int]] = {w: [] for w in w_side}
        for m, nb in adj.items():
            for w in nb:
                wadj[w].append(m)
        object.__setattr__(self, "m_side", m_side)
        object.__setattr__(self, "w_side", w_side)
        object.__setattr__(self, "adj", adj)
        object.__setattr__(self, "_wadj", {w: tuple(ms) for w, ms in wadj.items()})

    @classmethod
    def from_edges(cls, m_side: Iterable[int], w_side: Iterable[int], edges: Iterable[tuple[int, int]]) -> BipartiteGraph:
        adj: dict[int, list[int]] = {m: [] for m in m_side}
        for m, w in edges:
            adj.setdefault(m, []).append(w)
        return cls(tuple(adj), tuple(w_side), adj)

    def neighbors_m(self, m: int) -> tuple[int, ...]:
        return self.adj[m]

    def neighbors_w(self, w: int) -> tuple[int, ...]:
        return self._wadj[w]

    def neighborhood(self, ms: Iterable[int]) -> set[int]:
        out: set[int] = set()
        for m in ms:
            out.update(self.adj[m])
        return out

    def edges(self) -> list[tuple[int, int]]:
        return [(m, w) for m in self.m_side for w in self.adj[m]]

    def has_edge(self, m: int, w: int) -> bool:
        return m in self.adj and w in self.adj[m]

    def remove(self, ms: Iterable[int] = (), ws: Iterable[int] = ()) -> BipartiteGraph:
        ms, ws = set(ms), set(ws)
        adj = {m: tuple(w for w in nb if w not in ws) for m, nb in self.adj.items() if m not in ms}
        return BipartiteGraph(tuple(adj), tuple(w for w in self.w_side if w not in ws), adj)

    def __repr__(self) -> str:
        return f"BipartiteGraph(M={list(self.m_side)}, W={list(self.w_side)}, edges={self.edges()})"


def graph_from_matrix(A: FiniteMatrix) -> BipartiteGraph:
    """``M`` = columns, ``W`` = rows, edge ``(j, i)`` iff ``a[i, j] != 0``."""
    adj: dict[int, list[int]] = {j: [] for j in range(1, A.n_cols + 1)}
    for i, r in enumerate(A.rows, 1):
        for j in r:
            adj[j].append(i)
    return BipartiteGraph(tuple(adj), tuple(range(1, A.n_rows + 1)), adj)


class LazyGraph:
    """Graph of a lazily streamed matrix, seen through its first ``horizon`` rows.

    ``W`` neighbourhoods (row supports) are always complete.  ``M``
    neighbourhoods are cut at the horizon; a column is *closed* when the
    matrix declares its full row set and that set lies inside the horizon.
    """

    def __init__(self, matrix: LazyMatrix, horizon: int):
        if horizon < 0:
            raise ValueError("horizon must be >= 0")
        self.matrix = matrix
        self.horizon = horizon if matrix.n_rows is None else min(horizon, matrix.n_rows)
        self._col_index: dict[int, list[int]] | None = None

    def with_horizon(self, horizon: int) -> LazyGraph:
        return LazyGraph(self.matrix, horizon)

    def _index(self) -> dict[int, list[int]]:
        if self._col_index is None:
            idx: dict[int, list[int]] = {}
            for i in range(1, self.horizon + 1):
                for j in self.matrix.row(i):
                    idx.setdefault(j, []).append(i)
            self._col_index = idx
        return self._col_index

    def neighbors_w(self, w: int) -> tuple[int, ...]:
        return tuple(self.matrix.row(w))

    def neighbors_m(self, m: int) -> tuple[int, ...]:
        known = self.matrix.column_rows(m)
        if known is not None:
            return tuple(sorted(i for i in known if i <= self.horizon))
        return tuple(self._index().get(m, ()))

    def is_closed(self, m: int) -> bool:
        if self.matrix.n_rows is not None and self.horizon >= self.matrix.n_rows:
            return True
        known = self.matrix.column_rows(m)
        return known is not None and all(i <= self.horizon for i in known)

    def columns(self) -> list[int]:
        return sorted(self._index())

    def explore(self) -> BipartiteGraph:
        """The finite graph on rows ``1..horizon`` and the columns they mention."""
        adj = {j: tuple(rows) for j, rows in sorted(self._index().items())}
        return BipartiteGraph(tuple(adj), tuple(range(1, self.horizon + 1)), adj)


# -- matchings -----------------------------------------------------------------


def as_matching(F: Mapping[int, int] | Iterable[tuple[int, int]]) -> dict[int, int]:
    pairs = list(F.items()) if isinstance(F, Mapping) else list(F)
    out: dict[int, int] = {}
    seen_w: set[int] = set()
    for m, w in pairs:
        if m in out or w in seen_w:
            raise NotAMatching(f"vertex repeated in edge ({m}, {w})")
        out[m] = w
        seen_w.add(w)
    return dict(sorted(out.items()))


def check_matching(G: BipartiteGraph, F) -> dict[int, int]:
    F = as_matching(F)
    for m, w in F.items():
        if not G.has_edge(m, w):
            raise NotAMatching(f"({m}, {w}) is not an edge")
    return F


def _augment(G: BipartiteGraph, root: int, match_m: dict[int, int], match_w: dict[int, int]) -> bool:
    # Depth-first alternating search; at every M vertex a free neighbour is
    # taken before any rematching is attempted.
    def free_neighbor(m):
        for w in G.adj[m]:
            if w not in match_w:
                return w
        return None

    f = free_neighbor(root)
    if f is not None:
        match_m[root] = f
        match_w[f] = root
        return True
    visited: set[int] = set()
    ms = [root]
    via: list[int] = []
    iters = [iter(G.adj[root])]
    while iters:
        for w in iters[-1]:
            if w in visited:
                continue
            visited.add(w)
            m2 = match_w[w]
            ms.append(m2)
            via.append(w)
            f = free_neighbor(m2)
            if f is not None:
                match_m[m2] = f
                match_w[f] = m2
                for idx in range(len(via) - 1, -1, -1):
                    match_m[ms[idx]] = via[idx]
                    match_w[via[idx]] = ms[idx]
                return True
            iters.append(iter(G.adj[m2]))
            break
        else:
            iters.pop()
            ms.pop()
            if via:
                via.pop()
    return False


def max_matching(G: BipartiteGraph) -> dict[int, int]:
    """Maximum matching by augmenting paths, ``M`` vertices in ascending order."""
    match_m: dict[int, int] = {}
    match_w: dict[int, int] = {}
    for m in G.m_side:
        _augment(G, m, match_m, match_w)
    return dict(sorted(match_m.items()))


def is_espousable_finite(G: BipartiteGraph) -> bool:
    return len(max_matching(G)) == len(G.m_side)


def _alternating_reach(G: BipartiteGraph, starts: Iterable[int], match_m: Mapping[int, int]) -> set[int]:
    """``M`` vertices reachable from ``starts`` along non-matching then matching edges."""
    match_w = {w: m for m, w in match_m.items()}
    seen = set(starts)
    queue = deque(sorted(seen))
    while queue:
        m = queue.popleft()
        for w in G.adj[m]:
            if w == match_m.get(m):
                continue
            m2 = match_w.get(w)
            if m2 is not None and m2 not in seen:
                seen.add(m2)
                queue.append(m2)
    return seen


def hall_violator(G: BipartiteGraph) -> frozenset[int] | None:
    """A set ``T`` of ``M`` vertices with ``|N(T)| < |T|``, or ``None`` if espousable.

    The set returned is the one of maximal deficiency: everything reachable
    by alternating paths from the vertices a maximum matching leaves exposed.
    """
    K = max_matching(G)
    exposed = [m for m in G.m_side if m not in K]
    if not exposed:
        return None
    return frozenset(_alternating_reach(G, exposed, K))


# -- waves, impediments, obstructions ------------------------------------------


@dataclass(frozen=True)
class Impediment:
    wave: Mapping[int, int]
    vertex: int

    def __post_init__(self):
        object.__setattr__(self, "wave", as_matching(self.wave))


@dataclass(frozen=True)
class ObstructionCertificate:
    """An impediment plus the evidence that its wave is critical.

    For finite graphs ``saturating_matchings`` counts the matchings of the
    wave's ``M`` side (all of which cover the wave's ``W`` side), or is
    ``None`` when the wave is too large to enumerate.  ``partial`` marks
    evidence gathered on a finite view of a lazy graph; ``bound`` is then the
    alternating-path length up to which no escape was found.
    """

    impediment: Impediment
    critical: bool
    saturating_matchings: int | None = None
    partial: bool = False
    bound: int | None = None


def is_wave(G: BipartiteGraph, F) -> bool:
    F = check_matching(G, F)
    return G.neighborhood(F) == set(F.values())


def _saturating_matchings(G: BipartiteGraph, ms: list[int]):
    chosen: list[int] = []
    used: set[int] = set()

    def rec(k):
        if k == len(ms):
            yield tuple(chosen)
            return
        for w in G.adj[ms[k]]:
            if w in used:
                continue
            used.add(w)
            chosen.append(w)
            yield from rec(k + 1)
            chosen.pop()
            used.discard(w)

    return rec(0)


def critical_by_enumeration(G: BipartiteGraph, F) -> bool:
    """Every matching saturating the wave's ``M`` side covers exactly its ``W`` side."""
    F = check_matching(G, F)
    target = set(F.values())
    for ws in _saturating_matchings(G, list(F)):
        if set(ws) != target:
            return False
    return True


def count_saturating_matchings(G: BipartiteGraph, F) -> int:
    F = check_matching(G, F)
    return sum(1 for _ in _saturating_matchings(G, list(F)))


def critical_by_alternating_paths(G: BipartiteGraph, F) -> bool:
    """No ``F``-alternating path from the wave, starting with a non-``F`` edge,
    reaches a ``W`` vertex outside the wave."""
    F = check_matching(G, F)
    wf = set(F.values())
    inverse = {w: m for m, w in F.items()}
    seen = set(F)
    queue = deque(F)
    while queue:
        m = queue.popleft()
        for w in G.adj[m]:
            if w == F.get(m):
                continue
            if w not in wf:
                return False
            m2 = inverse[w]
            if m2 not in seen:
                seen.add(m2)
                queue.append(m2)
    return True


def is_critical_wave_finite(G: BipartiteGraph, F) -> bool:
    F = check_matching(G, F)
    if not is_wave(G, F):
        raise NotAWave("criticality is only defined for waves")
    by_paths = critical_by_alternating_paths(G, F)
    if len(F) <= ENUMERATION_LIMIT:
        by_enum = critical_by_enumeration(G, F)
        if by_enum != by_paths:
            raise AssertionError(f"criticality methods disagree on {F}: enumeration={by_enum}, paths={by_paths}")
    return by_paths


def is_impediment(G: BipartiteGraph, imp: Impediment) -> bool:
    F = check_matching(G, imp.wave)
    if not is_wave(G, F):
        return False
    a = imp.vertex
    if a not in G.adj or a in F:
        return False
    return set(G.adj[a]) <= set(F.values())


def find_impediment(G: BipartiteGraph | LazyGraph) -> Impediment | None:
    """Some impediment of ``G`` (of its explored part, for a lazy graph).

    The unmatched vertex is the smallest ``M`` vertex that some maximum
    matching leaves exposed.  The wave is the part of a maximum matching of
    ``G - a`` reachable from ``a`` by alternating paths; its ``W`` side is the
    whole neighbourhood of its ``M`` side plus ``a``, otherwise ``a`` could be
    matched as well.
    """
    if isinstance(G, LazyGraph):
        G = G.explore()
    K = max_matching(G)
    exposed = [m for m in G.m_side if m not in K]
    if not exposed:
        return None
    a = min(_alternating_reach(G, exposed, K))
    K2 = max_matching(G.remove(ms=[a]))
    reach = _alternating_reach(G, [a], K2)
    wave = {m: K2[m] for m in reach if m != a}
    return Impediment(wave, a)


def find_ps_obstruction_finite(G: BipartiteGraph) -> ObstructionCertificate | None:
    imp = find_impediment(G)
    if imp is None:
        return None
    critical = is_critical_wave_finite(G, imp.wave)
    count = count_saturating_matchings(G, imp.wave) if len(imp.wave) <= ENUMERATION_LIMIT else None
    if not critical:
        raise AssertionError("a finite wave failed the criticality check")
    return ObstructionCertificate(imp, True, count)


def verify_obstruction(G: BipartiteGraph, cert: ObstructionCertificate) -> bool:
    try:
        if not is_impediment(G, cert.impediment):
            return False
        F = cert.impediment.wave
        if not critical_by_alternating_paths(G, F):
            return False
        if len(F) <= ENUMERATION_LIMIT and not critical_by_enumeration(G, F):
            return False
    except NotAMatching:
        return False
    return True


# -- alternating rays on lazy graphs -------------------------------------------


class LazyMatching:
    """A possibly infinite matching given by its two partner functions."""

    def __init__(self, m_to_w: Callable[[int], Optional[int]], w_to_m: Callable[[int], Optional[int]]):
        self._m_to_w = m_to_w
        self._w_to_m = w_to_m

    @classmethod
    def from_pairs(cls, F) -> LazyMatching:
        F = as_matching(F)
        inv = {w: m for m, w in F.items()}
        return cls(F.get, inv.get)

    def partner_of_m(self, m: int) -> Optional[int]:
        return self._m_to_w(m)

    def partner_of_w(self, w: int) -> Optional[int]:
        return self._w_to_m(w)


@dataclass(frozen=True)
class FoundPath:
    length: int
    path: tuple[int, ...]
    """Vertices ``m0, w1, m1, w2, ...``: even positions are ``M``, odd are ``W``."""


@dataclass(frozen=True)
class NoneWithinBound:
    bound: int


def has_alternating_ray(
    G: BipartiteGraph | LazyGraph,
    F: LazyMatching | Mapping[int, int] | Iterable[tuple[int, int]],
    start: int,
    bound: int,
) -> Union[FoundPath, NoneWithinBound]:
    """Look for a simple ``F``-alternating path of at least ``bound`` edges.

    The path starts at ``start`` with an edge outside ``F``.  A return of
    ``NoneWithinBound`` says nothing about paths leaving the explored region.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if not isinstance(F, LazyMatching):
        F = LazyMatching.from_pairs(F)
    path = [start]
    on_m = {start}
    on_w: set[int] = set()

    def extend(m: int) -> bool:
        skip = F.partner_of_m(m)
        for w in G.neighbors_m(m):
            if w == skip or w in on_w:
                continue
            path.append(w)
            on_w.add(w)
            if len(path) - 1 >= bound:
                return True
            m2 = F.partner_of_w(w)
            if m2 is not None and m2 not in on_m:
                path.append(m2)
                on_m.add(m2)
                if len(path) - 1 >= bound or extend(m2):
                    return True
                on_m.discard(path.pop())
            on_w.discard(path.pop())
        return False

    if extend(start):
        return FoundPath(len(path) - 1, tuple(path))
    return NoneWithinBound(bound)


def find_obstruction_lazy(G: LazyGraph, bound: int) -> ObstructionCertificate | None:
    """Impediment of the explored region, with criticality checked only up to ``bound``.

    The certificate is always ``partial``.  ``critical`` is false when an
    alternating path of length ``bound`` leaves some vertex of the wave.
    """
    H = G.explore()
    imp = find_impediment(H)
    if imp is None:
        return None
    # a long alternating path inside the view hints at an escape beyond it
    critical = critical_by_alternating_paths(H, imp.wave) and not any(
        isinstance(has_alternating_ray(H, imp.wave, m, bound), FoundPath) for m in imp.wave
    )
    return ObstructionCertificate(imp, critical, None, partial=True, bound=bound)


# -- the step lemma and espousal -----------------------------------------------


def ps_step(G: BipartiteGraph, m: int, candidates: Iterable[int] | None = None) -> int | None:
    """Smallest neighbour ``w`` of ``m`` with ``G - m - w`` unobstructed."""
    cert = find_ps_obstruction_finite(G)
    if cert is not None:
        raise Obstructed(cert)
    if m not in G.adj:
        raise KeyError(m)
    for w in (G.adj[m] if candidates is None else candidates):
        if not G.has_edge(m, w):
            continue
        if find_ps_obstruction_finite(G.remove(ms=[m], ws=[w])) is None:
            return w
    return None


@dataclass(frozen=True)
class PartialMatching:
    pairs: Mapping[int, int]
    order: tuple[int, ...]
    horizon: int


@dataclass(frozen=True)
class Collision:
    row: int
    certificate: ObstructionCertificate


@dataclass(frozen=True)
class EspousalFailure:
    """``reason`` is ``"obstruction"``, ``"collision"`` or ``"budget"``.

    * ``obstruction``: the explored region, with open columns allowed to
      escape past the horizon, already has an obstruction.
    * ``collision``: every candidate row for ``vertex`` inside the horizon
      strands some other column; ``collisions`` holds one certificate per row.
    * ``budget``: ``vertex`` has no candidate row inside the horizon.
    """

    stage: int
    reason: str
    vertex: int
    pairs: Mapping[int, int]
    certificate: ObstructionCertificate | None = None
    collisions: tuple[Collision, ...] = ()


def _relaxed_view(G: LazyGraph, matched: Mapping[int, int], used: set[int], extra: Iterable[int]) -> BipartiteGraph:
    # Open columns get a private placeholder row (-column) standing in for
    # everything past the horizon.
    cols = set(G.columns()) | set(extra)
    cols -= set(matched)
    adj: dict[int, list[int]] = {}
    ws: set[int] = set()
    for c in cols:
        nb = [w for w in G.neighbors_m(c) if w not in used]
        if not G.is_closed(c):
            nb.append(-c)
        adj[c] = nb
        ws.update(nb)
    ws.update(i for i in range(1, G.horizon + 1) if i not in used)
    return BipartiteGraph(tuple(adj), tuple(ws), adj)


def espouse_lazy(G: LazyGraph | LazyMatrix, k: int, budget: int) -> Union[PartialMatching, EspousalFailure]:
    """Match ``k`` columns of a lazy graph by repeated step-lemma choices.

    ``budget`` is the number of rows explored.  The next column handled is
    the head of a queue fed with the columns of each row just used; when the
    queue runs dry the smallest column not yet handled starts a new block.
    """
    if isinstance(G, LazyMatrix):
        G = LazyGraph(G, budget)
    else:
        G = G.with_horizon(budget)
    matched: dict[int, int] = {}
    used: set[int] = set()
    order: list[int] = []
    queue: deque[int] = deque()
    scheduled: set[int] = set()
    fresh = itertools.count(1)
    stage = 0
    while len(matched) < k:
        if queue:
            m = queue.popleft()
        else:
            m = next(c for c in fresh if c not in scheduled)
            scheduled.add(m)
        stage += 1
        H = _relaxed_view(G, matched, used, [m])
        cert = find_ps_obstruction_finite(H)
        if cert is not None:
            return EspousalFailure(stage, "obstruction", m, dict(matched), certificate=cert)
        real = [w for w in H.adj[m] if w > 0]
        if not real:
            return EspousalFailure(stage, "budget", m, dict(matched))
        w = ps_step(H, m, real)
        if w is None:
            collisions = tuple(
                Collision(r, find_ps_obstruction_finite(H.remove(ms=[m], ws=[r]))) for r in real
            )
            return EspousalFailure(stage, "collision", m, dict(matched), collisions=collisions)
        matched[m] = w
        used.add(w)
        order.append(m)
        for c in sorted(G.neighbors_w(w)):
            if c not in matched and c not in scheduled:
                scheduled.add(c)
                queue.append(c)
    return PartialMatching(dict(matched), tuple(order), G.horizon)


# -- export ----------------------------------------------------------------------


def to_dot(G: BipartiteGraph, matching: Mapping[int, int] | None = None, name: str = "G_A") -> str:
    matching = matching or {}
    lines = [f"graph {name} {{", "  rankdir=LR;"]
    for m in G.m_side:
        lines.append(f"  c{m} [shape=circle];")
    for w in G.w_side:
        lines.append(f"  r{w} [shape=box];")
    for m, w in G.edges():
        style = " [style=bold]" if matching.get(m) == w else ""
        lines.append(f"  c{m} -- r{w}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
