import itertools

import pytest
from hypothesis import given

from strategies import graphs
from tightload.corpus import (
    FamilySpec,
    SizeGuardExceeded,
    SplitMix64,
    chain_truncation,
    donjuan_truncation,
    family_donjuan,
    family_impediment_chain,
    family_random_sparse,
    family_random_tight,
    finite_corpus,
    instantiate,
    oracle_critical_wave,
    oracle_espousable,
    oracle_loaded,
    parse_family_spec,
)
from tightload.loader import verify_injection
from tightload.matching import BipartiteGraph, graph_from_matrix, is_critical_wave_finite, is_espousable_finite, is_wave
from tightload.matrices import FiniteMatrix, NotTight, Tight, express_unit_vector, is_tight, kernel_basis, mat_vec
from tightload.numerics import SparseVector


def test_splitmix_reference_values():
    # published SplitMix64 outputs for seed 0
    rng = SplitMix64(0)
    assert [rng.next() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_splitmix_rational_range():
    rng = SplitMix64(42)
    for _ in range(2000):
        r = rng.rational()
        assert r != 0 and abs(r.numerator) <= 9 and r.denominator <= 9


def test_donjuan_rows():
    A = family_donjuan()
    assert A.row(1) == SparseVector({1: 1, 2: -1})
    for n in range(1, 30):
        assert mat_vec(donjuan_truncation(n), lambda k: 1) == [0] * n
        assert express_unit_vector(donjuan_truncation(n), 1) is None
    for n in range(1, 7):
        assert oracle_loaded(donjuan_truncation(n)) is None


def test_chain_rows():
    A = family_impediment_chain()
    assert A.row(1) == SparseVector({1: 1, 2: 1, 3: 1})
    assert A.row(2) == SparseVector({2: 1, 3: 1})
    assert express_unit_vector(chain_truncation(2), 1).coeffs == SparseVector({1: 1, 2: -1})
    for n in range(1, 10):
        T = chain_truncation(2 * n)
        assert T.n_cols == 2 * n + 1
        verdict = is_tight(T)
        assert isinstance(verdict, NotTight)
        (k,) = kernel_basis(T)
        assert k == SparseVector({2 * n: 1, 2 * n + 1: -1})


def test_chain_declared_columns_match_rows():
    A = family_impediment_chain()
    for j in range(1, 40):
        assert A.column_rows(j) == {i for i in range(1, 45) if A.row(i).coeff(j)}


@pytest.mark.parametrize("seed", range(20))
def test_random_tight_is_tight_and_deterministic(seed):
    n, extra = 1 + seed % 8, seed % 5
    A = family_random_tight(seed, n, extra)
    assert (A.n_rows, A.n_cols) == (n + extra, n)
    assert is_tight(A) == Tight()
    assert family_random_tight(seed, n, extra) == A
    assert is_tight(family_random_tight(seed, n, 0)) == Tight()


def test_random_tight_one_by_one():
    A = family_random_tight(99, 1, 0)
    assert A.n_rows == 1 and A.entry(1, 1) != 0
    assert oracle_loaded(A).pairs == [(1, 1)]


def test_random_sparse():
    A = family_random_sparse(5, 4, 4, 1.0)
    assert all(len(r) == 4 for r in A.rows)
    assert family_random_sparse(5, 4, 4, 0.5) == family_random_sparse(5, 4, 4, 0.5)
    assert isinstance(is_tight(FiniteMatrix.zero(3, 2)), NotTight)
    with pytest.raises(ValueError):
        family_random_sparse(1, 2, 2, 0)


def test_family_spec_parsing():
    spec = parse_family_spec("random-tight:n=3,extra=1,seed=9")
    assert spec == FamilySpec("random-tight", {"n": "3", "extra": "1"}, 9)
    assert instantiate(spec) == family_random_tight(9, 3, 1)
    assert instantiate(parse_family_spec("donjuan")).name == "donjuan"
    with pytest.raises(KeyError):
        parse_family_spec("nope")
    with pytest.raises(ValueError):
        parse_family_spec("random-tight:n")
    with pytest.raises(ValueError):
        instantiate(FamilySpec("donjuan", {"n": "1"}))


def test_oracle_loaded_examples():
    assert oracle_loaded(FiniteMatrix.identity(2)).pairs == [(1, 1), (2, 2)]
    assert oracle_loaded(donjuan_truncation(3)) is None
    A = FiniteMatrix.from_dense([[0, 1], [1, 1]])
    phi = oracle_loaded(A)
    assert phi.pairs == [(1, 2), (2, 1)] and verify_injection(A, phi)


def test_oracle_guards():
    with pytest.raises(SizeGuardExceeded):
        oracle_loaded(FiniteMatrix.identity(9))
    big = BipartiteGraph.from_edges(range(1, 10), range(1, 10), [(j, j) for j in range(1, 10)])
    with pytest.raises(SizeGuardExceeded):
        oracle_espousable(big)
    with pytest.raises(SizeGuardExceeded):
        oracle_critical_wave(big, {j: j for j in range(1, 9)})


def test_oracle_espousable_examples():
    assert oracle_espousable(graph_from_matrix(FiniteMatrix.identity(3)))
    assert not oracle_espousable(BipartiteGraph.from_edges([1, 2], [1], [(1, 1), (2, 1)]))


def test_oracle_critical_wave_examples():
    assert oracle_critical_wave(BipartiteGraph.from_edges([1], [1], [(1, 1)]), {})
    two_on_one = BipartiteGraph.from_edges([1, 2], [1], [(1, 1), (2, 1)])
    assert oracle_critical_wave(two_on_one, {1: 1})
    k23 = BipartiteGraph.from_edges([1, 2], [1, 2, 3], itertools.product([1, 2], [1, 2, 3]))
    assert not oracle_critical_wave(k23, {1: 1, 2: 2})
    assert not is_wave(k23, {1: 1, 2: 2})


def _random_graph(rng, max_m):
    ms = range(1, 1 + rng.below(max_m + 1))
    ws = range(1, 1 + rng.below(max_m + 1))
    return BipartiteGraph.from_edges(ms, ws, [(m, w) for m in ms for w in ws if rng.below(3) == 0])


def test_oracle_espousable_agrees_with_matching_on_1000_graphs():
    rng = SplitMix64(2024)
    for _ in range(1000):
        G = _random_graph(rng, 6)
        assert oracle_espousable(G) == is_espousable_finite(G)


@given(graphs(max_m=5, max_w=5))
def test_oracle_critical_wave_agrees_on_waves(G):
    from tightload.matching import find_impediment

    imp = find_impediment(G)
    if imp is not None and len(imp.wave) <= 7:
        assert oracle_critical_wave(G, imp.wave) == is_critical_wave_finite(G, imp.wave)


def test_oracle_loaded_agrees_with_loader_on_corpus():
    from tightload.loader import construct_injection_finite

    for name, A in finite_corpus():
        if A.n_cols > 6:
            continue
        loaded = oracle_loaded(A)
        res = construct_injection_finite(A)
        if isinstance(is_tight(A), Tight):
            assert loaded is not None and verify_injection(A, res), name


def test_finite_corpus_size_and_determinism():
    names = [n for n, _ in finite_corpus()]
    assert len(names) == len(set(names)) >= 600
    assert [A for _, A in itertools.islice(finite_corpus(), 50)] == [A for _, A in itertools.islice(finite_corpus(), 50)]
