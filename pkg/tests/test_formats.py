import json

import pytest
from hypothesis import given

from strategies import matrices
from tightload import formats
from tightload.corpus import chain_truncation, donjuan_truncation, family_random_tight
from tightload.loader import construct_injection_finite, proudly_diagonalize
from tightload.matching import espouse_lazy, find_ps_obstruction_finite, graph_from_matrix
from tightload.matrices import Exhausted, FiniteMatrix, LazyMatrix, Tight, express_unit_vector, is_tight, left_inverse


def parse(*lines):
    return formats.parse_matrix_text("\n".join(lines) + "\n")


def test_parse_identity():
    assert parse("rfs-matrix 1", "rows 2 cols 2", "1 1 1", "2 2 1") == FiniteMatrix.identity(2)


def test_parse_comments_and_rationals():
    A = parse("# a comment", "rfs-matrix 1", "rows 1 cols 3   # shape", "", "1 3 -4/6")
    assert A.dense() == [[0, 0, -formats.parse_rational("2/3")]]


def test_parse_lazy_family():
    A = parse("rfs-matrix 1", "rows lazy:donjuan cols lazy")
    assert isinstance(A, LazyMatrix) and A.name == "donjuan"
    B = parse("rfs-matrix 1", "rows lazy:random-tight:n=3,seed=4 cols 3")
    assert B == family_random_tight(4, 3, 0)


@pytest.mark.parametrize(
    "lines, where",
    [
        (["rfs-matrix 1", "rows 1 cols 1", "1 1 0"], 3),
        (["rfs-matrix 2", "rows 1 cols 1"], 1),
        (["rfs-matrix 1", "rows 1 cols 1", "1 1 1", "1 1 2"], 4),
        (["rfs-matrix 1", "rows 1 cols 1", "2 1 1"], 3),
        (["rfs-matrix 1", "rows 1 cols 1", "1 1"], 3),
        (["rfs-matrix 1", "rows 1 cols 1", "1 1 1.5"], 3),
        (["rfs-matrix 1", "rows lazy:nosuch cols lazy"], 2),
        (["rfs-matrix 1", "rows lazy:donjuan cols lazy", "1 1 1"], 3),
        (["rfs-matrix 1", "rows 2 cols lazy"], 2),
        (["rfs-matrix 1", "rows 0 cols 1"], 2),
        (["rfs-matrix 1"], 1),
    ],
)
def test_parse_errors_carry_line_numbers(lines, where):
    with pytest.raises(formats.MatrixParseError) as exc:
        parse(*lines)
    assert exc.value.line == where


@given(matrices())
def test_format_round_trip(A):
    assert formats.parse_matrix_text(formats.format_matrix(A)) == A


def _round_trip(obj):
    text = formats.dumps(obj)
    d = json.loads(text)
    assert d["v"] == 1 and "kind" in d
    back = formats.from_json(d)
    assert formats.dumps(back) == text
    return d, back


def test_json_round_trips():
    A = FiniteMatrix.from_dense([[0, 1], [1, 1]])
    _round_trip(Tight())
    d, _ = _round_trip(is_tight(donjuan_truncation(3)))
    assert d["kind"] == "kernel-witness"
    d, _ = _round_trip(express_unit_vector(chain_truncation(2), 1))
    assert d == {"kind": "row-combination", "v": 1, "target": 1, "coeffs": {"1": "1", "2": "-1"}}
    d, _ = _round_trip(construct_injection_finite(A))
    assert d["pairs"] == [[1, 2], [2, 1]]
    _round_trip(left_inverse(FiniteMatrix.from_dense([[2, 0], [0, 1], [3, 3]])))
    _round_trip(proudly_diagonalize(A))
    _round_trip(find_ps_obstruction_finite(graph_from_matrix(chain_truncation(4))))
    _round_trip(Exhausted(100, step=1))
    _round_trip(formats.HallViolator((1, 2), (1,)))
    from tightload.corpus import family_donjuan, family_impediment_chain

    _round_trip(espouse_lazy(family_donjuan(), 2, 5))
    _round_trip(espouse_lazy(family_impediment_chain(), 4, 10))


def test_coefficient_keys_in_numeric_order():
    comb = express_unit_vector(FiniteMatrix.identity(12), 12)
    assert list(formats.to_json(comb)["coeffs"]) == ["12"]
    d = formats.to_json(is_tight(FiniteMatrix.from_dense([[1, 0, 0, 0, 0, 0, 0, 0, 0, 1, -1]])))
    assert list(d["x"]) == sorted(d["x"], key=int)


@pytest.mark.parametrize(
    "payload",
    [[], {"v": 1}, {"kind": "tight", "v": 2}, {"kind": "martian", "v": 1}, {"kind": "injection", "v": 1}],
)
def test_bad_certificates(payload):
    with pytest.raises(formats.CertificateError):
        formats.from_json(payload)
