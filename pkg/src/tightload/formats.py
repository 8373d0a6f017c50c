"""The ``rfs-matrix`` text format and JSON certificates.

Matrix files::

    rfs-matrix 1
    rows 3 cols 2
    1 1 2
    2 2 1
    3 1 3
    3 2 3

Entries are ``<row> <col> <rational>`` triples, 1-based; omitted entries are
zero.  A header ``rows lazy:FAMILY[:k=v,...] cols lazy`` names a corpus
family instead of listing entries.  ``#`` starts a comment.

Every certificate serializes to a JSON object with ``"kind"`` and ``"v": 1``
first; keys of coefficient maps are decimal strings in ascending numeric
order and scalars are ``"p"`` or ``"p/q"`` strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import corpus
from .loader import DiagonalizationTrace, Injection, Replace, Swap, TraceStep
from .matching import (
    Collision,
    EspousalFailure,
    Impediment,
    ObstructionCertificate,
    PartialMatching,
)
from .matrices import (
    Exhausted,
    FiniteMatrix,
    KernelWitness,
    LazyMatrix,
    LeftInverse,
    NotTight,
    RowCombination,
    Tight,
)
from .numerics import SparseVector, parse_rational, render_rational

VERSION = 1


class MatrixParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CertificateError(ValueError):
    pass


def _positive(token: str, line: int, what: str) -> int:
    try:
        n = int(token)
    except ValueError:
        raise MatrixParseError(line, f"{what} must be an integer, got {token!r}") from None
    if n < 1:
        raise MatrixParseError(line, f"{what} must be positive, got {n}")
    return n


def parse_matrix_text(text: str) -> FiniteMatrix | LazyMatrix:
    lines = []
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((no, body))
    if not lines or lines[0][1].split() != ["rfs-matrix", "1"]:
        raise MatrixParseError(lines[0][0] if lines else 1, "expected header 'rfs-matrix 1'")
    if len(lines) < 2:
        raise MatrixParseError(lines[0][0], "missing 'rows ... cols ...' line")
    no, shape = lines[1]
    parts = shape.split()
    if len(parts) != 4 or parts[0] != "rows" or parts[2] != "cols":
        raise MatrixParseError(no, "expected 'rows <n|lazy:FAMILY> cols <m|lazy>'")
    rows_tok, cols_tok = parts[1], parts[3]
    if rows_tok.startswith("lazy:"):
        try:
            spec = corpus.parse_family_spec(rows_tok[len("lazy:"):])
            matrix = corpus.instantiate(spec)
        except (KeyError, ValueError) as exc:
            raise MatrixParseError(no, f"bad family {rows_tok!r}: {exc}") from None
        if cols_tok != "lazy":
            if isinstance(matrix, LazyMatrix) or _positive(cols_tok, no, "cols") != matrix.n_cols:
                raise MatrixParseError(no, "column count does not match the family")
        if len(lines) > 2:
            raise MatrixParseError(lines[2][0], "a family matrix takes no entries")
        return matrix
    if cols_tok == "lazy":
        raise MatrixParseError(no, "'cols lazy' needs a lazy row family")
    n_rows = _positive(rows_tok, no, "rows")
    n_cols = _positive(cols_tok, no, "cols")
    entries: list[dict[int, Any]] = [{} for _ in range(n_rows)]
    for no, body in lines[2:]:
        parts = body.split()
        if len(parts) != 3:
            raise MatrixParseError(no, f"expected '<row> <col> <rational>', got {body!r}")
        i = _positive(parts[0], no, "row index")
        j = _positive(parts[1], no, "column index")
        if i > n_rows or j > n_cols:
            raise MatrixParseError(no, f"entry ({i}, {j}) outside {n_rows}x{n_cols}")
        try:
            v = parse_rational(parts[2])
        except ValueError as exc:
            raise MatrixParseError(no, str(exc)) from None
        if not v:
            raise MatrixParseError(no, f"explicit zero entry at ({i}, {j})")
        if j in entries[i - 1]:
            raise MatrixParseError(no, f"duplicate entry ({i}, {j})")
        entries[i - 1][j] = v
    return FiniteMatrix(n_rows, n_cols, tuple(SparseVector(e) for e in entries))


def parse_matrix_file(path: str | Path) -> FiniteMatrix | LazyMatrix:
    return parse_matrix_text(Path(path).read_text())


def format_matrix(A: FiniteMatrix) -> str:
    out = ["rfs-matrix 1", f"rows {A.n_rows} cols {A.n_cols}"]
    for i, r in enumerate(A.rows, 1):
        for j, v in r.items():
            out.append(f"{i} {j} {render_rational(v)}")
    return "\n".join(out) + "\n"


# -- JSON ------------------------------------------------------------------------


def _vec(v: SparseVector) -> dict[str, str]:
    return {str(k): render_rational(x) for k, x in v.items()}


def _unvec(d: dict[str, str]) -> SparseVector:
    return SparseVector({int(k): parse_rational(x) for k, x in d.items()})


def _entries(A: FiniteMatrix) -> list[list]:
    return [[i, j, render_rational(v)] for i, r in enumerate(A.rows, 1) for j, v in r.items()]


def _from_entries(n_rows: int, n_cols: int, entries: list[list]) -> FiniteMatrix:
    rows: list[dict[int, Any]] = [{} for _ in range(n_rows)]
    for i, j, v in entries:
        rows[i - 1][j] = parse_rational(v)
    return FiniteMatrix(n_rows, n_cols, tuple(SparseVector(r) for r in rows))


def _head(kind: str) -> dict[str, Any]:
    return {"kind": kind, "v": VERSION}


@dataclass(frozen=True)
class HallViolator:
    subset: tuple[int, ...]
    neighbors: tuple[int, ...]


@dataclass(frozen=True)
class StubbornColumns:
    """Row combinations showing each of the listed columns is stubborn."""

    combinations: tuple[RowCombination, ...]


def to_json(obj) -> dict[str, Any]:
    if isinstance(obj, Tight):
        return _head("tight")
    if isinstance(obj, NotTight):
        obj = obj.witness
    if isinstance(obj, KernelWitness):
        return {**_head("kernel-witness"), "index": obj.index, "x": _vec(obj.x)}
    if isinstance(obj, RowCombination):
        return {**_head("row-combination"), "target": obj.target, "coeffs": _vec(obj.coeffs)}
    if isinstance(obj, StubbornColumns):
        return {**_head("stubborn-columns"), "combinations": [to_json(c) for c in obj.combinations]}
    if isinstance(obj, Injection):
        return {**_head("injection"), "pairs": [[j, i] for j, i in obj.pairs]}
    if isinstance(obj, Exhausted):
        return {**_head("exhausted"), "step": obj.step, "rows_consumed": obj.rows_consumed, "complete": obj.complete}
    if isinstance(obj, LeftInverse):
        Z = obj.Z
        return {**_head("left-inverse"), "rows": Z.n_rows, "cols": Z.n_cols, "entries": _entries(Z)}
    if isinstance(obj, DiagonalizationTrace):
        steps = []
        for s in obj.steps:
            ops = []
            for op in s.ops:
                if isinstance(op, Swap):
                    ops.append({"op": "swap", "rows": [op.i, op.k]})
                else:
                    ops.append({"op": "replace", "row": op.row, "coeffs": _vec(op.coeffs)})
            steps.append({"k": s.k, "ops": ops, "checkpoint": _entries(s.checkpoint)})
        shape = obj.steps[0].checkpoint if obj.steps else None
        return {
            **_head("diagonalization-trace"),
            "n_rows": shape.n_rows if shape else 0,
            "n_cols": shape.n_cols if shape else 0,
            "steps": steps,
        }
    if isinstance(obj, ObstructionCertificate):
        return {
            **_head("ps-obstruction"),
            "wave": [[m, w] for m, w in obj.impediment.wave.items()],
            "vertex": obj.impediment.vertex,
            "critical": obj.critical,
            "saturating_matchings": obj.saturating_matchings,
            "partial": obj.partial,
            "bound": obj.bound,
        }
    if isinstance(obj, HallViolator):
        return {**_head("hall-violator"), "subset": list(obj.subset), "neighbors": list(obj.neighbors)}
    if isinstance(obj, PartialMatching):
        return {**_head("matching"), "pairs": [[m, w] for m, w in sorted(obj.pairs.items())], "order": list(obj.order)}
    if isinstance(obj, EspousalFailure):
        return {
            **_head("espousal-failure"),
            "stage": obj.stage,
            "reason": obj.reason,
            "vertex": obj.vertex,
            "pairs": [[m, w] for m, w in sorted(obj.pairs.items())],
            "certificate": to_json(obj.certificate) if obj.certificate else None,
            "collisions": [{"row": c.row, "certificate": to_json(c.certificate)} for c in obj.collisions],
        }
    raise TypeError(f"no JSON form for {type(obj).__name__}")


def from_json(d: dict[str, Any]):
    if not isinstance(d, dict) or "kind" not in d:
        raise CertificateError("certificate must be an object with a 'kind'")
    if d.get("v") != VERSION:
        raise CertificateError(f"unsupported certificate version {d.get('v')!r}")
    kind = d["kind"]
    try:
        if kind == "tight":
            return Tight()
        if kind == "kernel-witness":
            return KernelWitness(_unvec(d["x"]), int(d["index"]))
        if kind == "row-combination":
            return RowCombination(int(d["target"]), _unvec(d["coeffs"]))
        if kind == "stubborn-columns":
            return StubbornColumns(tuple(from_json(c) for c in d["combinations"]))
        if kind == "injection":
            return Injection({int(j): int(i) for j, i in d["pairs"]})
        if kind == "exhausted":
            return Exhausted(int(d["rows_consumed"]), d.get("step"), bool(d.get("complete", False)))
        if kind == "left-inverse":
            return LeftInverse(_from_entries(int(d["rows"]), int(d["cols"]), d["entries"]))
        if kind == "diagonalization-trace":
            n_rows, n_cols = int(d["n_rows"]), int(d["n_cols"])
            steps = []
            for s in d["steps"]:
                ops = []
                for op in s["ops"]:
                    if op["op"] == "swap":
                        ops.append(Swap(int(op["rows"][0]), int(op["rows"][1])))
                    elif op["op"] == "replace":
                        ops.append(Replace(int(op["row"]), _unvec(op["coeffs"])))
                    else:
                        raise CertificateError(f"unknown operation {op['op']!r}")
                steps.append(TraceStep(int(s["k"]), tuple(ops), _from_entries(n_rows, n_cols, s["checkpoint"])))
            return DiagonalizationTrace(tuple(steps))
        if kind == "ps-obstruction":
            imp = Impediment({int(m): int(w) for m, w in d["wave"]}, int(d["vertex"]))
            return ObstructionCertificate(imp, bool(d["critical"]), d.get("saturating_matchings"), bool(d.get("partial")), d.get("bound"))
        if kind == "hall-violator":
            return HallViolator(tuple(d["subset"]), tuple(d["neighbors"]))
        if kind == "matching":
            return PartialMatching({int(m): int(w) for m, w in d["pairs"]}, tuple(d.get("order", ())), 0)
        if kind == "espousal-failure":
            return EspousalFailure(
                int(d["stage"]),
                d["reason"],
                int(d["vertex"]),
                {int(m): int(w) for m, w in d["pairs"]},
                from_json(d["certificate"]) if d.get("certificate") else None,
                tuple(Collision(int(c["row"]), from_json(c["certificate"])) for c in d["collisions"]),
            )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CertificateError(f"malformed {kind} certificate: {exc}") from None
    raise CertificateError(f"unknown certificate kind {kind!r}")


def dumps(obj) -> str:
    return json.dumps(to_json(obj))
