"""Command-line front end.

Exit codes: 0 affirmative, 1 negative with a certificate, 2 undecided
(budget exhausted on a lazy input), 64 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import corpus, formats
from .loader import (
    DiagonalizationTrace,
    Injection,
    construct_injection_finite,
    construct_injection_lazy,
    is_proudly_diagonal,
    proudly_diagonalize,
    verify_injection,
    verify_trace,
)
from .matching import (
    EspousalFailure,
    LazyGraph,
    ObstructionCertificate,
    PartialMatching,
    as_matching,
    espouse_lazy,
    find_obstruction_lazy,
    find_ps_obstruction_finite,
    graph_from_matrix,
    hall_violator,
    max_matching,
    to_dot,
    verify_obstruction,
)
from .matrices import (
    Exhausted,
    FiniteMatrix,
    KernelWitness,
    LazyMatrix,
    LeftInverse,
    NotTight,
    RowCombination,
    StreamEnded,
    Tight,
    is_tight,
    left_inverse,
    stubborn_search_lazy,
    verify_kernel_witness,
    verify_left_inverse,
    verify_row_combination,
)
from .numerics import render_rational

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_UNDECIDED = 2
EXIT_USAGE = 64

LAZY_VERBS = {"check-tight", "inject", "obstruct", "espouse"}
FALLBACK_BUDGET = 1000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_budget() -> int:
    raw = os.environ.get("TL_BUDGET_DEFAULT")
    if raw is None:
        return FALLBACK_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"TL_BUDGET_DEFAULT must be an integer, got {raw!r}") from None
    if value < 1:
        raise UsageError("TL_BUDGET_DEFAULT must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tightload", description="Tightness, loading injections and matching obstructions.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--json", action="store_true", help="print the certificate as JSON")
        p.add_argument("--lazy", action="store_true", help="treat the input as a row stream")
        p.add_argument("--cols", type=int, metavar="K", help="number of leading columns to handle (lazy)")
        p.add_argument("--budget", type=int, metavar="B", help="rows explored per step (lazy)")
        return p

    p = verb("check-tight", "decide tightness (finite) or stubbornness of leading columns (lazy)")
    p.add_argument("input")
    p = verb("inject", "build a loading injection")
    p.add_argument("input")
    p = verb("left-inverse", "compute an exact left inverse")
    p.add_argument("input")
    p = verb("diagonalize", "proud row-diagonalization trace")
    p.add_argument("input")
    p.add_argument("--steps", type=int, metavar="K")
    p = verb("graph", "bipartite graph of the nonzero pattern")
    p.add_argument("input")
    p.add_argument("--dot", metavar="PATH", help="write DOT here instead of stdout")
    p = verb("obstruct", "search for a Podewski-Steffens obstruction")
    p.add_argument("input")
    p.add_argument("--bound", type=int, default=20, help="alternating-path bound for lazy criticality")
    p = verb("espouse", "match every column (finite) or the first K columns (lazy)")
    p.add_argument("input")
    p = verb("family", "print a corpus family as an rfs-matrix file")
    p.add_argument("name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--rows", type=int, metavar="N", help="truncate a lazy family to N rows")
    p = verb("verify", "re-check a JSON certificate against a matrix")
    p.add_argument("input")
    p.add_argument("certificate")
    return parser


def _load(args) -> FiniteMatrix | LazyMatrix:
    try:
        A = formats.parse_matrix_file(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    except formats.MatrixParseError as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    if isinstance(A, LazyMatrix) and not args.lazy and args.verb != "verify":
        raise UsageError("input is a lazy row family; pass --lazy")
    return A


def _lazy_params(args, A) -> tuple[LazyMatrix, int, int]:
    if isinstance(A, FiniteMatrix):
        A = LazyMatrix.from_finite(A)
    if args.cols is None or args.cols < 1:
        raise UsageError("--lazy needs --cols K with K >= 1")
    budget = args.budget if args.budget is not None else default_budget()
    if budget < 1:
        raise UsageError("--budget must be positive")
    return A, args.cols, budget


def _emit(args, obj, text: str) -> None:
    print(formats.dumps(obj) if args.json else text)


def _vec_text(v) -> str:
    return "{" + ", ".join(f"{k}: {render_rational(x)}" for k, x in v.items()) + "}"


def _pairs_text(pairs) -> str:
    return " ".join(f"{a}->{b}" for a, b in pairs)


def _not_tight(args, verdict: NotTight) -> int:
    w = verdict.witness
    _emit(args, verdict, f"not tight: kernel vector {_vec_text(w.x)} with x_{w.index} != 0")
    return EXIT_NEGATIVE


def cmd_check_tight(args) -> int:
    A = _load(args)
    if not args.lazy:
        verdict = is_tight(A)
        if isinstance(verdict, Tight):
            _emit(args, verdict, "tight")
            return EXIT_OK
        return _not_tight(args, verdict)
    A, k, budget = _lazy_params(args, A)
    combos = []
    for j in range(1, k + 1):
        res = stubborn_search_lazy(A, j, budget)
        if isinstance(res, Exhausted):
            if res.complete:
                return _not_tight(args, is_tight(A.prefix(res.rows_consumed)))
            res = Exhausted(res.rows_consumed, step=j)
            _emit(args, res, f"undecided: e_{j} not in the span of the first {res.rows_consumed} rows")
            return EXIT_UNDECIDED
        combos.append(res.combination)
    cert = formats.StubbornColumns(tuple(combos))
    lines = [f"columns 1..{k} stubborn"] + [f"  e_{c.target} = {_vec_text(c.coeffs)} . rows" for c in combos]
    _emit(args, cert, "\n".join(lines))
    return EXIT_OK


def cmd_inject(args) -> int:
    A = _load(args)
    if not args.lazy:
        res = construct_injection_finite(A)
        if isinstance(res, NotTight):
            return _not_tight(args, res)
    else:
        A, k, budget = _lazy_params(args, A)
        res = construct_injection_lazy(A, k, budget)
        if isinstance(res, Exhausted):
            _emit(args, res, f"undecided: step {res.step} exhausted after {res.rows_consumed} rows")
            return EXIT_UNDECIDED
    _emit(args, res, f"injection: {_pairs_text(res.pairs)}")
    return EXIT_OK


def cmd_left_inverse(args) -> int:
    A = _load(args)
    Z = left_inverse(A)
    if Z is None:
        return _not_tight(args, is_tight(A))
    rows = [" ".join(render_rational(x) for x in r) for r in Z.Z.dense()]
    _emit(args, Z, "left inverse:\n" + "\n".join("  " + r for r in rows))
    return EXIT_OK


def cmd_diagonalize(args) -> int:
    A = _load(args)
    steps = args.steps if args.steps is not None else A.n_cols
    if not 0 <= steps <= A.n_cols:
        raise UsageError(f"--steps must lie in 0..{A.n_cols}")
    res = proudly_diagonalize(A, steps)
    if isinstance(res, NotTight):
        return _not_tight(args, res)
    lines = [f"{len(res.operations)} elementary operations"]
    for s in res.steps:
        for op in s.ops:
            lines.append(f"  step {s.k}: {op}")
    if res.final is not None and is_proudly_diagonal(res.final):
        lines.append("final matrix is proudly diagonal")
    _emit(args, res, "\n".join(lines))
    return EXIT_OK


def cmd_graph(args) -> int:
    A = _load(args)
    G = graph_from_matrix(A)
    K = max_matching(G)
    dot = to_dot(G, K)
    if args.dot:
        Path(args.dot).write_text(dot)
    elif not args.json:
        sys.stdout.write(dot)
    T = hall_violator(G)
    if T is None:
        pm = PartialMatching(K, tuple(K), A.n_rows)
        if args.json:
            print(formats.dumps(pm))
        elif args.dot:
            print(f"espousable: {_pairs_text(K.items())}")
        return EXIT_OK
    hv = formats.HallViolator(tuple(sorted(T)), tuple(sorted(G.neighborhood(T))))
    if args.json:
        print(formats.dumps(hv))
    elif args.dot:
        print(f"not espousable: columns {list(hv.subset)} meet only rows {list(hv.neighbors)}")
    return EXIT_NEGATIVE


def _cert_text(cert: ObstructionCertificate) -> str:
    imp = cert.impediment
    tag = "partial " if cert.partial else ""
    crit = "critical" if cert.critical else "not critical"
    return f"{tag}obstruction: vertex c{imp.vertex}, wave {_pairs_text(imp.wave.items()) or '(empty)'} ({crit})"


def cmd_obstruct(args) -> int:
    A = _load(args)
    if not args.lazy:
        cert = find_ps_obstruction_finite(graph_from_matrix(A))
        if cert is None:
            if args.json:
                print(json.dumps({"kind": "no-obstruction", "v": formats.VERSION}))
            else:
                print("unobstructed")
            return EXIT_OK
        _emit(args, cert, _cert_text(cert))
        return EXIT_NEGATIVE
    if isinstance(A, FiniteMatrix):
        A = LazyMatrix.from_finite(A)
    budget = args.budget if args.budget is not None else default_budget()
    cert = find_obstruction_lazy(LazyGraph(A, budget), args.bound)
    if cert is None:
        if args.json:
            print(json.dumps({"kind": "no-obstruction", "v": formats.VERSION, "partial": True, "rows": budget}))
        else:
            print(f"undecided: no impediment within the first {budget} rows")
        return EXIT_UNDECIDED
    _emit(args, cert, _cert_text(cert))
    return EXIT_UNDECIDED


def cmd_espouse(args) -> int:
    A = _load(args)
    if not args.lazy:
        G = graph_from_matrix(A)
        K = max_matching(G)
        if len(K) == len(G.m_side):
            pm = PartialMatching(K, tuple(K), A.n_rows)
            _emit(args, pm, f"espoused: {_pairs_text(K.items())}")
            return EXIT_OK
        cert = find_ps_obstruction_finite(G)
        _emit(args, cert, _cert_text(cert))
        return EXIT_NEGATIVE
    A, k, budget = _lazy_params(args, A)
    res = espouse_lazy(A, k, budget)
    if isinstance(res, PartialMatching):
        _emit(args, res, f"espoused: {_pairs_text(sorted(res.pairs.items()))}")
        return EXIT_OK
    text = f"failed at stage {res.stage} ({res.reason}) on column c{res.vertex}"
    if res.collisions:
        text += "; " + ", ".join(
            f"r{c.row} strands c{c.certificate.impediment.vertex}" for c in res.collisions[:5]
        )
        if len(res.collisions) > 5:
            text += f", ... ({len(res.collisions)} rows)"
    _emit(args, res, text)
    return EXIT_NEGATIVE if _is_real_obstruction(res) else EXIT_UNDECIDED


def _is_real_obstruction(res: EspousalFailure) -> bool:
    # Before any row is used, an obstruction whose wave avoids the
    # past-the-horizon placeholders (negative ids) lives in the true graph.
    if res.reason != "obstruction" or res.stage != 1 or res.certificate is None:
        return False
    return all(w > 0 for w in res.certificate.impediment.wave.values())


def cmd_family(args) -> int:
    if args.lazy or args.cols is not None or args.budget is not None:
        raise UsageError("family takes --seed, --param and --rows only")
    params = {}
    for item in args.param:
        key, eq, value = item.partition("=")
        if not eq:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        params[key] = value
    try:
        if args.name not in corpus.LAZY_FAMILIES and args.name not in corpus.FINITE_FAMILIES:
            raise KeyError(args.name)
        A = corpus.instantiate(corpus.FamilySpec(args.name, params, args.seed))
    except KeyError as exc:
        raise UsageError(f"unknown family or missing parameter: {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if isinstance(A, LazyMatrix):
        if args.rows is None:
            sys.stdout.write(f"rfs-matrix 1\nrows lazy:{args.name} cols lazy\n")
            return EXIT_OK
        A = A.prefix(args.rows)
    sys.stdout.write(formats.format_matrix(A))
    return EXIT_OK


def _verify(A, cert) -> bool:
    if isinstance(cert, RowCombination):
        return verify_row_combination(A.row, cert)
    if isinstance(cert, formats.StubbornColumns):
        return all(verify_row_combination(A.row, c) for c in cert.combinations)
    if isinstance(cert, Injection):
        return verify_injection(A, cert)
    if isinstance(A, LazyMatrix):
        raise UsageError("only row combinations and injections can be checked against a lazy input")
    if isinstance(cert, Tight):
        return isinstance(is_tight(A), Tight)
    if isinstance(cert, KernelWitness):
        return verify_kernel_witness(A, cert)
    if isinstance(cert, LeftInverse):
        Z = cert.Z
        if Z.n_rows != A.n_cols or Z.n_cols != A.n_rows:
            return False
        return verify_left_inverse(A, Z)
    if isinstance(cert, DiagonalizationTrace):
        if cert.steps and cert.steps[0].checkpoint.n_rows != A.n_rows:
            return False
        return bool(verify_trace(A, cert))
    G = graph_from_matrix(A)
    if isinstance(cert, ObstructionCertificate):
        if cert.partial:
            raise UsageError("a partial obstruction records an undecided search and cannot be checked")
        return verify_obstruction(G, cert)
    if isinstance(cert, formats.HallViolator):
        T = set(cert.subset)
        if not T <= set(G.m_side):
            return False
        N = G.neighborhood(T)
        return N == set(cert.neighbors) and len(N) < len(T)
    if isinstance(cert, PartialMatching):
        try:
            F = as_matching(cert.pairs)
        except ValueError:
            return False
        return all(G.has_edge(m, w) for m, w in F.items())
    raise UsageError(f"{type(cert).__name__} is not a checkable certificate")


def cmd_verify(args) -> int:
    A = _load(args)
    try:
        cert = formats.from_json(json.loads(Path(args.certificate).read_text()))
    except OSError as exc:
        raise UsageError(f"cannot read {args.certificate}: {exc.strerror}") from None
    except (json.JSONDecodeError, formats.CertificateError) as exc:
        raise UsageError(f"{args.certificate}: {exc}") from None
    try:
        ok = _verify(A, cert)
    except StreamEnded as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        print(json.dumps({"kind": "verification", "v": formats.VERSION, "valid": ok}))
    else:
        print("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_NEGATIVE


COMMANDS = {
    "check-tight": cmd_check_tight,
    "inject": cmd_inject,
    "left-inverse": cmd_left_inverse,
    "diagonalize": cmd_diagonalize,
    "graph": cmd_graph,
    "obstruct": cmd_obstruct,
    "espouse": cmd_espouse,
    "family": cmd_family,
    "verify": cmd_verify,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.lazy and args.verb not in LAZY_VERBS:
            raise UsageError(f"--lazy is not supported by {args.verb}")
        return COMMANDS[args.verb](args)
    except UsageError as exc:
        print(f"tightload: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
