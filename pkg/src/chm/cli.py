"""Command line entry point: ``chm <command> ...``.

Exit codes: 0 success, 2 verification failure, 3 invalid input.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .algebra import row_from_text
from .completion import dump_system
from .decompositions import check_prime, decomposition_classes
from .equivalence import ClassStore, canonical_key
from .hadamard import StructureParams, is_hadamard, read_matrix

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_INPUT = 3

log = logging.getLogger("chm")


class InputError(Exception):
    pass


def _prime(text: str) -> int:
    try:
        p = int(text)
        check_prime(p)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return p


def _decomps(text: str | None):
    if not text:
        return None
    out = []
    for part in text.split(";"):
        vals = tuple(int(v) for v in part.replace(",", " ").split())
        if len(vals) != 4:
            raise InputError(f"bad decomposition {part!r}; expected four integers")
        out.append(vals)
    return out


def _load_store(path: str) -> ClassStore:
    try:
        return ClassStore.load(path)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: no such file") from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _store_p(store: ClassStore, override: int | None) -> int:
    if override:
        return override
    if "p" in store.meta:
        return int(store.meta["p"])
    if store.order:
        return store.order // 4
    raise InputError("cannot tell p from an empty store; pass --p")


def cmd_classify(args) -> int:
    from .classifier import ClassifyOptions, classify, format_conjecture_scan, conjecture_scan, report

    p = _prime(args.p)
    if args.jobs < 1:
        raise InputError("--jobs must be at least 1")
    normalize = "affine" if args.affine_normalize else ("shift" if args.shift_normalize else "none")
    opt = ClassifyOptions(
        cells=args.cells,
        jobs=args.jobs,
        prune=not args.no_prune,
        normalize=normalize,
        solver=args.solver,
        checkpoint=args.checkpoint,
        resume=args.resume,
        decompositions=_decomps(args.decomps),
    )
    progress = None if args.quiet else (lambda msg: print(msg, file=sys.stderr, flush=True))
    try:
        result = classify(p, opt, progress)
    except (ValueError, OSError) as exc:
        raise InputError(str(exc)) from exc
    if args.out:
        result.store.save(args.out)
    if args.dump_system:
        _dump_first(result, args.dump_system)
    print(report(result.store, p, result.cells, "csv" if args.csv else "text"), end="")
    print(format_conjecture_scan(conjecture_scan(result.store, p)), end="")
    print(f"{result.units_done}/{result.units_total} units, {result.seconds:.1f}s")
    return EXIT_OK


def _dump_first(result, path: str) -> None:
    """Write the linear system of the first solution found in each cell."""
    chunks = []
    for cell in result.cells:
        occ = [o for e in result.store.entries.values() for o in e.occurrences.values() if o.cell == cell]
        if not occ:
            continue
        o = min(occ, key=lambda o: o.order_key())
        rows = [row_from_text(t) for t in o.rows]
        chunks.append(dump_system(rows[:3], int(rows[3].sum()), StructureParams.parse(cell)))
    with open(path, "w") as fh:
        fh.write("\n".join(chunks))


def cmd_dump_system(args) -> int:
    try:
        params = StructureParams.parse(args.cell)
        rows = [row_from_text(t) for t in (args.w0, args.x0, args.y0)]
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if len({len(r) for r in rows}) != 1:
        raise InputError("first rows differ in length")
    sys.stdout.write(dump_system(rows, args.z, params))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .classifier import verify_store

    store = _load_store(args.store)
    failures = verify_store(store)
    for f in failures:
        print("FAIL", f)
    print(f"{len(store)} classes, {sum(len(e.occurrences) for e in store.entries.values())} occurrences, {len(failures)} failures")
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_report(args) -> int:
    from .classifier import conjecture_scan, format_conjecture_scan, report

    store = _load_store(args.store)
    p = _store_p(store, args.p)
    print(report(store, p, None, "csv" if args.csv else "text"), end="")
    if not args.csv:
        print(format_conjecture_scan(conjecture_scan(store, p)), end="")
    return EXIT_OK


def _read(path: str) -> np.ndarray:
    try:
        return read_matrix(path)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: no such file") from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_equiv(args) -> int:
    A, B = _read(args.a), _read(args.b)
    if A.shape != B.shape:
        raise InputError(f"orders differ: {A.shape[0]} and {B.shape[0]}")
    for name, M in ((args.a, A), (args.b, B)):
        if not is_hadamard(M):
            print(f"note: {name} is not a Hadamard matrix", file=sys.stderr)
    ka, kb = canonical_key(A), canonical_key(B)
    print(f"{args.a}  {ka.hex}")
    print(f"{args.b}  {kb.hex}")
    print("equivalent" if ka == kb else "not equivalent")
    return EXIT_OK


def cmd_key(args) -> int:
    print(canonical_key(_read(args.matrix)).hex)
    return EXIT_OK


def cmd_decomps(args) -> int:
    p = _prime(args.p)
    for cls in decomposition_classes(p):
        w, x, y, z = cls.representative
        print(f"{w} {x} {y} {z}  {len(cls.orbit)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chm", description="Cocyclic Hadamard matrices of order 4p: search and classification.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="classify all matrices of order 4p")
    c.add_argument("p")
    c.add_argument("--cells", default="default", help="default, extended, or a comma list such as L110-ii,L111-tt")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--resume", metavar="FILE")
    c.add_argument("--checkpoint", metavar="FILE")
    c.add_argument("--no-prune", action="store_true", help="skip the eigenvalue test")
    norm = c.add_mutually_exclusive_group()
    norm.add_argument("--shift-normalize", action="store_true", help="search W only up to cyclic shifts")
    norm.add_argument("--affine-normalize", action="store_true", help="search W only up to maps m -> a*m + s")
    c.add_argument("--solver", choices=("indexed", "exact"), default="indexed")
    c.add_argument("--decomps", help="restrict to classes, e.g. '1 1 5 5;3 3 3 5'")
    c.add_argument("--out", metavar="STORE")
    c.add_argument("--dump-system", metavar="FILE", help="write the linear system of one solution per cell")
    c.add_argument("--csv", action="store_true")
    c.add_argument("--quiet", action="store_true")
    c.set_defaults(func=cmd_classify)

    d = sub.add_parser("dump-system", help="print the linear system for given first rows")
    d.add_argument("--cell", required=True, help="e.g. L111-ti")
    d.add_argument("w0")
    d.add_argument("x0")
    d.add_argument("y0")
    d.add_argument("z", type=int, help="row sum of the unknown fourth row")
    d.set_defaults(func=cmd_dump_system)

    v = sub.add_parser("verify", help="re-check every entry of a store")
    v.add_argument("store")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="per-cell class counts of a store")
    r.add_argument("store")
    r.add_argument("--p", type=int)
    r.add_argument("--csv", action="store_true")
    r.set_defaults(func=cmd_report)

    e = sub.add_parser("equiv", help="test two matrix files for equivalence")
    e.add_argument("a")
    e.add_argument("b")
    e.set_defaults(func=cmd_equiv)

    k = sub.add_parser("key", help="print the class key of a matrix file")
    k.add_argument("matrix")
    k.set_defaults(func=cmd_key)

    s = sub.add_parser("decomps", help="decomposition classes of 4p")
    s.add_argument("p")
    s.set_defaults(func=cmd_decomps)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
