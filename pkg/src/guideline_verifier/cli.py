"""Command-line entry point.

Exit codes: 0 success, 1 validation or file error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import bench
from .compiler import Session, conj, negate
from .corpus import LshConfig, ScanConfig, emit_report, isolated_rules, scan, verdict_to_json
from .document import load_document_file
from .model import Document, ValidationError
from .relations import RelationConfig, classify_pair, explain
from .solver import SolverCapacityError, emit_smtlib

AXIOMS_ENV = "GUIDELINE_VERIFIER_AXIOMS"


class CliError(Exception):
    """Reported on stderr with exit code 1."""


def _write(data: bytes, out: Optional[str]) -> None:
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _json_bytes(payload) -> bytes:
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from None


def _load(args, path: Optional[str] = None) -> Document:
    path = path or args.doc
    axioms = getattr(args, "axioms", None) or os.environ.get(AXIOMS_ENV) or None
    try:
        return load_document_file(path, axioms)
    except OSError as exc:
        raise CliError(f"{exc.filename or path}: {exc.strerror or exc}") from None
    except ValidationError as exc:
        raise CliError(f"{path}: {exc}") from None


def _relation_config(args) -> RelationConfig:
    return RelationConfig(spec_prior=getattr(args, "spec_prior", False))


def _rule(doc: Document, rule_id: str):
    try:
        return doc.rule(rule_id)
    except KeyError:
        raise CliError(f"unknown rule id {rule_id!r}") from None


# Subcommands -----------------------------------------------------------------------------


def cmd_validate(args) -> int:
    doc = _load(args)
    summary = {
        "valid": True,
        "predicates": len(doc.predicates),
        "rules": len(doc.rules),
        "axioms": len(doc.axioms.axioms),
    }
    if args.format == "json":
        _write(_json_bytes(summary), None)
    else:
        _write(f"{args.doc}: ok ({summary['predicates']} predicates, {summary['rules']} rules, {summary['axioms']} axioms)\n".encode(), None)
    return 0


def cmd_relate(args) -> int:
    doc = _load(args)
    session = Session(doc)
    ra = session.compile_rule(_rule(doc, args.rule_a))
    rb = session.compile_rule(_rule(doc, args.rule_b))
    axioms = () if args.no_axioms else session.axioms()
    verdict = classify_pair(ra, rb, axioms, _relation_config(args))
    if args.format == "json":
        _write(_json_bytes(verdict_to_json(verdict, doc)), None)
    else:
        _write(f"{verdict.label.value}\n{explain(verdict)}\n".encode("utf-8"), None)
    return 0


def _scan_config(args) -> ScanConfig:
    try:
        lsh = LshConfig(args.num_perm, args.bands, args.rows, args.shingle, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return ScanConfig(args.exhaustive, lsh, _relation_config(args), not args.no_axioms)


def cmd_scan(args) -> int:
    doc = _load(args)
    result = scan(doc, _scan_config(args))
    _write(emit_report(result, doc, args.format), args.output)
    return 0


def cmd_graph(args) -> int:
    doc = _load(args)
    result = scan(doc, _scan_config(args))
    graph = result.graph
    isolated = isolated_rules(graph, result.rule_ids)
    if args.format == "json":
        payload = {
            "nodes": list(graph.nodes),
            "edges": [
                {"rule_a": e.rule_a, "rule_b": e.rule_b, "label": e.verdict.label.value} for e in graph.edges
            ],
            "degrees": graph.degrees(),
            "isolated": isolated,
        }
        _write(_json_bytes(payload), args.output)
    else:
        lines = [f"{e.rule_a} -- {e.rule_b} [{e.verdict.label.value}]" for e in graph.edges]
        lines.append(f"isolated ({len(isolated)}): {', '.join(isolated) if isolated else '-'}")
        _write(("\n".join(lines) + "\n").encode("utf-8"), args.output)
    return 0


def cmd_bench_gen_synthetic(args) -> int:
    document, gold = bench.synthetic_benchmark(n_isolated=args.isolated, seed=args.seed)
    with open(args.doc_out, "wb") as fh:
        fh.write(_json_bytes(document))
    with open(args.gold_out, "wb") as fh:
        fh.write(bench.dump_gold(gold))
    return 0


def _gold(args, doc: Optional[Document] = None) -> list:
    try:
        return bench.load_gold(_read(args.gold), doc)
    except bench.PredictionFormatError as exc:
        raise CliError(f"{args.gold}: {exc}") from None


def cmd_bench_gen_noise(args) -> int:
    doc = _load(args)
    gold = _gold(args, doc)
    if args.isolated_from:
        pool = [line.strip() for line in _read(args.isolated_from).decode("utf-8").splitlines() if line.strip()]
    else:
        pool = scan(doc, ScanConfig(relation=_relation_config(args))).isolated
    try:
        samples = bench.inject_noise(gold, pool, args.k, args.seed)
    except bench.InsufficientIsolatedRules as exc:
        raise CliError(str(exc)) from None
    _write(bench.dump_noise(samples, args.k, args.seed), args.output)
    return 0


def cmd_bench_run(args) -> int:
    doc = _load(args)
    try:
        dataset = bench.load_dataset(_read(args.dataset), doc)
    except (bench.PredictionFormatError, KeyError, ValueError) as exc:
        raise CliError(f"{args.dataset}: {exc}") from None
    predictions = bench.run_engine_as_system(dataset, doc, _relation_config(args), fine=args.fine)
    fmt = "json" if args.format == "json" else "csv"
    _write(bench.export_predictions(predictions, fmt), args.output)
    return 0


def cmd_bench_score(args) -> int:
    gold = _gold(args)
    try:
        predictions = bench.import_predictions(_read(args.predictions), args.pred_format)
        table = bench.score(predictions, gold, fine=args.fine)
    except (bench.PredictionFormatError, bench.UnknownLabelError) as exc:
        raise CliError(f"{args.predictions}: {exc}") from None
    if args.format == "json":
        _write(_json_bytes(table.to_json()), args.output)
    else:
        _write(table.format_text().encode("utf-8"), args.output)
    return 0


_QUERIES = ("forward", "backward", "overlap")


def cmd_export_smtlib(args) -> int:
    doc = _load(args)
    session = Session(doc)
    ra = session.compile_rule(_rule(doc, args.rule_a))
    rb = session.compile_rule(_rule(doc, args.rule_b))
    axioms = [] if args.no_axioms else session.axioms()
    formulas = {
        "forward": (conj(ra.formula, negate(rb.formula)), f"{ra.id} AND NOT {rb.id}: UNSAT means {ra.id} implies {rb.id}"),
        "backward": (conj(rb.formula, negate(ra.formula)), f"{rb.id} AND NOT {ra.id}: UNSAT means {rb.id} implies {ra.id}"),
        "overlap": (conj(ra.formula, rb.formula), f"{ra.id} AND {rb.id}: UNSAT means the conditions are mutex"),
    }
    chosen = _QUERIES if args.query == "all" else (args.query,)
    scripts = [emit_smtlib(formulas[q][0], axioms, comment=f"query {q}: {formulas[q][1]}") for q in chosen]
    _write("\n".join(scripts).encode("utf-8"), args.output)
    return 0


# Parser -------------------------------------------------------------------------------------


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _noise_k(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer, got {text!r}") from None
    if not 0 <= value <= bench.MAX_NOISE:
        raise argparse.ArgumentTypeError(f"k must be within [0, {bench.MAX_NOISE}], got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gverify",
        description="Detect redundancy and conflict between formalized guideline rules.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "json"), default="text", help="output format (default: text)")
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("-o", "--output", help="write to this file instead of stdout")
    doc = argparse.ArgumentParser(add_help=False)
    doc.add_argument("doc", help="rules document (JSON)")
    doc.add_argument("--axioms", help=f"extra axiom file (JSON); defaults to ${AXIOMS_ENV} when set")
    rel = argparse.ArgumentParser(add_help=False)
    rel.add_argument("--spec-prior", action="store_true", help="suppress conflicts with declared exception rules")
    rel.add_argument("--no-axioms", action="store_true", help="ignore background axioms")
    lsh = argparse.ArgumentParser(add_help=False)
    lsh.add_argument("--exhaustive", action="store_true", help="classify every pair instead of LSH candidates")
    lsh.add_argument("--num-perm", type=_positive_int, default=128, help="MinHash permutations (default 128)")
    lsh.add_argument("--bands", type=_positive_int, default=32, help="LSH bands (default 32)")
    lsh.add_argument("--rows", type=_positive_int, default=4, help="rows per band (default 4)")
    lsh.add_argument("--shingle", type=_positive_int, default=3, help="words per text shingle (default 3)")
    lsh.add_argument("--seed", type=int, default=1, help="MinHash seed (default 1)")

    p = sub.add_parser("validate", parents=[doc, fmt], help="check a rules document")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("relate", parents=[doc, rel, fmt], help="classify one rule pair")
    p.add_argument("rule_a")
    p.add_argument("rule_b")
    p.set_defaults(func=cmd_relate)

    p = sub.add_parser("scan", parents=[doc, rel, lsh, fmt, out], help="scan a document and report relations")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("graph", parents=[doc, rel, lsh, fmt, out], help="relationship graph and isolated rules")
    p.set_defaults(func=cmd_graph)

    p_bench = sub.add_parser("bench", help="benchmark harness")
    bsub = p_bench.add_subparsers(dest="bench_command", metavar="ACTION")
    bsub.required = True

    p = bsub.add_parser("gen-synthetic", help="write a synthetic rules document and gold set")
    p.add_argument("doc_out", help="where to write the rules document")
    p.add_argument("gold_out", help="where to write the gold pairs (JSON lines)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--isolated", type=int, default=24, help="number of isolated distractor rules (default 24)")
    p.set_defaults(func=cmd_bench_gen_synthetic)

    p = bsub.add_parser("gen-noise", parents=[doc, out], help="inject isolated distractor rules into gold pairs")
    p.add_argument("gold", help="gold pairs (JSON lines)")
    p.add_argument("--k", type=_noise_k, required=True, help="distractors per sample, 0..8")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--isolated-from", help="file with one isolated rule id per line (default: computed by scan)")
    p.set_defaults(func=cmd_bench_gen_noise)

    p = bsub.add_parser("run", parents=[doc, rel, out], help="predict labels with the engine")
    p.add_argument("dataset", help="gold JSON lines or a noise dataset")
    p.add_argument("--fine", action="store_true", help="emit fine-grained labels")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_bench_run)

    p = bsub.add_parser("score", parents=[fmt, out], help="score predictions against gold")
    p.add_argument("gold", help="gold pairs (JSON lines)")
    p.add_argument("predictions", help="predictions (CSV sample_id,label or JSON)")
    p.add_argument("--pred-format", choices=("csv", "json"), help="predictions format (default: detect)")
    p.add_argument("--fine", action="store_true", help="score fine-grained labels")
    p.set_defaults(func=cmd_bench_score)

    p_export = sub.add_parser("export", help="export solver queries")
    esub = p_export.add_subparsers(dest="export_command", metavar="FORMAT")
    esub.required = True
    p = esub.add_parser("smtlib", parents=[doc, out], help="SMT-LIB2 scripts for a pair's relation queries")
    p.add_argument("rule_a")
    p.add_argument("rule_b")
    p.add_argument("--query", choices=(*_QUERIES, "all"), default="all")
    p.add_argument("--no-axioms", action="store_true", help="leave background axioms out")
    p.set_defaults(func=cmd_export_smtlib)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gverify: error: {exc}", file=sys.stderr)
        return 2
    except CliError as exc:
        print(f"gverify: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"gverify: {exc}", file=sys.stderr)
        return 1
    except SolverCapacityError as exc:
        print(f"gverify: solver gave up: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"gverify: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
