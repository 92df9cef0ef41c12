"""Command-line front end: ``odin validate|extract|trace``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence, TextIO

from .document import Document, parse_document
from .engine import ExtractionResult, ExtractorEngine
from .errors import DocumentError, GrammarError
from .grammar import Grammar, load_grammar
from .mentions import mention_to_json
from .taxonomy import label_matches

EXIT_OK = 0
EXIT_GRAMMAR = 1
EXIT_DOCUMENT = 2
EXIT_IO = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odin", description="Rule-based event extraction over annotated documents.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a grammar and list its rules")
    p.add_argument("grammar")

    for name, help_text in (("extract", "extract mentions from documents"),
                            ("trace", "show what each iteration did")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("grammar")
        p.add_argument("documents", nargs="+", metavar="document")
        p.add_argument("--max-iterations", type=_positive_int, default=100, metavar="N")
        if name == "extract":
            p.add_argument("--label", help="only output mentions matching this label")
            p.add_argument("--pretty", action="store_true", help="pretty-print the JSON output")
            p.add_argument("--out", metavar="DIR", help="write <docid>.mentions files instead of stdout")
        else:
            p.add_argument("--trace-format", choices=("text", "jsonl"), default="text")
    return parser


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        n = 0
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None


def load_cli_grammar(path: str) -> Grammar:
    text = _read_text(path)
    try:
        grammar = load_grammar(text, path=path)
    except GrammarError as exc:
        raise CliError(str(exc), EXIT_GRAMMAR) from None
    for rule in grammar.rules:
        if rule.action != "default":
            raise CliError(
                f"{path}: rule {rule.name!r}: action {rule.action!r} is not available from the command line; "
                "custom actions must be registered through the Python API (odin.ExtractorEngine)",
                EXIT_GRAMMAR,
            )
    return grammar


def load_cli_documents(paths: Sequence[str]) -> list[Document]:
    docs = []
    for path in paths:
        try:
            payload = Path(path).read_bytes()
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None
        try:
            docs.append(parse_document(payload))
        except DocumentError as exc:
            raise CliError(f"{path}: {exc}", EXIT_DOCUMENT) from None
    return docs


def render_mentions(result: ExtractionResult, doc: Document, grammar: Grammar, label: str | None,
                    pretty: bool) -> str:
    mentions = result.mentions
    if label is not None:
        mentions = [m for m in mentions if label_matches(m.labels, label, grammar.taxonomy)]
    data = [mention_to_json(m, doc) for m in mentions]
    if pretty:
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    return json.dumps(data, separators=(",", ":"), ensure_ascii=False) + "\n"


def _output_name(doc: Document, index: int) -> str:
    stem = doc.id or f"document-{index}"
    return stem.replace("/", "_").replace(os.sep, "_") + ".mentions"


def _write_atomic(directory: Path, name: str, content: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".mentions")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, directory / name)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_validate(args: argparse.Namespace, out: TextIO) -> int:
    grammar = load_cli_grammar(args.grammar)
    for rule in grammar.rules:
        out.write(f"{rule.name}\t{rule.type}\t{rule.priority}\t{', '.join(rule.labels)}\n")
    out.write(f"{len(grammar.rules)} rule(s) OK\n")
    return EXIT_OK


def cmd_extract(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    grammar = load_cli_grammar(args.grammar)
    docs = load_cli_documents(args.documents)
    engine = ExtractorEngine(grammar, max_iterations=args.max_iterations)
    rendered = []
    for doc in docs:
        result = engine.run(doc)
        for note in result.warnings:
            err.write(f"warning: {doc.id}: {note}\n")
        rendered.append(render_mentions(result, doc, grammar, args.label, args.pretty))
    if args.out is None:
        out.write("".join(rendered))
        return EXIT_OK
    directory = Path(args.out)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for index, (doc, content) in enumerate(zip(docs, rendered)):
            _write_atomic(directory, _output_name(doc, index), content)
    except OSError as exc:
        raise CliError(f"cannot write to {directory}: {exc}", EXIT_IO) from None
    return EXIT_OK


def _describe(m) -> str:
    return f"{m.label} [{m.start},{m.end}) sentence {m.sentence} by {m.found_by}"


def cmd_trace(args: argparse.Namespace, out: TextIO) -> int:
    grammar = load_cli_grammar(args.grammar)
    docs = load_cli_documents(args.documents)
    engine = ExtractorEngine(grammar, max_iterations=args.max_iterations)
    jsonl = args.trace_format == "jsonl"
    for doc in docs:
        result = engine.run(doc, trace=True)
        added_by_iteration: dict[int, list] = {}
        for m in result.state:
            added_by_iteration.setdefault(result.state.iteration_of(m), []).append(m)
        if not jsonl:
            out.write(f"document {doc.id}\n")
        for rec in result.trace:
            added = added_by_iteration.get(rec.iteration, [])
            if jsonl:
                out.write(json.dumps({
                    "document": doc.id,
                    "iteration": rec.iteration,
                    "rules": [{"rule": r.rule, "action": r.action,
                               "matches": {str(s): n for s, n in r.matches.items()}, "emitted": r.emitted}
                              for r in rec.rules],
                    "added": rec.added,
                    "deduplicated": rec.deduplicated,
                    "mentions": [{"label": m.label, "sentence": m.sentence, "tokenInterval": [m.start, m.end],
                                  "foundBy": m.found_by} for m in added],
                }, ensure_ascii=False) + "\n")
                continue
            out.write(f"iteration {rec.iteration}\n")
            for r in rec.rules:
                counts = ", ".join(f"sentence {s}: {n}" for s, n in r.matches.items()) or "no matches"
                out.write(f"  rule {r.rule} (action {r.action}): {counts}; emitted {r.emitted}\n")
            out.write(f"  added {rec.added}, deduplicated {rec.deduplicated}\n")
            for m in added:
                out.write(f"    + {_describe(m)}\n")
        if jsonl:
            out.write(json.dumps({"document": doc.id, "iterations": result.iterations,
                                  "fixpoint": result.fixpoint, "warnings": result.warnings}) + "\n")
        else:
            for note in result.warnings:
                out.write(f"warning: {note}\n")
            if result.fixpoint:
                out.write(f"fixpoint at iteration {result.iterations}\n")
            else:
                out.write(f"no fixpoint: stopped at iteration {result.iterations}\n")
    return EXIT_OK


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args, out)
        if args.command == "extract":
            return cmd_extract(args, out, err)
        return cmd_trace(args, out)
    except CliError as exc:
        err.write(f"error: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
