"""Command-line entry point: ``abckit <subcommand> ...``.

Machine-readable JSON goes to stdout, diagnostics to stderr. Exit codes:
0 success, 1 input or validation failure, 2 provider or I/O failure.
Settings resolve as flag, then ``--config`` JSON file, then default.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import tempfile
from pathlib import Path
from typing import List, Optional, Sequence

from .abc.parser import ParseError, parse_tune, split_tunebook
from .abc.stats import EmptyCorpus, corpus_stats
from .abc.tokenizer import MODES as TOKENIZER_MODES
from .abc.tokenizer import TokenizerLoadError, TokenizerSpec, load_tokenizer_spec
from .analysis.form import alphabetic_form, sorted_terms, terminology_forms
from .analysis.motif import EmptyAfterFilter, extract_motifs_per_section
from .bench import (
    ProviderError,
    SchemaError,
    ShuffleProtocol,
    load_bench,
    load_provider_config,
    provider_from_config,
    run_eval,
)
from .control_code import EmptySection, MalformedControlCode, compute_control_code, parse_control_code
from .dataset import CorpusSchemaError, TaskKind, TemplateError, generate_corpus, load_template_bank
from .metrics import EmptyPool, GenerationRecord, TaskUnsupported, build_report, dump_report

log = logging.getLogger("abckit")

EXIT_OK, EXIT_INPUT, EXIT_PROVIDER = 0, 1, 2
DEFAULTS = {"seed": 0, "jobs": 1, "mode": "zero_shot", "tasks": None, "tokenizer": None, "templates": None, "provider": None}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage mistakes are input failures, not the provider/IO code argparse uses
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _emit(obj, args) -> None:
    text = json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2 if args.pretty else None)
    _write_out(text + "\n", args)


def _write_out(text: str, args) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _setting(args, name):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return args.config_data.get(name, DEFAULTS[name])


def _existing(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} not found: {path}")
    return p


# subcommands


def cmd_parse(args) -> int:
    paths = [_existing(p, "input file") for p in args.files]
    report = []
    for path in paths:
        try:
            parse_tune(path.read_bytes())
            report.append({"path": str(path), "ok": True})
        except ParseError as exc:
            print(f"{path}:{exc.line}:{exc.column}: {exc.kind}: {exc.message}", file=sys.stderr)
            report.append({"path": str(path), "ok": False, "error": exc.to_dict()})
    failed = sum(not r["ok"] for r in report)
    if args.pretty:
        lines = [f"{r['path']}: OK" if r["ok"] else f"{r['path']}: {r['error']['kind']}" for r in report]
        _write_out("\n".join(lines) + "\n", args)
    else:
        _emit({"files": report, "ok": len(report) - failed, "failed": failed}, args)
    return EXIT_OK if failed == 0 else EXIT_INPUT


def _form_records(path: Path):
    """(id, control code) pairs from a JSONL corpus or an ABC tunebook."""
    if path.suffix in (".jsonl", ".json"):
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise InputError(f"{path}:{n}: invalid JSON: {exc.msg}") from None
                rid = str(obj.get("id", n))
                if obj.get("control_code"):
                    yield rid, parse_control_code(obj["control_code"])
                elif isinstance(obj.get("abc"), str):
                    yield rid, compute_control_code(parse_tune(obj["abc"]))
                else:
                    raise InputError(f"{path}:{n}: record needs control_code or abc")
    else:
        for i, tune in enumerate(split_tunebook(path.read_text(encoding="utf-8")), 1):
            yield str(i), compute_control_code(parse_tune(tune))


def cmd_form(args) -> int:
    rows = []
    for rid, cc in _form_records(_existing(args.corpus, "corpus")):
        form = alphabetic_form(cc)
        terms = sorted_terms(terminology_forms(form))
        rows.append({
            "id": rid,
            "control_code": str(cc),
            "alphabetic": str(form),
            "terms": [t.name for t in terms],
            "term_names": [t.value for t in terms],
        })
    if args.pretty:
        _write_out("".join(f"{r['alphabetic']} / {', '.join(r['terms'])}\n" for r in rows), args)
    else:
        _emit(rows, args)
    return EXIT_OK


def cmd_motif(args) -> int:
    doc = parse_tune(_existing(args.file, "input file").read_bytes())
    motifs = extract_motifs_per_section(doc)
    if args.pretty:
        _write_out("".join(f"Section {i}: {m}\n" for i, m in enumerate(motifs, 1)), args)
    else:
        _emit([{"section": i, "motif": str(m), "frequency": m.frequency} for i, m in enumerate(motifs, 1)], args)
    return EXIT_OK


def _task_list(raw) -> List[TaskKind]:
    if not raw:
        return list(TaskKind)
    names = raw.split(",") if isinstance(raw, str) else list(raw)
    try:
        return [TaskKind.from_name(n.strip()) for n in names if n.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_gen(args) -> int:
    corpus = _existing(args.corpus, "corpus")
    templates = _setting(args, "templates")
    bank = load_template_bank(_existing(templates, "template bank") if templates else None)
    tasks = _task_list(_setting(args, "tasks"))
    seed = int(_setting(args, "seed"))
    jobs = int(_setting(args, "jobs"))
    if args.out:
        summary = generate_corpus(corpus, tasks, bank, seed, args.out, jobs=jobs)
        print(json.dumps(summary.to_dict(), sort_keys=True), file=sys.stdout)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "samples.jsonl"
            summary = generate_corpus(corpus, tasks, bank, seed, out, jobs=jobs)
            sys.stdout.write(out.read_text(encoding="utf-8"))
        print(json.dumps(summary.to_dict(), sort_keys=True), file=sys.stderr)
    return EXIT_OK


def _read_records(path: Path) -> List[GenerationRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(GenerationRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise InputError(f"{path}:{n}: bad record: {exc}") from None
    return records


def cmd_eval(args) -> int:
    records = _read_records(_existing(args.records, "records file"))
    if not records:
        raise InputError("records file is empty")
    report = build_report(records)
    _write_out(dump_report(report, pretty=args.pretty) + "\n", args)
    return EXIT_OK


def cmd_bench(args) -> int:
    items, exemplars = load_bench(
        _existing(args.bench, "bench file"),
        _existing(args.exemplars, "exemplar file") if args.exemplars else None,
    )
    provider_path = _setting(args, "provider")
    if not provider_path:
        raise ProviderError("no provider configured (use --provider CONFIG)")
    config = load_provider_config(provider_path)
    provider = provider_from_config(config, items=items)
    protocol = ShuffleProtocol(n_shuffles=args.shuffles, seed=int(_setting(args, "seed")))
    result = run_eval(
        items,
        provider,
        protocol,
        mode=_setting(args, "mode"),
        exemplars=exemplars,
        prefix=args.prefix if args.prefix is not None else config.get("prefix"),
        checkpoint=args.checkpoint,
        jobs=int(_setting(args, "jobs")),
    )
    _emit(result.to_dict(), args)
    return EXIT_OK


def _tokenizer_spec(raw: str) -> TokenizerSpec:
    if raw in TOKENIZER_MODES and not Path(raw).exists():
        return TokenizerSpec(mode=raw)
    return load_tokenizer_spec(_existing(raw, "tokenizer spec"))


def cmd_stats(args) -> int:
    paths = [_existing(p, "corpus file") for p in args.files]
    raw_specs = _setting(args, "tokenizer") or ["characters"]
    if isinstance(raw_specs, str):
        raw_specs = [raw_specs]
    specs = [(raw, _tokenizer_spec(raw)) for raw in raw_specs]
    jobs = int(_setting(args, "jobs"))
    out = {}
    for raw, spec in specs:
        stats = corpus_stats(paths, spec, jobs=jobs)
        key = spec.mode if spec.mode not in out else raw
        out[key] = {
            "tokens_per_song": float(stats.tokens_per_song),
            "tokens_per_second": float(stats.tokens_per_second),
            "tokens_per_song_exact": str(stats.tokens_per_song),
            "tokens_per_second_exact": str(stats.tokens_per_second),
            "songs": stats.songs,
            "total_tokens": stats.total_tokens,
            "total_seconds": str(stats.total_seconds),
            "failures": [{"tune": name, "error": err} for name, err in stats.failures],
        }
    _emit(out, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of default settings")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="abckit", description="ABC notation analysis, dataset and evaluation tools")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", parents=[common], help="check that ABC files parse")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("form", parents=[common], help="musical form per record")
    p.add_argument("corpus", help="JSONL records or an ABC tunebook")
    p.set_defaults(func=cmd_form)

    p = sub.add_parser("motif", parents=[common], help="per-section motifs of one tune")
    p.add_argument("file")
    p.set_defaults(func=cmd_motif)

    p = sub.add_parser("gen", parents=[common], help="build instruction samples")
    p.add_argument("corpus")
    p.add_argument("--tasks", help="comma-separated task names or aliases")
    p.add_argument("--templates", help="template bank file")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval", parents=[common], help="generation metrics report")
    p.add_argument("records")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", parents=[common], help="multiple-choice evaluation")
    p.add_argument("bench")
    p.add_argument("--provider", help="provider config JSON")
    p.add_argument("--mode", choices=["zero_shot", "five_shot", "few_shot"])
    p.add_argument("--exemplars", help="held-out exemplar items JSON")
    p.add_argument("--shuffles", type=int, default=5)
    p.add_argument("--checkpoint", help="JSONL checkpoint for resuming")
    p.add_argument("--prefix", help="text placed before the prompt")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", parents=[common], help="tokens per song and per second")
    p.add_argument("files", nargs="+")
    p.add_argument("--tokenizer", action="append", help="tokenizer spec file or mode name; repeatable")
    p.set_defaults(func=cmd_stats)
    return parser


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(_existing(path, "config file").read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    return data


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.config_data = _load_config(args.config)
        return args.func(args)
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (
        InputError,
        ParseError,
        SchemaError,
        CorpusSchemaError,
        TemplateError,
        MalformedControlCode,
        EmptySection,
        EmptyAfterFilter,
        EmptyCorpus,
        EmptyPool,
        TaskUnsupported,
        TokenizerLoadError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER


if __name__ == "__main__":
    sys.exit(main())
