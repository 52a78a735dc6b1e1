"""Command-line entry point exposing the pipeline as subcommands.

Every option can come from a flag or from a TOML config file section named
after the subcommand; flags win over config values, config values win over
defaults. Runs that write file artifacts also write a manifest next to
them with the resolved options, content hashes of every input and output,
the seeds in play, and the toolkit versions. Manifests carry no timestamps,
so re-running a command with identical inputs reproduces every byte.
"""

import argparse
import contextlib
import hashlib
import itertools
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import SCHEMA_VERSION, __version__
from .corpus import emit_training_corpus, read_documents
from .errors import ConfigError, ToolkitError
from .metrics import EVALUATION_TASKS, evaluate_task
from .pretrain import (
    build_pretraining_data,
    compute_schedule,
    derive_stream_seed,
    phase2_quota,
    write_instances_binary,
    write_instances_jsonl,
)
from .taskdata import BUILTIN_SPLIT_SPECS, validate_splits
from .unigram import DEFAULT_BOUNDARY_MARKER, UnigramModel, train_unigram
from .vocab import SubwordVocabulary, build_frequency_vocab, to_wordpiece
from .wordpiece import compare_vocabs, tokenize_sentence


# ------------------------------------------------------------- plumbing


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return "sha256:" + digest.hexdigest()


def _atomic_write(path: Path, write: Callable[[Path], None]) -> None:
    """Write through a sibling temp file so readers never see a partial
    artifact and interrupted runs leave nothing behind."""
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".")
    os.close(fd)
    try:
        write(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _atomic_write_text(path: Path, text: str) -> None:
    _atomic_write(path, lambda tmp: tmp.write_text(text, encoding="utf-8"))


def _require_file(path: str, role: str) -> Path:
    found = Path(path)
    if not found.is_file():
        raise ConfigError(f"{role} file not found: {path}")
    return found


def _read_lines(path: str, role: str) -> list[str]:
    return _require_file(path, role).read_text(encoding="utf-8").splitlines()


def _write_manifest(
    output: Path,
    command: str,
    options: dict,
    inputs: Sequence[str],
    seeds: dict | None = None,
    config_path: str | None = None,
) -> Path:
    manifest = {
        "command": command,
        "options": options,
        "config": None if config_path is None else {
            "path": config_path,
            "digest": _sha256_file(Path(config_path)),
        },
        "inputs": {name: _sha256_file(Path(name)) for name in sorted(set(inputs))},
        "outputs": {str(output): _sha256_file(output)},
        "seeds": seeds or {},
        "versions": {"toolkit": __version__, "schema": SCHEMA_VERSION},
    }
    path = Path(str(output) + ".manifest.json")
    _atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(_require_file(path, "config"), "rb") as handle:
        try:
            return tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config {path}: {exc}") from None


class _Resolver:
    """Per-subcommand option lookup: flags > config section > defaults."""

    def __init__(self, args: argparse.Namespace, section_name: str):
        self.args = args
        self.config = _load_config(args.config)
        section = self.config.get(section_name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"config section [{section_name}] must be a table")
        self.section = section
        self.resolved: dict = {}

    def get(self, name, default=None, *, required=False, kind=None):
        value = getattr(self.args, name)
        if value is None:
            value = self.section.get(name, default)
        if value is None and required:
            raise ConfigError(
                f"missing required option {name!r}: pass --{name.replace('_', '-')} "
                f"or set it in the config file"
            )
        if value is not None and kind is not None:
            if isinstance(value, bool) and bool not in (
                kind if isinstance(kind, tuple) else (kind,)
            ):
                raise ConfigError(f"option {name!r} must not be a boolean")
            if not isinstance(value, kind):
                raise ConfigError(f"option {name!r} has the wrong type: {value!r}")
        self.resolved[name] = value
        return value

    def flag(self, name: str, default: bool = False) -> bool:
        value = getattr(self.args, name)
        if value is None:
            value = self.section.get(name, default)
        if not isinstance(value, bool):
            raise ConfigError(f"option {name!r} must be a boolean")
        self.resolved[name] = value
        return value


# ---------------------------------------------------------- subcommands


def _cmd_preprocess(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "preprocess")
    output = Path(resolver.get("output", required=True, kind=str))
    jobs = resolver.get("jobs", os.cpu_count() or 1, kind=int)
    if jobs < 1:
        raise ConfigError("jobs must be at least 1")
    encoding = resolver.get("encoding", "utf-8", kind=str)
    delimiter = resolver.get("delimiter", kind=str)
    label = resolver.get("source_label", "other", kind=str)

    if args.input:
        sources = [
            {"path": p, "encoding": encoding, "delimiter": delimiter,
             "source": label}
            for p in args.input
        ]
    else:
        rows = resolver.section.get("sources", [])
        if not isinstance(rows, list):
            raise ConfigError("config key 'sources' must be an array of tables")
        sources = []
        for row in rows:
            if not isinstance(row, dict) or "path" not in row:
                raise ConfigError("each source needs at least a 'path' key")
            sources.append({
                "path": row["path"],
                "encoding": row.get("encoding", encoding),
                "delimiter": row.get("delimiter", delimiter),
                "source": row.get("source", label),
            })
    if not sources:
        raise ConfigError("no input sources: pass --input or configure [[preprocess.sources]]")
    resolver.resolved["sources"] = sources
    for entry in sources:
        _require_file(entry["path"], "input")

    def read_one(entry: dict):
        return list(read_documents(
            entry["path"], encoding=entry["encoding"],
            source=entry["source"], delimiter=entry["delimiter"],
        ))

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        batches = list(pool.map(read_one, sources))
    documents = itertools.chain.from_iterable(batches)

    stats_box = {}

    def write(tmp: Path) -> None:
        with open(tmp, "w", encoding="utf-8") as sink:
            stats_box["stats"] = emit_training_corpus(documents, sink)

    _atomic_write(output, write)
    _write_manifest(
        output, "preprocess", resolver.resolved,
        [entry["path"] for entry in sources], config_path=args.config,
    )
    print(stats_box["stats"].to_json())
    return 0


def _cmd_vocab_train(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "vocab-train")
    input_path = resolver.get("input", required=True, kind=str)
    output = Path(resolver.get("output", required=True, kind=str))
    size = resolver.get("size", required=True, kind=int)
    seed_multiplier = resolver.get("seed_multiplier", 4, kind=int)
    prune_fraction = resolver.get("prune_fraction", 0.25, kind=(int, float))
    coverage = resolver.get("coverage", 0.9999, kind=(int, float))
    em_iterations = resolver.get("em_iterations", 2, kind=int)
    max_piece_length = resolver.get("max_piece_length", 16, kind=int)
    em_mode = resolver.get("em_mode", "lattice", kind=str)
    marker = resolver.get("marker", DEFAULT_BOUNDARY_MARKER, kind=str)

    lines = _read_lines(input_path, "input")
    model = train_unigram(
        lines, size, seed_multiplier, prune_fraction, coverage,
        em_iterations=em_iterations, max_piece_length=max_piece_length,
        boundary_marker=marker, em_mode=em_mode,
    )
    _atomic_write(output, model.save)
    _write_manifest(output, "vocab-train", resolver.resolved, [input_path],
                    config_path=args.config)
    print(f"trained {len(model.pieces)} pieces -> {output}")
    return 0


def _cmd_vocab_convert(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "vocab-convert")
    model_path = resolver.get("model", required=True, kind=str)
    output = Path(resolver.get("output", required=True, kind=str))
    size = resolver.get("size", required=True, kind=int)
    marker = resolver.get("marker", DEFAULT_BOUNDARY_MARKER, kind=str)

    _require_file(model_path, "model")
    model = UnigramModel.load(model_path, boundary_marker=marker)
    vocab = to_wordpiece(model, size)
    _atomic_write(output, vocab.save)
    _write_manifest(output, "vocab-convert", resolver.resolved, [model_path],
                    config_path=args.config)
    print(f"wrote {len(vocab.entries)} entries -> {output}")
    return 0


def _cmd_freq_vocab(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "freq-vocab")
    input_path = resolver.get("input", required=True, kind=str)
    output = Path(resolver.get("output", required=True, kind=str))
    size = resolver.get("size", required=True, kind=int)

    vocab = build_frequency_vocab(_read_lines(input_path, "input"), size)
    _atomic_write(output, vocab.save)
    _write_manifest(output, "freq-vocab", resolver.resolved, [input_path],
                    config_path=args.config)
    print(f"wrote {len(vocab)} entries -> {output}")
    return 0


def _cmd_tokenize(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "tokenize")
    vocab_path = resolver.get("vocab", required=True, kind=str)
    split_punct = resolver.flag("split_punct")
    align = resolver.flag("align")

    vocab = SubwordVocabulary.load(_require_file(vocab_path, "vocabulary"))
    for line in sys.stdin:
        result = tokenize_sentence(vocab, line.rstrip("\n"),
                                   split_punct=split_punct)
        if align:
            print(json.dumps({
                "pieces": result.pieces,
                "word_alignment": result.word_alignment,
                "contains_unknown": result.contains_unknown,
            }, ensure_ascii=False))
        else:
            print(" ".join(result.pieces))
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "analyze")
    vocab_a_path = resolver.get("vocab_a", required=True, kind=str)
    vocab_b_path = resolver.get("vocab_b", required=True, kind=str)
    input_path = resolver.get("input", required=True, kind=str)
    split_punct = resolver.flag("split_punct")
    out = resolver.get("out", kind=str)

    vocab_a = SubwordVocabulary.load(_require_file(vocab_a_path, "vocabulary"))
    vocab_b = SubwordVocabulary.load(_require_file(vocab_b_path, "vocabulary"))
    # blank document-separator lines carry no words and would only pad
    # the per-sentence delta list with zeros
    corpus = [line for line in _read_lines(input_path, "input") if line.strip()]
    comparison = compare_vocabs(vocab_a, vocab_b, corpus,
                                split_punct=split_punct)
    text = json.dumps(comparison.as_dict(), indent=2, sort_keys=True) + "\n"
    if out is None:
        print(text, end="")
        return 0
    _atomic_write_text(Path(out), text)
    _write_manifest(Path(out), "analyze", resolver.resolved,
                    [vocab_a_path, vocab_b_path, input_path],
                    config_path=args.config)
    print(f"wrote comparison -> {out}")
    return 0


def _cmd_pretrain_data(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "pretrain-data")
    input_path = resolver.get("input", required=True, kind=str)
    vocab_path = resolver.get("vocab", required=True, kind=str)
    output = Path(resolver.get("output", required=True, kind=str))
    # seeds are always explicit; nothing here falls back to system entropy
    seed = resolver.get("seed", required=True, kind=int)
    max_seq_len = resolver.get("max_seq_len", 128, kind=int)
    p_next = resolver.get("p_next", 0.5, kind=(int, float))
    mask = not resolver.flag("no_mask")
    mask_prob = resolver.get("mask_prob", 0.15, kind=(int, float))
    replace_mask = resolver.get("replace_mask", 0.8, kind=(int, float))
    replace_random = resolver.get("replace_random", 0.1, kind=(int, float))
    default_format = "jsonl" if output.suffix == ".jsonl" else "binary"
    fmt = resolver.get("format", default_format, kind=str)
    if fmt not in ("binary", "jsonl"):
        raise ConfigError(f"unknown output format {fmt!r}")

    vocab = SubwordVocabulary.load(_require_file(vocab_path, "vocabulary"))
    lines = _read_lines(input_path, "input")
    instances = list(build_pretraining_data(
        lines, vocab, seed=seed, max_seq_len=max_seq_len, p_next=p_next,
        mask=mask, mask_prob=mask_prob, replace_mask=replace_mask,
        replace_random=replace_random,
    ))

    if fmt == "jsonl":
        def write(tmp: Path) -> None:
            with open(tmp, "w", encoding="utf-8") as sink:
                write_instances_jsonl(instances, sink)
    else:
        def write(tmp: Path) -> None:
            with open(tmp, "wb") as sink:
                write_instances_binary(instances, sink)

    _atomic_write(output, write)
    seeds = {
        "seed": seed,
        "pairs_stream": derive_stream_seed(seed, "pairs"),
        "mask_stream": derive_stream_seed(seed, "mask"),
    }
    _write_manifest(output, "pretrain-data", resolver.resolved,
                    [input_path, vocab_path], seeds=seeds,
                    config_path=args.config)
    print(f"wrote {len(instances)} instances -> {output}")
    return 0


def _schedule_table(schedule, phase2: dict | None) -> str:
    rows = [
        ("sentences", f"{schedule.sentences:,}"),
        ("global batch", f"{schedule.global_batch:,}  "
         f"({schedule.per_device_batch} per device x {schedule.num_devices} devices)"),
        ("steps per epoch", f"{schedule.steps_per_epoch:,}  "
         f"(ceil of {schedule.sentences:,} / {schedule.global_batch:,})"),
        ("epochs", f"{schedule.epochs:,}"),
        ("total steps", f"{schedule.total_steps:,}"),
        ("sequence length", f"{schedule.max_seq_len:,}"),
    ]
    if phase2 is not None:
        rows.append(("phase-2 quota", f"{phase2['quota']:,} sentences  "
                     f"({schedule.global_batch:,} x {schedule.total_steps:,} "
                     f"/ {phase2['denominator']})"))
        if "override" in phase2:
            over = phase2["override"]
            rows.append(("with override", f"{over['total_steps']:,} total steps "
                         f"-> quota {over['quota']:,} sentences"))
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def _cmd_schedule(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "schedule")
    sentences = resolver.get("sentences", required=True, kind=int)
    batch = resolver.get("batch", required=True, kind=int)
    devices = resolver.get("devices", required=True, kind=int)
    epochs = resolver.get("epochs", required=True, kind=int)
    seq_len = resolver.get("seq_len", 128, kind=int)
    denominator = resolver.get("phase2_denominator", kind=int)
    override = resolver.get("total_steps_override", kind=int)
    out = resolver.get("out", kind=str)

    schedule = compute_schedule(sentences, batch, devices, epochs, seq_len)
    payload: dict = {"schedule": schedule.as_dict()}
    phase2 = None
    if denominator is not None:
        phase2 = {
            "denominator": denominator,
            "quota": phase2_quota(schedule, denominator),
        }
        if override is not None:
            # a hand-rounded step count, for quoting quotas the way run
            # logs usually do
            rounded = replace(schedule, total_steps=override)
            phase2["override"] = {
                "total_steps": override,
                "quota": phase2_quota(rounded, denominator),
            }
        payload["phase2"] = phase2
    elif override is not None:
        raise ConfigError("total_steps_override needs phase2_denominator")

    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    print(text)
    print(_schedule_table(schedule, phase2))
    if out is not None:
        _atomic_write_text(Path(out), text)
        _write_manifest(Path(out), "schedule", resolver.resolved, [],
                        config_path=args.config)
    return 0


def _expected_splits_table() -> str:
    header = f"{'task':<14} {'train':>7} {'dev':>7} {'test':>7}"
    rows = [
        f"{task:<14} {spec.train:>7} {spec.dev:>7} {spec.test:>7}"
        for task, spec in BUILTIN_SPLIT_SPECS.items()
    ]
    return "\n".join([header, *rows])


def _parse_counts(text: str, location: str) -> dict[str, tuple[int, int, int]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"counts file {location}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"counts file {location}: expected an object")
    actual = {}
    for task, value in data.items():
        if isinstance(value, dict):
            try:
                value = [value["train"], value["dev"], value["test"]]
            except KeyError as exc:
                raise ConfigError(
                    f"counts file {location}: task {task!r} is missing {exc}"
                ) from None
        if (not isinstance(value, list) or len(value) != 3
                or not all(isinstance(n, int) for n in value)):
            raise ConfigError(
                f"counts file {location}: task {task!r} needs three integers"
            )
        actual[task] = tuple(value)
    return actual


def _cmd_validate_splits(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "validate-splits")
    counts_path = resolver.get("counts", kind=str)
    out = resolver.get("out", kind=str)

    if counts_path is None:
        print(_expected_splits_table())
        return 0
    text = _require_file(counts_path, "counts").read_text(encoding="utf-8")
    report = validate_splits(_parse_counts(text, counts_path))
    print(report.format_table())
    if out is not None:
        _atomic_write_text(
            Path(out), json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"
        )
        _write_manifest(Path(out), "validate-splits", resolver.resolved,
                        [counts_path], config_path=args.config)
    return 0 if report.passed else 1


def _cmd_evaluate(args: argparse.Namespace) -> int:
    resolver = _Resolver(args, "evaluate")
    task = resolver.get("task", required=True, kind=str)
    gold_path = resolver.get("gold", required=True, kind=str)
    pred_path = resolver.get("pred", required=True, kind=str)
    matching = resolver.get("matching", kind=str)
    out = resolver.get("out", kind=str)

    options = {}
    if matching is not None:
        if task != "fgsa":
            raise ConfigError("matching only applies to the fgsa task")
        options["matching"] = matching
    report = evaluate_task(
        task,
        _read_lines(gold_path, "gold"),
        _read_lines(pred_path, "predictions"),
        gold_location=gold_path,
        pred_location=pred_path,
        **options,
    )
    print(report.format_table())
    if out is not None:
        _atomic_write_text(Path(out), report.to_json())
        _write_manifest(Path(out), "evaluate", resolver.resolved,
                        [gold_path, pred_path], config_path=args.config)
    return 0


# --------------------------------------------------------------- parser


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE",
                     help="TOML config file; flags override its values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmtk",
        description="Corpus preprocessing, subword vocabularies, pretraining "
                    "instances, and benchmark evaluation in one binary.",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"%(prog)s {__version__} (schema {SCHEMA_VERSION})",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True,
                                 metavar="SUBCOMMAND")

    sub = subs.add_parser("preprocess",
                          help="normalize raw sources into a training corpus")
    sub.add_argument("--input", action="append", metavar="FILE",
                     help="source file; repeatable, overrides config sources")
    sub.add_argument("--output", metavar="FILE")
    sub.add_argument("--encoding", metavar="NAME")
    sub.add_argument("--delimiter", metavar="REGEX",
                     help="document delimiter; whole file is one document if unset")
    sub.add_argument("--source-label", dest="source_label", metavar="NAME")
    sub.add_argument("--jobs", type=int, metavar="N",
                     help="parallel source readers (default: all cores)")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_preprocess)

    sub = subs.add_parser("vocab-train",
                          help="induce a unigram piece inventory from a corpus")
    sub.add_argument("--input", metavar="FILE")
    sub.add_argument("--output", metavar="FILE")
    sub.add_argument("--size", type=int, metavar="N")
    sub.add_argument("--seed-multiplier", dest="seed_multiplier", type=int,
                     metavar="N")
    sub.add_argument("--prune-fraction", dest="prune_fraction", type=float,
                     metavar="F")
    sub.add_argument("--coverage", type=float, metavar="F")
    sub.add_argument("--em-iterations", dest="em_iterations", type=int,
                     metavar="N")
    sub.add_argument("--max-piece-length", dest="max_piece_length", type=int,
                     metavar="N")
    sub.add_argument("--em-mode", dest="em_mode", choices=["lattice", "viterbi"])
    sub.add_argument("--marker", metavar="STR")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_vocab_train)

    sub = subs.add_parser("vocab-convert",
                          help="turn a unigram model into a wordpiece vocabulary")
    sub.add_argument("--model", metavar="FILE")
    sub.add_argument("--output", metavar="FILE")
    sub.add_argument("--size", type=int, metavar="N",
                     help="final entry count, padded with [unused] slots")
    sub.add_argument("--marker", metavar="STR")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_vocab_convert)

    sub = subs.add_parser("freq-vocab",
                          help="build a frequency word vocabulary from a corpus")
    sub.add_argument("--input", metavar="FILE")
    sub.add_argument("--output", metavar="FILE")
    sub.add_argument("--size", type=int, metavar="N")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_freq_vocab)

    sub = subs.add_parser("tokenize",
                          help="tokenize standard input, one sentence per line")
    sub.add_argument("--vocab", metavar="FILE")
    sub.add_argument("--split-punct", dest="split_punct", action="store_true",
                     default=None)
    sub.add_argument("--align", action="store_true", default=None,
                     help="emit JSON with word alignment instead of plain pieces")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_tokenize)

    sub = subs.add_parser("analyze",
                          help="compare two vocabularies on the same corpus")
    sub.add_argument("--vocab-a", dest="vocab_a", metavar="FILE")
    sub.add_argument("--vocab-b", dest="vocab_b", metavar="FILE")
    sub.add_argument("--input", metavar="FILE")
    sub.add_argument("--split-punct", dest="split_punct", action="store_true",
                     default=None)
    sub.add_argument("--out", metavar="FILE",
                     help="write the JSON report here instead of stdout")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_analyze)

    sub = subs.add_parser("pretrain-data",
                          help="generate masked sentence-pair instances")
    sub.add_argument("--input", metavar="FILE")
    sub.add_argument("--vocab", metavar="FILE")
    sub.add_argument("--output", metavar="FILE")
    sub.add_argument("--seed", type=int, metavar="N")
    sub.add_argument("--max-seq-len", dest="max_seq_len", type=int, metavar="N")
    sub.add_argument("--p-next", dest="p_next", type=float, metavar="F")
    sub.add_argument("--no-mask", dest="no_mask", action="store_true",
                     default=None)
    sub.add_argument("--mask-prob", dest="mask_prob", type=float, metavar="F")
    sub.add_argument("--replace-mask", dest="replace_mask", type=float,
                     metavar="F")
    sub.add_argument("--replace-random", dest="replace_random", type=float,
                     metavar="F")
    sub.add_argument("--format", choices=["binary", "jsonl"],
                     help="default: jsonl for .jsonl outputs, binary otherwise")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_pretrain_data)

    sub = subs.add_parser("schedule",
                          help="training-step arithmetic for a corpus pass")
    sub.add_argument("--sentences", type=int, metavar="N")
    sub.add_argument("--batch", type=int, metavar="N",
                     help="per-device batch size")
    sub.add_argument("--devices", type=int, metavar="N")
    sub.add_argument("--epochs", type=int, metavar="N")
    sub.add_argument("--seq-len", dest="seq_len", type=int, metavar="N")
    sub.add_argument("--phase2-denominator", dest="phase2_denominator",
                     type=int, metavar="N",
                     help="also report the long-sequence phase sentence quota")
    sub.add_argument("--total-steps-override", dest="total_steps_override",
                     type=int, metavar="N",
                     help="quote the quota at a hand-rounded step total too")
    sub.add_argument("--out", metavar="FILE")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_schedule)

    sub = subs.add_parser("validate-splits",
                          help="check split sizes against the built-in table")
    sub.add_argument("--counts", metavar="FILE",
                     help="JSON of task -> [train, dev, test]; omit to print "
                          "the expected table")
    sub.add_argument("--out", metavar="FILE")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_validate_splits)

    sub = subs.add_parser("evaluate", help="score predictions against gold")
    sub.add_argument("--task", choices=list(EVALUATION_TASKS))
    sub.add_argument("--gold", metavar="FILE")
    sub.add_argument("--pred", metavar="FILE")
    sub.add_argument("--matching", choices=["greedy", "optimal"],
                     help="graph matching strategy (fgsa only)")
    sub.add_argument("--out", metavar="FILE",
                     help="also write the report as JSON")
    _add_common(sub)
    sub.set_defaults(handler=_cmd_evaluate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --version/--help
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
