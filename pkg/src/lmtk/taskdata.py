"""Benchmark dataset parsing: CoNLL-U, BIO spans, sentiment and negation
records, plus split-size validation.

Span annotations are token-index sets throughout, so discontinuous
holders, targets, scopes and cues need no special casing. Character
offsets can be converted on ingestion with char_span_to_token_indices.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import AlignmentError, ParseError

UPOS_TAGS = frozenset(
    "ADJ ADP ADV AUX CCONJ DET INTJ NOUN NUM PART PRON PROPN PUNCT SCONJ "
    "SYM VERB X".split()
)

NER_TYPES = frozenset(
    ["PER", "ORG", "LOC", "GPE-LOC", "GPE-ORG", "PROD", "EVT", "DRV"]
)

POLARITIES = frozenset(["positive", "negative"])

_TOKEN_ID = re.compile(r"^\d+$")
_RANGE_ID = re.compile(r"^\d+-\d+$")
_EMPTY_NODE_ID = re.compile(r"^\d+\.\d+$")


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[str, ...]
    upos: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.upos):
            raise ParseError("<sentence>", "tokens and tags differ in length")


@dataclass(frozen=True, order=True)
class EntitySpan:
    """Inclusive token span with an entity type."""

    start: int
    end: int
    label: str

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError(f"bad span bounds ({self.start}, {self.end})")

    @property
    def indices(self) -> range:
        return range(self.start, self.end + 1)


@dataclass(frozen=True)
class EntitySentence:
    tokens: tuple[str, ...]
    entities: tuple[EntitySpan, ...]


@dataclass(frozen=True)
class SentimentGraph:
    """Holder, target and expression token sets joined by a polarity."""

    holder: frozenset[int]
    target: frozenset[int]
    expression: frozenset[int]
    polarity: str


@dataclass(frozen=True)
class NegationInstance:
    cue: frozenset[int]
    scope: frozenset[int]


@dataclass(frozen=True)
class SentimentRecord:
    sent_id: str
    text: str
    tokens: tuple[str, ...]
    graphs: tuple[SentimentGraph, ...]


@dataclass(frozen=True)
class NegationRecord:
    sent_id: str
    text: str
    tokens: tuple[str, ...]
    negations: tuple[NegationInstance, ...]


def _conllu_token_rows(
    source: Iterable[str], location: str
) -> list[list[tuple[int, list[str]]]]:
    """Sentences as lists of (lineno, columns), ranges and empty nodes skipped."""
    sentences: list[list[tuple[int, list[str]]]] = []
    current: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        if line.startswith("#"):
            continue
        columns = line.split("\t")
        if len(columns) != 10:
            raise ParseError(
                f"{location}:{lineno}", f"expected 10 columns, got {len(columns)}"
            )
        token_id = columns[0]
        if _RANGE_ID.match(token_id) or _EMPTY_NODE_ID.match(token_id):
            continue
        if not _TOKEN_ID.match(token_id):
            raise ParseError(f"{location}:{lineno}", f"bad token id {token_id!r}")
        current.append((lineno, columns))
    if current:
        sentences.append(current)
    return sentences


def parse_conllu(
    source: Iterable[str], location: str = "<conllu>"
) -> list[TaggedSentence]:
    """Tokens from column 2 and UPOS from column 4 of each word row."""
    parsed = []
    for rows in _conllu_token_rows(source, location):
        tokens, tags = [], []
        for lineno, columns in rows:
            tag = columns[3]
            if tag not in UPOS_TAGS:
                raise ParseError(f"{location}:{lineno}", f"unknown UPOS tag {tag!r}")
            tokens.append(columns[1])
            tags.append(tag)
        parsed.append(TaggedSentence(tuple(tokens), tuple(tags)))
    return parsed


def parse_conllu_entities(
    source: Iterable[str],
    location: str = "<conllu>",
    types: frozenset[str] = NER_TYPES,
) -> list[EntitySentence]:
    """Entity spans from `name=` BIO labels in the MISC column."""
    parsed = []
    for index, rows in enumerate(_conllu_token_rows(source, location)):
        tokens, labels = [], []
        for lineno, columns in rows:
            tokens.append(columns[1])
            label = "O"
            misc = columns[9]
            if misc != "_":
                for entry in misc.split("|"):
                    key, sep, value = entry.partition("=")
                    if sep and key == "name":
                        label = value
            labels.append(label)
        spans = parse_bio(labels, types=types, location=f"{location} sentence {index}")
        parsed.append(EntitySentence(tuple(tokens), tuple(spans)))
    return parsed


def parse_bio(
    labels: Sequence[str],
    types: frozenset[str] = NER_TYPES,
    location: str = "<labels>",
) -> list[EntitySpan]:
    """Decode BIO labels to spans.

    An I-X with no open X span is repaired to B-X rather than rejected.
    """
    spans: list[EntitySpan] = []
    open_start: int | None = None
    open_label: str | None = None

    def close():
        nonlocal open_start, open_label
        if open_label is not None:
            spans.append(EntitySpan(open_start, position - 1, open_label))
        open_start = open_label = None

    for position, label in enumerate(labels):
        if label == "O":
            close()
            continue
        prefix, sep, kind = label.partition("-")
        if not sep or prefix not in ("B", "I") or not kind:
            raise ParseError(location, f"malformed BIO label {label!r}")
        if kind not in types:
            raise ParseError(location, f"unknown entity type {kind!r}")
        if prefix == "B" or kind != open_label:
            close()
            open_start, open_label = position, kind
    position = len(labels)
    close()
    return spans


def encode_bio(spans: Iterable[EntitySpan], length: int) -> list[str]:
    """Inverse of parse_bio for non-overlapping in-range spans."""
    labels = ["O"] * length
    occupied: set[int] = set()
    for span in sorted(spans):
        if span.end >= length:
            raise ValueError(f"span {span} exceeds sentence length {length}")
        indices = set(span.indices)
        if indices & occupied:
            raise ValueError(f"span {span} overlaps another span")
        occupied |= indices
        labels[span.start] = f"B-{span.label}"
        for position in range(span.start + 1, span.end + 1):
            labels[position] = f"I-{span.label}"
    return labels


def _index_set(
    value: object, record: str, element: str, n_tokens: int, location: str
) -> frozenset[int]:
    if not isinstance(value, list) or not all(isinstance(i, int) for i in value):
        raise ParseError(location, f"record {record}: {element} must be an int list")
    indices = frozenset(value)
    bad = [i for i in indices if not 0 <= i < n_tokens]
    if bad:
        raise ParseError(
            location,
            f"record {record}: {element} index {min(bad)} outside "
            f"0..{n_tokens - 1}",
        )
    return indices


def _record_header(record: dict, lineno: int, location: str) -> tuple[str, str, tuple]:
    where = f"{location}:{lineno}"
    if not isinstance(record, dict):
        raise ParseError(where, "record must be a JSON object")
    try:
        sent_id = str(record["sent_id"])
        text = record["text"]
        tokens = record["tokens"]
    except KeyError as err:
        raise ParseError(where, f"record missing field {err.args[0]!r}") from err
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise ParseError(where, f"record {sent_id}: tokens must be a string list")
    return sent_id, str(text), tuple(tokens)


def _json_lines(source: Iterable[str], location: str):
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as err:
            raise ParseError(f"{location}:{lineno}", f"bad JSON: {err}") from err


def parse_sentiment_graphs(
    source: Iterable[str], location: str = "<sentiment>"
) -> list[SentimentRecord]:
    """One JSON record per line with an opinions array of graph objects."""
    records = []
    for lineno, record in _json_lines(source, location):
        sent_id, text, tokens = _record_header(record, lineno, location)
        where = f"{location}:{lineno}"
        graphs = []
        for opinion in record.get("opinions", []):
            if not isinstance(opinion, dict):
                raise ParseError(where, f"record {sent_id}: opinion must be an object")
            expression = _index_set(
                opinion.get("expression", []), sent_id, "expression",
                len(tokens), where,
            )
            if not expression:
                raise ParseError(
                    where, f"record {sent_id}: expression must be non-empty"
                )
            polarity = opinion.get("polarity")
            if polarity not in POLARITIES:
                raise ParseError(
                    where, f"record {sent_id}: bad polarity {polarity!r}"
                )
            graphs.append(
                SentimentGraph(
                    holder=_index_set(
                        opinion.get("holder", []), sent_id, "holder",
                        len(tokens), where,
                    ),
                    target=_index_set(
                        opinion.get("target", []), sent_id, "target",
                        len(tokens), where,
                    ),
                    expression=expression,
                    polarity=polarity,
                )
            )
        records.append(SentimentRecord(sent_id, text, tokens, tuple(graphs)))
    return records


def parse_negation_records(
    source: Iterable[str], location: str = "<negation>"
) -> list[NegationRecord]:
    """One JSON record per line with a negations array of cue/scope objects."""
    records = []
    for lineno, record in _json_lines(source, location):
        sent_id, text, tokens = _record_header(record, lineno, location)
        where = f"{location}:{lineno}"
        negations = []
        for negation in record.get("negations", []):
            if not isinstance(negation, dict):
                raise ParseError(
                    where, f"record {sent_id}: negation must be an object"
                )
            cue = _index_set(
                negation.get("cue", []), sent_id, "cue", len(tokens), where
            )
            if not cue:
                raise ParseError(where, f"record {sent_id}: cue must be non-empty")
            scope = _index_set(
                negation.get("scope", []), sent_id, "scope", len(tokens), where
            )
            negations.append(NegationInstance(cue=cue, scope=scope))
        records.append(NegationRecord(sent_id, text, tokens, tuple(negations)))
    return records


def char_span_to_token_indices(
    text: str, tokens: Sequence[str], start: int, end: int
) -> frozenset[int]:
    """Token indices whose text occurrence overlaps [start, end).

    Tokens are located in text left to right; a token counts when its
    character range intersects the half-open query span.
    """
    if not 0 <= start <= end <= len(text):
        raise ValueError(f"bad character span ({start}, {end}) for text of "
                         f"length {len(text)}")
    picked = []
    cursor = 0
    for index, token in enumerate(tokens):
        found = text.find(token, cursor)
        if found < 0:
            raise AlignmentError(
                f"token {index} ({token!r}) does not occur in the text after "
                f"offset {cursor}"
            )
        token_end = found + len(token)
        if found < end and start < token_end:
            picked.append(index)
        cursor = token_end
    return frozenset(picked)


def derive_sentence_labels(
    records: Iterable[SentimentRecord],
) -> list[tuple[SentimentRecord, str]]:
    """Keep sentences whose expressions all share one polarity."""
    kept = []
    for record in records:
        polarities = {graph.polarity for graph in record.graphs}
        if len(polarities) == 1:
            kept.append((record, next(iter(polarities))))
    return kept


@dataclass(frozen=True)
class SplitSpec:
    task: str
    train: int
    dev: int
    test: int

    def counts(self) -> tuple[int, int, int]:
        return (self.train, self.dev, self.test)


BUILTIN_SPLIT_SPECS: dict[str, SplitSpec] = {
    spec.task: spec
    for spec in [
        SplitSpec("pos-bokmal", 15_696, 2_409, 1_939),
        SplitSpec("pos-nynorsk", 14_174, 1_890, 1_511),
        SplitSpec("ner-bokmal", 15_696, 2_409, 1_939),
        SplitSpec("ner-nynorsk", 14_174, 1_890, 1_511),
        SplitSpec("sentence-sa", 2_675, 516, 417),
        SplitSpec("fgsa", 8_543, 1_531, 1_272),
        SplitSpec("negation", 8_543, 1_531, 1_272),
    ]
}

_SPLIT_NAMES = ("train", "dev", "test")


@dataclass(frozen=True)
class SplitCheck:
    task: str
    expected: tuple[int, int, int]
    actual: tuple[int, int, int] | None
    ok: bool
    diffs: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "expected": list(self.expected),
            "actual": None if self.actual is None else list(self.actual),
            "ok": self.ok,
            "diffs": list(self.diffs),
        }


@dataclass(frozen=True)
class SplitReport:
    checks: tuple[SplitCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.ok for check in self.checks)

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.as_dict() for c in self.checks]}

    def format_table(self) -> str:
        lines = []
        for check in self.checks:
            status = "ok" if check.ok else "MISMATCH"
            actual = (
                "missing" if check.actual is None
                else "/".join(str(n) for n in check.actual)
            )
            expected = "/".join(str(n) for n in check.expected)
            lines.append(f"{check.task:<14} expected {expected:<20} got "
                         f"{actual:<20} {status}")
            lines.extend(f"  {diff}" for diff in check.diffs)
        return "\n".join(lines)


def validate_splits(
    actual: Mapping[str, Sequence[int]],
    specs: Mapping[str, SplitSpec] | None = None,
) -> SplitReport:
    """Compare observed train/dev/test sentence counts against expectations.

    Mismatches are reported per split, not raised.
    """
    if specs is None:
        specs = BUILTIN_SPLIT_SPECS
    checks = []
    for task, spec in specs.items():
        expected = spec.counts()
        got = actual.get(task)
        if got is None:
            checks.append(SplitCheck(task, expected, None, False,
                                     ("split counts missing",)))
            continue
        got = tuple(got)
        if len(got) != 3:
            checks.append(SplitCheck(task, expected, None, False,
                                     (f"expected 3 counts, got {len(got)}",)))
            continue
        diffs = tuple(
            f"{name}: expected {want}, got {have}"
            for name, want, have in zip(_SPLIT_NAMES, expected, got)
            if want != have
        )
        checks.append(SplitCheck(task, expected, got, not diffs, diffs))
    return SplitReport(tuple(checks))


def count_conllu_sentences(source: Iterable[str], location: str = "<conllu>") -> int:
    return len(_conllu_token_rows(source, location))


def count_jsonl_records(source: Iterable[str]) -> int:
    return sum(1 for line in source if line.strip())
