"""Plain-text corpus preparation.

Raw document bytes go in, the one-sentence-per-line training format comes
out. The steps: decode (UTF-8 or Latin-1), repair tokenized spacing,
segment into sentences, then emit with exactly one blank line between
documents and between sections of a document. The blank lines are what
lets downstream consumers treat sections as next-sentence boundaries.
"""

from __future__ import annotations

import gzip
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, IO, Iterable, Iterator

from .errors import ConfigError, DecodingError, EmitError

# Reference size of the two-billion-token corpus this pipeline was built to
# process; used as the schedule default and in sanity checks, not reproduced
# by any test data here.
REFERENCE_CORPUS_SENTENCES = 202_802_665
REFERENCE_CORPUS_WORD_TOKENS = 1_907_072_909

_ENCODINGS = {
    "utf-8": "utf-8",
    "utf8": "utf-8",
    "latin-1": "latin-1",
    "latin1": "latin-1",
    "iso-8859-1": "latin-1",
}

# spacing damage left behind by word-tokenized source text
_SPACE_BEFORE_CLOSER = re.compile(r" +(?=[.,:;!?)])")
_SPACE_AFTER_OPENER = re.compile(r"\( +")
_SPACE_RUN = re.compile(r"[ \t]+")

SENTENCE_TERMINATORS = (".", "!", "?", "…")

# common Norwegian abbreviations that end in a period but never end a sentence
DEFAULT_ABBREVIATIONS = frozenset(
    {
        "bl.a.", "ca.", "cand.", "d.v.s.", "dvs.", "e.l.", "eks.", "evt.",
        "f.eks.", "f.o.m.", "fhv.", "fr.", "hhv.", "ifb.", "ifm.", "inkl.",
        "jf.", "jfr.", "kap.", "kl.", "kr.", "m.a.o.", "m.fl.", "m.m.",
        "mfl.", "mht.", "mill.", "mrd.", "mv.", "nr.", "o.l.", "osv.",
        "p.g.a.", "pga.", "s.k.", "st.", "t.o.m.", "vedr.",
    }
)


def normalize_document(raw: bytes | str, encoding: str = "utf-8") -> str:
    """Decode raw document bytes and repair word-tokenized spacing.

    Removes spaces before closing punctuation {. , : ; ! ? )}, removes
    spaces after an opening parenthesis, and collapses space runs. Line
    structure is preserved. The transformation is idempotent.
    """
    if isinstance(raw, bytes):
        try:
            codec = _ENCODINGS[encoding.lower()]
        except KeyError:
            raise ConfigError(
                f"unsupported encoding {encoding!r}; expected one of utf-8, latin-1"
            ) from None
        try:
            text = raw.decode(codec)
        except UnicodeDecodeError as exc:
            raise DecodingError(codec, exc.start, exc.reason) from exc
    else:
        text = raw
    lines = []
    for line in text.split("\n"):
        line = _SPACE_RUN.sub(" ", line)
        line = _SPACE_BEFORE_CLOSER.sub("", line)
        line = _SPACE_AFTER_OPENER.sub("(", line)
        lines.append(line.strip())
    return "\n".join(lines)


def segment_sentences(
    text: str, abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
) -> list[str]:
    """Split text into sentences with a whitespace-token rule.

    A sentence boundary falls after any token that ends with one of
    {. ! ? ...} and is not a known abbreviation. Whitespace runs collapse
    to single spaces, so joining the result with single spaces restores
    the input modulo collapsed whitespace. Never yields an empty sentence.
    """
    sentences: list[str] = []
    current: list[str] = []
    for token in text.split():
        current.append(token)
        if token.endswith(SENTENCE_TERMINATORS) and token not in abbreviations:
            sentences.append(" ".join(current))
            current = []
    if current:
        sentences.append(" ".join(current))
    return sentences


# Anything that maps text to a sentence list can replace the rule-based
# segmenter in the pipeline.
SentenceSegmenter = Callable[[str], list[str]]


def rule_segmenter(
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> SentenceSegmenter:
    def segment(text: str) -> list[str]:
        return segment_sentences(text, abbreviations)

    return segment


@dataclass
class Document:
    """A source document: sentences grouped into sections."""

    doc_id: str
    source: str  # news, wiki or other
    sections: list[list[str]]


@dataclass
class CorpusStats:
    num_documents: int = 0
    num_sentences: int = 0
    num_word_tokens: int = 0
    num_characters: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "num_documents": self.num_documents,
            "num_sentences": self.num_sentences,
            "num_word_tokens": self.num_word_tokens,
            "num_characters": self.num_characters,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CorpusStats":
        return cls(**json.loads(text))


def emit_training_corpus(documents: Iterable[Document], sink: IO[str]) -> CorpusStats:
    """Write documents in the training format and return their statistics.

    One sentence per line; exactly one blank line between consecutive
    emitted blocks, where each non-empty section is a block. Documents with
    no sentences are skipped without leaving stray blank lines. The
    returned num_documents counts emitted blocks, which is exactly what
    corpus_stats recovers from the blank-line structure.
    """
    stats = CorpusStats()
    for doc in documents:
        for section in doc.sections:
            kept = []
            for sentence in section:
                if "\n" in sentence:
                    raise EmitError(doc.doc_id, "sentence contains a line break")
                if sentence.strip():
                    kept.append(sentence)
            if not kept:
                continue
            try:
                if stats.num_documents:
                    sink.write("\n")
                for sentence in kept:
                    sink.write(sentence + "\n")
            except OSError as exc:
                raise EmitError(doc.doc_id, f"write failed: {exc}") from exc
            stats.num_documents += 1
            stats.num_sentences += len(kept)
            stats.num_word_tokens += sum(len(s.split()) for s in kept)
            stats.num_characters += sum(len(s) for s in kept)
    return stats


def corpus_stats(lines: Iterable[str]) -> CorpusStats:
    """Recompute CorpusStats from training-format lines.

    Blank lines delimit documents; every non-blank line is one sentence.
    """
    stats = CorpusStats()
    in_block = False
    for line in lines:
        line = line.rstrip("\n")
        if not line.strip():
            in_block = False
            continue
        if not in_block:
            stats.num_documents += 1
            in_block = True
        stats.num_sentences += 1
        stats.num_word_tokens += len(line.split())
        stats.num_characters += len(line)
    return stats


def open_text_source(path: str | Path) -> IO[bytes]:
    """Open a corpus source file for reading, transparently ungzipping."""
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def read_documents(
    path: str | Path,
    encoding: str = "utf-8",
    source: str = "other",
    delimiter: str | None = None,
    segmenter: SentenceSegmenter | None = None,
) -> Iterator[Document]:
    """Read one source file into documents.

    The whole file is one document unless a delimiter regex is given, in
    which case each delimited chunk becomes a document. Every document has
    a single section; section structure is for callers that build
    Documents themselves.
    """
    segment = segmenter or segment_sentences
    with open_text_source(path) as handle:
        raw = handle.read()
    text = normalize_document(raw, encoding)
    if delimiter:
        chunks = re.split(delimiter, text)
    else:
        chunks = [text]
    stem = Path(path).name
    for index, chunk in enumerate(chunks):
        sentences = segment(chunk)
        if sentences:
            yield Document(f"{stem}:{index}", source, [sentences])
