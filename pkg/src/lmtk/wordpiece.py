"""Greedy longest-match WordPiece tokenization and fertility analysis.

Each whitespace word is segmented left to right: at every position the
longest vocabulary entry matching the remaining characters is taken, with
non-initial matches carrying the "##" continuation prefix. A word with no
valid segmentation (or longer than max_word_chars) becomes a single [UNK].
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable

from .vocab import CONTINUATION_PREFIX, SubwordVocabulary, UNK

DEFAULT_MAX_WORD_CHARS = 100


def _is_punctuation(ch: str) -> bool:
    # BERT's rule: ASCII symbol ranges count as punctuation too.
    cp = ord(ch)
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(ch).startswith("P")


def split_punctuation(word: str) -> list[str]:
    """Split a word into runs of non-punctuation and single punctuation marks."""
    out: list[str] = []
    buf: list[str] = []
    for ch in word:
        if _is_punctuation(ch):
            if buf:
                out.append("".join(buf))
                buf.clear()
            out.append(ch)
        else:
            buf.append(ch)
    if buf:
        out.append("".join(buf))
    return out


def wordpiece_tokenize(
    vocab: SubwordVocabulary,
    word: str,
    max_word_chars: int = DEFAULT_MAX_WORD_CHARS,
) -> list[str]:
    """Segment one word greedily; [UNK] when no segmentation exists."""
    if not word:
        raise ValueError("cannot tokenize an empty word")
    if len(word) > max_word_chars:
        return [UNK]
    pieces: list[str] = []
    start = 0
    while start < len(word):
        end = len(word)
        match = None
        while end > start:
            candidate = word[start:end]
            if start > 0:
                candidate = CONTINUATION_PREFIX + candidate
            if candidate in vocab:
                match = candidate
                break
            end -= 1
        if match is None:
            return [UNK]
        pieces.append(match)
        start = end
    return pieces


@dataclass
class TokenizedSentence:
    pieces: list[str]
    word_alignment: list[int]
    contains_unknown: bool

    def __post_init__(self):
        assert len(self.pieces) == len(self.word_alignment)


def tokenize_sentence(
    vocab: SubwordVocabulary,
    sentence: str,
    *,
    split_punct: bool = False,
    max_word_chars: int = DEFAULT_MAX_WORD_CHARS,
) -> TokenizedSentence:
    """Tokenize a whitespace-delimited sentence.

    word_alignment maps each piece back to the index of the whitespace word
    it came from, so punctuation split off a word keeps that word's index.
    """
    pieces: list[str] = []
    alignment: list[int] = []
    unknown = False
    for word_index, word in enumerate(sentence.split()):
        units = split_punctuation(word) if split_punct else [word]
        for unit in units:
            got = wordpiece_tokenize(vocab, unit, max_word_chars)
            if got == [UNK]:
                unknown = True
            pieces.extend(got)
            alignment.extend([word_index] * len(got))
    return TokenizedSentence(pieces, alignment, unknown)


def detokenize(pieces: Iterable[str]) -> str:
    """Invert whitespace-mode tokenization for sequences without [UNK]."""
    words: list[str] = []
    for piece in pieces:
        if piece.startswith(CONTINUATION_PREFIX):
            if not words:
                raise ValueError(f"continuation piece {piece!r} has no word to extend")
            words[-1] += piece[len(CONTINUATION_PREFIX):]
        else:
            words.append(piece)
    return " ".join(words)


@dataclass
class FertilityReport:
    """Corpus-level segmentation statistics for one vocabulary."""

    num_words: int
    num_pieces: int
    num_intact_words: int
    num_unknown_words: int
    fertility: float
    intact_fraction: float
    unknown_fraction: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def measure_fertility(
    vocab: SubwordVocabulary,
    corpus: Iterable[str],
    *,
    split_punct: bool = False,
    max_word_chars: int = DEFAULT_MAX_WORD_CHARS,
) -> FertilityReport:
    """Average pieces per whitespace word over a corpus; 0.0 when empty.

    A word is intact when it maps to the single piece equal to itself, and
    unknown when any of its units came out as [UNK].
    """
    words = pieces = intact = unknown = 0
    for line in corpus:
        for word in line.split():
            words += 1
            units = split_punctuation(word) if split_punct else [word]
            word_pieces: list[str] = []
            for unit in units:
                word_pieces.extend(wordpiece_tokenize(vocab, unit, max_word_chars))
            pieces += len(word_pieces)
            if word_pieces == [word] and word in vocab:
                intact += 1
            if UNK in word_pieces:
                unknown += 1
    if words == 0:
        return FertilityReport(0, 0, 0, 0, 0.0, 0.0, 0.0)
    return FertilityReport(
        num_words=words,
        num_pieces=pieces,
        num_intact_words=intact,
        num_unknown_words=unknown,
        fertility=pieces / words,
        intact_fraction=intact / words,
        unknown_fraction=unknown / words,
    )


@dataclass
class VocabComparison:
    report_a: FertilityReport
    report_b: FertilityReport
    piece_delta_per_sentence: list[int] = field(default_factory=list)

    @property
    def lower_fertility(self) -> str:
        if self.report_a.fertility < self.report_b.fertility:
            return "a"
        if self.report_b.fertility < self.report_a.fertility:
            return "b"
        return "tie"

    def as_dict(self) -> dict:
        return {
            "a": self.report_a.as_dict(),
            "b": self.report_b.as_dict(),
            "piece_delta_per_sentence": list(self.piece_delta_per_sentence),
            "lower_fertility": self.lower_fertility,
        }


def compare_vocabs(
    vocab_a: SubwordVocabulary,
    vocab_b: SubwordVocabulary,
    corpus: Iterable[str],
    *,
    split_punct: bool = False,
) -> VocabComparison:
    """Tokenize the same corpus with two vocabularies and report the gap."""
    lines = list(corpus)
    report_a = measure_fertility(vocab_a, lines, split_punct=split_punct)
    report_b = measure_fertility(vocab_b, lines, split_punct=split_punct)
    deltas = []
    for line in lines:
        a = tokenize_sentence(vocab_a, line, split_punct=split_punct)
        b = tokenize_sentence(vocab_b, line, split_punct=split_punct)
        deltas.append(len(a.pieces) - len(b.pieces))
    return VocabComparison(report_a, report_b, deltas)
