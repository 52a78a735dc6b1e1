"""Vocabulary types: subword inventories and full-word frequency lists.

A trained unigram model converts to the WordPiece layout used by BERT
tooling: special tokens at the head, real pieces, then [unusedN] filler up
to the requested size. Marked pieces lose the boundary marker and become
word-initial surfaces; unmarked pieces gain the "##" continuation prefix.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import ConfigError, ParseError
from .unigram import UnigramModel

log = logging.getLogger(__name__)

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
SPECIAL_PIECES = (PAD, UNK, CLS, SEP, MASK)

WORD_VOCAB_SPECIALS = ("<S>", "</S>", "<UNK>")

CONTINUATION_PREFIX = "##"


@dataclass
class SubwordVocabulary:
    """Ordered piece inventory; a piece's index is its id."""

    entries: list[str]
    _ids: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._ids = {piece: i for i, piece in enumerate(self.entries)}
        if len(self._ids) != len(self.entries):
            seen = set()
            dup = next(p for p in self.entries if p in seen or seen.add(p))
            raise ConfigError(f"duplicate vocabulary entry {dup!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, piece: str) -> bool:
        return piece in self._ids

    def id_of(self, piece: str) -> int:
        try:
            return self._ids[piece]
        except KeyError:
            raise ConfigError(f"piece {piece!r} not in vocabulary") from None

    def piece_of(self, piece_id: int) -> str:
        return self.entries[piece_id]

    @property
    def unk_id(self) -> int:
        return self.id_of(UNK)

    def special_ids(self) -> frozenset[int]:
        return frozenset(self._ids[p] for p in SPECIAL_PIECES if p in self._ids)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            "".join(piece + "\n" for piece in self.entries), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "SubwordVocabulary":
        entries = []
        for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line:
                raise ParseError(f"{path}:{lineno}", "empty vocabulary line")
            entries.append(line)
        return cls(entries)


def to_wordpiece(model: UnigramModel, target_size: int) -> SubwordVocabulary:
    """Convert a unigram model to a fixed-size WordPiece vocabulary.

    Specials occupy ids 0 to 4, real pieces follow ordered by descending
    probability (ties alphabetical), and [unusedN] entries pad the tail to
    exactly target_size. When two origins rewrite to the same surface the
    higher-probability origin wins; surfaces that collide with a special
    name are dropped.
    """
    if target_size < len(model.pieces) + len(SPECIAL_PIECES):
        raise ConfigError(
            f"target_size {target_size} cannot hold {len(model.pieces)} pieces "
            f"plus {len(SPECIAL_PIECES)} specials"
        )
    marker = model.boundary_marker
    surfaces: dict[str, tuple[float, bool]] = {}
    for piece, lp in model.pieces.items():
        initial = bool(marker) and piece.startswith(marker) and len(piece) > len(marker)
        surface = piece[len(marker):] if initial else CONTINUATION_PREFIX + piece
        if surface in SPECIAL_PIECES:
            continue
        held = surfaces.get(surface)
        if held is None or (lp, initial) > held:
            surfaces[surface] = (lp, initial)
    ordered = sorted(surfaces.items(), key=lambda kv: (-kv[1][0], kv[0]))
    entries = list(SPECIAL_PIECES) + [surface for surface, _ in ordered]
    taken = set(entries)
    index = 0
    while len(entries) < target_size:
        filler = f"[unused{index}]"
        index += 1
        if filler in taken:
            continue
        entries.append(filler)
    return SubwordVocabulary(entries)


@dataclass
class WordVocabulary:
    """Most frequent full words, specials appended at the end."""

    words: list[str]
    specials: tuple[str, ...] = WORD_VOCAB_SPECIALS

    @property
    def entries(self) -> list[str]:
        return self.words + list(self.specials)

    def __len__(self) -> int:
        return len(self.entries)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            "".join(entry + "\n" for entry in self.entries), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "WordVocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if tuple(lines[-3:]) != WORD_VOCAB_SPECIALS:
            raise ParseError(str(path), "word vocabulary must end with the specials")
        return cls(lines[:-3])


def build_frequency_vocab(corpus: Iterable[str], size: int) -> WordVocabulary:
    """Top `size` words by frequency, ties broken alphabetically."""
    if size < 1:
        raise ConfigError("vocabulary size must be positive")
    counts: Counter[str] = Counter()
    for line in corpus:
        counts.update(line.split())
    for special in WORD_VOCAB_SPECIALS:
        counts.pop(special, None)
    ranked = sorted(counts, key=lambda w: (-counts[w], w))
    if len(ranked) < size:
        log.warning(
            "corpus has %d distinct words, fewer than the requested %d",
            len(ranked), size,
        )
    return WordVocabulary(ranked[:size])
