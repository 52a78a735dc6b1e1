"""BERT-style pretraining instances and two-phase schedule arithmetic.

Sentence pairs are drawn per document from the blank-line training format:
each consecutive pair stays positive with probability p_next, otherwise the
second segment is a uniform sentence from a different document. Packing
yields [CLS] a [SEP] b [SEP] within a length budget, and masking applies
the standard recipe (independent per-position selection, mask / random /
unchanged split) without whole-word grouping.

Pair sampling and masking consume separate RNG streams derived from the
user seed, so the packed stream is identical whether or not masking runs.
"""

from __future__ import annotations

import hashlib
import json
import random
import struct
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import BinaryIO, Iterable, Iterator, TextIO

from .errors import ConfigError, ParseError
from .vocab import CLS, MASK, SEP, SubwordVocabulary
from .wordpiece import tokenize_sentence

DEFAULT_MASK_PROB = 0.15
DEFAULT_REPLACE_MASK = 0.8
DEFAULT_REPLACE_RANDOM = 0.1

INSTANCE_FILE_MAGIC = b"PTI1"


def derive_stream_seed(seed: int, label: str) -> int:
    """Stable sub-seed for a named RNG stream (never Python's salted hash)."""
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_shard_seed(seed: int, shard_index: int) -> int:
    if shard_index < 0:
        raise ConfigError("shard_index must be non-negative")
    return derive_stream_seed(seed, f"shard{shard_index}")


@dataclass
class PretrainInstance:
    """One packed training example.

    pieces holds token ids starting with [CLS] and closing each segment
    with [SEP]; masked_positions/masked_labels record where masking struck
    and what the original ids were.
    """

    pieces: list[int]
    segment_ids: list[int]
    masked_positions: list[int]
    masked_labels: list[int]
    is_next: bool

    def __post_init__(self):
        if len(self.pieces) != len(self.segment_ids):
            raise ConfigError("segment_ids must align with pieces")
        if len(self.masked_positions) != len(self.masked_labels):
            raise ConfigError("masked_labels must align with masked_positions")

    def restored_pieces(self) -> list[int]:
        """The pre-masking piece ids."""
        pieces = list(self.pieces)
        for position, label in zip(self.masked_positions, self.masked_labels):
            pieces[position] = label
        return pieces


@dataclass
class Schedule:
    """Training-run arithmetic for one phase."""

    per_device_batch: int
    num_devices: int
    global_batch: int
    sentences: int
    steps_per_epoch: int
    epochs: int
    total_steps: int
    max_seq_len: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def parse_documents(corpus: Iterable[str]) -> list[list[str]]:
    """Group training-format lines into documents at blank lines."""
    documents: list[list[str]] = []
    current: list[str] = []
    for line in corpus:
        sentence = line.rstrip("\n")
        if sentence.strip():
            current.append(sentence)
        elif current:
            documents.append(current)
            current = []
    if current:
        documents.append(current)
    return documents


def build_nsp_pairs(
    corpus: Iterable[str], p_next: float, seed: int
) -> list[tuple[str, str, bool]]:
    """Sentence pairs for next-sentence prediction.

    Every consecutive in-document pair produces one output pair. Positive
    pairs never cross a document boundary; negatives replace the second
    sentence with a uniform draw over all sentences of other documents.
    """
    if not 0.0 <= p_next <= 1.0:
        raise ConfigError(f"p_next must be within [0, 1], got {p_next}")
    documents = parse_documents(corpus)
    if len(documents) == 1 and p_next < 1.0:
        raise ConfigError(
            "negative pairs need at least two documents; got a single document"
        )
    flat = [sentence for doc in documents for sentence in doc]
    doc_start = []
    offset = 0
    for doc in documents:
        doc_start.append(offset)
        offset += len(doc)
    rng = random.Random(seed)
    pairs: list[tuple[str, str, bool]] = []
    for doc_index, doc in enumerate(documents):
        outside = len(flat) - len(doc)
        for first, second in zip(doc, doc[1:]):
            if rng.random() < p_next:
                pairs.append((first, second, True))
                continue
            pick = rng.randrange(outside)
            if pick >= doc_start[doc_index]:
                pick += len(doc)
            pairs.append((first, flat[pick], False))
    return pairs


def pack_to_length(
    pair: tuple[list[int], list[int], bool],
    vocab: SubwordVocabulary,
    max_seq_len: int,
) -> PretrainInstance:
    """[CLS] a [SEP] b [SEP], trimming the longer segment from its end."""
    if max_seq_len < 5:
        raise ConfigError(f"max_seq_len must be at least 5, got {max_seq_len}")
    ids_a, ids_b, is_next = pair
    if not ids_a or not ids_b:
        raise ValueError("cannot pack a pair with an empty segment")
    a, b = list(ids_a), list(ids_b)
    budget = max_seq_len - 3
    while len(a) + len(b) > budget:
        # budget >= 2, so trimming the longer side always terminates
        longer = a if len(a) >= len(b) else b
        longer.pop()
    cls_id, sep_id = vocab.id_of(CLS), vocab.id_of(SEP)
    pieces = [cls_id] + a + [sep_id] + b + [sep_id]
    segment_ids = [0] * (len(a) + 2) + [1] * (len(b) + 1)
    return PretrainInstance(pieces, segment_ids, [], [], is_next)


def _mask_with_rng(
    instance: PretrainInstance,
    vocab: SubwordVocabulary,
    rng: random.Random,
    mask_prob: float,
    replace_mask: float,
    replace_random: float,
    candidates: list[int],
) -> PretrainInstance:
    cls_id, sep_id = vocab.id_of(CLS), vocab.id_of(SEP)
    mask_id = vocab.id_of(MASK)
    pieces = list(instance.pieces)
    positions: list[int] = []
    labels: list[int] = []
    for position, piece in enumerate(pieces):
        if piece in (cls_id, sep_id):
            continue
        if rng.random() >= mask_prob:
            continue
        positions.append(position)
        labels.append(piece)
        roll = rng.random()
        if roll < replace_mask:
            pieces[position] = mask_id
        elif roll < replace_mask + replace_random:
            pieces[position] = candidates[rng.randrange(len(candidates))]
        # else: keep the original piece, label still recorded
    return replace(
        instance, pieces=pieces, masked_positions=positions, masked_labels=labels
    )


def apply_mlm_masking(
    instance: PretrainInstance,
    vocab: SubwordVocabulary,
    seed: int,
    mask_prob: float = DEFAULT_MASK_PROB,
    replace_mask: float = DEFAULT_REPLACE_MASK,
    replace_random: float = DEFAULT_REPLACE_RANDOM,
) -> PretrainInstance:
    """Mask each non-[CLS]/[SEP] position independently with mask_prob.

    Selected positions become [MASK] with probability replace_mask, a
    uniform non-special piece with replace_random, and stay unchanged
    otherwise; masked_labels always record the original ids.
    """
    _check_mask_fractions(mask_prob, replace_mask, replace_random)
    rng = random.Random(seed)
    candidates = _replacement_candidates(vocab)
    return _mask_with_rng(
        instance, vocab, rng, mask_prob, replace_mask, replace_random, candidates
    )


def _check_mask_fractions(mask_prob, replace_mask, replace_random):
    if not 0.0 <= mask_prob <= 1.0:
        raise ConfigError(f"mask_prob must be within [0, 1], got {mask_prob}")
    if min(replace_mask, replace_random) < 0 or replace_mask + replace_random > 1:
        raise ConfigError(
            "replace_mask and replace_random must be non-negative and sum to at most 1"
        )


def _replacement_candidates(vocab: SubwordVocabulary) -> list[int]:
    specials = vocab.special_ids()
    candidates = [i for i in range(len(vocab)) if i not in specials]
    if not candidates:
        raise ConfigError("vocabulary has no non-special pieces to sample from")
    return candidates


def build_pretraining_data(
    corpus: Iterable[str],
    vocab: SubwordVocabulary,
    *,
    seed: int,
    max_seq_len: int,
    p_next: float = 0.5,
    mask: bool = True,
    mask_prob: float = DEFAULT_MASK_PROB,
    replace_mask: float = DEFAULT_REPLACE_MASK,
    replace_random: float = DEFAULT_REPLACE_RANDOM,
) -> Iterator[PretrainInstance]:
    """Full pipeline: pair sampling, tokenization, packing, optional masking.

    The pair stream uses its own derived seed, so runs with mask=False
    produce exactly the sequences that masked runs started from.
    """
    _check_mask_fractions(mask_prob, replace_mask, replace_random)
    pairs = build_nsp_pairs(corpus, p_next, derive_stream_seed(seed, "pairs"))
    mask_rng = random.Random(derive_stream_seed(seed, "mask"))
    candidates = _replacement_candidates(vocab) if mask else []
    encoded: dict[str, list[int]] = {}
    for first, second, is_next in pairs:
        for sentence in (first, second):
            if sentence not in encoded:
                pieces = tokenize_sentence(vocab, sentence).pieces
                encoded[sentence] = [vocab.id_of(p) for p in pieces]
        instance = pack_to_length(
            (encoded[first], encoded[second], is_next), vocab, max_seq_len
        )
        if mask:
            instance = _mask_with_rng(
                instance, vocab, mask_rng,
                mask_prob, replace_mask, replace_random, candidates,
            )
        yield instance


def compute_schedule(
    sentences: int,
    per_device_batch: int,
    num_devices: int,
    epochs: int,
    max_seq_len: int,
) -> Schedule:
    """Pure integer schedule arithmetic with ceiling division."""
    for name, value in (
        ("sentences", sentences),
        ("per_device_batch", per_device_batch),
        ("num_devices", num_devices),
        ("epochs", epochs),
        ("max_seq_len", max_seq_len),
    ):
        if value < 1:
            raise ConfigError(f"{name} must be positive, got {value}")
    global_batch = per_device_batch * num_devices
    steps_per_epoch = -(-sentences // global_batch)
    return Schedule(
        per_device_batch=per_device_batch,
        num_devices=num_devices,
        global_batch=global_batch,
        sentences=sentences,
        steps_per_epoch=steps_per_epoch,
        epochs=epochs,
        total_steps=steps_per_epoch * epochs,
        max_seq_len=max_seq_len,
    )


def phase2_quota(phase1: Schedule, ratio_denominator: int) -> int:
    """Sentence budget for the long-sequence phase as a fraction of phase 1."""
    if ratio_denominator < 1:
        raise ConfigError("ratio_denominator must be at least 1")
    return round(Fraction(phase1.global_batch * phase1.total_steps, ratio_denominator))


def write_instances_jsonl(instances: Iterable[PretrainInstance], sink: TextIO) -> int:
    """One compact JSON object per line; returns the instance count."""
    count = 0
    for instance in instances:
        record = {
            "pieces": instance.pieces,
            "segment_ids": instance.segment_ids,
            "masked_positions": instance.masked_positions,
            "masked_labels": instance.masked_labels,
            "is_next": instance.is_next,
        }
        sink.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
        count += 1
    return count


def read_instances_jsonl(source: TextIO) -> Iterator[PretrainInstance]:
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            yield PretrainInstance(
                pieces=record["pieces"],
                segment_ids=record["segment_ids"],
                masked_positions=record["masked_positions"],
                masked_labels=record["masked_labels"],
                is_next=bool(record["is_next"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as err:
            raise ParseError(f"line {lineno}", f"bad instance record: {err}") from err


def write_instances_binary(
    instances: Iterable[PretrainInstance], sink: BinaryIO
) -> int:
    """Length-prefixed little-endian framing; returns the instance count.

    Layout after the 4-byte magic: per record a u32 payload length, then
    u32 piece count, u32 mask count, u8 is_next, u32 pieces, u8 segment
    ids, u32 masked positions, u32 masked labels.
    """
    sink.write(INSTANCE_FILE_MAGIC)
    count = 0
    for instance in instances:
        n, m = len(instance.pieces), len(instance.masked_positions)
        payload = struct.pack("<IIB", n, m, int(instance.is_next))
        payload += struct.pack(f"<{n}I", *instance.pieces)
        payload += struct.pack(f"<{n}B", *instance.segment_ids)
        payload += struct.pack(f"<{m}I", *instance.masked_positions)
        payload += struct.pack(f"<{m}I", *instance.masked_labels)
        sink.write(struct.pack("<I", len(payload)))
        sink.write(payload)
        count += 1
    return count


def read_instances_binary(source: BinaryIO) -> Iterator[PretrainInstance]:
    magic = source.read(len(INSTANCE_FILE_MAGIC))
    if magic != INSTANCE_FILE_MAGIC:
        raise ParseError("offset 0", f"bad instance file magic {magic!r}")
    index = 0
    while True:
        header = source.read(4)
        if not header:
            return
        if len(header) < 4:
            raise ParseError(f"record {index}", "truncated length prefix")
        (length,) = struct.unpack("<I", header)
        payload = source.read(length)
        if len(payload) < length:
            raise ParseError(f"record {index}", "truncated payload")
        try:
            n, m, is_next = struct.unpack_from("<IIB", payload, 0)
            offset = struct.calcsize("<IIB")
            pieces = list(struct.unpack_from(f"<{n}I", payload, offset))
            offset += 4 * n
            segment_ids = list(struct.unpack_from(f"<{n}B", payload, offset))
            offset += n
            positions = list(struct.unpack_from(f"<{m}I", payload, offset))
            offset += 4 * m
            labels = list(struct.unpack_from(f"<{m}I", payload, offset))
            offset += 4 * m
        except struct.error as err:
            raise ParseError(f"record {index}", f"malformed payload: {err}") from err
        if offset != length:
            raise ParseError(f"record {index}", "payload has trailing bytes")
        yield PretrainInstance(pieces, segment_ids, positions, labels, bool(is_next))
        index += 1
