"""Unigram language model for subword vocabulary induction.

Training follows the classic recipe: seed a large candidate inventory with
the most frequent substrings, fit piece probabilities with EM over the
segmentation lattice of every word, then prune the lowest-value pieces a
fraction at a time until exactly the target size remains.

Words are represented with a boundary marker prepended ("abc" becomes
"▁abc"), so a piece either starts with the marker (word-initial) or not
(word-internal). The marker alone is never a piece. For every covered
character c the plain piece "c" is kept unprunable, and so is the marked
"▁c" for every covered word-initial character; together these keep the
training corpus segmentable no matter what pruning does.

Two E-step modes exist. "lattice" (the default) uses forward-backward
expectations over all segmentations and its EM objective is the marginal
corpus log-likelihood; "viterbi" uses hard counts from the single best
segmentation and its objective is the best-path log-likelihood. Each mode
provably never decreases its own objective between iterations of a pruning
round, which the training history records.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import ConfigError, ParseError, UnsegmentableError

DEFAULT_BOUNDARY_MARKER = "▁"

_NEG_INF = float("-inf")


@dataclass
class TrainingRecord:
    """One EM iteration: the mode's objective plus the Viterbi objective."""

    round: int
    iteration: int
    log_likelihood: float
    viterbi_log_likelihood: float
    num_pieces: int


@dataclass
class UnigramModel:
    """Piece inventory with natural-log probabilities."""

    pieces: dict[str, float]
    boundary_marker: str = DEFAULT_BOUNDARY_MARKER
    history: list[TrainingRecord] = field(default_factory=list, repr=False, compare=False)

    def log_prob(self, piece: str) -> float:
        return self.pieces.get(piece, _NEG_INF)

    def save(self, path: str | Path) -> None:
        lines = [
            f"{piece}\t{lp!r}\n"
            for piece, lp in sorted(self.pieces.items(), key=lambda kv: (-kv[1], kv[0]))
        ]
        Path(path).write_text("".join(lines), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, boundary_marker: str = DEFAULT_BOUNDARY_MARKER) -> "UnigramModel":
        pieces: dict[str, float] = {}
        for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}", "expected piece<TAB>logprob")
            try:
                pieces[parts[0]] = float(parts[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}", f"bad log-probability {parts[1]!r}") from None
        return cls(pieces, boundary_marker)


def _logaddexp(a: float, b: float) -> float:
    if a == _NEG_INF:
        return b
    if b == _NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def _viterbi(target: str, piece_lp: dict[str, float], max_len: int):
    """Best-scoring segmentation of target, or (-inf, None).

    Ties prefer the longest piece at each boundary, which makes the result
    deterministic.
    """
    n = len(target)
    dp = [_NEG_INF] * (n + 1)
    back = [0] * (n + 1)
    dp[0] = 0.0
    for j in range(1, n + 1):
        for i in range(max(0, j - max_len), j):
            if dp[i] == _NEG_INF:
                continue
            lp = piece_lp.get(target[i:j], _NEG_INF)
            if lp == _NEG_INF:
                continue
            cand = dp[i] + lp
            if cand > dp[j]:
                dp[j] = cand
                back[j] = i
    if dp[n] == _NEG_INF:
        return _NEG_INF, None
    out = []
    j = n
    while j > 0:
        i = back[j]
        out.append(target[i:j])
        j = i
    out.reverse()
    return dp[n], out


def viterbi_segment(model: UnigramModel, word: str) -> list[str]:
    """Most probable piece sequence for one word.

    Pieces come back as stored in the model, so with a boundary marker the
    first piece carries it; stripping markers and concatenating recovers
    the word. Raises UnsegmentableError when no piece sequence covers it.
    """
    if not word:
        raise ValueError("word must be non-empty")
    target = model.boundary_marker + word
    usable = {p: lp for p, lp in model.pieces.items() if lp != _NEG_INF}
    max_len = max(map(len, usable), default=0)
    score, pieces = _viterbi(target, usable, max_len)
    if pieces is None:
        raise UnsegmentableError(f"no segmentation covers {word!r}")
    return pieces


def _marked_words(corpus: Iterable[str], marker: str) -> Counter[str]:
    words: Counter[str] = Counter()
    for line in corpus:
        for word in line.split():
            if marker and marker in word:
                raise ConfigError(
                    f"word {word!r} contains the boundary marker {marker!r}"
                )
            words[marker + word] += 1
    return words


def _covered_chars(words: Counter[str], marker: str, coverage: float) -> set[str]:
    char_counts: Counter[str] = Counter()
    for marked, count in words.items():
        for ch in marked[len(marker):]:
            char_counts[ch] += count
    total = sum(char_counts.values())
    covered: set[str] = set()
    cumulative = 0
    for ch, count in sorted(char_counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if cumulative >= coverage * total and covered:
            break
        covered.add(ch)
        cumulative += count
    return covered


def _candidate_counts(
    words: Counter[str], marker: str, covered: set[str], max_piece_length: int
) -> Counter[str]:
    """Occurrence counts of every admissible substring of the marked words."""
    counts: Counter[str] = Counter()
    mlen = len(marker)
    for marked, count in words.items():
        n = len(marked)
        for i in range(n):
            if 0 < i < mlen:  # never start inside the marker itself
                continue
            # a word-initial piece must extend past the bare marker
            first_end = i + mlen + 1 if i == 0 else i + 1
            for j in range(first_end, min(i + max_piece_length, n) + 1):
                counts[marked[i:j]] += count
    return counts


class _EmState:
    def __init__(self, words: Counter[str], piece_lp: dict[str, float]):
        self.words = words
        self.piece_lp = piece_lp

    @property
    def max_len(self) -> int:
        return max(map(len, self.piece_lp), default=0)

    def viterbi_ll_and_freqs(self):
        total_ll = 0.0
        freqs: Counter[str] = Counter()
        max_len = self.max_len
        for marked, count in self.words.items():
            score, pieces = _viterbi(marked, self.piece_lp, max_len)
            if pieces is None:
                raise UnsegmentableError(f"training word {marked!r} lost coverage")
            total_ll += score * count
            for p in pieces:
                freqs[p] += count
        return total_ll, freqs

    def lattice_counts(self):
        """Forward-backward expected piece counts and the marginal LL."""
        expected = {p: 0.0 for p in self.piece_lp}
        total_ll = 0.0
        max_len = self.max_len
        for marked, count in self.words.items():
            n = len(marked)
            arcs = []  # (i, j, piece, lp)
            for i in range(n):
                for j in range(i + 1, min(i + max_len, n) + 1):
                    lp = self.piece_lp.get(marked[i:j], _NEG_INF)
                    if lp != _NEG_INF:
                        arcs.append((i, j, marked[i:j], lp))
            alpha = [_NEG_INF] * (n + 1)
            beta = [_NEG_INF] * (n + 1)
            alpha[0] = 0.0
            beta[n] = 0.0
            for i, j, _, lp in arcs:  # arcs are sorted by i already
                if alpha[i] != _NEG_INF:
                    alpha[j] = _logaddexp(alpha[j], alpha[i] + lp)
            for i, j, _, lp in reversed(arcs):
                if beta[j] != _NEG_INF:
                    beta[i] = _logaddexp(beta[i], lp + beta[j])
            log_z = alpha[n]
            if log_z == _NEG_INF:
                raise UnsegmentableError(f"training word {marked!r} lost coverage")
            total_ll += log_z * count
            for i, j, piece, lp in arcs:
                if alpha[i] == _NEG_INF or beta[j] == _NEG_INF:
                    continue
                expected[piece] += count * math.exp(alpha[i] + lp + beta[j] - log_z)
        return total_ll, expected


def _normalize(counts: dict[str, float], required: frozenset[str] | set[str] = frozenset()) -> dict[str, float]:
    """Counts to log-probabilities.

    Required pieces keep a vanishing floor instead of reaching exact zero:
    they must stay usable so the corpus remains segmentable after any
    pruning. The floor is ~1e-30 of the total mass, orders of magnitude
    below the 1e-9 tolerance the likelihood assertions use.
    """
    raw_total = sum(counts[p] for p in sorted(counts))
    floor = raw_total * 1e-30
    adjusted = {}
    for p in counts:
        c = counts[p]
        if p in required and c < floor:
            c = floor
        adjusted[p] = c
    total = sum(adjusted[p] for p in sorted(adjusted))
    log_total = math.log(total)
    return {
        p: math.log(c) - log_total if c > 0.0 else _NEG_INF
        for p, c in adjusted.items()
    }


def _renormalize_lps(piece_lp: dict[str, float]) -> dict[str, float]:
    log_total = _NEG_INF
    for lp in piece_lp.values():
        log_total = _logaddexp(log_total, lp)
    return {p: lp - log_total for p, lp in piece_lp.items()}


def train_unigram(
    corpus: Iterable[str],
    target_size: int,
    seed_multiplier: int = 4,
    prune_fraction: float = 0.25,
    character_coverage: float = 0.9999,
    *,
    em_iterations: int = 2,
    max_piece_length: int = 16,
    boundary_marker: str = DEFAULT_BOUNDARY_MARKER,
    em_mode: str = "lattice",
) -> UnigramModel:
    """Induce a unigram piece inventory of exactly target_size pieces.

    corpus is an iterable of whitespace-tokenized sentences. Training is
    deterministic given its inputs. The returned model's history holds one
    record per EM iteration; within any pruning round the recorded
    objective never decreases.
    """
    if em_mode not in ("lattice", "viterbi"):
        raise ConfigError(f"unknown em_mode {em_mode!r}")
    if not 0.0 < prune_fraction < 1.0:
        raise ConfigError("prune_fraction must be strictly between 0 and 1")
    if seed_multiplier < 1:
        raise ConfigError("seed_multiplier must be at least 1")
    if not 0.0 < character_coverage <= 1.0:
        raise ConfigError("character_coverage must be in (0, 1]")
    if em_iterations < 1:
        raise ConfigError("em_iterations must be at least 1")
    if max_piece_length < len(boundary_marker) + 1:
        raise ConfigError("max_piece_length leaves no room for marked pieces")

    words = _marked_words(corpus, boundary_marker)
    if not words:
        raise ConfigError("training corpus contains no words")
    covered = _covered_chars(words, boundary_marker, character_coverage)
    words = Counter(
        {
            marked: count
            for marked, count in words.items()
            if all(ch in covered for ch in marked[len(boundary_marker):])
        }
    )
    if not words:
        raise ConfigError("character coverage leaves no trainable words")

    required = set(covered)
    for marked in words:
        required.add(marked[: len(boundary_marker) + 1])

    if target_size < len(required):
        raise ConfigError(
            f"target_size {target_size} is below the {len(required)} single-character "
            f"pieces required to segment the corpus"
        )

    candidates = _candidate_counts(words, boundary_marker, covered, max_piece_length)
    if len(candidates) < target_size:
        raise ConfigError(
            f"target_size {target_size} exceeds the {len(candidates)} distinct "
            f"candidate pieces in the corpus"
        )

    seed_budget = seed_multiplier * target_size
    free_pool = sorted(
        (p for p in candidates if p not in required),
        key=lambda p: (-candidates[p] * len(p), p),
    )
    seed = list(required) + free_pool[: max(0, seed_budget - len(required))]
    # initial mass proportional to frequency * length, the customary seeding
    piece_lp = _normalize(
        {p: float(candidates[p] * len(p)) for p in sorted(seed)}, required
    )

    history: list[TrainingRecord] = []
    round_index = 0
    while True:
        for iteration in range(em_iterations):
            state = _EmState(words, piece_lp)
            if em_mode == "lattice":
                marginal_ll, counts = state.lattice_counts()
                viterbi_ll, _ = state.viterbi_ll_and_freqs()
                objective = marginal_ll
            else:
                viterbi_ll, freqs = state.viterbi_ll_and_freqs()
                counts = {p: float(freqs.get(p, 0)) for p in piece_lp}
                objective = viterbi_ll
            history.append(
                TrainingRecord(round_index, iteration, objective, viterbi_ll, len(piece_lp))
            )
            piece_lp = _normalize(counts, required)

        if len(piece_lp) <= target_size:
            break
        piece_lp = _prune(_EmState(words, piece_lp), required, target_size, prune_fraction)
        round_index += 1

    model = UnigramModel(dict(sorted(piece_lp.items())), boundary_marker)
    model.history = history
    return model


def _prune(
    state: _EmState,
    required: set[str],
    target_size: int,
    prune_fraction: float,
) -> dict[str, float]:
    """Drop the pieces whose removal costs the least Viterbi likelihood."""
    piece_lp = state.piece_lp
    _, freqs = state.viterbi_ll_and_freqs()
    size = len(piece_lp)
    keep_count = max(target_size, min(math.ceil(size * (1.0 - prune_fraction)), size - 1))
    max_len = state.max_len
    losses = []
    for piece in sorted(piece_lp):
        if piece in required:
            continue
        freq = freqs.get(piece, 0)
        if freq == 0:
            losses.append((0.0, piece))
            continue
        own_lp = piece_lp[piece]
        piece_lp[piece] = _NEG_INF  # best segmentation NOT using the piece itself
        alt_score, alt = _viterbi(piece, piece_lp, max_len)
        piece_lp[piece] = own_lp
        if alt is None:
            continue  # sole cover for its string, keep it
        losses.append((freq * (own_lp - alt_score), piece))
    losses.sort(key=lambda item: (item[0], item[1]))
    n_drop = size - keep_count
    dropped = {piece for _, piece in losses[:n_drop]}
    if not dropped:
        raise ConfigError(
            f"pruning stalled at {size} pieces: every remaining piece above the "
            f"target of {target_size} is the sole cover for its string"
        )
    kept = {p: lp for p, lp in piece_lp.items() if p not in dropped}
    return _renormalize_lps(kept)
