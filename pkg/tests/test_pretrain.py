"""Tests for pretraining-instance generation and schedule arithmetic."""

import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusgen import document_corpus
from lmtk.errors import ConfigError, ParseError
from lmtk.pretrain import (
    PretrainInstance,
    Schedule,
    apply_mlm_masking,
    build_nsp_pairs,
    build_pretraining_data,
    compute_schedule,
    derive_shard_seed,
    derive_stream_seed,
    pack_to_length,
    parse_documents,
    phase2_quota,
    read_instances_binary,
    read_instances_jsonl,
    write_instances_binary,
    write_instances_jsonl,
)
from lmtk.vocab import SubwordVocabulary, to_wordpiece
from lmtk.unigram import UnigramModel


def tiny_vocab(extra=()) -> SubwordVocabulary:
    pieces = {f"▁{w}": -2.0 for w in ("en", "to", "tre", "fire", "fem")}
    pieces.update({w: -3.0 for w in ("a", "b", "c")})
    for piece in extra:
        pieces[piece] = -4.0
    return to_wordpiece(UnigramModel(pieces=pieces), len(pieces) + 5)


class TestParseDocuments:
    def test_blank_lines_split_documents(self):
        docs = parse_documents(["s1", "s2", "", "s3", "", "", "s4"])
        assert docs == [["s1", "s2"], ["s3"], ["s4"]]

    def test_trailing_newlines_are_stripped(self):
        assert parse_documents(["a\n", "\n", "b\n"]) == [["a"], ["b"]]

    def test_empty_stream(self):
        assert parse_documents([]) == []


class TestNspPairs:
    def test_two_sentences_one_positive_pair(self):
        pairs = build_nsp_pairs(["s1", "s2"], p_next=1.0, seed=0)
        assert pairs == [("s1", "s2", True)]

    def test_single_document_with_negatives_rejected(self):
        with pytest.raises(ConfigError):
            build_nsp_pairs(["s1", "s2"], p_next=0.5, seed=0)

    def test_positives_never_cross_documents(self):
        lines = document_corpus(30, 8, seed=1)
        doc_of = {}
        for index, doc in enumerate(parse_documents(lines)):
            for sentence in doc:
                doc_of[sentence] = index
        pairs = build_nsp_pairs(lines, p_next=0.7, seed=3)
        for first, second, is_next in pairs:
            if is_next:
                assert doc_of[first] == doc_of[second]
            else:
                assert doc_of[first] != doc_of[second]

    def test_positive_fraction_concentrates(self):
        # 500 docs x 21 sentences = 10,000 consecutive pairs
        lines = document_corpus(500, 21, seed=2)
        pairs = build_nsp_pairs(lines, p_next=0.5, seed=11)
        assert len(pairs) == 10_000
        positive = sum(1 for _, _, is_next in pairs if is_next)
        assert abs(positive / len(pairs) - 0.5) <= 0.02

    def test_pair_count_is_consecutive_pairs(self):
        lines = ["a1", "a2", "a3", "", "b1", "", "c1", "c2"]
        pairs = build_nsp_pairs(lines, p_next=1.0, seed=0)
        assert [(f, s) for f, s, _ in pairs] == [
            ("a1", "a2"), ("a2", "a3"), ("c1", "c2")
        ]

    def test_deterministic_given_seed(self):
        lines = document_corpus(10, 5, seed=4)
        assert build_nsp_pairs(lines, 0.5, seed=7) == build_nsp_pairs(
            lines, 0.5, seed=7
        )
        assert build_nsp_pairs(lines, 0.5, seed=7) != build_nsp_pairs(
            lines, 0.5, seed=8
        )

    def test_empty_corpus_yields_nothing(self):
        assert build_nsp_pairs([], p_next=0.5, seed=0) == []

    def test_p_next_out_of_range(self):
        with pytest.raises(ConfigError):
            build_nsp_pairs(["a", "", "b"], p_next=1.5, seed=0)


class TestPacking:
    def test_small_pair_is_untouched(self):
        vocab = tiny_vocab()
        inst = pack_to_length(([9, 8, 7], [6, 5, 9, 8], True), vocab, 128)
        cls, sep = vocab.id_of("[CLS]"), vocab.id_of("[SEP]")
        assert len(inst.pieces) == 10
        assert inst.pieces == [cls, 9, 8, 7, sep, 6, 5, 9, 8, sep]
        assert inst.segment_ids == [0] * 5 + [1] * 5
        assert inst.is_next is True

    def test_longer_segment_truncates_from_its_end(self):
        vocab = tiny_vocab()
        a = list(range(100, 200))
        b = list(range(300, 360))
        inst = pack_to_length((a, b, False), vocab, 128)
        assert len(inst.pieces) == 128
        sep = vocab.id_of("[SEP]")
        first_sep = inst.pieces.index(sep)
        assert inst.pieces[1:first_sep] == a[:65]
        assert inst.pieces[first_sep + 1 : -1] == b
        assert inst.segment_ids == [0] * 67 + [1] * 61

    def test_cls_first_and_exactly_two_seps(self):
        vocab = tiny_vocab()
        inst = pack_to_length(([9], [8], True), vocab, 5)
        assert inst.pieces[0] == vocab.id_of("[CLS]")
        assert inst.pieces.count(vocab.id_of("[SEP]")) == 2

    def test_max_seq_len_below_five_rejected(self):
        with pytest.raises(ConfigError):
            pack_to_length(([1], [2], True), tiny_vocab(), 4)

    def test_empty_segment_rejected(self):
        vocab = tiny_vocab()
        with pytest.raises(ValueError):
            pack_to_length(([1], [], True), vocab, 128)
        with pytest.raises(ValueError):
            pack_to_length(([], [1], True), vocab, 128)

    @given(
        st.lists(st.integers(5, 50), min_size=1, max_size=40),
        st.lists(st.integers(5, 50), min_size=1, max_size=40),
        st.integers(5, 40),
    )
    @settings(max_examples=200)
    def test_packed_length_never_exceeds_budget(self, a, b, max_seq_len):
        inst = pack_to_length((a, b, True), tiny_vocab(), max_seq_len)
        assert len(inst.pieces) <= max_seq_len
        assert len(inst.pieces) == len(inst.segment_ids)


def big_unmasked_instance(vocab, body=10_000):
    cls, sep = vocab.id_of("[CLS]"), vocab.id_of("[SEP]")
    word = vocab.id_of("en")
    pieces = [cls] + [word] * body + [sep] + [word] + [sep]
    segs = [0] * (body + 2) + [1] * 2
    return PretrainInstance(pieces, segs, [], [], True)


class TestMasking:
    def test_zero_probability_changes_nothing(self):
        vocab = tiny_vocab()
        inst = pack_to_length(([9, 8], [7], True), vocab, 16)
        out = apply_mlm_masking(inst, vocab, seed=5, mask_prob=0.0)
        assert out.pieces == inst.pieces
        assert out.masked_positions == [] and out.masked_labels == []

    def test_cls_and_sep_never_selected(self):
        vocab = tiny_vocab()
        inst = pack_to_length(([9, 8, 7], [6, 5], False), vocab, 32)
        cls, sep = vocab.id_of("[CLS]"), vocab.id_of("[SEP]")
        protected = {i for i, p in enumerate(inst.pieces) if p in (cls, sep)}
        for seed in range(50):
            out = apply_mlm_masking(inst, vocab, seed, mask_prob=1.0)
            assert protected.isdisjoint(out.masked_positions)

    def test_selection_and_replacement_rates(self):
        vocab = tiny_vocab(extra=[f"▁w{i}" for i in range(500)])
        inst = big_unmasked_instance(vocab, body=100_000)
        out = apply_mlm_masking(inst, vocab, seed=123)
        maskable = 100_001
        selected = len(out.masked_positions)
        assert abs(selected / maskable - 0.15) <= 0.01
        mask_id = vocab.id_of("[MASK]")
        masked = random_swap = unchanged = 0
        for pos, label in zip(out.masked_positions, out.masked_labels):
            got = out.pieces[pos]
            if got == mask_id:
                masked += 1
            elif got == label:
                unchanged += 1
            else:
                random_swap += 1
        assert abs(masked / selected - 0.8) <= 0.02
        assert abs(random_swap / selected - 0.1) <= 0.02
        assert abs(unchanged / selected - 0.1) <= 0.02

    def test_random_replacements_never_use_specials(self):
        vocab = tiny_vocab()
        inst = big_unmasked_instance(vocab, body=5_000)
        out = apply_mlm_masking(
            inst, vocab, seed=9, mask_prob=1.0, replace_mask=0.0, replace_random=1.0
        )
        specials = vocab.special_ids()
        for pos in out.masked_positions:
            assert out.pieces[pos] not in specials

    def test_labels_restore_original(self):
        vocab = tiny_vocab()
        inst = pack_to_length(([9, 8, 7, 6], [5, 9, 8], True), vocab, 32)
        out = apply_mlm_masking(inst, vocab, seed=2, mask_prob=0.9)
        assert out.restored_pieces() == inst.pieces

    def test_deterministic_given_seed(self):
        vocab = tiny_vocab()
        inst = pack_to_length(([9, 8, 7], [6, 5], True), vocab, 32)
        assert apply_mlm_masking(inst, vocab, 4) == apply_mlm_masking(inst, vocab, 4)

    def test_bad_fractions_rejected(self):
        vocab = tiny_vocab()
        inst = pack_to_length(([9], [8], True), vocab, 8)
        with pytest.raises(ConfigError):
            apply_mlm_masking(inst, vocab, 0, replace_mask=0.8, replace_random=0.3)
        with pytest.raises(ConfigError):
            apply_mlm_masking(inst, vocab, 0, mask_prob=1.5)


class TestEndToEnd:
    def corpus(self):
        words = ["en", "to", "tre", "fire", "fem"]
        lines = []
        for d in range(6):
            for s in range(4):
                lines.append(" ".join(words[(d + s + k) % 5] for k in range(3)))
            lines.append("")
        return lines

    def test_identical_seeds_identical_streams(self):
        vocab = tiny_vocab()
        lines = self.corpus()
        first = list(build_pretraining_data(lines, vocab, seed=42, max_seq_len=16))
        second = list(build_pretraining_data(lines, vocab, seed=42, max_seq_len=16))
        assert first == second

    def test_masking_leaves_pair_stream_unchanged(self):
        vocab = tiny_vocab()
        lines = self.corpus()
        masked = list(build_pretraining_data(lines, vocab, seed=7, max_seq_len=16))
        plain = list(
            build_pretraining_data(lines, vocab, seed=7, max_seq_len=16, mask=False)
        )
        assert len(masked) == len(plain)
        for got, want in zip(masked, plain):
            assert got.restored_pieces() == want.pieces
            assert got.is_next == want.is_next
            assert got.segment_ids == want.segment_ids

    def test_stream_seeds_differ_by_label(self):
        assert derive_stream_seed(1, "pairs") != derive_stream_seed(1, "mask")
        assert derive_stream_seed(1, "pairs") != derive_stream_seed(2, "pairs")

    def test_shard_seeds_are_stable_and_distinct(self):
        seeds = [derive_shard_seed(99, i) for i in range(8)]
        assert len(set(seeds)) == 8
        assert seeds == [derive_shard_seed(99, i) for i in range(8)]
        with pytest.raises(ConfigError):
            derive_shard_seed(1, -1)


class TestSchedule:
    def test_phase_one_figures(self):
        sched = compute_schedule(202_802_665, 48, 16, 3, 128)
        assert sched.global_batch == 768
        assert sched.steps_per_epoch == 264_066
        assert sched.total_steps == 792_198
        assert round(sched.steps_per_epoch, -3) == 264_000
        assert abs(sched.steps_per_epoch - 265_000) / 265_000 < 0.005

    def test_phase_two_figures(self):
        sched = compute_schedule(68_000_000, 8, 16, 1, 512)
        assert sched.global_batch == 128
        assert sched.steps_per_epoch == 531_250
        assert sched.total_steps == 531_250
        assert abs(sched.total_steps - 531_000) / 531_000 < 0.001

    def test_exact_division_gives_one_step(self):
        sched = compute_schedule(768, 48, 16, 1, 128)
        assert sched.steps_per_epoch == 1

    def test_non_positive_inputs_rejected(self):
        with pytest.raises(ConfigError):
            compute_schedule(0, 48, 16, 3, 128)
        with pytest.raises(ConfigError):
            compute_schedule(10, 48, 0, 3, 128)

    @given(st.integers(1, 5_000), st.integers(1, 8), st.integers(1, 8),
           st.integers(1, 4))
    @settings(max_examples=200)
    def test_ceiling_matches_naive_batch_counter(self, sentences, pdb, devices,
                                                 epochs):
        sched = compute_schedule(sentences, pdb, devices, epochs, 128)
        consumed = steps = 0
        while consumed < sentences:
            consumed += sched.global_batch
            steps += 1
        assert sched.steps_per_epoch == steps
        assert sched.total_steps == steps * epochs

    def test_quota_at_published_rounding(self):
        phase1 = Schedule(
            per_device_batch=48, num_devices=16, global_batch=768,
            sentences=202_802_665, steps_per_epoch=265_000, epochs=3,
            total_steps=795_000, max_seq_len=128,
        )
        assert phase2_quota(phase1, 9) == 67_840_000

    def test_quota_identity_and_zero(self):
        sched = compute_schedule(768 * 10, 48, 16, 1, 128)
        assert phase2_quota(sched, 1) == sched.global_batch * sched.total_steps
        zero = Schedule(48, 16, 768, 1, 0, 3, 0, 128)
        assert phase2_quota(zero, 9) == 0
        with pytest.raises(ConfigError):
            phase2_quota(sched, 0)

    def test_as_dict_field_names(self):
        sched = compute_schedule(100, 2, 2, 1, 128)
        assert set(sched.as_dict()) == {
            "per_device_batch", "num_devices", "global_batch", "sentences",
            "steps_per_epoch", "epochs", "total_steps", "max_seq_len",
        }


class TestSerialization:
    def instances(self):
        vocab = tiny_vocab()
        lines = ["en to tre", "to tre fire", "", "fem en", "a b c"]
        return list(
            build_pretraining_data(lines, vocab, seed=3, max_seq_len=12)
        )

    def test_jsonl_round_trip(self):
        instances = self.instances()
        buffer = io.StringIO()
        assert write_instances_jsonl(instances, buffer) == len(instances)
        buffer.seek(0)
        assert list(read_instances_jsonl(buffer)) == instances

    def test_jsonl_is_byte_deterministic(self):
        one, two = io.StringIO(), io.StringIO()
        write_instances_jsonl(self.instances(), one)
        write_instances_jsonl(self.instances(), two)
        assert one.getvalue() == two.getvalue()

    def test_jsonl_bad_record_names_line(self):
        source = io.StringIO('{"pieces": [1]}\n')
        with pytest.raises(ParseError) as err:
            list(read_instances_jsonl(source))
        assert "line 1" in str(err.value)

    def test_binary_round_trip(self):
        instances = self.instances()
        buffer = io.BytesIO()
        assert write_instances_binary(instances, buffer) == len(instances)
        buffer.seek(0)
        assert list(read_instances_binary(buffer)) == instances

    def test_binary_magic_enforced(self):
        with pytest.raises(ParseError):
            list(read_instances_binary(io.BytesIO(b"NOPE" + b"\x00" * 8)))

    def test_binary_truncation_detected(self):
        buffer = io.BytesIO()
        write_instances_binary(self.instances(), buffer)
        clipped = io.BytesIO(buffer.getvalue()[:-3])
        with pytest.raises(ParseError):
            list(read_instances_binary(clipped))

    def test_binary_layout_is_little_endian(self):
        inst = PretrainInstance([2, 9, 3, 8, 3], [0, 0, 0, 1, 1], [1], [7], False)
        buffer = io.BytesIO()
        write_instances_binary([inst], buffer)
        blob = buffer.getvalue()
        assert blob[:4] == b"PTI1"
        # payload: 4+4+1 header, 5*4 pieces, 5 segs, 4 pos, 4 labels = 42
        assert int.from_bytes(blob[4:8], "little") == 42
        assert int.from_bytes(blob[8:12], "little") == 5
        assert int.from_bytes(blob[12:16], "little") == 1
        assert blob[16] == 0
