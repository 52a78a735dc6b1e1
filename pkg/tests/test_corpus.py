import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmtk.corpus import (
    CorpusStats,
    Document,
    corpus_stats,
    emit_training_corpus,
    normalize_document,
    rule_segmenter,
    segment_sentences,
)
from lmtk.errors import ConfigError, DecodingError, EmitError


class TestNormalize:
    def test_utf8_passthrough(self):
        assert normalize_document("håper".encode("utf-8")) == "håper"

    def test_latin1_transcode(self):
        # 0xe5 is a-ring in Latin-1
        assert normalize_document(b"h\xe5per", "latin-1") == "håper"
        assert normalize_document(b"h\xe5per", "iso-8859-1") == "håper"

    def test_invalid_utf8_names_offset(self):
        with pytest.raises(DecodingError) as err:
            normalize_document(b"ab\xffcd", "utf-8")
        assert err.value.offset == 2
        assert "offset 2" in str(err.value)

    def test_unknown_encoding_rejected(self):
        with pytest.raises(ConfigError):
            normalize_document(b"abc", "utf-16")

    def test_detokenizes_spacing(self):
        assert (
            normalize_document("håper , sier han .")
            == "håper, sier han."
        )
        assert normalize_document("se ( i parentes )") == "se (i parentes)"
        assert normalize_document("a  b\tc") == "a b c"

    def test_preserves_line_structure(self):
        assert normalize_document("en linje .\nto linjer .") == "en linje.\nto linjer."

    @given(st.text(alphabet=" \t().,:;!?abcå\n", max_size=80))
    def test_idempotent(self, text):
        once = normalize_document(text)
        assert normalize_document(once) == once


class TestSegment:
    def test_two_sentences(self):
        assert segment_sentences("Han kom. Hun gikk.") == ["Han kom.", "Hun gikk."]

    def test_abbreviation_suppressed(self):
        assert segment_sentences("Det var bl.a. kaldt.") == ["Det var bl.a. kaldt."]

    def test_no_terminator(self):
        assert segment_sentences("ingen terminator her") == ["ingen terminator her"]

    def test_other_terminators(self):
        assert segment_sentences("Hva? Nå! Ja… ok") == [
            "Hva?",
            "Nå!",
            "Ja…",
            "ok",
        ]

    def test_custom_segmenter_interface(self):
        segment = rule_segmenter(frozenset({"kaldt."}))
        assert segment("Det var kaldt. Ja.") == ["Det var kaldt. Ja."]

    @given(st.text(alphabet="ab .!?", max_size=120))
    def test_join_restores_collapsed_input(self, text):
        sentences = segment_sentences(text)
        assert " ".join(sentences) == " ".join(text.split())
        assert all(s for s in sentences)


class TestEmit:
    def emit(self, docs):
        sink = io.StringIO()
        stats = emit_training_corpus(docs, sink)
        return sink.getvalue(), stats

    def test_blank_line_between_documents(self):
        text, stats = self.emit(
            [Document("d1", "news", [["a"]]), Document("d2", "news", [["b"]])]
        )
        assert text == "a\n\nb\n"
        assert stats.num_documents == 2

    def test_no_blank_line_within_document(self):
        text, _ = self.emit([Document("d", "news", [["s1", "s2"]])])
        assert text == "s1\ns2\n"

    def test_blank_line_between_sections(self):
        text, stats = self.emit([Document("d", "wiki", [["a"], ["b"]])])
        assert text == "a\n\nb\n"
        assert stats.num_documents == 2  # sections are boundary blocks

    def test_empty_document_skipped(self):
        text, stats = self.emit(
            [
                Document("d1", "news", [["a"]]),
                Document("empty", "news", [[]]),
                Document("d3", "news", [["b"]]),
            ]
        )
        assert text == "a\n\nb\n"
        assert stats.num_documents == 2

    def test_stats_counts(self):
        _, stats = self.emit([Document("d", "news", [["to ord", "ett"]])])
        assert stats == CorpusStats(
            num_documents=1, num_sentences=2, num_word_tokens=3, num_characters=9
        )

    def test_write_failure_names_document(self):
        class Broken:
            def write(self, _):
                raise OSError("disk full")

        with pytest.raises(EmitError) as err:
            emit_training_corpus([Document("d9", "news", [["a"]])], Broken())
        assert "d9" in str(err.value)

    def test_newline_in_sentence_rejected(self):
        with pytest.raises(EmitError):
            self.emit([Document("d", "news", [["bad\nsentence"]])])


class TestStats:
    def test_empty_stream(self):
        assert corpus_stats([]) == CorpusStats()

    def test_two_documents(self):
        stats = corpus_stats("a b\n\nc".splitlines())
        assert stats.num_documents == 2
        assert stats.num_sentences == 2
        assert stats.num_word_tokens == 3

    def test_json_round_trip(self):
        stats = CorpusStats(1, 2, 3, 4)
        parsed = CorpusStats.from_json(stats.to_json())
        assert parsed == stats
        assert set(stats.as_dict()) == {
            "num_documents",
            "num_sentences",
            "num_word_tokens",
            "num_characters",
        }


@st.composite
def documents(draw):
    n_docs = draw(st.integers(0, 6))
    docs = []
    for d in range(n_docs):
        n_sections = draw(st.integers(1, 3))
        sections = []
        for _ in range(n_sections):
            n_sents = draw(st.integers(0, 4))
            sections.append(
                [
                    draw(st.text(alphabet="abc æøå", min_size=1, max_size=12).filter(str.strip))
                    for _ in range(n_sents)
                ]
            )
        docs.append(Document(f"d{d}", "other", sections))
    return docs


@settings(max_examples=200)
@given(documents())
def test_emit_stats_round_trip(docs):
    sink = io.StringIO()
    emitted = emit_training_corpus(docs, sink)
    text = sink.getvalue()
    assert not text.startswith("\n")
    assert not text.endswith("\n\n")
    assert "\n\n\n" not in text
    recovered = corpus_stats(io.StringIO(text))
    assert recovered == emitted
