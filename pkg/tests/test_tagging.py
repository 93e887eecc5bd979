from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ackmine.corpus import CorpusRecord
from ackmine.gazetteer import Gazetteer, GazetteerEntry
from ackmine.tagging import (
    EntityLabel,
    EntitySpan,
    TagValidationError,
    evaluate_tagger,
    gazetteer_tag,
    import_external_tags,
    link_person_affiliation,
    validate_spans,
)

NSF_GAZETTEER = Gazetteer(
    [GazetteerEntry("National Science Foundation", "NSF", "National Science Foundation (NSF)")]
)
EMPTY = Gazetteer.empty()


def _tag(text: str, fund=NSF_GAZETTEER, uni=EMPTY, cor=EMPTY) -> list[EntitySpan]:
    record = CorpusRecord("W1", 2015, ack_text=text)
    return gazetteer_tag(record, fund, uni, cor)


class TestGazetteerTag:
    def test_fund_and_grant_number(self):
        spans = _tag("funded by the National Science Foundation (NSF) under grant ABC-1234")
        assert [(s.surface, s.label) for s in spans] == [
            ("National Science Foundation (NSF)", EntityLabel.FUND),
            ("ABC-1234", EntityLabel.GRNB),
        ]
        # Leftmost-longest: the full parenthesized form wins over the bare name.
        assert (spans[0].start, spans[0].end) == (14, 47)
        assert (spans[1].start, spans[1].end) == (60, 68)

    def test_person_after_cue(self):
        spans = _tag("We thank John Doe for comments.")
        assert [(s.surface, s.label) for s in spans] == [("John Doe", EntityLabel.IND)]
        assert (spans[0].start, spans[0].end) == (9, 17)

    def test_initial_in_person_name(self):
        spans = _tag("We thank J. Doe for comments.")
        assert [(s.surface, s.label) for s in spans] == [("J. Doe", EntityLabel.IND)]

    def test_person_without_cue_not_tagged(self):
        assert _tag("John Doe wrote the code.") == []

    def test_plain_text_empty_gazetteers(self):
        record = CorpusRecord("W1", 2015, ack_text="Nothing to see here at all.")
        assert gazetteer_tag(record, EMPTY, EMPTY, EMPTY) == []

    def test_grant_number_needs_cue_nearby(self):
        assert _tag("the code 12345 appears with no cue", fund=EMPTY) == []
        spans = _tag("supported under grant 12345 here", fund=EMPTY)
        assert [(s.surface, s.label) for s in spans] == [("12345", EntityLabel.GRNB)]

    def test_grant_cue_window_is_six_tokens(self):
        spans = _tag("grant a b c d e 12345", fund=EMPTY)
        assert [s.surface for s in spans] == ["12345"]
        assert _tag("grant a b c d e f 12345", fund=EMPTY) == []

    def test_short_or_digitless_tokens_not_grant_numbers(self):
        assert _tag("under grant 123 only", fund=EMPTY) == []
        assert _tag("under grant agreement only", fund=EMPTY) == []

    def test_missing_ack_text_is_an_error(self):
        record = CorpusRecord("W1", 2015)
        with pytest.raises(TagValidationError):
            gazetteer_tag(record, EMPTY, EMPTY, EMPTY)

    def test_fund_precedence_over_person_heuristic(self):
        spans = _tag("We thank the National Science Foundation for support.")
        assert [(s.surface, s.label) for s in spans] == [
            ("National Science Foundation", EntityLabel.FUND)
        ]

    def test_word_boundaries_respected(self):
        # NSFC must not be reported as an embedded NSF match.
        spans = _tag("funded by NSFC this year")
        assert spans == []

    def test_spans_sorted_and_non_overlapping(self):
        spans = _tag(
            "We thank John Doe of the National Science Foundation for grant ABC-9999."
        )
        assert spans == sorted(spans, key=lambda s: s.start)
        for left, right in zip(spans, spans[1:]):
            assert left.end <= right.start

    def test_longer_corporation_form_wins(self):
        cor = Gazetteer(
            [
                GazetteerEntry("Google", "", "Google"),
                GazetteerEntry("Google Inc.", "", "Google"),
            ]
        )
        spans = _tag("funded by Google Inc. this year", fund=EMPTY, cor=cor)
        assert [s.surface for s in spans] == ["Google Inc."]


class TestImportExternalTags:
    CORPUS = [CorpusRecord("W1", 2015, ack_text="Funded by NSF under grant 1234.")]

    def _line(self, **overrides) -> str:
        data = {"record_id": "W1", "start": 10, "end": 13, "text": "NSF", "label": "FUND"}
        data.update(overrides)
        return json.dumps(data)

    def test_valid_line_accepted(self):
        result = import_external_tags(self._line(), self.CORPUS)
        assert not result.issues
        (span,) = result.spans
        assert span.surface == "NSF"
        assert span.label is EntityLabel.FUND

    def test_unknown_label_rejected(self):
        result = import_external_tags(self._line(label="PERSON"), self.CORPUS)
        assert not result.spans
        assert "unknown label 'PERSON'" in result.issues[0].message

    def test_surface_mismatch_reports_both_strings(self):
        result = import_external_tags(self._line(text="NSA"), self.CORPUS)
        assert not result.spans
        message = result.issues[0].message
        assert "'NSA'" in message and "'NSF'" in message

    def test_unknown_record_rejected(self):
        result = import_external_tags(self._line(record_id="W9"), self.CORPUS)
        assert "unknown record_id" in result.issues[0].message

    def test_out_of_range_offsets_rejected(self):
        result = import_external_tags(self._line(start=28, end=40, text="34."), self.CORPUS)
        assert "out of range" in result.issues[0].message

    def test_overlap_rejected_naming_both_spans(self):
        lines = "\n".join(
            [
                self._line(),
                self._line(start=10, end=18, text="NSF unde"),
            ]
        )
        result = import_external_tags(lines, self.CORPUS)
        assert len(result.spans) == 1
        assert "overlaps" in result.issues[0].message
        assert "'NSF'" in result.issues[0].message and "'NSF unde'" in result.issues[0].message

    def test_line_numbers_reported(self):
        lines = "\n".join([self._line(), self._line(label="X"), self._line(record_id="W9")])
        result = import_external_tags(lines, self.CORPUS)
        assert [issue.line_no for issue in result.issues] == [2, 3]

    def test_idempotent_round_trip(self):
        result = import_external_tags(self._line(), self.CORPUS)
        serialized = "\n".join(json.dumps(s.to_json_dict()) for s in result.spans)
        again = import_external_tags(serialized, self.CORPUS)
        assert again.spans == result.spans
        assert not again.issues

    def test_validate_spans_raises_on_overlap(self):
        spans = [
            EntitySpan("W1", 10, 13, "NSF", EntityLabel.FUND),
            EntitySpan("W1", 12, 16, "F un", EntityLabel.MISC),
        ]
        with pytest.raises(TagValidationError, match="overlapping"):
            validate_spans(spans, self.CORPUS)


def _span(record_id, start, end, label, surface=None):
    return EntitySpan(record_id, start, end, surface or "x" * (end - start), label)


class TestEvaluateTagger:
    def test_identity(self):
        gold = [_span("W1", 0, 3, EntityLabel.FUND)]
        report = evaluate_tagger(gold, gold)
        assert report.per_label[EntityLabel.FUND].f1 == 1.0
        assert report.accuracy == 1.0

    def test_mean_of_per_label_f1(self):
        # Engineered so FUND scores F1 = 0.90 and GRNB scores F1 = 0.64
        # (precision = recall in both): their mean is exactly 0.77.
        gold = [_span("W1", i * 10, i * 10 + 3, EntityLabel.FUND) for i in range(10)]
        pred = gold[:9] + [_span("W1", 900, 903, EntityLabel.FUND)]
        gold += [_span("W2", i * 10, i * 10 + 3, EntityLabel.GRNB) for i in range(25)]
        pred += [_span("W2", i * 10, i * 10 + 3, EntityLabel.GRNB) for i in range(16)]
        pred += [_span("W2", (100 + i) * 10, (100 + i) * 10 + 3, EntityLabel.GRNB) for i in range(9)]
        report = evaluate_tagger(pred, gold)
        assert report.per_label[EntityLabel.FUND].f1 == pytest.approx(0.90)
        assert report.per_label[EntityLabel.GRNB].f1 == pytest.approx(0.64)
        assert report.accuracy == pytest.approx(0.77)

    def test_empty_predictions(self):
        gold = [_span("W1", 0, 3, EntityLabel.FUND), _span("W1", 5, 8, EntityLabel.IND)]
        report = evaluate_tagger([], gold)
        assert report.accuracy == 0.0
        assert all(scores.f1 == 0.0 for scores in report.per_label.values())

    def test_label_only_in_predictions_counts(self):
        gold = [_span("W1", 0, 3, EntityLabel.FUND)]
        pred = [_span("W1", 0, 3, EntityLabel.FUND), _span("W1", 5, 8, EntityLabel.COR)]
        report = evaluate_tagger(pred, gold)
        assert set(report.per_label) == {EntityLabel.FUND, EntityLabel.COR}
        assert report.accuracy == pytest.approx(0.5)

    span_lists = st.lists(
        st.builds(
            lambda rid, start, label: EntitySpan(rid, start, start + 3, "xxx", label),
            st.sampled_from(["W1", "W2"]),
            st.integers(min_value=0, max_value=40).map(lambda v: v * 10),
            st.sampled_from(list(EntityLabel)),
        ),
        max_size=12,
    )

    @given(span_lists, span_lists)
    def test_f1_symmetric_under_swap(self, pred, gold):
        forward = evaluate_tagger(pred, gold)
        backward = evaluate_tagger(gold, pred)
        assert set(forward.per_label) == set(backward.per_label)
        for label, scores in forward.per_label.items():
            swapped = backward.per_label[label]
            assert scores.f1 == pytest.approx(swapped.f1)
            assert scores.precision == pytest.approx(swapped.recall)
            assert scores.recall == pytest.approx(swapped.precision)


class TestLinkPersonAffiliation:
    def test_adjacent_university_linked(self):
        ind = _span("W1", 0, 8, EntityLabel.IND)
        uni = _span("W1", 10, 25, EntityLabel.UNI)
        assert link_person_affiliation([ind, uni]) == [(ind, uni)]

    def test_window_exceeded_yields_none(self):
        ind = _span("W1", 0, 8, EntityLabel.IND)
        uni = _span("W1", 300, 315, EntityLabel.UNI)
        assert link_person_affiliation([ind, uni], window=60) == [(ind, None)]

    def test_tie_breaks_rightward(self):
        uni = _span("W1", 0, 10, EntityLabel.UNI)
        ind = _span("W1", 20, 28, EntityLabel.IND)
        cor = _span("W1", 38, 48, EntityLabel.COR)
        assert link_person_affiliation([uni, ind, cor]) == [(ind, cor)]

    def test_never_links_across_records(self):
        ind = _span("W1", 0, 8, EntityLabel.IND)
        uni = _span("W2", 10, 25, EntityLabel.UNI)
        assert link_person_affiliation([ind, uni]) == [(ind, None)]

    def test_never_pairs_two_persons(self):
        a = _span("W1", 0, 8, EntityLabel.IND)
        b = _span("W1", 10, 18, EntityLabel.IND)
        assert link_person_affiliation([a, b]) == [(a, None), (b, None)]
