"""Evaluation metrics for the five benchmark tasks.

All accumulation is exact rational arithmetic; floating point appears only
when a report is serialized. The zero-denominator convention is shared by
every metric: a precision or recall with an empty denominator is 0, except
when both the gold and predicted sides of the whole evaluation are empty,
which counts as perfect agreement (1.0).

Sentiment graphs are matched one-to-one. The default pairing is greedy by
descending combined overlap weight with (gold index, pred index) breaking
ties; an exact assignment search is available as matching="optimal" and
reports always name the mode used.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import SCHEMA_VERSION
from .errors import AlignmentError, ConfigError, ParseError
from .taskdata import (
    EntitySpan,
    NegationInstance,
    SentimentGraph,
    TaggedSentence,
    parse_conllu,
    parse_conllu_entities,
    parse_negation_records,
    parse_sentiment_graphs,
)

GRAPH_ELEMENTS = ("holder", "target", "expression")

EVALUATION_TASKS = ("pos", "ner", "sent", "fgsa", "neg")

SENTENCE_CLASSES = ("positive", "negative")

_OPTIMAL_MATCHING_LIMIT = 16


@dataclass(frozen=True)
class PRF:
    """Precision/recall/F1 with exact rational internals.

    recall_weight covers metrics whose precision and recall numerators
    differ (the weighted graph overlap); exact-match metrics leave it None
    so both ratios share tp_weight.
    """

    tp_weight: Fraction
    predicted: Fraction
    gold: Fraction
    recall_weight: Fraction | None = None

    @classmethod
    def from_counts(cls, tp: int, predicted: int, gold: int) -> "PRF":
        return cls(Fraction(tp), Fraction(predicted), Fraction(gold))

    def _ratio(self, numerator: Fraction, denominator: Fraction) -> Fraction:
        if denominator > 0:
            return numerator / denominator
        return Fraction(1) if self.predicted == self.gold == 0 else Fraction(0)

    @property
    def precision(self) -> Fraction:
        return self._ratio(self.tp_weight, self.predicted)

    @property
    def recall(self) -> Fraction:
        numerator = (
            self.tp_weight if self.recall_weight is None else self.recall_weight
        )
        return self._ratio(numerator, self.gold)

    @property
    def f1(self) -> Fraction:
        p, r = self.precision, self.recall
        if p + r == 0:
            return Fraction(0)
        return 2 * p * r / (p + r)

    def as_dict(self) -> dict:
        return {
            "precision": float(self.precision),
            "recall": float(self.recall),
            "f1": float(self.f1),
            "predicted": float(self.predicted),
            "gold": float(self.gold),
        }


def _check_sentence_counts(gold_len: int, pred_len: int) -> None:
    if gold_len != pred_len:
        raise AlignmentError(
            f"gold has {gold_len} sentences, predictions have {pred_len}"
        )


def pos_accuracy(
    gold: Sequence[TaggedSentence], pred: Sequence[Sequence[str]]
) -> Fraction:
    """Correct tags over total tags, exact."""
    _check_sentence_counts(len(gold), len(pred))
    correct = total = 0
    for index, (sentence, tags) in enumerate(zip(gold, pred)):
        if len(sentence.upos) != len(tags):
            raise AlignmentError(
                f"sentence {index}: gold has {len(sentence.upos)} tokens, "
                f"prediction has {len(tags)}"
            )
        total += len(tags)
        correct += sum(1 for g, p in zip(sentence.upos, tags) if g == p)
    if total == 0:
        return Fraction(1)
    return Fraction(correct, total)


def ner_strict_f1(
    gold: Sequence[Iterable[EntitySpan]], pred: Sequence[Iterable[EntitySpan]]
) -> tuple[PRF, dict[str, PRF]]:
    """Micro PRF over exact (start, end, label) matches, plus per-type PRFs."""
    _check_sentence_counts(len(gold), len(pred))
    tp: Counter[str] = Counter()
    n_pred: Counter[str] = Counter()
    n_gold: Counter[str] = Counter()
    for gold_spans, pred_spans in zip(gold, pred):
        g, p = set(gold_spans), set(pred_spans)
        for span in g & p:
            tp[span.label] += 1
        for span in p:
            n_pred[span.label] += 1
        for span in g:
            n_gold[span.label] += 1
    micro = PRF.from_counts(
        sum(tp.values()), sum(n_pred.values()), sum(n_gold.values())
    )
    per_type = {
        label: PRF.from_counts(tp[label], n_pred[label], n_gold[label])
        for label in sorted(set(n_pred) | set(n_gold))
    }
    return micro, per_type


def macro_f1(
    gold: Sequence[str], pred: Sequence[str], classes: Sequence[str]
) -> tuple[Fraction, dict[str, PRF]]:
    """Unweighted mean of one-vs-rest per-class F1."""
    if not classes:
        raise ConfigError("classes must be non-empty")
    _check_sentence_counts(len(gold), len(pred))
    known = set(classes)
    for label in list(gold) + list(pred):
        if label not in known:
            raise ConfigError(f"unknown label {label!r} (classes: {sorted(known)})")
    per_class = {}
    for cls in classes:
        tp = sum(1 for g, p in zip(gold, pred) if g == cls and p == cls)
        per_class[cls] = PRF.from_counts(
            tp,
            sum(1 for p in pred if p == cls),
            sum(1 for g in gold if g == cls),
        )
    macro = sum(prf.f1 for prf in per_class.values()) / len(classes)
    return macro, per_class


def _element_sets(
    graphs: Iterable[SentimentGraph], element: str
) -> frozenset[int]:
    union: set[int] = set()
    for graph in graphs:
        union |= getattr(graph, element)
    return frozenset(union)


def span_token_f1(
    gold: Sequence[Sequence[SentimentGraph]],
    pred: Sequence[Sequence[SentimentGraph]],
    element: str,
) -> PRF:
    """Token-level PRF over the per-sentence union of one element's spans."""
    if element not in GRAPH_ELEMENTS:
        raise ConfigError(f"element must be one of {GRAPH_ELEMENTS}, got {element!r}")
    _check_sentence_counts(len(gold), len(pred))
    tp = n_pred = n_gold = 0
    for gold_graphs, pred_graphs in zip(gold, pred):
        g = _element_sets(gold_graphs, element)
        p = _element_sets(pred_graphs, element)
        tp += len(g & p)
        n_pred += len(p)
        n_gold += len(g)
    return PRF.from_counts(tp, n_pred, n_gold)


def targeted_f1(
    gold: Sequence[Sequence[SentimentGraph]],
    pred: Sequence[Sequence[SentimentGraph]],
) -> PRF:
    """Exact target token set plus polarity, matched one-to-one."""
    _check_sentence_counts(len(gold), len(pred))
    tp = n_pred = n_gold = 0
    for gold_graphs, pred_graphs in zip(gold, pred):
        g = Counter((graph.target, graph.polarity) for graph in gold_graphs)
        p = Counter((graph.target, graph.polarity) for graph in pred_graphs)
        tp += sum((g & p).values())
        n_pred += len(pred_graphs)
        n_gold += len(gold_graphs)
    return PRF.from_counts(tp, n_pred, n_gold)


def _graph_arcs(graphs: Iterable[SentimentGraph], labelled: bool) -> frozenset:
    """Dependency-style arc set for one sentence.

    Arcs run from the expression's first token to the first token of the
    target and of the holder; a root arc marks the expression itself and
    carries the polarity in labelled mode.
    """
    arcs = set()
    for graph in graphs:
        head = min(graph.expression)
        if labelled:
            arcs.add((None, head, graph.polarity))
            if graph.target:
                arcs.add((head, min(graph.target), "target"))
            if graph.holder:
                arcs.add((head, min(graph.holder), "holder"))
        else:
            arcs.add((None, head))
            if graph.target:
                arcs.add((head, min(graph.target)))
            if graph.holder:
                arcs.add((head, min(graph.holder)))
    return frozenset(arcs)


def graph_edge_f1(
    gold: Sequence[Sequence[SentimentGraph]],
    pred: Sequence[Sequence[SentimentGraph]],
    labelled: bool,
) -> PRF:
    """F1 over the arc encoding (unlabelled/labelled attachment analogue)."""
    _check_sentence_counts(len(gold), len(pred))
    tp = n_pred = n_gold = 0
    for gold_graphs, pred_graphs in zip(gold, pred):
        g = _graph_arcs(gold_graphs, labelled)
        p = _graph_arcs(pred_graphs, labelled)
        tp += len(g & p)
        n_pred += len(p)
        n_gold += len(g)
    return PRF.from_counts(tp, n_pred, n_gold)


def _overlap_weight(
    numer_side: frozenset[int], other: frozenset[int]
) -> Fraction:
    """|intersection| / |numer_side| with empty-set conventions."""
    if not numer_side:
        return Fraction(1) if not other else Fraction(0)
    return Fraction(len(numer_side & other), len(numer_side))


def _graph_pair_weights(
    gold: SentimentGraph, pred: SentimentGraph, labelled: bool
) -> tuple[Fraction, Fraction] | None:
    """(precision weight, recall weight) if the pair is matchable, else None.

    Matchable means polarity agrees (labelled mode only) and every element
    that is non-empty on both sides shares at least one token.
    """
    if labelled and gold.polarity != pred.polarity:
        return None
    for element in GRAPH_ELEMENTS:
        g, p = getattr(gold, element), getattr(pred, element)
        if g and p and not (g & p):
            return None
    pw = sum(
        _overlap_weight(getattr(pred, e), getattr(gold, e)) for e in GRAPH_ELEMENTS
    ) / len(GRAPH_ELEMENTS)
    rw = sum(
        _overlap_weight(getattr(gold, e), getattr(pred, e)) for e in GRAPH_ELEMENTS
    ) / len(GRAPH_ELEMENTS)
    return pw, rw


def _greedy_matching(
    candidates: list[tuple[int, int, Fraction, Fraction]],
    n_gold: int,
    n_pred: int,
) -> tuple[Fraction, Fraction]:
    ordered = sorted(candidates, key=lambda c: (-(c[2] + c[3]), c[0], c[1]))
    gold_used = [False] * n_gold
    pred_used = [False] * n_pred
    pw_total = rw_total = Fraction(0)
    for gold_index, pred_index, pw, rw in ordered:
        if gold_used[gold_index] or pred_used[pred_index]:
            continue
        gold_used[gold_index] = pred_used[pred_index] = True
        pw_total += pw
        rw_total += rw
    return pw_total, rw_total


def _optimal_matching(
    candidates: list[tuple[int, int, Fraction, Fraction]],
    n_gold: int,
    n_pred: int,
) -> tuple[Fraction, Fraction]:
    """Exact search maximizing the summed pair weight over a pred bitmask."""
    if n_pred > _OPTIMAL_MATCHING_LIMIT:
        raise ConfigError(
            f"optimal matching supports at most {_OPTIMAL_MATCHING_LIMIT} "
            f"predicted graphs per sentence, got {n_pred}"
        )
    by_gold: list[list[tuple[int, Fraction, Fraction]]] = [[] for _ in range(n_gold)]
    for gold_index, pred_index, pw, rw in candidates:
        by_gold[gold_index].append((pred_index, pw, rw))
    # states: pred-usage bitmask -> best (pw + rw, pw, rw), compared
    # lexicographically so equal-weight assignments resolve toward higher
    # precision weight (which pins rw too, making results unique)
    states = {0: (Fraction(0), Fraction(0), Fraction(0))}
    for pairs in by_gold:
        updated = dict(states)
        for mask, (total, pw_total, rw_total) in states.items():
            for pred_index, pw, rw in pairs:
                bit = 1 << pred_index
                if mask & bit:
                    continue
                key = mask | bit
                value = (total + pw + rw, pw_total + pw, rw_total + rw)
                if key not in updated or value > updated[key]:
                    updated[key] = value
        states = updated
    best = max(states.values())
    return best[1], best[2]


def sentiment_graph_f1(
    gold: Sequence[Sequence[SentimentGraph]],
    pred: Sequence[Sequence[SentimentGraph]],
    labelled: bool,
    matching: str = "greedy",
) -> PRF:
    """Weighted-overlap graph PRF (polarity ignored when labelled=False)."""
    if matching not in ("greedy", "optimal"):
        raise ConfigError(f"matching must be greedy or optimal, got {matching!r}")
    _check_sentence_counts(len(gold), len(pred))
    assign = _greedy_matching if matching == "greedy" else _optimal_matching
    pw_total = rw_total = Fraction(0)
    n_pred = n_gold = 0
    for gold_graphs, pred_graphs in zip(gold, pred):
        n_gold += len(gold_graphs)
        n_pred += len(pred_graphs)
        candidates = []
        for gold_index, g in enumerate(gold_graphs):
            for pred_index, p in enumerate(pred_graphs):
                weights = _graph_pair_weights(g, p, labelled)
                if weights is not None:
                    candidates.append((gold_index, pred_index, *weights))
        if candidates:
            pw, rw = assign(candidates, len(gold_graphs), len(pred_graphs))
            pw_total += pw
            rw_total += rw
    return PRF(pw_total, Fraction(n_pred), Fraction(n_gold), recall_weight=rw_total)


def negation_metrics(
    gold: Sequence[Sequence[NegationInstance]],
    pred: Sequence[Sequence[NegationInstance]],
) -> dict[str, PRF]:
    """CUE (exact cue sets), ST (scope token union), FN (cue and scope exact)."""
    _check_sentence_counts(len(gold), len(pred))
    cue_tp = cue_pred = cue_gold = 0
    st_tp = st_pred = st_gold = 0
    fn_tp = 0
    for gold_instances, pred_instances in zip(gold, pred):
        g_cues = Counter(inst.cue for inst in gold_instances)
        p_cues = Counter(inst.cue for inst in pred_instances)
        cue_tp += sum((g_cues & p_cues).values())
        cue_pred += len(pred_instances)
        cue_gold += len(gold_instances)
        g_scope = frozenset().union(*(i.scope for i in gold_instances)) \
            if gold_instances else frozenset()
        p_scope = frozenset().union(*(i.scope for i in pred_instances)) \
            if pred_instances else frozenset()
        st_tp += len(g_scope & p_scope)
        st_pred += len(p_scope)
        st_gold += len(g_scope)
        g_full = Counter((inst.cue, inst.scope) for inst in gold_instances)
        p_full = Counter((inst.cue, inst.scope) for inst in pred_instances)
        fn_tp += sum((g_full & p_full).values())
    return {
        "CUE": PRF.from_counts(cue_tp, cue_pred, cue_gold),
        "ST": PRF.from_counts(st_tp, st_pred, st_gold),
        "FN": PRF.from_counts(fn_tp, cue_pred, cue_gold),
    }


@dataclass
class EvalReport:
    """Task metrics plus enough context to reproduce the run."""

    task: str
    metrics: dict[str, object]
    instance_counts: dict[str, int]
    per_class: dict[str, dict[str, object]] = field(default_factory=dict)
    options: dict[str, object] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @staticmethod
    def _plain(value: object) -> object:
        if isinstance(value, PRF):
            return {k: round(v, 4) for k, v in value.as_dict().items()}
        if isinstance(value, Fraction):
            return round(float(value), 4)
        if isinstance(value, float):
            return round(value, 4)
        return value

    def as_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "task": self.task,
            "metrics": {k: self._plain(v) for k, v in self.metrics.items()},
            "per_class": {
                group: {k: self._plain(v) for k, v in values.items()}
                for group, values in self.per_class.items()
            },
            "instance_counts": dict(self.instance_counts),
            "options": dict(self.options),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def format_table(self) -> str:
        width = max(len(name) for name in self.metrics)
        lines = [f"task: {self.task}"]
        for name, value in self.metrics.items():
            plain = self._plain(value)
            if isinstance(plain, dict):
                shown = f"{plain['f1']:.4f}  (P {plain['precision']:.4f} " \
                        f"R {plain['recall']:.4f})"
            else:
                shown = f"{plain:.4f}"
            lines.append(f"  {name:<{width}}  {shown}")
        return "\n".join(lines)


def _aligned_records(gold_records, pred_records, what: str):
    _check_sentence_counts(len(gold_records), len(pred_records))
    for index, (g, p) in enumerate(zip(gold_records, pred_records)):
        if g.sent_id != p.sent_id:
            raise AlignmentError(
                f"{what} record {index}: gold sent_id {g.sent_id!r} vs "
                f"predicted {p.sent_id!r}"
            )
        if g.tokens != p.tokens:
            raise AlignmentError(
                f"{what} record {g.sent_id}: token sequences differ"
            )


def _evaluate_pos(gold_lines, pred_lines, gold_loc, pred_loc, options):
    gold = parse_conllu(gold_lines, gold_loc)
    pred = parse_conllu(pred_lines, pred_loc)
    accuracy = pos_accuracy(gold, [s.upos for s in pred])
    return EvalReport(
        task="pos",
        metrics={"accuracy": accuracy},
        instance_counts={
            "sentences": len(gold),
            "tokens": sum(len(s.tokens) for s in gold),
        },
    )


def _evaluate_ner(gold_lines, pred_lines, gold_loc, pred_loc, options):
    gold = parse_conllu_entities(gold_lines, gold_loc)
    pred = parse_conllu_entities(pred_lines, pred_loc)
    micro, per_type = ner_strict_f1(
        [s.entities for s in gold], [s.entities for s in pred]
    )
    return EvalReport(
        task="ner",
        metrics={"strict_micro_f1": micro},
        per_class={"entity_types": per_type},
        instance_counts={
            "sentences": len(gold),
            "gold_entities": sum(len(s.entities) for s in gold),
        },
    )


def _parse_labelled_sentences(lines, location):
    labels = []
    ids = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as err:
            raise ParseError(f"{location}:{lineno}", f"bad JSON: {err}") from err
        if not isinstance(record, dict) or "label" not in record:
            raise ParseError(
                f"{location}:{lineno}", "record must be an object with a label"
            )
        ids.append(str(record.get("sent_id", lineno)))
        labels.append(record["label"])
    return ids, labels


def _evaluate_sent(gold_lines, pred_lines, gold_loc, pred_loc, options):
    gold_ids, gold_labels = _parse_labelled_sentences(gold_lines, gold_loc)
    pred_ids, pred_labels = _parse_labelled_sentences(pred_lines, pred_loc)
    _check_sentence_counts(len(gold_labels), len(pred_labels))
    for index, (g, p) in enumerate(zip(gold_ids, pred_ids)):
        if g != p:
            raise AlignmentError(
                f"record {index}: gold sent_id {g!r} vs predicted {p!r}"
            )
    macro, per_class = macro_f1(gold_labels, pred_labels, SENTENCE_CLASSES)
    return EvalReport(
        task="sent",
        metrics={"macro_f1": macro},
        per_class={"labels": per_class},
        instance_counts={"sentences": len(gold_labels)},
    )


def _evaluate_fgsa(gold_lines, pred_lines, gold_loc, pred_loc, options):
    matching = options.get("matching", "greedy")
    gold_records = parse_sentiment_graphs(gold_lines, gold_loc)
    pred_records = parse_sentiment_graphs(pred_lines, pred_loc)
    _aligned_records(gold_records, pred_records, "sentiment")
    gold = [list(r.graphs) for r in gold_records]
    pred = [list(r.graphs) for r in pred_records]
    metrics = {
        "holder_f1": span_token_f1(gold, pred, "holder"),
        "target_f1": span_token_f1(gold, pred, "target"),
        "expression_f1": span_token_f1(gold, pred, "expression"),
        "targeted_f1": targeted_f1(gold, pred),
        "uf1": graph_edge_f1(gold, pred, labelled=False),
        "lf1": graph_edge_f1(gold, pred, labelled=True),
        "nsf1": sentiment_graph_f1(gold, pred, labelled=False, matching=matching),
        "sf1": sentiment_graph_f1(gold, pred, labelled=True, matching=matching),
    }
    return EvalReport(
        task="fgsa",
        metrics=metrics,
        instance_counts={
            "sentences": len(gold),
            "gold_graphs": sum(len(g) for g in gold),
            "predicted_graphs": sum(len(p) for p in pred),
        },
        options={"matching": matching},
    )


def _evaluate_neg(gold_lines, pred_lines, gold_loc, pred_loc, options):
    gold_records = parse_negation_records(gold_lines, gold_loc)
    pred_records = parse_negation_records(pred_lines, pred_loc)
    _aligned_records(gold_records, pred_records, "negation")
    gold = [list(r.negations) for r in gold_records]
    pred = [list(r.negations) for r in pred_records]
    return EvalReport(
        task="neg",
        metrics=negation_metrics(gold, pred),
        instance_counts={
            "sentences": len(gold),
            "gold_negations": sum(len(g) for g in gold),
        },
    )


_TASK_EVALUATORS: dict[str, Callable] = {
    "pos": _evaluate_pos,
    "ner": _evaluate_ner,
    "sent": _evaluate_sent,
    "fgsa": _evaluate_fgsa,
    "neg": _evaluate_neg,
}


def evaluate_task(
    task: str,
    gold_lines: Iterable[str],
    pred_lines: Iterable[str],
    *,
    gold_location: str = "<gold>",
    pred_location: str = "<pred>",
    **options,
) -> EvalReport:
    """Parse gold and predicted files for a task and score them."""
    if task not in _TASK_EVALUATORS:
        raise ConfigError(f"unknown task {task!r} (choose from {EVALUATION_TASKS})")
    return _TASK_EVALUATORS[task](
        list(gold_lines), list(pred_lines), gold_location, pred_location, options
    )
