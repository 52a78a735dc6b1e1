"""Independent reference implementations of every metric, plus random
instance generators.

These deliberately avoid the library's accumulation strategy: plain set
arithmetic, exhaustive recursion for exact matching, and full enumeration
of one-to-one assignments for the weighted graph matching. Slow but
self-evidently correct on small instances.
"""

import itertools
import random
from fractions import Fraction

from lmtk.taskdata import (
    EntitySpan,
    NegationInstance,
    SentimentGraph,
    TaggedSentence,
)

POS, NEG = "positive", "negative"


def prf_from(tp, n_pred, n_gold):
    if n_pred == 0:
        p = Fraction(1) if n_gold == 0 else Fraction(0)
    else:
        p = Fraction(tp, n_pred)
    if n_gold == 0:
        r = Fraction(1) if n_pred == 0 else Fraction(0)
    else:
        r = Fraction(tp, n_gold) if not isinstance(tp, Fraction) else tp / n_gold
    f = 2 * p * r / (p + r) if p + r else Fraction(0)
    return p, r, f


def oracle_pos_accuracy(gold, pred):
    correct = total = 0
    for sentence, tags in zip(gold, pred):
        for g, p in zip(sentence.upos, tags):
            total += 1
            if g == p:
                correct += 1
    return Fraction(correct, total) if total else Fraction(1)


def oracle_ner(gold, pred):
    tp = n_pred = n_gold = 0
    for g, p in zip(gold, pred):
        tp += len(set(g) & set(p))
        n_pred += len(set(p))
        n_gold += len(set(g))
    return prf_from(tp, n_pred, n_gold)


def oracle_macro(gold, pred, classes):
    total = Fraction(0)
    for cls in classes:
        tp = sum(1 for g, p in zip(gold, pred) if g == p == cls)
        _, _, f = prf_from(tp, sum(1 for p in pred if p == cls),
                           sum(1 for g in gold if g == cls))
        total += f
    return total / len(classes)


def oracle_span(gold, pred, element):
    tp = n_pred = n_gold = 0
    for g_graphs, p_graphs in zip(gold, pred):
        g = set().union(*(getattr(x, element) for x in g_graphs)) \
            if g_graphs else set()
        p = set().union(*(getattr(x, element) for x in p_graphs)) \
            if p_graphs else set()
        tp += len(g & p)
        n_pred += len(p)
        n_gold += len(g)
    return prf_from(tp, n_pred, n_gold)


def max_exact_matching(golds, preds, equal):
    """Largest one-to-one matching under an equality predicate, by recursion."""
    best = 0
    n = len(preds)

    def recurse(gi, used, count):
        nonlocal best
        if gi == len(golds):
            best = max(best, count)
            return
        recurse(gi + 1, used, count)
        for pi in range(n):
            if not used[pi] and equal(golds[gi], preds[pi]):
                used[pi] = True
                recurse(gi + 1, used, count + 1)
                used[pi] = False

    recurse(0, [False] * n, 0)
    return best


def oracle_targeted(gold, pred):
    tp = n_pred = n_gold = 0
    for g_graphs, p_graphs in zip(gold, pred):
        tp += max_exact_matching(
            list(g_graphs), list(p_graphs),
            lambda g, p: g.target == p.target and g.polarity == p.polarity,
        )
        n_pred += len(p_graphs)
        n_gold += len(g_graphs)
    return prf_from(tp, n_pred, n_gold)


def oracle_arcs(graphs, labelled):
    arcs = set()
    for g in graphs:
        root = min(g.expression)
        arcs.add(("root", root, g.polarity if labelled else ""))
        if g.target:
            arcs.add((root, min(g.target), "target" if labelled else ""))
        if g.holder:
            arcs.add((root, min(g.holder), "holder" if labelled else ""))
    return arcs


def oracle_edge(gold, pred, labelled):
    tp = n_pred = n_gold = 0
    for g_graphs, p_graphs in zip(gold, pred):
        g, p = oracle_arcs(g_graphs, labelled), oracle_arcs(p_graphs, labelled)
        tp += len(g & p)
        n_pred += len(p)
        n_gold += len(g)
    return prf_from(tp, n_pred, n_gold)


def pair_weights(g, p, labelled):
    if labelled and g.polarity != p.polarity:
        return None
    elements = ("holder", "target", "expression")
    for e in elements:
        gs, ps = getattr(g, e), getattr(p, e)
        if gs and ps and not gs & ps:
            return None

    def w(num, other):
        if not num:
            return Fraction(1) if not other else Fraction(0)
        return Fraction(len(num & other), len(num))

    pw = sum(w(getattr(p, e), getattr(g, e)) for e in elements) / 3
    rw = sum(w(getattr(g, e), getattr(p, e)) for e in elements) / 3
    return pw, rw


def oracle_graph_f1(gold, pred, labelled):
    """Exhaustive enumeration of one-to-one matchings, maximizing summed
    weight with ties broken toward higher precision weight."""
    pw_total = rw_total = Fraction(0)
    n_pred = n_gold = 0
    for g_graphs, p_graphs in zip(gold, pred):
        n_pred += len(p_graphs)
        n_gold += len(g_graphs)
        pairs = {}
        for gi, g in enumerate(g_graphs):
            for pi, p in enumerate(p_graphs):
                got = pair_weights(g, p, labelled)
                if got is not None:
                    pairs[gi, pi] = got
        best = (Fraction(0), Fraction(0), Fraction(0))
        gold_indices = range(len(g_graphs))
        pred_indices = range(len(p_graphs))
        for size in range(min(len(g_graphs), len(p_graphs)) + 1):
            for g_subset in itertools.combinations(gold_indices, size):
                for p_perm in itertools.permutations(pred_indices, size):
                    if any((gi, pi) not in pairs
                           for gi, pi in zip(g_subset, p_perm)):
                        continue
                    pw = sum((pairs[gi, pi][0]
                              for gi, pi in zip(g_subset, p_perm)), Fraction(0))
                    rw = sum((pairs[gi, pi][1]
                              for gi, pi in zip(g_subset, p_perm)), Fraction(0))
                    candidate = (pw + rw, pw, rw)
                    if candidate > best:
                        best = candidate
        pw_total += best[1]
        rw_total += best[2]
    if n_pred == 0:
        p = Fraction(1) if n_gold == 0 else Fraction(0)
    else:
        p = pw_total / n_pred
    if n_gold == 0:
        r = Fraction(1) if n_pred == 0 else Fraction(0)
    else:
        r = rw_total / n_gold
    f = 2 * p * r / (p + r) if p + r else Fraction(0)
    return p, r, f


def oracle_negation(gold, pred):
    cue_tp = fn_tp = n_pred = n_gold = 0
    st_tp = st_pred = st_gold = 0
    for g_insts, p_insts in zip(gold, pred):
        cue_tp += max_exact_matching(
            list(g_insts), list(p_insts), lambda g, p: g.cue == p.cue
        )
        fn_tp += max_exact_matching(
            list(g_insts), list(p_insts),
            lambda g, p: g.cue == p.cue and g.scope == p.scope,
        )
        n_pred += len(p_insts)
        n_gold += len(g_insts)
        g_scope = set().union(*(i.scope for i in g_insts)) if g_insts else set()
        p_scope = set().union(*(i.scope for i in p_insts)) if p_insts else set()
        st_tp += len(g_scope & p_scope)
        st_pred += len(p_scope)
        st_gold += len(g_scope)
    return {
        "CUE": prf_from(cue_tp, n_pred, n_gold),
        "ST": prf_from(st_tp, st_pred, st_gold),
        "FN": prf_from(fn_tp, n_pred, n_gold),
    }


# ----------------------------------------------------- random generators


def random_graph(rng, n_tokens):
    def maybe_span(max_len):
        if rng.random() < 0.35:
            return frozenset()
        size = rng.randint(1, max_len)
        return frozenset(rng.sample(range(n_tokens), size))

    return SentimentGraph(
        holder=maybe_span(2),
        target=maybe_span(3),
        expression=frozenset(rng.sample(range(n_tokens), rng.randint(1, 3))),
        polarity=rng.choice([POS, NEG]),
    )


def random_graph_corpus(rng):
    gold, pred = [], []
    for _ in range(rng.randint(1, 4)):
        n_tokens = rng.randint(4, 9)
        gold.append([random_graph(rng, n_tokens)
                     for _ in range(rng.randint(0, 4))])
        pred.append([random_graph(rng, n_tokens)
                     for _ in range(rng.randint(0, 4))])
    return gold, pred


def random_negation_corpus(rng):
    gold, pred = [], []
    for _ in range(rng.randint(1, 4)):
        n_tokens = rng.randint(4, 9)

        def instances():
            out = []
            for _ in range(rng.randint(0, 3)):
                cue = frozenset(rng.sample(range(n_tokens), rng.randint(1, 2)))
                scope_size = rng.randint(0, 4)
                scope = frozenset(rng.sample(range(n_tokens), scope_size))
                out.append(NegationInstance(cue, scope))
            return out

        gold.append(instances())
        pred.append(instances())
    return gold, pred


def random_entity_corpus(rng):
    labels = ["PER", "ORG", "LOC", "GPE-LOC"]

    def spans():
        out = []
        cursor = 0
        for _ in range(rng.randint(0, 4)):
            start = cursor + rng.randint(0, 2)
            end = start + rng.randint(0, 2)
            out.append(EntitySpan(start, end, rng.choice(labels)))
            cursor = end + 1
        return out

    gold = [spans() for _ in range(rng.randint(1, 4))]
    pred = [spans() for _ in gold]
    return gold, pred


def random_tag_corpus(rng, tags=("NOUN", "VERB", "ADJ")):
    gold, pred = [], []
    for _ in range(rng.randint(1, 4)):
        n = rng.randint(1, 6)
        gold.append(TaggedSentence(
            tuple("w" * (i + 1) for i in range(n)),
            tuple(rng.choice(tags) for _ in range(n)),
        ))
        pred.append([rng.choice(tags) for _ in range(n)])
    return gold, pred
