#!/usr/bin/env python3
"""Evaluation demo: synthetic gold data plus noisy predictions for all
five benchmark tasks, scored through the command-line interface.

For each task the script writes a gold file and a prediction file derived
from it by random corruption (--noise controls how much), then runs the
evaluator and prints its table. Reports land in --workdir as JSON.
"""

import argparse
import json
import random
import sys
from pathlib import Path

from lmtk.cli import main as lmtk
from lmtk.taskdata import NER_TYPES, UPOS_TAGS, encode_bio, EntitySpan

WORDS = ["fjorden", "ligger", "stille", "i", "dag", "og", "byen", "våkner",
         "sakte", "under", "fjellet", "mens", "regnet", "faller"]
TAG_CHOICES = sorted(UPOS_TAGS)
TYPE_CHOICES = sorted(NER_TYPES)


def pos_files(work: Path, rng: random.Random, noise: float):
    gold_rows, pred_rows = [], []
    for _ in range(40):
        n = rng.randint(3, 9)
        tokens = [rng.choice(WORDS) for _ in range(n)]
        tags = [rng.choice(TAG_CHOICES) for _ in range(n)]
        noisy = [rng.choice(TAG_CHOICES) if rng.random() < noise else tag
                 for tag in tags]
        for block, store in ((tags, gold_rows), (noisy, pred_rows)):
            store.extend(
                f"{i + 1}\t{tok}\t{tok}\t{tag}\t_\t_\t0\tdep\t_\t_"
                for i, (tok, tag) in enumerate(zip(tokens, block))
            )
            store.append("")
    gold, pred = work / "pos-gold.conllu", work / "pos-pred.conllu"
    gold.write_text("\n".join(gold_rows) + "\n", encoding="utf-8")
    pred.write_text("\n".join(pred_rows) + "\n", encoding="utf-8")
    return gold, pred


def ner_files(work: Path, rng: random.Random, noise: float):
    gold_rows, pred_rows = [], []
    for _ in range(40):
        n = rng.randint(4, 9)
        tokens = [rng.choice(WORDS) for _ in range(n)]
        spans = []
        if rng.random() < 0.8:
            start = rng.randrange(n - 1)
            spans.append(EntitySpan(start, start + rng.randint(0, 1),
                                    rng.choice(TYPE_CHOICES)))
        labels = encode_bio(spans, n)
        if spans and rng.random() < noise:
            moved = [EntitySpan(min(s.start + 1, n - 1), min(s.end + 1, n - 1),
                                s.label) for s in spans]
            noisy = encode_bio(moved, n)
        else:
            noisy = labels
        for block, store in ((labels, gold_rows), (noisy, pred_rows)):
            store.extend(
                f"{i + 1}\t{tok}\t{tok}\tNOUN\t_\t_\t0\tdep\t_\tname={tag}"
                for i, (tok, tag) in enumerate(zip(tokens, block))
            )
            store.append("")
    gold, pred = work / "ner-gold.conllu", work / "ner-pred.conllu"
    gold.write_text("\n".join(gold_rows) + "\n", encoding="utf-8")
    pred.write_text("\n".join(pred_rows) + "\n", encoding="utf-8")
    return gold, pred


def sent_files(work: Path, rng: random.Random, noise: float):
    gold_lines, pred_lines = [], []
    for i in range(120):
        label = rng.choice(["positive", "negative"])
        flipped = ("negative" if label == "positive" else "positive")
        pred = flipped if rng.random() < noise else label
        gold_lines.append(json.dumps({"sent_id": f"s{i}", "label": label}))
        pred_lines.append(json.dumps({"sent_id": f"s{i}", "label": pred}))
    gold, pred = work / "sent-gold.jsonl", work / "sent-pred.jsonl"
    gold.write_text("\n".join(gold_lines) + "\n", encoding="utf-8")
    pred.write_text("\n".join(pred_lines) + "\n", encoding="utf-8")
    return gold, pred


def fgsa_files(work: Path, rng: random.Random, noise: float):
    gold_lines, pred_lines = [], []
    for i in range(60):
        n = rng.randint(5, 10)
        tokens = [rng.choice(WORDS) for _ in range(n)]
        record = {"sent_id": f"s{i}", "text": " ".join(tokens),
                  "tokens": tokens, "opinions": []}
        pred_record = dict(record, opinions=[])
        if rng.random() < 0.85:
            expression = [rng.randrange(n)]
            target = sorted(rng.sample(range(n), rng.randint(0, 2)))
            opinion = {
                "holder": [], "target": target, "expression": expression,
                "polarity": rng.choice(["positive", "negative"]),
            }
            record["opinions"].append(opinion)
            noisy = dict(opinion)
            if rng.random() < noise and target:
                noisy["target"] = target[:-1]
            if rng.random() < noise / 2:
                noisy["polarity"] = ("negative"
                                     if opinion["polarity"] == "positive"
                                     else "positive")
            pred_record["opinions"].append(noisy)
        gold_lines.append(json.dumps(record, ensure_ascii=False))
        pred_lines.append(json.dumps(pred_record, ensure_ascii=False))
    gold, pred = work / "fgsa-gold.jsonl", work / "fgsa-pred.jsonl"
    gold.write_text("\n".join(gold_lines) + "\n", encoding="utf-8")
    pred.write_text("\n".join(pred_lines) + "\n", encoding="utf-8")
    return gold, pred


def neg_files(work: Path, rng: random.Random, noise: float):
    gold_lines, pred_lines = [], []
    for i in range(60):
        n = rng.randint(5, 10)
        tokens = [rng.choice(WORDS) for _ in range(n)]
        record = {"sent_id": f"n{i}", "text": " ".join(tokens),
                  "tokens": tokens, "negations": []}
        pred_record = dict(record, negations=[])
        if rng.random() < 0.7:
            cue = [rng.randrange(n)]
            scope = sorted(set(rng.sample(range(n), rng.randint(1, 3))) -
                           set(cue))
            record["negations"].append({"cue": cue, "scope": scope})
            noisy_scope = (scope[:-1] if rng.random() < noise and scope
                           else scope)
            pred_record["negations"].append({"cue": cue, "scope": noisy_scope})
        gold_lines.append(json.dumps(record, ensure_ascii=False))
        pred_lines.append(json.dumps(pred_record, ensure_ascii=False))
    gold, pred = work / "neg-gold.jsonl", work / "neg-pred.jsonl"
    gold.write_text("\n".join(gold_lines) + "\n", encoding="utf-8")
    pred.write_text("\n".join(pred_lines) + "\n", encoding="utf-8")
    return gold, pred


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="eval-demo")
    parser.add_argument("--seed", type=int, default=29)
    parser.add_argument("--noise", type=float, default=0.2,
                        help="corruption probability per prediction")
    args = parser.parse_args()

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    builders = {
        "pos": pos_files,
        "ner": ner_files,
        "sent": sent_files,
        "fgsa": fgsa_files,
        "neg": neg_files,
    }
    for task, build in builders.items():
        gold, pred = build(work, rng, args.noise)
        report = work / f"{task}-report.json"
        print(f"== {task}")
        code = lmtk(["evaluate", "--task", task, "--gold", str(gold),
                     "--pred", str(pred), "--out", str(report)])
        if code != 0:
            print(f"evaluation failed for {task}", file=sys.stderr)
            return code
        print()
    print(f"== done; reports in {work}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
