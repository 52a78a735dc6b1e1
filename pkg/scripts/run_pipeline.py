#!/usr/bin/env python3
"""End-to-end pipeline demo on a synthetic corpus.

Synthesizes raw source text, then drives the command-line interface
through preprocessing, vocabulary induction, wordpiece conversion,
vocabulary comparison, pretraining-instance generation and schedule
arithmetic. Everything lands in --workdir and is reproducible from
--seed: run it twice and compare the manifests.
"""

import argparse
import json
import random
import sys
from pathlib import Path

from lmtk.cli import main as lmtk

SYLLABLES = [
    "ba", "do", "ki", "lu", "men", "tor", "gra", "vin",
    "sol", "ne", "ras", "fja", "lom", "sti", "ek", "hav",
]


def synthesize_raw(path: Path, n_sentences: int, seed: int) -> None:
    """One document per line, roughly 20 sentences each."""
    rng = random.Random(seed)
    documents, current = [], []
    for _ in range(n_sentences):
        words = []
        for _ in range(rng.randint(3, 9)):
            n_syll = rng.choice([1, 2, 2, 3])
            words.append("".join(rng.choice(SYLLABLES) for _ in range(n_syll)))
        # word-tokenized spacing on purpose: preprocessing repairs it
        current.append(" ".join(words) + " .")
        if len(current) >= 20:
            documents.append(" ".join(current))
            current = []
    if current:
        documents.append(" ".join(current))
    path.write_text("\n".join(documents) + "\n", encoding="utf-8")


def run(argv) -> int:
    code = lmtk(argv)
    if code != 0:
        print(f"step failed with exit code {code}: {' '.join(argv)}",
              file=sys.stderr)
        raise SystemExit(code)
    return code


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="pipeline-demo")
    parser.add_argument("--sentences", type=int, default=2_000)
    parser.add_argument("--vocab-size", type=int, default=300)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    raw = work / "raw.txt"
    corpus = work / "corpus.txt"
    model = work / "unigram.tsv"
    vocab = work / "vocab.txt"
    baseline_model = work / "baseline.tsv"
    baseline = work / "baseline-vocab.txt"
    comparison = work / "comparison.json"
    instances = work / "instances.bin"

    print(f"== synthesizing {args.sentences} sentences")
    synthesize_raw(raw, args.sentences, args.seed)

    print("== preprocess")
    run(["preprocess", "--input", str(raw), "--output", str(corpus),
         "--delimiter", r"\n"])

    print("== vocab-train (full size)")
    run(["vocab-train", "--input", str(corpus), "--output", str(model),
         "--size", str(args.vocab_size)])
    print("== vocab-train (small baseline)")
    run(["vocab-train", "--input", str(corpus), "--output",
         str(baseline_model), "--size", "40"])

    print("== vocab-convert")
    run(["vocab-convert", "--model", str(model), "--output", str(vocab),
         "--size", str(args.vocab_size + 50)])
    run(["vocab-convert", "--model", str(baseline_model), "--output",
         str(baseline), "--size", "90"])

    print("== analyze: full vocabulary against the small baseline")
    run(["analyze", "--vocab-a", str(baseline), "--vocab-b", str(vocab),
         "--input", str(corpus), "--out", str(comparison)])
    report = json.loads(comparison.read_text(encoding="utf-8"))
    print(f"   baseline fertility {report['a']['fertility']:.3f}, "
          f"full fertility {report['b']['fertility']:.3f}, "
          f"lower: vocabulary {report['lower_fertility']}")

    print("== pretrain-data")
    run(["pretrain-data", "--input", str(corpus), "--vocab", str(vocab),
         "--output", str(instances), "--seed", str(args.seed),
         "--max-seq-len", "128"])

    print("== schedule for one epoch over this corpus")
    n_sentences = sum(
        1 for line in corpus.read_text(encoding="utf-8").splitlines() if line)
    run(["schedule", "--sentences", str(n_sentences), "--batch", "48",
         "--devices", "16", "--epochs", "1"])

    print(f"== done; artifacts and manifests in {work}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
