"""Toolkit for building and benchmarking Norwegian language models.

Submodules cover the pipeline end to end: corpus preparation (corpus),
subword vocabulary induction (unigram, vocab), tokenization (wordpiece),
pretraining instance generation and schedule arithmetic (pretrain),
benchmark dataset handling (taskdata) and evaluation metrics (metrics).
"""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
