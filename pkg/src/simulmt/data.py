"""Prefix-pair construction for wait-k training data and SFT dataset emission."""

from __future__ import annotations

import json
import random
from typing import Iterable, Sequence

from .core import SentencePair
from .errors import InvalidParameter
from .translator import PromptTemplate

SFT_RECORD_SCHEMA = {
    "type": "object",
    "properties": {
        "prompt": {"type": "string", "minLength": 1},
        "completion": {"type": "string", "minLength": 1},
    },
    "required": ["prompt", "completion"],
    "additionalProperties": False,
}

MODES = ("full_sentence", "waitk_prefix")


def _words(x) -> tuple[list[str], list[str]]:
    if isinstance(x, SentencePair):
        return list(x.source_words), list(x.target_words)
    src, tgt = x
    return list(src), list(tgt)


def prefix_lengths(J: int, I: int, k: int, j: int) -> tuple[int, int]:
    """Source/target prefix lengths for a drawn source cut j (k <= j <= J)."""
    return j, min(j - k + 1, I)


def build_prefix_pair(pair, k: int, rng_seed) -> tuple[list[str], list[str]]:
    """Cut a sentence pair down to a source prefix and its wait-k target prefix.

    If k >= J the pair is returned whole. Otherwise j is drawn uniformly
    from [k, J] and the pair becomes (x[:j], y[:min(j - k + 1, I)]).
    """
    if not isinstance(k, int) or k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k!r}")
    src, tgt = _words(pair)
    J, I = len(src), len(tgt)
    if k >= J:
        return src, tgt
    j = random.Random(rng_seed).randint(k, J)
    j, i = prefix_lengths(J, I, k, j)
    return src[:j], tgt[:i]


def _record_seed(seed, index: int) -> str:
    # string seeds hash deterministically across processes
    return f"{seed}:{index}"


def emit_sft_dataset(
    corpus: Sequence,
    template: PromptTemplate,
    instruction: str,
    mode: str = "full_sentence",
    k: int | None = None,
    sample_count: int | None = None,
    rng_seed=0,
) -> list[dict]:
    """Prompt/completion records for fine-tuning the translation agent.

    ``sample_count`` pairs are drawn without replacement (all when None) and
    kept in corpus order. In ``waitk_prefix`` mode each drawn pair is cut
    once by :func:`build_prefix_pair` with a seed derived from its index.
    """
    if mode not in MODES:
        raise InvalidParameter(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "waitk_prefix" and (k is None or k < 1):
        raise InvalidParameter("waitk_prefix mode needs k >= 1")
    n = len(corpus)
    if sample_count is None:
        sample_count = n
    if sample_count < 0 or sample_count > n:
        raise InvalidParameter(f"cannot sample {sample_count} of {n} pairs without replacement")
    chosen = sorted(random.Random(rng_seed).sample(range(n), sample_count))

    records = []
    for idx in chosen:
        src, tgt = _words(corpus[idx])
        if mode == "waitk_prefix":
            src, tgt = build_prefix_pair((src, tgt), k, _record_seed(rng_seed, idx))
        records.append({"prompt": template.render(instruction, src, []), "completion": " ".join(tgt)})
    return records


def dump_jsonl(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]
