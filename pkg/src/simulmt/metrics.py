"""Latency and quality metrics over completed sessions."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import SessionTrace, WordLevelPolicy
from .errors import IncompleteInput, IncompleteTrace, InvalidAlignment, ShapeMismatch

Alignment = frozenset  # of (source_index, target_index), 0-indexed


# ---------------------------------------------------------------------------
# latency


def _lagging(delays: Sequence[float], g: Sequence[int], J: int, I: int, unit: float) -> float:
    r = I / J
    tau = next((i for i, g_i in enumerate(g, start=1) if g_i >= J), I)
    return sum(delays[i - 1] - (i - 1) / r * unit for i in range(1, tau + 1)) / tau


def average_lagging(g: WordLevelPolicy | Sequence[int], J: int, I: int | None = None) -> float:
    """Average lagging in source words.

    AL = 1/tau * sum_{i<=tau} (g_i - (i-1)/r), r = I/J, tau the first target
    index whose g_i reaches J (I when none does).
    """
    g = tuple(g.g if isinstance(g, WordLevelPolicy) else g)
    I = len(g) if I is None else I
    if I != len(g):
        raise ShapeMismatch(f"policy length {len(g)} != I={I}")
    if I == 0:
        raise IncompleteTrace("no target words: lagging is undefined")
    WordLevelPolicy(g, J)
    return _lagging(g, g, J, I, 1.0)


def computation_aware_al(trace: SessionTrace, J: int | None = None) -> float:
    """Average lagging in milliseconds of wall-clock emission time.

    The delay of each target word is its emission time since session start,
    so it includes both model compute and waiting for source words. The
    ideal diagonal advances one source-word duration per 1/r target words,
    where the source duration is the arrival time of the last source word.
    """
    J = trace.J if J is None else J
    times, arrivals = trace.emission_times_ms, trace.source_arrival_times_ms
    if times is None or arrivals is None or len(times) != len(trace.translation) or len(arrivals) != J:
        raise IncompleteTrace("trace lacks emission or arrival timestamps")
    if not times:
        raise IncompleteTrace("no target words: lagging is undefined")
    unit = arrivals[-1] / J
    return _lagging(times, trace.realized_policy, J, len(times), unit)


# ---------------------------------------------------------------------------
# BLEU


def _ngrams(words: Sequence[str], n: int) -> Counter:
    return Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))


def bleu_stats(hypotheses, references, max_order: int = 4):
    hyps, refs = list(hypotheses), list(references)
    if len(hyps) != len(refs):
        raise ShapeMismatch(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if not refs:
        raise IncompleteInput("no references")
    correct = [0] * max_order
    total = [0] * max_order
    sys_len = ref_len = 0
    for hyp, ref in zip(hyps, refs):
        sys_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            h, r = _ngrams(hyp, n), _ngrams(ref, n)
            correct[n - 1] += sum((h & r).values())
            total[n - 1] += max(len(hyp) - n + 1, 0)
    return correct, total, sys_len, ref_len


def corpus_bleu(hypotheses, references, max_order: int = 4, floor: float = 0.1) -> float:
    """Case-sensitive corpus BLEU over pre-tokenized word sequences, 0..100.

    Orders with zero matches get precision floor/total; a corpus with no
    matches at all scores 0.
    """
    correct, total, sys_len, ref_len = bleu_stats(hypotheses, references, max_order)
    if not any(correct):
        return 0.0
    log_p = 0.0
    for c, t in zip(correct, total):
        if t == 0:
            return 0.0
        log_p += math.log((c if c else floor) / t)
    bp = 1.0 if sys_len >= ref_len else math.exp(1 - ref_len / sys_len)
    return 100.0 * bp * math.exp(log_p / max_order)


# ---------------------------------------------------------------------------
# alignments


def parse_pharaoh(line: str) -> Alignment:
    """``"0-0 1-2 ..."`` -> {(0, 0), (1, 2), ...}; source index first."""
    pairs = set()
    for item in line.split():
        s, sep, t = item.partition("-")
        if not sep:
            raise InvalidAlignment(f"malformed alignment link {item!r}")
        try:
            pairs.add((int(s), int(t)))
        except ValueError:
            raise InvalidAlignment(f"malformed alignment link {item!r}") from None
    return frozenset(pairs)


def read_pharaoh(path) -> list[Alignment]:
    with open(path, encoding="utf-8") as f:
        return [parse_pharaoh(line) for line in f]


def check_alignment(alignment: Iterable[tuple[int, int]], J: int | None, I: int) -> None:
    for s, t in alignment:
        if s < 0 or t < 0 or t >= I or (J is not None and s >= J):
            raise InvalidAlignment(f"link {s}-{t} outside source length {J}, target length {I}")


def hallucination_rate(translations, alignments, source_lengths=None) -> float:
    """Share of target words without any alignment link, pooled over the corpus."""
    translations, alignments = list(translations), list(alignments)
    if len(translations) != len(alignments):
        raise ShapeMismatch(f"{len(translations)} translations vs {len(alignments)} alignments")
    lengths = list(source_lengths) if source_lengths is not None else [None] * len(translations)
    total = unaligned = 0
    for words, links, J in zip(translations, alignments, lengths):
        I = len(words)
        check_alignment(links, J, I)
        covered = {t for _, t in links}
        total += I
        unaligned += I - len(covered)
    if total == 0:
        raise IncompleteInput("no target words to score")
    return unaligned / total


def crossing_stats(alignment: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """Number of crossing link pairs and the largest source jump among them.

    Links (s, t) and (s', t') cross when t < t' but s > s'.
    """
    links = sorted(alignment, key=lambda p: (p[1], p[0]))
    count = dist = 0
    for a in range(len(links)):
        s, t = links[a]
        for b in range(a + 1, len(links)):
            s2, t2 = links[b]
            if t < t2 and s > s2:
                count += 1
                dist = max(dist, s - s2)
    return count, dist


@dataclass(frozen=True)
class Partition:
    labels: list[str]
    counts: list[int]
    distances: list[int]

    def indices(self, label: str) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == label]


LEVELS = ("Easy", "Medium", "Hard")


def difficulty_partition(pairs, alignments) -> Partition:
    """Split a corpus into equal thirds by reordering difficulty.

    ``pairs`` holds SentencePair objects or plain (J, I) length tuples,
    used to bound-check the alignments.

    Sentences are ranked by (crossing count, largest crossing distance,
    corpus position); the lowest third is Easy and the highest Hard. When
    the size is not divisible by three, earlier buckets take the extra items.
    """
    pairs, alignments = list(pairs), list(alignments)
    if len(alignments) != len(pairs) or any(a is None for a in alignments):
        raise IncompleteInput("every sentence pair needs an alignment")
    counts, dists = [], []
    for pair, links in zip(pairs, alignments):
        J, I = pair if isinstance(pair, tuple) else (pair.J, pair.I)
        check_alignment(links, J, I)
        c, d = crossing_stats(links)
        counts.append(c)
        dists.append(d)
    order = sorted(range(len(pairs)), key=lambda i: (counts[i], dists[i], i))
    n = len(order)
    base, extra = divmod(n, 3)
    sizes = [base + (1 if b < extra else 0) for b in range(3)]
    labels = [""] * n
    pos = 0
    for level, size in zip(LEVELS, sizes):
        for i in order[pos : pos + size]:
            labels[i] = level
        pos += size
    return Partition(labels, counts, dists)
