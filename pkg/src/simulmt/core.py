"""Domain types: sentence pairs with subword maps, policies, memory, traces."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Iterable, Protocol, Sequence

from .errors import EmptyInput, InvalidParameter, InvalidPolicy, MemoryFinished, ShapeMismatch, TokenizerFault


class Action(str, enum.Enum):
    READ = "READ"
    WRITE = "WRITE"


# ---------------------------------------------------------------------------
# tokenizers


class Tokenizer(Protocol):
    def tokenize(self, word: str) -> list[str]: ...


class IdentityTokenizer:
    """Every word is its own single token."""

    def tokenize(self, word: str) -> list[str]:
        return [word]


class RuleTokenizer:
    """Deterministic splitter driven by an explicit word -> pieces table.

    Words missing from the table fall back to ``max_chars``-sized chunks
    when ``max_chars`` is set, otherwise they stay whole.
    """

    def __init__(self, rules: dict[str, Sequence[str]] | None = None, max_chars: int | None = None):
        if max_chars is not None and max_chars < 1:
            raise InvalidParameter(f"max_chars must be >= 1, got {max_chars}")
        self.rules = {w: list(p) for w, p in (rules or {}).items()}
        self.max_chars = max_chars

    def tokenize(self, word: str) -> list[str]:
        if word in self.rules:
            return list(self.rules[word])
        if self.max_chars is None:
            return [word]
        return [word[i : i + self.max_chars] for i in range(0, len(word), self.max_chars)]


def _segment(words: Sequence[str], tokenizer: Tokenizer) -> tuple[list[str], list[int]]:
    tokens: list[str] = []
    flags: list[int] = []
    for word in words:
        pieces = tokenizer.tokenize(word)
        if not pieces:
            raise TokenizerFault(f"tokenizer produced no tokens for {word!r}")
        if "".join(pieces) != word:
            raise TokenizerFault(f"tokens {pieces!r} do not re-join to {word!r}")
        tokens.extend(pieces)
        flags.extend([0] * (len(pieces) - 1) + [1])
    return tokens, flags


def join_tokens(tokens: Sequence[str], boundaries: Sequence[int]) -> list[str]:
    """Group tokens into words using the last-token-of-word flags.

    Tokens after the final set flag belong to no word and are dropped.
    """
    words, buf = [], []
    for tok, flag in zip(tokens, boundaries):
        buf.append(tok)
        if flag:
            words.append("".join(buf))
            buf = []
    return words


# ---------------------------------------------------------------------------
# sentence pairs


@dataclass(frozen=True)
class SentencePair:
    source_words: tuple[str, ...]
    target_words: tuple[str, ...]
    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    source_boundaries: tuple[int, ...]
    target_boundaries: tuple[int, ...]

    def __post_init__(self):
        if not self.source_words:
            raise EmptyInput("source sentence has no words")
        for side in ("source", "target"):
            tokens = getattr(self, f"{side}_tokens")
            flags = getattr(self, f"{side}_boundaries")
            words = getattr(self, f"{side}_words")
            if len(tokens) != len(flags):
                raise TokenizerFault(f"{side}: {len(tokens)} tokens but {len(flags)} boundary flags")
            if any(f not in (0, 1) for f in flags):
                raise TokenizerFault(f"{side}: boundary flags must be 0/1")
            if sum(flags) != len(words):
                raise TokenizerFault(f"{side}: {sum(flags)} word-final flags for {len(words)} words")
            if tuple(join_tokens(tokens, flags)) != tuple(words):
                raise TokenizerFault(f"{side}: tokens do not re-join to the word sequence")
        if self.source_boundaries[-1] != 1:
            raise TokenizerFault("source: trailing tokens do not close a word")

    @property
    def J(self) -> int:
        return len(self.source_words)

    @property
    def I(self) -> int:
        return len(self.target_words)

    @property
    def M(self) -> int:
        return len(self.source_tokens)

    @property
    def N(self) -> int:
        return len(self.target_tokens)

    @classmethod
    def from_tokens(cls, source_tokens, target_tokens, source_boundaries, target_boundaries) -> "SentencePair":
        """Rebuild words from token streams, e.g. a token-level policy record.

        Target tokens after the last word-final flag are kept but form no word.
        """
        return cls(
            source_words=tuple(join_tokens(source_tokens, source_boundaries)),
            target_words=tuple(join_tokens(target_tokens, target_boundaries)),
            source_tokens=tuple(source_tokens),
            target_tokens=tuple(target_tokens),
            source_boundaries=tuple(int(f) for f in source_boundaries),
            target_boundaries=tuple(int(f) for f in target_boundaries),
        )


def split_words(line: str) -> list[str]:
    return line.split()


def build_sentence_pair(source_text: str, target_text: str, tokenizer: Tokenizer | None = None) -> SentencePair:
    tokenizer = tokenizer or IdentityTokenizer()
    src, tgt = split_words(source_text), split_words(target_text)
    if not src or not tgt:
        raise EmptyInput("both source and target lines must contain at least one word")
    s_tok, s_flags = _segment(src, tokenizer)
    t_tok, t_flags = _segment(tgt, tokenizer)
    return SentencePair(tuple(src), tuple(tgt), tuple(s_tok), tuple(t_tok), tuple(s_flags), tuple(t_flags))


# ---------------------------------------------------------------------------
# policies


def _check_policy(values: Sequence[int], upper: int, name: str) -> None:
    prev = 0
    for n, v in enumerate(values):
        if not isinstance(v, int) or isinstance(v, bool):
            raise InvalidPolicy(f"{name}[{n}]={v!r} is not an integer")
        if v < 1 or v > upper:
            raise InvalidPolicy(f"{name}[{n}]={v} outside [1, {upper}]")
        if v < prev:
            raise InvalidPolicy(f"{name} decreases at position {n}: {prev} -> {v}")
        prev = v


@dataclass(frozen=True)
class TokenLevelPolicy:
    """Source-token count available to each target token."""

    h: tuple[int, ...]
    source_token_count: int

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(self.h))
        _check_policy(self.h, self.source_token_count, "h")

    def __len__(self):
        return len(self.h)


@dataclass(frozen=True)
class WordLevelPolicy:
    """Source-word count available to each target word."""

    g: tuple[int, ...]
    source_length: int

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(self.g))
        if self.source_length < 1:
            raise InvalidPolicy(f"source length must be >= 1, got {self.source_length}")
        _check_policy(self.g, self.source_length, "g")

    def __len__(self):
        return len(self.g)

    def __iter__(self):
        return iter(self.g)

    def __getitem__(self, i):
        return self.g[i]


@dataclass(frozen=True)
class BoundaryConfig:
    """Bounds on source words read before the first target word."""

    B: int = 1
    T: int = 3

    def __post_init__(self):
        if not 1 <= self.B <= self.T:
            raise InvalidParameter(f"need 1 <= B <= T, got B={self.B}, T={self.T}")


# ---------------------------------------------------------------------------
# memory and traces


@dataclass(frozen=True)
class MemoryView:
    """What a policy agent may see: counts only."""

    source_read: int
    target_generated: int
    source_exhausted: bool


class Memory:
    """Instruction, read source words and generated target words of one session."""

    def __init__(self, instruction: str, source: Sequence[str] | None = None):
        self.instruction = instruction
        self.source_read: list[str] = []
        self.target_generated: list[str] = []
        self.finished = False
        self._source = tuple(source) if source is not None else None

    def append_source(self, word: str) -> None:
        if self.finished:
            raise MemoryFinished("translation already ended")
        if self._source is not None:
            j = len(self.source_read)
            if j >= len(self._source) or self._source[j] != word:
                raise InvalidParameter(f"source word #{j + 1} {word!r} breaks the source prefix")
        self.source_read.append(word)

    def append_target(self, word: str) -> None:
        if self.finished:
            raise MemoryFinished("translation already ended")
        self.target_generated.append(word)

    def finish(self) -> None:
        self.finished = True

    def view(self) -> MemoryView:
        exhausted = self._source is not None and len(self.source_read) >= len(self._source)
        return MemoryView(len(self.source_read), len(self.target_generated), exhausted)


@dataclass
class SessionTrace:
    source: list[str]
    actions: list[Action] = field(default_factory=list)
    realized_policy: list[int] = field(default_factory=list)
    emission_times_ms: list[float] | None = field(default_factory=list)
    source_arrival_times_ms: list[float] | None = field(default_factory=list)
    read_times_ms: list[float] = field(default_factory=list)
    translation: list[str] = field(default_factory=list)
    truncated: bool = False
    empty_translation: bool = False
    error: str | None = None

    @property
    def J(self) -> int:
        return len(self.source)

    def word_policy(self) -> WordLevelPolicy:
        return WordLevelPolicy(tuple(self.realized_policy), self.J)

    def check(self) -> None:
        """Assert the trace invariants; raises AssertionError on violation."""
        writes = sum(a is Action.WRITE for a in self.actions)
        reads = sum(a is Action.READ for a in self.actions)
        assert writes == len(self.translation) == len(self.realized_policy), "WRITE count mismatch"
        assert reads <= self.J, "more READs than source words"
        assert len(self.read_times_ms) == reads
        self.word_policy()
        if self.emission_times_ms is not None:
            assert len(self.emission_times_ms) == writes
            assert all(a <= b for a, b in zip(self.emission_times_ms, self.emission_times_ms[1:]))
        if self.source_arrival_times_ms is not None:
            for t_read, t_arr in zip(self.read_times_ms, self.source_arrival_times_ms):
                assert t_read >= t_arr, "word consumed before it arrived"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["actions"] = [a.value for a in self.actions]
        d["g"] = d.pop("realized_policy")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SessionTrace":
        d = dict(d)
        d["realized_policy"] = d.pop("g")
        d["actions"] = [Action(a) for a in d["actions"]]
        d.pop("index", None)
        known = set(cls.__dataclass_fields__)
        return cls(**{k: v for k, v in d.items() if k in known})


def read_lines(path) -> list[str]:
    """Read a one-sentence-per-line UTF-8 corpus file."""
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f]


def build_corpus(source_lines: Iterable[str], target_lines: Iterable[str], tokenizer: Tokenizer | None = None):
    src, tgt = list(source_lines), list(target_lines)
    if len(src) != len(tgt):
        raise ShapeMismatch(f"{len(src)} source lines vs {len(tgt)} target lines")
    return [build_sentence_pair(s, t, tokenizer) for s, t in zip(src, tgt)]
