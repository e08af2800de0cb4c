"""Policy-decision agents and token-to-word policy conversion."""

from __future__ import annotations

from typing import Protocol, Sequence

from .core import Action, BoundaryConfig, MemoryView, SentencePair, TokenLevelPolicy, WordLevelPolicy
from .errors import InvalidParameter, InvalidPolicy, NonProgressingAgent, ShapeMismatch


class PolicyAgent(Protocol):
    def decide(self, view: MemoryView) -> Action: ...


class WaitKAgent:
    """Read k words, then alternate WRITE and READ."""

    def __init__(self, k: int):
        if not isinstance(k, int) or k < 1:
            raise InvalidParameter(f"wait-k needs k >= 1, got {k!r}")
        self.k = k

    def decide(self, view: MemoryView) -> Action:
        if view.source_exhausted or view.source_read >= self.k + view.target_generated:
            return Action.WRITE
        return Action.READ

    def __repr__(self):
        return f"WaitKAgent(k={self.k})"


class ScriptedAgent:
    """Replays a fixed word-level policy, e.g. one computed offline by another model.

    Once every scheduled word is written the agent keeps answering WRITE;
    the translation agent is then expected to end the sentence.
    """

    def __init__(self, policy: WordLevelPolicy | Sequence[int], J: int):
        g = tuple(policy.g if isinstance(policy, WordLevelPolicy) else policy)
        self.policy = WordLevelPolicy(g, J)

    def decide(self, view: MemoryView) -> Action:
        i = view.target_generated
        if view.source_exhausted or i >= len(self.policy.g):
            return Action.WRITE
        return Action.WRITE if view.source_read >= self.policy.g[i] else Action.READ

    def __repr__(self):
        return f"ScriptedAgent(g={list(self.policy.g)})"


def waitk_agent(k: int) -> WaitKAgent:
    return WaitKAgent(k)


def scripted_agent(policy, J: int) -> ScriptedAgent:
    return ScriptedAgent(policy, J)


def waitk_policy(k: int, J: int, I: int) -> WordLevelPolicy:
    """Closed form of the wait-k schedule."""
    if k < 1:
        raise InvalidParameter(f"wait-k needs k >= 1, got {k}")
    return WordLevelPolicy(tuple(min(k + i - 1, J) for i in range(1, I + 1)), J)


def induced_policy(agent: PolicyAgent, J: int, I: int, force_write_when_exhausted: bool = True) -> WordLevelPolicy:
    """Replay ``agent`` on counts alone and record the source count at each WRITE.

    Mirrors the session loop: once all J words are read the next action is a
    WRITE regardless of the agent, and a WRITE with nothing read yet is
    turned into a READ.
    """
    if J < 1 or I < 1:
        raise InvalidParameter(f"need J, I >= 1, got J={J}, I={I}")
    j = i = 0
    g: list[int] = []
    budget = J + I + 1
    for _ in range(budget):
        exhausted = j >= J
        action = agent.decide(MemoryView(j, i, exhausted))
        if force_write_when_exhausted and exhausted:
            action = Action.WRITE
        if action is Action.WRITE and j == 0:
            action = Action.READ
        if action is Action.READ:
            if exhausted:
                continue
            j += 1
        elif action is Action.WRITE:
            g.append(j)
            i += 1
            if i == I:
                return WordLevelPolicy(tuple(g), J)
        else:
            raise InvalidPolicy(f"agent returned {action!r}, expected READ or WRITE")
    raise NonProgressingAgent(f"{agent!r} made {i}/{I} writes within {budget} steps")


def _word_spans(boundaries: Sequence[int]) -> list[int]:
    """Token count up to and including the last token of each word."""
    return [n + 1 for n, flag in enumerate(boundaries) if flag]


def token_to_word_policy(pair: SentencePair, token_policy: TokenLevelPolicy | Sequence[int]) -> WordLevelPolicy:
    """Convert per-token source counts into per-word source counts.

    For every target token closing a word, count the source words lying
    entirely inside the first h_n source tokens (u) and use min(u + 1, J).
    A running maximum keeps the result non-decreasing.
    """
    h = tuple(token_policy.h if isinstance(token_policy, TokenLevelPolicy) else token_policy)
    if len(h) != pair.N:
        raise ShapeMismatch(f"token policy has {len(h)} entries for {pair.N} target tokens")
    TokenLevelPolicy(h, pair.M)

    source_ends = _word_spans(pair.source_boundaries)
    J = pair.J
    g: list[int] = []
    u = 0
    for n, flag in enumerate(pair.target_boundaries):
        if not flag:
            continue
        # source_ends is sorted and h is non-decreasing, so u only moves forward
        while u < len(source_ends) and source_ends[u] <= h[n]:
            u += 1
        g_i = min(u + 1, J)
        g.append(max(g_i, g[-1]) if g else g_i)
    return WordLevelPolicy(tuple(g), J)


def apply_boundary(policy: WordLevelPolicy | Sequence[int], cfg: BoundaryConfig, J: int) -> WordLevelPolicy:
    """Clamp g_i into [i-1+B, i-1+T], then into [1, J]."""
    g = tuple(policy.g if isinstance(policy, WordLevelPolicy) else policy)
    WordLevelPolicy(g, J)
    out = []
    for i, g_i in enumerate(g, start=1):
        r = min(max(g_i, i - 1 + cfg.B), i - 1 + cfg.T)
        out.append(min(r, J))
    return WordLevelPolicy(tuple(out), J)


def word_policy_from_record(record: dict, cfg: BoundaryConfig | None = None) -> tuple[SentencePair, WordLevelPolicy]:
    """Decode one token-level policy JSONL record into a bounded word-level policy."""
    try:
        pair = SentencePair.from_tokens(
            record["source_tokens"], record["target_tokens"], record["source_boundaries"], record["target_boundaries"]
        )
        h = record["h"]
    except KeyError as e:
        raise InvalidPolicy(f"token policy record lacks field {e}") from None
    g = token_to_word_policy(pair, h)
    if cfg is not None:
        g = apply_boundary(g, cfg, pair.J)
    return pair, g
