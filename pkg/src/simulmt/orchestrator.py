"""The simultaneous working cycle: policy decides, translator writes, memory grows."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from .core import Action, Memory, SessionTrace
from .errors import AgentUnavailable, EmptyInput, InvalidParameter, NonProgressingAgent, ProtocolError
from .policy import PolicyAgent
from .translator import TranslationAgent

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SessionConfig:
    max_target_words: int | None = None  # None: 2 * J + 10
    source_arrival_interval_ms: float = 0.0
    abort_on_agent_error: bool = False

    def __post_init__(self):
        if self.max_target_words is not None and self.max_target_words < 1:
            raise InvalidParameter(f"max_target_words must be >= 1, got {self.max_target_words}")
        if self.source_arrival_interval_ms < 0:
            raise InvalidParameter("source_arrival_interval_ms must be non-negative")

    def cap_for(self, J: int) -> int:
        return self.max_target_words if self.max_target_words is not None else 2 * J + 10


# ---------------------------------------------------------------------------
# clocks and source streams


class Clock(Protocol):
    def now_ms(self) -> float: ...

    def sleep_until(self, t_ms: float) -> None: ...


class WallClock:
    def __init__(self):
        self._t0 = time.perf_counter()

    def now_ms(self) -> float:
        return (time.perf_counter() - self._t0) * 1000.0

    def sleep_until(self, t_ms: float) -> None:
        delay = t_ms - self.now_ms()
        if delay > 0:
            time.sleep(delay / 1000.0)
        # time.sleep can wake a hair early
        while self.now_ms() < t_ms:
            pass


class FakeClock:
    """Manually advanced clock; sleeping jumps straight to the target time."""

    def __init__(self, start_ms: float = 0.0):
        self.t = start_ms

    def now_ms(self) -> float:
        return self.t

    def sleep_until(self, t_ms: float) -> None:
        self.t = max(self.t, t_ms)

    def advance(self, ms: float) -> None:
        self.t += ms


class SourceStream:
    """Source words with the time (ms after session start) each one becomes available."""

    def __init__(self, words: Sequence[str], arrival_ms: Sequence[float]):
        if len(words) != len(arrival_ms):
            raise InvalidParameter("one arrival time per source word required")
        if any(b < a for a, b in zip(arrival_ms, arrival_ms[1:])):
            raise InvalidParameter("arrival times must be non-decreasing")
        self.words = list(words)
        self.arrival_ms = [float(t) for t in arrival_ms]

    @classmethod
    def fixed_interval(cls, words: Sequence[str], interval_ms: float) -> "SourceStream":
        # word j is complete once j intervals have passed
        return cls(words, [j * interval_ms for j in range(1, len(words) + 1)])

    @classmethod
    def from_timestamp_line(cls, line: str) -> "SourceStream":
        """Parse ``word@ms word@ms ...``."""
        words, times = [], []
        for item in line.split():
            word, _, t = item.rpartition("@")
            if not word:
                raise InvalidParameter(f"expected word@ms, got {item!r}")
            words.append(word)
            times.append(float(t))
        return cls(words, times)

    def __len__(self):
        return len(self.words)


# ---------------------------------------------------------------------------
# sessions


def run_session(
    source: Sequence[str] | SourceStream,
    policy_agent: PolicyAgent,
    translation_agent: TranslationAgent,
    instruction: str,
    cfg: SessionConfig | None = None,
    clock: Clock | None = None,
) -> SessionTrace:
    cfg = cfg or SessionConfig()
    stream = source if isinstance(source, SourceStream) else SourceStream.fixed_interval(source, cfg.source_arrival_interval_ms)
    if not stream.words:
        raise EmptyInput("cannot translate an empty source")
    clock = clock or WallClock()
    start = clock.now_ms()

    J = len(stream)
    cap = cfg.cap_for(J)
    memory = Memory(instruction, stream.words)
    trace = SessionTrace(source=list(stream.words), source_arrival_times_ms=list(stream.arrival_ms))

    budget = J + cap
    for _ in range(budget + 1):
        view = memory.view()
        action = policy_agent.decide(view)
        if view.source_exhausted:
            action = Action.WRITE
        elif action is Action.WRITE and view.source_read == 0:
            # nothing to translate from yet; g_i >= 1 must hold
            action = Action.READ

        if action is Action.READ:
            j = view.source_read
            clock.sleep_until(start + stream.arrival_ms[j])
            memory.append_source(stream.words[j])
            trace.actions.append(Action.READ)
            trace.read_times_ms.append(clock.now_ms() - start)
            continue
        if action is not Action.WRITE:
            raise ProtocolError(f"policy agent returned {action!r}")

        try:
            word = translation_agent.next_word(memory.instruction, list(memory.source_read), list(memory.target_generated))
        except AgentUnavailable as e:
            trace.error = str(e)
            raise AgentUnavailable(str(e), trace=trace) from e
        if word is None:
            memory.finish()
            break
        word = "".join(word.split())
        if not word:
            raise ProtocolError("translation agent returned an empty word")
        memory.append_target(word)
        trace.actions.append(Action.WRITE)
        trace.realized_policy.append(view.source_read)
        trace.translation.append(word)
        trace.emission_times_ms.append(clock.now_ms() - start)
        if len(trace.translation) >= cap:
            trace.truncated = True
            memory.finish()
            break
    else:
        raise NonProgressingAgent(f"no termination within {budget} steps")

    trace.empty_translation = not trace.translation
    return trace


def run_corpus(
    corpus: Sequence[Sequence[str] | SourceStream],
    policy_factory: Callable[[int, list[str]], PolicyAgent],
    translator_factory: Callable[[int, list[str]], TranslationAgent],
    instruction: str,
    cfg: SessionConfig | None = None,
    parallelism: int = 1,
    clock_factory: Callable[[], Clock] = WallClock,
) -> list[SessionTrace]:
    """Run one session per source sentence; results keep corpus order.

    Factories receive the line index and source words so per-sentence
    agents (scripted policies, capped mocks) can be built; shared agents
    may ignore both.
    A failing sentence yields a trace with ``error`` set unless
    ``cfg.abort_on_agent_error`` is on.
    """
    if parallelism < 1:
        raise InvalidParameter(f"parallelism must be >= 1, got {parallelism}")
    cfg = cfg or SessionConfig()

    def one(indexed):
        n, item = indexed
        words = list(item.words if isinstance(item, SourceStream) else item)
        try:
            return run_session(item, policy_factory(n, words), translator_factory(n, words), instruction, cfg, clock_factory())
        except (AgentUnavailable, ProtocolError) as e:
            if cfg.abort_on_agent_error:
                raise
            log.warning("session failed: %s", e)
            trace = getattr(e, "trace", None) or SessionTrace(source=words)
            trace.error = f"{type(e).__name__}: {e}"
            trace.empty_translation = not trace.translation
            return trace

    if parallelism == 1:
        return [one(x) for x in enumerate(corpus)]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, enumerate(corpus)))
