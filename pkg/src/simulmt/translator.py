"""Translation agents: next target word from instruction, source prefix and target prefix.

An agent returns the next word as a string, or ``None`` once the
translation is complete.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import httpx

from .errors import AgentUnavailable, InvalidParameter, ProtocolError

DEFAULT_TEMPLATE = "{instruction}\n\nInput: {source}\nOutput: {target_prefix}"
DEFAULT_INSTRUCTION = "Translate the following sentence from {src_lang} to {tgt_lang}."

PLACEHOLDERS = ("{instruction}", "{source}", "{target_prefix}")


def make_instruction(src_lang: str = "German", tgt_lang: str = "English") -> str:
    return DEFAULT_INSTRUCTION.format(src_lang=src_lang, tgt_lang=tgt_lang)


@dataclass(frozen=True)
class PromptTemplate:
    text: str = DEFAULT_TEMPLATE

    def __post_init__(self):
        for ph in PLACEHOLDERS:
            if self.text.count(ph) != 1:
                raise InvalidParameter(f"template must contain {ph} exactly once")

    @classmethod
    def from_file(cls, path) -> "PromptTemplate":
        with open(path, encoding="utf-8") as f:
            return cls(f.read())

    def render(self, instruction: str, source: Sequence[str], target_prefix: Sequence[str]) -> str:
        # plain replace: str.format would choke on literal braces in user templates
        return (
            self.text.replace("{instruction}", instruction)
            .replace("{source}", " ".join(source))
            .replace("{target_prefix}", " ".join(target_prefix))
        )

    def parse(self, prompt: str, raw_target: bool = False):
        """Inverse of :meth:`render`; used by the stub server.

        With ``raw_target`` the target slot comes back as the untouched string.
        """
        pattern = re.escape(self.text)
        for ph, name in zip(PLACEHOLDERS, ("instruction", "source", "target")):
            pattern = pattern.replace(re.escape(ph), f"(?P<{name}>.*?)", 1)
        m = re.fullmatch(pattern, prompt, flags=re.DOTALL)
        if m is None:
            raise ProtocolError("prompt does not match the template")
        target = m["target"] if raw_target else m["target"].split()
        return m["instruction"], m["source"].split(), target


class TranslationAgent(Protocol):
    def next_word(self, instruction: str, source_prefix: Sequence[str], target_prefix: Sequence[str]) -> str | None: ...


def first_word(text: str) -> tuple[str | None, bool]:
    """Leading word of ``text`` and whether a whitespace boundary follows it."""
    stripped = text.lstrip()
    if not stripped:
        return None, False
    parts = stripped.split(maxsplit=1)
    word = parts[0]
    closed = len(stripped) > len(word)
    return word, closed


class MockTranslator:
    """Word-for-word monotone translator backed by a lexicon.

    The i-th target word is the lexicon image of the i-th source word, or
    the word itself when the lexicon has no entry. If that source word has
    not been read yet, the image of the latest read word stands in. The
    translation ends after ``length_cap`` words; session harnesses pass
    min(cap, J) so the output never outgrows the source.
    """

    def __init__(self, lexicon: Mapping[str, str] | None = None, length_cap: int = 10**6):
        if length_cap < 1:
            raise InvalidParameter(f"length_cap must be >= 1, got {length_cap}")
        self.lexicon = dict(lexicon or {})
        self.length_cap = length_cap

    def with_cap(self, length_cap: int) -> "MockTranslator":
        return MockTranslator(self.lexicon, length_cap)

    def _image(self, word: str) -> str:
        out = self.lexicon.get(word, word)
        return "".join(out.split()) or word

    def next_word(self, instruction, source_prefix, target_prefix):
        n = len(target_prefix)
        if n >= self.length_cap or not source_prefix:
            return None
        return self._image(source_prefix[min(n, len(source_prefix) - 1)])

    def translate_offline(self, source: Sequence[str]) -> list[str]:
        """Full-sentence translation with the whole source visible."""
        agent = self.with_cap(min(self.length_cap, len(source)))
        out: list[str] = []
        while (w := agent.next_word("", source, out)) is not None:
            out.append(w)
        return out


def mock_translator(lexicon=None, length_cap: int = 10**6) -> MockTranslator:
    return MockTranslator(lexicon, length_cap)


def load_lexicon(path) -> dict[str, str]:
    """Two-column TSV: source word, target word."""
    lex = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                src, tgt = line.rstrip("\n").split("\t")
                lex[src] = tgt
    return lex


# ---------------------------------------------------------------------------
# network agents


class JsonCompletionTransport:
    """POST {"prompt", "max_new_tokens", "stop"} -> {"text", "stopped"}."""

    def build(self, prompt: str, max_new_tokens: int, stop: list[str]) -> dict:
        return {"prompt": prompt, "max_new_tokens": max_new_tokens, "stop": stop}

    def parse(self, data) -> tuple[str, bool]:
        if not isinstance(data, dict) or not isinstance(data.get("text"), str) or not isinstance(data.get("stopped"), bool):
            raise ProtocolError(f"expected {{'text': str, 'stopped': bool}}, got {data!r:.200}")
        return data["text"], data["stopped"]


class ChatCompletionTransport:
    """Chat-completions style: the prompt goes in as a single user message."""

    def __init__(self, model: str = "default"):
        self.model = model

    def build(self, prompt, max_new_tokens, stop):
        return {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "max_tokens": max_new_tokens,
            "temperature": 0.0,
            "stop": stop or None,
        }

    def parse(self, data) -> tuple[str, bool]:
        try:
            choice = data["choices"][0]
            text = choice["message"]["content"] or ""
            reason = choice.get("finish_reason")
        except (KeyError, IndexError, TypeError):
            raise ProtocolError(f"malformed chat completion: {data!r:.200}") from None
        if not isinstance(text, str):
            raise ProtocolError("chat completion content is not a string")
        return text, reason == "stop"


class HttpTranslator:
    """Greedy next-word client for an LLM inference server.

    The server continues the rendered prompt; we keep only the first
    whitespace-delimited word. If the reply ends mid-word (token budget hit
    before any boundary) the continuation is requested again with the
    partial word appended, up to ``max_rounds`` times.
    """

    def __init__(
        self,
        endpoint: str,
        template: PromptTemplate | None = None,
        timeout_ms: int = 10_000,
        max_new_tokens: int = 8,
        stop: Sequence[str] = ("\n",),
        transport=None,
        max_rounds: int = 4,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint
        self.template = template or PromptTemplate()
        self.timeout_ms = timeout_ms
        self.max_new_tokens = max_new_tokens
        self.stop = list(stop)
        self.transport = transport or JsonCompletionTransport()
        self.max_rounds = max_rounds
        # one pooled client; httpx.Client is safe to share across threads
        self._client = client or httpx.Client()

    def close(self) -> None:
        self._client.close()

    def _post(self, prompt: str) -> tuple[str, bool]:
        payload = self.transport.build(prompt, self.max_new_tokens, self.stop)
        timeout = self.timeout_ms / 1000.0
        try:
            r = self._client.post(self.endpoint, json=payload, timeout=timeout)
        except httpx.TimeoutException as e:
            raise AgentUnavailable(f"timeout after {self.timeout_ms} ms: {e}") from e
        except httpx.TransportError as e:
            raise AgentUnavailable(f"cannot reach {self.endpoint}: {e}") from e
        if r.status_code >= 500:
            raise AgentUnavailable(f"server error {r.status_code}")
        if r.status_code != 200:
            raise ProtocolError(f"unexpected status {r.status_code}: {r.text[:200]}")
        try:
            data = r.json()
        except json.JSONDecodeError as e:
            raise ProtocolError(f"response is not JSON: {r.text[:200]!r}") from e
        return self.transport.parse(data)

    def next_word(self, instruction, source_prefix, target_prefix):
        prompt = self.template.render(instruction, source_prefix, target_prefix)
        if target_prefix:
            prompt += " "
        buf = ""
        for _ in range(self.max_rounds):
            text, stopped = self._post(prompt + buf)
            buf += text
            word, closed = first_word(buf)
            if word is not None and (closed or stopped):
                return word
            if stopped:
                return None
            if not text:
                raise ProtocolError("empty completion without stop flag")
        word, _ = first_word(buf)
        if word is None:
            raise ProtocolError(f"no word after {self.max_rounds} requests")
        return word


def http_translator(endpoint, template=None, decoding="greedy", timeout_ms=10_000, **kw) -> HttpTranslator:
    if decoding != "greedy":
        raise InvalidParameter(f"only greedy decoding is supported, got {decoding!r}")
    return HttpTranslator(endpoint, template, timeout_ms=timeout_ms, **kw)
