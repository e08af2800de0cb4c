"""Deterministic stand-in for an LLM inference server.

Speaks the JSON completion protocol on ``/completion`` and a chat-style
protocol on ``/v1/chat/completions``. The "model" recovers source and
target prefix from the prompt and continues with a word-for-word lexicon
translation of the source read so far.
"""

from __future__ import annotations

import json
import re
import threading
import time
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import ProtocolError
from .translator import PromptTemplate


class StubModel:
    def __init__(self, lexicon=None, template: PromptTemplate | None = None, chars_per_token: int | None = None):
        self.lexicon = dict(lexicon or {})
        self.template = template or PromptTemplate()
        self.chars_per_token = chars_per_token

    def complete(self, prompt: str, max_new_tokens: int) -> tuple[str, bool]:
        _, source, target_raw = self.template.parse(prompt, raw_target=True)
        full = " ".join(self.lexicon.get(w, w) for w in source)
        if not full.startswith(target_raw):
            return "", True
        continuation = full[len(target_raw):]
        if self.chars_per_token:
            text = continuation[: max_new_tokens * self.chars_per_token]
        else:
            text = "".join(re.findall(r"\s*\S+", continuation)[:max_new_tokens])
        return text, len(text) >= len(continuation)


class _Handler(BaseHTTPRequestHandler):
    server: "StubServer"

    def log_message(self, *args):
        pass

    def _reply(self, status: int, body) -> None:
        raw = body if isinstance(body, bytes) else json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def do_POST(self):
        srv = self.server
        srv.requests += 1
        length = int(self.headers.get("Content-Length", 0))
        try:
            payload = json.loads(self.rfile.read(length) or b"{}")
        except json.JSONDecodeError:
            return self._reply(400, {"error": "bad json"})
        if srv.delay_ms:
            time.sleep(srv.delay_ms / 1000.0)
        if srv.mode == "error":
            return self._reply(500, {"error": "induced failure"})
        if srv.mode == "garbage":
            return self._reply(200, b"not json at all")
        try:
            if self.path == "/completion":
                text, stopped = srv.model.complete(payload["prompt"], int(payload.get("max_new_tokens", 16)))
                return self._reply(200, {"text": text, "stopped": stopped})
            if self.path == "/v1/chat/completions":
                prompt = payload["messages"][-1]["content"]
                text, stopped = srv.model.complete(prompt, int(payload.get("max_tokens", 16)))
                reason = "stop" if stopped else "length"
                return self._reply(
                    200, {"choices": [{"index": 0, "message": {"role": "assistant", "content": text}, "finish_reason": reason}]}
                )
        except (KeyError, TypeError, ValueError, ProtocolError) as e:
            return self._reply(400, {"error": str(e)})
        self._reply(404, {"error": f"no route {self.path}"})


class StubServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, model: StubModel, delay_ms: int = 0, mode: str = "ok"):
        super().__init__(address, _Handler)
        self.model = model
        self.delay_ms = delay_ms
        self.mode = mode
        self.requests = 0

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"


@contextmanager
def running_stub(lexicon=None, template=None, host="127.0.0.1", port=0, **kw):
    """Run a stub server on a background thread for the duration of the block."""
    srv = StubServer((host, port), StubModel(lexicon, template, kw.pop("chars_per_token", None)), **kw)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    try:
        yield srv
    finally:
        srv.shutdown()
        srv.server_close()
        thread.join(timeout=5)
