"""Client for external token-probability providers over line-delimited JSON.

An external provider is any subprocess that speaks the scoring wire protocol
on stdin/stdout: one JSON object per line, UTF-8, one request in flight at a
time, responses in request order.

Handshake::

    -> {"op": "hello"}
    <- {"name": "<provider name>", "vocab_size": <int>}

Scoring::

    -> {"op": "score", "text": "...", "mode": "ar"|"mlm", "mask_stop_words": false}
    <- {"per_token_logprobs": [<float>, ...], "n": <int>}

Any malformed or failed request yields ``{"error": "..."}`` and the
connection remains usable. The request timeout is configurable through the
``KGQA_PROVIDER_TIMEOUT_MS`` environment variable (milliseconds).
"""

from __future__ import annotations

import json
import math
import os
import queue
import shlex
import subprocess
import threading

from .errors import ProviderError
from .scoring import SCORE_MODES, ScoredSequence

TIMEOUT_ENV_VAR = "KGQA_PROVIDER_TIMEOUT_MS"
DEFAULT_TIMEOUT_MS = 60_000


def provider_timeout_seconds() -> float:
    raw = os.environ.get(TIMEOUT_ENV_VAR, "")
    if raw:
        try:
            ms = int(raw)
            if ms <= 0:
                raise ValueError
        except ValueError:
            raise ProviderError(f"{TIMEOUT_ENV_VAR} must be a positive integer, got {raw!r}") from None
        return ms / 1000.0
    return DEFAULT_TIMEOUT_MS / 1000.0


class ExternalProvider:
    """Spawns a provider subprocess and scores text through the wire protocol.

    Exposes the same ``score_text`` surface as the built-in providers, so the
    evaluation harness treats both uniformly. Use as a context manager or
    call :meth:`close` to terminate the subprocess.
    """

    def __init__(self, command: str | list[str], timeout: float | None = None):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise ProviderError("external provider command is empty")
        self._timeout = provider_timeout_seconds() if timeout is None else timeout
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ProviderError(f"failed to start provider {argv[0]!r}: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._read_stdout, daemon=True)
        self._reader.start()
        self._stderr_tail: list[str] = []
        self._stderr_thread = threading.Thread(target=self._read_stderr, daemon=True)
        self._stderr_thread.start()
        self.name, self._vocab_size = self._handshake()

    def _read_stdout(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _read_stderr(self) -> None:
        assert self._proc.stderr is not None
        for line in self._proc.stderr:
            self._stderr_tail.append(line.rstrip("\n"))
            del self._stderr_tail[:-20]

    def _fail(self, message: str) -> ProviderError:
        tail = "; ".join(self._stderr_tail[-3:])
        if tail:
            message = f"{message} (provider stderr: {tail})"
        return ProviderError(message)

    def _roundtrip(self, request: dict) -> dict:
        if self._proc.poll() is not None:
            raise self._fail(f"provider exited with code {self._proc.returncode}")
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise self._fail(f"failed to write to provider: {exc}") from exc
        try:
            line = self._lines.get(timeout=self._timeout)
        except queue.Empty:
            raise self._fail(f"provider response timed out after {self._timeout:.1f}s") from None
        if line is None:
            raise self._fail("provider closed its output stream")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise self._fail(f"provider sent invalid JSON: {exc}") from None
        if not isinstance(response, dict):
            raise self._fail(f"provider response must be a JSON object, got {type(response).__name__}")
        if "error" in response:
            raise self._fail(f"provider error: {response['error']}")
        return response

    def _handshake(self) -> tuple[str, int]:
        response = self._roundtrip({"op": "hello"})
        name = response.get("name")
        vocab_size = response.get("vocab_size")
        if not isinstance(name, str) or not isinstance(vocab_size, int) or vocab_size < 2:
            raise self._fail(f"invalid handshake response: {response!r}")
        return name, vocab_size

    def vocab_size(self) -> int:
        return self._vocab_size

    def score_text(self, text: str, mode: str = "ar", mask_stop_words: bool = False) -> ScoredSequence:
        """Score ``text`` remotely; the provider tokenizes with its own rules."""
        if mode not in SCORE_MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {SCORE_MODES}")
        response = self._roundtrip(
            {"op": "score", "text": text, "mode": mode, "mask_stop_words": bool(mask_stop_words)}
        )
        logprobs = response.get("per_token_logprobs")
        n = response.get("n")
        if not isinstance(logprobs, list) or not logprobs:
            raise self._fail(f"invalid per_token_logprobs in response: {response!r}")
        if not isinstance(n, int) or n != len(logprobs):
            raise self._fail(f"response n={n!r} does not match {len(logprobs)} logprobs")
        values = []
        for lp in logprobs:
            if not isinstance(lp, (int, float)) or not math.isfinite(lp):
                raise self._fail(f"non-finite log-probability in response: {lp!r}")
            values.append(float(lp))
        return ScoredSequence.from_logprobs([""] * n, values)

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                if self._proc.stdin is not None:
                    self._proc.stdin.close()
                self._proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ExternalProvider":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
