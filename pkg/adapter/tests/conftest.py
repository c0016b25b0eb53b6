"""Shared helpers: an in-process session and a minimal subprocess client."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from lm_adapter import AdapterSession, SessionConfig

ADAPTER_CMD = [sys.executable, "-m", "lm_adapter"]


@pytest.fixture(scope="session")
def session() -> AdapterSession:
    """One default session reused across in-process tests (it is stateless)."""
    return AdapterSession(SessionConfig(seed=7, max_len=32, buckets=97))


class AdapterClient:
    """Line-JSON client for a spawned adapter, independent of any pipeline code."""

    def __init__(self, extra_args: list[str] | None = None):
        self.proc = subprocess.Popen(
            [*ADAPTER_CMD, *(extra_args or [])],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )

    def request(self, obj: dict) -> dict:
        assert self.proc.stdin is not None and self.proc.stdout is not None
        self.proc.stdin.write(json.dumps(obj) + "\n")
        self.proc.stdin.flush()
        line = self.proc.stdout.readline()
        if not line:
            raise RuntimeError(f"adapter closed its output (stderr: {self.proc.stderr.read()!r})")
        return json.loads(line)

    def close(self) -> None:
        if self.proc.poll() is None:
            self.proc.stdin.close()
            try:
                self.proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()

    def __enter__(self) -> "AdapterClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
