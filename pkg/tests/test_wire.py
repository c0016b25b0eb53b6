"""External-provider client: wire protocol, error recovery, timeouts."""

from __future__ import annotations

import sys

import pytest

from kgqa import (
    DEFAULT_TIMEOUT_MS,
    TIMEOUT_ENV_VAR,
    ExternalProvider,
    ProviderError,
    provider_timeout_seconds,
)

FAKE_PROVIDER = '''
import json, sys

mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
if mode == "exit":
    sys.exit(3)
for line in sys.stdin:
    req = json.loads(line)
    if req["op"] == "hello":
        if mode == "bad-handshake":
            print(json.dumps({"name": 5, "vocab_size": 1}), flush=True)
        else:
            print(json.dumps({"name": "fake", "vocab_size": 10}), flush=True)
        continue
    if mode == "silent":
        continue
    if mode == "garbage":
        print("{not json", flush=True)
        continue
    text = req.get("text", "")
    if "explode" in text:
        print("refusing to score", file=sys.stderr, flush=True)
        print(json.dumps({"error": "cannot score that"}), flush=True)
        continue
    toks = text.split()
    lps = [-1.0 if req.get("mode") == "ar" else -2.0] * len(toks)
    n = len(toks)
    if mode == "bad-n":
        n += 1
    if mode == "nonfinite":
        lps = [float("nan")] * len(toks)
    print(json.dumps({"per_token_logprobs": lps, "n": n}), flush=True)
'''


@pytest.fixture
def provider_cmd(tmp_path):
    script = tmp_path / "fake_provider.py"
    script.write_text(FAKE_PROVIDER)

    def make(mode="ok"):
        return f"{sys.executable} {script} {mode}"

    return make


class TestHandshake:
    def test_reports_name_and_vocab(self, provider_cmd):
        with ExternalProvider(provider_cmd()) as provider:
            assert provider.name == "fake"
            assert provider.vocab_size() == 10

    def test_invalid_handshake_rejected(self, provider_cmd):
        with pytest.raises(ProviderError, match="handshake"):
            ExternalProvider(provider_cmd("bad-handshake"))

    def test_immediate_exit_rejected(self, provider_cmd):
        with pytest.raises(ProviderError):
            ExternalProvider(provider_cmd("exit"))

    def test_empty_command_rejected(self):
        with pytest.raises(ProviderError, match="empty"):
            ExternalProvider("")

    def test_missing_binary_rejected(self):
        with pytest.raises(ProviderError, match="failed to start"):
            ExternalProvider("/no/such/binary-zzz")


class TestScoring:
    def test_ar_mode(self, provider_cmd):
        with ExternalProvider(provider_cmd()) as provider:
            scored = provider.score_text("a b c", mode="ar")
            assert scored.per_token_logprobs == (-1.0, -1.0, -1.0)
            assert scored.score == pytest.approx(1.0)

    def test_mlm_mode_reaches_subprocess(self, provider_cmd):
        with ExternalProvider(provider_cmd()) as provider:
            scored = provider.score_text("a b c", mode="mlm")
            assert scored.score == pytest.approx(2.0)

    def test_unknown_mode_rejected_locally(self, provider_cmd):
        with ExternalProvider(provider_cmd()) as provider:
            with pytest.raises(ValueError, match="mode"):
                provider.score_text("a b", mode="bidirectional")

    def test_requests_answered_in_order(self, provider_cmd):
        with ExternalProvider(provider_cmd()) as provider:
            for n in (1, 4, 2, 7):
                scored = provider.score_text(" ".join(["tok"] * n))
                assert len(scored.per_token_logprobs) == n


class TestErrorRecovery:
    def test_error_response_raises_but_connection_survives(self, provider_cmd):
        with ExternalProvider(provider_cmd()) as provider:
            with pytest.raises(ProviderError, match="cannot score that"):
                provider.score_text("explode now")
            # the subprocess is still healthy afterwards
            assert provider.score_text("still fine").score == pytest.approx(1.0)

    def test_error_message_carries_stderr_tail(self, provider_cmd):
        import time

        with ExternalProvider(provider_cmd()) as provider:
            time.sleep(0.05)  # give the stderr line a moment to be read
            with pytest.raises(ProviderError, match="refusing to score"):
                provider.score_text("explode now")

    def test_garbage_json_rejected(self, provider_cmd):
        with ExternalProvider(provider_cmd("garbage")) as provider:
            with pytest.raises(ProviderError, match="invalid JSON"):
                provider.score_text("a b")

    def test_mismatched_n_rejected(self, provider_cmd):
        with ExternalProvider(provider_cmd("bad-n")) as provider:
            with pytest.raises(ProviderError, match="does not match"):
                provider.score_text("a b")

    def test_non_finite_logprobs_rejected(self, provider_cmd):
        with ExternalProvider(provider_cmd("nonfinite")) as provider:
            with pytest.raises(ProviderError, match="non-finite"):
                provider.score_text("a b")


class TestTimeout:
    def test_unanswered_request_times_out(self, provider_cmd):
        with ExternalProvider(provider_cmd("silent"), timeout=0.2) as provider:
            with pytest.raises(ProviderError, match="timed out"):
                provider.score_text("a b")

    def test_env_var_overrides_default(self, monkeypatch):
        monkeypatch.delenv(TIMEOUT_ENV_VAR, raising=False)
        assert provider_timeout_seconds() == DEFAULT_TIMEOUT_MS / 1000.0
        monkeypatch.setenv(TIMEOUT_ENV_VAR, "250")
        assert provider_timeout_seconds() == 0.25

    @pytest.mark.parametrize("raw", ["0", "-5", "soon", "1.5"])
    def test_invalid_env_var_rejected(self, monkeypatch, raw):
        monkeypatch.setenv(TIMEOUT_ENV_VAR, raw)
        with pytest.raises(ProviderError, match=TIMEOUT_ENV_VAR):
            provider_timeout_seconds()


class TestLifecycle:
    def test_close_terminates_subprocess(self, provider_cmd):
        provider = ExternalProvider(provider_cmd())
        proc = provider._proc
        provider.close()
        assert proc.poll() is not None
        provider.close()  # idempotent

    def test_scoring_after_exit_fails_cleanly(self, provider_cmd):
        provider = ExternalProvider(provider_cmd())
        provider.close()
        with pytest.raises(ProviderError):
            provider.score_text("a b")
