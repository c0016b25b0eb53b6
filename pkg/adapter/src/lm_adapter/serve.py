"""The line-delimited JSON serve loop.

One JSON object per input line, one JSON response line per request, in
request order, until end-of-stream. A request the session cannot satisfy —
malformed JSON, a non-object, an unknown op, bad field types, an unsupported
mode — answers ``{"error": "..."}`` and the loop continues; the connection
stays usable.

Wire protocol::

    -> {"op": "hello"}
    <- {"name": "<model id>", "vocab_size": <int>}
    -> {"op": "score", "text": "...", "mode": "ar"|"mlm", "mask_stop_words": false}
    <- {"per_token_logprobs": [<float>, ...], "n": <int>}
"""

from __future__ import annotations

import json
from typing import IO

from .session import AdapterError, AdapterSession


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def handle_request(session: AdapterSession, request: object) -> dict:
    """One response object for one decoded request, errors included."""
    if not isinstance(request, dict):
        return {"error": f"request must be a JSON object, got {type(request).__name__}"}
    op = request.get("op")
    if op == "hello":
        return session.hello()
    if op == "score":
        text = request.get("text")
        mode = request.get("mode")
        mask_stop_words = request.get("mask_stop_words", False)
        if not isinstance(text, str):
            return {"error": "score request field 'text' must be a string"}
        if not isinstance(mode, str):
            return {"error": "score request field 'mode' must be a string"}
        if not isinstance(mask_stop_words, bool):
            return {"error": "score request field 'mask_stop_words' must be a boolean"}
        try:
            return session.score(text, mode, mask_stop_words)
        except AdapterError as exc:
            return {"error": str(exc)}
        except Exception as exc:  # defensive: a scoring bug must not kill the session
            return {"error": f"internal error: {exc}"}
    return {"error": f"unsupported op {op!r}"}


def serve(session: AdapterSession, in_stream: IO[str], out_stream: IO[str]) -> None:
    """Answer requests from ``in_stream`` until it closes."""
    for line in in_stream:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            response: dict = {"error": f"invalid JSON: {exc}"}
        else:
            response = handle_request(session, request)
        out_stream.write(_dumps(response) + "\n")
        out_stream.flush()
