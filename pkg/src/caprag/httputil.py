"""Minimal JSON-over-HTTP POST helper used by every remote backend."""

from __future__ import annotations

import json
import os
import urllib.error
import urllib.request

from .errors import TransportError


def post_json(url: str, payload: dict, auth_env: str | None = None, timeout: float = 30.0) -> dict:
    """POST ``payload`` as JSON and return the decoded JSON response.

    When ``auth_env`` names an environment variable, its value is sent as a
    bearer token. Any transport or decode failure raises TransportError with
    the HTTP status when one was received.
    """
    headers = {"Content-Type": "application/json"}
    if auth_env:
        token = os.environ.get(auth_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
    body = json.dumps(payload).encode("utf-8")
    request = urllib.request.Request(url, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            raw = response.read()
    except urllib.error.HTTPError as exc:
        raise TransportError(f"POST {url} failed: HTTP {exc.code}", status=exc.code) from exc
    except (urllib.error.URLError, OSError) as exc:
        raise TransportError(f"POST {url} failed: {exc}") from exc
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TransportError(f"POST {url} returned invalid JSON: {exc}") from exc
