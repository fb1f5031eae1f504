"""Completion providers: an HTTP client and deterministic stubs."""

from __future__ import annotations

import json
import logging
import os
import random
import time
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Protocol, Sequence

import httpx

from .items import LETTERS, McqItem

log = logging.getLogger(__name__)

TEMPERATURE = 0


class ProviderError(RuntimeError):
    pass


class Provider(Protocol):
    model_name: str

    def complete(self, prompt: str) -> str: ...


@dataclass(frozen=True)
class ProviderEndpoint:
    base_url: str
    model_name: str
    timeout: float = 30.0
    max_retries: int = 2
    headers: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.base_url:
            raise ValueError("base_url is required")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class HttpProvider:
    """POSTs ``{"model", "prompt", "max_tokens", "temperature": 0}`` and reads ``{"text"}``.

    With ``chat=True`` the prompt goes out as a single user message and
    the reply may be ``{"text"}`` or an OpenAI-style ``choices`` list.
    """

    def __init__(
        self,
        endpoint: ProviderEndpoint,
        chat: bool = False,
        max_tokens: int = 16,
        backoff: float = 0.5,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint = endpoint
        self.model_name = endpoint.model_name
        self.chat = chat
        self.max_tokens = max_tokens
        self.backoff = backoff
        self._client = httpx.Client(timeout=endpoint.timeout, headers=dict(endpoint.headers), transport=transport)

    def _payload(self, prompt: str) -> dict:
        body = {"model": self.model_name, "max_tokens": self.max_tokens, "temperature": TEMPERATURE}
        if self.chat:
            body["messages"] = [{"role": "user", "content": prompt}]
        else:
            body["prompt"] = prompt
        return body

    @staticmethod
    def _text(data) -> str:
        if isinstance(data, dict):
            if isinstance(data.get("text"), str):
                return data["text"]
            choices = data.get("choices")
            if isinstance(choices, list) and choices:
                first = choices[0]
                msg = first.get("message") or {}
                if isinstance(msg.get("content"), str):
                    return msg["content"]
                if isinstance(first.get("text"), str):
                    return first["text"]
        raise ProviderError(f"unexpected response shape: {json.dumps(data)[:200]}")

    def complete(self, prompt: str) -> str:
        last: Exception | None = None
        for attempt in range(self.endpoint.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._client.post(self.endpoint.base_url, json=self._payload(prompt))
            except httpx.HTTPError as exc:
                last = exc
                log.warning("request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last = ProviderError(f"HTTP {resp.status_code}")
                log.warning("server returned %d (attempt %d)", resp.status_code, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise ProviderError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return self._text(resp.json())
            except ValueError as exc:
                raise ProviderError(f"response is not JSON: {exc}") from None
        raise ProviderError(f"gave up after {self.endpoint.max_retries + 1} attempts: {last}")

    def close(self) -> None:
        self._client.close()


class GoldOracleProvider:
    """Answers the letter the gold option sits under in the scored question."""

    model_name = "gold-oracle"

    def __init__(self, items: Sequence[McqItem]):
        self.items = list(items)

    def complete(self, prompt: str) -> str:
        # the scored question is the last stem in the prompt
        pos, item = max(((prompt.rfind(i.stem), i) for i in self.items), key=lambda p: (p[0], len(p[1].stem)))
        if pos < 0:
            return "I do not know."
        tail = prompt[pos + len(item.stem):]
        for letter in LETTERS:
            if f"\n{letter}. {item.gold}\n" in tail:
                return f"Answer: {letter}"
        return "I do not know."


class FixedLetterProvider:
    def __init__(self, letter: str = "A"):
        if letter not in LETTERS:
            raise ValueError(f"letter must be one of {LETTERS}")
        self.letter = letter
        self.model_name = f"fixed-{letter}"

    def complete(self, prompt: str) -> str:
        return self.letter


class RandomProvider:
    """Uniform letter, seeded per prompt so answers do not depend on call order."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.model_name = f"random-{seed}"

    def complete(self, prompt: str) -> str:
        return random.Random(f"{self.seed}\x00{prompt}").choice(LETTERS)


def provider_from_config(config: Mapping, items: Sequence[McqItem] = (), environ: Optional[Mapping[str, str]] = None) -> Provider:
    """Build a provider from a config mapping.

    ``kind`` is one of http, chat, gold, fixed, random. HTTP kinds read the
    auth token from the environment variable named by ``auth_env`` and send
    it in ``auth_header`` (default ``Authorization``, as ``Bearer <token>``).
    """
    environ = os.environ if environ is None else environ
    kind = config.get("kind", "http")
    if kind == "gold":
        return GoldOracleProvider(items)
    if kind == "fixed":
        return FixedLetterProvider(config.get("letter", "A"))
    if kind == "random":
        return RandomProvider(int(config.get("seed", 0)))
    if kind not in ("http", "chat"):
        raise ProviderError(f"unknown provider kind {kind!r}")

    headers: Dict[str, str] = dict(config.get("headers") or {})
    auth_env = config.get("auth_env")
    if auth_env:
        token = environ.get(auth_env)
        if not token:
            raise ProviderError(f"environment variable {auth_env} is not set")
        header = config.get("auth_header", "Authorization")
        headers[header] = f"Bearer {token}" if header == "Authorization" else token
    try:
        endpoint = ProviderEndpoint(
            base_url=config.get("base_url", ""),
            model_name=config.get("model", ""),
            timeout=float(config.get("timeout", 30.0)),
            max_retries=int(config.get("max_retries", 2)),
            headers=headers,
        )
    except ValueError as exc:
        raise ProviderError(f"bad provider config: {exc}") from None
    return HttpProvider(endpoint, chat=kind == "chat", max_tokens=int(config.get("max_tokens", 16)))


def load_provider_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ProviderError(f"provider config not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ProviderError(f"provider config is not JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ProviderError("provider config must be a JSON object")
    return data
