"""Provider-agnostic chat-completion gateway.

One generic JSON-over-HTTP adapter covers every vendor whose API is
chat-shaped; providers differ only by endpoint, model name, and
response field paths, all carried in a JSON config file. The API key
is read exclusively from an environment variable named in that config;
configs containing inline keys are rejected outright.

The HTTP adapter takes its transport, clock, and sleep functions as
injectable parameters so retry timing and rate limiting are testable
against a virtual clock without real sockets. Responses can be
recorded to a replay cache (one JSON file per request hash) and served
back byte-exactly, so evaluations can be repeated without re-spending
tokens.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import requests

from .errors import (
    AuthError,
    ConfigError,
    ContextLengthError,
    DataError,
    MalformedReplyError,
    ProviderError,
    RetriesExhaustedError,
)
from .serialize import estimate_tokens

__all__ = [
    "ChatRequest",
    "ChatResponse",
    "ProviderConfig",
    "Provider",
    "HttpProvider",
    "ReplayCache",
    "load_provider_config",
    "complete",
]

Transport = Callable[[str, Mapping[str, str], Mapping[str, Any], float], tuple[int, Any]]

TOKENS_FROM_PROVIDER = "provider"
TOKENS_ESTIMATED = "estimate"


@dataclass(frozen=True)
class ChatRequest:
    message: str
    model_name: str
    request_id: str
    temperature: float = 0.0
    max_output_tokens: int = 4096

    def __post_init__(self) -> None:
        if not self.message:
            raise DataError("chat request message must be nonempty")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ConfigError("max_output_tokens must be >= 1")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    input_tokens: int
    output_tokens: int
    latency_seconds: float
    provider_id: str
    token_source: str = TOKENS_ESTIMATED

    def __post_init__(self) -> None:
        if self.latency_seconds < 0:
            raise DataError("latency cannot be negative")
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise DataError("token counts cannot be negative")


_DEFAULT_TEXT_PATH: tuple[str | int, ...] = ("choices", 0, "message", "content")
_DEFAULT_IN_TOKENS_PATH: tuple[str | int, ...] = ("usage", "prompt_tokens")
_DEFAULT_OUT_TOKENS_PATH: tuple[str | int, ...] = ("usage", "completion_tokens")


@dataclass(frozen=True)
class ProviderConfig:
    """Everything needed to talk to one chat endpoint.

    The key itself never appears here, only the name of the
    environment variable holding it.
    """

    endpoint_url: str
    model_name: str
    api_key_env_var: str
    max_retries: int = 3
    requests_per_minute: int = 60
    context_window_tokens: int = 128000
    timeout_seconds: float = 60.0
    backoff_base_seconds: float = 1.0
    system_message: str = ""
    max_tokens_field: str = "max_tokens"
    response_text_path: tuple[str | int, ...] = _DEFAULT_TEXT_PATH
    input_tokens_path: tuple[str | int, ...] = _DEFAULT_IN_TOKENS_PATH
    output_tokens_path: tuple[str | int, ...] = _DEFAULT_OUT_TOKENS_PATH
    extra_payload: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.endpoint_url:
            raise ConfigError("endpoint_url must be nonempty")
        if not self.model_name:
            raise ConfigError("model_name must be nonempty")
        if not self.api_key_env_var:
            raise ConfigError("api_key_env_var must be nonempty")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.requests_per_minute < 1:
            raise ConfigError("requests_per_minute must be >= 1")
        if self.context_window_tokens < 1:
            raise ConfigError("context_window_tokens must be >= 1")


_FORBIDDEN_KEY_FIELDS = ("api_key", "apikey", "apiKey", "key", "secret", "token")


def load_provider_config(path: str | Path) -> ProviderConfig:
    """Read a provider config JSON file.

    Any field that looks like an inline credential is rejected: keys
    live in the environment, never on disk next to the experiment.
    """
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read provider config {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"provider config {path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"provider config {path}: expected a JSON object")
    for bad in _FORBIDDEN_KEY_FIELDS:
        if bad in data:
            raise ConfigError(
                f"provider config {path}: refusing inline credential field "
                f"{bad!r}; set {data.get('api_key_env_var', 'an env var')} "
                "in the environment instead"
            )
    known = {
        "endpoint_url",
        "model_name",
        "api_key_env_var",
        "max_retries",
        "requests_per_minute",
        "context_window_tokens",
        "timeout_seconds",
        "backoff_base_seconds",
        "system_message",
        "max_tokens_field",
        "response_text_path",
        "input_tokens_path",
        "output_tokens_path",
        "extra_payload",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(
            f"provider config {path}: unknown fields {sorted(unknown)}"
        )
    for pf in ("response_text_path", "input_tokens_path", "output_tokens_path"):
        if pf in data:
            data[pf] = tuple(data[pf])
    missing = {"endpoint_url", "model_name", "api_key_env_var"} - set(data)
    if missing:
        raise ConfigError(
            f"provider config {path}: missing required fields {sorted(missing)}"
        )
    return ProviderConfig(**data)


class Provider(ABC):
    """Anything that can answer a ChatRequest."""

    provider_id: str

    @abstractmethod
    def complete(self, request: ChatRequest) -> ChatResponse:
        raise NotImplementedError


def canonical_request_key(
    endpoint_url: str, model_name: str, request: ChatRequest
) -> str:
    """Content hash identifying a request for replay purposes.

    request_id is deliberately excluded: two requests with identical
    content replay to the same cached response.
    """
    payload = json.dumps(
        {
            "endpoint_url": endpoint_url,
            "model_name": model_name,
            "message": request.message,
            "temperature": request.temperature,
            "max_output_tokens": request.max_output_tokens,
        },
        sort_keys=True,
        ensure_ascii=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ReplayCache:
    """Directory of <request-hash>.json files, each holding the request
    content and the response it produced."""

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, key: str) -> Path:
        return self._dir / f"{key}.json"

    def get(self, key: str) -> ChatResponse | None:
        path = self.path_for(key)
        if not path.exists():
            return None
        try:
            record = json.loads(path.read_text(encoding="utf-8"))
            resp = record["response"]
            return ChatResponse(
                text=resp["text"],
                input_tokens=resp["input_tokens"],
                output_tokens=resp["output_tokens"],
                latency_seconds=resp["latency_seconds"],
                provider_id=resp["provider_id"],
                token_source=resp["token_source"],
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"corrupt replay cache entry {path}: {exc}") from exc

    def put(self, key: str, request: ChatRequest, response: ChatResponse) -> None:
        record = {
            "request": {
                "message": request.message,
                "model_name": request.model_name,
                "temperature": request.temperature,
                "max_output_tokens": request.max_output_tokens,
            },
            "response": {
                "text": response.text,
                "input_tokens": response.input_tokens,
                "output_tokens": response.output_tokens,
                "latency_seconds": response.latency_seconds,
                "provider_id": response.provider_id,
                "token_source": response.token_source,
            },
        }
        path = self.path_for(key)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(record, indent=2, sort_keys=True), encoding="utf-8")
        os.replace(tmp, path)


def _default_transport(
    url: str,
    headers: Mapping[str, str],
    payload: Mapping[str, Any],
    timeout: float,
) -> tuple[int, Any]:
    resp = requests.post(url, headers=dict(headers), json=payload, timeout=timeout)
    try:
        body: Any = resp.json()
    except ValueError:
        body = resp.text
    return resp.status_code, body


def _dig(body: Any, path: Sequence[str | int]) -> Any:
    cur = body
    for step in path:
        try:
            cur = cur[step]
        except (KeyError, IndexError, TypeError):
            return None
    return cur


_CONTEXT_MARKERS = ("context_length", "context length", "maximum context", "too many tokens")


class HttpProvider(Provider):
    """Generic JSON chat adapter with rate limiting, retries, and
    optional replay caching.

    Transient failures (connection errors, HTTP 429 and 5xx) are
    retried up to max_retries with exponential backoff; auth and
    context-length failures are terminal immediately. The auth check
    runs before any network traffic.
    """

    def __init__(
        self,
        config: ProviderConfig,
        *,
        transport: Transport | None = None,
        clock: Callable[[], float] | None = None,
        sleep: Callable[[float], None] | None = None,
        replay_cache: ReplayCache | None = None,
    ):
        self._config = config
        self._transport = transport or _default_transport
        self._clock = clock or time.monotonic
        self._sleep = sleep or time.sleep
        self._cache = replay_cache
        self._window: deque[float] = deque()
        self._lock = threading.Lock()
        self.provider_id = f"http:{config.model_name}"

    def _api_key(self) -> str:
        key = os.environ.get(self._config.api_key_env_var, "")
        if not key:
            raise AuthError(
                f"environment variable {self._config.api_key_env_var} is "
                "unset or empty; cannot authenticate"
            )
        return key

    def _acquire_slot(self) -> None:
        # sliding 60s window across threads
        while True:
            with self._lock:
                now = self._clock()
                while self._window and now - self._window[0] >= 60.0:
                    self._window.popleft()
                if len(self._window) < self._config.requests_per_minute:
                    self._window.append(now)
                    return
                wait = 60.0 - (now - self._window[0])
            self._sleep(max(wait, 0.0))

    def _classify_status(self, status: int, body: Any) -> None:
        """Raise a terminal error, or return for transient statuses."""
        if status in (401, 403):
            raise AuthError(f"provider rejected credentials (HTTP {status})")
        if status == 429 or status >= 500:
            return
        if 400 <= status < 500:
            text = json.dumps(body) if isinstance(body, (dict, list)) else str(body)
            lowered = text.lower()
            if any(marker in lowered for marker in _CONTEXT_MARKERS):
                raise ContextLengthError(
                    f"provider reports the request exceeded its context "
                    f"window (HTTP {status})"
                )
            raise ProviderError(f"provider rejected request (HTTP {status}): {text[:500]}")

    def complete(self, request: ChatRequest) -> ChatResponse:
        cfg = self._config
        key = self._api_key()
        if estimate_tokens(request.message) > cfg.context_window_tokens:
            raise ContextLengthError(
                f"estimated {estimate_tokens(request.message)} input tokens "
                f"exceed the configured context window of "
                f"{cfg.context_window_tokens}; refusing to truncate"
            )
        cache_key = canonical_request_key(cfg.endpoint_url, cfg.model_name, request)
        if self._cache is not None:
            hit = self._cache.get(cache_key)
            if hit is not None:
                return hit

        messages = []
        if cfg.system_message:
            messages.append({"role": "system", "content": cfg.system_message})
        messages.append({"role": "user", "content": request.message})
        payload: dict[str, Any] = {
            "model": request.model_name or cfg.model_name,
            "messages": messages,
            "temperature": request.temperature,
            cfg.max_tokens_field: request.max_output_tokens,
        }
        payload.update(cfg.extra_payload)
        headers = {
            "Authorization": f"Bearer {key}",
            "Content-Type": "application/json",
        }

        last_failure = ""
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                self._sleep(cfg.backoff_base_seconds * 2 ** (attempt - 1))
            self._acquire_slot()
            started = self._clock()
            try:
                status, body = self._transport(
                    cfg.endpoint_url, headers, payload, cfg.timeout_seconds
                )
            except (requests.RequestException, OSError) as exc:
                last_failure = f"connection failure: {exc}"
                continue
            elapsed = max(self._clock() - started, 0.0)
            self._classify_status(status, body)
            if status != 200:
                last_failure = f"HTTP {status}"
                continue
            text = _dig(body, cfg.response_text_path)
            if not isinstance(text, str):
                raise MalformedReplyError(
                    f"provider reply has no text at path "
                    f"{list(cfg.response_text_path)}"
                )
            in_tok = _dig(body, cfg.input_tokens_path)
            out_tok = _dig(body, cfg.output_tokens_path)
            reported = isinstance(in_tok, int) and isinstance(out_tok, int)
            response = ChatResponse(
                text=text,
                input_tokens=in_tok if reported else estimate_tokens(request.message),
                output_tokens=out_tok if reported else estimate_tokens(text),
                latency_seconds=elapsed,
                provider_id=self.provider_id,
                token_source=TOKENS_FROM_PROVIDER if reported else TOKENS_ESTIMATED,
            )
            if self._cache is not None:
                self._cache.put(cache_key, request, response)
            return response
        raise RetriesExhaustedError(
            f"gave up after {cfg.max_retries + 1} attempts; last failure: "
            f"{last_failure}"
        )


def complete(request: ChatRequest, provider: Provider | ProviderConfig) -> ChatResponse:
    """Send one request through any provider handle or raw config."""
    if isinstance(provider, ProviderConfig):
        provider = HttpProvider(provider)
    return provider.complete(request)
