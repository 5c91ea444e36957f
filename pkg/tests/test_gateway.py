import json

import pytest

from llmcd.errors import (
    AuthError,
    ConfigError,
    ContextLengthError,
    DataError,
    MalformedReplyError,
    ProviderError,
    RetriesExhaustedError,
)
from llmcd.gateway import (
    ChatRequest,
    ChatResponse,
    HttpProvider,
    Provider,
    ProviderConfig,
    ReplayCache,
    canonical_request_key,
    complete,
    load_provider_config,
)
from llmcd.serialize import estimate_tokens

KEY_VAR = "LLMCD_TEST_KEY"

OK_BODY = {
    "choices": [{"message": {"content": "Node:0; Community:1"}}],
    "usage": {"prompt_tokens": 10, "completion_tokens": 5},
}


def make_config(**overrides):
    base = dict(
        endpoint_url="https://api.example.test/v1/chat",
        model_name="test-model",
        api_key_env_var=KEY_VAR,
    )
    base.update(overrides)
    return ProviderConfig(**base)


def make_request(message="Node 0 is connected to: 1\nAssign communities.", **kw):
    kw.setdefault("model_name", "test-model")
    kw.setdefault("request_id", "unit:run0:chunk0")
    return ChatRequest(message=message, **kw)


class ScriptedTransport:
    """Returns scripted (status, body) outcomes; repeats the last one."""

    def __init__(self, *script):
        self.script = list(script)
        self.calls = []

    def __call__(self, url, headers, payload, timeout):
        self.calls.append(
            {
                "url": url,
                "headers": dict(headers),
                "payload": json.loads(json.dumps(payload)),
                "timeout": timeout,
            }
        )
        item = self.script[0] if len(self.script) == 1 else self.script.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


class VirtualClock:
    def __init__(self):
        self.now = 0.0
        self.sleeps = []

    def __call__(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds


@pytest.fixture
def api_key(monkeypatch):
    monkeypatch.setenv(KEY_VAR, "sk-unit-test")


def make_provider(transport, config=None, **kw):
    clock = kw.pop("clock", VirtualClock())
    return (
        HttpProvider(
            config or make_config(),
            transport=transport,
            clock=clock,
            sleep=clock.sleep,
            **kw,
        ),
        clock,
    )


class TestRequestResponseValidation:
    def test_empty_message_rejected(self):
        with pytest.raises(DataError):
            make_request(message="")

    def test_negative_temperature_rejected(self):
        with pytest.raises(ConfigError):
            make_request(temperature=-0.1)

    def test_zero_output_budget_rejected(self):
        with pytest.raises(ConfigError):
            make_request(max_output_tokens=0)

    def test_request_defaults(self):
        req = make_request()
        assert req.temperature == 0.0
        assert req.max_output_tokens == 4096

    def test_negative_latency_rejected(self):
        with pytest.raises(DataError):
            ChatResponse(
                text="x", input_tokens=1, output_tokens=1,
                latency_seconds=-0.1, provider_id="p",
            )

    def test_negative_tokens_rejected(self):
        with pytest.raises(DataError):
            ChatResponse(
                text="x", input_tokens=-1, output_tokens=1,
                latency_seconds=0.0, provider_id="p",
            )

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            make_config(endpoint_url="")
        with pytest.raises(ConfigError):
            make_config(model_name="")
        with pytest.raises(ConfigError):
            make_config(api_key_env_var="")
        with pytest.raises(ConfigError):
            make_config(max_retries=-1)
        with pytest.raises(ConfigError):
            make_config(requests_per_minute=0)
        with pytest.raises(ConfigError):
            make_config(context_window_tokens=0)

    def test_config_defaults(self):
        cfg = make_config()
        assert cfg.max_retries == 3
        assert cfg.requests_per_minute == 60
        assert cfg.context_window_tokens == 128000
        assert cfg.response_text_path == ("choices", 0, "message", "content")


class TestLoadProviderConfig:
    def write(self, tmp_path, data):
        path = tmp_path / "provider.json"
        path.write_text(
            data if isinstance(data, str) else json.dumps(data), encoding="utf-8"
        )
        return path

    def test_minimal_round_trip(self, tmp_path):
        path = self.write(
            tmp_path,
            {
                "endpoint_url": "https://api.example.test/v1/chat",
                "model_name": "m",
                "api_key_env_var": KEY_VAR,
            },
        )
        cfg = load_provider_config(path)
        assert cfg.model_name == "m"
        assert cfg.max_retries == 3

    def test_path_fields_become_tuples(self, tmp_path):
        path = self.write(
            tmp_path,
            {
                "endpoint_url": "u",
                "model_name": "m",
                "api_key_env_var": KEY_VAR,
                "response_text_path": ["output", 0, "text"],
            },
        )
        assert load_provider_config(path).response_text_path == ("output", 0, "text")

    @pytest.mark.parametrize(
        "field", ["api_key", "apikey", "apiKey", "key", "secret", "token"]
    )
    def test_inline_credentials_rejected(self, tmp_path, field):
        path = self.write(
            tmp_path,
            {
                "endpoint_url": "u",
                "model_name": "m",
                "api_key_env_var": KEY_VAR,
                field: "sk-oops",
            },
        )
        with pytest.raises(ConfigError):
            load_provider_config(path)

    def test_unknown_field_rejected(self, tmp_path):
        path = self.write(
            tmp_path,
            {
                "endpoint_url": "u",
                "model_name": "m",
                "api_key_env_var": KEY_VAR,
                "retries": 5,
            },
        )
        with pytest.raises(ConfigError):
            load_provider_config(path)

    def test_missing_required_rejected(self, tmp_path):
        path = self.write(tmp_path, {"endpoint_url": "u"})
        with pytest.raises(ConfigError):
            load_provider_config(path)

    def test_invalid_json_rejected(self, tmp_path):
        path = self.write(tmp_path, "{not json")
        with pytest.raises(ConfigError):
            load_provider_config(path)

    def test_non_object_rejected(self, tmp_path):
        path = self.write(tmp_path, "[1, 2]")
        with pytest.raises(ConfigError):
            load_provider_config(path)

    def test_missing_file_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_provider_config(tmp_path / "nope.json")


class TestAuth:
    def test_unset_env_var_fails_before_any_network(self, monkeypatch):
        monkeypatch.delenv(KEY_VAR, raising=False)
        transport = ScriptedTransport((200, OK_BODY))
        provider, _ = make_provider(transport)
        with pytest.raises(AuthError):
            provider.complete(make_request())
        assert transport.calls == []

    def test_empty_env_var_fails(self, monkeypatch):
        monkeypatch.setenv(KEY_VAR, "")
        transport = ScriptedTransport((200, OK_BODY))
        provider, _ = make_provider(transport)
        with pytest.raises(AuthError):
            provider.complete(make_request())
        assert transport.calls == []

    def test_key_sent_as_bearer_header(self, api_key):
        transport = ScriptedTransport((200, OK_BODY))
        provider, _ = make_provider(transport)
        provider.complete(make_request())
        auth = transport.calls[0]["headers"]["Authorization"]
        assert auth == "Bearer sk-unit-test"


class TestSuccessPath:
    def test_provider_reported_tokens(self, api_key):
        transport = ScriptedTransport((200, OK_BODY))
        provider, _ = make_provider(transport)
        resp = provider.complete(make_request())
        assert resp.text == "Node:0; Community:1"
        assert resp.input_tokens == 10
        assert resp.output_tokens == 5
        assert resp.token_source == "provider"
        assert resp.provider_id == "http:test-model"

    def test_token_estimate_fallback(self, api_key):
        body = {"choices": [{"message": {"content": "Node:0; Community:1"}}]}
        transport = ScriptedTransport((200, body))
        provider, _ = make_provider(transport)
        req = make_request()
        resp = provider.complete(req)
        assert resp.token_source == "estimate"
        assert resp.input_tokens == estimate_tokens(req.message)
        assert resp.output_tokens == estimate_tokens(resp.text)

    def test_missing_text_path_is_malformed(self, api_key):
        transport = ScriptedTransport((200, {"unexpected": True}))
        provider, _ = make_provider(transport)
        with pytest.raises(MalformedReplyError):
            provider.complete(make_request())

    def test_latency_from_clock(self, api_key):
        clock = VirtualClock()

        def transport(url, headers, payload, timeout):
            clock.now += 0.25
            return 200, OK_BODY

        provider, _ = make_provider(transport, clock=clock)
        resp = provider.complete(make_request())
        assert resp.latency_seconds == pytest.approx(0.25)

    def test_payload_shape(self, api_key):
        transport = ScriptedTransport((200, OK_BODY))
        cfg = make_config(
            system_message="Answer tersely.",
            max_tokens_field="max_completion_tokens",
            extra_payload={"top_p": 0.5},
        )
        provider, _ = make_provider(transport, config=cfg)
        req = make_request(temperature=0.5, max_output_tokens=77)
        provider.complete(req)
        payload = transport.calls[0]["payload"]
        assert payload["model"] == "test-model"
        assert payload["messages"][0] == {
            "role": "system",
            "content": "Answer tersely.",
        }
        assert payload["messages"][1] == {"role": "user", "content": req.message}
        assert payload["temperature"] == 0.5
        assert payload["max_completion_tokens"] == 77
        assert "max_tokens" not in payload
        assert payload["top_p"] == 0.5

    def test_no_system_message_means_single_message(self, api_key):
        transport = ScriptedTransport((200, OK_BODY))
        provider, _ = make_provider(transport)
        provider.complete(make_request())
        assert len(transport.calls[0]["payload"]["messages"]) == 1

    def test_custom_response_text_path(self, api_key):
        cfg = make_config(response_text_path=("output", 0, "text"))
        body = {"output": [{"text": "Node:3; Community:a"}]}
        transport = ScriptedTransport((200, body))
        provider, _ = make_provider(transport, config=cfg)
        assert provider.complete(make_request()).text == "Node:3; Community:a"


class TestRetries:
    def test_connection_failures_then_success(self, api_key):
        transport = ScriptedTransport(
            ConnectionError("refused"), ConnectionError("refused"), (200, OK_BODY)
        )
        provider, clock = make_provider(transport)
        resp = provider.complete(make_request())
        assert resp.text == "Node:0; Community:1"
        assert len(transport.calls) == 3
        assert clock.sleeps == [1.0, 2.0]

    def test_server_error_then_success(self, api_key):
        transport = ScriptedTransport((500, {"error": "boom"}), (200, OK_BODY))
        provider, _ = make_provider(transport)
        provider.complete(make_request())
        assert len(transport.calls) == 2

    def test_rate_limit_status_is_transient(self, api_key):
        transport = ScriptedTransport((429, {"error": "slow down"}), (200, OK_BODY))
        provider, _ = make_provider(transport)
        provider.complete(make_request())
        assert len(transport.calls) == 2

    def test_retries_exhausted(self, api_key):
        transport = ScriptedTransport(ConnectionError("refused"))
        provider, clock = make_provider(
            transport, config=make_config(max_retries=2)
        )
        with pytest.raises(RetriesExhaustedError):
            provider.complete(make_request())
        assert len(transport.calls) == 3
        assert clock.sleeps == [1.0, 2.0]

    def test_zero_retries_means_one_attempt(self, api_key):
        transport = ScriptedTransport((503, "unavailable"))
        provider, clock = make_provider(
            transport, config=make_config(max_retries=0)
        )
        with pytest.raises(RetriesExhaustedError):
            provider.complete(make_request())
        assert len(transport.calls) == 1
        assert clock.sleeps == []

    def test_backoff_base_scales(self, api_key):
        transport = ScriptedTransport(
            ConnectionError("x"), ConnectionError("x"), (200, OK_BODY)
        )
        provider, clock = make_provider(
            transport, config=make_config(backoff_base_seconds=0.5)
        )
        provider.complete(make_request())
        assert clock.sleeps == [0.5, 1.0]

    def test_auth_status_terminal(self, api_key):
        transport = ScriptedTransport((401, {"error": "bad key"}), (200, OK_BODY))
        provider, _ = make_provider(transport)
        with pytest.raises(AuthError):
            provider.complete(make_request())
        assert len(transport.calls) == 1

    def test_forbidden_status_terminal(self, api_key):
        transport = ScriptedTransport((403, {"error": "no access"}))
        provider, _ = make_provider(transport)
        with pytest.raises(AuthError):
            provider.complete(make_request())

    def test_context_length_status_terminal(self, api_key):
        body = {"error": {"message": "maximum context length exceeded"}}
        transport = ScriptedTransport((400, body), (200, OK_BODY))
        provider, _ = make_provider(transport)
        with pytest.raises(ContextLengthError):
            provider.complete(make_request())
        assert len(transport.calls) == 1

    def test_other_client_error_terminal(self, api_key):
        transport = ScriptedTransport((400, {"error": "bad request"}), (200, OK_BODY))
        provider, _ = make_provider(transport)
        with pytest.raises(ProviderError):
            provider.complete(make_request())
        assert len(transport.calls) == 1


class TestContextWindowGate:
    def test_oversized_request_never_dispatched(self, api_key):
        transport = ScriptedTransport((200, OK_BODY))
        provider, _ = make_provider(
            transport, config=make_config(context_window_tokens=10)
        )
        with pytest.raises(ContextLengthError):
            provider.complete(make_request(message="n" * 100))
        assert transport.calls == []

    def test_request_at_limit_dispatches(self, api_key):
        transport = ScriptedTransport((200, OK_BODY))
        provider, _ = make_provider(
            transport, config=make_config(context_window_tokens=25)
        )
        provider.complete(make_request(message="n" * 100))
        assert len(transport.calls) == 1


class TestRateLimiter:
    def test_sliding_window_spacing(self, api_key):
        clock = VirtualClock()
        call_times = []

        def transport(url, headers, payload, timeout):
            call_times.append(clock.now)
            return 200, OK_BODY

        provider, _ = make_provider(
            transport, config=make_config(requests_per_minute=3), clock=clock
        )
        for i in range(5):
            provider.complete(make_request(request_id=f"r{i}"))
        assert len(call_times) == 5
        for i in range(len(call_times) - 3):
            assert call_times[i + 3] >= call_times[i] + 60.0

    def test_no_waiting_under_the_limit(self, api_key):
        transport = ScriptedTransport((200, OK_BODY))
        provider, clock = make_provider(
            transport, config=make_config(requests_per_minute=10)
        )
        for i in range(5):
            provider.complete(make_request(request_id=f"r{i}"))
        assert clock.sleeps == []


class TestReplayCache:
    def test_round_trip(self, tmp_path):
        cache = ReplayCache(tmp_path / "replay")
        req = make_request()
        resp = ChatResponse(
            text="Node:0; Community:1",
            input_tokens=10,
            output_tokens=5,
            latency_seconds=0.1,
            provider_id="http:test-model",
            token_source="provider",
        )
        key = canonical_request_key("u", "m", req)
        assert cache.get(key) is None
        cache.put(key, req, resp)
        assert cache.get(key) == resp
        assert cache.path_for(key).exists()

    def test_corrupt_entry_raises(self, tmp_path):
        cache = ReplayCache(tmp_path / "replay")
        key = canonical_request_key("u", "m", make_request())
        cache.path_for(key).write_text("{broken", encoding="utf-8")
        with pytest.raises(DataError):
            cache.get(key)

    def test_no_tmp_leftovers(self, tmp_path):
        cache = ReplayCache(tmp_path / "replay")
        req = make_request()
        resp = ChatResponse(
            text="t", input_tokens=1, output_tokens=1,
            latency_seconds=0.0, provider_id="p",
        )
        cache.put("k" * 64, req, resp)
        assert list((tmp_path / "replay").glob("*.tmp")) == []

    def test_request_id_excluded_from_key(self):
        a = make_request(request_id="first")
        b = make_request(request_id="second")
        assert canonical_request_key("u", "m", a) == canonical_request_key("u", "m", b)

    def test_content_changes_the_key(self):
        base = make_request()
        assert canonical_request_key("u", "m", base) != canonical_request_key(
            "u", "m", make_request(message="different text")
        )
        assert canonical_request_key("u", "m", base) != canonical_request_key(
            "u", "m", make_request(temperature=1.0)
        )
        assert canonical_request_key("u", "m", base) != canonical_request_key(
            "u2", "m", base
        )

    def test_second_provider_replays_without_network(self, api_key, tmp_path):
        cache_dir = tmp_path / "replay"
        first_transport = ScriptedTransport((200, OK_BODY))
        provider1, _ = make_provider(
            first_transport, replay_cache=ReplayCache(cache_dir)
        )
        original = provider1.complete(make_request(request_id="a"))
        assert len(first_transport.calls) == 1

        second_transport = ScriptedTransport((500, "must not be called"))
        provider2, _ = make_provider(
            second_transport, replay_cache=ReplayCache(cache_dir)
        )
        replayed = provider2.complete(make_request(request_id="b"))
        assert replayed == original
        assert second_transport.calls == []


class TestModuleComplete:
    def test_config_is_wrapped(self, monkeypatch):
        monkeypatch.delenv(KEY_VAR, raising=False)
        with pytest.raises(AuthError):
            complete(make_request(), make_config())

    def test_provider_is_delegated(self):
        class Fixed(Provider):
            provider_id = "fixed"

            def complete(self, request):
                return ChatResponse(
                    text="ok", input_tokens=1, output_tokens=1,
                    latency_seconds=0.0, provider_id=self.provider_id,
                )

        assert complete(make_request(), Fixed()).text == "ok"
