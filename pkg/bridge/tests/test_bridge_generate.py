import json

import pytest

from emobridge import (
    FixtureBackend,
    GenerationError,
    HttpBackend,
    PartialOutputError,
    SetupError,
    TransientFailure,
    generate_descriptions,
)

WORDS = [{"word": "joy", "dict": "a feeling"}, {"word": "fear", "dict": "dread"}]


def _fixture(tmp_path, mapping):
    path = tmp_path / "canned.json"
    path.write_text(json.dumps(mapping), encoding="utf-8")
    return FixtureBackend(str(path))


def test_fixture_backend_fills_two_sentences(tmp_path):
    backend = _fixture(
        tmp_path,
        {
            "joy": "1. She beamed.\n2. The day glowed.",
            "fear": "He froze. His heart raced.",
        },
    )
    out = generate_descriptions(WORDS, backend, count=2)
    assert out == [
        {"word": "joy", "dict": "a feeling", "llm": ["She beamed.", "The day glowed."]},
        {"word": "fear", "dict": "dread", "llm": ["He froze.", "His heart raced."]},
    ]


def test_count_three_takes_three(tmp_path):
    backend = _fixture(tmp_path, {"joy": "A one. B two. C three. D four."})
    (record,) = generate_descriptions([{"word": "joy"}], backend, count=3)
    assert record["llm"] == ["A one.", "B two.", "C three."]
    assert "skip" not in record


def test_unparseable_response_becomes_skip_record(tmp_path):
    backend = _fixture(tmp_path, {"joy": "just one sentence here."})
    (record,) = generate_descriptions([{"word": "joy"}], backend, count=2)
    assert record["skip"] is True
    assert record["llm"] == []
    assert record["raw"] == "just one sentence here."


def test_missing_fixture_word_is_partial_failure(tmp_path):
    backend = _fixture(tmp_path, {"joy": "A. B."})
    with pytest.raises(PartialOutputError) as err:
        generate_descriptions(WORDS, backend, count=2)
    assert err.value.word == "fear"
    assert err.value.completed == ("joy",)
    assert "joy" in str(err.value)


def test_fixture_validation(tmp_path):
    with pytest.raises(SetupError):
        FixtureBackend(str(tmp_path / "absent.json"))
    bad = tmp_path / "bad.json"
    bad.write_text('{"joy": 3}', encoding="utf-8")
    with pytest.raises(SetupError):
        FixtureBackend(str(bad))


class FlakyBackend:
    """Fails transiently a fixed number of times, then answers."""

    def __init__(self, failures, text="A. B."):
        self.failures = failures
        self.text = text
        self.calls = 0

    def complete(self, word, prompt):
        self.calls += 1
        if self.calls <= self.failures:
            raise TransientFailure("flap {}".format(self.calls))
        return self.text


def test_transient_failures_retry_with_backoff():
    backend = FlakyBackend(failures=2)
    sleeps = []
    out = generate_descriptions(
        [{"word": "joy"}],
        backend,
        count=2,
        max_retries=3,
        backoff=0.5,
        sleep=sleeps.append,
    )
    assert out[0]["llm"] == ["A.", "B."]
    assert backend.calls == 3
    assert sleeps == [0.5, 1.0]


def test_retries_exhausted_is_partial_failure():
    backend = FlakyBackend(failures=10)
    sleeps = []
    with pytest.raises(PartialOutputError) as err:
        generate_descriptions(
            [{"word": "joy"}],
            backend,
            count=2,
            max_retries=2,
            backoff=0.25,
            sleep=sleeps.append,
        )
    assert err.value.completed == ()
    assert sleeps == [0.25, 0.5]
    assert "2 retries" in str(err.value)


def test_rate_limiting_spaces_calls(tmp_path):
    backend = _fixture(tmp_path, {"joy": "A. B.", "fear": "C. D."})
    sleeps = []
    ticks = iter(range(100))
    generate_descriptions(
        WORDS,
        backend,
        count=2,
        requests_per_second=0.25,
        sleep=sleeps.append,
        clock=lambda: next(ticks),
    )
    assert sleeps == [3.0]


def test_count_validation(tmp_path):
    backend = _fixture(tmp_path, {"joy": "A. B."})
    with pytest.raises(ValueError):
        generate_descriptions([{"word": "joy"}], backend, count=5)


class FakeResponse:
    def __init__(self, status_code, doc):
        self.status_code = status_code
        self._doc = doc

    def json(self):
        return self._doc


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.requests = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.requests.append(
            {"url": url, "json": json, "headers": headers, "timeout": timeout}
        )
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def _reply(text):
    return FakeResponse(200, {"choices": [{"message": {"content": text}}]})


def test_http_backend_request_shape(monkeypatch):
    monkeypatch.setenv("BRIDGE_API_KEY", "sk-test-123")
    session = FakeSession([_reply("A. B.")])
    backend = HttpBackend(
        "https://api.example.test/v1/chat/completions",
        model="lm-large",
        temperature=0.3,
        session=session,
    )
    out = generate_descriptions([{"word": "joy"}], backend, count=2)
    assert out[0]["llm"] == ["A.", "B."]
    (request,) = session.requests
    assert request["url"] == "https://api.example.test/v1/chat/completions"
    assert request["headers"]["Authorization"] == "Bearer sk-test-123"
    assert request["json"]["model"] == "lm-large"
    assert request["json"]["temperature"] == 0.3
    assert request["json"]["messages"] == [
        {"role": "user", "content": "Write two sentences expressing joy's emotions."}
    ]


def test_http_backend_missing_credential(monkeypatch):
    monkeypatch.delenv("BRIDGE_API_KEY", raising=False)
    backend = HttpBackend("https://x.test/v1", session=FakeSession([]))
    with pytest.raises(SetupError, match="BRIDGE_API_KEY"):
        backend.complete("joy", "prompt")


def test_http_backend_custom_key_env(monkeypatch):
    monkeypatch.delenv("BRIDGE_API_KEY", raising=False)
    monkeypatch.setenv("OTHER_KEY", "zzz")
    session = FakeSession([_reply("A. B.")])
    backend = HttpBackend("https://x.test/v1", key_env="OTHER_KEY", session=session)
    backend.complete("joy", "p")
    assert session.requests[0]["headers"]["Authorization"] == "Bearer zzz"


def test_http_backend_retries_on_429_and_5xx(monkeypatch):
    monkeypatch.setenv("BRIDGE_API_KEY", "k")
    session = FakeSession(
        [FakeResponse(429, {}), FakeResponse(503, {}), _reply("A. B.")]
    )
    backend = HttpBackend("https://x.test/v1", session=session)
    sleeps = []
    out = generate_descriptions(
        [{"word": "joy"}], backend, count=2, max_retries=3, sleep=sleeps.append
    )
    assert out[0]["llm"] == ["A.", "B."]
    assert len(session.requests) == 3
    assert sleeps == [0.5, 1.0]


def test_http_backend_client_error_is_persistent(monkeypatch):
    monkeypatch.setenv("BRIDGE_API_KEY", "k")
    session = FakeSession([FakeResponse(401, {})])
    backend = HttpBackend("https://x.test/v1", session=session)
    with pytest.raises(PartialOutputError, match="HTTP 401"):
        generate_descriptions([{"word": "joy"}], backend, count=2)
    assert len(session.requests) == 1


def test_http_backend_connection_error_retries(monkeypatch):
    monkeypatch.setenv("BRIDGE_API_KEY", "k")
    session = FakeSession([ConnectionError("refused"), _reply("A. B.")])
    backend = HttpBackend("https://x.test/v1", session=session)
    out = generate_descriptions(
        [{"word": "joy"}], backend, count=2, sleep=lambda s: None
    )
    assert out[0]["llm"] == ["A.", "B."]


def test_http_backend_malformed_body(monkeypatch):
    monkeypatch.setenv("BRIDGE_API_KEY", "k")
    session = FakeSession([FakeResponse(200, {"nope": []})])
    backend = HttpBackend("https://x.test/v1", session=session)
    with pytest.raises(GenerationError, match="malformed"):
        backend.complete("joy", "p")


def test_http_backend_setup_validation():
    with pytest.raises(SetupError):
        HttpBackend("")
    with pytest.raises(SetupError):
        HttpBackend("https://x.test", key_env="")
