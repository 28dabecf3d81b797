"""Description generation against a text completion service.

The HTTP backend speaks the chat-completions JSON shape: POST a body of
``{model, messages, temperature}`` and read
``choices[0].message.content`` back. The fixture backend replays canned
responses from a JSON file keyed by emotion word, which gives offline runs
and tests a deterministic stand-in for the service.

Authentication material is read from the environment at request time,
under the variable name the backend was configured with. It travels in the
request header and exists nowhere else; in particular it is never part of
any output artifact.
"""

from __future__ import annotations

import json
import os
import time

from .descriptions import build_prompt, split_sentences
from .errors import GenerationError, PartialOutputError, SetupError

_RETRY_STATUS = (429, 500, 502, 503, 504)


class TransientFailure(Exception):
    """Internal marker for failures that are worth retrying."""


class HttpBackend:
    """Chat-completions client with environment-sourced credentials."""

    def __init__(
        self,
        endpoint,
        model="gpt-3.5-turbo",
        temperature=0.7,
        key_env="BRIDGE_API_KEY",
        timeout=30.0,
        session=None,
    ):
        if not endpoint:
            raise SetupError("generation endpoint must be non-empty")
        if not key_env:
            raise SetupError("the credential variable name must be non-empty")
        self.endpoint = endpoint
        self.model = model
        self.temperature = float(temperature)
        self.key_env = key_env
        self.timeout = float(timeout)
        self._session = session

    def _key(self):
        value = os.environ.get(self.key_env, "")
        if not value:
            raise SetupError(
                "credential variable {} is not set in the environment".format(
                    self.key_env
                )
            )
        return value

    def _get_session(self):
        if self._session is None:
            import requests

            self._session = requests.Session()
        return self._session

    def complete(self, word, prompt):
        headers = {
            "Authorization": "Bearer " + self._key(),
            "Content-Type": "application/json",
        }
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        try:
            response = self._get_session().post(
                self.endpoint, json=payload, headers=headers, timeout=self.timeout
            )
        except Exception as exc:
            raise TransientFailure(str(exc)) from exc
        status = response.status_code
        if status in _RETRY_STATUS:
            raise TransientFailure("HTTP {}".format(status))
        if status != 200:
            raise GenerationError("HTTP {} from generation endpoint".format(status))
        try:
            return response.json()["choices"][0]["message"]["content"]
        except Exception as exc:
            raise GenerationError(
                "malformed generation response: {}".format(exc)
            ) from exc


class FixtureBackend:
    """Canned word-to-response mapping for offline, deterministic runs."""

    def __init__(self, path):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                responses = json.load(fh)
        except (OSError, ValueError) as exc:
            raise SetupError(
                "could not load fixture file {!r}: {}".format(path, exc)
            ) from exc
        if not isinstance(responses, dict) or not all(
            isinstance(v, str) for v in responses.values()
        ):
            raise SetupError(
                "fixture file {!r} must map words to response strings".format(path)
            )
        self._responses = responses

    def complete(self, word, prompt):
        if word not in self._responses:
            raise GenerationError("fixture has no response for {!r}".format(word))
        return self._responses[word]


def generate_descriptions(
    records,
    backend,
    count=2,
    max_retries=3,
    backoff=0.5,
    requests_per_second=0.0,
    sleep=time.sleep,
    clock=time.monotonic,
):
    """Fill the "llm" field of every record through ``backend``.

    ``records`` are dicts with at least a "word"; a "dict" gloss passes
    through to the output. Transient failures retry up to ``max_retries``
    times with doubling backoff; a persistent failure aborts the run with
    the words completed so far. A response that does not yield ``count``
    sentences becomes a skip record: empty "llm", ``"skip": true`` and the
    raw response preserved for inspection. When ``requests_per_second`` is
    positive, calls are spaced at least that far apart.
    """
    if count not in (1, 2, 3):
        raise ValueError("sentence count must be 1, 2 or 3, got {!r}".format(count))
    if max_retries < 0:
        raise ValueError("max retries must be non-negative")
    min_interval = 1.0 / requests_per_second if requests_per_second > 0 else 0.0
    out = []
    completed = []
    last_call = None
    for record in records:
        word = str(record["word"]).strip()
        prompt = build_prompt(word, count)
        attempt = 0
        while True:
            if min_interval and last_call is not None:
                wait = min_interval - (clock() - last_call)
                if wait > 0:
                    sleep(wait)
            last_call = clock()
            try:
                text = backend.complete(word, prompt)
                break
            except TransientFailure as exc:
                if attempt >= max_retries:
                    raise PartialOutputError(
                        word,
                        completed,
                        "gave up after {} retries: {}".format(max_retries, exc),
                    ) from exc
                sleep(backoff * (2**attempt))
                attempt += 1
            except GenerationError as exc:
                raise PartialOutputError(word, completed, str(exc)) from exc
        sentences = split_sentences(text)
        result = {"word": word, "dict": str(record.get("dict", ""))}
        if len(sentences) >= count:
            result["llm"] = sentences[:count]
        else:
            result["llm"] = []
            result["skip"] = True
            result["raw"] = text
        out.append(result)
        completed.append(word)
    return out
