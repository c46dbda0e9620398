"""Chat-completion gateway: scope checks and annotated answer generation.

Three modes share one code path. Live streams from an HTTP endpoint
speaking the common chat-completions JSON contract (SSE deltas). Record
does the same but persists the chunk sequence as a transcript fixture.
Replay serves recorded transcripts only and performs no network I/O at
all, which is what makes the whole pipeline testable offline.

Transcripts are keyed by a hash of (template name, rendered prompt), with
whitespace normalized so keys are stable across platforms.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .errors import ConfigError, GatewayError, GatewayTimeout, MissingFixture

logger = logging.getLogger(__name__)

LIVE = "live"
REPLAY = "replay"
RECORD = "record"

Sink = Callable[[str], None]


@dataclass(frozen=True)
class PromptTemplate:
    """Named prompt with a fixed system text and a user-text pattern.

    The pattern may use the placeholders {question}, {kg_types} and
    {history_summary}; all three are always supplied at render time.
    """

    name: str
    system: str
    user_pattern: str

    def render(self, question: str, kg_types: str, history_summary: str) -> tuple[str, str]:
        try:
            user = self.user_pattern.format(
                question=question, kg_types=kg_types, history_summary=history_summary
            )
        except (KeyError, IndexError) as exc:
            raise GatewayError(f"template {self.name} has unresolved placeholder: {exc}") from exc
        return self.system, user


ANNOTATE_TEMPLATE = PromptTemplate(
    name="annotate-v1",
    system=(
        "You are a concise assistant that grounds every claim it can in a "
        "curated knowledge graph."
    ),
    user_pattern=(
        "Conversation so far: {history_summary}\n"
        "\n"
        "Answer the question below in two or three short sentences, and mark up "
        "your answer inline as you write it:\n"
        "- Wrap each key entity in square brackets followed by its marker, like "
        "[entity text]($nK), numbering K from 1 in order of first mention.\n"
        "- Wrap the single most important relation phrase of each sentence the "
        "same way, like [relation phrase]($rK, $nI, $nJ), where $nI and $nJ are "
        "the markers of its subject and object entities.\n"
        "- Prefer concrete entities of these kinds: {kg_types}.\n"
        "- Never reuse a marker id.\n"
        "\n"
        "Question: {question}"
    ),
)

SCOPE_TEMPLATE = PromptTemplate(
    name="scope-v1",
    system="You decide whether questions are answerable against a specific knowledge graph.",
    user_pattern=(
        # scope is a per-question decision: no history, so one recorded
        # verdict per question serves at any point in any conversation
        "The knowledge graph covers entities of these kinds: {kg_types}.\n"
        "\n"
        "Can the question below be checked against that graph? Reply with "
        "exactly one word: yes or no.\n"
        "\n"
        "Question: {question}"
    ),
)

CHAT_TEMPLATE = PromptTemplate(
    name="chat-v1",
    system="You are a concise, helpful assistant.",
    user_pattern=(
        "Conversation so far: {history_summary}\n"
        "\n"
        "Answer the question below in one or two short sentences.\n"
        "\n"
        "Question: {question}"
    ),
)

_WHITESPACE = re.compile(r"\s+")


def normalize_prompt(text: str) -> str:
    return _WHITESPACE.sub(" ", text.strip())


def fixture_key(template_name: str, system: str, user: str) -> str:
    rendered = normalize_prompt(system) + "\n" + normalize_prompt(user)
    digest = hashlib.sha256((template_name + "\0" + rendered).encode("utf-8"))
    return digest.hexdigest()[:24]


@dataclass(frozen=True)
class TranscriptFixture:
    key: str
    template: str
    prompt: str
    chunks: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "template": self.template,
            "prompt": self.prompt,
            "chunks": list(self.chunks),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TranscriptFixture":
        return cls(obj["key"], obj["template"], obj["prompt"], tuple(obj["chunks"]))


class ChatGateway:
    """Stateless per call; safe to share across concurrent requests."""

    def __init__(
        self,
        mode: str,
        fixtures_dir: str | Path | None = None,
        base_url: str | None = None,
        model: str | None = None,
        api_key: str | None = None,
        timeout: float = 60.0,
        kg_types: Iterable[str] = (),
        domain_blurb: str = "",
        transport=None,
    ):
        if mode not in (LIVE, REPLAY, RECORD):
            raise ConfigError(f"gateway mode must be live|replay|record, got {mode!r}")
        if mode in (REPLAY, RECORD) and fixtures_dir is None:
            raise ConfigError(f"{mode} mode requires a fixtures directory")
        if mode in (LIVE, RECORD) and (not base_url or not model):
            raise ConfigError(f"{mode} mode requires an endpoint base URL and model name")
        self.mode = mode
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else None
        self.base_url = base_url.rstrip("/") if base_url else None
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.kg_types = list(kg_types)
        self.domain_blurb = domain_blurb
        self._transport = transport

    # -- public operations --

    def check_scope(self, question: str) -> bool:
        """Ask whether the question is answerable against the graph.

        An unreadable verdict is retried once, then treated as out of
        scope with a logged diagnostic rather than failing the exchange.
        """
        if not question.strip():
            raise GatewayError("scope check needs a non-empty question")
        for attempt in (1, 2):
            text = self._complete(SCOPE_TEMPLATE, question, "(none)", sink=None)
            verdict = self._parse_verdict(text)
            if verdict is not None:
                return verdict
            logger.warning(
                "scope verdict unparseable (attempt %d): %r", attempt, text[:80]
            )
        logger.warning("scope verdict undecidable after retry; defaulting to out-of-scope")
        return False

    def annotated_answer(
        self, question: str, history_summary: str = "(none)", sink: Sink | None = None
    ) -> str:
        """Stream the annotated answer chunk by chunk into `sink`.

        Returns the complete response text (the concatenated chunks).
        """
        return self._complete(ANNOTATE_TEMPLATE, question, history_summary, sink)

    def plain_answer(
        self, question: str, history_summary: str = "(none)", sink: Sink | None = None
    ) -> str:
        """Ordinary chat answer for questions outside the graph's scope."""
        return self._complete(CHAT_TEMPLATE, question, history_summary, sink)

    # -- internals --

    def _kg_types_text(self) -> str:
        listing = ", ".join(self.kg_types) if self.kg_types else "(unspecified)"
        if self.domain_blurb:
            return f"{listing} ({self.domain_blurb})"
        return listing

    @staticmethod
    def _parse_verdict(text: str) -> bool | None:
        word = text.strip().split()[0].strip(".,!:;\"'").lower() if text.strip() else ""
        if word == "yes":
            return True
        if word == "no":
            return False
        return None

    def _fixture_path(self, template_name: str, key: str) -> Path:
        assert self.fixtures_dir is not None
        return self.fixtures_dir / template_name / f"{key}.json"

    def _complete(
        self,
        template: PromptTemplate,
        question: str,
        history_summary: str,
        sink: Sink | None,
    ) -> str:
        system, user = template.render(question, self._kg_types_text(), history_summary)
        key = fixture_key(template.name, system, user)
        if self.mode == REPLAY:
            chunks = self._replay_chunks(template.name, key)
        else:
            chunks = self._live_chunks(system, user)
            if self.mode == RECORD:
                self._persist_fixture(template.name, key, system, user, chunks)
        parts: list[str] = []
        for chunk in chunks:
            parts.append(chunk)
            if sink is not None:
                sink(chunk)
        return "".join(parts)

    def _replay_chunks(self, template_name: str, key: str) -> list[str]:
        path = self._fixture_path(template_name, key)
        if not path.exists():
            raise MissingFixture(template_name, key)
        try:
            fixture = TranscriptFixture.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, KeyError) as exc:
            raise GatewayError(f"fixture {path} unreadable: {exc}") from exc
        return list(fixture.chunks)

    def _persist_fixture(
        self, template_name: str, key: str, system: str, user: str, chunks: list[str]
    ) -> None:
        fixture = TranscriptFixture(
            key=key,
            template=template_name,
            prompt=normalize_prompt(system) + "\n" + normalize_prompt(user),
            chunks=tuple(chunks),
        )
        path = self._fixture_path(template_name, key)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(fixture.to_dict(), indent=2), encoding="utf-8")
        tmp.replace(path)

    def _live_chunks(self, system: str, user: str) -> list[str]:
        import httpx

        last_error: Exception | None = None
        for attempt in (1, 2):
            try:
                return self._stream_once(system, user)
            except GatewayTimeout:
                raise
            except (httpx.TransportError, GatewayError) as exc:
                last_error = exc
                logger.warning("chat request failed (attempt %d): %s", attempt, exc)
        raise GatewayError(f"chat request failed after retry: {last_error}")

    def _stream_once(self, system: str, user: str) -> list[str]:
        import httpx

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "stream": True,
        }
        chunks: list[str] = []
        try:
            with httpx.Client(
                headers=headers, timeout=self.timeout, transport=self._transport
            ) as client:
                with client.stream(
                    "POST", f"{self.base_url}/chat/completions", json=body
                ) as response:
                    if response.status_code != 200:
                        response.read()
                        raise GatewayError(
                            f"chat endpoint returned {response.status_code}: "
                            f"{response.text[:200]}"
                        )
                    for line in response.iter_lines():
                        if not line.startswith("data:"):
                            continue
                        data = line[len("data:") :].strip()
                        if data == "[DONE]":
                            break
                        try:
                            parsed = json.loads(data)
                            delta = parsed["choices"][0]["delta"].get("content")
                        except (json.JSONDecodeError, KeyError, IndexError) as exc:
                            raise GatewayError(f"malformed stream chunk: {exc}") from exc
                        if delta:
                            chunks.append(delta)
        except httpx.TimeoutException as exc:
            raise GatewayTimeout(f"chat endpoint timed out after {self.timeout}s") from exc
        return chunks
