import json

import httpx
import pytest

from kgchat.config import fixture_root
from kgchat.errors import ConfigError, GatewayError, GatewayTimeout, MissingFixture
from kgchat.gateway import (
    ANNOTATE_TEMPLATE,
    CHAT_TEMPLATE,
    SCOPE_TEMPLATE,
    ChatGateway,
    fixture_key,
    normalize_prompt,
)

TRANSCRIPTS = fixture_root() / "transcripts"
KG_TYPES = ["Anatomy", "Disorders", "Drugs", "Physiology", "Supplements"]
BLURB = "dietary supplements and neurodegenerative conditions"

FISH_OIL_Q = "Does fish oil contain Omega-3 fatty acids?"
FISH_OIL_ANSWER = (
    "[fish oil]($n1) is known for [containing]($r1, $n1, $n2) a rich "
    "content of [Omega-3 fatty acids]($n2)."
)


def replay_gateway(**kwargs) -> ChatGateway:
    options = dict(
        mode="replay", fixtures_dir=TRANSCRIPTS, kg_types=KG_TYPES, domain_blurb=BLURB
    )
    options.update(kwargs)
    return ChatGateway(**options)


def sse_body(chunks) -> str:
    lines = []
    for chunk in chunks:
        payload = {"choices": [{"delta": {"content": chunk}}]}
        lines.append(f"data: {json.dumps(payload)}\n")
    lines.append("data: [DONE]\n")
    return "\n".join(lines)


class TestTemplates:
    def test_render_fills_placeholders(self):
        system, user = ANNOTATE_TEMPLATE.render("q?", "Drugs", "(none)")
        assert "q?" in user
        assert "Drugs" in user
        assert "{" not in user.replace("{relation phrase}", "")  # no unresolved fields

    def test_all_templates_render(self):
        for template in (ANNOTATE_TEMPLATE, SCOPE_TEMPLATE, CHAT_TEMPLATE):
            system, user = template.render("question", "types", "history")
            assert system
            assert "question" in user


class TestFixtureKeys:
    def test_stable_across_calls(self):
        a = fixture_key("annotate-v1", "sys", "user text")
        b = fixture_key("annotate-v1", "sys", "user text")
        assert a == b
        assert len(a) == 24

    def test_whitespace_normalized(self):
        a = fixture_key("t", "sys", "user   text\n\twith   gaps")
        b = fixture_key("t", "sys", "user text with gaps")
        assert a == b
        assert normalize_prompt(" a  b\n") == "a b"

    def test_distinct_templates_distinct_keys(self):
        assert fixture_key("a", "s", "u") != fixture_key("b", "s", "u")


class TestModeValidation:
    def test_replay_requires_fixtures_dir(self):
        with pytest.raises(ConfigError):
            ChatGateway(mode="replay")

    def test_live_requires_endpoint(self):
        with pytest.raises(ConfigError):
            ChatGateway(mode="live", fixtures_dir=TRANSCRIPTS)

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            ChatGateway(mode="offline", fixtures_dir=TRANSCRIPTS)


class TestReplay:
    def test_fish_oil_answer_streams_verbatim(self):
        gateway = replay_gateway()
        chunks = []
        text = gateway.annotated_answer(FISH_OIL_Q, "(none)", sink=chunks.append)
        assert text == FISH_OIL_ANSWER
        assert "".join(chunks) == text
        assert len(chunks) > 1  # stored as a genuine chunk sequence

    def test_missing_fixture_names_key(self):
        gateway = replay_gateway()
        with pytest.raises(MissingFixture) as excinfo:
            gateway.annotated_answer("never recorded question", "(none)")
        assert excinfo.value.template == "annotate-v1"
        assert len(excinfo.value.key) == 24

    def test_scope_verdicts(self):
        gateway = replay_gateway()
        assert gateway.check_scope(
            "Can Procaine slow the progression of Alzheimer's disease?"
        ) is True
        assert gateway.check_scope("What is the capital of France?") is False

    def test_scope_deterministic(self):
        gateway = replay_gateway()
        question = "Can rivastigmine treat AD?"
        assert gateway.check_scope(question) == gateway.check_scope(question)

    def test_unparseable_verdict_defaults_false(self, tmp_path, caplog):
        fixtures = tmp_path / "fx"
        gateway = ChatGateway(mode="replay", fixtures_dir=fixtures, kg_types=KG_TYPES)
        system, user = SCOPE_TEMPLATE.render(
            "odd question", gateway._kg_types_text(), "(none)"
        )
        key = fixture_key(SCOPE_TEMPLATE.name, system, user)
        path = fixtures / SCOPE_TEMPLATE.name / f"{key}.json"
        path.parent.mkdir(parents=True)
        path.write_text(
            json.dumps({"key": key, "template": SCOPE_TEMPLATE.name, "prompt": "p", "chunks": ["maybe?"]})
        )
        with caplog.at_level("WARNING"):
            assert gateway.check_scope("odd question") is False
        assert any("undecidable" in r.message for r in caplog.records)

    def test_out_of_scope_chat_answer(self):
        gateway = replay_gateway()
        text = gateway.plain_answer("What is the capital of France?", "(none)")
        assert text == "The capital of France is Paris."


class TestRecordThenReplay:
    def test_round_trip_reproduces_chunks(self, tmp_path):
        chunks = ["Hello ", "[world]", "($n1) of ", "fixtures."]
        transport = httpx.MockTransport(
            lambda request: httpx.Response(
                200, text=sse_body(chunks), headers={"content-type": "text/event-stream"}
            )
        )
        fixtures = tmp_path / "recorded"
        recorder = ChatGateway(
            mode="record",
            fixtures_dir=fixtures,
            base_url="http://chat.test/v1",
            model="test-model",
            kg_types=KG_TYPES,
            transport=transport,
        )
        question = "A question worth recording?"
        recorded = recorder.annotated_answer(question, "(none)")
        assert recorded == "".join(chunks)
        replayer = ChatGateway(mode="replay", fixtures_dir=fixtures, kg_types=KG_TYPES)
        replayed_chunks = []
        replayed = replayer.annotated_answer(question, "(none)", sink=replayed_chunks.append)
        assert replayed == recorded
        assert replayed_chunks == chunks
        # no stray temp files from the atomic write
        assert not list(fixtures.rglob("*.tmp"))

    def test_recorded_fixture_is_well_formed(self, tmp_path):
        transport = httpx.MockTransport(
            lambda request: httpx.Response(200, text=sse_body(["yes"]))
        )
        fixtures = tmp_path / "recorded"
        recorder = ChatGateway(
            mode="record",
            fixtures_dir=fixtures,
            base_url="http://chat.test/v1",
            model="test-model",
            kg_types=KG_TYPES,
            transport=transport,
        )
        assert recorder.check_scope("Is this in scope?") is True
        (fixture_file,) = (fixtures / "scope-v1").glob("*.json")
        payload = json.loads(fixture_file.read_text())
        assert payload["chunks"] == ["yes"]
        assert payload["key"] == fixture_file.stem


class TestLiveTransport:
    def test_transport_error_retried_then_surfaced(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            raise httpx.ConnectError("refused")

        gateway = ChatGateway(
            mode="live",
            base_url="http://chat.test/v1",
            model="m",
            kg_types=KG_TYPES,
            transport=httpx.MockTransport(handler),
        )
        with pytest.raises(GatewayError):
            gateway.annotated_answer("q", "(none)")
        assert len(attempts) == 2

    def test_retry_recovers_from_single_failure(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            if len(attempts) == 1:
                raise httpx.ConnectError("refused")
            return httpx.Response(200, text=sse_body(["recovered"]))

        gateway = ChatGateway(
            mode="live",
            base_url="http://chat.test/v1",
            model="m",
            kg_types=KG_TYPES,
            transport=httpx.MockTransport(handler),
        )
        assert gateway.annotated_answer("q", "(none)") == "recovered"

    def test_timeout_surfaces_as_timeout(self):
        def handler(request):
            raise httpx.ReadTimeout("slow")

        gateway = ChatGateway(
            mode="live",
            base_url="http://chat.test/v1",
            model="m",
            kg_types=KG_TYPES,
            transport=httpx.MockTransport(handler),
        )
        with pytest.raises(GatewayTimeout):
            gateway.annotated_answer("q", "(none)")

    def test_http_error_status_surfaces(self):
        gateway = ChatGateway(
            mode="live",
            base_url="http://chat.test/v1",
            model="m",
            kg_types=KG_TYPES,
            transport=httpx.MockTransport(lambda r: httpx.Response(503, text="down")),
        )
        with pytest.raises(GatewayError):
            gateway.annotated_answer("q", "(none)")

    def test_malformed_stream_chunk_surfaces(self):
        body = "data: {\"weird\": true}\n\ndata: [DONE]\n"
        gateway = ChatGateway(
            mode="live",
            base_url="http://chat.test/v1",
            model="m",
            kg_types=KG_TYPES,
            transport=httpx.MockTransport(lambda r: httpx.Response(200, text=body)),
        )
        with pytest.raises(GatewayError):
            gateway.annotated_answer("q", "(none)")
