from __future__ import annotations

import http.server
import json
import threading

import pytest

import radcompare.llm as llm
from radcompare import (
    Backend,
    BackendError,
    DirectScore,
    Judgment,
    LlmConfig,
    ReplyParseError,
    chat,
    direct_similarity,
    explain_score,
    judge_entity_context,
)
from radcompare.llm import (
    build_context_prompt,
    build_direct_prompt,
    build_explain_prompt,
    build_negation_prompt,
    parse_context_reply,
    parse_direct_reply,
)


class TestPromptGoldenStrings:
    def test_context_prompt(self):
        expected = (
            "Can you say whether the entity: 'back muscle spasm' is used in the "
            "same context or different context in these two texts?\n"
            "Text1: 'Back muscle spasm noted.'\n"
            "Text2: 'No back muscle spasm.'\n"
            "Please reply with a single-word answer: either 'same' or 'different'."
        )
        built = build_context_prompt(
            "back muscle spasm", "Back muscle spasm noted.", "No back muscle spasm."
        )
        assert built == expected

    def test_direct_prompt(self):
        expected = (
            "Please provide a similarity score out of 10 for these two reports. "
            "Focus on technical content rather than style or phrasing.\n\n"
            "Score: <score>, Reasoning: <reasoning>\n\n"
            "Report 1: final text here, Report 2: prelim text here"
        )
        assert build_direct_prompt("final text here", "prelim text here") == expected

    def test_explain_prompt(self):
        expected = (
            "These two reports have a similarity score of 0.63. "
            "Report 1 is the final report, and Report 2 is the preliminary report.\n"
            "Can you give a reason for the similarity score? "
            "Focus on technical details rather than structure or style.\n"
            "Report 1: the final\n"
            "Report 2: the prelim"
        )
        assert build_explain_prompt(0.63, "the final", "the prelim") == expected

    def test_negation_prompt(self):
        expected = (
            "Generate a report identical to this one but with one negation change, "
            "e.g., “broken arm” becomes “no broken arm”. "
            "Please only make one change from the original report.\n\n"
            "Report: Back muscle spasm noted.\n\n"
            "Please only output the report, no other text."
        )
        assert build_negation_prompt("Back muscle spasm noted.") == expected

    def test_explain_prompt_formats_two_decimals(self):
        assert "similarity score of 0.50." in build_explain_prompt(0.5, "a", "b")


class TestContextReplyParsing:
    @pytest.mark.parametrize(
        "reply,expected",
        [
            ("Same.", Judgment.SAME),
            ("  different\n", Judgment.DIFFERENT),
            ("SAME", Judgment.SAME),
            ("The answer is: different!", Judgment.DIFFERENT),
            ("'same'", Judgment.SAME),
        ],
    )
    def test_parses_single_keyword(self, reply, expected):
        assert parse_context_reply(reply) is expected

    @pytest.mark.parametrize(
        "reply",
        [
            "they differ somewhat",          # "differ" is not "different"
            "same in part, different in severity",
            "",
            "samey",
            "no keyword here",
        ],
    )
    def test_ambiguous_replies_return_none(self, reply):
        assert parse_context_reply(reply) is None

    def test_retry_then_error(self, monkeypatch):
        calls = []

        def scripted(config, prompt):
            calls.append(prompt)
            return "they differ somewhat"

        monkeypatch.setattr(llm, "chat", scripted)
        config = LlmConfig(max_retries=2)
        with pytest.raises(ReplyParseError, match="entity 'effusion'"):
            judge_entity_context(config, "effusion", "a effusion", "b effusion")
        assert len(calls) == 3  # initial + 2 retries

    def test_retry_recovers(self, monkeypatch):
        replies = iter(["hmm", "different"])
        monkeypatch.setattr(llm, "chat", lambda c, p: next(replies))
        judgment = judge_entity_context(LlmConfig(), "e", "x e", "y e")
        assert judgment.value is Judgment.DIFFERENT
        assert judgment.raw_reply == "different"


class TestDirectReplyParsing:
    def test_plausible_reply(self):
        parsed = parse_direct_reply("Score: 9.7, Reasoning: near identical")
        assert parsed == DirectScore(score=9.7, reasoning="near identical")

    def test_score_out_of_range(self):
        with pytest.raises(ValueError, match="score out of range"):
            parse_direct_reply("Score: 11, Reasoning: x")

    def test_markers_located_anywhere(self):
        parsed = parse_direct_reply("Reasoning first, Score: 8")
        assert parsed.score == 8.0
        assert parsed.reasoning == "Reasoning first,"

    def test_reasoning_before_score_marker(self):
        parsed = parse_direct_reply("Reasoning: too wordy. Score: 4.5")
        assert parsed.score == 4.5
        assert parsed.reasoning == "too wordy."

    def test_missing_marker_is_retryable(self):
        with pytest.raises(ReplyParseError, match="Score"):
            parse_direct_reply("I would give these a 7")

    def test_missing_number_is_retryable(self):
        with pytest.raises(ReplyParseError, match="number"):
            parse_direct_reply("Score: unknown")

    def test_direct_similarity_retries_missing_marker(self, monkeypatch):
        replies = iter(["no marker", "Score: 6, Reasoning: ok"])
        monkeypatch.setattr(llm, "chat", lambda c, p: next(replies))
        parsed = direct_similarity(LlmConfig(), "final", "prelim")
        assert parsed.score == 6.0

    def test_direct_similarity_rejects_out_of_range_immediately(self, monkeypatch):
        calls = []

        def scripted(config, prompt):
            calls.append(prompt)
            return "Score: 12, Reasoning: x"

        monkeypatch.setattr(llm, "chat", scripted)
        with pytest.raises(ValueError, match="score out of range"):
            direct_similarity(LlmConfig(max_retries=3), "final", "prelim")
        assert len(calls) == 1

    def test_empty_text_guard(self):
        with pytest.raises(ValueError, match="non-empty"):
            direct_similarity(LlmConfig(), "", "prelim")


class TestMockBackend:
    def test_chat_is_deterministic(self, mock_config):
        prompt = build_direct_prompt("Report text.", "Report text two.")
        assert chat(mock_config, prompt) == chat(mock_config, prompt)

    def test_generic_prompt_reply(self, mock_config):
        assert chat(mock_config, "anything else") == "Mock reply."

    def test_judge_negation_asymmetry(self, mock_config):
        judgment = judge_entity_context(
            mock_config,
            "back muscle spasm",
            "Back muscle spasm noted.",
            "No back muscle spasm noted.",
        )
        assert judgment.value is Judgment.DIFFERENT

    def test_judge_symmetric_negation_is_same(self, mock_config):
        judgment = judge_entity_context(
            mock_config,
            "back muscle spasm",
            "No back muscle spasm.",
            "No back muscle spasm.",
        )
        assert judgment.value is Judgment.SAME

    def test_judge_cue_beyond_three_tokens_ignored(self, mock_config):
        judgment = judge_entity_context(
            mock_config,
            "pneumonia",
            "No evidence at all of lobar pneumonia.",
            "Lobar pneumonia.",
        )
        # "no" sits more than three tokens before the entity in report 1
        assert judgment.value is Judgment.SAME

    def test_direct_score_reflects_overlap(self, mock_config):
        parsed = direct_similarity(mock_config, "alpha beta gamma", "alpha beta delta")
        assert parsed.score == pytest.approx(6.7)

    def test_direct_score_identical_reports(self, mock_config):
        parsed = direct_similarity(mock_config, "alpha beta", "alpha beta")
        assert parsed.score == 10.0

    def test_explain_template(self, mock_config):
        text = explain_score(mock_config, 0.63, "effusion noted", "effusion seen")
        assert text.startswith("Reports share 1 matched findings")
        assert "0.63" in text

    def test_explain_empty_prelim_guard(self, mock_config):
        with pytest.raises(ValueError, match="preliminary"):
            explain_score(mock_config, 0.5, "final", "   ")


class _ChatHandler(http.server.BaseHTTPRequestHandler):
    payloads: list[dict] = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).payloads.append(
            {"body": body, "auth": self.headers.get("Authorization")}
        )
        reply = {"choices": [{"message": {"content": "Score: 7.5, Reasoning: ok"}}]}
        data = json.dumps(reply).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def chat_server():
    server = http.server.HTTPServer(("127.0.0.1", 0), _ChatHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _ChatHandler.payloads = []
    yield f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"
    server.shutdown()
    thread.join()


class TestHttpBackend:
    def test_round_trip(self, chat_server):
        config = LlmConfig(backend=Backend.HTTP, base_url=chat_server, timeout=5)
        parsed = direct_similarity(config, "final", "prelim")
        assert parsed.score == 7.5
        sent = _ChatHandler.payloads[0]["body"]
        assert sent["model"] == "default"
        assert sent["temperature"] == 0.0
        assert sent["messages"][0]["role"] == "user"

    def test_bearer_token_from_env(self, chat_server, monkeypatch):
        monkeypatch.setenv(llm.ENV_TOKEN, "sekrit")
        config = LlmConfig(backend=Backend.HTTP, base_url=chat_server, timeout=5)
        chat(config, "hello")
        assert _ChatHandler.payloads[-1]["auth"] == "Bearer sekrit"

    def test_env_overrides_base_url(self, chat_server, monkeypatch):
        monkeypatch.setenv(llm.ENV_BASE_URL, chat_server)
        config = LlmConfig(backend=Backend.HTTP, base_url="http://127.0.0.1:9/none")
        assert chat(config, "hi") == "Score: 7.5, Reasoning: ok"

    def test_unreachable_host_errors_after_retries(self):
        config = LlmConfig(
            backend=Backend.HTTP,
            base_url="http://127.0.0.1:9/unreachable",
            max_retries=1,
            timeout=0.5,
        )
        with pytest.raises(BackendError, match="after 2 attempts"):
            chat(config, "hello")


class TestLlmConfig:
    def test_temperature_default_zero(self):
        assert LlmConfig().temperature == 0.0

    def test_negative_temperature_rejected(self):
        with pytest.raises(ValueError):
            LlmConfig(temperature=-0.1)

    def test_http_requires_url(self):
        with pytest.raises(ValueError, match="base_url"):
            LlmConfig(backend=Backend.HTTP)
