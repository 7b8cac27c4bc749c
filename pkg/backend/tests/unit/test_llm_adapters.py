import json

import httpx
import pytest

from backend.app.config import Settings
from backend.app.core.llm_adapters import (
    BaseLLMAdapter,
    EchoLLMAdapter,
    LLMAdapterFactory,
    RecordingLLMAdapter,
    RemoteLLMAdapter,
    ScriptedLLMAdapter,
    build_scripted_backend,
    create_llm_adapter,
    extract_rewrite_request,
)
from backend.app.core.prompts import default_prompts
from backend.app.utils.exceptions import AdapterResponseError, AdapterTransportError, InvalidConfigurationError


class TestScripted:
    def test_echo_is_identity(self):
        assert EchoLLMAdapter().complete("same text") == "same text"

    def test_first_marker_wins(self):
        adapter = ScriptedLLMAdapter(rules=[("alpha", lambda p: "A"), ("beta", lambda p: "B")])
        assert adapter.complete("beta alpha") == "A"
        assert adapter.complete("beta") == "B"
        assert adapter.complete("none") == "none"

    def test_scripted_backend_is_deterministic(self):
        prompt = default_prompts.render("rewrite", request="where is my parcel")
        backend = build_scripted_backend()
        assert backend.complete(prompt) == backend.complete(prompt) == "where is my parcel"

    def test_rewrite_extraction_drops_context(self):
        prompt = default_prompts.render("rewrite", request="refund please\nDialogue context:\nkettle arrived dented")
        assert extract_rewrite_request(prompt) == "refund please"

    def test_recording_keeps_prompts(self):
        recorder = RecordingLLMAdapter()
        recorder.complete("one")
        recorder.complete("two")
        assert recorder.prompts == ["one", "two"]
        assert recorder.last_prompt == "two"

    def test_no_training_entry_point(self):
        public = {name for name in dir(BaseLLMAdapter) if not name.startswith("_")}
        assert public == {"complete", "get_adapter_info", "thread_safe"}


def remote(handler) -> RemoteLLMAdapter:
    return RemoteLLMAdapter("http://llm.test/complete", client=httpx.Client(transport=httpx.MockTransport(handler)))


class TestRemote:
    def test_completion(self):
        def handler(request: httpx.Request) -> httpx.Response:
            assert json.loads(request.read()) == {"prompt": "hi"}
            return httpx.Response(200, json={"completion": "hello"})

        assert remote(handler).complete("hi") == "hello"

    def test_empty_completion(self):
        with pytest.raises(AdapterResponseError):
            remote(lambda request: httpx.Response(200, json={"completion": "  "})).complete("hi")

    def test_transport_error(self):
        def handler(request):
            raise httpx.ReadTimeout("slow", request=request)

        with pytest.raises(AdapterTransportError):
            remote(handler).complete("hi")


class TestFactory:
    def test_scripted_without_endpoint(self):
        assert isinstance(LLMAdapterFactory.from_settings(Settings()), ScriptedLLMAdapter)

    def test_remote_with_endpoint(self):
        adapter = LLMAdapterFactory.from_settings(Settings(LLM_ENDPOINT="http://llm.test/complete", LLM_TOKEN="t"))
        try:
            assert isinstance(adapter, RemoteLLMAdapter)
        finally:
            adapter.close()

    def test_named_adapter(self):
        assert isinstance(create_llm_adapter("echo"), EchoLLMAdapter)
        assert LLMAdapterFactory.list_adapters() == ["echo", "remote", "scripted"]

    def test_unknown_adapter(self):
        with pytest.raises(InvalidConfigurationError):
            LLMAdapterFactory.create_adapter("gpt")
