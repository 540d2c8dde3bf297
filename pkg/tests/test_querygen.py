import pytest

from vcr.embedding import MockEmbeddingProvider, embed_pooled
from vcr.querygen import (GeneratedQuery, LlmClient, QuerySource, TopicSelection,
                          build_prompt, generate_query, template_query_text)

import numpy as np


def sel(*topics, custom=()):
    return TopicSelection(ontology_topics=tuple(topics), custom_terms=tuple(custom))


# --- prompt -------------------------------------------------------------

def test_prompt_exact_wording():
    assert build_prompt(sel("Science", "Policy")) == (
        "Write a full description for this TED talk which discusses "
        "the following topics Science, Policy.")


def test_prompt_single_topic():
    assert build_prompt(sel("Law")).endswith("topics Law.")


def test_prompt_domain_label_substitution():
    prompt = build_prompt(sel("Safety"), domain_label="lecture recording")
    assert "lecture recording" in prompt
    assert "TED talk" not in prompt


def test_custom_term_verbatim():
    prompt = build_prompt(sel("Science", custom=("urban beekeeping",)))
    assert "urban beekeeping" in prompt


def test_empty_selection_rejected():
    with pytest.raises(ValueError):
        build_prompt(sel())


def test_selection_order_preserved_and_deduped():
    s = TopicSelection(ontology_topics=("B", "A"), custom_terms=("A", "C"))
    assert s.terms() == ["B", "A", "C"]


# --- template path ------------------------------------------------------

def test_template_contains_all_terms():
    text = template_query_text(sel("Science", custom=("urban beekeeping",)))
    assert "Science" in text and "urban beekeeping" in text


def test_generate_without_llm_is_template(mock_provider):
    q = generate_query(sel("Science"), mock_provider)
    assert q.source is QuerySource.TEMPLATE
    assert "Science" in q.query_text
    assert q.embedding.provider_id == "mock"


def test_template_path_deterministic(mock_provider):
    a = generate_query(sel("Science", "Policy"), mock_provider)
    b = generate_query(sel("Science", "Policy"), mock_provider)
    assert a.query_text == b.query_text
    assert np.array_equal(a.embedding.values, b.embedding.values)


def test_embedding_is_pooled(mock_provider):
    q = generate_query(sel("Science"), mock_provider)
    expected = embed_pooled(mock_provider, q.query_text)
    assert np.array_equal(q.embedding.values, expected.values)


# --- LLM path -----------------------------------------------------------

class FakeResponse:
    def __init__(self, status_code, body):
        self.status_code = status_code
        self._body = body

    def json(self):
        return self._body

    def raise_for_status(self):
        if self.status_code >= 400:
            raise RuntimeError(f"HTTP {self.status_code}")


class FakeSession:
    def __init__(self, script):
        self.script = list(script)
        self.calls = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls.append(json)
        item = self.script.pop(0)
        if isinstance(item, Exception):
            raise item
        return FakeResponse(*item)


def completion(text):
    return (200, {"choices": [{"message": {"content": text}}]})


def llm(script, **kw):
    return LlmClient(endpoint="http://llm.local/v1", token="t",
                     session=FakeSession(script), **kw)


def test_llm_paragraph_passthrough(mock_provider):
    client = llm([completion("A detailed paragraph about science.")])
    q = generate_query(sel("Science"), mock_provider, llm=client)
    assert q.source is QuerySource.LLM
    assert q.query_text == "A detailed paragraph about science."
    assert "Science" in q.prompt


def test_llm_timeout_degrades_to_template(mock_provider):
    client = llm([TimeoutError("deadline")])
    q = generate_query(sel("Science"), mock_provider, llm=client)
    assert q.source is QuerySource.TEMPLATE
    assert "Science" in q.query_text


def test_llm_http_error_degrades(mock_provider):
    client = llm([(500, {})])
    q = generate_query(sel("Science"), mock_provider, llm=client)
    assert q.source is QuerySource.TEMPLATE


def test_llm_cache_replays(tmp_path, mock_provider):
    client = llm([completion("Cached paragraph.")], cache_dir=tmp_path)
    first = generate_query(sel("Science"), mock_provider, llm=client)
    # a second client with no scripted responses must hit the cache
    client2 = llm([], cache_dir=tmp_path)
    second = generate_query(sel("Science"), mock_provider, llm=client2)
    assert first.query_text == second.query_text == "Cached paragraph."
    assert second.source is QuerySource.LLM


def test_llm_request_shape(mock_provider):
    client = llm([completion("x")], model="gpt-4")
    generate_query(sel("Law"), mock_provider, llm=client)
    payload = client._session.calls[0]
    assert payload["model"] == "gpt-4"
    assert payload["messages"][0]["role"] == "user"
    assert "Law" in payload["messages"][0]["content"]
