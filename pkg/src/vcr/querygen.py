"""Expanding a topic selection into a full textual query.

When a language-model endpoint is configured, the selection is inflated
into a description paragraph by the model; otherwise (or on any transport
failure) a deterministic template takes over, worded to be rich in the
selected terms so lexical-overlap retrieval behaves sensibly offline.
Search never fails because of the LLM: degradation is silent apart from a
logged warning.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from .embedding import EmbeddingVector, embed_pooled

log = logging.getLogger(__name__)

DEFAULT_DOMAIN_LABEL = "TED talk"
PROMPT_TEMPLATE = ("Write a full description for this {label} which discusses "
                   "the following topics {topics}.")

ENV_LLM_ENDPOINT = "VCR_LLM_ENDPOINT"
ENV_LLM_TOKEN = "VCR_LLM_TOKEN"


class QuerySource(enum.Enum):
    LLM = "LLM"
    TEMPLATE = "TEMPLATE"


@dataclass(frozen=True)
class TopicSelection:
    """User's topic picks: ontology names plus free-text terms, in selection order."""

    ontology_topics: tuple[str, ...] = ()
    custom_terms: tuple[str, ...] = ()

    def terms(self) -> list[str]:
        out: list[str] = []
        for term in (*self.ontology_topics, *self.custom_terms):
            if term and term not in out:
                out.append(term)
        return out

    def __bool__(self) -> bool:
        return bool(self.terms())


@dataclass(frozen=True)
class GeneratedQuery:
    prompt: str
    query_text: str
    source: QuerySource
    embedding: EmbeddingVector


def build_prompt(selection: TopicSelection, domain_label: str = DEFAULT_DOMAIN_LABEL) -> str:
    """The exact request sent to the LLM; every selected term appears verbatim."""
    terms = selection.terms()
    if not terms:
        raise ValueError("topic selection is empty")
    return PROMPT_TEMPLATE.format(label=domain_label, topics=", ".join(terms))


def template_query_text(selection: TopicSelection) -> str:
    """Deterministic fallback paragraph containing every selected term."""
    terms = selection.terms()
    if not terms:
        raise ValueError("topic selection is empty")
    joined = ", ".join(terms)
    themes = ", ".join(f"the theme of {t}" for t in terms)
    return f"This talk discusses {joined}. It explores {themes}."


class LlmClient:
    """Minimal chat-completion client.

    ``POST {"model": ..., "messages": [...]}`` returning the first choice's
    message content. Completions are cached on disk by (model, prompt hash)
    so demo sessions replay without the endpoint.
    """

    def __init__(self, endpoint: str | None = None, token: str | None = None,
                 model: str = "gpt-4", cache_dir: str | Path | None = None,
                 timeout_s: float = 30.0, session=None):
        endpoint = endpoint or os.environ.get(ENV_LLM_ENDPOINT)
        if not endpoint:
            raise ValueError(f"no LLM endpoint configured (set {ENV_LLM_ENDPOINT})")
        self.endpoint = endpoint
        self.token = token if token is not None else os.environ.get(ENV_LLM_TOKEN)
        self.model = model
        self.timeout_s = timeout_s
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        if session is None:
            import requests
            session = requests.Session()
        self._session = session

    def _cache_path(self, prompt: str) -> Path | None:
        if not self.cache_dir:
            return None
        key = hashlib.sha256(f"{self.model}\x00{prompt}".encode("utf-8")).hexdigest()
        return self.cache_dir / f"{key}.txt"

    def complete(self, prompt: str) -> str:
        cache_path = self._cache_path(prompt)
        if cache_path and cache_path.exists():
            return cache_path.read_text(encoding="utf-8")
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        resp = self._session.post(self.endpoint, json={
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }, headers=headers, timeout=self.timeout_s)
        resp.raise_for_status()
        body = resp.json()
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise ValueError(f"malformed completion response: {json.dumps(body)[:200]}") from None
        if cache_path:
            cache_path.write_text(text, encoding="utf-8")
        return text


def generate_query(selection: TopicSelection, provider,
                   llm: LlmClient | None = None,
                   domain_label: str = DEFAULT_DOMAIN_LABEL) -> GeneratedQuery:
    """Turn a selection into an embedded query.

    Uses the LLM completion when a client is given and reachable; any
    failure falls back to the deterministic template with a warning and
    never propagates to the caller.
    """
    prompt = build_prompt(selection, domain_label)
    query_text: str | None = None
    source = QuerySource.TEMPLATE
    if llm is not None:
        try:
            query_text = llm.complete(prompt)
            source = QuerySource.LLM
        except Exception as exc:
            log.warning("LLM query generation failed (%s); using template fallback", exc)
    if query_text is None:
        query_text = template_query_text(selection)
    return GeneratedQuery(prompt=prompt, query_text=query_text, source=source,
                          embedding=embed_pooled(provider, query_text))
