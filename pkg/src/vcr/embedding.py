"""Text-embedding providers, pooling, and cosine similarity.

Two providers share one interface: a remote HTTP client for a hosted
encoder, and a fully deterministic local mock. The mock lowercases,
tokenizes with the active profile, hashes each token to one of the M
dimensions with a keyed 64-bit BLAKE2b (key constant ``vcr-mock-1``), and
returns the raw token-count vector. That makes lexical overlap exactly
analyzable, so the mock doubles as the oracle for every offline test.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, EmbeddingTransportError
from .tokenization import TokenizerProfile, DEFAULT_PROFILE

log = logging.getLogger(__name__)

MOCK_HASH_PERSON = b"vcr-mock-1"

DEFAULT_DIMENSION = 1536
DEFAULT_MAX_INPUT_TOKENS = 8191
DEFAULT_WINDOW_TOKENS = 512

ENV_EMBED_ENDPOINT = "VCR_EMBED_ENDPOINT"
ENV_EMBED_TOKEN = "VCR_EMBED_TOKEN"


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    provider_id: str

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 1:
            raise ValueError("embedding must be a 1-D vector")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding contains non-finite values")


@dataclass
class ProviderProfile:
    provider_id: str
    dimension: int = DEFAULT_DIMENSION
    max_input_tokens: int = DEFAULT_MAX_INPUT_TOKENS
    window_tokens: int = DEFAULT_WINDOW_TOKENS
    tokenizer: TokenizerProfile = field(default=DEFAULT_PROFILE)

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.window_tokens < 1:
            raise ValueError("window_tokens must be >= 1")


def cosine(a: EmbeddingVector | np.ndarray, b: EmbeddingVector | np.ndarray) -> float:
    """Cosine similarity; defined as 0.0 when either vector is all zeros,
    so empty inputs rank last instead of poisoning sorts."""
    va = a.values if isinstance(a, EmbeddingVector) else np.asarray(a, dtype=np.float64)
    vb = b.values if isinstance(b, EmbeddingVector) else np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"cosine of {va.shape[0]}-dim and {vb.shape[0]}-dim vectors")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(va, vb) / (na * nb))


def _token_index(token: str, dimension: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8,
                             person=MOCK_HASH_PERSON).digest()
    return int.from_bytes(digest, "little") % dimension


class MockEmbeddingProvider:
    """Hashed bag-of-tokens encoder. Bit-identical output for identical text
    across processes and platforms; runs fully offline."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION,
                 max_input_tokens: int = DEFAULT_MAX_INPUT_TOKENS,
                 window_tokens: int = DEFAULT_WINDOW_TOKENS,
                 tokenizer: TokenizerProfile | None = None):
        self.profile = ProviderProfile(
            provider_id="mock",
            dimension=dimension,
            max_input_tokens=max_input_tokens,
            window_tokens=window_tokens,
            tokenizer=tokenizer or DEFAULT_PROFILE,
        )

    @property
    def provider_id(self) -> str:
        return self.profile.provider_id

    def embed(self, text: str) -> EmbeddingVector:
        tokens = self.profile.tokenizer.tokens(text.lower())
        if len(tokens) > self.profile.max_input_tokens:
            raise ValueError(
                f"input of {len(tokens)} tokens exceeds max_input_tokens="
                f"{self.profile.max_input_tokens}; pool it instead")
        vec = np.zeros(self.profile.dimension, dtype=np.float64)
        for tok in tokens:
            vec[_token_index(tok, self.profile.dimension)] += 1.0
        return EmbeddingVector(vec, self.profile.provider_id)

    def embed_batch(self, texts: list[str]) -> list[EmbeddingVector]:
        return [self.embed(t) for t in texts]


class VectorCache:
    """Content-addressed on-disk cache of embedding vectors.

    One file per (provider, text) key: a JSON header line
    ``{"provider_id": ..., "dimension": ...}`` followed by the raw vector
    as little-endian 32-bit floats. Writes go through a temp file and an
    atomic rename, serialized per key.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @staticmethod
    def key(provider_id: str, text: str) -> str:
        h = hashlib.sha256()
        h.update(provider_id.encode("utf-8"))
        h.update(b"\x00")
        h.update(text.encode("utf-8"))
        return h.hexdigest()

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.vec"

    def get(self, provider_id: str, text: str) -> np.ndarray | None:
        path = self._path(self.key(provider_id, text))
        if not path.exists():
            return None
        blob = path.read_bytes()
        try:
            newline = blob.index(b"\n")
            header = json.loads(blob[:newline])
            values = np.frombuffer(blob[newline + 1:], dtype="<f4")
        except (ValueError, json.JSONDecodeError):
            log.warning("dropping unreadable cache entry %s", path.name)
            return None
        if header.get("provider_id") != provider_id or header.get("dimension") != len(values):
            return None
        return values.astype(np.float64)

    def put(self, provider_id: str, text: str, values: np.ndarray) -> None:
        data = np.asarray(values, dtype="<f4")
        header = json.dumps({"provider_id": provider_id, "dimension": int(data.shape[0])},
                            sort_keys=True).encode("utf-8")
        path = self._path(self.key(provider_id, text))
        with self._lock:
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(header + b"\n" + data.tobytes())
            os.replace(tmp, path)


class RemoteEmbeddingProvider:
    """Client for a hosted embedding endpoint.

    Wire contract: ``POST {"input": [texts], "model": id}`` returning
    ``{"data": [{"embedding": [floats]}, ...]}`` in input order. Transient
    failures are retried with exponential backoff; responses are cached on
    disk so evaluation runs replay offline.
    """

    RETRYABLE_STATUS = {429, 500, 502, 503, 504}

    def __init__(self, model: str, dimension: int = DEFAULT_DIMENSION,
                 endpoint: str | None = None, token: str | None = None,
                 cache_dir: str | Path | None = None,
                 batch_size: int = 64, max_retries: int = 4,
                 backoff_s: float = 0.5, max_in_flight: int = 4,
                 max_input_tokens: int = DEFAULT_MAX_INPUT_TOKENS,
                 window_tokens: int = DEFAULT_WINDOW_TOKENS,
                 tokenizer: TokenizerProfile | None = None,
                 session=None):
        endpoint = endpoint or os.environ.get(ENV_EMBED_ENDPOINT)
        if not endpoint:
            raise ValueError(f"no embedding endpoint configured (set {ENV_EMBED_ENDPOINT})")
        self.endpoint = endpoint
        self.token = token if token is not None else os.environ.get(ENV_EMBED_TOKEN)
        self.profile = ProviderProfile(
            provider_id=model,
            dimension=dimension,
            max_input_tokens=max_input_tokens,
            window_tokens=window_tokens,
            tokenizer=tokenizer or DEFAULT_PROFILE,
        )
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.cache = VectorCache(cache_dir) if cache_dir else None
        self._gate = threading.Semaphore(max_in_flight)
        if session is None:
            import requests
            session = requests.Session()
        self._session = session

    @property
    def provider_id(self) -> str:
        return self.profile.provider_id

    def embed(self, text: str) -> EmbeddingVector:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> list[EmbeddingVector]:
        out: list[np.ndarray | None] = [None] * len(texts)
        missing: list[int] = []
        for i, text in enumerate(texts):
            cached = self.cache.get(self.provider_id, text) if self.cache else None
            if cached is not None:
                out[i] = cached
            else:
                missing.append(i)
        for start in range(0, len(missing), self.batch_size):
            chunk = missing[start:start + self.batch_size]
            vectors = self._post([texts[i] for i in chunk])
            for i, vec in zip(chunk, vectors):
                out[i] = vec
                if self.cache:
                    self.cache.put(self.provider_id, texts[i], vec)
        return [EmbeddingVector(v, self.provider_id) for v in out]

    def _post(self, texts: list[str]) -> list[np.ndarray]:
        payload = {"input": texts, "model": self.provider_id}
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        last_error: Exception | None = None
        for attempt in range(1, self.max_retries + 1):
            try:
                with self._gate:
                    resp = self._session.post(self.endpoint, json=payload,
                                              headers=headers, timeout=60)
            except Exception as exc:  # connection-level failure
                last_error = exc
            else:
                if resp.status_code == 200:
                    return self._parse(resp.json(), len(texts))
                last_error = EmbeddingTransportError(
                    f"embedding endpoint returned HTTP {resp.status_code}",
                    attempts=attempt,
                    retryable=resp.status_code in self.RETRYABLE_STATUS)
                if resp.status_code not in self.RETRYABLE_STATUS:
                    raise last_error
            if attempt < self.max_retries:
                time.sleep(self.backoff_s * (2 ** (attempt - 1)))
        raise EmbeddingTransportError(
            f"embedding request failed after {self.max_retries} attempts: {last_error}",
            attempts=self.max_retries, retryable=True)

    def _parse(self, body: dict, expected: int) -> list[np.ndarray]:
        data = body.get("data")
        if not isinstance(data, list) or len(data) != expected:
            raise EmbeddingTransportError(
                f"embedding response carried {len(data) if isinstance(data, list) else 'no'} "
                f"vectors, expected {expected}")
        vectors = []
        for item in data:
            vec = np.asarray(item["embedding"], dtype=np.float64)
            if vec.shape[0] != self.profile.dimension:
                raise DimensionMismatchError(
                    f"endpoint returned {vec.shape[0]}-dim vector, "
                    f"profile says {self.profile.dimension}")
            vectors.append(vec)
        return vectors


def embed_pooled(provider, text: str) -> EmbeddingVector:
    """Mean pooling over consecutive non-overlapping token windows.

    Text that fits in one window embeds directly; longer text is cut into
    ``window_tokens``-sized windows, each embedded separately, and the
    arithmetic mean vector is returned.
    """
    profile: ProviderProfile = provider.profile
    windows = profile.tokenizer.split_at(text, profile.window_tokens)
    if len(windows) <= 1:
        return provider.embed(text)
    vectors = provider.embed_batch(windows)
    mean = np.mean([v.values for v in vectors], axis=0)
    return EmbeddingVector(mean, profile.provider_id)


def make_provider(provider_id: str = "mock", dimension: int = DEFAULT_DIMENSION,
                  *, endpoint: str | None = None, token: str | None = None,
                  cache_dir: str | Path | None = None,
                  window_tokens: int = DEFAULT_WINDOW_TOKENS,
                  max_input_tokens: int = DEFAULT_MAX_INPUT_TOKENS):
    """Provider factory used by the CLI and service: ``mock`` is local and
    deterministic, anything else is treated as a remote model id."""
    if provider_id == "mock":
        return MockEmbeddingProvider(dimension=dimension,
                                     max_input_tokens=max_input_tokens,
                                     window_tokens=window_tokens)
    return RemoteEmbeddingProvider(model=provider_id, dimension=dimension,
                                   endpoint=endpoint, token=token,
                                   cache_dir=cache_dir,
                                   max_input_tokens=max_input_tokens,
                                   window_tokens=window_tokens)
