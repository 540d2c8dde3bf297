"""Service and pipeline configuration, loadable from TOML or JSON.

Sections mirror the pipeline stages::

    [paths]    index, map, archive, static
    [provider] id, dimension, window_tokens, max_input_tokens, endpoint, token, cache_dir
    [fusion]   budget_tokens, time_gap_s, tokenizer_profile
    [query]    domain_label
    [llm]      endpoint, token, model
    [server]   host, port, default_k

VCR_PORT and VCR_INDEX_PATH environment variables override the file;
endpoint/token values fall back to VCR_EMBED_* and VCR_LLM_* when unset.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

ENV_PORT = "VCR_PORT"
ENV_INDEX_PATH = "VCR_INDEX_PATH"


@dataclass
class AppConfig:
    index_path: str | None = None
    map_path: str | None = None
    archive_path: str | None = None
    static_dir: str | None = None

    provider_id: str = "mock"
    dimension: int = 1536
    window_tokens: int = 512
    max_input_tokens: int = 8191
    embed_endpoint: str | None = None
    embed_token: str | None = None
    cache_dir: str | None = None

    budget_tokens: int = 4096
    time_gap_s: float = 30.0
    tokenizer_profile: str = "default"

    domain_label: str = "TED talk"

    llm_endpoint: str | None = None
    llm_token: str | None = None
    llm_model: str = "gpt-4"

    host: str = "127.0.0.1"
    port: int = 8000
    default_k: int = 5

    map_seed: int = 42


_SECTION_FIELDS = {
    "paths": {"index": "index_path", "map": "map_path", "archive": "archive_path",
              "static": "static_dir"},
    "provider": {"id": "provider_id", "dimension": "dimension",
                 "window_tokens": "window_tokens",
                 "max_input_tokens": "max_input_tokens",
                 "endpoint": "embed_endpoint", "token": "embed_token",
                 "cache_dir": "cache_dir"},
    "fusion": {"budget_tokens": "budget_tokens", "time_gap_s": "time_gap_s",
               "tokenizer_profile": "tokenizer_profile"},
    "query": {"domain_label": "domain_label"},
    "llm": {"endpoint": "llm_endpoint", "token": "llm_token", "model": "llm_model"},
    "server": {"host": "host", "port": "port", "default_k": "default_k"},
    "map": {"seed": "map_seed"},
}


def _read_document(path: Path) -> dict:
    if path.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with path.open("rb") as fh:
            return tomllib.load(fh)
    return json.loads(path.read_text(encoding="utf-8"))


def load_config(path: str | Path) -> AppConfig:
    path = Path(path)
    doc = _read_document(path)
    cfg = AppConfig()
    for section, mapping in _SECTION_FIELDS.items():
        values = doc.get(section)
        if not isinstance(values, dict):
            continue
        for key, attr in mapping.items():
            if key in values:
                setattr(cfg, attr, values[key])
    return cfg


def apply_env_overrides(cfg: AppConfig, env: dict[str, str] | None = None) -> AppConfig:
    env = os.environ if env is None else env
    if env.get(ENV_PORT):
        cfg.port = int(env[ENV_PORT])
    if env.get(ENV_INDEX_PATH):
        cfg.index_path = env[ENV_INDEX_PATH]
    return cfg
