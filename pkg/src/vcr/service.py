"""HTTP layer: search, ontology map, and video metadata for the web UI.

The service is read-only over artifacts built offline by the CLI (index,
map, archive metadata). Only the query is embedded at request time, so
request latency is bounded and concurrent requests share the immutable
index safely. LLM failures degrade to the deterministic template query;
a search request never surfaces an upstream error.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .config import AppConfig
from .embedding import make_provider
from .index import IndexMatrix, load_index, search_videos
from .insights import VideoRecord, load_archive, video_to_dict
from .querygen import LlmClient, TopicSelection, generate_query
from .topics_map import (TopicsMapModel, build_map, load_map, map_to_dict,
                         relevance_overlay)

log = logging.getLogger(__name__)


class SearchRequest(BaseModel):
    topics: list[str] = Field(default_factory=list)
    custom_terms: list[str] = Field(default_factory=list)
    k: int = 5


class ServiceState:
    def __init__(self, config: AppConfig):
        self.config = config
        self.index: IndexMatrix | None = None
        self.map_model: TopicsMapModel | None = None
        self.ontology_payload: dict | None = None
        self.videos: dict[str, VideoRecord] = {}
        self.segment_rows: dict[tuple[str, int], int] = {}
        self.provider = None
        self.llm: LlmClient | None = None

    @property
    def loaded(self) -> bool:
        return self.index is not None

    def load(self) -> None:
        cfg = self.config
        if not cfg.index_path:
            raise ValueError("config has no index path")
        self.index = load_index(cfg.index_path)
        self.segment_rows = {(r.video_id, r.segment_idx): i
                             for i, r in enumerate(self.index.rows)}
        self.provider = make_provider(
            self.index.provider_id or cfg.provider_id,
            self.index.m or cfg.dimension,
            endpoint=cfg.embed_endpoint, token=cfg.embed_token,
            cache_dir=cfg.cache_dir, window_tokens=cfg.window_tokens,
            max_input_tokens=cfg.max_input_tokens)
        if cfg.map_path and Path(cfg.map_path).exists():
            self.map_model = load_map(cfg.map_path)
        elif len(self.index.ontology) >= 4:
            self.map_model = build_map(self.index.ontology, self.provider,
                                       seed=cfg.map_seed)
        else:
            log.warning("no map file and ontology too small to project; "
                        "map endpoints disabled")
        if self.map_model is not None:
            self.ontology_payload = map_to_dict(self.map_model)
        if cfg.archive_path:
            archive = load_archive(cfg.archive_path)
            self.videos = {v.video_id: v for v in archive.videos}
        if cfg.llm_endpoint:
            self.llm = LlmClient(endpoint=cfg.llm_endpoint, token=cfg.llm_token,
                                 model=cfg.llm_model, cache_dir=cfg.cache_dir)


def _result_entry(state: ServiceState, video_id: str, score: float,
                  segment_idx: int) -> dict:
    video = state.videos.get(video_id)
    row_i = state.segment_rows.get((video_id, segment_idx))
    row = state.index.rows[row_i] if row_i is not None else None
    return {
        "video_id": video_id,
        "title": video.title if video else "",
        "author": video.author if video else "",
        "event_date": video.event_date if video else None,
        "views": video.views if video else None,
        "likes": video.likes if video else None,
        "thumbnail_url": video.thumbnail_url if video else None,
        "player_url": video.player_url if video else None,
        "score": score,
        "best_segment": {
            "segment_idx": segment_idx,
            "start_s": row.start_s if row else None,
            "end_s": row.end_s if row else None,
        },
    }


def create_app(config: AppConfig, autoload: bool = True) -> FastAPI:
    app = FastAPI(title="video archive retrieval service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    state = ServiceState(config)
    app.state.vcr = state
    if autoload:
        state.load()

    def require_loaded() -> ServiceState:
        if not state.loaded:
            raise HTTPException(status_code=503, detail="index not loaded yet")
        return state

    @app.get("/healthz")
    def healthz() -> dict:
        if not state.loaded:
            return {"status": "loading", "index_n": 0, "index_m": 0, "provider_id": ""}
        return {
            "status": "ok",
            "index_n": state.index.n,
            "index_m": state.index.m,
            "provider_id": state.index.provider_id,
        }

    @app.get("/api/ontology")
    def ontology() -> dict:
        st = require_loaded()
        if st.ontology_payload is None:
            raise HTTPException(status_code=503, detail="topics map not available")
        return st.ontology_payload

    @app.post("/api/search")
    def search(request: SearchRequest) -> dict:
        st = require_loaded()
        selection = TopicSelection(ontology_topics=tuple(request.topics),
                                   custom_terms=tuple(request.custom_terms))
        if not selection:
            raise HTTPException(status_code=400, detail="empty topic selection")
        if request.k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        query = generate_query(selection, st.provider, llm=st.llm,
                               domain_label=st.config.domain_label)
        ranked = search_videos(st.index, query.embedding, k=request.k)
        relevance: dict[str, float] = {}
        if st.map_model is not None:
            relevance = relevance_overlay(st.map_model, query, st.provider).relevance
        return {
            "query_text": query.query_text,
            "query_source": query.source.value,
            "results": [_result_entry(st, vid, score, seg)
                        for vid, score, seg in ranked],
            "topic_relevance": relevance,
        }

    @app.get("/api/videos/{video_id}")
    def video_metadata(video_id: str, include: str | None = Query(default=None)) -> dict:
        st = require_loaded()
        if not st.videos:
            raise HTTPException(status_code=503, detail="archive metadata not loaded")
        video = st.videos.get(video_id)
        if video is None:
            raise HTTPException(status_code=404, detail=f"unknown video {video_id!r}")
        payload = video_to_dict(video)
        if include != "insights":
            payload.pop("insights", None)
        return payload

    static_dir = config.static_dir
    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
