"""Shared builders for synthetic archives and corpora."""

from __future__ import annotations

import random

import pytest

from vcr.embedding import MockEmbeddingProvider
from vcr.insights import Archive, InsightRecord, Source, VideoRecord


def make_insight(source=Source.ASR, text="hello world", start=0.0, end=1.0, conf=1.0):
    return InsightRecord(source=source, text=text, start_s=start, end_s=end,
                         confidence=conf)


def make_video(video_id="v1", topics=(), insights=(), **meta) -> VideoRecord:
    return VideoRecord(video_id=video_id, topics=tuple(sorted(set(topics))),
                       insights=list(insights), **meta)


def disjoint_corpus(n_videos: int, tokens_per_video: int = 24,
                    seed: int = 0) -> tuple[Archive, list[tuple[str, str]]]:
    """Archive whose videos share no vocabulary, plus (query_text, video_id)
    pairs where each query reuses only its own video's tokens."""
    rng = random.Random(seed)
    videos = []
    queries = []
    for v in range(n_videos):
        tokens = [f"tok{v}x{t}" for t in range(tokens_per_video)]
        text = " ".join(tokens)
        videos.append(make_video(
            video_id=f"vid{v:04d}",
            topics=(f"topic{v % 8}",),
            insights=[make_insight(Source.ASR, text, 0.0, 60.0)],
            title=f"Video {v}",
        ))
        sample = rng.sample(tokens, k=max(4, tokens_per_video // 3))
        queries.append((" ".join(sample), f"vid{v:04d}"))
    return Archive(videos=videos), queries


def split_channel_corpus(n_pairs: int) -> tuple[Archive, list[tuple[str, str]]]:
    """Corpus where ASR alone cannot tell paired videos apart but OCR can.

    Videos 2j and 2j+1 share identical speech text; their on-screen text
    differs. Queries mix both channels' tokens of one video, so a fused
    index separates the pair and a speech-only index cannot.
    """
    videos = []
    queries = []
    for j in range(n_pairs):
        asr = " ".join(f"speech{j}w{t}" for t in range(12))
        for half in (0, 1):
            v = 2 * j + half
            ocr = " ".join(f"screen{v}w{t}" for t in range(12))
            videos.append(make_video(
                video_id=f"vid{v:04d}",
                insights=[
                    make_insight(Source.ASR, asr, 0.0, 30.0),
                    make_insight(Source.OCR, ocr, 1.0, 29.0),
                ],
            ))
            queries.append((f"{asr} {ocr}", f"vid{v:04d}"))
    return Archive(videos=videos), queries


@pytest.fixture
def mock_provider():
    return MockEmbeddingProvider(dimension=256)
