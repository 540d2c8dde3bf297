"""Domain types and ingestion for per-video insight archives.

An archive is a set of videos, each carrying timed insight records from
three extraction channels (speech transcription, on-screen text, frame
captions) plus catalog metadata. Input arrives as precomputed JSON; this
module validates it, normalizes text, and fixes a deterministic insight
ordering so every downstream stage is reproducible.
"""

from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ArchiveParseError, ArchiveValidationError

log = logging.getLogger(__name__)

_WS_RUN = re.compile(r"\s+")


class Source(enum.Enum):
    """Insight channel. Enum order is the tie-break order for equal start times."""

    ASR = "ASR"
    OCR = "OCR"
    CAPTION = "CAPTION"

    @property
    def rank(self) -> int:
        return _SOURCE_RANK[self]


_SOURCE_RANK = {Source.ASR: 0, Source.OCR: 1, Source.CAPTION: 2}


def normalize_text(text: str) -> str:
    """Collapse internal whitespace runs (newlines, tabs) to single spaces and trim."""
    return _WS_RUN.sub(" ", text).strip()


@dataclass(frozen=True)
class InsightRecord:
    """One timed, source-tagged piece of extracted video content."""

    source: Source
    text: str
    start_s: float
    end_s: float
    confidence: float = 1.0

    def validate(self) -> None:
        if not self.text:
            raise ArchiveValidationError("insight text is empty")
        if "\n" in self.text:
            raise ArchiveValidationError("insight text contains a newline")
        if self.start_s < 0:
            raise ArchiveValidationError(f"negative start time {self.start_s}")
        if self.end_s < self.start_s:
            raise ArchiveValidationError(
                f"end time {self.end_s} precedes start time {self.start_s}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ArchiveValidationError(f"confidence {self.confidence} outside [0, 1]")


@dataclass
class VideoRecord:
    """One video: catalog metadata plus its time-ordered insight records."""

    video_id: str
    title: str = ""
    author: str = ""
    event_date: str | None = None
    views: int | None = None
    likes: int | None = None
    topics: tuple[str, ...] = ()
    description: str | None = None
    thumbnail_url: str | None = None
    player_url: str | None = None
    insights: list[InsightRecord] = field(default_factory=list)

    def validate(self) -> None:
        if not self.video_id:
            raise ArchiveValidationError("video_id is empty")
        if len(set(self.topics)) != len(self.topics):
            raise ArchiveValidationError(f"duplicate topics on video {self.video_id!r}")
        if self.event_date is not None:
            try:
                date.fromisoformat(self.event_date)
            except (TypeError, ValueError):
                raise ArchiveValidationError(
                    f"event_date {self.event_date!r} is not an ISO-8601 date") from None
        for counter, name in ((self.views, "views"), (self.likes, "likes")):
            if counter is not None and counter < 0:
                raise ArchiveValidationError(f"negative {name} on video {self.video_id!r}")
        for rec in self.insights:
            rec.validate()


@dataclass
class Archive:
    """Immutable-after-load collection of videos with a topic ontology.

    ``ontology`` maps each topic name to the number of videos carrying it;
    it is always derived from the videos, never trusted from input.
    """

    videos: list[VideoRecord]
    ontology: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.ontology:
            self.ontology = build_ontology(self.videos)

    def video_by_id(self, video_id: str) -> VideoRecord | None:
        for v in self.videos:
            if v.video_id == video_id:
                return v
        return None


def build_ontology(videos: Iterable[VideoRecord]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for video in videos:
        for topic in video.topics:
            counts[topic] = counts.get(topic, 0) + 1
    return dict(sorted(counts.items()))


def sort_insights(records: Iterable[InsightRecord]) -> list[InsightRecord]:
    """Total order: (start_s, channel rank ASR < OCR < CAPTION, input order)."""
    return [rec for _, rec in sorted(
        enumerate(records), key=lambda item: (item[1].start_s, item[1].source.rank, item[0]))]


def _parse_insight(obj: dict, source: str, line: int | None) -> InsightRecord | None:
    try:
        channel = Source(obj["source"])
    except (KeyError, ValueError):
        raise ArchiveValidationError(
            f"unknown insight source {obj.get('source')!r}", source, line) from None
    text = normalize_text(str(obj.get("text", "")))
    if not text:
        log.warning("%s: dropping empty-text %s insight", source, channel.value)
        return None
    try:
        rec = InsightRecord(
            source=channel,
            text=text,
            start_s=float(obj.get("start_s", 0.0)),
            end_s=float(obj.get("end_s", obj.get("start_s", 0.0))),
            confidence=float(obj.get("confidence", 1.0)),
        )
    except (TypeError, ValueError):
        raise ArchiveParseError("insight has non-numeric time or confidence", source, line) from None
    try:
        rec.validate()
    except ArchiveValidationError as exc:
        raise ArchiveValidationError(str(exc), source, line) from None
    return rec


def parse_video(obj: dict, source: str = "<input>", line: int | None = None) -> VideoRecord:
    """Build a validated VideoRecord from one decoded JSON object.

    Unknown fields are ignored. Insight text is whitespace-normalized and
    empty-text records are dropped with a warning.
    """
    if not isinstance(obj, dict):
        raise ArchiveParseError("video entry is not a JSON object", source, line)
    video_id = str(obj.get("video_id", "")).strip()
    if not video_id:
        raise ArchiveValidationError("missing video_id", source, line)
    raw_topics = obj.get("topics") or []
    if not isinstance(raw_topics, list):
        raise ArchiveParseError("topics is not a list", source, line)
    topics = tuple(sorted({str(t) for t in raw_topics if str(t)}))
    insights = []
    for raw in obj.get("insights") or []:
        rec = _parse_insight(raw, source, line)
        if rec is not None:
            insights.append(rec)
    try:
        views = int(obj["views"]) if obj.get("views") is not None else None
        likes = int(obj["likes"]) if obj.get("likes") is not None else None
    except (TypeError, ValueError):
        raise ArchiveParseError(f"non-numeric views/likes on video {video_id!r}",
                                source, line) from None
    video = VideoRecord(
        video_id=video_id,
        title=normalize_text(str(obj.get("title", ""))),
        author=normalize_text(str(obj.get("author", ""))),
        event_date=obj.get("event_date"),
        views=views,
        likes=likes,
        topics=topics,
        description=obj.get("description"),
        thumbnail_url=obj.get("thumbnail_url"),
        player_url=obj.get("player_url"),
        insights=sort_insights(insights),
    )
    try:
        video.validate()
    except ArchiveValidationError as exc:
        raise ArchiveValidationError(str(exc), source, line) from None
    return video


def _iter_input_objects(path: Path) -> Iterator[tuple[dict, str, int | None]]:
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix == ".json")
        if not files:
            raise ArchiveParseError("directory contains no .json files", str(path))
        for file in files:
            try:
                obj = json.loads(file.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ArchiveParseError(f"malformed JSON: {exc.msg}", str(file), exc.lineno) from None
            yield obj, str(file), None
        return
    if not path.exists():
        raise ArchiveParseError("no such file", str(path))
    if path.suffix == ".jsonl":
        with path.open(encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ArchiveParseError(f"malformed JSON: {exc.msg}", str(path), lineno) from None
                yield obj, str(path), lineno
        return
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArchiveParseError(f"malformed JSON: {exc.msg}", str(path), exc.lineno) from None
    entries = doc.get("videos") if isinstance(doc, dict) else doc
    if not isinstance(entries, list):
        raise ArchiveParseError("expected a list of videos or {\"videos\": [...]}", str(path))
    for obj in entries:
        yield obj, str(path), None


def load_archive(path: str | Path) -> Archive:
    """Load and validate an archive from a directory of per-video JSON files,
    a JSONL file (one video object per line), or a JSON document.

    Raises ArchiveParseError for malformed input and ArchiveValidationError
    for invariant violations (negative times, duplicate video ids), each
    reported with file and line where known.
    """
    path = Path(path)
    videos: list[VideoRecord] = []
    seen: dict[str, str] = {}
    for obj, source, line in _iter_input_objects(path):
        video = parse_video(obj, source, line)
        if video.video_id in seen:
            raise ArchiveValidationError(
                f"duplicate video_id {video.video_id!r} (first seen in {seen[video.video_id]})",
                source, line)
        seen[video.video_id] = source
        videos.append(video)
    return Archive(videos=videos)


def video_to_dict(video: VideoRecord) -> dict:
    obj: dict = {
        "video_id": video.video_id,
        "title": video.title,
        "author": video.author,
        "topics": list(video.topics),
        "insights": [
            {
                "source": rec.source.value,
                "text": rec.text,
                "start_s": rec.start_s,
                "end_s": rec.end_s,
                "confidence": rec.confidence,
            }
            for rec in video.insights
        ],
    }
    for key, value in (("event_date", video.event_date), ("views", video.views),
                       ("likes", video.likes), ("description", video.description),
                       ("thumbnail_url", video.thumbnail_url),
                       ("player_url", video.player_url)):
        if value is not None:
            obj[key] = value
    return obj


def save_archive(archive: Archive, path: str | Path) -> None:
    """Serialize to JSONL (``.jsonl`` suffix) or a single JSON document."""
    path = Path(path)
    if path.suffix == ".jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for video in archive.videos:
                fh.write(json.dumps(video_to_dict(video), sort_keys=True) + "\n")
        return
    doc = {
        "ontology": archive.ontology,
        "videos": [video_to_dict(v) for v in archive.videos],
    }
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def filter_ontology(archive: Archive, min_count: int) -> Archive:
    """Drop topics carried by fewer than ``min_count`` videos.

    Removed topics disappear from the ontology and from every video's topic
    set; videos themselves are never removed.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    keep = {t for t, n in archive.ontology.items() if n >= min_count}
    videos = [
        replace(v, topics=tuple(t for t in v.topics if t in keep))
        for v in archive.videos
    ]
    return Archive(videos=videos)
