"""Persistent dense index over segments with exact cosine top-k search.

Rows are stored L2-normalized (zero vectors stay zero), which turns cosine
ranking into a dot product without changing the argsort. Search is an
exact full scan: at archive scale (up to ~1e5 segments) that is fast and
keeps the engine oracle-testable against a naive reimplementation.

On-disk layout (all integers little-endian):

    magic "VCR1" | u32 version=1 | u32 N | u32 M |
    N*M little-endian float32 row-major | u32 sidecar byte length |
    sidecar JSON (UTF-8) | u32 CRC32 of all preceding bytes
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import EmbeddingVector
from .errors import (CorruptIndexError, DimensionMismatchError,
                     IndexVersionError, ProviderMismatchError)
from .fusion import Segment

MAGIC = b"VCR1"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True)
class SidecarRow:
    video_id: str
    segment_idx: int
    start_s: float
    end_s: float


@dataclass(frozen=True)
class SearchHit:
    row: int
    video_id: str
    segment_idx: int
    score: float


@dataclass(eq=False)
class IndexMatrix:
    matrix: np.ndarray  # N x M float32, rows L2-normalized
    rows: list[SidecarRow]
    provider_id: str
    ontology: dict[str, int]

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def m(self) -> int:
        return int(self.matrix.shape[1])

    def row_norms(self) -> np.ndarray:
        """Actual norms of the stored float32 rows (1 up to rounding, or 0).

        Scoring divides by these so reported scores are the full-precision
        cosine against the bytes on disk, not an assumed exact 1.
        """
        cached = self.__dict__.get("_row_norms")
        if cached is None:
            cached = np.linalg.norm(self.matrix.astype(np.float64), axis=1)
            cached[cached == 0.0] = 1.0
            self.__dict__["_row_norms"] = cached
        return cached

    def video_ids(self) -> list[str]:
        """Distinct video ids in first-appearance (row) order."""
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.video_id, None)
        return list(seen)


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return (matrix / safe).astype(np.float32)


def build_index(entries: list[tuple[Segment, EmbeddingVector]],
                ontology: dict[str, int] | None = None) -> IndexMatrix:
    """Assemble the N x M matrix from (segment, vector) pairs, in input order.

    All vectors must share one dimension and one provider; rows are
    normalized at insert.
    """
    if not entries:
        return IndexMatrix(matrix=np.zeros((0, 0), dtype=np.float32), rows=[],
                           provider_id="", ontology=dict(ontology or {}))
    provider_id = entries[0][1].provider_id
    dim = entries[0][1].dimension
    sidecar: list[SidecarRow] = []
    seen: set[tuple[str, int]] = set()
    raw = np.zeros((len(entries), dim), dtype=np.float64)
    for i, (seg, vec) in enumerate(entries):
        if vec.provider_id != provider_id:
            raise ProviderMismatchError(
                f"row {i} embedded by {vec.provider_id!r}, index is {provider_id!r}")
        if vec.dimension != dim:
            raise DimensionMismatchError(
                f"row {i} has dimension {vec.dimension}, index has {dim}")
        key = (seg.video_id, seg.segment_idx)
        if key in seen:
            raise ValueError(f"duplicate segment {key} in index input")
        seen.add(key)
        raw[i] = vec.values
        sidecar.append(SidecarRow(seg.video_id, seg.segment_idx, seg.start_s, seg.end_s))
    return IndexMatrix(matrix=_normalize_rows(raw), rows=sidecar,
                       provider_id=provider_id, ontology=dict(ontology or {}))


def _scores(index: IndexMatrix, query: EmbeddingVector | np.ndarray) -> np.ndarray:
    q = query.values if isinstance(query, EmbeddingVector) else np.asarray(query, np.float64)
    if index.n and q.shape[0] != index.m:
        raise DimensionMismatchError(
            f"query has dimension {q.shape[0]}, index has {index.m}")
    if index.n == 0:
        return np.zeros(0, dtype=np.float64)
    norm = float(np.linalg.norm(q))
    if norm == 0.0:
        return np.zeros(index.n, dtype=np.float64)
    return (index.matrix @ q) / (index.row_norms() * norm)


def search_topk(index: IndexMatrix, query: EmbeddingVector | np.ndarray,
                k: int) -> list[SearchHit]:
    """Exact top-k by cosine, ties broken by ascending row index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = _scores(index, query)
    order = np.argsort(-scores, kind="stable")[:min(k, index.n)]
    return [SearchHit(row=int(r), video_id=index.rows[r].video_id,
                      segment_idx=index.rows[r].segment_idx,
                      score=float(scores[r])) for r in order]


def search_videos(index: IndexMatrix, query: EmbeddingVector | np.ndarray,
                  k: int) -> list[tuple[str, float, int]]:
    """Video-level ranking: per-video score is the max over its segments.

    Returns (video_id, score, best_segment_idx) triples sorted by
    (score desc, video_id asc); the best segment is the earliest one
    achieving the max.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = _scores(index, query)
    best: dict[str, tuple[float, int]] = {}
    for i, row in enumerate(index.rows):
        score = float(scores[i])
        cur = best.get(row.video_id)
        if cur is None or score > cur[0]:
            best[row.video_id] = (score, row.segment_idx)
    ranked = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[0]))
    return [(vid, score, seg_idx) for vid, (score, seg_idx) in ranked[:k]]


def save_index(index: IndexMatrix, path: str | Path) -> None:
    path = Path(path)
    sidecar = json.dumps({
        "provider_id": index.provider_id,
        "ontology": index.ontology,
        "rows": [[r.video_id, r.segment_idx, r.start_s, r.end_s] for r in index.rows],
    }, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = bytearray()
    body += _HEADER.pack(MAGIC, VERSION, index.n, index.m)
    body += np.ascontiguousarray(index.matrix, dtype="<f4").tobytes()
    body += struct.pack("<I", len(sidecar))
    body += sidecar
    body += struct.pack("<I", zlib.crc32(bytes(body)) & 0xFFFFFFFF)
    path.write_bytes(bytes(body))


def load_index(path: str | Path) -> IndexMatrix:
    """Read an index file back; the round trip is bit-exact.

    Raises IndexVersionError on an unknown magic or version and
    CorruptIndexError on truncation or checksum mismatch.
    """
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size + 4:
        raise CorruptIndexError(f"{path}: file too short to be an index")
    magic, version, n, m = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise IndexVersionError(
            f"{path}: bad magic {magic!r}, expected {MAGIC.decode('ascii')!r}")
    if version != VERSION:
        raise IndexVersionError(f"{path}: unsupported version {version}")
    offset = _HEADER.size
    matrix_bytes = n * m * 4
    if len(blob) < offset + matrix_bytes + 4:
        raise CorruptIndexError(f"{path}: truncated matrix block")
    matrix = np.frombuffer(blob, dtype="<f4", count=n * m, offset=offset).reshape(n, m).copy()
    offset += matrix_bytes
    (sidecar_len,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    if len(blob) < offset + sidecar_len + 4:
        raise CorruptIndexError(f"{path}: truncated sidecar block")
    sidecar_raw = blob[offset:offset + sidecar_len]
    offset += sidecar_len
    (stored_crc,) = struct.unpack_from("<I", blob, offset)
    if len(blob) != offset + 4:
        raise CorruptIndexError(f"{path}: {len(blob) - offset - 4} trailing bytes")
    actual_crc = zlib.crc32(blob[:offset]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise CorruptIndexError(
            f"{path}: checksum mismatch (stored {stored_crc:#010x}, "
            f"computed {actual_crc:#010x})")
    try:
        sidecar = json.loads(sidecar_raw)
        rows = [SidecarRow(str(v), int(s), float(a), float(b))
                for v, s, a, b in sidecar["rows"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        raise CorruptIndexError(f"{path}: unreadable sidecar JSON") from None
    if len(rows) != n:
        raise CorruptIndexError(f"{path}: sidecar has {len(rows)} rows, header says {n}")
    return IndexMatrix(matrix=matrix, rows=rows,
                       provider_id=str(sidecar.get("provider_id", "")),
                       ontology={str(k): int(v)
                                 for k, v in (sidecar.get("ontology") or {}).items()})
