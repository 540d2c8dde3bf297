"""Retrieval evaluation: reciprocal-rank metrics, eval runs, and the
query-vs-video correlation matrix export (CSV plus a grayscale heatmap)."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedding import embed_pooled
from .errors import ArchiveParseError
from .index import IndexMatrix, search_videos

log = logging.getLogger(__name__)

DEFAULT_K_LIST = (1, 3, 5, 10)


@dataclass(frozen=True)
class QueryRecord:
    query_id: str
    query_text: str
    correct_video_id: str


@dataclass
class QuerySet:
    queries: list[QueryRecord]

    def __post_init__(self) -> None:
        if not self.queries:
            raise ValueError("query set is empty")
        ids = [q.query_id for q in self.queries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate query_id in query set")

    def __len__(self) -> int:
        return len(self.queries)


@dataclass
class EvalReport:
    q: int
    mrr: float
    mean_rank: float
    recall_at: dict[int, float]
    ranks: list[int]
    skipped: list[str] = field(default_factory=list)


def load_queries(path: str | Path) -> QuerySet:
    """Query set JSONL: {"query_id", "query_text", "correct_video_id"} per line."""
    path = Path(path)
    if not path.exists():
        raise ArchiveParseError("no such file", str(path))
    queries = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ArchiveParseError(f"malformed JSON: {exc.msg}", str(path), lineno) from None
            try:
                queries.append(QueryRecord(str(obj["query_id"]), str(obj["query_text"]),
                                           str(obj["correct_video_id"])))
            except KeyError as exc:
                raise ArchiveParseError(f"query missing field {exc}", str(path), lineno) from None
    return QuerySet(queries)


def mrr(ranks: list[int]) -> float:
    """Mean reciprocal rank; a rank of 0 means "not found" and contributes 0."""
    if not ranks:
        raise ValueError("mrr of an empty rank list")
    if any(r < 0 for r in ranks):
        raise ValueError("ranks must be 0 (not found) or >= 1")
    return sum(1.0 / r for r in ranks if r >= 1) / len(ranks)


def recall_at_k(ranks: list[int], k: int) -> float:
    """Fraction of queries whose correct answer lands in the top k."""
    if not ranks:
        raise ValueError("recall of an empty rank list")
    if k < 1:
        raise ValueError("k must be >= 1")
    return sum(1 for r in ranks if 1 <= r <= k) / len(ranks)


def mean_rank(ranks: list[int]) -> float:
    """Arithmetic mean rank over found queries (0.0 if nothing was found).

    Reported alongside MRR, never derived from it: the two agree only when
    every query has the same rank.
    """
    found = [r for r in ranks if r >= 1]
    if not found:
        return 0.0
    return sum(found) / len(found)


def run_eval(index: IndexMatrix, queries: QuerySet, provider,
             k_list: tuple[int, ...] = DEFAULT_K_LIST) -> EvalReport:
    """Embed each query, rank all indexed videos, and score the run.

    Queries whose correct_video_id is not in the index are excluded with a
    warning and listed in the report's ``skipped``.
    """
    known = set(index.video_ids())
    n_videos = max(len(known), 1)
    ranks: list[int] = []
    skipped: list[str] = []
    for query in queries.queries:
        if query.correct_video_id not in known:
            log.warning("query %s: unknown correct_video_id %r, skipping",
                        query.query_id, query.correct_video_id)
            skipped.append(query.query_id)
            continue
        emb = embed_pooled(provider, query.query_text)
        ranked = search_videos(index, emb, k=n_videos)
        rank = 0
        for pos, (video_id, _score, _seg) in enumerate(ranked, 1):
            if video_id == query.correct_video_id:
                rank = pos
                break
        ranks.append(rank)
    if not ranks:
        raise ValueError("no evaluable queries (all correct_video_ids unknown)")
    return EvalReport(
        q=len(ranks),
        mrr=mrr(ranks),
        mean_rank=mean_rank(ranks),
        recall_at={k: recall_at_k(ranks, k) for k in k_list},
        ranks=ranks,
        skipped=skipped,
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "Q": report.q,
        "mrr": report.mrr,
        "mean_rank": report.mean_rank,
        "recall_at": {str(k): v for k, v in sorted(report.recall_at.items())},
        "ranks": report.ranks,
        "skipped": report.skipped,
    }


def save_report(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), sort_keys=True, indent=1) + "\n",
                          encoding="utf-8")


def correlation_matrix(index: IndexMatrix, queries: QuerySet, provider,
                       png_path: str | Path, csv_path: str | Path | None = None) -> np.ndarray:
    """Score every query against every indexed video and export the Q x V
    matrix as CSV plus a grayscale heatmap (rows normalized to [0, 1];
    the heatmap is illustrative, the CSV carries the raw scores).

    Returns the raw matrix. Strong retrieval shows as a dominant diagonal
    when queries and videos are aligned in the same order.
    """
    png_path = Path(png_path)
    if csv_path is None:
        csv_path = png_path.with_suffix(".csv")
    video_ids = index.video_ids()
    if not video_ids:
        raise ValueError("index holds no videos")
    matrix = np.zeros((len(queries), len(video_ids)), dtype=np.float64)
    col = {vid: j for j, vid in enumerate(video_ids)}
    for i, query in enumerate(queries.queries):
        emb = embed_pooled(provider, query.query_text)
        for video_id, score, _seg in search_videos(index, emb, k=len(video_ids)):
            matrix[i, col[video_id]] = score

    with Path(csv_path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", *video_ids])
        for i, query in enumerate(queries.queries):
            writer.writerow([query.query_id, *(f"{v:.9f}" for v in matrix[i])])

    lo = matrix.min(axis=1, keepdims=True)
    span = matrix.max(axis=1, keepdims=True) - lo
    span[span == 0.0] = 1.0
    normalized = (matrix - lo) / span

    from matplotlib.backends.backend_agg import FigureCanvasAgg
    from matplotlib.figure import Figure

    fig = Figure(figsize=(6, 6))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    ax.imshow(normalized, cmap="gray", aspect="auto", vmin=0.0, vmax=1.0,
              interpolation="nearest")
    ax.set_xlabel("videos")
    ax.set_ylabel("queries")
    fig.tight_layout()
    fig.savefig(png_path)
    return matrix
