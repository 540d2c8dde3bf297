"""Offline pipeline driver.

Stages are wired through files (archive -> index -> map), matching the
offline-indexing / online-querying split: every subcommand reads artifacts
from disk and writes new ones, so runs cache naturally and the mock
provider path is fully deterministic. Logs go to stderr, data to files or
stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import fusion
from .config import apply_env_overrides, load_config
from .embedding import embed_pooled, make_provider
from .errors import VcrError
from .evaluation import correlation_matrix, load_queries, run_eval, save_report
from .index import build_index, load_index, save_index, search_videos
from .insights import (Archive, load_archive, filter_ontology, save_archive,
                       sort_insights, Source)
from .ocr import consolidate
from .querygen import LlmClient, TopicSelection, generate_query
from .tokenization import get_profile
from .topics_map import build_map, save_map

log = logging.getLogger("vcr")


def _add_ingest(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("ingest", help="load, validate, filter, and re-serialize an archive")
    p.add_argument("--archive", required=True, help="archive dir, .jsonl, or .json")
    p.add_argument("--min-topic-count", type=int, default=10,
                   help="drop topics carried by fewer videos (default 10)")
    p.add_argument("--out", required=True, help="output path (.jsonl or .json)")
    p.set_defaults(func=cmd_ingest)


def cmd_ingest(args: argparse.Namespace) -> int:
    archive = load_archive(args.archive)
    filtered = filter_ontology(archive, args.min_topic_count)
    save_archive(filtered, args.out)
    dropped = len(archive.ontology) - len(filtered.ontology)
    log.info("ingested %d videos; kept %d topics (dropped %d below count %d)",
             len(filtered.videos), len(filtered.ontology), dropped,
             args.min_topic_count)
    print(json.dumps({"videos": len(filtered.videos),
                      "topics": len(filtered.ontology),
                      "dropped_topics": dropped}))
    return 0


def _add_consolidate(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("consolidate-ocr",
                       help="replace noisy per-frame OCR with per-cluster consensus text")
    p.add_argument("--archive", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dist-threshold", type=float, default=0.3)
    p.add_argument("--gap-s", type=float, default=5.0)
    p.set_defaults(func=cmd_consolidate)


def cmd_consolidate(args: argparse.Namespace) -> int:
    archive = load_archive(args.archive)
    before = after = 0
    for video in archive.videos:
        ocr = [r for r in video.insights if r.source is Source.OCR]
        rest = [r for r in video.insights if r.source is not Source.OCR]
        merged = consolidate(ocr, dist_threshold=args.dist_threshold, gap_s=args.gap_s)
        before += len(ocr)
        after += len(merged)
        video.insights = sort_insights(rest + merged)
    save_archive(archive, args.out)
    log.info("consolidated %d OCR records into %d", before, after)
    print(json.dumps({"ocr_records_in": before, "ocr_records_out": after}))
    return 0


def _add_index(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("index", help="fuse, segment, embed, and build the search index")
    p.add_argument("--archive", required=True)
    p.add_argument("--provider", default="mock",
                   help="'mock' or a remote embedding model id (default mock)")
    p.add_argument("--budget-tokens", type=int, default=fusion.DEFAULT_BUDGET_TOKENS)
    p.add_argument("--time-gap-s", type=float, default=fusion.DEFAULT_TIME_GAP_S)
    p.add_argument("--dim", type=int, default=1536, help="embedding dimension")
    p.add_argument("--tokenizer-profile", default="default")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)


def cmd_index(args: argparse.Namespace) -> int:
    archive = load_archive(args.archive)
    provider = make_provider(args.provider, args.dim, cache_dir=args.cache_dir)
    profile = get_profile(args.tokenizer_profile)

    def process(video) -> list[tuple[fusion.Segment, object]]:
        lines = fusion.serialize(video)
        segments = fusion.segment(lines, budget_tokens=args.budget_tokens,
                                  time_gap_s=args.time_gap_s,
                                  video_id=video.video_id, profile=profile)
        return [(seg, embed_pooled(provider, fusion.render_segment(seg)))
                for seg in segments]

    entries: list[tuple[fusion.Segment, object]] = []
    if args.jobs > 1 and len(archive.videos) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            for chunk in pool.map(process, archive.videos):
                entries.extend(chunk)
    else:
        for video in archive.videos:
            entries.extend(process(video))

    index = build_index(entries, ontology=archive.ontology)
    save_index(index, args.out)
    log.info("indexed %d videos as %d segments (M=%d, provider %s)",
             len(archive.videos), index.n, index.m, index.provider_id)
    print(json.dumps({"segments": index.n, "dimension": index.m,
                      "videos": len(archive.videos)}))
    return 0


def _provider_for_index(index, cache_dir: str | None = None):
    return make_provider(index.provider_id or "mock", index.m or 1536,
                         cache_dir=cache_dir)


def _add_map(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("map", help="project the topic ontology to frozen 2-D positions")
    p.add_argument("--index", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_map)


def cmd_map(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    if not index.ontology:
        log.error("index carries no ontology; rebuild it from an archive with topics")
        return 1
    provider = _provider_for_index(index)
    model = build_map(index.ontology, provider, seed=args.seed,
                      iterations=args.iterations)
    save_map(model, args.out)
    log.info("mapped %d topics (seed %d)", len(model.nodes), args.seed)
    print(json.dumps({"topics": len(model.nodes), "seed": args.seed}))
    return 0


def _add_search(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("search", help="rank videos for a topic selection")
    p.add_argument("--index", required=True)
    p.add_argument("--topics", default="", help="comma-separated ontology topics")
    p.add_argument("--custom-terms", default="", help="comma-separated free-text terms")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--archive", default=None, help="optional archive for video titles")
    p.add_argument("--domain-label", default="TED talk")
    p.set_defaults(func=cmd_search)


def _split_terms(raw: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in raw.split(",") if t.strip())


def cmd_search(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    selection = TopicSelection(ontology_topics=_split_terms(args.topics),
                               custom_terms=_split_terms(args.custom_terms))
    if not selection:
        log.error("empty selection: pass --topics and/or --custom-terms")
        return 2
    provider = _provider_for_index(index)
    llm = None
    if os.environ.get("VCR_LLM_ENDPOINT"):
        llm = LlmClient()
    query = generate_query(selection, provider, llm=llm,
                           domain_label=args.domain_label)
    titles: dict[str, str] = {}
    if args.archive:
        titles = {v.video_id: v.title for v in load_archive(args.archive).videos}
    print(f"# query ({query.source.value}): {query.query_text}")
    for rank, (video_id, score, seg_idx) in enumerate(
            search_videos(index, query.embedding, k=args.k), 1):
        title = titles.get(video_id, "")
        line = f"{rank}\t{score:.6f}\t{video_id}\tseg={seg_idx}"
        if title:
            line += f"\t{title}"
        print(line)
    return 0


def _add_eval(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("eval", help="score a query set against an index")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True, help="JSONL of query_id/query_text/correct_video_id")
    p.add_argument("--k", default="1,3,5,10", help="comma-separated recall cutoffs")
    p.add_argument("--report", required=True, help="output report JSON")
    p.add_argument("--heatmap", default=None,
                   help="also export the query-vs-video matrix (PNG here, CSV alongside)")
    p.set_defaults(func=cmd_eval)


def cmd_eval(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    queries = load_queries(args.queries)
    k_list = tuple(int(k) for k in args.k.split(",") if k.strip())
    provider = _provider_for_index(index)
    report = run_eval(index, queries, provider, k_list=k_list)
    save_report(report, args.report)
    if args.heatmap:
        correlation_matrix(index, queries, provider, png_path=args.heatmap)
    recalls = " ".join(f"R@{k}={v:.3f}" for k, v in sorted(report.recall_at.items()))
    print(f"Q={report.q} MRR={report.mrr:.4f} mean_rank={report.mean_rank:.2f} {recalls}")
    if report.skipped:
        log.warning("%d queries skipped (unknown videos): %s",
                    len(report.skipped), ", ".join(report.skipped))
    return 0


def _add_serve(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("serve", help="run the HTTP search service")
    p.add_argument("--config", required=True, help="TOML or JSON config file")
    p.set_defaults(func=cmd_serve)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    cfg = apply_env_overrides(load_config(args.config))
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcr",
        description="Semantic video-archive retrieval: ingest, consolidate, index, "
                    "map, search, evaluate, serve.")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_ingest(sub)
    _add_consolidate(sub)
    _add_index(sub)
    _add_map(sub)
    _add_search(sub)
    _add_eval(sub)
    _add_serve(sub)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr,
                        level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except VcrError as exc:
        log.error("%s", exc)
        return 1
    except OSError as exc:
        log.error("%s", exc)
        return 1
    except ValueError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
