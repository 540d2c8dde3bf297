"""Fusing a video's insights into time-ordered, source-tagged text segments.

Every insight becomes one tagged line ("[OCR] SOME TEXT ON FRAME"); lines
are packed greedily into segments of at most ``budget_tokens`` tokens,
opening a new segment early when the silence between consecutive lines
exceeds ``time_gap_s``. A single line larger than the whole budget is
hard-split at token boundaries; the split is lossless because cut points
fall on token starts and pieces keep their separator characters, so
``flatten`` reassembles the exact original lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .insights import Source, VideoRecord
from .tokenization import TokenizerProfile, DEFAULT_PROFILE, count_tokens

DEFAULT_BUDGET_TOKENS = 4096
DEFAULT_TIME_GAP_S = 30.0

__all__ = [
    "FusedLine", "Segment", "serialize", "segment", "flatten",
    "render_segment", "count_tokens",
    "DEFAULT_BUDGET_TOKENS", "DEFAULT_TIME_GAP_S",
]


@dataclass(frozen=True)
class FusedLine:
    """One source-tagged line of fused text.

    ``continuation`` marks the trailing pieces of a hard-split oversized
    line; ``flatten`` uses it to stitch the original line back together.
    """

    tag: Source
    text: str
    start_s: float
    end_s: float
    continuation: bool = False

    def rendered(self) -> str:
        return f"[{self.tag.value}] {self.text}"


@dataclass
class Segment:
    """A token-budgeted, time-contiguous chunk of one video's fused text."""

    video_id: str
    segment_idx: int
    lines: list[FusedLine]
    token_count: int
    start_s: float
    end_s: float


def serialize(video: VideoRecord) -> list[FusedLine]:
    """One line per insight, in the archive's deterministic time order."""
    return [FusedLine(rec.source, rec.text, rec.start_s, rec.end_s)
            for rec in video.insights]


def render_segment(seg: Segment) -> str:
    """Single string form used for embedding: tagged lines joined by newlines."""
    return "\n".join(line.rendered() for line in seg.lines)


def segment(lines: list[FusedLine],
            budget_tokens: int = DEFAULT_BUDGET_TOKENS,
            time_gap_s: float = DEFAULT_TIME_GAP_S,
            video_id: str = "",
            profile: TokenizerProfile | None = None) -> list[Segment]:
    """Greedy packing of whole lines into token-budgeted segments.

    A new segment opens when the next line would push the running count
    past ``budget_tokens`` or starts more than ``time_gap_s`` after the
    previous line ended. Oversized lines are hard-split; every full-budget
    piece forms its own segment and the remainder opens a fresh one.
    """
    if budget_tokens < 1:
        raise ValueError("budget_tokens must be >= 1")
    profile = profile or DEFAULT_PROFILE

    segments: list[Segment] = []
    current: list[FusedLine] = []
    current_tokens = 0

    def flush() -> None:
        nonlocal current, current_tokens
        if current:
            segments.append(Segment(
                video_id=video_id,
                segment_idx=len(segments),
                lines=current,
                token_count=current_tokens,
                start_s=current[0].start_s,
                end_s=max(l.end_s for l in current),
            ))
            current = []
            current_tokens = 0

    for line in lines:
        n = profile.count(line.text)
        if n > budget_tokens:
            flush()
            pieces = profile.split_at(line.text, budget_tokens)
            for i, piece in enumerate(pieces):
                piece_line = FusedLine(line.tag, piece, line.start_s, line.end_s,
                                       continuation=i > 0)
                piece_tokens = profile.count(piece)
                if piece_tokens == budget_tokens:
                    current = [piece_line]
                    current_tokens = piece_tokens
                    flush()
                else:
                    current = [piece_line]
                    current_tokens = piece_tokens
            continue
        if current and (current_tokens + n > budget_tokens
                        or line.start_s - current[-1].end_s > time_gap_s):
            flush()
        current.append(line)
        current_tokens += n
    flush()
    return segments


def flatten(segments: list[Segment]) -> list[FusedLine]:
    """Inverse of ``segment``: the original serialized lines, in order.

    Hard-split pieces concatenate back exactly because each piece kept the
    separator characters up to the next cut point.
    """
    out: list[FusedLine] = []
    for seg in segments:
        for line in seg.lines:
            if line.continuation:
                if not out:
                    raise ValueError("continuation line with no preceding piece")
                head = out[-1]
                out[-1] = FusedLine(head.tag, head.text + line.text,
                                    head.start_s, head.end_s)
            else:
                out.append(FusedLine(line.tag, line.text, line.start_s, line.end_s))
    return out
