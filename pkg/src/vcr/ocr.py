"""Consolidation of noisy per-frame OCR text.

The same on-screen text is usually detected on many consecutive frames,
each detection a slightly different permutation of the truth (recognition
errors, occlusions). This module groups those permutations with
single-linkage clustering gated by edit distance and temporal proximity,
aligns each cluster with a progressive center-star multiple alignment, and
emits one consensus string per cluster by column plurality vote.

Comparison is case-sensitive throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .insights import InsightRecord, Source

GAP = "-"

# Sentinel gap for consolidating real-world text, which may legitimately
# contain "-". Never collides with printable input.
_SAFE_GAP = "\x00"

DEFAULT_DIST_THRESHOLD = 0.3
DEFAULT_GAP_S = 5.0


@dataclass
class OcrCluster:
    """A group of OCR records judged to show the same on-screen text."""

    members: list[InsightRecord]
    consensus: str = ""
    span: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("cluster must have at least one member")
        if any(m.source is not Source.OCR for m in self.members):
            raise ValueError("cluster members must all be OCR records")
        if self.span == (0.0, 0.0):
            self.span = (min(m.start_s for m in self.members),
                         max(m.end_s for m in self.members))


def levenshtein(a: str, b: str, cap: int | None = None) -> int:
    """Unit-cost edit distance. With ``cap``, returns ``cap + 1`` as soon as
    the distance provably exceeds ``cap`` (cheap reject for clustering)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if cap is not None and len(a) - len(b) > cap:
        return cap + 1
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        if cap is not None and min(cur) > cap:
            return cap + 1
        prev = cur
    return prev[-1]


def normalized_distance(a: str, b: str) -> float:
    """Edit distance divided by the longer length; 0.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


def _interval_gap(a: InsightRecord, b: InsightRecord) -> float:
    return max(0.0, max(a.start_s, b.start_s) - min(a.end_s, b.end_s))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def cluster_ocr(records: list[InsightRecord],
                dist_threshold: float = DEFAULT_DIST_THRESHOLD,
                gap_s: float = DEFAULT_GAP_S) -> list[OcrCluster]:
    """Single-linkage clustering of OCR records.

    Two records link iff their normalized edit distance is at most
    ``dist_threshold`` AND the gap between their time intervals is at most
    ``gap_s``. A time-sorted sweep retires records that can no longer link
    forward, so well-separated archives cluster in near-linear pair counts.
    Clusters come back ordered by span start.
    """
    if not 0.0 <= dist_threshold <= 1.0:
        raise ValueError("dist_threshold must be in [0, 1]")
    for rec in records:
        if rec.source is not Source.OCR:
            raise ValueError(f"cluster_ocr got a {rec.source.value} record")
    if not records:
        return []

    order = sorted(range(len(records)),
                   key=lambda i: (records[i].start_s, records[i].end_s, i))
    uf = _UnionFind(len(records))
    active: list[int] = []
    for j in order:
        rec_j = records[j]
        still_active = []
        for i in active:
            if records[i].end_s < rec_j.start_s - gap_s:
                continue  # can never link to j or anything later
            still_active.append(i)
            if _interval_gap(records[i], rec_j) > gap_s:
                continue
            cap = int(dist_threshold * max(len(records[i].text), len(rec_j.text)))
            if levenshtein(records[i].text, rec_j.text, cap=cap) <= cap:
                if normalized_distance(records[i].text, rec_j.text) <= dist_threshold:
                    uf.union(i, j)
        active = still_active
        active.append(j)

    groups: dict[int, list[int]] = {}
    for i in order:
        groups.setdefault(uf.find(i), []).append(i)
    clusters = [OcrCluster(members=[records[i] for i in idxs]) for idxs in groups.values()]
    clusters.sort(key=lambda c: c.span)
    return clusters


def needleman_wunsch(a: str, b: str, match: float = 1.0, mismatch: float = -1.0,
                     gap: float = -1.0, gap_symbol: str = GAP) -> tuple[str, str]:
    """Global pairwise alignment of two strings.

    Traceback is deterministic: on score ties, diagonal beats gap-in-b
    beats gap-in-a.
    """
    n, m = len(a), len(b)
    score = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        score[i][0] = i * gap
    for j in range(1, m + 1):
        score[0][j] = j * gap
    for i in range(1, n + 1):
        row, prev = score[i], score[i - 1]
        ca = a[i - 1]
        for j in range(1, m + 1):
            row[j] = max(prev[j - 1] + (match if ca == b[j - 1] else mismatch),
                         prev[j] + gap,
                         row[j - 1] + gap)
    out_a: list[str] = []
    out_b: list[str] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and score[i][j] == score[i - 1][j - 1] + (
                match if a[i - 1] == b[j - 1] else mismatch):
            out_a.append(a[i - 1])
            out_b.append(b[j - 1])
            i -= 1
            j -= 1
        elif i > 0 and score[i][j] == score[i - 1][j] + gap:
            out_a.append(a[i - 1])
            out_b.append(gap_symbol)
            i -= 1
        else:
            out_a.append(gap_symbol)
            out_b.append(b[j - 1])
            j -= 1
    return "".join(reversed(out_a)), "".join(reversed(out_b))


def _pick_center(texts: list[str]) -> int:
    best_idx = 0
    best_sum = None
    for i, t in enumerate(texts):
        total = sum(levenshtein(t, texts[j]) for j in range(len(texts)) if j != i)
        if best_sum is None or total < best_sum:
            best_sum = total
            best_idx = i
    return best_idx


def align_center_star(texts: list[str], match: float = 1.0, mismatch: float = -1.0,
                      gap: float = -1.0, gap_symbol: str = GAP) -> list[str]:
    """Progressive multiple alignment anchored on the center string.

    The center is the member minimizing summed pairwise edit distance
    (ties: lowest index). Every other text is pairwise-aligned to the raw
    center and merged into the growing alignment; rows come back in input
    order, all the same length, with no all-gap columns.
    """
    if not texts:
        raise ValueError("need at least one text to align")
    if not (match > mismatch and gap < 0):
        raise ValueError("scores must satisfy match > mismatch and gap < 0")
    if len(texts) == 1:
        return [texts[0]]

    center_idx = _pick_center(texts)
    center = texts[center_idx]
    master = list(center)  # center row with gaps accumulated so far
    aligned: dict[int, list[str]] = {center_idx: list(center)}

    for idx, text in enumerate(texts):
        if idx == center_idx:
            continue
        gc, gt = needleman_wunsch(center, text, match, mismatch, gap, gap_symbol)
        new_master: list[str] = []
        new_row: list[str] = []
        inserts: list[int] = []  # master columns to open for this text's gaps
        i = j = 0
        while i < len(master) or j < len(gc):
            in_master = i < len(master)
            in_pair = j < len(gc)
            if in_master and in_pair and (master[i] != gap_symbol) == (gc[j] != gap_symbol):
                # same raw center char, or a gap column present in both
                new_master.append(master[i])
                new_row.append(gt[j])
                i += 1
                j += 1
            elif in_master and master[i] == gap_symbol:
                # column opened by an earlier member; this text has no char here
                new_master.append(gap_symbol)
                new_row.append(gap_symbol)
                i += 1
            else:
                # this text needs a fresh column; all earlier rows get a gap
                inserts.append(len(new_master))
                new_master.append(gap_symbol)
                new_row.append(gt[j])
                j += 1
        for row in aligned.values():
            for offset, pos in enumerate(inserts):
                row.insert(pos, gap_symbol)
        master = new_master
        aligned[idx] = new_row

    return ["".join(aligned[i]) for i in range(len(texts))]


def consensus(alignment: list[str], gap_symbol: str = GAP) -> str:
    """Column-plurality consensus of an alignment matrix.

    Per column the most frequent non-gap character wins (ties by character
    value ascending); a column is dropped only when the gap symbol strictly
    outnumbers every character.
    """
    if not alignment:
        raise ValueError("empty alignment")
    width = len(alignment[0])
    if any(len(row) != width for row in alignment):
        raise ValueError("alignment rows differ in length")
    out: list[str] = []
    for col in range(width):
        counts: dict[str, int] = {}
        gaps = 0
        for row in alignment:
            ch = row[col]
            if ch == gap_symbol:
                gaps += 1
            else:
                counts[ch] = counts.get(ch, 0) + 1
        if not counts:
            continue
        best = max(counts.values())
        if gaps > best:
            continue
        out.append(min(ch for ch, n in counts.items() if n == best))
    return "".join(out)


def consolidate(records: list[InsightRecord],
                dist_threshold: float = DEFAULT_DIST_THRESHOLD,
                gap_s: float = DEFAULT_GAP_S,
                match: float = 1.0, mismatch: float = -1.0,
                gap: float = -1.0) -> list[InsightRecord]:
    """Cluster, align, and vote: one corrected OCR record per cluster.

    The output record spans the cluster's time interval and carries the
    mean member confidence.
    """
    clusters = cluster_ocr(records, dist_threshold, gap_s)
    out: list[InsightRecord] = []
    for cluster in clusters:
        rows = align_center_star([m.text for m in cluster.members],
                                 match, mismatch, gap, gap_symbol=_SAFE_GAP)
        text = consensus(rows, gap_symbol=_SAFE_GAP)
        if not text:  # degenerate vote; keep the center text rather than drop data
            text = cluster.members[0].text
        cluster.consensus = text
        out.append(InsightRecord(
            source=Source.OCR,
            text=text,
            start_s=cluster.span[0],
            end_s=cluster.span[1],
            confidence=sum(m.confidence for m in cluster.members) / len(cluster.members),
        ))
    return out
