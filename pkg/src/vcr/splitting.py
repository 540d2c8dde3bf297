"""Multilabel balance-preserving dataset splitting (iterative stratification).

Labels are processed rarest-first: the label with the fewest unassigned
videos is handled next, and each of its videos goes to the fold whose
remaining demand for that label is greatest. Fold capacities are fixed up
front by largest-remainder apportionment of the requested ratios, so final
fold sizes always land within rounding of the targets. The seed shuffles
only the order in which videos are visited.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from .insights import Archive

DEFAULT_RATIOS = (0.8, 0.1, 0.1)


class Fold(enum.Enum):
    TRAIN = "TRAIN"
    VALIDATION = "VALIDATION"
    TEST = "TEST"


FOLD_ORDER = (Fold.TRAIN, Fold.VALIDATION, Fold.TEST)
_FOLD_POS = {fold: i for i, fold in enumerate(FOLD_ORDER)}


@dataclass
class SplitAssignment:
    folds: dict[str, Fold]  # video_id -> fold
    ratios: tuple[float, ...]
    seed: int

    def fold_sizes(self) -> dict[Fold, int]:
        sizes = {fold: 0 for fold in FOLD_ORDER}
        for fold in self.folds.values():
            sizes[fold] += 1
        return sizes

    def videos_in(self, fold: Fold) -> list[str]:
        return [vid for vid, f in self.folds.items() if f is fold]


def apportion(total: int, ratios: tuple[float, ...]) -> list[int]:
    """Largest-remainder rounding of ``total * ratio`` that sums to total."""
    exact = [total * r for r in ratios]
    floors = [int(e) for e in exact]
    shortfall = total - sum(floors)
    by_remainder = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - floors[i]), i))
    for i in by_remainder[:shortfall]:
        floors[i] += 1
    return floors


def stratified_split(archive: Archive, ratios: tuple[float, ...] = DEFAULT_RATIOS,
                     seed: int = 0) -> SplitAssignment:
    """Assign every video to exactly one of TRAIN/VALIDATION/TEST.

    Deterministic for a given seed. Ties break toward the lower label
    index, then the fold with more remaining capacity, then fold order.
    """
    if not archive.videos:
        raise ValueError("cannot split an empty archive")
    if len(ratios) != len(FOLD_ORDER):
        raise ValueError(f"need {len(FOLD_ORDER)} ratios, got {len(ratios)}")
    if any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must be positive and sum to 1")

    videos = archive.videos
    n = len(videos)
    capacity = dict(zip(FOLD_ORDER, apportion(n, ratios)))

    order = list(range(n))
    random.Random(seed).shuffle(order)
    visit_rank = {idx: pos for pos, idx in enumerate(order)}

    labels = sorted({t for v in videos for t in v.topics})
    label_pos = {lab: i for i, lab in enumerate(labels)}
    remaining: dict[str, set[int]] = {lab: set() for lab in labels}
    for i, video in enumerate(videos):
        for topic in video.topics:
            remaining[topic].add(i)
    desired = {lab: {f: len(remaining[lab]) * r for f, r in zip(FOLD_ORDER, ratios)}
               for lab in labels}

    assigned: dict[int, Fold] = {}

    def pick_fold(label: str | None) -> Fold:
        candidates = [f for f in FOLD_ORDER if capacity[f] > 0] or list(FOLD_ORDER)
        if label is None:
            return max(candidates, key=lambda f: (capacity[f], -_FOLD_POS[f]))
        return max(candidates,
                   key=lambda f: (desired[label][f], capacity[f], -_FOLD_POS[f]))

    while True:
        active = [lab for lab in labels if remaining[lab]]
        if not active:
            break
        label = min(active, key=lambda lab: (len(remaining[lab]), label_pos[lab]))
        batch = sorted(remaining[label], key=lambda i: visit_rank[i])
        for i in batch:
            fold = pick_fold(label)
            assigned[i] = fold
            capacity[fold] -= 1
            for topic in videos[i].topics:
                desired[topic][fold] -= 1
                remaining[topic].discard(i)

    unlabeled = sorted((i for i in range(n) if i not in assigned),
                       key=lambda i: visit_rank[i])
    for i in unlabeled:
        fold = pick_fold(None)
        assigned[i] = fold
        capacity[fold] -= 1

    folds = {videos[i].video_id: assigned[i] for i in range(n)}
    return SplitAssignment(folds=folds, ratios=tuple(ratios), seed=seed)
