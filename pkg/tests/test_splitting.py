import itertools
import random
from collections import Counter

import pytest

from vcr.insights import Archive
from vcr.splitting import (FOLD_ORDER, Fold, apportion, stratified_split)

from conftest import make_video


def archive_with(labels_per_video):
    return Archive(videos=[make_video(f"v{i:03d}", topics=tuple(labels))
                           for i, labels in enumerate(labels_per_video)])


def test_apportion_exact_division():
    assert apportion(100, (0.8, 0.1, 0.1)) == [80, 10, 10]


def test_apportion_rounding_sums_to_total():
    for total in (7, 13, 201, 542):
        parts = apportion(total, (0.8, 0.1, 0.1))
        assert sum(parts) == total
        assert all(abs(p - total * r) <= 1 for p, r in zip(parts, (0.8, 0.1, 0.1)))


def test_single_label_exact_fold_sizes():
    archive = archive_with([("L",)] * 100)
    split = stratified_split(archive, (0.8, 0.1, 0.1), seed=3)
    sizes = split.fold_sizes()
    assert sizes == {Fold.TRAIN: 80, Fold.VALIDATION: 10, Fold.TEST: 10}


def test_every_video_in_exactly_one_fold():
    rng = random.Random(0)
    labels = [tuple(rng.sample(["a", "b", "c", "d"], rng.randint(0, 3)))
              for _ in range(57)]
    archive = archive_with(labels)
    split = stratified_split(archive, seed=1)
    assert set(split.folds) == {v.video_id for v in archive.videos}
    assert sum(split.fold_sizes().values()) == 57


def test_same_seed_identical_assignment():
    archive = archive_with([("a",), ("b",), ("a", "b"), (), ("b",)] * 8)
    a = stratified_split(archive, seed=9)
    b = stratified_split(archive, seed=9)
    assert a.folds == b.folds


def test_different_seeds_can_differ():
    archive = archive_with([("a",), ("b",), ("a", "b"), (), ("b",)] * 8)
    outcomes = {tuple(sorted(stratified_split(archive, seed=s).folds.items()))
                for s in range(6)}
    assert len(outcomes) > 1


def test_unlabeled_videos_distributed_by_capacity():
    archive = archive_with([()] * 20)
    split = stratified_split(archive, (0.8, 0.1, 0.1), seed=0)
    assert split.fold_sizes() == {Fold.TRAIN: 16, Fold.VALIDATION: 2, Fold.TEST: 2}


def test_empty_archive_rejected():
    with pytest.raises(ValueError):
        stratified_split(Archive(videos=[]))


def test_bad_ratios_rejected():
    archive = archive_with([("a",)] * 10)
    with pytest.raises(ValueError):
        stratified_split(archive, (0.5, 0.5, 0.5))


def per_label_fold_counts(archive, folds):
    counts: dict[str, Counter] = {}
    for video in archive.videos:
        for label in video.topics:
            counts.setdefault(label, Counter())[folds[video.video_id]] += 1
    return counts


def test_two_label_balance_matches_enumeration_oracle():
    """On 20 videos with 2 labels, compare against the best achievable
    per-label balance found by exhaustive enumeration of all assignments
    with the target fold sizes (16/2/2)."""
    labels = [("x",)] * 8 + [("y",)] * 6 + [("x", "y")] * 4 + [()] * 2
    archive = archive_with(labels)
    ratios = (0.8, 0.1, 0.1)

    # oracle: enumerate every way to choose the validation and test pairs
    ideal = {
        label: [count * r for r in ratios]
        for label, count in {"x": 12, "y": 10}.items()
    }

    def imbalance(assignment):  # assignment: tuple of fold per video index
        total = 0.0
        for label, targets in ideal.items():
            got = [0, 0, 0]
            for i, video in enumerate(archive.videos):
                if label in video.topics:
                    got[assignment[i]] += 1
            total += sum(abs(g - t) for g, t in zip(got, targets))
        return total

    n = len(archive.videos)
    best = None
    indices = range(n)
    for val_pair in itertools.combinations(indices, 2):
        rest = [i for i in indices if i not in val_pair]
        for test_pair in itertools.combinations(rest, 2):
            assignment = [0] * n
            for i in val_pair:
                assignment[i] = 1
            for i in test_pair:
                assignment[i] = 2
            score = imbalance(tuple(assignment))
            if best is None or score < best:
                best = score

    split = stratified_split(archive, ratios, seed=5)
    counts = per_label_fold_counts(archive, split.folds)
    ours = 0.0
    for label, targets in ideal.items():
        got = [counts[label].get(f, 0) for f in FOLD_ORDER]
        ours += sum(abs(g - t) for g, t in zip(got, targets))
    # within one example's worth of deviation per label of the optimum
    assert ours <= best + 2.0
    for label in ideal:
        got = [counts[label].get(f, 0) for f in FOLD_ORDER]
        assert sum(got) == {"x": 12, "y": 10}[label]


def test_balance_beats_uniform_random_split():
    rng = random.Random(11)
    labels = []
    for i in range(200):
        k = rng.randint(1, 3)
        labels.append(tuple(rng.sample([f"L{j}" for j in range(12)], k)))
    archive = archive_with(labels)
    ratios = (0.8, 0.1, 0.1)

    def deviation(folds):
        counts = per_label_fold_counts(archive, folds)
        total = 0.0
        for label, per_fold in counts.items():
            label_total = sum(per_fold.values())
            for fold, ratio in zip(FOLD_ORDER, ratios):
                total += abs(per_fold.get(fold, 0) - label_total * ratio)
        return total

    ours = 0.0
    uniform = 0.0
    for seed in range(20):
        split = stratified_split(archive, ratios, seed=seed)
        sizes = split.fold_sizes()
        assert abs(sizes[Fold.TRAIN] - 160) <= 1
        assert abs(sizes[Fold.VALIDATION] - 20) <= 1
        assert abs(sizes[Fold.TEST] - 20) <= 1
        ours += deviation(split.folds)

        r = random.Random(seed)
        shuffled = [v.video_id for v in archive.videos]
        r.shuffle(shuffled)
        folds = {}
        for pos, vid in enumerate(shuffled):
            folds[vid] = (Fold.TRAIN if pos < 160 else
                          Fold.VALIDATION if pos < 180 else Fold.TEST)
        uniform += deviation(folds)

    assert ours <= uniform
