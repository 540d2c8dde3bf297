import numpy as np
import pytest

from vcr.embedding import EmbeddingVector, MockEmbeddingProvider, cosine
from vcr.errors import (CorruptIndexError, DimensionMismatchError,
                        IndexVersionError, ProviderMismatchError)
from vcr.fusion import Segment
from vcr.index import (build_index, load_index, save_index, search_topk,
                       search_videos)


def seg(video_id, idx, start=0.0, end=1.0):
    return Segment(video_id=video_id, segment_idx=idx, lines=[], token_count=0,
                   start_s=start, end_s=end)


def random_index(n=100, m=16, videos=20, seed=0, provider="mock"):
    rng = np.random.default_rng(seed)
    vectors = rng.normal(size=(n, m))
    entries = [(seg(f"v{i % videos}", i // videos), EmbeddingVector(vectors[i], provider))
               for i in range(n)]
    return build_index(entries, ontology={"A": 2, "B": 1}), vectors


# --- build --------------------------------------------------------------

def test_empty_index_searches_empty():
    index = build_index([])
    assert index.n == 0
    assert search_topk(index, np.zeros(0), 5) == []
    assert search_videos(index, np.zeros(0), 5) == []


def test_rows_are_normalized():
    index, _ = random_index(n=3, m=4)
    norms = np.linalg.norm(index.matrix, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-6)


def test_zero_vector_row_stays_zero():
    entries = [(seg("v0", 0), EmbeddingVector(np.zeros(4), "mock"))]
    index = build_index(entries)
    assert np.all(index.matrix[0] == 0.0)


def test_row_order_is_input_order():
    index, _ = random_index(n=10, m=4, videos=5)
    assert [(r.video_id, r.segment_idx) for r in index.rows[:3]] == [
        ("v0", 0), ("v1", 0), ("v2", 0)]


def test_dimension_mismatch_rejected():
    entries = [(seg("v0", 0), EmbeddingVector(np.ones(4), "mock")),
               (seg("v1", 0), EmbeddingVector(np.ones(5), "mock"))]
    with pytest.raises(DimensionMismatchError):
        build_index(entries)


def test_provider_mismatch_rejected():
    entries = [(seg("v0", 0), EmbeddingVector(np.ones(4), "mock")),
               (seg("v1", 0), EmbeddingVector(np.ones(4), "other"))]
    with pytest.raises(ProviderMismatchError):
        build_index(entries)


def test_duplicate_segment_rejected():
    entries = [(seg("v0", 0), EmbeddingVector(np.ones(4), "mock")),
               (seg("v0", 0), EmbeddingVector(np.ones(4), "mock"))]
    with pytest.raises(ValueError, match="duplicate"):
        build_index(entries)


# --- search -------------------------------------------------------------

def test_self_query_ranks_first():
    index, vectors = random_index()
    hits = search_topk(index, vectors[7], k=1)
    assert hits[0].row == 7
    assert hits[0].score == pytest.approx(1.0, abs=1e-6)


def test_k_clamped_to_n():
    index, vectors = random_index(n=5, m=8, videos=5)
    assert len(search_topk(index, vectors[0], k=50)) == 5


def test_search_matches_naive_full_scan():
    index, _ = random_index(n=200, m=16, seed=3)
    rng = np.random.default_rng(99)
    for _ in range(20):
        q = rng.normal(size=16)
        hits = search_topk(index, q, k=200)
        # independent oracle: full cosine per stored row, sort by (-score, row)
        oracle_scores = [cosine(index.matrix[r], q) for r in range(index.n)]
        oracle = sorted(range(index.n), key=lambda r: (-oracle_scores[r], r))
        assert [h.row for h in hits] == oracle
        for h in hits:
            assert h.score == pytest.approx(oracle_scores[h.row], abs=1e-12)


def test_tie_break_is_ascending_row():
    v = np.array([1.0, 0.0])
    entries = [(seg("v0", 0), EmbeddingVector(v, "mock")),
               (seg("v1", 0), EmbeddingVector(2 * v, "mock")),
               (seg("v2", 0), EmbeddingVector(np.array([0.0, 1.0]), "mock"))]
    index = build_index(entries)
    hits = search_topk(index, v, k=3)
    assert [h.row for h in hits] == [0, 1, 2]


def test_zero_query_scores_zero():
    index, _ = random_index(n=4, m=8, videos=4)
    hits = search_topk(index, np.zeros(8), k=4)
    assert all(h.score == 0.0 for h in hits)
    assert [h.row for h in hits] == [0, 1, 2, 3]


def test_query_dimension_checked():
    index, _ = random_index(n=4, m=8)
    with pytest.raises(DimensionMismatchError):
        search_topk(index, np.zeros(9), k=1)


# --- video aggregation ---------------------------------------------------

def test_video_score_is_max_over_segments():
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, 1.0, 0.0])
    entries = [(seg("v0", 0), EmbeddingVector(0.2 * a + 0.8 * b, "mock")),
               (seg("v0", 1), EmbeddingVector(a, "mock")),
               (seg("v1", 0), EmbeddingVector(b, "mock"))]
    index = build_index(entries)
    ranked = search_videos(index, a, k=2)
    assert ranked[0][0] == "v0"
    assert ranked[0][1] == pytest.approx(1.0, abs=1e-6)
    assert ranked[0][2] == 1  # the segment achieving the max


def test_video_topk_clamps():
    index, vectors = random_index(n=40, m=8, videos=10)
    assert len(search_videos(index, vectors[0], k=3)) == 3
    assert len(search_videos(index, vectors[0], k=100)) == 10


def test_video_ranking_matches_bruteforce_oracle():
    index, _ = random_index(n=150, m=12, videos=50, seed=11)
    rng = np.random.default_rng(5)
    for _ in range(10):
        q = rng.normal(size=12)
        got = search_videos(index, q, k=50)
        per_video: dict[str, float] = {}
        for i, row in enumerate(index.rows):
            s = cosine(index.matrix[i], q)
            if row.video_id not in per_video or s > per_video[row.video_id]:
                per_video[row.video_id] = s
        oracle = sorted(per_video.items(), key=lambda kv: (-kv[1], kv[0]))
        assert [v for v, _, _ in got] == [v for v, _ in oracle]
        for (_, s_got, _), (_, s_oracle) in zip(got, oracle):
            assert s_got == pytest.approx(s_oracle, abs=1e-12)


# --- persistence ---------------------------------------------------------

def test_save_load_roundtrip_bit_exact(tmp_path):
    index, _ = random_index(n=64, m=32, seed=2)
    path = tmp_path / "idx.vcr"
    save_index(index, path)
    loaded = load_index(path)
    assert np.array_equal(index.matrix, loaded.matrix)
    assert index.rows == loaded.rows
    assert index.provider_id == loaded.provider_id
    assert index.ontology == loaded.ontology
    # resave is byte-identical
    path2 = tmp_path / "idx2.vcr"
    save_index(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_truncated_file_is_corrupt_error(tmp_path):
    index, _ = random_index(n=8, m=4)
    path = tmp_path / "idx.vcr"
    save_index(index, path)
    blob = path.read_bytes()
    path.write_bytes(blob[:len(blob) // 2])
    with pytest.raises(CorruptIndexError):
        load_index(path)


def test_wrong_magic_is_version_error(tmp_path):
    index, _ = random_index(n=8, m=4)
    path = tmp_path / "idx.vcr"
    save_index(index, path)
    blob = bytearray(path.read_bytes())
    blob[:4] = b"NOPE"
    path.write_bytes(bytes(blob))
    with pytest.raises(IndexVersionError, match="VCR1"):
        load_index(path)


def test_flipped_payload_bit_is_checksum_error(tmp_path):
    index, _ = random_index(n=8, m=4)
    path = tmp_path / "idx.vcr"
    save_index(index, path)
    blob = bytearray(path.read_bytes())
    blob[30] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(CorruptIndexError, match="checksum"):
        load_index(path)


def test_normalized_dot_equals_cosine_within_tolerance():
    index, vectors = random_index(n=50, m=8, seed=4)
    rng = np.random.default_rng(1)
    q = rng.normal(size=8)
    hits = search_topk(index, q, k=50)
    for h in hits:
        full = cosine(vectors[h.row], q)
        assert h.score == pytest.approx(full, abs=1e-6)
