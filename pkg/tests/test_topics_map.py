import numpy as np
import pytest

from vcr.embedding import MockEmbeddingProvider, cosine
from vcr.errors import ProviderMismatchError
from vcr.querygen import TopicSelection, generate_query
from vcr.topics_map import (build_map, load_map, map_to_dict, relevance_overlay,
                            save_map)

ONTOLOGY = {
    "Public Law": 40, "Public Policy": 35, "Criminal Law": 20,
    "Marine Biology": 25, "Cell Biology": 30, "Marine Ecology": 15,
    "Space Science": 60, "Space Travel": 10,
}


@pytest.fixture
def provider():
    return MockEmbeddingProvider(dimension=512)


@pytest.fixture
def topic_map(provider):
    return build_map(ONTOLOGY, provider, seed=7, iterations=400)


def test_map_has_one_node_per_topic(topic_map):
    assert {n.name for n in topic_map.nodes} == set(ONTOLOGY)
    for node in topic_map.nodes:
        assert np.isfinite(node.x) and np.isfinite(node.y)


def test_fixed_seed_reproduces_positions(provider, topic_map):
    again = build_map(ONTOLOGY, provider, seed=7, iterations=400)
    assert [(n.x, n.y) for n in again.nodes] == [(n.x, n.y) for n in topic_map.nodes]


def test_radius_monotone_in_frequency(topic_map):
    by_freq = sorted(topic_map.nodes, key=lambda n: n.frequency)
    radii = [n.radius_hint for n in by_freq]
    assert radii == sorted(radii)
    for a, b in zip(by_freq, by_freq[1:]):
        if a.frequency < b.frequency:
            assert a.radius_hint < b.radius_hint


def test_radius_range_and_extremes(topic_map):
    radii = {n.name: n.radius_hint for n in topic_map.nodes}
    assert radii["Space Science"] == 40.0  # most frequent topic gets the cap
    assert radii["Space Travel"] == 4.0
    assert all(4.0 <= r <= 40.0 for r in radii.values())


def test_empty_ontology_rejected(provider):
    with pytest.raises(ValueError):
        build_map({}, provider, seed=0)


def test_semantic_neighbors_land_closer(provider):
    """Names sharing a token should usually sit closer than unrelated names."""
    a, b, c = "Public Law", "Public Policy", "Cell Biology"
    assert cosine(provider.embed(a), provider.embed(b)) > cosine(
        provider.embed(a), provider.embed(c))
    wins = 0
    seeds = range(20)
    for seed in seeds:
        model = build_map(ONTOLOGY, provider, seed=seed, iterations=400)
        pos = {n.name: np.array([n.x, n.y]) for n in model.nodes}
        if np.linalg.norm(pos[a] - pos[b]) < np.linalg.norm(pos[a] - pos[c]):
            wins += 1
    assert wins >= 0.8 * len(seeds)


# --- relevance overlay ---------------------------------------------------

def test_selected_topic_scores_maximum(topic_map, provider):
    query = generate_query(TopicSelection(ontology_topics=("Marine Biology",)),
                           provider)
    raw = {n.name: cosine(query.embedding, provider.embed(n.name))
           for n in topic_map.nodes}
    assert max(raw, key=raw.get) == "Marine Biology"
    overlay = relevance_overlay(topic_map, query, provider)
    assert overlay.relevance["Marine Biology"] == 1.0


def test_overlay_minmax_extremes(topic_map, provider):
    query = generate_query(TopicSelection(ontology_topics=("Space Travel",)),
                           provider)
    values = relevance_overlay(topic_map, query, provider).relevance.values()
    assert min(values) == 0.0
    assert max(values) == 1.0
    assert all(0.0 <= v <= 1.0 for v in values)


def test_all_equal_scores_map_to_half(provider):
    model = build_map({"AA": 1, "BB": 2, "CC": 3, "DD": 4}, provider, seed=0,
                      iterations=300)
    query = generate_query(TopicSelection(custom_terms=("zz",)), provider)
    overlay = relevance_overlay(model, query, provider)
    assert set(overlay.relevance.values()) == {0.5}


def test_overlay_invariant_under_query_scaling(topic_map, provider):
    from vcr.embedding import EmbeddingVector
    from vcr.querygen import GeneratedQuery, QuerySource
    query = generate_query(TopicSelection(ontology_topics=("Public Law",)), provider)
    scaled = GeneratedQuery(
        prompt=query.prompt, query_text=query.query_text, source=query.source,
        embedding=EmbeddingVector(3.5 * query.embedding.values, "mock"))
    a = relevance_overlay(topic_map, query, provider).relevance
    b = relevance_overlay(topic_map, scaled, provider).relevance
    rank_a = sorted(a, key=a.get)
    rank_b = sorted(b, key=b.get)
    assert rank_a == rank_b


def test_positions_frozen_across_overlays(topic_map, provider):
    before = [(n.x, n.y) for n in topic_map.nodes]
    for topic in ("Public Law", "Cell Biology", "Space Science"):
        relevance_overlay(topic_map,
                          generate_query(TopicSelection(ontology_topics=(topic,)),
                                         provider),
                          provider)
    assert [(n.x, n.y) for n in topic_map.nodes] == before


def test_provider_mismatch_rejected(topic_map):
    other = MockEmbeddingProvider(dimension=512)
    other.profile.provider_id = "other"
    query = generate_query(TopicSelection(ontology_topics=("Public Law",)), other)
    with pytest.raises(ProviderMismatchError):
        relevance_overlay(topic_map, query, other)


# --- persistence ---------------------------------------------------------

def test_map_export_schema(topic_map):
    doc = map_to_dict(topic_map)
    assert doc["seed"] == 7
    assert doc["provider_id"] == "mock"
    node = doc["nodes"][0]
    assert set(node) == {"name", "frequency", "x", "y", "radius_hint"}


def test_map_save_load_roundtrip(tmp_path, topic_map):
    path = tmp_path / "map.json"
    save_map(topic_map, path)
    loaded = load_map(path)
    assert loaded.projection_seed == topic_map.projection_seed
    assert loaded.provider_id == topic_map.provider_id
    assert loaded.nodes == topic_map.nodes
