"""The 2-D semantic map of the topic ontology.

Topic names are embedded, projected once with t-SNE, and the resulting
positions are frozen: every later query only recolors the map, it never
moves a circle. Circle size grows with topic frequency (square-root
scale), and per-query relevance is the min-max normalized cosine between
the generated query and each topic name.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import cosine
from .errors import ProviderMismatchError
from .querygen import GeneratedQuery
from .tsne import project_tsne

RADIUS_MIN = 4.0
RADIUS_MAX = 40.0

DEFAULT_ITERATIONS = 1000
DEFAULT_LEARNING_RATE = 200.0


@dataclass(frozen=True)
class TopicNode:
    name: str
    frequency: int
    x: float
    y: float
    radius_hint: float


@dataclass
class TopicsMapModel:
    nodes: list[TopicNode]
    projection_seed: int
    provider_id: str

    def node(self, name: str) -> TopicNode | None:
        for n in self.nodes:
            if n.name == name:
                return n
        return None


@dataclass(frozen=True)
class RelevanceOverlay:
    relevance: dict[str, float]
    query_id: str


def default_perplexity(n: int) -> float:
    return min(30.0, (n - 1) / 3)


def _radius_scale(frequencies: list[int]) -> list[float]:
    roots = [math.sqrt(f) for f in frequencies]
    lo, hi = min(roots), max(roots)
    if hi == lo:
        mid = (RADIUS_MIN + RADIUS_MAX) / 2
        return [mid for _ in roots]
    span = RADIUS_MAX - RADIUS_MIN
    return [RADIUS_MIN + span * (r - lo) / (hi - lo) for r in roots]


def build_map(ontology, provider, seed: int = 0,
              perplexity: float | None = None,
              iterations: int = DEFAULT_ITERATIONS,
              learning_rate: float = DEFAULT_LEARNING_RATE) -> TopicsMapModel:
    """Embed topic names and project them to frozen 2-D positions.

    ``ontology`` is a (name, frequency) sequence or a name->count mapping
    (mappings are laid out in sorted-name order for reproducibility).
    """
    if isinstance(ontology, dict):
        items = sorted(ontology.items())
    else:
        items = list(ontology)
    if not items:
        raise ValueError("ontology is empty")
    names = [name for name, _ in items]
    frequencies = [int(freq) for _, freq in items]
    vectors = np.vstack([provider.embed(name).values for name in names])
    if perplexity is None:
        perplexity = default_perplexity(len(names))
    positions = project_tsne(vectors, perplexity=perplexity, iterations=iterations,
                             learning_rate=learning_rate, seed=seed)
    radii = _radius_scale(frequencies)
    nodes = [TopicNode(name=names[i], frequency=frequencies[i],
                       x=float(positions[i, 0]), y=float(positions[i, 1]),
                       radius_hint=radii[i])
             for i in range(len(names))]
    return TopicsMapModel(nodes=nodes, projection_seed=seed,
                          provider_id=provider.profile.provider_id)


def relevance_overlay(map_model: TopicsMapModel, query: GeneratedQuery,
                      provider) -> RelevanceOverlay:
    """Per-topic relevance for color coding: cosine of the query against
    each topic name, min-max normalized over the ontology (all-equal
    scores flatten to 0.5)."""
    if provider.profile.provider_id != map_model.provider_id:
        raise ProviderMismatchError(
            f"map built with {map_model.provider_id!r}, "
            f"provider is {provider.profile.provider_id!r}")
    if query.embedding.provider_id != map_model.provider_id:
        raise ProviderMismatchError(
            f"map built with {map_model.provider_id!r}, "
            f"query embedded by {query.embedding.provider_id!r}")
    raw = [cosine(query.embedding, provider.embed(node.name))
           for node in map_model.nodes]
    lo, hi = min(raw), max(raw)
    if hi == lo:
        scores = [0.5] * len(raw)
    else:
        scores = [(r - lo) / (hi - lo) for r in raw]
    query_id = hashlib.sha256(query.query_text.encode("utf-8")).hexdigest()[:16]
    return RelevanceOverlay(
        relevance={node.name: score for node, score in zip(map_model.nodes, scores)},
        query_id=query_id)


def map_to_dict(model: TopicsMapModel) -> dict:
    return {
        "seed": model.projection_seed,
        "provider_id": model.provider_id,
        "nodes": [
            {"name": n.name, "frequency": n.frequency, "x": n.x, "y": n.y,
             "radius_hint": n.radius_hint}
            for n in model.nodes
        ],
    }


def save_map(model: TopicsMapModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(map_to_dict(model), sort_keys=True, indent=1) + "\n",
                          encoding="utf-8")


def load_map(path: str | Path) -> TopicsMapModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    nodes = [TopicNode(name=n["name"], frequency=int(n["frequency"]),
                       x=float(n["x"]), y=float(n["y"]),
                       radius_hint=float(n["radius_hint"]))
             for n in doc["nodes"]]
    return TopicsMapModel(nodes=nodes, projection_seed=int(doc["seed"]),
                          provider_id=str(doc["provider_id"]))
