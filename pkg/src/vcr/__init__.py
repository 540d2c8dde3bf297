"""Semantic video-archive retrieval.

Fuses per-video multimodal insight records (speech transcription,
on-screen text, frame captions) into time-ordered tagged text, embeds and
indexes the segments for exact cosine top-k search, projects the topic
ontology onto a frozen 2-D map, and ships a reproducible retrieval
evaluation harness plus an HTTP service and CLI.
"""

from .embedding import (EmbeddingVector, MockEmbeddingProvider, ProviderProfile,
                        RemoteEmbeddingProvider, cosine, embed_pooled, make_provider)
from .errors import VcrError
from .evaluation import (EvalReport, QueryRecord, QuerySet, correlation_matrix,
                         load_queries, mrr, recall_at_k, run_eval)
from .fusion import FusedLine, Segment, flatten, render_segment, segment, serialize
from .index import (IndexMatrix, SearchHit, build_index, load_index, save_index,
                    search_topk, search_videos)
from .insights import (Archive, InsightRecord, Source, VideoRecord, filter_ontology,
                       load_archive, save_archive)
from .ocr import OcrCluster, align_center_star, cluster_ocr, consensus, consolidate
from .querygen import (GeneratedQuery, LlmClient, QuerySource, TopicSelection,
                       build_prompt, generate_query)
from .splitting import Fold, SplitAssignment, stratified_split
from .tokenization import TokenizerProfile, count_tokens
from .topics_map import (RelevanceOverlay, TopicNode, TopicsMapModel, build_map,
                         load_map, relevance_overlay, save_map)
from .tsne import project_tsne

__version__ = "0.1.0"
