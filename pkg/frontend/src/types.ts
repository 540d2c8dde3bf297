export interface TopicNode {
  name: string;
  frequency: number;
  x: number;
  y: number;
  radius_hint: number;
}

export interface OntologyPayload {
  seed: number;
  provider_id: string;
  nodes: TopicNode[];
}

export interface SearchRequest {
  topics: string[];
  custom_terms: string[];
  k: number;
}

export interface BestSegment {
  segment_idx: number;
  start_s: number | null;
  end_s: number | null;
}

export interface VideoResult {
  video_id: string;
  title: string;
  author: string;
  event_date: string | null;
  views: number | null;
  likes: number | null;
  thumbnail_url: string | null;
  player_url: string | null;
  score: number;
  best_segment: BestSegment;
}

export interface SearchResponse {
  query_text: string;
  query_source: 'LLM' | 'TEMPLATE';
  results: VideoResult[];
  topic_relevance: Record<string, number>;
}
