import type { SearchResponse, VideoResult } from './types.js';

export type OpenPlayer = (url: string) => void;

function formatCount(value: number | null): string {
  if (value === null || value === undefined) {
    return '–';
  }
  if (value >= 1_000_000) {
    return `${(value / 1_000_000).toFixed(1)}M`;
  }
  if (value >= 1_000) {
    return `${(value / 1_000).toFixed(1)}k`;
  }
  return String(value);
}

function card(result: VideoResult, openPlayer: OpenPlayer): HTMLElement {
  const el = document.createElement('article');
  el.className = 'result-card';
  el.dataset.videoId = result.video_id;

  const thumb = document.createElement('div');
  thumb.className = 'thumb';
  if (result.thumbnail_url) {
    const img = document.createElement('img');
    img.src = result.thumbnail_url;
    img.alt = result.title;
    thumb.appendChild(img);
  } else {
    thumb.textContent = '▶';
  }
  const playerUrl = result.player_url ?? result.thumbnail_url;
  if (playerUrl) {
    thumb.classList.add('clickable');
    thumb.addEventListener('click', () => openPlayer(playerUrl));
  }
  el.appendChild(thumb);

  const body = document.createElement('div');
  body.className = 'card-body';
  const title = document.createElement('h3');
  title.className = 'title';
  title.textContent = result.title || result.video_id;
  body.appendChild(title);

  const author = document.createElement('div');
  author.className = 'author';
  author.textContent = result.author || 'unknown author';
  body.appendChild(author);

  const meta = document.createElement('div');
  meta.className = 'meta';
  const date = result.event_date ?? 'undated';
  meta.textContent =
    `${date} · ${formatCount(result.views)} views · ` +
    `${formatCount(result.likes)} likes`;
  body.appendChild(meta);

  const score = document.createElement('div');
  score.className = 'score';
  score.textContent = `similarity ${result.score.toFixed(3)}`;
  body.appendChild(score);

  el.appendChild(body);
  return el;
}

export function renderResults(
  container: HTMLElement,
  response: SearchResponse | null,
  openPlayer: OpenPlayer = (url) => window.open(url, '_blank')
): void {
  container.replaceChildren();
  if (!response) {
    const empty = document.createElement('p');
    empty.className = 'empty-state';
    empty.textContent = 'Select topics on the map to search the archive.';
    container.appendChild(empty);
    return;
  }
  const caption = document.createElement('p');
  caption.className = 'query-caption';
  caption.textContent = `“${response.query_text}”`;
  container.appendChild(caption);
  for (const result of response.results) {
    container.appendChild(card(result, openPlayer));
  }
}
