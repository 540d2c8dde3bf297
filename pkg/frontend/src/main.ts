import { fetchOntology, postSearch } from './api.js';
import { TopicsMap } from './map.js';
import { renderResults } from './results.js';
import { UiStore } from './state.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

async function boot(): Promise<void> {
  const svg = el<HTMLElement>('map') as unknown as SVGSVGElement;
  const tooltip = el<HTMLElement>('tooltip');
  const results = el<HTMLElement>('results');
  const chips = el<HTMLElement>('chips');
  const termInput = el<HTMLInputElement>('term-input');
  const termForm = el<HTMLFormElement>('term-form');
  const status = el<HTMLElement>('status');

  const lassoEnabled = new URLSearchParams(window.location.search).has('lasso');
  const store = new UiStore(postSearch, 5);
  const map = new TopicsMap(svg, tooltip, {
    onToggle: (name) => store.toggleTopic(name),
    onLasso: (names) => store.addTopics(names)
  }, lassoEnabled);

  const renderChips = (): void => {
    chips.replaceChildren();
    const snap = store.snapshot();
    for (const topic of snap.selectedTopics) {
      const chip = document.createElement('button');
      chip.className = 'chip topic-chip';
      chip.textContent = `${topic} ×`;
      chip.addEventListener('click', () => store.toggleTopic(topic));
      chips.appendChild(chip);
    }
    for (const term of snap.customTerms) {
      const chip = document.createElement('button');
      chip.className = 'chip term-chip';
      chip.textContent = `${term} ×`;
      chip.addEventListener('click', () => store.removeCustomTerm(term));
      chips.appendChild(chip);
    }
  };

  store.subscribe((snap) => {
    renderChips();
    const selected = new Set(snap.selectedTopics);
    map.applyOverlay(snap.response ? snap.response.topic_relevance : null, selected);
    renderResults(results, snap.response);
    status.textContent = snap.pending ? 'searching…' : '';
  });

  termForm.addEventListener('submit', (ev) => {
    ev.preventDefault();
    store.addCustomTerm(termInput.value);
    termInput.value = '';
  });

  try {
    const ontology = await fetchOntology();
    map.render(ontology.nodes);
    renderResults(results, null);
  } catch (err) {
    status.textContent = `failed to load ontology: ${String(err)}`;
  }
}

void boot();
