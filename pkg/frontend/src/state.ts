import type { SearchRequest, SearchResponse } from './types.js';

export type SearchGateway = (request: SearchRequest) => Promise<SearchResponse>;

export interface UiSnapshot {
  selectedTopics: string[];
  customTerms: string[];
  response: SearchResponse | null;
  pending: boolean;
}

/**
 * Selection and search-lifecycle state.
 *
 * Every selection change schedules exactly one search (a short debounce
 * collapses bursts such as lasso batches). Responses are applied only if
 * no newer request has been issued since: each request carries a
 * monotonically increasing query id and stale arrivals are dropped.
 */
export class UiStore {
  private selected: string[] = [];
  private custom: string[] = [];
  private response: SearchResponse | null = null;
  private listeners: Array<(snap: UiSnapshot) => void> = [];
  private timer: ReturnType<typeof setTimeout> | null = null;
  private issuedQueryId = 0;
  private appliedQueryId = 0;
  private pending = false;

  constructor(
    private readonly gateway: SearchGateway,
    public k = 5,
    private readonly debounceMs = 120
  ) {}

  subscribe(listener: (snap: UiSnapshot) => void): void {
    this.listeners.push(listener);
  }

  snapshot(): UiSnapshot {
    return {
      selectedTopics: [...this.selected],
      customTerms: [...this.custom],
      response: this.response,
      pending: this.pending
    };
  }

  get hasSelection(): boolean {
    return this.selected.length + this.custom.length > 0;
  }

  isSelected(name: string): boolean {
    return this.selected.includes(name);
  }

  toggleTopic(name: string): void {
    const at = this.selected.indexOf(name);
    if (at >= 0) {
      this.selected.splice(at, 1);
    } else {
      this.selected.push(name);
    }
    this.selectionChanged();
  }

  /** Batch form used by the lasso control: one search for many topics. */
  addTopics(names: string[]): void {
    let changed = false;
    for (const name of names) {
      if (!this.selected.includes(name)) {
        this.selected.push(name);
        changed = true;
      }
    }
    if (changed) {
      this.selectionChanged();
    }
  }

  addCustomTerm(term: string): void {
    const clean = term.trim();
    if (!clean || this.custom.includes(clean)) {
      return;
    }
    this.custom.push(clean);
    this.selectionChanged();
  }

  removeCustomTerm(term: string): void {
    const at = this.custom.indexOf(term);
    if (at < 0) {
      return;
    }
    this.custom.splice(at, 1);
    this.selectionChanged();
  }

  private selectionChanged(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (!this.hasSelection) {
      // empty selection never searches: the map grays out immediately
      this.issuedQueryId += 1; // orphan any in-flight response
      this.response = null;
      this.pending = false;
      this.notify();
      return;
    }
    this.pending = true;
    this.notify();
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire();
    }, this.debounceMs);
  }

  private async fire(): Promise<void> {
    const queryId = ++this.issuedQueryId;
    let result: SearchResponse;
    try {
      result = await this.gateway({
        topics: [...this.selected],
        custom_terms: [...this.custom],
        k: this.k
      });
    } catch {
      if (queryId === this.issuedQueryId) {
        this.pending = false;
        this.notify();
      }
      return;
    }
    if (queryId !== this.issuedQueryId || queryId <= this.appliedQueryId) {
      return; // stale: a newer selection already took over
    }
    this.appliedQueryId = queryId;
    this.response = result;
    this.pending = false;
    this.notify();
  }

  private notify(): void {
    const snap = this.snapshot();
    for (const listener of this.listeners) {
      listener(snap);
    }
  }
}
