import { GRAY, relevanceColor } from './palette.js';
import type { TopicNode } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const CANVAS = 1000; // fixed internal coordinate space
const MARGIN = 60;

export interface MapCallbacks {
  onToggle: (name: string) => void;
  onLasso?: (names: string[]) => void;
}

/**
 * The ontology scatter. Circle positions are laid out once per ontology
 * payload and never move afterward; searches only restyle fills. With no
 * overlay the whole map is gray.
 */
export class TopicsMap {
  private circles = new Map<string, SVGCircleElement>();
  private nodes: TopicNode[] = [];
  private viewBox = { x: 0, y: 0, w: CANVAS, h: CANVAS };
  private dragging = false;
  private dragStart = { x: 0, y: 0 };
  private lassoRect: SVGRectElement | null = null;
  private lassoStart = { x: 0, y: 0 };
  private positions = new Map<string, { x: number; y: number }>();

  constructor(
    private readonly svg: SVGSVGElement,
    private readonly tooltip: HTMLElement,
    private readonly callbacks: MapCallbacks,
    private readonly lassoEnabled = false
  ) {
    this.svg.setAttribute('viewBox', `0 0 ${CANVAS} ${CANVAS}`);
    this.installPanZoom();
  }

  render(nodes: TopicNode[]): void {
    this.nodes = nodes;
    this.svg.replaceChildren();
    this.circles.clear();
    this.positions.clear();

    const xs = nodes.map((n) => n.x);
    const ys = nodes.map((n) => n.y);
    const minX = Math.min(...xs);
    const maxX = Math.max(...xs);
    const minY = Math.min(...ys);
    const maxY = Math.max(...ys);
    const spanX = maxX - minX || 1;
    const spanY = maxY - minY || 1;
    const scale = (CANVAS - 2 * MARGIN) / Math.max(spanX, spanY);

    for (const node of nodes) {
      const cx = MARGIN + (node.x - minX) * scale;
      const cy = MARGIN + (node.y - minY) * scale;
      this.positions.set(node.name, { x: cx, y: cy });
      const circle = document.createElementNS(SVG_NS, 'circle');
      circle.setAttribute('cx', cx.toFixed(3));
      circle.setAttribute('cy', cy.toFixed(3));
      circle.setAttribute('r', String(node.radius_hint));
      circle.setAttribute('fill', GRAY);
      circle.setAttribute('data-name', node.name);
      circle.classList.add('topic-circle');
      circle.addEventListener('click', () => this.callbacks.onToggle(node.name));
      circle.addEventListener('mouseenter', (ev) => this.showTooltip(node, ev));
      circle.addEventListener('mouseleave', () => this.hideTooltip());
      this.svg.appendChild(circle);
      this.circles.set(node.name, circle);
    }
    this.applyOverlay(null, new Set());
  }

  /** Restyle fills from per-topic relevance; null overlay grays everything. */
  applyOverlay(relevance: Record<string, number> | null, selected: Set<string>): void {
    this.relevance = relevance;
    for (const node of this.nodes) {
      const circle = this.circles.get(node.name);
      if (!circle) {
        continue;
      }
      const value = relevance ? relevance[node.name] : undefined;
      circle.setAttribute('fill', value === undefined ? GRAY : relevanceColor(value));
      circle.classList.toggle('selected', selected.has(node.name));
    }
  }

  private relevance: Record<string, number> | null = null;

  positionOf(name: string): { x: number; y: number } | undefined {
    return this.positions.get(name);
  }

  private showTooltip(node: TopicNode, ev: MouseEvent): void {
    const value = this.relevance ? this.relevance[node.name] : undefined;
    const relevanceLine =
      value === undefined ? '' : `<div>relevance: ${value.toFixed(2)}</div>`;
    this.tooltip.innerHTML =
      `<strong>${node.name}</strong>` +
      `<div>${node.frequency} videos</div>` +
      relevanceLine;
    this.tooltip.style.display = 'block';
    this.tooltip.style.left = `${ev.clientX + 12}px`;
    this.tooltip.style.top = `${ev.clientY + 12}px`;
  }

  private hideTooltip(): void {
    this.tooltip.style.display = 'none';
  }

  private setViewBox(): void {
    const { x, y, w, h } = this.viewBox;
    this.svg.setAttribute('viewBox', `${x.toFixed(2)} ${y.toFixed(2)} ${w.toFixed(2)} ${h.toFixed(2)}`);
  }

  private toCanvas(ev: MouseEvent): { x: number; y: number } {
    const rect = this.svg.getBoundingClientRect();
    const px = rect.width ? (ev.clientX - rect.left) / rect.width : 0;
    const py = rect.height ? (ev.clientY - rect.top) / rect.height : 0;
    return {
      x: this.viewBox.x + px * this.viewBox.w,
      y: this.viewBox.y + py * this.viewBox.h
    };
  }

  private installPanZoom(): void {
    this.svg.addEventListener('wheel', (ev: WheelEvent) => {
      ev.preventDefault();
      const factor = ev.deltaY > 0 ? 1.15 : 1 / 1.15;
      const focus = this.toCanvas(ev);
      const { x, y, w, h } = this.viewBox;
      this.viewBox = {
        x: focus.x - (focus.x - x) * factor,
        y: focus.y - (focus.y - y) * factor,
        w: w * factor,
        h: h * factor
      };
      this.setViewBox();
    });
    this.svg.addEventListener('mousedown', (ev: MouseEvent) => {
      if (this.lassoEnabled && ev.shiftKey) {
        this.beginLasso(ev);
        return;
      }
      this.dragging = true;
      this.dragStart = { x: ev.clientX, y: ev.clientY };
    });
    this.svg.addEventListener('mousemove', (ev: MouseEvent) => {
      if (this.lassoRect) {
        this.updateLasso(ev);
        return;
      }
      if (!this.dragging) {
        return;
      }
      const rect = this.svg.getBoundingClientRect();
      const kx = rect.width ? this.viewBox.w / rect.width : 0;
      const ky = rect.height ? this.viewBox.h / rect.height : 0;
      this.viewBox.x -= (ev.clientX - this.dragStart.x) * kx;
      this.viewBox.y -= (ev.clientY - this.dragStart.y) * ky;
      this.dragStart = { x: ev.clientX, y: ev.clientY };
      this.setViewBox();
    });
    const stop = (ev: MouseEvent) => {
      this.dragging = false;
      if (this.lassoRect) {
        this.finishLasso(ev);
      }
    };
    this.svg.addEventListener('mouseup', stop);
    this.svg.addEventListener('mouseleave', stop);
  }

  private beginLasso(ev: MouseEvent): void {
    this.lassoStart = this.toCanvas(ev);
    const rect = document.createElementNS(SVG_NS, 'rect');
    rect.classList.add('lasso');
    this.svg.appendChild(rect);
    this.lassoRect = rect;
    this.updateLasso(ev);
  }

  private updateLasso(ev: MouseEvent): void {
    if (!this.lassoRect) {
      return;
    }
    const now = this.toCanvas(ev);
    const x = Math.min(this.lassoStart.x, now.x);
    const y = Math.min(this.lassoStart.y, now.y);
    this.lassoRect.setAttribute('x', String(x));
    this.lassoRect.setAttribute('y', String(y));
    this.lassoRect.setAttribute('width', String(Math.abs(now.x - this.lassoStart.x)));
    this.lassoRect.setAttribute('height', String(Math.abs(now.y - this.lassoStart.y)));
  }

  private finishLasso(ev: MouseEvent): void {
    const rect = this.lassoRect;
    this.lassoRect = null;
    if (!rect) {
      return;
    }
    const x0 = Number(rect.getAttribute('x'));
    const y0 = Number(rect.getAttribute('y'));
    const x1 = x0 + Number(rect.getAttribute('width'));
    const y1 = y0 + Number(rect.getAttribute('height'));
    rect.remove();
    const caught: string[] = [];
    for (const [name, pos] of this.positions) {
      if (pos.x >= x0 && pos.x <= x1 && pos.y >= y0 && pos.y <= y1) {
        caught.push(name);
      }
    }
    if (caught.length && this.callbacks.onLasso) {
      this.callbacks.onLasso(caught);
    }
    void ev;
  }
}
