/** SVG renderer for the icicle with hover coloring, focus zoom, and gestures. */

import { divergingColor, FADED_OPACITY, HIGHLIGHT_STROKE, NEUTRAL_FILL } from './colors.js';
import { ancestorIds, layoutIcicle, siblingIds, type IcicleLayout, type Viewport } from './layout.js';
import type { TreeJson, TreeNode } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface IcicleHandlers {
  onHover?: (node: TreeNode | null) => void;
  onFocus?: (node: TreeNode) => void;
  onDoubleClick?: (node: TreeNode) => void;
  onForward?: (node: TreeNode) => void;
  onBookmarkToggle?: (node: TreeNode) => void;
  onLabelRequest?: (node: TreeNode) => void;
}

export class IcicleView {
  private tree: TreeJson | null = null;
  private layout: IcicleLayout | null = null;
  private focusId: string | undefined;
  private hoveredId: string | null = null;
  readonly svg: SVGSVGElement;

  constructor(
    container: HTMLElement,
    private readonly viewport: Viewport,
    private readonly handlers: IcicleHandlers = {},
  ) {
    this.svg = document.createElementNS(SVG_NS, 'svg') as SVGSVGElement;
    this.svg.setAttribute('class', 'icicle');
    this.svg.setAttribute('tabindex', '0');
    container.appendChild(this.svg);
    this.svg.addEventListener('keydown', (ev) => this.onKey(ev as KeyboardEvent));
  }

  setTree(tree: TreeJson): void {
    this.tree = tree;
    this.focusId = undefined;
    this.render();
  }

  focus(nodeId: string | undefined): void {
    this.focusId = nodeId;
    this.render();
  }

  get currentLayout(): IcicleLayout | null {
    return this.layout;
  }

  render(): void {
    if (!this.tree) return;
    const layout = layoutIcicleWithLevels(this.tree, this.viewport, this.focusId);
    this.layout = layout;
    this.svg.setAttribute('width', String(this.viewport.xMax + 70));
    this.svg.setAttribute('height', String(layout.height + 4));
    this.svg.textContent = '';

    for (const level of layout.levels) {
      const text = document.createElementNS(SVG_NS, 'text');
      text.setAttribute('class', 'level-label');
      text.setAttribute('x', '2');
      text.setAttribute('y', String(layout.rowY(level) + 14));
      text.textContent = level === 0 ? 'root' : `level ${level}`;
      this.svg.appendChild(text);
    }

    for (const stripe of layout.stripes) {
      if (stripe.excluded) continue;
      const g = document.createElementNS(SVG_NS, 'g');
      g.setAttribute('class', 'stripe');
      g.setAttribute('data-node-id', stripe.node.id);
      const rect = document.createElementNS(SVG_NS, 'rect');
      rect.setAttribute('x', String(stripe.x + 64));
      rect.setAttribute('y', String(stripe.y));
      rect.setAttribute('width', String(Math.max(stripe.width, 0.5)));
      rect.setAttribute('height', String(stripe.height));
      rect.setAttribute('fill', NEUTRAL_FILL);
      rect.setAttribute('stroke', '#ffffff');
      rect.setAttribute('stroke-width', '0.5');
      g.appendChild(rect);
      if (stripe.labelVisible) {
        const label = document.createElementNS(SVG_NS, 'text');
        label.setAttribute('class', 'stripe-label');
        label.setAttribute('x', String(stripe.x + 64 + stripe.width / 2));
        label.setAttribute('y', String(stripe.y + stripe.height / 2 + 4));
        label.setAttribute('text-anchor', 'middle');
        label.textContent = stripe.labelText;
        g.appendChild(label);
      }
      if (stripe.node.bookmarked) {
        const mark = document.createElementNS(SVG_NS, 'text');
        mark.setAttribute('class', 'bookmark-icon');
        mark.setAttribute('x', String(stripe.x + 64 + 3));
        mark.setAttribute('y', String(stripe.y + 12));
        mark.textContent = '★';
        g.appendChild(mark);
      }
      this.bind(g, stripe.node);
      this.svg.appendChild(g);
    }
  }

  private bind(g: SVGGElement, node: TreeNode): void {
    g.addEventListener('mouseenter', () => {
      this.hoveredId = node.id;
      this.highlightSubtree(node.id);
      this.handlers.onHover?.(node);
    });
    g.addEventListener('mouseleave', () => {
      if (this.hoveredId === node.id) {
        this.hoveredId = null;
        this.clearHighlight();
        this.handlers.onHover?.(null);
      }
    });
    g.addEventListener('click', () => {
      this.focus(node.id);
      this.handlers.onFocus?.(node);
    });
    g.addEventListener('dblclick', () => this.handlers.onDoubleClick?.(node));
    g.addEventListener('contextmenu', (ev) => {
      ev.preventDefault();
      this.handlers.onForward?.(node);
    });
  }

  private onKey(ev: KeyboardEvent): void {
    if (!this.tree) return;
    const target = this.hoveredId ?? this.focusId;
    if (!target) return;
    const node = this.layout?.byId.get(target)?.node;
    if (ev.key === 'ArrowLeft' || ev.key === 'ArrowRight') {
      const sibs = siblingIds(this.tree, target);
      const at = sibs.indexOf(target);
      const next = sibs[at + (ev.key === 'ArrowRight' ? 1 : -1)];
      if (next) {
        this.focus(next);
        const stripe = this.layout?.byId.get(next);
        if (stripe) this.handlers.onFocus?.(stripe.node);
      }
      ev.preventDefault();
    } else if (ev.key === 'b' && node) {
      this.handlers.onBookmarkToggle?.(node);
    } else if (ev.key === 'l' && node) {
      this.handlers.onLabelRequest?.(node);
    }
  }

  /** Hovered stripe and its wrapping ancestors get a green border. */
  highlightSubtree(nodeId: string): void {
    if (!this.tree) return;
    this.clearHighlight();
    const chain = new Set(ancestorIds(this.tree, nodeId));
    for (const g of Array.from(this.svg.querySelectorAll('g.stripe'))) {
      const id = g.getAttribute('data-node-id') ?? '';
      if (chain.has(id)) {
        const rect = g.querySelector('rect');
        rect?.setAttribute('stroke', HIGHLIGHT_STROKE);
        rect?.setAttribute('stroke-width', '2');
        g.classList.add('highlighted');
      }
    }
  }

  clearHighlight(): void {
    for (const g of Array.from(this.svg.querySelectorAll('g.stripe.highlighted'))) {
      const rect = g.querySelector('rect');
      rect?.setAttribute('stroke', '#ffffff');
      rect?.setAttribute('stroke-width', '0.5');
      g.classList.remove('highlighted');
    }
  }

  /** Fill the hovered sibling group from color positions; fade everything else. */
  applySiblingColors(positions: Map<string, number>): void {
    for (const g of Array.from(this.svg.querySelectorAll('g.stripe'))) {
      const id = g.getAttribute('data-node-id') ?? '';
      const rect = g.querySelector('rect');
      if (!rect) continue;
      const pos = positions.get(id);
      if (pos !== undefined) {
        rect.setAttribute('fill', divergingColor(pos));
        rect.setAttribute('fill-opacity', '1');
      } else {
        rect.setAttribute('fill', NEUTRAL_FILL);
        rect.setAttribute('fill-opacity', String(FADED_OPACITY));
      }
    }
  }

  clearSiblingColors(): void {
    for (const rect of Array.from(this.svg.querySelectorAll('g.stripe rect'))) {
      rect.setAttribute('fill', NEUTRAL_FILL);
      rect.setAttribute('fill-opacity', '1');
    }
  }
}

function layoutIcicleWithLevels(tree: TreeJson, viewport: Viewport, focusId?: string): IcicleLayout {
  return layoutIcicle(tree, viewport, focusId);
}
