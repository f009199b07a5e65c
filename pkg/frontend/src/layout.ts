/** Icicle layout: recursive x-partition with child stripes below their parent.
 *
 * A stripe's x-position is the linear xPos(from) with xPos: [1, n] ->
 * [xMin, xMax]; its width is xPos(min(to + 1, n)) - xPos(from), so sibling
 * widths telescope exactly to their parent's width. Record indices (not
 * timestamps) drive position and size, keeping the view compact across
 * temporal gaps. Focusing a stripe re-maps x piecewise so the focus gets the
 * dominant share while its parent, direct neighbors, and children stay
 * reachable.
 */

import type { TreeJson, TreeNode } from './types.js';

export interface Viewport {
  xMin: number;
  xMax: number;
  rowHeight?: number;
  rowGap?: number;
  /** root stripe is visually less prominent */
  rootHeightFactor?: number;
  charWidth?: number;
  labelPadding?: number;
  /** share of width the focused stripe consumes */
  focusShare?: number;
}

export interface Stripe {
  node: TreeNode;
  parentId: string | null;
  x: number;
  width: number;
  y: number;
  height: number;
  labelText: string;
  labelVisible: boolean;
  /** stripes squeezed below half a pixel are excluded from rendering */
  excluded: boolean;
}

export interface IcicleLayout {
  stripes: Stripe[];
  byId: Map<string, Stripe>;
  levels: number[];
  rowY: (level: number) => number;
  height: number;
  xPos: (recordIndex: number) => number;
}

const DEFAULTS = {
  rowHeight: 34,
  rowGap: 2,
  rootHeightFactor: 0.45,
  charWidth: 7,
  labelPadding: 4,
  focusShare: 0.6,
};

/** Linear record-to-pixel map for the unfocused layout. */
export function xPosLinear(n: number, xMin: number, xMax: number): (i: number) => number {
  if (n <= 1) return () => xMin;
  const scale = (xMax - xMin) / (n - 1);
  return (i: number) => xMin + (i - 1) * scale;
}

function piecewise(breaksIn: number[], breaksOut: number[]): (i: number) => number {
  return (i: number) => {
    if (i <= breaksIn[0]) return breaksOut[0];
    const last = breaksIn.length - 1;
    if (i >= breaksIn[last]) return breaksOut[last];
    for (let k = 0; k < last; k++) {
      if (i <= breaksIn[k + 1]) {
        const span = breaksIn[k + 1] - breaksIn[k];
        if (span <= 0) return breaksOut[k + 1];
        const f = (i - breaksIn[k]) / span;
        return breaksOut[k] + f * (breaksOut[k + 1] - breaksOut[k]);
      }
    }
    return breaksOut[last];
  };
}

function findParent(root: TreeNode, id: string): TreeNode | null {
  const stack: TreeNode[] = [root];
  while (stack.length) {
    const node = stack.pop() as TreeNode;
    for (const c of node.children) {
      if (c.id === id) return node;
      stack.push(c);
    }
  }
  return null;
}

function findNode(root: TreeNode, id: string): TreeNode | null {
  const stack: TreeNode[] = [root];
  while (stack.length) {
    const node = stack.pop() as TreeNode;
    if (node.id === id) return node;
    stack.push(...node.children);
  }
  return null;
}

export function stripeLabel(node: TreeNode): string {
  const extra = node.labels.length ? ` ${node.labels.join('; ')}` : '';
  return `${node.from}-${node.to}${extra}`;
}

/** Lay the tree out; pass a focus node id for the zoomed piecewise mapping. */
export function layoutIcicle(tree: TreeJson, viewport: Viewport, focusId?: string): IcicleLayout {
  const cfg = { ...DEFAULTS, ...viewport };
  const n = tree.n;
  let xPos = xPosLinear(n, cfg.xMin, cfg.xMax);

  if (focusId && focusId !== tree.root.id) {
    const focus = findNode(tree.root, focusId);
    const parent = focus ? findParent(tree.root, focusId) : null;
    if (focus && parent) {
      const width = cfg.xMax - cfg.xMin;
      const side = (1 - cfg.focusShare) / 2;
      const leftEmpty = focus.from === parent.from;
      const rightEmpty = focus.to === parent.to;
      // unused side shares flow to the focus stripe
      const leftShare = leftEmpty ? 0 : side;
      const rightShare = rightEmpty ? 0 : side;
      xPos = piecewise(
        [parent.from, focus.from, Math.min(focus.to + 1, n), Math.min(parent.to + 1, n)],
        [
          cfg.xMin,
          cfg.xMin + leftShare * width,
          cfg.xMax - rightShare * width,
          cfg.xMax,
        ],
      );
    }
  }

  const rootH = cfg.rowHeight * cfg.rootHeightFactor;
  const rowY = (level: number) =>
    level === 0 ? 0 : rootH + cfg.rowGap + (level - 1) * (cfg.rowHeight + cfg.rowGap);

  const stripes: Stripe[] = [];
  const byId = new Map<string, Stripe>();
  const levels = new Set<number>();
  const walk = (node: TreeNode, parentId: string | null) => {
    const x = xPos(node.from);
    const width = xPos(Math.min(node.to + 1, n)) - x;
    const height = node.level === 0 ? rootH : cfg.rowHeight;
    const labelText = stripeLabel(node);
    const fits = labelText.length * cfg.charWidth + 2 * cfg.labelPadding <= width;
    const stripe: Stripe = {
      node,
      parentId,
      x,
      width,
      y: rowY(node.level),
      height,
      labelText,
      labelVisible: fits && width >= 0.5,
      excluded: width < 0.5,
    };
    stripes.push(stripe);
    byId.set(node.id, stripe);
    levels.add(node.level);
    for (const c of node.children) walk(c, node.id);
  };
  walk(tree.root, null);

  const maxLevel = Math.max(...levels);
  return {
    stripes,
    byId,
    levels: [...levels].sort((a, b) => a - b),
    rowY,
    height: rowY(maxLevel) + (maxLevel === 0 ? rootH : cfg.rowHeight),
    xPos,
  };
}

/** Ancestor chain (focus included) for subtree highlighting. */
export function ancestorIds(tree: TreeJson, id: string): string[] {
  const path: string[] = [];
  const dfs = (node: TreeNode, trail: string[]): boolean => {
    const next = [...trail, node.id];
    if (node.id === id) {
      path.push(...next);
      return true;
    }
    return node.children.some((c) => dfs(c, next));
  };
  dfs(tree.root, []);
  return path;
}

/** Siblings of the stripe (children of its parent), for arrow-key panning. */
export function siblingIds(tree: TreeJson, id: string): string[] {
  const parent = findParent(tree.root, id);
  return parent ? parent.children.map((c) => c.id) : [id];
}

/** Leaf stripe covering a record index, walking the deepest populated path. */
export function nodeAtRecord(tree: TreeJson, record: number): TreeNode {
  let node = tree.root;
  for (;;) {
    const child = node.children.find((c) => c.from <= record && record <= c.to);
    if (!child) return node;
    node = child;
  }
}
