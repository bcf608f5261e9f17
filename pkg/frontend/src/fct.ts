import type {
  BranchHighlight,
  GeometryPayload,
  MemberLayout,
  TreeHighlight,
} from './types.js';

export type FctMode = 'grouped' | 'bundled';

export interface FctOptions {
  width?: number;
  height?: number;
  /** Hover overlay from the highlight endpoints, drawn on top. */
  highlight?: TreeHighlight | BranchHighlight | null;
}

interface Frame {
  width: number;
  height: number;
  sx: number;
  sy: number;
  xLo: number;
  transform: string;
}

const FALLBACK_COLOR = '#333333';
const BOX_HALF_WIDTH = 0.4;

function frame(payload: GeometryPayload, width: number, height: number): Frame {
  const xs = payload.nodes.length ? payload.nodes.map((n) => n.x) : [0];
  const pad = 0.75;
  const xLo = Math.min(...xs) - pad;
  const xHi = Math.max(...xs) + pad;
  const span = Math.max(xHi - xLo, 1e-9);
  const sx = (width - 40) / span;
  const sy = height - 40;
  const transform = `translate(${20 - xLo * sx},${height - 20}) scale(${sx},${-sy})`;
  return { width, height, sx, sy, xLo, transform };
}

function px(f: Frame, x: number): number {
  return 20 - f.xLo * f.sx + x * f.sx;
}

function py(f: Frame, y: number): number {
  return f.height - 20 - y * f.sy;
}

function memberGroup(member: MemberLayout, strokeOpacity: number): string {
  const parts = [`<g class="fct-member" data-t="${member.t}">`];
  for (const e of member.edges) {
    const points = e.points.map((p) => `${p[0]},${p[1]}`).join(' ');
    parts.push(
      `<polyline class="fct-member-edge" points="${points}" fill="none" ` +
        `stroke="#557799" stroke-opacity="${strokeOpacity}" stroke-width="1.5" ` +
        'vector-effect="non-scaling-stroke"/>',
    );
  }
  parts.push('</g>');
  return parts.join('');
}

/**
 * Render the fuzzy contour tree view from a selection payload.
 * grouped superimposes every member layout; bundled draws the
 * alignment edges at the opacity the server computed. All geometry
 * coordinates are taken from the payload as is.
 */
export function renderFct(
  payload: GeometryPayload,
  mode: FctMode,
  opts: FctOptions = {},
): string {
  const f = frame(payload, opts.width ?? 960, opts.height ?? 600);
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${f.width}" height="${f.height}" ` +
      `viewBox="0 0 ${f.width} ${f.height}" class="fct fct-${mode}">`,
    `<g transform="${f.transform}">`,
  ];

  if (mode === 'bundled') {
    for (const e of payload.edges) {
      const [[x0, y0], [cx, cy], [x1, y1]] = e.points;
      parts.push(
        `<path class="fct-edge" data-child="${e.child}" ` +
          `d="M ${x0} ${y0} Q ${cx} ${cy} ${x1} ${y1}" fill="none" stroke="#444444" ` +
          `stroke-opacity="${e.opacity}" stroke-width="2" vector-effect="non-scaling-stroke"/>`,
      );
    }
  } else {
    const share = payload.members.length ? 1 / payload.members.length : 1;
    for (const member of payload.members) {
      parts.push(memberGroup(member, share));
    }
  }
  parts.push('</g>');

  for (const n of payload.nodes) {
    parts.push(
      `<circle class="fct-node" data-id="${n.id}" cx="${px(f, n.x)}" cy="${py(f, n.y)}" ` +
        `r="4" fill="${n.color ?? FALLBACK_COLOR}" fill-opacity="0.9"/>`,
    );
  }

  if (opts.highlight) {
    parts.push(renderOverlay(payload, opts.highlight, f));
  }
  parts.push('</svg>');
  return parts.join('');
}

function renderOverlay(
  payload: GeometryPayload,
  highlight: TreeHighlight | BranchHighlight,
  f: Frame,
): string {
  if ('kind' in highlight && highlight.kind === 'full') {
    const parts = [`<g class="fct-overlay fct-overlay-full" transform="${f.transform}">`];
    for (const e of highlight.member.edges) {
      const points = e.points.map((p) => `${p[0]},${p[1]}`).join(' ');
      parts.push(
        `<polyline class="overlay-member-edge" points="${points}" fill="none" ` +
          'stroke="#d04010" stroke-width="2.5" vector-effect="non-scaling-stroke"/>',
      );
    }
    parts.push('</g>');
    for (const n of highlight.member.nodes) {
      parts.push(
        `<circle class="overlay-member-node" data-id="${n.id}" cx="${px(f, n.x)}" ` +
          `cy="${py(f, n.y)}" r="5" fill="none" stroke="#d04010" stroke-width="2"/>`,
      );
    }
    return parts.join('');
  }

  const ids = 'kind' in highlight ? highlight.branches : [highlight.branch];
  const wanted = new Set(ids);
  const parts = ['<g class="fct-overlay fct-overlay-branches">'];
  for (const b of payload.branches) {
    if (!wanted.has(b.id)) continue;
    const x0 = px(f, b.x - BOX_HALF_WIDTH);
    const x1 = px(f, b.x + BOX_HALF_WIDTH);
    parts.push(
      `<rect class="overlay-branch" data-branch="${b.id}" x="${x0}" y="20" ` +
        `width="${x1 - x0}" height="${f.height - 40}" fill="#d04010" fill-opacity="0.12" ` +
        'stroke="#d04010" stroke-dasharray="4 3"/>',
    );
  }
  parts.push('</g>');
  return parts.join('');
}
